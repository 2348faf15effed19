"""Binary sentence filter, class-imbalance strategies and k-fold subsets."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .checkpoint import read_container, write_container
from .corpus import Document, Sentence, segment_sentences
from .dataset import PreparedSentence
from .embeddings import EmbedderConfig, apply_dropout, build_embedder
from .errors import ToxtagError
from .optim import AdamW


@dataclass(frozen=True)
class FilterExample:
    doc_id: str
    sentence: Sentence
    label: int  # 1 = contains at least one trigger/argument span


def build_filter_dataset(corpus: Sequence[Document]) -> list[FilterExample]:
    """Label each sentence positive iff it overlaps any gold span."""
    out = []
    for doc in corpus:
        spans = (*doc.trigger_spans, *doc.argument_spans)
        for sent in segment_sentences(doc):
            positive = any(
                s.end > sent.start and s.start < sent.end for s in spans
            )
            out.append(FilterExample(doc.doc_id, sent, int(positive)))
    return out


@dataclass
class FilterConfig:
    learning_rate: float = 1e-5
    batch_size: int = 16
    epochs: int = 5
    dropout: float = 0.1
    weight_decay: float = 0.01
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    seed: int = 0
    threshold: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.threshold < 1.0:
            raise ToxtagError(f"threshold must be in (0, 1), got {self.threshold}")
        if self.epochs < 1:
            raise ToxtagError(f"epochs must be >= 1, got {self.epochs}")
        if not 0.0 <= self.dropout < 1.0:
            raise ToxtagError(f"dropout must be in [0, 1), got {self.dropout}")


class FilterModel:
    """Mean-pooled token embeddings into a 2-way linear softmax classifier."""

    def __init__(
        self,
        embedder_config: EmbedderConfig,
        weights: np.ndarray,
        bias: np.ndarray,
        threshold: float = 0.5,
    ):
        if weights.shape != (embedder_config.dim, 2) or bias.shape != (2,):
            raise ToxtagError(
                f"filter parameter shapes {weights.shape}/{bias.shape} do not "
                f"match dim {embedder_config.dim}"
            )
        if not 0.0 < threshold < 1.0:
            raise ToxtagError(f"threshold must be in (0, 1), got {threshold}")
        self.embedder_config = embedder_config
        self.weights = weights
        self.bias = bias
        self.threshold = threshold
        self._embedder = None

    def _embed_mean(self, sentence: Sentence) -> np.ndarray:
        if self._embedder is None:
            self._embedder = build_embedder(self.embedder_config)
        H = self._embedder.embed(
            sentence.tokens, doc_id=sentence.doc_id, sentence_index=sentence.index
        )
        return H.mean(axis=0)

    def positive_probability(self, sentence: Sentence) -> float:
        logits = self._embed_mean(sentence) @ self.weights + self.bias
        logits = logits - logits.max()
        probs = np.exp(logits)
        probs /= probs.sum()
        return float(probs[1])

    def keep(self, sentence: Sentence) -> bool:
        return self.positive_probability(sentence) >= self.threshold

    def save(self, path: str | Path, config: FilterConfig | None = None) -> None:
        payload = {
            "embedder_config": asdict(self.embedder_config),
            "threshold": self.threshold,
            "filter_config": asdict(config) if config else None,
        }
        write_container(
            path, "filter", payload, {"weights": self.weights, "bias": self.bias}
        )

    @classmethod
    def load(cls, path: str | Path) -> "FilterModel":
        payload, tensors = read_container(path, expected_kind="filter")
        return cls(
            EmbedderConfig(**payload["embedder_config"]),
            tensors["weights"],
            tensors["bias"],
            payload["threshold"],
        )


def train_filter(
    examples: Sequence[FilterExample],
    config: FilterConfig,
    embedder_config: EmbedderConfig | None = None,
) -> FilterModel:
    """Minimize softmax cross-entropy over mean-pooled sentence embeddings.

    Deterministic given the seed. Raises when the data is empty or contains
    a single class.
    """
    if not examples:
        raise ToxtagError("cannot train the sentence filter on empty data")
    labels = np.array([ex.label for ex in examples], dtype=np.int64)
    if len(set(labels.tolist())) < 2:
        raise ToxtagError(
            "sentence filter training needs both positive and negative sentences"
        )
    embedder_config = embedder_config or EmbedderConfig()
    embedder = build_embedder(embedder_config)
    rng = np.random.default_rng(config.seed)
    X = np.stack(
        [
            embedder.embed(
                ex.sentence.tokens,
                doc_id=ex.doc_id,
                sentence_index=ex.sentence.index,
            ).mean(axis=0)
            for ex in examples
        ]
    )
    d = embedder_config.dim
    params = {
        "weights": rng.uniform(-0.1, 0.1, size=(d, 2)),
        "bias": rng.uniform(-0.1, 0.1, size=2),
    }
    opt = AdamW(
        params,
        config.learning_rate,
        config.adam_beta1,
        config.adam_beta2,
        config.adam_epsilon,
        config.weight_decay,
    )
    n = len(examples)
    for _ in range(config.epochs):
        order = rng.permutation(n)
        for first in range(0, n, config.batch_size):
            idx = order[first : first + config.batch_size]
            Xb = apply_dropout(X[idx], config.dropout, rng)
            logits = Xb @ params["weights"] + params["bias"]
            logits -= logits.max(axis=1, keepdims=True)
            probs = np.exp(logits)
            probs /= probs.sum(axis=1, keepdims=True)
            dlogits = probs
            dlogits[np.arange(len(idx)), labels[idx]] -= 1.0
            dlogits /= len(idx)
            opt.step(
                {"weights": Xb.T @ dlogits, "bias": dlogits.sum(axis=0)}
            )
    return FilterModel(
        embedder_config, params["weights"], params["bias"], config.threshold
    )


def filter_sentences(
    model: FilterModel, sentences: Sequence[Sentence]
) -> list[Sentence]:
    """Keep sentences whose positive-class probability reaches the threshold,
    preserving order."""
    return [s for s in sentences if model.keep(s)]


def class_weights(
    tag_sequences: Sequence[np.ndarray], num_tags: int
) -> np.ndarray:
    """Inverse-frequency tag weights, total/(C * count); unseen tags get the
    maximum computed weight. Balanced data yields all-ones."""
    counts = np.zeros(num_tags, dtype=np.int64)
    for seq in tag_sequences:
        counts += np.bincount(np.asarray(seq, dtype=np.int64), minlength=num_tags)
    total = counts.sum()
    if total == 0:
        raise ToxtagError("class_weights requires at least one tagged token")
    weights = np.zeros(num_tags)
    seen = counts > 0
    weights[seen] = total / (num_tags * counts[seen])
    if not seen.all():
        weights[~seen] = weights[seen].max()
    return weights


def oversample(
    examples: Sequence[PreparedSentence], ratios: Mapping[str, int]
) -> list[PreparedSentence]:
    """Duplicate sentences per trigger-class ratio; a sentence with several
    trigger classes is duplicated by the maximum of its ratios, and sentences
    without triggers appear once."""
    for cat, ratio in ratios.items():
        if int(ratio) != ratio or ratio < 1:
            raise ToxtagError(f"oversample ratio for {cat} must be an integer >= 1")
    out: list[PreparedSentence] = []
    for ex in examples:
        reps = max((int(ratios.get(c, 1)) for c in ex.trigger_categories), default=1)
        out.extend([ex] * reps)
    return out


def weighted_sampler(
    examples: Sequence[PreparedSentence],
    rng: np.random.Generator,
    epoch_size: int,
    span_weight: float = 3.0,
) -> list[PreparedSentence]:
    """Sample with replacement, probability proportional to the per-sentence
    weight (``span_weight`` for span-bearing sentences, 1 otherwise)."""
    if span_weight <= 0:
        raise ToxtagError(f"span weight must be positive, got {span_weight}")
    if not examples:
        raise ToxtagError("cannot sample from an empty example list")
    weights = np.array(
        [span_weight if ex.has_spans else 1.0 for ex in examples], dtype=np.float64
    )
    probs = weights / weights.sum()
    idx = rng.choice(len(examples), size=epoch_size, replace=True, p=probs)
    return [examples[i] for i in idx]


def kfold_subsets(corpus: Sequence, k: int, seed: int) -> list[list]:
    """k training subsets: shuffle by seed, cut into k parts with sizes
    differing by at most one, subset i = everything except part i."""
    if k < 2:
        raise ToxtagError(f"k must be >= 2, got {k}")
    if len(corpus) < k:
        raise ToxtagError(f"corpus of {len(corpus)} documents is smaller than k={k}")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(corpus))
    parts = np.array_split(order, k)
    subsets = []
    for i in range(k):
        keep = np.concatenate([p for j, p in enumerate(parts) if j != i])
        subsets.append([corpus[j] for j in keep])
    return subsets


def write_fold_manifests(
    subsets: Sequence[Sequence[Document]], directory: str | Path
) -> list[Path]:
    """One text file per training subset listing its doc_ids, one per line."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, subset in enumerate(subsets):
        path = directory / f"subset_{i}.txt"
        path.write_text(
            "".join(f"{doc.doc_id}\n" for doc in subset), encoding="utf-8"
        )
        paths.append(path)
    return paths


def read_doc_id_manifest(path: str | Path) -> list[str]:
    return [
        line.strip()
        for line in Path(path).read_text(encoding="utf-8").splitlines()
        if line.strip()
    ]
