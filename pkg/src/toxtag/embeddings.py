"""Per-token representation vectors behind a pluggable provider contract.

The default provider is a deterministic hashed lexical embedder: no training,
no vocabulary files, stable across platforms. A precomputed provider replays
vectors exported by external tooling (e.g. a transformer encoder) from a text
file, keyed by (doc_id, sentence_index, token_index).
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Sequence

import numpy as np

from .corpus import Token
from .errors import EmbeddingLookupError, ToxtagError

FEATURE_TEMPLATES = ("lower", "prefix3", "suffix3", "shape")


@dataclass(frozen=True)
class EmbedderConfig:
    provider: str = "hashed"  # "hashed" | "precomputed"
    dim: int = 128
    hash_seed: int = 0
    window: int = 1  # neighbouring tokens per side feeding the features
    path: str | None = None  # precomputed vectors file

    def __post_init__(self):
        if self.dim <= 0:
            raise ToxtagError(f"embedding dim must be positive, got {self.dim}")
        if self.provider not in ("hashed", "precomputed"):
            raise ToxtagError(f"unknown embedding provider {self.provider!r}")
        if self.window < 0:
            raise ToxtagError(f"window must be >= 0, got {self.window}")


def word_shape(form: str) -> str:
    """Xx/dd pattern: uppercase -> X, lowercase -> x, digit -> d."""
    out = []
    for ch in form:
        if ch.isdigit():
            out.append("d")
        elif ch.isupper():
            out.append("X")
        elif ch.islower():
            out.append("x")
        else:
            out.append(ch)
    return "".join(out)


@lru_cache(maxsize=262144)
def _hash_feature(feature: str, seed: int, dim: int) -> tuple[int, float]:
    """Stable 64-bit feature hash -> (bucket, sign). blake2b keyed by the
    seed keeps the mapping identical across platforms and processes."""
    key = seed.to_bytes(8, "little", signed=True)
    digest = hashlib.blake2b(feature.encode("utf-8"), digest_size=8, key=key).digest()
    h = int.from_bytes(digest, "little")
    sign = 1.0 if h & 1 else -1.0
    return (h >> 1) % dim, sign


def _token_features(form: str) -> tuple[str, ...]:
    lower = form.lower()
    return (lower, lower[:3], lower[-3:], word_shape(form))


class HashedEmbedder:
    """Deterministic signed-feature-hashing embedder.

    Each token contributes the four templates for itself and for every
    neighbour within the window (absent neighbours use positional boundary
    sentinels), each hashed into one of ``dim`` signed buckets; the vector is
    the signed indicator sum scaled by 1/sqrt(feature count).
    """

    def __init__(self, config: EmbedderConfig):
        self.config = config
        self.dim = config.dim
        self._n_features = len(FEATURE_TEMPLATES) * (2 * config.window + 1)

    def embed(
        self,
        tokens: Sequence[Token],
        doc_id: str | None = None,
        sentence_index: int | None = None,
        token_offset: int = 0,
    ) -> np.ndarray:
        if not tokens:
            raise ToxtagError("hashed embedder requires a non-empty token list")
        cfg = self.config
        out = np.zeros((len(tokens), self.dim))
        scale = 1.0 / math.sqrt(self._n_features)
        forms = [t.text for t in tokens]
        for i in range(len(tokens)):
            row = out[i]
            for off in range(-cfg.window, cfg.window + 1):
                j = i + off
                if 0 <= j < len(forms):
                    values = _token_features(forms[j])
                else:
                    sentinel = f"<pad{off:+d}>"
                    values = tuple(sentinel for _ in FEATURE_TEMPLATES)
                for template, value in zip(FEATURE_TEMPLATES, values):
                    bucket, sign = _hash_feature(
                        f"{off:+d}:{template}:{value}", cfg.hash_seed, cfg.dim
                    )
                    row[bucket] += sign
            row *= scale
        return out


class PrecomputedEmbedder:
    """Replays externally computed vectors from a text file.

    File format: a UTF-8 header line ``dim=<d>`` followed by one record per
    line, ``doc_id<TAB>sentence_index<TAB>token_index<TAB>v1 v2 ... vd`` with
    space-separated decimal floats.
    """

    def __init__(self, config: EmbedderConfig):
        if config.path is None:
            raise ToxtagError("precomputed provider requires a vectors file path")
        self.config = config
        text = Path(config.path).read_text(encoding="utf-8")
        lines = text.splitlines()
        if not lines or not lines[0].startswith("dim="):
            raise ToxtagError(f"{config.path}: missing 'dim=<d>' header")
        self.dim = int(lines[0][4:])
        self._records: dict[tuple[str, int, int], np.ndarray] = {}
        for lineno, line in enumerate(lines[1:], start=2):
            if not line.strip():
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise ToxtagError(
                    f"{config.path}:{lineno}: expected 4 tab-separated fields"
                )
            doc_id, s_idx, t_idx, values = fields
            vec = np.array([float(v) for v in values.split()])
            if vec.shape != (self.dim,):
                raise ToxtagError(
                    f"{config.path}:{lineno}: vector length {vec.size} != dim {self.dim}"
                )
            self._records[(doc_id, int(s_idx), int(t_idx))] = vec

    def embed(
        self,
        tokens: Sequence[Token],
        doc_id: str | None = None,
        sentence_index: int | None = None,
        token_offset: int = 0,
    ) -> np.ndarray:
        out = np.zeros((len(tokens), self.dim))
        for i in range(len(tokens)):
            key = (doc_id, sentence_index, token_offset + i)
            try:
                out[i] = self._records[key]
            except KeyError:
                raise EmbeddingLookupError(
                    f"no precomputed vector for doc_id={doc_id!r} "
                    f"sentence={sentence_index} token={token_offset + i}"
                ) from None
        return out


def build_embedder(config: EmbedderConfig):
    if config.provider == "hashed":
        return HashedEmbedder(config)
    return PrecomputedEmbedder(config)


def write_precomputed(
    path: str | Path,
    dim: int,
    records: dict[tuple[str, int, int], np.ndarray],
) -> None:
    """Write a precomputed vectors file in the documented format."""
    lines = [f"dim={dim}"]
    for (doc_id, s_idx, t_idx), vec in records.items():
        values = " ".join(repr(float(v)) for v in vec)
        lines.append(f"{doc_id}\t{s_idx}\t{t_idx}\t{values}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def apply_dropout(
    embeddings: np.ndarray, rate: float, rng: np.random.Generator
) -> np.ndarray:
    """Inverted dropout: zero each scalar with probability ``rate`` and scale
    survivors by 1/(1-rate) so expectations are unchanged. Training only."""
    if not 0.0 <= rate < 1.0:
        raise ToxtagError(f"dropout rate must be in [0, 1), got {rate}")
    if rate == 0.0:
        return embeddings
    keep = rng.random(embeddings.shape) >= rate
    return np.where(keep, embeddings / (1.0 - rate), 0.0)
