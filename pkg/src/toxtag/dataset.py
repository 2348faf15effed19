"""Sentence-level training examples: gold tags encoded, long sentences split."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bio import LabelScheme, encode_bio, spans_in_sentence
from .corpus import Document, Sentence, Token, segment_sentences, split_long_sentence
from .errors import DataWarning


@dataclass
class PreparedSentence:
    """One tokenized sentence (or continuation segment) with gold tags.

    ``token_offset`` is the segment's first token position within the
    original sentence, which keeps precomputed-embedding keys stable when a
    long sentence was split. ``embeddings`` is a cache filled once per
    training run; duplicated examples created by oversampling share it.
    """

    doc_id: str
    sentence_index: int
    token_offset: int
    tokens: tuple[Token, ...]
    trigger_tags: np.ndarray
    argument_tags: np.ndarray
    trigger_categories: frozenset[str]
    embeddings: np.ndarray | None = field(default=None, repr=False)

    @property
    def has_spans(self) -> bool:
        return bool((self.trigger_tags != 0).any() or (self.argument_tags != 0).any())

    def __len__(self) -> int:
        return len(self.tokens)


def _segment_spans(doc: Document, segment: Sentence, spans, kind: str):
    inside, crossing = spans_in_sentence(spans, segment.start, segment.end)
    for span in crossing:
        warnings.warn(
            f"{doc.doc_id}/{span.id}: {kind} span crosses a sentence or "
            "segment boundary; dropped from training targets",
            DataWarning,
            stacklevel=3,
        )
    return inside


def prepare_documents(
    corpus: Sequence[Document],
    trig_scheme: LabelScheme,
    arg_scheme: LabelScheme,
    max_tokens: int = 512,
) -> list[PreparedSentence]:
    """Segment, split to the token cap, and encode gold tags for both heads.

    Gold spans crossing a sentence or continuation-segment boundary are
    dropped with a warning rather than raising, since the rule-based splitter
    cannot be assumed perfect on real clinical text.
    """
    examples: list[PreparedSentence] = []
    for doc in corpus:
        for sentence in segment_sentences(doc):
            for segment in split_long_sentence(sentence, max_tokens):
                offset = sentence.tokens.index(segment.tokens[0])
                trig = _segment_spans(doc, segment, doc.trigger_spans, "trigger")
                arg = _segment_spans(doc, segment, doc.argument_spans, "argument")
                trig_tags = encode_bio(segment.tokens, trig, trig_scheme)
                arg_tags = encode_bio(segment.tokens, arg, arg_scheme)
                examples.append(
                    PreparedSentence(
                        doc_id=doc.doc_id,
                        sentence_index=segment.index,
                        token_offset=offset,
                        tokens=segment.tokens,
                        trigger_tags=np.array(trig_tags.ids, dtype=np.int64),
                        argument_tags=np.array(arg_tags.ids, dtype=np.int64),
                        trigger_categories=frozenset(s.label for s in trig),
                    )
                )
    return examples


def embed_examples(examples: Sequence[PreparedSentence], embedder) -> None:
    """Fill the embedding cache of every example that does not have one."""
    for ex in examples:
        if ex.embeddings is None:
            ex.embeddings = embedder.embed(
                ex.tokens,
                doc_id=ex.doc_id,
                sentence_index=ex.sentence_index,
                token_offset=ex.token_offset,
            )
