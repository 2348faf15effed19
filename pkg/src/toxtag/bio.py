"""BIO tag schemes and conversion between character spans and tag sequences."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .corpus import ARGUMENT_LABELS, TRIGGER_LABELS, AnnotatedSpan, Token
from .errors import DataWarning, ToxtagError


@dataclass(frozen=True)
class LabelScheme:
    """Tag inventory for one head: O plus B-/I- per category.

    Tags are densely indexed with O at index 0, then B-c, I-c in category
    order, so the tag count is ``2 * len(categories) + 1``.
    """

    task: str
    categories: tuple[str, ...]
    tags: tuple[str, ...] = field(init=False)

    def __post_init__(self):
        tags = ["O"]
        for cat in self.categories:
            tags.append(f"B-{cat}")
            tags.append(f"I-{cat}")
        object.__setattr__(self, "tags", tuple(tags))

    @property
    def size(self) -> int:
        return len(self.tags)

    def index(self, tag: str) -> int:
        try:
            return self.tags.index(tag)
        except ValueError:
            raise ToxtagError(f"unknown tag {tag!r} for {self.task} scheme") from None

    def begin(self, category: str) -> int:
        return 1 + 2 * self._cat_index(category)

    def inside(self, category: str) -> int:
        return 2 + 2 * self._cat_index(category)

    def _cat_index(self, category: str) -> int:
        try:
            return self.categories.index(category)
        except ValueError:
            raise ToxtagError(
                f"unknown category {category!r} for {self.task} scheme"
            ) from None

    def is_begin(self, idx: int) -> bool:
        return idx >= 1 and idx % 2 == 1

    def is_inside(self, idx: int) -> bool:
        return idx >= 2 and idx % 2 == 0

    def category_of(self, idx: int) -> str:
        if idx == 0:
            raise ToxtagError("tag O has no category")
        return self.categories[(idx - 1) // 2]


def trigger_scheme() -> LabelScheme:
    return LabelScheme("trigger", TRIGGER_LABELS)


def argument_scheme() -> LabelScheme:
    return LabelScheme("argument", ARGUMENT_LABELS)


@dataclass(frozen=True)
class TagSequence:
    scheme: LabelScheme
    ids: tuple[int, ...]

    def __post_init__(self):
        bad = [i for i in self.ids if not 0 <= i < self.scheme.size]
        if bad:
            raise ToxtagError(f"tag index {bad[0]} out of range for C={self.scheme.size}")

    def __len__(self) -> int:
        return len(self.ids)

    def labels(self) -> tuple[str, ...]:
        return tuple(self.scheme.tags[i] for i in self.ids)


def _covered_token_range(
    tokens: Sequence[Token], span: AnnotatedSpan
) -> tuple[int, int] | None:
    """Indices [first, last] of tokens overlapping the span, or None."""
    first = last = None
    for i, tok in enumerate(tokens):
        if tok.end > span.start and tok.start < span.end:
            if first is None:
                first = i
            last = i
    if first is None:
        return None
    return first, last


def encode_bio(
    tokens: Sequence[Token],
    spans: Sequence[AnnotatedSpan],
    scheme: LabelScheme,
) -> TagSequence:
    """Encode character spans over one sentence's tokens as BIO tags.

    Spans must lie within the sentence (a span crossing the token range
    raises). Span edges falling mid-token snap outward to the covering
    token, with a warning. When two spans claim the same token the longer
    one (by character length, ties to the earlier start) wins and the loser
    is dropped with a warning.
    """
    if not tokens:
        return TagSequence(scheme, ())
    sent_start, sent_end = tokens[0].start, tokens[-1].end
    ranges: list[tuple[AnnotatedSpan, int, int]] = []
    for span in spans:
        if span.start < sent_start or span.end > sent_end:
            if span.end <= sent_start or span.start >= sent_end:
                raise ToxtagError(
                    f"span {span.id!r} [{span.start},{span.end}) lies outside "
                    f"sentence [{sent_start},{sent_end})"
                )
            raise ToxtagError(
                f"span {span.id!r} [{span.start},{span.end}) crosses the "
                f"sentence boundary [{sent_start},{sent_end})"
            )
        covered = _covered_token_range(tokens, span)
        if covered is None:
            warnings.warn(
                f"span {span.id!r} covers no token; dropped",
                DataWarning,
                stacklevel=2,
            )
            continue
        first, last = covered
        if tokens[first].start != span.start or tokens[last].end != span.end:
            warnings.warn(
                f"span {span.id!r} [{span.start},{span.end}) snapped to token "
                f"boundaries [{tokens[first].start},{tokens[last].end})",
                DataWarning,
                stacklevel=2,
            )
        ranges.append((span, first, last))

    # longer span wins a contested token; tie broken by earlier start
    ranges.sort(key=lambda r: (-(r[0].end - r[0].start), r[0].start))
    claimed = [False] * len(tokens)
    ids = [0] * len(tokens)
    for span, first, last in ranges:
        if any(claimed[first : last + 1]):
            warnings.warn(
                f"span {span.id!r} overlaps an already-encoded span; dropped",
                DataWarning,
                stacklevel=2,
            )
            continue
        ids[first] = scheme.begin(span.label)
        for i in range(first + 1, last + 1):
            ids[i] = scheme.inside(span.label)
        for i in range(first, last + 1):
            claimed[i] = True
    return TagSequence(scheme, tuple(ids))


def decode_bio(
    tokens: Sequence[Token],
    tags: TagSequence,
    text: str,
) -> list[AnnotatedSpan]:
    """Merge a valid BIO sequence into spans with token-aligned offsets.

    ``text`` is the document the token offsets index into; span surface
    strings are exact substrings of it. Apply :func:`repair_bio` first if the
    sequence may be invalid. Decoded spans carry empty ids; use
    :func:`number_spans` before serializing.
    """
    if len(tags) != len(tokens):
        raise ToxtagError(
            f"tag count {len(tags)} does not match token count {len(tokens)}"
        )
    scheme = tags.scheme
    spans: list[AnnotatedSpan] = []
    open_cat = None
    first = None
    last = None

    def close():
        nonlocal open_cat, first, last
        if open_cat is not None:
            start, end = tokens[first].start, tokens[last].end
            spans.append(AnnotatedSpan("", open_cat, start, end, text[start:end]))
        open_cat = first = last = None

    for i, idx in enumerate(tags.ids):
        if scheme.is_begin(idx):
            close()
            open_cat = scheme.category_of(idx)
            first = last = i
        elif scheme.is_inside(idx) and open_cat == scheme.category_of(idx):
            last = i
        else:
            close()
    close()
    return spans


def repair_bio(tags: TagSequence) -> TagSequence:
    """Rewrite invalid I- tags to B-; B- and O tags are never touched.

    An I-c is valid only when the previous tag is B-c or I-c of the same
    category. The result is always a valid BIO sequence and the operation is
    idempotent.
    """
    scheme = tags.scheme
    out = list(tags.ids)
    prev = 0
    for i, idx in enumerate(out):
        if scheme.is_inside(idx):
            cat = scheme.category_of(idx)
            prev_ok = prev != 0 and scheme.category_of(prev) == cat
            if not prev_ok:
                out[i] = scheme.begin(cat)
        prev = out[i]
    return TagSequence(scheme, tuple(out))


def project_subtokens(
    subtoken_tags: TagSequence,
    alignment: Sequence[int],
) -> TagSequence:
    """Project sub-token tags to word level: each word takes its first
    sub-token's tag.

    ``alignment[j]`` is the word index of sub-token j; it must be monotone
    non-decreasing and cover every word index up to its maximum.
    """
    if len(alignment) != len(subtoken_tags):
        raise ToxtagError(
            f"alignment length {len(alignment)} does not match "
            f"{len(subtoken_tags)} sub-token tags"
        )
    if not alignment:
        return TagSequence(subtoken_tags.scheme, ())
    word_ids: list[int] = []
    prev = -1
    for j, w in enumerate(alignment):
        if w < prev:
            raise ToxtagError(f"alignment decreases at sub-token {j}: {prev} -> {w}")
        if w > prev:
            if w != prev + 1:
                raise ToxtagError(
                    f"alignment skips word index {prev + 1} at sub-token {j}"
                )
            word_ids.append(subtoken_tags.ids[j])
        prev = w
    return TagSequence(subtoken_tags.scheme, tuple(word_ids))


def expand_word_tags(
    word_tags: TagSequence,
    alignment: Sequence[int],
    mode: str = "propagate",
) -> TagSequence:
    """Expand word-level tags to sub-token level (inverse direction of
    :func:`project_subtokens`, used to build sub-token training targets).

    ``mode="propagate"`` (default): continuation sub-tokens of a B- word get
    I- of the same category, continuation sub-tokens of I- or O words repeat
    the word tag. ``mode="first"``: only each word's first sub-token carries
    the word tag, the rest get O.
    """
    if mode not in ("propagate", "first"):
        raise ToxtagError(f"unknown expansion mode {mode!r}")
    scheme = word_tags.scheme
    out: list[int] = []
    prev_word = -1
    for j, w in enumerate(alignment):
        if w < prev_word:
            raise ToxtagError(f"alignment decreases at sub-token {j}")
        if not 0 <= w < len(word_tags):
            raise ToxtagError(f"alignment word index {w} out of range")
        word_tag = word_tags.ids[w]
        if w != prev_word:
            out.append(word_tag)
        elif mode == "first":
            out.append(0)
        elif scheme.is_begin(word_tag):
            out.append(scheme.inside(scheme.category_of(word_tag)))
        else:
            out.append(word_tag)
        prev_word = w
    return TagSequence(scheme, tuple(out))


def number_spans(spans: Sequence[AnnotatedSpan], prefix: str = "T") -> list[AnnotatedSpan]:
    """Assign sequential standoff ids (T1, T2, ...) in list order."""
    return [
        AnnotatedSpan(f"{prefix}{i}", s.label, s.start, s.end, s.text)
        for i, s in enumerate(spans, start=1)
    ]


def spans_in_sentence(
    spans: Sequence[AnnotatedSpan], start: int, end: int
) -> tuple[list[AnnotatedSpan], list[AnnotatedSpan]]:
    """Partition spans into (inside [start,end), crossing the boundary).

    Spans entirely outside the range are omitted from both lists.
    """
    inside, crossing = [], []
    for span in spans:
        if span.start >= start and span.end <= end:
            inside.append(span)
        elif span.end > start and span.start < end:
            crossing.append(span)
    return inside, crossing
