"""Documents, standoff annotations, sentence segmentation and tokenization.

All offsets in this package are Unicode code-point offsets into the document
text (Python string indices), never byte offsets. Spanish diacritics make the
distinction material: ``"Varón"`` is five code points but six UTF-8 bytes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .errors import AnnParseError, DataWarning, IntegrityError, LabelError, ToxtagError

# Offsets are counted in code points; this constant exists so the assumption
# is written down in exactly one place.
OFFSET_UNIT = "codepoint"

TRIGGER_LABELS = ("Tobacco", "Cannabis", "Alcohol", "Drug")
ARGUMENT_LABELS = ("Type", "Method", "Amount", "Frequency", "Duration", "History")

# Words after which a '.' never ends a sentence, lowercased, final dot included.
ABBREVIATIONS = frozenset(
    {
        "dr.", "dra.", "sr.", "sra.", "sres.", "sras.", "prof.",
        "etc.", "p.ej.", "ej.", "núm.", "pág.", "fig.", "vol.", "art.",
    }
)

# Punctuation detached into separate tokens unless flanked by alphanumerics.
_DETACH_CHARS = frozenset('.,;:!?()"«»')


@dataclass(frozen=True)
class AnnotatedSpan:
    """One labeled character interval of a document."""

    id: str
    label: str
    start: int
    end: int
    text: str

    def __post_init__(self):
        if not (0 <= self.start < self.end):
            raise ToxtagError(
                f"span {self.id!r}: invalid offsets [{self.start}, {self.end})"
            )

    def key(self) -> tuple[str, int, int]:
        return (self.label, self.start, self.end)


@dataclass(frozen=True)
class Token:
    text: str
    start: int
    end: int


@dataclass(frozen=True)
class Sentence:
    doc_id: str
    index: int
    start: int
    end: int
    tokens: tuple[Token, ...]

    @property
    def text_range(self) -> tuple[int, int]:
        return (self.start, self.end)


@dataclass(frozen=True)
class Document:
    doc_id: str
    text: str
    trigger_spans: tuple[AnnotatedSpan, ...] = ()
    argument_spans: tuple[AnnotatedSpan, ...] = ()


@dataclass(frozen=True)
class CorpusStats:
    documents: int
    mean_words_per_document: float
    triggers: int
    arguments: int
    triggers_per_document: float
    arguments_per_document: float


def parse_ann(content: str, expected_labels: Iterable[str]) -> list[AnnotatedSpan]:
    """Parse standoff annotation text into spans, preserving file order.

    Lines have the form ``T<n>\\t<LABEL> <start> <end>\\t<text>``. Blank lines
    are ignored; lines that are not textbound annotations (not starting with
    'T') and discontinuous spans ("start end;start end") are skipped with a
    :class:`DataWarning`. Malformed textbound lines raise
    :class:`AnnParseError` naming the line number; labels outside
    ``expected_labels`` raise :class:`LabelError`.
    """
    expected = set(expected_labels)
    spans: list[AnnotatedSpan] = []
    for lineno, line in enumerate(content.splitlines(), start=1):
        if not line.strip():
            continue
        if not line.startswith("T"):
            warnings.warn(
                f"line {lineno}: skipping non-textbound annotation line",
                DataWarning,
                stacklevel=2,
            )
            continue
        fields = line.split("\t", 2)
        if len(fields) != 3:
            raise AnnParseError(
                f"line {lineno}: expected 3 tab-separated fields, got {len(fields)}"
            )
        ann_id, middle, text = fields
        if ";" in middle:
            warnings.warn(
                f"line {lineno}: skipping discontinuous span {ann_id}",
                DataWarning,
                stacklevel=2,
            )
            continue
        parts = middle.split(" ")
        if len(parts) != 3:
            raise AnnParseError(
                f"line {lineno}: expected 'LABEL start end', got {middle!r}"
            )
        label, start_s, end_s = parts
        try:
            start, end = int(start_s), int(end_s)
        except ValueError:
            raise AnnParseError(
                f"line {lineno}: non-integer offsets {start_s!r} {end_s!r}"
            ) from None
        if label not in expected:
            raise LabelError(
                f"line {lineno}: unexpected label {label!r} "
                f"(expected one of {sorted(expected)})"
            )
        if not 0 <= start < end:
            raise AnnParseError(
                f"line {lineno}: invalid offset range [{start}, {end})"
            )
        spans.append(AnnotatedSpan(ann_id, label, start, end, text))
    return spans


def serialize_ann(spans: Sequence[AnnotatedSpan]) -> str:
    """Render spans back to standoff text; inverse of :func:`parse_ann`."""
    return "".join(
        f"{s.id}\t{s.label} {s.start} {s.end}\t{s.text}\n" for s in spans
    )


def load_document(
    text: str,
    trigger_ann: str,
    argument_ann: str,
    doc_id: str,
) -> Document:
    """Build a validated document from text plus its two annotation files.

    Every span's stored surface string is cross-checked against the document
    substring at its offsets; a mismatch raises :class:`IntegrityError`.
    """
    triggers = parse_ann(trigger_ann, TRIGGER_LABELS)
    arguments = parse_ann(argument_ann, ARGUMENT_LABELS)
    for span in (*triggers, *arguments):
        if span.end > len(text):
            raise IntegrityError(
                f"{doc_id}/{span.id}: end offset {span.end} beyond document "
                f"length {len(text)}"
            )
        actual = text[span.start : span.end]
        if actual != span.text:
            raise IntegrityError(
                f"{doc_id}/{span.id}: annotation text {span.text!r} does not "
                f"match document substring {actual!r} at "
                f"[{span.start}, {span.end})"
            )
    return Document(doc_id, text, tuple(triggers), tuple(arguments))


def _is_sentence_break(text: str, i: int) -> bool:
    """True when the terminator at position ``i`` ends a sentence."""
    ch = text[i]
    j = i + 1
    if j >= len(text) or not text[j].isspace():
        return False
    k = j
    while k < len(text) and text[k].isspace():
        k += 1
    if k >= len(text):
        return False
    nxt = text[k]
    if not (nxt.isupper() or nxt.isdigit()):
        return False
    if ch == ".":
        w = i
        while w > 0 and not text[w - 1].isspace():
            w -= 1
        if text[w : i + 1].lower() in ABBREVIATIONS:
            return False
    return True


def segment_sentences(document: Document) -> list[Sentence]:
    """Split a document into ordered, non-overlapping, tokenized sentences.

    Rule-based splitter: a sentence ends after '.', '!' or '?' followed by
    whitespace and an uppercase or digit start, except after a guarded
    Spanish abbreviation. Sentence ranges are trimmed to their non-whitespace
    extents, so together with the inter-sentence whitespace they cover the
    whole document.
    """
    text = document.text
    breaks = [
        i + 1 for i, ch in enumerate(text) if ch in ".!?" and _is_sentence_break(text, i)
    ]
    sentences: list[Sentence] = []
    seg_start = 0
    for seg_end in (*breaks, len(text)):
        chunk = text[seg_start:seg_end]
        stripped = chunk.strip()
        if stripped:
            start = seg_start + (len(chunk) - len(chunk.lstrip()))
            end = start + len(stripped)
            tokens = tokenize(text[start:end], start)
            sentences.append(
                Sentence(document.doc_id, len(sentences), start, end, tuple(tokens))
            )
        seg_start = seg_end
    return sentences


def tokenize(text: str, base_offset: int = 0) -> list[Token]:
    """Word-level tokenizer: whitespace split, then punctuation detachment.

    Characters in the detach set (``. , ; : ! ? ( ) " « »``) become separate
    tokens unless both neighbours inside the chunk are alphanumeric, so
    "1.5" survives whole while a sentence-final "oral." splits. Characters
    outside the detach set ('-', '/') never split, keeping "1-2" and "g/día"
    single tokens.
    """
    tokens: list[Token] = []
    i = 0
    n = len(text)
    while i < n:
        if text[i].isspace():
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace():
            j += 1
        chunk = text[i:j]
        # cut positions around detach characters not inside word-internal runs
        piece_start = 0
        for k, ch in enumerate(chunk):
            if ch not in _DETACH_CHARS:
                continue
            internal = (
                0 < k < len(chunk) - 1
                and chunk[k - 1].isalnum()
                and chunk[k + 1].isalnum()
            )
            if internal:
                continue
            if k > piece_start:
                tokens.append(
                    Token(chunk[piece_start:k], base_offset + i + piece_start,
                          base_offset + i + k)
                )
            tokens.append(Token(ch, base_offset + i + k, base_offset + i + k + 1))
            piece_start = k + 1
        if piece_start < len(chunk):
            tokens.append(
                Token(chunk[piece_start:], base_offset + i + piece_start,
                      base_offset + i + len(chunk))
            )
        i = j
    return tokens


def split_long_sentence(sentence: Sentence, max_tokens: int) -> list[Sentence]:
    """Split a sentence into continuation segments of at most ``max_tokens``.

    Segments keep the parent sentence index; token offsets are untouched.
    Returns ``[sentence]`` unchanged when it already fits.
    """
    if max_tokens < 1:
        raise ToxtagError(f"max_tokens must be >= 1, got {max_tokens}")
    if len(sentence.tokens) <= max_tokens:
        return [sentence]
    segments = []
    for first in range(0, len(sentence.tokens), max_tokens):
        part = sentence.tokens[first : first + max_tokens]
        segments.append(
            Sentence(sentence.doc_id, sentence.index, part[0].start,
                     part[-1].end, tuple(part))
        )
    return segments


def corpus_stats(corpus: Sequence[Document]) -> CorpusStats:
    """Document/span counts and per-document means over a non-empty corpus.

    Document length is counted in whitespace-separated words.
    """
    if not corpus:
        raise ToxtagError("corpus_stats requires a non-empty corpus")
    docs = len(corpus)
    words = sum(len(d.text.split()) for d in corpus)
    triggers = sum(len(d.trigger_spans) for d in corpus)
    arguments = sum(len(d.argument_spans) for d in corpus)
    return CorpusStats(
        documents=docs,
        mean_words_per_document=words / docs,
        triggers=triggers,
        arguments=arguments,
        triggers_per_document=triggers / docs,
        arguments_per_document=arguments / docs,
    )


def trigger_ann_path(directory: Path, doc_id: str) -> Path:
    return Path(directory) / f"{doc_id}.trigger.ann"


def argument_ann_path(directory: Path, doc_id: str) -> Path:
    return Path(directory) / f"{doc_id}.argument.ann"


def load_corpus(directory: str | Path) -> list[Document]:
    """Load every ``<doc_id>.txt`` under ``directory`` with its annotations.

    Missing annotation files yield empty span lists, so prediction-only
    corpora (text without gold) load the same way as annotated ones.
    """
    directory = Path(directory)
    docs = []
    for txt_path in sorted(directory.glob("*.txt")):
        doc_id = txt_path.stem
        text = txt_path.read_text(encoding="utf-8")
        trig_path = trigger_ann_path(directory, doc_id)
        arg_path = argument_ann_path(directory, doc_id)
        trig = trig_path.read_text(encoding="utf-8") if trig_path.exists() else ""
        arg = arg_path.read_text(encoding="utf-8") if arg_path.exists() else ""
        docs.append(load_document(text, trig, arg, doc_id))
    return docs


def write_corpus(corpus: Iterable[Document], directory: str | Path) -> None:
    """Write documents as ``.txt`` plus trigger/argument ``.ann`` files."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for doc in corpus:
        (directory / f"{doc.doc_id}.txt").write_text(doc.text, encoding="utf-8")
        trigger_ann_path(directory, doc.doc_id).write_text(
            serialize_ann(doc.trigger_spans), encoding="utf-8"
        )
        argument_ann_path(directory, doc.doc_id).write_text(
            serialize_ann(doc.argument_spans), encoding="utf-8"
        )
