"""Corpus model and ingestion: tokenization, sentence segmentation, and
per-word psychometric records (reading times, acceptability judgments).

The in-memory corpus is immutable once built; every downstream module
addresses tokens by (doc_id, sent_idx, tok_idx).
"""

from __future__ import annotations

import csv
import math
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence


class CorpusError(ValueError):
    """Malformed corpus input (bad TSV, broken token indexing, ...)."""


class NoFixationsError(ValueError):
    """A (subject, sentence) pair has no fixated words; it must be
    excluded from sentence-level analyses rather than scored as 0 ms."""


@dataclass(frozen=True)
class Token:
    doc_id: str
    sent_idx: int
    tok_idx: int
    surface: str

    @property
    def lowercased(self) -> str:
        return self.surface.lower()

    @property
    def char_len(self) -> int:
        return len(self.surface)

    @property
    def ref(self) -> tuple[str, int, int]:
        return (self.doc_id, self.sent_idx, self.tok_idx)


@dataclass(frozen=True)
class Sentence:
    doc_id: str
    sent_idx: int
    tokens: tuple[Token, ...]

    def __post_init__(self) -> None:
        if len(self.tokens) < 1:
            raise CorpusError(f"empty sentence ({self.doc_id}, {self.sent_idx})")
        for i, tok in enumerate(self.tokens):
            if tok.tok_idx != i:
                raise CorpusError(
                    f"non-contiguous tok_idx in ({self.doc_id}, {self.sent_idx}): "
                    f"expected {i}, got {tok.tok_idx}"
                )

    @property
    def N(self) -> int:
        return len(self.tokens)

    @property
    def ref(self) -> tuple[str, int]:
        return (self.doc_id, self.sent_idx)

    def surfaces(self) -> list[str]:
        return [t.surface for t in self.tokens]


@dataclass(frozen=True)
class Document:
    doc_id: str
    sentences: tuple[Sentence, ...]


@dataclass(frozen=True)
class Corpus:
    documents: tuple[Document, ...]

    def __post_init__(self) -> None:
        seen = set()
        for doc in self.documents:
            if doc.doc_id in seen:
                raise CorpusError(f"duplicate doc_id {doc.doc_id!r}")
            seen.add(doc.doc_id)

    def iter_sentences(self) -> Iterator[Sentence]:
        for doc in self.documents:
            yield from doc.sentences

    def iter_tokens(self) -> Iterator[Token]:
        for sent in self.iter_sentences():
            yield from sent.tokens

    def sentence(self, doc_id: str, sent_idx: int) -> Sentence:
        for doc in self.documents:
            if doc.doc_id == doc_id:
                if 0 <= sent_idx < len(doc.sentences):
                    return doc.sentences[sent_idx]
                raise KeyError(f"no sentence ({doc_id!r}, {sent_idx})")
        raise KeyError(f"no document {doc_id!r}")

    @property
    def n_documents(self) -> int:
        return len(self.documents)

    @property
    def n_sentences(self) -> int:
        return sum(len(d.sentences) for d in self.documents)

    @property
    def n_tokens(self) -> int:
        return sum(s.N for s in self.iter_sentences())


# ---------------------------------------------------------------------------
# Tokenization / segmentation
# ---------------------------------------------------------------------------

_TERMINALS = ".!?"


def _is_punct(ch: str) -> bool:
    return not ch.isalnum()


def _split_field(field: str) -> list[str]:
    """Split one whitespace field into tokens, detaching leading and
    trailing punctuation as single-character tokens.  A field with no
    alphanumeric character at all is kept whole, which makes the split
    idempotent on already-tokenized text ("..." stays "...", "." stays ".")."""
    if not field:
        return []
    if not any(ch.isalnum() for ch in field):
        return [field]
    start = 0
    while _is_punct(field[start]):
        start += 1
    end = len(field)
    while _is_punct(field[end - 1]):
        end -= 1
    out = list(field[:start])
    out.append(field[start:end])
    out.extend(field[end:])
    return out


def _split_sentences(text: str) -> list[str]:
    """Split on terminal punctuation (. ! ?) followed by whitespace and an
    uppercase letter."""
    pieces: list[str] = []
    start = 0
    i = 0
    n = len(text)
    while i < n:
        if text[i] in _TERMINALS:
            j = i + 1
            while j < n and text[j] in _TERMINALS:
                j += 1
            k = j
            while k < n and text[k].isspace():
                k += 1
            if k > j and k < n and text[k].isupper():
                pieces.append(text[start:j])
                start = k
                i = k
                continue
            i = j
        else:
            i += 1
    tail = text[start:].strip()
    if tail:
        pieces.append(tail)
    return [p.strip() for p in pieces if p.strip()]


def tokenize(raw_text: str, doc_prefix: str = "d") -> Corpus:
    """Build a corpus from raw UTF-8 text.

    Documents are delimited by blank lines; sentences are split on terminal
    punctuation followed by whitespace and a capital; tokens are whitespace
    fields with leading/trailing punctuation detached.  Empty input yields
    an empty corpus.
    """
    docs: list[Document] = []
    for d, block in enumerate(re.split(r"\n\s*\n", raw_text)):
        block = block.strip()
        if not block:
            continue
        doc_id = f"{doc_prefix}{len(docs)}"
        sentences: list[Sentence] = []
        for s, sent_text in enumerate(_split_sentences(block.replace("\n", " "))):
            surfaces: list[str] = []
            for field_ in sent_text.split():
                surfaces.extend(_split_field(field_))
            if not surfaces:
                continue
            toks = tuple(
                Token(doc_id, len(sentences), i, surf) for i, surf in enumerate(surfaces)
            )
            sentences.append(Sentence(doc_id, len(sentences), toks))
        if sentences:
            docs.append(Document(doc_id, tuple(sentences)))
    return Corpus(tuple(docs))


def build_corpus(docs: Sequence[Sequence[Sequence[str]]], doc_prefix: str = "d") -> Corpus:
    """Assemble a corpus from nested lists: documents of sentences of token
    surfaces.  Useful for programmatic construction and tests."""
    documents = []
    for d, sentences in enumerate(docs):
        doc_id = f"{doc_prefix}{d}"
        sents = tuple(
            Sentence(
                doc_id,
                s,
                tuple(Token(doc_id, s, i, surf) for i, surf in enumerate(sentence)),
            )
            for s, sentence in enumerate(sentences)
        )
        documents.append(Document(doc_id, sents))
    return Corpus(tuple(documents))


def detokenize(corpus: Corpus) -> str:
    """Inverse-ish of :func:`tokenize`: sentences joined by spaces, documents
    by blank lines.  Round-trips token sequences for corpora whose sentences
    start with a capital."""
    blocks = []
    for doc in corpus.documents:
        blocks.append(" ".join(" ".join(s.surfaces()) for s in doc.sentences))
    return "\n\n".join(blocks)


# ---------------------------------------------------------------------------
# TSV interfaces
# ---------------------------------------------------------------------------

TOKENS_HEADER = ["doc_id", "sent_idx", "tok_idx", "token"]
READINGS_HEADER = ["doc_id", "sent_idx", "tok_idx", "subject_id", "rt_ms", "fixated"]
ACCEPTABILITY_HEADER = ["doc_id", "sent_idx", "label", "scheme"]


def _read_tsv(path: str, expected_header: list[str]) -> Iterator[dict[str, str]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter="\t")
        header = None
        for row in reader:
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if row[0].startswith("#"):
                continue
            if header is None:
                header = row
                if header != expected_header:
                    raise CorpusError(
                        f"{path}: expected header {expected_header}, got {header}"
                    )
                continue
            if len(row) != len(header):
                raise CorpusError(f"{path}: row has {len(row)} fields, expected {len(header)}")
            yield dict(zip(header, row))
    if header is None:
        raise CorpusError(f"{path}: missing header row")


def load_tokens_tsv(path: str) -> Corpus:
    """Load a pre-tokenized corpus (columns doc_id, sent_idx, tok_idx, token).
    Rows may arrive in any order; indices must be contiguous from 0."""
    by_doc: dict[str, dict[int, dict[int, str]]] = {}
    doc_order: list[str] = []
    for row in _read_tsv(path, TOKENS_HEADER):
        doc_id = row["doc_id"]
        if doc_id not in by_doc:
            by_doc[doc_id] = {}
            doc_order.append(doc_id)
        sent = by_doc[doc_id].setdefault(int(row["sent_idx"]), {})
        tok_idx = int(row["tok_idx"])
        if tok_idx in sent:
            raise CorpusError(f"{path}: duplicate token ({doc_id}, {row['sent_idx']}, {tok_idx})")
        sent[tok_idx] = row["token"]
    docs = []
    for doc_id in doc_order:
        sents = []
        for sent_idx in range(len(by_doc[doc_id])):
            if sent_idx not in by_doc[doc_id]:
                raise CorpusError(f"{path}: missing sent_idx {sent_idx} in doc {doc_id!r}")
            words = by_doc[doc_id][sent_idx]
            toks = []
            for tok_idx in range(len(words)):
                if tok_idx not in words:
                    raise CorpusError(
                        f"{path}: missing tok_idx {tok_idx} in ({doc_id!r}, {sent_idx})"
                    )
                toks.append(Token(doc_id, sent_idx, tok_idx, words[tok_idx]))
            sents.append(Sentence(doc_id, sent_idx, tuple(toks)))
        docs.append(Document(doc_id, tuple(sents)))
    return Corpus(tuple(docs))


def write_tokens_tsv(corpus: Corpus, path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(TOKENS_HEADER)
        for tok in corpus.iter_tokens():
            writer.writerow([tok.doc_id, tok.sent_idx, tok.tok_idx, tok.surface])


@dataclass(frozen=True)
class ReadingRecord:
    subject_id: str
    doc_id: str
    sent_idx: int
    tok_idx: int
    rt_ms: float
    fixated: bool

    def __post_init__(self) -> None:
        if self.fixated and not self.rt_ms > 0:
            raise CorpusError(
                f"fixated record ({self.subject_id}, {self.doc_id}, "
                f"{self.sent_idx}, {self.tok_idx}) must have rt_ms > 0"
            )

    @property
    def pair(self) -> tuple[str, str, int]:
        """The (subject, sentence) grouping key used for outlier exclusion."""
        return (self.subject_id, self.doc_id, self.sent_idx)


@dataclass(frozen=True)
class AcceptabilityRecord:
    doc_id: str
    sent_idx: int
    label: float
    scheme: str  # "binary" | "graded"

    def __post_init__(self) -> None:
        if self.scheme == "binary":
            if self.label not in (0.0, 1.0):
                raise CorpusError(
                    f"binary label for ({self.doc_id}, {self.sent_idx}) must be 0 or 1"
                )
        elif self.scheme == "graded":
            if not math.isfinite(self.label):
                raise CorpusError(f"graded label for ({self.doc_id}, {self.sent_idx}) not finite")
        else:
            raise CorpusError(f"unknown scheme {self.scheme!r}")


def load_readings_tsv(path: str) -> list[ReadingRecord]:
    records = []
    for row in _read_tsv(path, READINGS_HEADER):
        fixated = row["fixated"] == "1"
        rt = float(row["rt_ms"]) if row["rt_ms"] not in ("", "NA") else 0.0
        records.append(
            ReadingRecord(
                subject_id=row["subject_id"],
                doc_id=row["doc_id"],
                sent_idx=int(row["sent_idx"]),
                tok_idx=int(row["tok_idx"]),
                rt_ms=rt,
                fixated=fixated,
            )
        )
    return records


def write_readings_tsv(records: Sequence[ReadingRecord], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(READINGS_HEADER)
        for r in records:
            writer.writerow(
                [r.doc_id, r.sent_idx, r.tok_idx, r.subject_id, repr(float(r.rt_ms)), int(r.fixated)]
            )


def load_acceptability_tsv(path: str) -> list[AcceptabilityRecord]:
    records = []
    for row in _read_tsv(path, ACCEPTABILITY_HEADER):
        records.append(
            AcceptabilityRecord(
                doc_id=row["doc_id"],
                sent_idx=int(row["sent_idx"]),
                label=float(row["label"]),
                scheme=row["scheme"],
            )
        )
    return records


def write_acceptability_tsv(records: Sequence[AcceptabilityRecord], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(ACCEPTABILITY_HEADER)
        for r in records:
            label = int(r.label) if r.scheme == "binary" else repr(float(r.label))
            writer.writerow([r.doc_id, r.sent_idx, label, r.scheme])


def rescale_graded(records: Sequence[AcceptabilityRecord]) -> list[float]:
    """Min-max rescale graded scores to [0, 1] (used only for the
    correlation analysis; predictive fits use the binary scheme)."""
    scores = [r.label for r in records]
    lo, hi = min(scores), max(scores)
    if hi == lo:
        raise ValueError("cannot rescale constant graded scores")
    return [(x - lo) / (hi - lo) for x in scores]


# ---------------------------------------------------------------------------
# Preprocessing: outlier removal, sentence-level reading times
# ---------------------------------------------------------------------------

def remove_outliers(
    records: Sequence[ReadingRecord], z_cutoff: float = 3.0
) -> tuple[list[ReadingRecord], set[tuple[str, str, int]]]:
    """Drop word records whose log reading time has |z| > ``z_cutoff``
    (z-scores over the full dataset), then drop every record of any
    (subject, sentence) pair that contained a dropped word.

    Returns (kept records in input order, dropped pair set).  With fewer
    than two fixated records, or zero variance, nothing is dropped.
    """
    fixated = [r for r in records if r.fixated]
    if len(fixated) < 2:
        return list(records), set()
    logs = [math.log(r.rt_ms) for r in fixated]
    mean = sum(logs) / len(logs)
    var = sum((x - mean) ** 2 for x in logs) / len(logs)
    if var == 0.0:
        return list(records), set()
    sd = math.sqrt(var)
    dropped_pairs: set[tuple[str, str, int]] = set()
    for r, lx in zip(fixated, logs):
        if abs((lx - mean) / sd) > z_cutoff:
            dropped_pairs.add(r.pair)
    kept = [r for r in records if r.pair not in dropped_pairs]
    return kept, dropped_pairs


def sentence_rt(records: Sequence[ReadingRecord]) -> tuple[float, int]:
    """Sum of reading times over fixated words of one (subject, sentence)
    pair, with the fixated-word count (a baseline predictor).

    Raises :class:`NoFixationsError` when no word was fixated.
    """
    keys = {r.pair for r in records}
    if len(keys) > 1:
        raise ValueError(f"records span multiple (subject, sentence) pairs: {sorted(keys)}")
    total = 0.0
    n_fix = 0
    for r in records:
        if r.fixated:
            total += r.rt_ms
            n_fix += 1
    if n_fix == 0:
        raise NoFixationsError(f"no fixated words for {next(iter(keys), None)}")
    return total, n_fix


def build_sentence_rt_table(
    corpus: Corpus, records: Sequence[ReadingRecord]
) -> tuple[list[dict], list[tuple[str, str, int]]]:
    """Aggregate word records into one row per (subject, sentence).

    Returns (rows, excluded pairs).  Row fields: subject_id, doc_id,
    sent_idx, rt_ms, n_fixated, n_tokens.  Pairs without any fixated word
    are excluded and reported, not zeroed.
    """
    grouped: dict[tuple[str, str, int], list[ReadingRecord]] = {}
    order: list[tuple[str, str, int]] = []
    for r in records:
        if r.pair not in grouped:
            grouped[r.pair] = []
            order.append(r.pair)
        grouped[r.pair].append(r)
    rows = []
    excluded = []
    for pair in order:
        subject_id, doc_id, sent_idx = pair
        try:
            total, n_fix = sentence_rt(grouped[pair])
        except NoFixationsError:
            excluded.append(pair)
            continue
        rows.append(
            {
                "subject_id": subject_id,
                "doc_id": doc_id,
                "sent_idx": sent_idx,
                "rt_ms": total,
                "n_fixated": n_fix,
                "n_tokens": corpus.sentence(doc_id, sent_idx).N,
            }
        )
    return rows, excluded
