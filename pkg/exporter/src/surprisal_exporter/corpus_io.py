"""Minimal reader for the pre-tokenized corpus TSV (doc_id, sent_idx,
tok_idx, token).  Deliberately self-contained: the exporter talks to the
analysis toolkit only through files."""

from __future__ import annotations

import csv
from dataclasses import dataclass

HEADER = ["doc_id", "sent_idx", "tok_idx", "token"]


class CorpusFormatError(ValueError):
    pass


@dataclass(frozen=True)
class SentenceRef:
    doc_id: str
    sent_idx: int
    words: tuple[str, ...]


def read_corpus_tsv(path: str) -> list[SentenceRef]:
    by_sent: dict[tuple[str, int], dict[int, str]] = {}
    order: list[tuple[str, int]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter="\t")
        header = None
        for row in reader:
            if not row or row[0].startswith("#"):
                continue
            if header is None:
                header = row
                if header != HEADER:
                    raise CorpusFormatError(f"{path}: expected header {HEADER}, got {header}")
                continue
            if len(row) != 4:
                raise CorpusFormatError(f"{path}: malformed row {row!r}")
            doc_id, sent_idx, tok_idx, token = row
            key = (doc_id, int(sent_idx))
            if key not in by_sent:
                by_sent[key] = {}
                order.append(key)
            slot = by_sent[key]
            idx = int(tok_idx)
            if idx in slot:
                raise CorpusFormatError(f"{path}: duplicate token {(doc_id, int(sent_idx), idx)}")
            slot[idx] = token
    if header is None:
        raise CorpusFormatError(f"{path}: missing header row")
    sentences = []
    for key in order:
        words = by_sent[key]
        for i in range(len(words)):
            if i not in words:
                raise CorpusFormatError(f"{path}: missing token {(key[0], key[1], i)}")
        sentences.append(
            SentenceRef(doc_id=key[0], sent_idx=key[1], words=tuple(words[i] for i in range(len(words))))
        )
    return sentences
