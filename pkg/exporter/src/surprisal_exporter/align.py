"""Word-to-subword alignment.

Words are joined with single spaces and encoded once; each subword piece
is assigned to exactly one word through the tokenizer's character offsets
(leading whitespace belongs to the following word, matching the
whitespace-marker convention of BPE/sentencepiece vocabularies).  A piece
that straddles two words, or a word that receives no pieces, is a hard
alignment error naming the token; nothing is ever silently dropped.
"""

from __future__ import annotations

from dataclasses import dataclass


class AlignmentError(ValueError):
    pass


@dataclass(frozen=True)
class WordSpan:
    start: int
    end: int


def word_spans(words: tuple[str, ...]) -> tuple[str, list[WordSpan]]:
    text = " ".join(words)
    spans = []
    pos = 0
    for w in words:
        spans.append(WordSpan(pos, pos + len(w)))
        pos += len(w) + 1
    return text, spans


def assign_pieces(
    text: str,
    spans: list[WordSpan],
    offsets: list[tuple[int, int]],
    token_id: tuple[str, int],
) -> list[list[int]]:
    """Map piece indices to words.  ``offsets`` are the (start, end) char
    spans of the scorable pieces, in order.  Returns, per word, the piece
    indices that belong to it."""
    per_word: list[list[int]] = [[] for _ in spans]
    for p, (a, b) in enumerate(offsets):
        if b <= a:
            raise AlignmentError(f"empty piece offset {p} while aligning sentence {token_id}")
        non_space = [i for i in range(a, b) if not text[i].isspace()]
        if non_space:
            anchor = non_space[0]
        else:
            # a pure-whitespace piece is the boundary marker of the word
            # that starts right after it
            anchor = b
            if anchor >= len(text):
                raise AlignmentError(
                    f"whitespace piece {p} has no following word; nearest token "
                    f"{(token_id[0], token_id[1], len(spans) - 1)}"
                )
        word_idx = None
        for w, span in enumerate(spans):
            if span.start <= anchor < span.end:
                word_idx = w
                break
        if word_idx is None:
            raise AlignmentError(
                f"piece {p} at chars [{a},{b}) aligns to no word in sentence {token_id}"
            )
        if non_space and non_space[-1] >= spans[word_idx].end:
            raise AlignmentError(
                f"piece {p} at chars [{a},{b}) straddles token "
                f"{(token_id[0], token_id[1], word_idx)} and its neighbour"
            )
        per_word[word_idx].append(p)
    for w, pieces in enumerate(per_word):
        if not pieces:
            raise AlignmentError(
                f"token {(token_id[0], token_id[1], w)} received no subword pieces"
            )
    return per_word
