"""Per-word surprisal scoring (nats) from pretrained models.

Autoregressive mode scores every subword piece against its left context
(a BOS/EOS token is prepended so the first piece is scored too) and sums
pieces into words.  Cloze mode masks one word at a time with full
bidirectional context; its scores are pseudo-surprisals, flagged as such
in the output header.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn.functional as F

from .align import AlignmentError, assign_pieces, word_spans
from .corpus_io import SentenceRef


@dataclass(frozen=True)
class ScoredSentence:
    ref: SentenceRef
    word_surprisals: tuple[float, ...]
    piece_surprisals: tuple[tuple[float, ...], ...]  # per word, its pieces

    @property
    def total(self) -> float:
        return float(sum(self.word_surprisals))


def _checked(values: list[float], ref: SentenceRef) -> list[float]:
    out = []
    for i, v in enumerate(values):
        if v < 0.0:
            if v < -1e-9:
                raise ValueError(
                    f"negative surprisal {v} at token ({ref.doc_id}, {ref.sent_idx}, {i})"
                )
            v = 0.0
        out.append(float(v))
    return out


class AutoregressiveScorer:
    def __init__(self, model, tokenizer, device: str = "cpu"):
        self.model = model.to(device).eval()
        self.tokenizer = tokenizer
        self.device = device
        self.bos_id = tokenizer.bos_token_id
        if self.bos_id is None:
            self.bos_id = tokenizer.eos_token_id
        if self.bos_id is None:
            raise ValueError("tokenizer has neither a BOS nor an EOS token to condition on")

    def _encode(self, ref: SentenceRef):
        text, spans = word_spans(ref.words)
        enc = self.tokenizer(text, return_offsets_mapping=True, add_special_tokens=False)
        ids = enc["input_ids"]
        if not ids:
            raise AlignmentError(f"sentence ({ref.doc_id}, {ref.sent_idx}) encoded to no pieces")
        per_word = assign_pieces(text, spans, enc["offset_mapping"], (ref.doc_id, ref.sent_idx))
        return ids, per_word

    def score_batch(self, refs: list[SentenceRef]) -> list[ScoredSentence]:
        encoded = [self._encode(ref) for ref in refs]
        lengths = [len(ids) + 1 for ids, _ in encoded]
        width = max(lengths)
        batch = torch.full((len(refs), width), self.bos_id, dtype=torch.long)
        mask = torch.zeros((len(refs), width), dtype=torch.long)
        for row, (ids, _) in enumerate(encoded):
            batch[row, 0] = self.bos_id
            batch[row, 1 : len(ids) + 1] = torch.tensor(ids, dtype=torch.long)
            mask[row, : len(ids) + 1] = 1
        with torch.no_grad():
            logits = self.model(
                input_ids=batch.to(self.device), attention_mask=mask.to(self.device)
            ).logits.cpu()
        logprobs = F.log_softmax(logits.double(), dim=-1)
        out = []
        for row, (ref, (ids, per_word)) in enumerate(zip(refs, encoded)):
            piece_s = [-float(logprobs[row, i, ids[i]]) for i in range(len(ids))]
            piece_s = _checked(piece_s, ref)
            words = []
            pieces = []
            for piece_idx in per_word:
                vals = tuple(piece_s[p] for p in piece_idx)
                pieces.append(vals)
                words.append(float(sum(vals)))
            out.append(
                ScoredSentence(
                    ref=ref, word_surprisals=tuple(words), piece_surprisals=tuple(pieces)
                )
            )
        return out

    def sentence_nll(self, ref: SentenceRef) -> float:
        """Whole-sentence negative log-likelihood in nats, computed in one
        pass independent of the word grouping (for verification)."""
        ids, _ = self._encode(ref)
        input_ids = torch.tensor([[self.bos_id] + ids], dtype=torch.long)
        with torch.no_grad():
            logits = self.model(input_ids=input_ids.to(self.device)).logits.cpu()
        logprobs = F.log_softmax(logits.double(), dim=-1)
        return -float(sum(logprobs[0, i, ids[i]] for i in range(len(ids))))


class ClozeScorer:
    def __init__(self, model, tokenizer, device: str = "cpu"):
        self.model = model.to(device).eval()
        self.tokenizer = tokenizer
        self.device = device
        if tokenizer.mask_token_id is None:
            raise ValueError("cloze scoring needs a tokenizer with a mask token")

    def score_batch(self, refs: list[SentenceRef]) -> list[ScoredSentence]:
        return [self._score(ref) for ref in refs]

    def _score(self, ref: SentenceRef) -> ScoredSentence:
        text, spans = word_spans(ref.words)
        enc = self.tokenizer(text, return_offsets_mapping=True, add_special_tokens=True)
        ids = enc["input_ids"]
        offsets = enc["offset_mapping"]
        scorable = [i for i, (a, b) in enumerate(offsets) if b > a]
        per_word = assign_pieces(
            text, spans, [offsets[i] for i in scorable], (ref.doc_id, ref.sent_idx)
        )
        # one masked copy per word, all of the word's pieces masked at once
        batch = []
        for piece_idx in per_word:
            masked = list(ids)
            for p in piece_idx:
                masked[scorable[p]] = self.tokenizer.mask_token_id
            batch.append(masked)
        input_ids = torch.tensor(batch, dtype=torch.long)
        with torch.no_grad():
            logits = self.model(input_ids=input_ids.to(self.device)).logits.cpu()
        logprobs = F.log_softmax(logits.double(), dim=-1)
        words = []
        pieces = []
        for w, piece_idx in enumerate(per_word):
            vals = []
            for p in piece_idx:
                pos = scorable[p]
                vals.append(-float(logprobs[w, pos, ids[pos]]))
            vals = tuple(_checked(list(vals), ref))
            pieces.append(vals)
            words.append(float(sum(vals)))
        return ScoredSentence(
            ref=ref, word_surprisals=tuple(words), piece_surprisals=tuple(pieces)
        )
