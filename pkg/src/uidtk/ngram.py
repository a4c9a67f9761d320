"""Interpolated modified Kneser-Ney n-gram language model, a lowercased
unigram model, per-token surprisal profiles, and the surprisal exchange
file format.

All log quantities are natural logs (nats).  BOS is context only and is
never scored; EOS is scored.  Query tokens outside the vocabulary are
mapped to UNK, so every surprisal is finite.
"""

from __future__ import annotations

import csv
import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

from .corpus import Corpus, Sentence

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

FORMAT_VERSION = 1

# Lower clamp keeps every interpolation weight strictly positive, which in
# turn keeps every probability positive (no infinite surprisal).
MIN_DISCOUNT = 1e-3
FALLBACK_DISCOUNT = 0.75

EXCHANGE_HEADER = ["doc_id", "sent_idx", "tok_idx", "token", "surprisal_nats"]


class TrainingError(ValueError):
    pass


class SurprisalFileError(ValueError):
    """Exchange-file violation: the message names the first offending token."""


@dataclass(frozen=True)
class SurprisalProfile:
    """Per-token surprisal (nats) for one sentence; length equals the
    sentence's token count (EOS is not part of the profile)."""

    doc_id: str
    sent_idx: int
    s: tuple[float, ...]
    source: str  # "ngram" | "external"
    model_tag: str

    def __post_init__(self) -> None:
        for i, x in enumerate(self.s):
            if not (x >= 0.0 and math.isfinite(x)):
                raise ValueError(
                    f"surprisal for ({self.doc_id}, {self.sent_idx}, {i}) "
                    f"must be finite and >= 0, got {x}"
                )

    @property
    def N(self) -> int:
        return len(self.s)

    @property
    def ref(self) -> tuple[str, int]:
        return (self.doc_id, self.sent_idx)

    def total(self) -> float:
        return float(sum(self.s))


class _OrderTable:
    """Per-context continuation tables for one n-gram order."""

    __slots__ = ("words", "total", "n123")

    def __init__(self) -> None:
        self.words: dict[str, int] = {}
        self.total = 0
        self.n123 = (0, 0, 0)  # context counts-of-counts: exactly 1, exactly 2, >= 3

    def finalize(self) -> None:
        n1 = n2 = n3 = 0
        for c in self.words.values():
            if c == 1:
                n1 += 1
            elif c == 2:
                n2 += 1
            else:
                n3 += 1
        self.total = sum(self.words.values())
        self.n123 = (n1, n2, n3)


def _estimate_discounts(counts_of_counts: Counter) -> tuple[tuple[float, float, float], bool]:
    """Discounts (D1, D2, D3+) from counts-of-counts, clamped to
    [MIN_DISCOUNT, i].  Falls back to a flat absolute discount when the
    needed counts-of-counts vanish; the caller records the fallback."""
    n1, n2, n3, n4 = (counts_of_counts.get(r, 0) for r in (1, 2, 3, 4))
    if n1 == 0 or n2 == 0:
        return (FALLBACK_DISCOUNT, FALLBACK_DISCOUNT, FALLBACK_DISCOUNT), True
    y = n1 / (n1 + 2.0 * n2)
    ds = []
    fallback = False
    for i, (num, den) in enumerate(((n2, n1), (n3, n2), (n4, n3)), start=1):
        if den == 0:
            ds.append(FALLBACK_DISCOUNT)
            fallback = True
        else:
            ds.append(min(max(i - (i + 1.0) * y * num / den, MIN_DISCOUNT), float(i)))
    return (ds[0], ds[1], ds[2]), fallback


class NGramModel:
    """Interpolated modified Kneser-Ney model of order 1..5.

    The highest order and all BOS-initial n-grams use raw counts; other
    lower-order n-grams use continuation counts.  The recursion bottoms
    out in a uniform distribution over the event vocabulary (everything
    except BOS), which guarantees strictly positive probabilities.
    """

    def __init__(
        self,
        order: int,
        unk_threshold: int,
        vocab: tuple[str, ...],
        tables: list[dict[tuple[str, ...], _OrderTable]],
        discounts: dict[int, tuple[float, float, float]],
        fallback_orders: tuple[int, ...],
        model_tag: str,
    ) -> None:
        self.order = order
        self.unk_threshold = unk_threshold
        self.vocab = vocab  # includes UNK, BOS, EOS
        self._tables = tables  # tables[m-1]: context -> _OrderTable, m = 1..order
        self.discounts = discounts
        self.fallback_orders = fallback_orders
        self.model_tag = model_tag
        self._event_vocab = tuple(w for w in vocab if w != BOS)
        self._vocab_set = frozenset(vocab)
        self._event_index = {w: i for i, w in enumerate(self._event_vocab)}

    # -- training ----------------------------------------------------------

    @classmethod
    def train(cls, corpus: Corpus, order: int = 5, unk_threshold: int = 1) -> "NGramModel":
        if not 1 <= order <= 5:
            raise TrainingError(f"order must be in [1, 5], got {order}")
        sentences = [s.surfaces() for s in corpus.iter_sentences()]
        if not sentences:
            raise TrainingError("cannot train on an empty corpus")

        freq = Counter(tok for sent in sentences for tok in sent)
        kept = {tok for tok, c in freq.items() if c >= unk_threshold}
        vocab = tuple(sorted(kept | {UNK, EOS}) + [BOS])

        def map_tok(t: str) -> str:
            return t if t in kept else UNK

        raw: list[Counter] = [Counter() for _ in range(order)]  # raw[m-1]: m-gram counts
        for sent in sentences:
            seq = [BOS] * (order - 1) + [map_tok(t) for t in sent] + [EOS]
            for m in range(1, order + 1):
                cm = raw[m - 1]
                for i in range(len(seq) - m + 1):
                    gram = tuple(seq[i : i + m])
                    if gram[-1] == BOS:
                        continue
                    cm[gram] += 1

        # Effective counts: raw at the top order and for BOS-initial grams,
        # continuation counts (distinct left extensions) elsewhere.
        effective: list[dict[tuple[str, ...], int]] = []
        for m in range(1, order + 1):
            if m == order:
                effective.append(dict(raw[m - 1]))
                continue
            cont: dict[tuple[str, ...], set] = defaultdict(set)
            for gram in raw[m]:  # (m+1)-grams
                cont[gram[1:]].add(gram[0])
            eff: dict[tuple[str, ...], int] = {}
            for gram in raw[m - 1]:
                if gram[0] == BOS:
                    eff[gram] = raw[m - 1][gram]
                else:
                    eff[gram] = len(cont.get(gram, ()))
                    if eff[gram] == 0:
                        # never extendable to the left (can only happen for
                        # grams observed solely at padded starts)
                        eff[gram] = raw[m - 1][gram]
            effective.append(eff)

        tables: list[dict[tuple[str, ...], _OrderTable]] = []
        discounts: dict[int, tuple[float, float, float]] = {}
        fallback_orders: list[int] = []
        for m in range(1, order + 1):
            per_ctx: dict[tuple[str, ...], _OrderTable] = defaultdict(_OrderTable)
            coc: Counter = Counter()
            for gram, c in effective[m - 1].items():
                per_ctx[gram[:-1]].words[gram[-1]] = c
                if c <= 4:
                    coc[c] += 1
            for table in per_ctx.values():
                table.finalize()
            ds, fell_back = _estimate_discounts(coc)
            discounts[m] = ds
            if fell_back:
                fallback_orders.append(m)
            tables.append(dict(per_ctx))

        return cls(
            order=order,
            unk_threshold=unk_threshold,
            vocab=vocab,
            tables=tables,
            discounts=discounts,
            fallback_orders=tuple(fallback_orders),
            model_tag=f"kn{order}",
        )

    # -- queries -----------------------------------------------------------

    def _map(self, token: str) -> str:
        return token if token in self._vocab_set else UNK

    def _discount_for(self, m: int, count: int) -> float:
        d1, d2, d3 = self.discounts[m]
        if count == 1:
            return d1
        if count == 2:
            return d2
        return d3

    def _prob(self, m: int, context: tuple[str, ...], word: str) -> float:
        if m == 0:
            return 1.0 / len(self._event_vocab)
        table = self._tables[m - 1].get(context)
        if table is None or table.total == 0:
            return self._prob(m - 1, context[1:], word)
        c = table.words.get(word, 0)
        num = c - self._discount_for(m, c) if c > 0 else 0.0
        if num < 0.0:
            num = 0.0
        d1, d2, d3 = self.discounts[m]
        n1, n2, n3 = table.n123
        gamma = (d1 * n1 + d2 * n2 + d3 * n3) / table.total
        return num / table.total + gamma * self._prob(m - 1, context[1:], word)

    def _context(self, context: Sequence[str]) -> tuple[str, ...]:
        """Map into the vocabulary, truncate to order-1 tokens, and left-pad
        with BOS (a short context means we are at a sentence start)."""
        if self.order == 1:
            return ()
        ctx = tuple(self._map(t) for t in context)[-(self.order - 1) :]
        if len(ctx) < self.order - 1:
            ctx = (BOS,) * (self.order - 1 - len(ctx)) + ctx
        return ctx

    def prob(self, word: str, context: Sequence[str]) -> float:
        """p(word | context); both are mapped into the vocabulary first."""
        return self._prob(self.order, self._context(context), self._map(word))

    def logprob(self, word: str, context: Sequence[str]) -> float:
        return math.log(self.prob(word, context))

    def full_distribution(self, context: Sequence[str]) -> np.ndarray:
        """p(. | context) over the event vocabulary (vocab without BOS),
        built bottom-up; sums to 1 up to float error."""
        ctx = self._context(context)
        v = len(self._event_vocab)
        p = np.full(v, 1.0 / v)
        for m in range(1, self.order + 1):
            sub = ctx[len(ctx) - (m - 1) :] if m > 1 else ()
            table = self._tables[m - 1].get(sub)
            if table is None or table.total == 0:
                continue
            d1, d2, d3 = self.discounts[m]
            n1, n2, n3 = table.n123
            gamma = (d1 * n1 + d2 * n2 + d3 * n3) / table.total
            q = gamma * p
            for w, c in table.words.items():
                num = c - self._discount_for(m, c)
                if num > 0.0:
                    q[self._event_index[w]] += num / table.total
            p = q
        return p

    def event_vocab(self) -> tuple[str, ...]:
        return self._event_vocab

    # -- surprisal ----------------------------------------------------------

    def _padded(self, sentence: Sentence) -> list[str]:
        return [BOS] * (self.order - 1) + [self._map(t.surface) for t in sentence.tokens]

    def surprisal_profile(self, sentence: Sentence) -> SurprisalProfile:
        """s(u_n) = -ln p(u_n | preceding order-1 tokens), real tokens only."""
        seq = self._padded(sentence)
        pad = self.order - 1
        s = []
        for i in range(pad, len(seq)):
            p = self._prob(self.order, tuple(seq[i - pad : i]), seq[i])
            s.append(-math.log(p))
        return SurprisalProfile(
            doc_id=sentence.doc_id,
            sent_idx=sentence.sent_idx,
            s=tuple(s),
            source="ngram",
            model_tag=self.model_tag,
        )

    def eos_surprisal(self, sentence: Sentence) -> float:
        seq = self._padded(sentence)
        pad = self.order - 1
        ctx = tuple(seq[len(seq) - pad :]) if pad else ()
        return -math.log(self._prob(self.order, ctx, EOS))

    def sentence_logprob(self, sentence: Sentence, include_eos: bool = False) -> float:
        """ln p(sentence) by the chain rule, summed left to right (the same
        evaluation order as the profile, so -sum(profile.s) matches exactly)."""
        seq = self._padded(sentence)
        pad = self.order - 1
        total = 0.0
        for i in range(pad, len(seq)):
            total += math.log(self._prob(self.order, tuple(seq[i - pad : i]), seq[i]))
        if include_eos:
            total += -self.eos_surprisal(sentence)
        return total

    def perplexity(self, corpus: Corpus) -> float:
        """exp(mean per-token surprisal in nats) over the corpus, EOS included."""
        total = 0.0
        count = 0
        for sent in corpus.iter_sentences():
            profile = self.surprisal_profile(sent)
            total += sum(profile.s) + self.eos_surprisal(sent)
            count += profile.N + 1
        if count == 0:
            raise ValueError("perplexity of an empty corpus is undefined")
        return math.exp(total / count)

    # -- persistence ---------------------------------------------------------

    def save(self, path: str) -> None:
        payload = {
            "format_version": FORMAT_VERSION,
            "kind": "modified-kneser-ney",
            "order": self.order,
            "unk_threshold": self.unk_threshold,
            "model_tag": self.model_tag,
            "vocab": list(self.vocab),
            "discounts": {str(m): list(d) for m, d in self.discounts.items()},
            "fallback_orders": list(self.fallback_orders),
            "tables": [
                {
                    "\x1f".join(ctx): table.words
                    for ctx, table in sorted(self._tables[m - 1].items())
                }
                for m in range(1, self.order + 1)
            ],
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, ensure_ascii=False, separators=(",", ":"), sort_keys=True)

    @classmethod
    def load(cls, path: str) -> "NGramModel":
        with open(path, encoding="utf-8") as fh:
            payload = json.load(fh)
        if payload.get("format_version") != FORMAT_VERSION:
            raise ValueError(f"unsupported model format_version {payload.get('format_version')}")
        order = payload["order"]
        tables: list[dict[tuple[str, ...], _OrderTable]] = []
        for m in range(1, order + 1):
            per_ctx: dict[tuple[str, ...], _OrderTable] = {}
            for ctx_str, words in payload["tables"][m - 1].items():
                ctx = tuple(ctx_str.split("\x1f")) if ctx_str else ()
                table = _OrderTable()
                table.words = {w: int(c) for w, c in words.items()}
                table.finalize()
                per_ctx[ctx] = table
            tables.append(per_ctx)
        return cls(
            order=order,
            unk_threshold=payload["unk_threshold"],
            vocab=tuple(payload["vocab"]),
            tables=tables,
            discounts={int(m): tuple(d) for m, d in payload["discounts"].items()},
            fallback_orders=tuple(payload["fallback_orders"]),
            model_tag=payload["model_tag"],
        )


class UnigramModel:
    """MLE unigram distribution over lowercased tokens; tokens rarer than
    the threshold pool their mass into UNK."""

    def __init__(self, probs: dict[str, float], unk_prob: float, unk_threshold: int) -> None:
        self.probs = probs
        self.unk_prob = unk_prob
        self.unk_threshold = unk_threshold

    @classmethod
    def train(cls, corpus: Corpus, unk_threshold: int = 1) -> "UnigramModel":
        freq = Counter(t.lowercased for t in corpus.iter_tokens())
        total = sum(freq.values())
        if total == 0:
            raise TrainingError("cannot train a unigram model on an empty corpus")
        probs: dict[str, float] = {}
        unk_mass = 0
        for tok, c in freq.items():
            if c < unk_threshold:
                unk_mass += c
            else:
                probs[tok] = c / total
        return cls(probs, unk_mass / total, unk_threshold)

    def prob(self, token: str) -> float:
        p = self.probs.get(token.lower())
        if p is not None:
            return p
        if self.unk_prob > 0.0:
            return self.unk_prob
        raise KeyError(
            f"token {token!r} unseen and the UNK mass is zero "
            f"(unk_threshold={self.unk_threshold})"
        )

    def logprob(self, token: str) -> float:
        return math.log(self.prob(token))

    def total_mass(self) -> float:
        return sum(self.probs.values()) + self.unk_prob


# ---------------------------------------------------------------------------
# Profile collections and the exchange format
# ---------------------------------------------------------------------------

class SurprisalTable:
    """Profiles keyed by (doc_id, sent_idx), with the document/language
    aggregates the metrics need."""

    def __init__(self, profiles: Iterable[SurprisalProfile]) -> None:
        self._by_ref: dict[tuple[str, int], SurprisalProfile] = {}
        for p in profiles:
            if p.ref in self._by_ref:
                raise ValueError(f"duplicate profile for {p.ref}")
            self._by_ref[p.ref] = p

    def __len__(self) -> int:
        return len(self._by_ref)

    def __contains__(self, ref: tuple[str, int]) -> bool:
        return ref in self._by_ref

    def get(self, doc_id: str, sent_idx: int) -> SurprisalProfile:
        return self._by_ref[(doc_id, sent_idx)]

    def profiles(self) -> Iterator[SurprisalProfile]:
        return iter(self._by_ref.values())

    def language_mean(self) -> float:
        total = 0.0
        count = 0
        for p in self._by_ref.values():
            total += sum(p.s)
            count += p.N
        if count == 0:
            raise ValueError("no tokens in surprisal table")
        return total / count

    def document_mean(self, doc_id: str) -> float:
        total = 0.0
        count = 0
        for (d, _), p in self._by_ref.items():
            if d == doc_id:
                total += sum(p.s)
                count += p.N
        if count == 0:
            raise KeyError(f"no profiles for document {doc_id!r}")
        return total / count

    def document_stream(self, doc_id: str) -> list[tuple[int, int, float]]:
        """All (sent_idx, tok_idx, surprisal) of one document, in reading
        order, crossing sentence boundaries."""
        refs = sorted(ref for ref in self._by_ref if ref[0] == doc_id)
        if not refs:
            raise KeyError(f"no profiles for document {doc_id!r}")
        stream = []
        for _, sent_idx in refs:
            p = self._by_ref[(doc_id, sent_idx)]
            for tok_idx, s in enumerate(p.s):
                stream.append((sent_idx, tok_idx, s))
        return stream

    def doc_ids(self) -> list[str]:
        seen: list[str] = []
        for d, _ in self._by_ref:
            if d not in seen:
                seen.append(d)
        return seen


def compute_profiles(model: NGramModel, corpus: Corpus) -> SurprisalTable:
    return SurprisalTable(model.surprisal_profile(s) for s in corpus.iter_sentences())


def write_surprisal_tsv(
    table: SurprisalTable,
    corpus: Corpus,
    path: str,
    model_tag: str,
    pseudo: bool = False,
) -> None:
    """Write the exchange format: a comment line with model metadata, a
    header row, then one row per word with full-precision surprisal."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        fh.write(f"# model={model_tag} pseudo={int(pseudo)} units=nats\n")
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow(EXCHANGE_HEADER)
        for sent in corpus.iter_sentences():
            if sent.ref not in table:
                continue
            profile = table.get(*sent.ref)
            for tok, s in zip(sent.tokens, profile.s):
                writer.writerow([tok.doc_id, tok.sent_idx, tok.tok_idx, tok.surface, repr(s)])


def load_external_surprisals(path: str, corpus: Corpus) -> SurprisalTable:
    """Load an exchange file produced elsewhere and validate it against the
    corpus: every token of every referenced sentence covered exactly once,
    surfaces matching, surprisals finite and nonnegative."""
    model_tag = "external"
    pseudo = False
    rows: list[dict[str, str]] = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh, delimiter="\t")
        header = None
        for row in reader:
            if not row:
                continue
            if row[0].startswith("#"):
                for part in row[0].lstrip("# ").split():
                    if part.startswith("model="):
                        model_tag = part.split("=", 1)[1]
                    elif part.startswith("pseudo="):
                        pseudo = part.split("=", 1)[1] == "1"
                continue
            if header is None:
                header = row
                if header != EXCHANGE_HEADER:
                    raise SurprisalFileError(
                        f"{path}: expected header {EXCHANGE_HEADER}, got {header}"
                    )
                continue
            if len(row) != len(EXCHANGE_HEADER):
                raise SurprisalFileError(f"{path}: malformed row {row!r}")
            rows.append(dict(zip(EXCHANGE_HEADER, row)))
    if header is None:
        raise SurprisalFileError(f"{path}: missing header row")

    by_sent: dict[tuple[str, int], dict[int, float]] = {}
    for row in rows:
        doc_id = row["doc_id"]
        sent_idx = int(row["sent_idx"])
        tok_idx = int(row["tok_idx"])
        token_id = (doc_id, sent_idx, tok_idx)
        try:
            sent = corpus.sentence(doc_id, sent_idx)
        except KeyError as exc:
            raise SurprisalFileError(f"{path}: unknown sentence for token {token_id}") from exc
        if not 0 <= tok_idx < sent.N:
            raise SurprisalFileError(f"{path}: token {token_id} out of range (N={sent.N})")
        if sent.tokens[tok_idx].surface != row["token"]:
            raise SurprisalFileError(
                f"{path}: token {token_id} surface mismatch: corpus has "
                f"{sent.tokens[tok_idx].surface!r}, file has {row['token']!r}"
            )
        s = float(row["surprisal_nats"])
        if not (s >= 0.0 and math.isfinite(s)):
            raise SurprisalFileError(f"{path}: negative or non-finite surprisal at {token_id}")
        slot = by_sent.setdefault((doc_id, sent_idx), {})
        if tok_idx in slot:
            raise SurprisalFileError(f"{path}: duplicate coverage of token {token_id}")
        slot[tok_idx] = s

    profiles = []
    for (doc_id, sent_idx), values in by_sent.items():
        sent = corpus.sentence(doc_id, sent_idx)
        for tok_idx in range(sent.N):
            if tok_idx not in values:
                raise SurprisalFileError(
                    f"{path}: missing coverage of token {(doc_id, sent_idx, tok_idx)}"
                )
        profiles.append(
            SurprisalProfile(
                doc_id=doc_id,
                sent_idx=sent_idx,
                s=tuple(values[i] for i in range(sent.N)),
                source="external",
                model_tag=model_tag + (":pseudo" if pseudo else ""),
            )
        )
    return SurprisalTable(profiles)
