"""Sentence- and word-level operationalizations of information-density
uniformity over a surprisal profile.

All scores are "non-uniformity" scores: larger means less uniform.  They
are pure functions of the profile (and a mean, where a scope requires one).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .ngram import SurprisalProfile, SurprisalTable

SENTENCE_SCOPES = ("sentence", "document", "language")
WORD_SCOPES = ("window", "all_previous", "sentence", "document", "language")

KINDS = (
    "super_linear",
    "variance",
    "local_variance",
    "max",
    "entropy",
    "global_delta",
    "local_delta",
)


class DegenerateEntropyError(ValueError):
    pass


@dataclass(frozen=True)
class MetricConfig:
    kind: str
    k: float = 1.0  # power / entropy order
    mu_scope: str = "sentence"
    delta: str = "squared"  # "squared" | "absolute"
    window: int = 1  # window width W, word-level "window" scope only

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown metric kind {self.kind!r}")
        if self.k <= 0:
            raise ValueError("k must be > 0")
        if self.delta not in ("squared", "absolute"):
            raise ValueError(f"unknown delta {self.delta!r}")
        if self.mu_scope == "window" and self.window < 1:
            raise ValueError("window width must be >= 1")

    def label(self) -> str:
        if self.kind in ("super_linear", "entropy"):
            return f"{self.kind}(k={self.k:g})"
        if self.kind == "variance":
            return f"variance({self.mu_scope})"
        if self.kind == "global_delta":
            return f"global_delta({self.mu_scope},{self.delta})"
        if self.kind == "local_delta":
            return f"local_delta({self.delta})"
        return self.kind


@dataclass(frozen=True)
class MetricValue:
    doc_id: str
    sent_idx: int
    value: float
    config: MetricConfig


def super_linear(s: Sequence[float], k: float) -> float:
    """Mean of per-token surprisal raised to the k-th power; k = 1 is the
    mean surprisal, k > 1 penalizes peaks super-linearly."""
    if k <= 0:
        raise ValueError("k must be > 0")
    return sum(x**k for x in s) / len(s)


def variance(s: Sequence[float], mu: float) -> float:
    """Mean squared deviation from a target rate mu (a regression toward a
    sentence-, document-, or language-level mean)."""
    return sum((x - mu) ** 2 for x in s) / len(s)


def local_variance(s: Sequence[float]) -> float:
    """Mean squared step between consecutive surprisals; 0 for a
    single-token profile (no transitions, by convention)."""
    if len(s) == 1:
        return 0.0
    return sum((s[i] - s[i - 1]) ** 2 for i in range(1, len(s))) / (len(s) - 1)


def max_surprisal(s: Sequence[float]) -> float:
    return max(s)


def _order_k_entropy(p: Sequence[float], k: float) -> float:
    if k == 1.0:
        return -sum(x * math.log(x) for x in p if x > 0.0)
    return math.log(sum(x**k for x in p)) / (1.0 - k)


def entropy_uid(s: Sequence[float], k: float, normalize: str = "surprisal") -> float:
    """Entropy of order k of the profile normalized to a distribution:
    the entropy itself for k < 1, its reciprocal for k >= 1 (so larger
    always means less uniform).

    ``normalize`` picks what is normalized into p-hat: the surprisals
    (default) or the raw probabilities exp(-s).
    """
    if k <= 0:
        raise ValueError("k must be > 0")
    if normalize == "surprisal":
        weights = list(s)
    elif normalize == "probability":
        weights = [math.exp(-x) for x in s]
    else:
        raise ValueError(f"unknown normalization {normalize!r}")
    total = sum(weights)
    if total <= 0.0:
        raise DegenerateEntropyError("all-zero profile: p-hat undefined")
    p_hat = [w / total for w in weights]
    h = _order_k_entropy(p_hat, k)
    if k < 1.0:
        return h
    if h <= 0.0:
        raise DegenerateEntropyError("degenerate entropy")
    return 1.0 / h


def _delta(a: float, b: float, delta: str) -> float:
    d = a - b
    return d * d if delta == "squared" else abs(d)


def global_delta(s: Sequence[float], mu: float, delta: str = "squared") -> float:
    """Mean per-token distance to a target rate; the squared form is
    exactly :func:`variance`."""
    return sum(_delta(x, mu, delta) for x in s) / len(s)


def local_delta(s: Sequence[float], delta: str = "squared") -> float:
    """Mean distance between consecutive surprisals; the squared form is
    exactly :func:`local_variance`."""
    if len(s) == 1:
        return 0.0
    return sum(_delta(s[i], s[i - 1], delta) for i in range(1, len(s))) / (len(s) - 1)


def word_variance(s_value: float, mu: float) -> float:
    """Squared deviation of one token's surprisal from a scope mean."""
    return (s_value - mu) ** 2


# ---------------------------------------------------------------------------
# Scope resolution against a profile collection
# ---------------------------------------------------------------------------

def resolve_sentence_mu(
    profile: SurprisalProfile,
    scope: str,
    table: SurprisalTable | None = None,
    language_mean: float | None = None,
) -> float:
    if scope == "sentence":
        return sum(profile.s) / profile.N
    if scope == "document":
        if table is None:
            raise ValueError("document scope needs the enclosing document's profiles")
        return table.document_mean(profile.doc_id)
    if scope == "language":
        if language_mean is None:
            if table is None:
                raise ValueError("language scope needs a reference language mean")
            return table.language_mean()
        return language_mean
    raise ValueError(f"unknown sentence-level scope {scope!r}")


def evaluate_metric(
    profile: SurprisalProfile,
    config: MetricConfig,
    table: SurprisalTable | None = None,
    language_mean: float | None = None,
) -> MetricValue:
    """Evaluate one sentence-level metric; scopes beyond the sentence are
    resolved against ``table`` / ``language_mean``."""
    s = profile.s
    if config.kind == "super_linear":
        value = super_linear(s, config.k)
    elif config.kind == "variance":
        mu = resolve_sentence_mu(profile, config.mu_scope, table, language_mean)
        value = variance(s, mu)
    elif config.kind == "local_variance":
        value = local_variance(s)
    elif config.kind == "max":
        value = max_surprisal(s)
    elif config.kind == "entropy":
        value = entropy_uid(s, config.k)
    elif config.kind == "global_delta":
        mu = resolve_sentence_mu(profile, config.mu_scope, table, language_mean)
        value = global_delta(s, mu, config.delta)
    elif config.kind == "local_delta":
        value = local_delta(s, config.delta)
    else:  # unreachable, MetricConfig validates
        raise ValueError(config.kind)
    return MetricValue(profile.doc_id, profile.sent_idx, value, config)


@dataclass(frozen=True)
class WordMetricValue:
    doc_id: str
    sent_idx: int
    tok_idx: int
    value: float
    excluded: bool
    scope: str
    window: int


def word_variance_over_document(
    table: SurprisalTable,
    doc_id: str,
    scope: str,
    window: int = 1,
    language_mean: float | None = None,
) -> list[WordMetricValue]:
    """Word-level squared deviation from a scope mean for every token of a
    document.  Window and all-previous scopes run over preceding words in
    the document (crossing sentence boundaries); tokens with an empty
    preceding window are flagged excluded, not errors.
    """
    if scope not in WORD_SCOPES:
        raise ValueError(f"unknown word-level scope {scope!r}")
    stream = table.document_stream(doc_id)
    values = [s for _, _, s in stream]
    out: list[WordMetricValue] = []
    if scope == "language":
        mu_lang = table.language_mean() if language_mean is None else language_mean
    if scope == "document":
        mu_doc = table.document_mean(doc_id)
    if scope == "sentence":
        sent_mu = {
            ref[1]: sum(p.s) / p.N
            for ref, p in ((q.ref, q) for q in table.profiles())
            if ref[0] == doc_id
        }
    for pos, (sent_idx, tok_idx, s) in enumerate(stream):
        excluded = False
        if scope == "window":
            lo = pos - window
            if pos == 0:
                mu, excluded = 0.0, True
            else:
                prev = values[max(lo, 0) : pos]
                mu = sum(prev) / len(prev)
        elif scope == "all_previous":
            if pos == 0:
                mu, excluded = 0.0, True
            else:
                mu = sum(values[:pos]) / pos
        elif scope == "sentence":
            mu = sent_mu[sent_idx]
        elif scope == "document":
            mu = mu_doc
        else:
            mu = mu_lang
        out.append(
            WordMetricValue(
                doc_id=doc_id,
                sent_idx=sent_idx,
                tok_idx=tok_idx,
                value=0.0 if excluded else word_variance(s, mu),
                excluded=excluded,
                scope=scope,
                window=window,
            )
        )
    return out


def raw_probability_profile(profile: SurprisalProfile) -> SurprisalProfile:
    """Replace each surprisal with the raw probability exp(-s); used by the
    probability-instead-of-surprisal comparison mode."""
    return SurprisalProfile(
        doc_id=profile.doc_id,
        sent_idx=profile.sent_idx,
        s=tuple(math.exp(-x) for x in profile.s),
        source=profile.source,
        model_tag=profile.model_tag + ":rawprob",
    )
