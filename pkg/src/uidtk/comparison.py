"""Cross-validated log-likelihood comparison of a baseline model against
the same model plus one predictor, with the paired significance tests and
correlation analyses built on top of it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd
import scipy.stats

from .regression import FitResult, ModelSpec, fit_model, heldout_loglik


@dataclass(frozen=True)
class ModelComparison:
    baseline: ModelSpec
    augmented: ModelSpec
    predictor: str
    loglik_baseline: np.ndarray  # per-row held-out log-likelihood
    loglik_augmented: np.ndarray
    fold_ids: np.ndarray
    seed: int
    folds: int

    @property
    def deltas(self) -> np.ndarray:
        return self.loglik_augmented - self.loglik_baseline

    @property
    def n(self) -> int:
        return len(self.loglik_baseline)

    @property
    def mean(self) -> float:
        return float(self.deltas.mean())

    @property
    def se(self) -> float:
        d = self.deltas
        if len(d) < 2:
            return float("nan")
        return float(d.std(ddof=1) / math.sqrt(len(d)))

    def fold_means(self) -> list[float]:
        return [float(self.deltas[self.fold_ids == f].mean()) for f in range(self.folds)]

    def to_report(self) -> dict:
        return {
            "predictor": self.predictor,
            "baseline": {
                "response": self.baseline.response,
                "fixed_effects": list(self.baseline.fixed_effects),
                "random_effects": list(self.baseline.random_effects),
                "family": self.baseline.family,
            },
            "augmented": {
                "response": self.augmented.response,
                "fixed_effects": list(self.augmented.fixed_effects),
                "random_effects": list(self.augmented.random_effects),
                "family": self.augmented.family,
            },
            "n": self.n,
            "folds": self.folds,
            "seed": self.seed,
            "delta_loglik_nats": self.mean,
            "delta_loglik_se_nats": self.se,
            "delta_loglik_1e2_nats": self.mean * 100.0,
            "delta_loglik_se_1e2_nats": self.se * 100.0,
            "per_fold_delta_nats": self.fold_means(),
        }


def make_folds(n_rows: int, folds: int, seed: int) -> np.ndarray:
    """Random, balanced fold assignment; a pure function of (seed, n_rows)."""
    if folds < 2:
        raise ValueError("need at least 2 folds")
    if n_rows < folds:
        raise ValueError(f"cannot split {n_rows} rows into {folds} folds")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n_rows)
    fold_ids = np.empty(n_rows, dtype=int)
    fold_ids[perm] = np.arange(n_rows) % folds
    return fold_ids


def standardize_columns(
    train: pd.DataFrame, test: pd.DataFrame, columns: Sequence[str]
) -> tuple[pd.DataFrame, pd.DataFrame]:
    """z-standardize the named columns using the training fold's moments;
    constant columns become all zeros rather than dividing by zero."""
    train = train.copy()
    test = test.copy()
    for col in columns:
        if col not in train.columns:
            raise KeyError(f"predictor column {col!r} not present in the training fold")
        mean = float(train[col].mean())
        sd = float(train[col].std(ddof=0))
        if sd == 0.0 or not math.isfinite(sd):
            sd = 1.0
        train[col] = (train[col] - mean) / sd
        test[col] = (test[col] - mean) / sd
    return train, test


def compare_specs(
    baseline: ModelSpec,
    augmented: ModelSpec,
    data: pd.DataFrame,
    folds: int = 10,
    seed: int = 0,
    ridge: float = 1e-6,
    predictor: str = "",
) -> ModelComparison:
    """Cross-validated per-row held-out log-likelihoods for two specs over
    identical folds.  The union of both specs' predictor columns (never the
    intercept) is z-standardized within each training fold, so swapping the
    two specs negates every delta exactly."""
    fold_ids = make_folds(len(data), folds, seed)
    to_scale = sorted(
        {
            c
            for c in (
                baseline.fixed_effects
                + baseline.random_effects
                + augmented.fixed_effects
                + augmented.random_effects
            )
            if c != "intercept"
        }
    )
    ll_base = np.empty(len(data))
    ll_aug = np.empty(len(data))
    data = data.reset_index(drop=True)
    for f in range(folds):
        test_mask = fold_ids == f
        train, test = standardize_columns(data[~test_mask], data[test_mask], to_scale)
        fit_base = fit_model(baseline, train, ridge=ridge)
        fit_aug = fit_model(augmented, train, ridge=ridge)
        ll_base[test_mask] = heldout_loglik(fit_base, test)
        ll_aug[test_mask] = heldout_loglik(fit_aug, test)
    return ModelComparison(
        baseline=baseline,
        augmented=augmented,
        predictor=predictor,
        loglik_baseline=ll_base,
        loglik_augmented=ll_aug,
        fold_ids=fold_ids,
        seed=seed,
        folds=folds,
    )


def delta_loglik(
    baseline: ModelSpec,
    predictor: str,
    data: pd.DataFrame,
    folds: int = 10,
    seed: int = 0,
    ridge: float = 1e-6,
) -> ModelComparison:
    """Mean held-out log-likelihood gain of baseline + ``predictor`` over
    the baseline, under k-fold cross validation with shared splits.

    Every predictor (fixed and random-slope columns, never the intercept)
    is z-standardized within each training fold.  For reading-time
    responses the augmented model also gains a per-subject random slope
    for the predictor.
    """
    augmented = baseline.with_predictor(predictor)
    return compare_specs(
        baseline, augmented, data, folds=folds, seed=seed, ridge=ridge, predictor=predictor
    )


# ---------------------------------------------------------------------------
# Significance tests and correlations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TTestResult:
    t: float
    dof: int
    p: float
    significant: bool
    threshold: float


def paired_ttest(
    deltas_a: Sequence[float],
    deltas_b: Sequence[float],
    m_comparisons: int = 1,
    alpha: float = 0.001,
) -> TTestResult:
    """One-sided paired t test of mean(a - b) > 0 at a Bonferroni-corrected
    threshold alpha / m.  Reading-time inputs are expected pre-averaged per
    sentence across subjects (see :func:`aggregate_per_sentence`)."""
    a = np.asarray(deltas_a, dtype=float)
    b = np.asarray(deltas_b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("paired samples must have equal length")
    d = a - b
    n = len(d)
    if n < 2:
        raise ValueError("need at least 2 paired observations")
    sd = d.std(ddof=1)
    if sd == 0.0:
        raise ValueError("zero-variance differences: t statistic undefined")
    t = float(d.mean() / (sd / math.sqrt(n)))
    dof = n - 1
    p = float(scipy.stats.t.sf(t, dof))
    threshold = alpha / m_comparisons
    return TTestResult(t=t, dof=dof, p=p, significant=p < threshold, threshold=threshold)


def aggregate_per_sentence(
    deltas: np.ndarray, sentence_keys: Sequence[tuple[str, int]]
) -> tuple[list[tuple[str, int]], np.ndarray]:
    """Average per-row deltas per sentence across subjects (the aggregation
    used before paired t tests on reading-time data).  Returns the sorted
    sentence keys with their means."""
    sums: dict[tuple[str, int], list[float]] = {}
    for d, key in zip(deltas, sentence_keys):
        sums.setdefault(key, []).append(float(d))
    keys = sorted(sums)
    return keys, np.array([sum(sums[k]) / len(sums[k]) for k in keys])


def correlate(x: Sequence[float], y: Sequence[float], method: str = "pearson") -> float:
    """Pearson (default) or Spearman correlation; constant input is an
    error rather than NaN."""
    xa = np.asarray(x, dtype=float)
    ya = np.asarray(y, dtype=float)
    if len(xa) != len(ya):
        raise ValueError("x and y must have equal length")
    if len(xa) < 2:
        raise ValueError("need at least 2 points")
    if method == "spearman":
        xa = scipy.stats.rankdata(xa)
        ya = scipy.stats.rankdata(ya)
    elif method != "pearson":
        raise ValueError(f"unknown correlation method {method!r}")
    xd = xa - xa.mean()
    yd = ya - ya.mean()
    denom = math.sqrt(float(xd @ xd) * float(yd @ yd))
    if denom == 0.0:
        raise ValueError("correlation undefined for constant input")
    return float(xd @ yd / denom)


# ---------------------------------------------------------------------------
# Baseline model specs (the control-predictor sets of the protocol)
# ---------------------------------------------------------------------------

EXTENDED_SENTENCE_TERMS = ("sum_unigram_lp", "sum_char_len", "sum_unigram_x_len")

WORD_BASELINE_TERMS = (
    "logp",
    "unigram_lp",
    "char_len",
    "unigram_x_len",
    "prev_logp",
    "prev_unigram_lp",
    "prev_char_len",
    "prev_unigram_x_len",
)


def sentence_rt_baseline(extended: bool = False) -> ModelSpec:
    """Sentence reading-time baseline: fixed effects for total word count
    and fixated-word count, per-subject random slope for word count.  The
    extended variant adds summed unigram log-probability, summed character
    length, and their interaction."""
    fixed: tuple[str, ...] = ("n_tokens", "n_fixated")
    if extended:
        fixed = fixed + EXTENDED_SENTENCE_TERMS
    return ModelSpec(
        response="sentence_rt",
        fixed_effects=fixed,
        random_effects=("n_tokens",),
        family="gaussian",
    )


def word_rt_baseline() -> ModelSpec:
    """Word reading-time baseline: current and previous-word log-probability,
    unigram log-probability, character length and the length-by-unigram
    interaction, plus a per-subject random intercept."""
    return ModelSpec(
        response="word_rt",
        fixed_effects=WORD_BASELINE_TERMS,
        random_effects=("intercept",),
        family="gaussian",
    )


def acceptability_baseline(extended: bool = False) -> ModelSpec:
    """Acceptability baseline: intercept-only logistic regression (the
    extended variant adds the summed unigram/length controls)."""
    fixed: tuple[str, ...] = EXTENDED_SENTENCE_TERMS if extended else ()
    return ModelSpec(
        response="acceptability_binary",
        fixed_effects=fixed,
        random_effects=(),
        family="bernoulli",
    )
