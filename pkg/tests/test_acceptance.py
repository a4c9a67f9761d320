"""Acceptance gate: one test per criterion, each at its stated tolerance
and runtime budget, printing one pass/fail line (run with -s to see them).

Headline corpus numbers are out of reach at desk scale, so the gate is
property-based plus synthetic recovery, over fixed seeds throughout.
"""

import math
import time

import numpy as np
import pytest

from uidtk.comparison import delta_loglik, sentence_rt_baseline
from uidtk.corpus import remove_outliers
from uidtk.metrics import (
    entropy_uid,
    global_delta,
    local_delta,
    local_variance,
    max_surprisal,
    super_linear,
    variance,
)
from uidtk.ngram import NGramModel, UnigramModel, compute_profiles
from uidtk.regression import ModelSpec, fit_linear, fit_lmm, fit_logistic
from uidtk.sweeps import AnalysisInputs, run_k_sweep, run_window_sweep
from uidtk.theory import EffortParams, optimal_length, verify_uniform_minimizer

from conftest import markov_corpus
from synth import (
    bimodal_corpus,
    synth_acceptability,
    synth_sentence_readings,
    synth_word_readings,
)
from test_metrics import (
    bf_entropy,
    bf_global_delta,
    bf_local_delta,
    bf_local_variance,
    bf_max,
    bf_super_linear,
    bf_variance,
)


class Budget:
    def __init__(self, name: str, seconds: float):
        self.name = name
        self.seconds = seconds

    def __enter__(self):
        self.start = time.monotonic()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.monotonic() - self.start
        if exc_type is None:
            assert elapsed < self.seconds, (
                f"{self.name}: runtime {elapsed:.1f}s over budget {self.seconds}s"
            )
            print(f"[acceptance] {self.name}: PASS ({elapsed:.1f}s)")
        else:
            print(f"[acceptance] {self.name}: FAIL ({elapsed:.1f}s)")
        return False


def test_jensen_uniformity_suite():
    with Budget("jensen-uniformity-suite", 10.0):
        rng = np.random.default_rng(1001)
        for _ in range(100):
            n = int(rng.integers(2, 21))
            total = float(rng.uniform(1e-9, 50.0))
            k = float(rng.choice([1.25, 1.5, 2.0, 3.0]))
            seed = int(rng.integers(0, 2**31 - 1))
            assert verify_uniform_minimizer(n, total, k, trials=1000, seed=seed), (n, total, k)
        for _ in range(100):
            n = int(rng.integers(2, 21))
            total = float(rng.uniform(1e-9, 50.0))
            k = float(rng.choice([0.25, 0.5]))
            seed = int(rng.integers(0, 2**31 - 1))
            assert verify_uniform_minimizer(n, total, k, trials=1000, seed=seed), (n, total, k)


def test_optimal_length_suite():
    with Budget("optimal-length-suite", 5.0):
        rng = np.random.default_rng(1002)
        grid = np.arange(1, 10_001, dtype=float)
        for _ in range(100):
            total = float(rng.uniform(0.05, 120.0))
            k = float(rng.uniform(1.01, 3.5))
            c = float(rng.uniform(0.005, 20.0))
            res = optimal_length(total, EffortParams(k=k, c=c))
            costs = total**k / grid ** (k - 1.0) + c * grid
            scan_argmin = int(np.argmin(costs)) + 1
            assert scan_argmin in res.minimizers, (total, k, c, res, scan_argmin)


def test_lm_normalization_and_perplexity_ordering():
    with Budget("lm-normalization", 30.0):
        train = markov_corpus(1000, seed=2001)
        heldout = markov_corpus(150, seed=2002)
        m5 = NGramModel.train(train, order=5)
        m1 = NGramModel.train(train, order=1)
        rng = np.random.default_rng(2003)
        sentences = [s.surfaces() for s in train.iter_sentences()]
        for _ in range(1000):
            sent = sentences[rng.integers(len(sentences))]
            pos = int(rng.integers(0, len(sent) + 1))
            ctx = sent[max(0, pos - 4) : pos]
            total = m5.full_distribution(ctx).sum()
            assert abs(total - 1.0) < 1e-6, (ctx, total)
        assert m5.perplexity(heldout) < m1.perplexity(heldout)


def test_metric_oracle_equivalence():
    with Budget("metric-oracle-equivalence", 30.0):
        rng = np.random.default_rng(3001)
        for _ in range(500):
            n = int(rng.integers(2, 16))
            s = tuple(rng.uniform(0.01, 12.0, size=n).tolist())
            k = float(rng.uniform(0.25, 3.0))
            mu = float(rng.uniform(0.0, 8.0))
            pairs = [
                (super_linear(s, k), bf_super_linear(s, k)),
                (variance(s, mu), bf_variance(s, mu)),
                (local_variance(s), bf_local_variance(s)),
                (max_surprisal(s), bf_max(s)),
                (entropy_uid(s, k), bf_entropy(s, k)),
                (global_delta(s, mu, "absolute"), bf_global_delta(s, mu, "absolute")),
                (local_delta(s, "absolute"), bf_local_delta(s, "absolute")),
            ]
            for got, want in pairs:
                assert got == pytest.approx(want, rel=1e-12), (s, k, mu)
            # the squared-distance forms are the variances, exactly
            assert global_delta(s, mu, "squared") == variance(s, mu)
            assert local_delta(s, "squared") == local_variance(s)


def test_regression_recovery():
    with Budget("regression-recovery", 120.0):
        import pandas as pd

        # OLS: noiseless planted coefficients within 1e-8
        rng = np.random.default_rng(4001)
        x = rng.normal(size=(5000, 4))
        beta = np.array([2.0, -1.5, 0.25, 3.0])
        data = pd.DataFrame({f"x{i}": x[:, i] for i in range(4)})
        data["sentence_rt"] = 0.75 + x @ beta
        fit = fit_linear(
            ModelSpec(response="sentence_rt", fixed_effects=tuple(f"x{i}" for i in range(4))),
            data,
        )
        assert fit.coefficients["intercept"] == pytest.approx(0.75, abs=1e-8)
        for i in range(4):
            assert fit.coefficients[f"x{i}"] == pytest.approx(beta[i], abs=1e-8)

        # logistic: planted model within 5% at n = 10^4
        rng = np.random.default_rng(2)
        n = 10_000
        x1, x2 = rng.normal(size=n), rng.normal(size=n)
        logits = 0.4 + 1.2 * x1 - 0.8 * x2
        y = (rng.uniform(size=n) < 1.0 / (1.0 + np.exp(-logits))).astype(float)
        lfit = fit_logistic(
            ModelSpec(
                response="acceptability_binary", fixed_effects=("x1", "x2"), family="bernoulli"
            ),
            pd.DataFrame({"x1": x1, "x2": x2, "acceptability_binary": y}),
        )
        assert lfit.coefficients["intercept"] == pytest.approx(0.4, rel=0.05)
        assert lfit.coefficients["x1"] == pytest.approx(1.2, rel=0.05)
        assert lfit.coefficients["x2"] == pytest.approx(-0.8, rel=0.05)

        # mixed model: variance components within 20% at 200 subjects x 50
        rng = np.random.default_rng(22)
        rows = []
        sd_int, sd_slope, sd_eps = 5.0, 3.0, 4.0
        for j in range(200):
            b0 = rng.normal(0.0, sd_int)
            b1 = rng.normal(0.0, sd_slope)
            xs = rng.normal(size=50)
            ys = 50.0 + b0 + (10.0 + b1) * xs + rng.normal(0.0, sd_eps, size=50)
            rows.extend(
                {"subject_id": f"s{j}", "x": float(a), "sentence_rt": float(b)}
                for a, b in zip(xs, ys)
            )
        mfit = fit_lmm(
            ModelSpec(
                response="sentence_rt", fixed_effects=("x",), random_effects=("intercept", "x")
            ),
            pd.DataFrame(rows),
        )
        assert mfit.random_variances["intercept"] == pytest.approx(sd_int**2, rel=0.2)
        assert mfit.random_variances["x"] == pytest.approx(sd_slope**2, rel=0.2)
        assert mfit.sigma2 == pytest.approx(sd_eps**2, rel=0.2)


@pytest.fixture(scope="module")
def protocol_corpus():
    corpus = markov_corpus(2500, seed=101)
    model = NGramModel.train(corpus, order=5)
    profiles = compute_profiles(model, corpus)
    unigram = UnigramModel.train(corpus)
    return corpus, profiles, unigram


def test_protocol_shape_acceptability(protocol_corpus):
    """Synthetic analogue of the published exponent sweep: labels planted at
    k = 1.5 must put the curve's peak within 0.25 of it, and the planted
    exponent must beat k = 1 by more than three standard errors."""
    with Budget("protocol-shape-acceptability", 300.0):
        corpus, profiles, unigram = protocol_corpus
        acceptability = synth_acceptability(profiles, k_true=1.5, seed=7, slope=2.0)
        inputs = AnalysisInputs(
            corpus=corpus, profiles=profiles, unigram=unigram, acceptability=acceptability
        )
        result = run_k_sweep(inputs, folds=10, seed=3)
        ok = [r for r in result.rows() if r["status"] == "ok"]
        assert len(ok) == len(result.rows())
        best = max(ok, key=lambda r: r["delta_loglik_nats"])
        assert abs(best["k"] - 1.5) <= 0.25, f"peak at k={best['k']}"
        d = (
            result.cell(dataset="acceptability", k=1.5).comparison.deltas
            - result.cell(dataset="acceptability", k=1.0).comparison.deltas
        )
        se = d.std(ddof=1) / math.sqrt(len(d))
        assert d.mean() > 3.0 * se, f"separation {d.mean() / se:.2f} se"


def test_protocol_shape_reading_time():
    """Reading times planted at k = 1.25 through the effort model: the
    mixed-model sweep's peak must land within 0.25 of the true exponent."""
    with Budget("protocol-shape-reading-time", 300.0):
        corpus = markov_corpus(400, seed=55)
        model = NGramModel.train(corpus, order=5)
        profiles = compute_profiles(model, corpus)
        unigram = UnigramModel.train(corpus)
        readings, _ = remove_outliers(
            synth_sentence_readings(corpus, profiles, k_true=1.25, seed=9, n_subjects=15)
        )
        inputs = AnalysisInputs(
            corpus=corpus, profiles=profiles, unigram=unigram, readings=readings
        )
        result = run_k_sweep(inputs, folds=10, seed=3)
        ok = [r for r in result.rows() if r["status"] == "ok"]
        assert len(ok) == len(result.rows())
        best = max(ok, key=lambda r: r["delta_loglik_nats"])
        assert abs(best["k"] - 1.25) <= 0.25, f"peak at k={best['k']}"


def test_scope_sweep_language_first():
    """Word reading times planted on language-scope deviations: the scope
    sweep must rank the language mean first."""
    with Budget("scope-sweep-language-first", 300.0):
        corpus = bimodal_corpus(400, seed=31)
        model = NGramModel.train(corpus, order=3)
        profiles = compute_profiles(model, corpus)
        unigram = UnigramModel.train(corpus)
        readings, _ = remove_outliers(synth_word_readings(corpus, profiles, seed=13))
        inputs = AnalysisInputs(
            corpus=corpus, profiles=profiles, unigram=unigram, readings=readings
        )
        result = run_window_sweep(inputs, folds=10, seed=3)
        ok = [r for r in result.rows() if r["status"] == "ok"]
        assert len(ok) == len(result.rows())
        ranked = sorted(ok, key=lambda r: r["delta_loglik_nats"], reverse=True)
        assert ranked[0]["scope"] == "language", [r["predictor"] for r in ranked]


def test_unit_fidelity():
    """Reports carry the x100 rendering, and it round-trips exactly."""
    with Budget("unit-fidelity", 30.0):
        import pandas as pd

        rng = np.random.default_rng(6001)
        x = rng.normal(size=300)
        pred = rng.normal(size=300)
        y = 1.0 + x + 0.3 * pred + rng.normal(size=300)
        data = pd.DataFrame({"x": x, "pred": pred, "sentence_rt": y})
        base = ModelSpec(response="sentence_rt", fixed_effects=("x",))
        report = delta_loglik(base, "pred", data, folds=5, seed=1).to_report()
        assert report["delta_loglik_1e2_nats"] == report["delta_loglik_nats"] * 100.0
        assert abs(report["delta_loglik_1e2_nats"] / 100.0 - report["delta_loglik_nats"]) <= (
            1e-15 * abs(report["delta_loglik_nats"])
        )
        # and the same for a thousand raw values
        for v in rng.normal(size=1000):
            assert abs((v * 100.0) / 100.0 - v) <= 1e-15 * abs(v)
