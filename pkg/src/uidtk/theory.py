"""Processing-effort model over surprisal profiles and the analytic
results about it: the uniform profile minimizes effort for a fixed total
(super-linear case), and total effort has one or two integer-length
minimizers at a closed-form optimum.

Proportionality constants are not pinned down anywhere, so every check
here is ordinal: orderings and argmin locations, never absolute values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class EffortParams:
    k: float  # super-linearity power
    c: float  # per-word cost

    def __post_init__(self) -> None:
        if self.k <= 0:
            raise ValueError("k must be > 0")
        if self.c <= 0:
            raise ValueError("c must be > 0")


@dataclass(frozen=True)
class EffortValue:
    information: float
    length: float

    @property
    def value(self) -> float:
        return self.information + self.length


def effort_sum(s: Sequence[float]) -> float:
    """Total surprisal of the signal (the linear-cost reading)."""
    return float(sum(s))


def effort(s: Sequence[float], params: EffortParams) -> EffortValue:
    """Super-linear information cost plus a per-word cost:
    sum(s_n ** k) + c * N, decomposition retained."""
    return EffortValue(
        information=float(sum(x**params.k for x in s)),
        length=params.c * len(s),
    )


def effort_from_metric(metric_value: float, n: int, params: EffortParams) -> float:
    """Effort written through a non-uniformity score: score * N + c * N.
    With the mean-power score this equals :func:`effort` exactly."""
    return metric_value * n + params.c * n


def inverse_acceptability(metric_value: float, n: int) -> float:
    """Acceptability pressure: score * N, the length penalty withheld."""
    return metric_value * n


def uniform_curve_effort(total_surprisal: float, n: float, params: EffortParams) -> float:
    """Effort along the uniform-profile curve: S^k / N^(k-1) + c N."""
    return total_surprisal**params.k / n ** (params.k - 1.0) + params.c * n


@dataclass(frozen=True)
class OptimalLength:
    n_star: float
    minimizers: tuple[int, ...]
    concave_case: bool  # k <= 1: length 1 regardless of S and c


def optimal_length(total_surprisal: float, params: EffortParams) -> OptimalLength:
    """Length(s) minimizing effort for a fixed total surprisal, assuming
    the profile is uniform at each length.

    For k > 1 the real-valued optimum is max(1, ((k-1)/c)^(1/k) * S) and
    the integer minimizer is its floor, its ceiling, or both.  For k <= 1
    the cost is increasing in N, so length 1 wins regardless.
    """
    if total_surprisal <= 0:
        raise ValueError("total surprisal must be > 0")
    if params.k <= 1.0:
        return OptimalLength(n_star=1.0, minimizers=(1,), concave_case=True)
    n_star = max(1.0, ((params.k - 1.0) / params.c) ** (1.0 / params.k) * total_surprisal)
    lo = max(1, math.floor(n_star))
    hi = max(1, math.ceil(n_star))
    f_lo = uniform_curve_effort(total_surprisal, lo, params)
    f_hi = uniform_curve_effort(total_surprisal, hi, params)
    if lo == hi:
        minimizers: tuple[int, ...] = (lo,)
    elif f_lo < f_hi:
        minimizers = (lo,)
    elif f_hi < f_lo:
        minimizers = (hi,)
    else:
        minimizers = (lo, hi)
    return OptimalLength(n_star=n_star, minimizers=minimizers, concave_case=False)


def random_profiles(
    n: int, total: float, trials: int, rng: np.random.Generator
) -> np.ndarray:
    """Random nonnegative profiles of length n summing to ``total``
    (uniform on the scaled simplex)."""
    raw = rng.exponential(1.0, size=(trials, n))
    return total * raw / raw.sum(axis=1, keepdims=True)


def verify_uniform_minimizer(
    n: int,
    total: float,
    k: float,
    trials: int,
    seed: int,
    c: float = 1.0,
    tol: float = 1e-12,
) -> bool:
    """Sample ``trials`` random profiles with the given total surprisal and
    check that the uniform profile is the cheapest (k > 1), the dearest
    (k < 1), or exactly tied (k = 1)."""
    params = EffortParams(k=k, c=c)
    rng = np.random.default_rng(seed)
    uniform = effort([total / n] * n, params).value
    samples = random_profiles(n, total, trials, rng)
    info = np.power(samples, k).sum(axis=1)
    costs = info + params.c * n
    if k > 1.0:
        return bool(np.all(uniform <= costs + tol))
    if k < 1.0:
        return bool(np.all(uniform >= costs - tol))
    return bool(np.all(np.abs(costs - uniform) <= 1e-9 * max(1.0, uniform)))


def theory_check_report(
    seed: int,
    n_draws: int = 100,
    trials: int = 1000,
    scan_limit: int = 10_000,
) -> dict:
    """Randomized verification report: the uniformity property across random
    (N, S, k) draws, and the integer-length optimum against exhaustive scan.
    The structure is JSON-ready (parameter draws, seeds, pass/fail)."""
    rng = np.random.default_rng(seed)
    jensen_checks = []
    for i in range(n_draws):
        n = int(rng.integers(2, 21))
        total = float(rng.uniform(1e-6, 50.0))
        k = float(rng.choice([1.25, 1.5, 2.0, 3.0]))
        sub_seed = int(rng.integers(0, 2**31 - 1))
        ok = verify_uniform_minimizer(n, total, k, trials, seed=sub_seed)
        jensen_checks.append(
            {"n": n, "total_surprisal": total, "k": k, "seed": sub_seed, "passed": ok}
        )
    concave_checks = []
    for i in range(n_draws // 2):
        n = int(rng.integers(2, 21))
        total = float(rng.uniform(1e-6, 50.0))
        k = float(rng.choice([0.25, 0.5]))
        sub_seed = int(rng.integers(0, 2**31 - 1))
        ok = verify_uniform_minimizer(n, total, k, trials, seed=sub_seed)
        concave_checks.append(
            {"n": n, "total_surprisal": total, "k": k, "seed": sub_seed, "passed": ok}
        )
    length_checks = []
    for i in range(n_draws):
        total = float(rng.uniform(0.1, 100.0))
        k = float(rng.uniform(1.05, 3.0))
        c = float(rng.uniform(0.01, 10.0))
        params = EffortParams(k=k, c=c)
        res = optimal_length(total, params)
        grid = np.arange(1, scan_limit + 1, dtype=float)
        costs = total**k / grid ** (k - 1.0) + c * grid
        best = int(np.argmin(costs)) + 1
        length_checks.append(
            {
                "total_surprisal": total,
                "k": k,
                "c": c,
                "n_star": res.n_star,
                "minimizers": list(res.minimizers),
                "scan_argmin": best,
                "passed": best in res.minimizers,
            }
        )
    report = {
        "seed": seed,
        "trials_per_check": trials,
        "uniform_minimizer": {
            "checks": jensen_checks,
            "passed": all(c["passed"] for c in jensen_checks),
        },
        "uniform_maximizer_concave": {
            "checks": concave_checks,
            "passed": all(c["passed"] for c in concave_checks),
        },
        "optimal_length": {
            "scan_limit": scan_limit,
            "checks": length_checks,
            "passed": all(c["passed"] for c in length_checks),
        },
    }
    report["passed"] = all(
        report[k]["passed"]
        for k in ("uniform_minimizer", "uniform_maximizer_concave", "optimal_length")
    )
    return report
