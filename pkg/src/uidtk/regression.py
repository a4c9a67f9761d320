"""Regression fits used by the model comparisons: ordinary least squares,
logistic regression via IRLS, and a Gaussian linear mixed model with
independent per-subject random terms, fitted by maximum likelihood through
the profiled deviance.

Fits work on raw predictor scales; fold-wise standardization is the
comparison layer's job.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import pandas as pd
import scipy.linalg
import scipy.optimize

RESPONSES = ("sentence_rt", "word_rt", "acceptability_binary")
FAMILIES = ("gaussian", "bernoulli")

_LOG_2PI = math.log(2.0 * math.pi)


class CollinearityError(ValueError):
    pass


class ConvergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class ModelSpec:
    response: str
    fixed_effects: tuple[str, ...] = ()
    random_effects: tuple[str, ...] = ()  # per-subject: "intercept" or slope names
    family: str = "gaussian"

    def __post_init__(self) -> None:
        if self.response not in RESPONSES:
            raise ValueError(f"unknown response {self.response!r}")
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.random_effects and self.family != "gaussian":
            raise ValueError("random effects are only supported for gaussian models")

    @property
    def mixed(self) -> bool:
        return bool(self.random_effects)

    def with_predictor(self, name: str) -> "ModelSpec":
        """The augmented spec: one extra fixed effect, plus its per-subject
        random slope for reading-time (gaussian mixed) models."""
        random = self.random_effects
        if self.family == "gaussian" and self.mixed:
            random = random + (name,)
        return ModelSpec(
            response=self.response,
            fixed_effects=self.fixed_effects + (name,),
            random_effects=random,
            family=self.family,
        )


@dataclass
class FitResult:
    spec: ModelSpec
    coefficients: dict[str, float]
    loglik: float
    sigma2: float | None = None
    random_variances: dict[str, float] | None = None
    converged: bool = True
    n_iter: int = 0
    boundary: tuple[str, ...] = ()
    deviance_history: list[float] | None = None
    # prediction internals
    beta: np.ndarray | None = None
    columns: tuple[str, ...] = ()
    theta: np.ndarray | None = None  # relative random-term variances
    blups: dict[str, np.ndarray] | None = None


def _column(data: pd.DataFrame, name: str) -> np.ndarray:
    if name not in data.columns:
        raise KeyError(f"predictor column {name!r} not present in the data")
    return np.asarray(data[name], dtype=float)


def design_matrix(spec: ModelSpec, data: pd.DataFrame) -> tuple[np.ndarray, tuple[str, ...]]:
    cols = [np.ones(len(data))]
    names = ["intercept"]
    for name in spec.fixed_effects:
        cols.append(_column(data, name))
        names.append(name)
    return np.column_stack(cols), tuple(names)


def random_design(spec: ModelSpec, data: pd.DataFrame) -> tuple[np.ndarray, tuple[str, ...]]:
    cols = []
    for term in spec.random_effects:
        if term == "intercept":
            cols.append(np.ones(len(data)))
        else:
            cols.append(_column(data, term))
    return np.column_stack(cols), tuple(spec.random_effects)


def _check_rank(x: np.ndarray, names: Sequence[str]) -> None:
    _, r, piv = scipy.linalg.qr(x, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    tol = diag.max() * max(x.shape) * np.finfo(float).eps if diag.size else 0.0
    rank = int((diag > tol).sum())
    if rank < x.shape[1]:
        collinear = sorted(names[i] for i in piv[rank:])
        raise CollinearityError(f"design matrix is rank deficient; collinear columns: {collinear}")


def _ridge_matrix(p: int, ridge: float) -> np.ndarray:
    lam = np.full(p, ridge)
    lam[0] = 0.0  # the intercept is never penalized
    return np.diag(lam)


def _gaussian_rowwise_loglik(y: np.ndarray, mu: np.ndarray, var: np.ndarray | float) -> np.ndarray:
    var = np.maximum(np.asarray(var, dtype=float), np.finfo(float).tiny)
    return -0.5 * (_LOG_2PI + np.log(var) + (y - mu) ** 2 / var)


def fit_linear(spec: ModelSpec, data: pd.DataFrame, ridge: float = 0.0) -> FitResult:
    """Ordinary least squares with the Gaussian log-likelihood at the MLE
    residual variance.  Rank-deficient designs are an error naming the
    collinear columns (unless a ridge makes the problem well posed)."""
    x, names = design_matrix(spec, data)
    y = np.asarray(data[spec.response], dtype=float)
    if ridge == 0.0:
        _check_rank(x, names)
        beta, *_ = np.linalg.lstsq(x, y, rcond=None)
    else:
        xtx = x.T @ x + _ridge_matrix(x.shape[1], ridge)
        beta = np.linalg.solve(xtx, x.T @ y)
    resid = y - x @ beta
    n = len(y)
    sigma2 = max(float(resid @ resid) / n, np.finfo(float).tiny)
    loglik = float(_gaussian_rowwise_loglik(y, x @ beta, sigma2).sum())
    return FitResult(
        spec=spec,
        coefficients=dict(zip(names, beta.tolist())),
        loglik=loglik,
        sigma2=sigma2,
        beta=beta,
        columns=names,
    )


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def fit_logistic(
    spec: ModelSpec,
    data: pd.DataFrame,
    ridge: float = 1e-6,
    max_iter: int = 100,
    tol: float = 1e-10,
) -> FitResult:
    """Logistic regression by iteratively reweighted least squares with a
    small L2 ridge on non-intercept terms (keeps separable data bounded).
    Step-halving keeps the penalized deviance non-increasing."""
    x, names = design_matrix(spec, data)
    y = np.asarray(data[spec.response], dtype=float)
    if not np.isin(y, (0.0, 1.0)).all():
        raise ValueError("logistic response must be binary 0/1")
    n, p = x.shape
    lam = _ridge_matrix(p, ridge)
    beta = np.zeros(p)

    def penalized_deviance(b: np.ndarray) -> float:
        prob = np.clip(_sigmoid(x @ b), 1e-12, 1.0 - 1e-12)
        ll = float(y @ np.log(prob) + (1.0 - y) @ np.log1p(-prob))
        return -2.0 * ll + float(b @ lam @ b)

    dev = penalized_deviance(beta)
    history = [dev]
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        prob = np.clip(_sigmoid(x @ beta), 1e-12, 1.0 - 1e-12)
        w = prob * (1.0 - prob)
        grad = x.T @ (y - prob) - lam @ beta
        hess = (x * w[:, None]).T @ x + lam
        try:
            step = np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(hess, grad, rcond=None)
        scale = 1.0
        new_dev = penalized_deviance(beta + step)
        while new_dev > dev and scale > 1e-10:
            scale *= 0.5
            new_dev = penalized_deviance(beta + scale * step)
        beta = beta + scale * step
        history.append(new_dev)
        if abs(dev - new_dev) < tol:
            dev = new_dev
            converged = True
            break
        dev = new_dev
    if not converged:
        raise ConvergenceError(
            f"IRLS did not converge after {max_iter} iterations (deviance {dev:.6g})"
        )
    prob = np.clip(_sigmoid(x @ beta), 1e-12, 1.0 - 1e-12)
    loglik = float(y @ np.log(prob) + (1.0 - y) @ np.log1p(-prob))
    return FitResult(
        spec=spec,
        coefficients=dict(zip(names, beta.tolist())),
        loglik=loglik,
        converged=True,
        n_iter=it,
        deviance_history=history,
        beta=beta,
        columns=names,
    )


class _SubjectBlocks:
    """Per-subject cross-product blocks; every profiled-deviance evaluation
    and all BLUPs are computed from these without touching row data again."""

    def __init__(self, x: np.ndarray, z: np.ndarray, y: np.ndarray, subjects: np.ndarray):
        self.n, self.p = x.shape
        self.q = z.shape[1]
        self.xtx = x.T @ x
        self.xty = x.T @ y
        self.yty = float(y @ y)
        self.subject_ids: list[str] = []
        self.ztz: list[np.ndarray] = []
        self.ztx: list[np.ndarray] = []
        self.zty: list[np.ndarray] = []
        order = pd.unique(subjects)
        for sid in order:
            mask = subjects == sid
            zj = z[mask]
            self.subject_ids.append(sid)
            self.ztz.append(zj.T @ zj)
            self.ztx.append(zj.T @ x[mask])
            self.zty.append(zj.T @ y[mask])

    def profile(self, theta: np.ndarray, ridge: float) -> dict:
        """GLS profile at relative variances theta: beta-hat, the residual
        quadratic form, and log det(V0)."""
        lam = np.sqrt(np.maximum(theta, 0.0))
        xtvx = self.xtx.copy()
        xtvy = self.xty.copy()
        ytvy = self.yty
        logdet = 0.0
        s_chols = []
        for ztz, ztx, zty in zip(self.ztz, self.ztx, self.zty):
            s = np.eye(self.q) + (lam[:, None] * ztz) * lam[None, :]
            chol = scipy.linalg.cho_factor(s, lower=True)
            s_chols.append(chol)
            logdet += 2.0 * float(np.log(np.diag(chol[0])).sum())
            a = lam[:, None] * ztx  # Lambda Z'X
            b = lam * zty  # Lambda Z'y
            sa = scipy.linalg.cho_solve(chol, a)
            sb = scipy.linalg.cho_solve(chol, b)
            xtvx -= a.T @ sa
            xtvy -= a.T @ sb
            ytvy -= float(b @ sb)
        lhs = xtvx + _ridge_matrix(self.p, ridge)
        beta = np.linalg.solve(lhs, xtvy)
        r2 = ytvy - 2.0 * float(beta @ xtvy) + float(beta @ xtvx @ beta)
        r2 = max(r2, np.finfo(float).tiny)
        return {"beta": beta, "r2": r2, "logdet": logdet, "lam": lam, "chols": s_chols}

    def deviance(self, theta: np.ndarray, ridge: float) -> float:
        prof = self.profile(theta, ridge)
        return self.n * math.log(2.0 * math.pi * prof["r2"] / self.n) + prof["logdet"] + self.n

    def blups(self, theta: np.ndarray, beta: np.ndarray) -> dict[str, np.ndarray]:
        lam = np.sqrt(np.maximum(theta, 0.0))
        out = {}
        for sid, ztz, ztx, zty in zip(self.subject_ids, self.ztz, self.ztx, self.zty):
            s = np.eye(self.q) + (lam[:, None] * ztz) * lam[None, :]
            resid = lam * (zty - ztx @ beta)
            out[sid] = lam * np.linalg.solve(s, resid)
        return out


def fit_lmm(
    spec: ModelSpec,
    data: pd.DataFrame,
    ridge: float = 0.0,
    max_iter: int = 500,
    tol: float = 1e-8,
) -> FitResult:
    """Gaussian mixed model with independent (diagonal) per-subject random
    terms, maximum likelihood via the profiled deviance over nonnegative
    relative variances.  Zero-variance boundary solutions are allowed and
    flagged, never an error."""
    if not spec.mixed:
        raise ValueError("fit_lmm needs at least one random-effect term")
    if "subject_id" not in data.columns:
        raise KeyError("mixed models need a subject_id column")
    x, names = design_matrix(spec, data)
    z, re_names = random_design(spec, data)
    y = np.asarray(data[spec.response], dtype=float)
    subjects = np.asarray(data["subject_id"])
    blocks = _SubjectBlocks(x, z, y, subjects)
    q = z.shape[1]

    result = scipy.optimize.minimize(
        lambda th: blocks.deviance(th, ridge),
        x0=np.ones(q),
        method="Nelder-Mead",
        bounds=[(0.0, None)] * q,
        options={"maxiter": max_iter, "maxfev": 50 * max_iter, "fatol": tol * 1e-1, "xatol": 1e-6},
    )
    n_iter = int(result.nit)
    if not result.success and n_iter >= max_iter:
        raise ConvergenceError(
            f"profiled-deviance optimization did not converge after {max_iter} iterations"
        )
    theta = np.maximum(result.x, 0.0)
    # the mixed model can never beat its fixed-effects-only reduction by
    # sitting above it: keep the boundary solution when it is better
    if blocks.deviance(np.zeros(q), ridge) < blocks.deviance(theta, ridge):
        theta = np.zeros(q)
    prof = blocks.profile(theta, ridge)
    sigma2 = prof["r2"] / blocks.n
    deviance = blocks.n * math.log(2.0 * math.pi * sigma2) + prof["logdet"] + blocks.n
    beta = prof["beta"]
    boundary = tuple(name for name, th in zip(re_names, theta) if th < 1e-8)
    return FitResult(
        spec=spec,
        coefficients=dict(zip(names, beta.tolist())),
        loglik=-0.5 * deviance,
        sigma2=float(sigma2),
        random_variances={name: float(sigma2 * th) for name, th in zip(re_names, theta)},
        converged=True,
        n_iter=n_iter,
        boundary=boundary,
        beta=beta,
        columns=names,
        theta=theta,
        blups=blocks.blups(theta, beta),
    )


def fit_model(spec: ModelSpec, data: pd.DataFrame, ridge: float = 0.0) -> FitResult:
    if spec.family == "bernoulli":
        return fit_logistic(spec, data, ridge=max(ridge, 1e-6))
    if spec.mixed:
        return fit_lmm(spec, data, ridge=ridge)
    return fit_linear(spec, data, ridge=ridge)


def heldout_loglik(fit: FitResult, data: pd.DataFrame) -> np.ndarray:
    """Per-row held-out log-likelihood under a trained fit.

    Mixed models condition on the training random-effect estimates for
    subjects seen in training; unseen subjects get b = 0 with the variance
    inflated by z' Psi z.
    """
    spec = fit.spec
    x, _ = design_matrix(spec, data)
    y = np.asarray(data[spec.response], dtype=float)
    if spec.family == "bernoulli":
        prob = np.clip(_sigmoid(x @ fit.beta), 1e-12, 1.0 - 1e-12)
        return y * np.log(prob) + (1.0 - y) * np.log1p(-prob)
    mu = x @ fit.beta
    if not spec.mixed:
        return _gaussian_rowwise_loglik(y, mu, fit.sigma2)
    z, _ = random_design(spec, data)
    subjects = np.asarray(data["subject_id"])
    var = np.full(len(y), float(fit.sigma2))
    for i, sid in enumerate(subjects):
        b = fit.blups.get(sid)
        if b is not None:
            mu[i] += float(z[i] @ b)
        else:
            var[i] += float(fit.sigma2) * float((fit.theta * z[i] ** 2).sum())
    return _gaussian_rowwise_loglik(y, mu, var)
