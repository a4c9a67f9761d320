"""Figure rendering for the report path: every sweep that emits a
delimited table also renders a matplotlib figure next to it."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_DATASET_COLORS = {"reading_time": "tab:blue", "acceptability": "tab:orange"}


def _ok(rows):
    return [r for r in rows if r.get("status") == "ok"]


def k_sweep_figure(rows: list[dict], path: str) -> None:
    """Held-out gain against the exponent, one line per response family,
    shaded band connecting the standard errors."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for dataset in sorted({r["dataset"] for r in rows}):
        sub = sorted((r for r in _ok(rows) if r["dataset"] == dataset), key=lambda r: r["k"])
        if not sub:
            continue
        k = [r["k"] for r in sub]
        mean = [r["delta_loglik_1e2_nats"] for r in sub]
        se = [r["delta_loglik_se_1e2_nats"] for r in sub]
        color = _DATASET_COLORS.get(dataset)
        ax.plot(k, mean, marker="o", label=dataset, color=color)
        ax.fill_between(
            k,
            [m - s for m, s in zip(mean, se)],
            [m + s for m, s in zip(mean, se)],
            alpha=0.25,
            color=color,
        )
    ax.axvline(1.0, color="gray", lw=0.8, ls="--")
    ax.set_xlabel("exponent k")
    ax.set_ylabel(r"$\Delta$LogLik ($10^{-2}$ nats)")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def window_sweep_figure(rows: list[dict], path: str) -> None:
    """Held-out gain per scope of the word-level deviation predictor."""
    sub = _ok(rows)
    labels = [r["predictor"].replace("word_variance(", "").rstrip(")") for r in sub]
    mean = [r["delta_loglik_1e2_nats"] for r in sub]
    se = [r["delta_loglik_se_1e2_nats"] for r in sub]
    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    xs = range(len(sub))
    ax.errorbar(xs, mean, yerr=se, fmt="o", capsize=3, color="tab:blue")
    ax.set_xticks(list(xs))
    ax.set_xticklabels(labels, rotation=30, ha="right")
    ax.set_xlabel("scope of the mean")
    ax.set_ylabel(r"$\Delta$LogLik ($10^{-2}$ nats)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def correlation_figure(rows: list[dict], path: str) -> None:
    """Correlation of the negated power-sum with acceptability, per k."""
    sub = sorted(_ok(rows), key=lambda r: r["k"])
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot([r["k"] for r in sub], [r["r"] for r in sub], marker="o", color="tab:green")
    ax.axvline(1.0, color="gray", lw=0.8, ls="--")
    ax.set_xlabel("exponent k")
    ax.set_ylabel("correlation r")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
