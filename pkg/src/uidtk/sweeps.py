"""The experimental protocol sweeps: power-exponent curves, the
operationalization table, the word-level scope sweep, and the
power-vs-acceptability correlation curve.

Every sweep cell is failure-isolated (a failed cell becomes a marked row,
never an abort) and cells may run concurrently; assembly is deterministic.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
import pandas as pd

from .comparison import (
    ModelComparison,
    acceptability_baseline,
    aggregate_per_sentence,
    delta_loglik,
    paired_ttest,
    sentence_rt_baseline,
    word_rt_baseline,
)
from .corpus import AcceptabilityRecord, Corpus, ReadingRecord, rescale_graded
from .frames import (
    acceptability_frame,
    attach_sentence_metric,
    attach_word_metric,
    sentence_power_sums,
    sentence_rt_frame,
    word_rt_frame,
)
from .comparison import correlate
from .metrics import MetricConfig, raw_probability_profile
from .ngram import SurprisalTable, UnigramModel

DEFAULT_K_GRID = (0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.5, 3.0)
TABLE_SUPER_LINEAR_K = (0.25, 1.0, 1.25, 1.5, 2.0)
TABLE_ENTROPY_K = (0.25, 1.0, 2.0)

PREDICTOR = "uid_pred"


@dataclass
class AnalysisInputs:
    corpus: Corpus
    profiles: SurprisalTable
    unigram: UnigramModel
    readings: Sequence[ReadingRecord] | None = None
    acceptability: Sequence[AcceptabilityRecord] | None = None
    language_mean: float | None = None  # reference-corpus mean; None = own corpus
    source_tag: str = "ngram"

    def resolved_language_mean(self) -> float:
        if self.language_mean is not None:
            return self.language_mean
        return self.profiles.language_mean()

    def families(self) -> list[str]:
        out = []
        if self.readings is not None:
            out.append("reading_time")
        if self.acceptability is not None:
            out.append("acceptability")
        return out


@dataclass
class SweepCell:
    key: tuple
    dataset: str
    predictor: str
    kind: str
    k: float | None = None
    scope: str | None = None
    window: int | None = None
    comparison: ModelComparison | None = None
    sentence_keys: list[tuple[str, int]] | None = None
    n_excluded: int = 0
    error: str | None = None

    def row(self) -> dict:
        ok = self.error is None
        return {
            "dataset": self.dataset,
            "predictor": self.predictor,
            "kind": self.kind,
            "k": self.k,
            "scope": self.scope,
            "window": self.window,
            "delta_loglik_nats": self.comparison.mean if ok else None,
            "delta_loglik_se_nats": self.comparison.se if ok else None,
            "delta_loglik_1e2_nats": self.comparison.mean * 100.0 if ok else None,
            "delta_loglik_se_1e2_nats": self.comparison.se * 100.0 if ok else None,
            "n": self.comparison.n if ok else None,
            "n_excluded": self.n_excluded,
            "status": "ok" if ok else "failed",
            "error": self.error,
        }


@dataclass
class SweepResult:
    cells: list[SweepCell]
    ttests: list[dict] = field(default_factory=list)

    def rows(self) -> list[dict]:
        return [c.row() for c in sorted(self.cells, key=lambda c: c.key)]

    def cell(self, **match) -> SweepCell:
        for c in self.cells:
            if all(getattr(c, k) == v for k, v in match.items()):
                return c
        raise KeyError(f"no cell matching {match}")

    def to_json(self) -> dict:
        return {"rows": self.rows(), "ttests": self.ttests}


def _run_isolated(cells_and_jobs: list[tuple[SweepCell, Callable[[], None]]], workers: int) -> None:
    """Run each job, capturing failures on its cell.  Order of execution is
    irrelevant: results land on the cells, and assembly sorts."""

    def run(pair):
        cell, job = pair
        try:
            job()
        except Exception as exc:  # failure isolation: a cell never aborts a sweep
            cell.error = f"{type(exc).__name__}: {exc}"

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, cells_and_jobs))
    else:
        for pair in cells_and_jobs:
            run(pair)


def _base_frames(inputs: AnalysisInputs) -> dict[str, pd.DataFrame]:
    frames = {}
    if inputs.readings is not None:
        frames["reading_time"] = sentence_rt_frame(inputs.corpus, inputs.readings, inputs.unigram)
    if inputs.acceptability is not None:
        frames["acceptability"] = acceptability_frame(
            inputs.corpus, inputs.acceptability, inputs.unigram
        )
    return frames


def _baseline_for(dataset: str, variant: str):
    extended = variant == "extended"
    if dataset == "reading_time":
        return sentence_rt_baseline(extended=extended)
    return acceptability_baseline(extended=extended)


def _response_for(dataset: str) -> str:
    return "sentence_rt" if dataset == "reading_time" else "acceptability_binary"


def run_k_sweep(
    inputs: AnalysisInputs,
    k_grid: Sequence[float] = DEFAULT_K_GRID,
    folds: int = 10,
    seed: int = 0,
    baseline_variant: str = "main",
    raw_probabilities: bool = False,
    workers: int = 1,
) -> SweepResult:
    """Held-out gain of the mean-power predictor as a function of its
    exponent, for every response family present, with paired t tests of
    each k > 1 against k = 1 (Bonferroni over the k > 1 grid)."""
    if not k_grid:
        raise ValueError("k grid must be nonempty")
    profiles = inputs.profiles
    if raw_probabilities:
        profiles = SurprisalTable(raw_probability_profile(p) for p in inputs.profiles.profiles())
    frames = _base_frames(inputs)
    cells = []
    jobs = []
    for dataset, frame in frames.items():
        baseline = _baseline_for(dataset, baseline_variant)
        for k in k_grid:
            cell = SweepCell(
                key=(dataset, float(k)),
                dataset=dataset,
                predictor=f"super_linear(k={k:g})" + (":rawprob" if raw_probabilities else ""),
                kind="super_linear",
                k=float(k),
                scope=None,
            )

            def job(cell=cell, frame=frame, baseline=baseline, k=k):
                config = MetricConfig(kind="super_linear", k=float(k))
                with_col, col = attach_sentence_metric(
                    frame, profiles, config, name=PREDICTOR, times_n=True
                )
                cell.n_excluded = col.n_excluded
                cell.comparison = delta_loglik(
                    baseline, PREDICTOR, with_col, folds=folds, seed=seed
                )
                cell.sentence_keys = list(
                    zip(with_col["doc_id"], (int(s) for s in with_col["sent_idx"]))
                )

            cells.append(cell)
            jobs.append((cell, job))
    _run_isolated(jobs, workers)
    ttests = _k1_ttests(cells, k_grid)
    return SweepResult(cells=cells, ttests=ttests)


def _deltas_for_ttest(cell: SweepCell) -> np.ndarray:
    """Per-sentence deltas: reading-time rows are averaged across subjects
    per sentence before testing; acceptability rows already are sentences."""
    deltas = cell.comparison.deltas
    if cell.dataset == "reading_time":
        _, means = aggregate_per_sentence(deltas, cell.sentence_keys)
        return means
    return deltas


def _k1_ttests(cells: list[SweepCell], k_grid: Sequence[float], alpha: float = 0.001) -> list[dict]:
    out = []
    k_above = [k for k in k_grid if k > 1.0]
    if 1.0 not in [float(k) for k in k_grid] or not k_above:
        return out
    m = len(k_above)
    datasets = sorted({c.dataset for c in cells})
    for dataset in datasets:
        try:
            ref = next(c for c in cells if c.dataset == dataset and c.k == 1.0 and not c.error)
        except StopIteration:
            continue
        ref_deltas = _deltas_for_ttest(ref)
        for k in k_above:
            cell = next(
                (c for c in cells if c.dataset == dataset and c.k == float(k)), None
            )
            if cell is None or cell.error:
                continue
            entry = {"dataset": dataset, "k": float(k), "against": 1.0, "m_comparisons": m}
            try:
                res = paired_ttest(
                    _deltas_for_ttest(cell), ref_deltas, m_comparisons=m, alpha=alpha
                )
                entry.update(
                    {
                        "t": res.t,
                        "dof": res.dof,
                        "p": res.p,
                        "significant": res.significant,
                        "threshold": res.threshold,
                    }
                )
            except ValueError as exc:
                entry["error"] = str(exc)
            out.append(entry)
    return out


def table_metric_grid(
    super_linear_k: Sequence[float] = TABLE_SUPER_LINEAR_K,
    entropy_k: Sequence[float] = TABLE_ENTROPY_K,
) -> list[MetricConfig]:
    """The operationalization-table predictor list, in its reporting order:
    mean-power across the k grid, variance at language and sentence scope,
    local variance, max, and normalized entropy across its k grid."""
    configs = [MetricConfig(kind="super_linear", k=float(k)) for k in super_linear_k]
    configs.append(MetricConfig(kind="variance", mu_scope="language"))
    configs.append(MetricConfig(kind="variance", mu_scope="sentence"))
    configs.append(MetricConfig(kind="local_variance"))
    configs.append(MetricConfig(kind="max"))
    configs.extend(MetricConfig(kind="entropy", k=float(k)) for k in entropy_k)
    return configs


def run_operationalization_table(
    inputs: AnalysisInputs,
    configs: Sequence[MetricConfig] | None = None,
    folds: int = 10,
    seed: int = 0,
    baseline_variant: str = "main",
    workers: int = 1,
) -> SweepResult:
    """One held-out comparison per operationalization per response family
    (the sentence-level predictor table)."""
    configs = list(configs) if configs is not None else table_metric_grid()
    frames = _base_frames(inputs)
    language_mean = inputs.resolved_language_mean()
    cells = []
    jobs = []
    for dataset, frame in frames.items():
        baseline = _baseline_for(dataset, baseline_variant)
        for i, config in enumerate(configs):
            cell = SweepCell(
                key=(dataset, i),
                dataset=dataset,
                predictor=config.label(),
                kind=config.kind,
                k=config.k if config.kind in ("super_linear", "entropy") else None,
                scope=config.mu_scope if config.kind in ("variance", "global_delta") else None,
            )

            def job(cell=cell, frame=frame, baseline=baseline, config=config):
                with_col, col = attach_sentence_metric(
                    frame,
                    inputs.profiles,
                    config,
                    language_mean=language_mean,
                    name=PREDICTOR,
                    times_n=True,
                )
                cell.n_excluded = col.n_excluded
                cell.comparison = delta_loglik(
                    baseline, PREDICTOR, with_col, folds=folds, seed=seed
                )

            cells.append(cell)
            jobs.append((cell, job))
    _run_isolated(jobs, workers)
    return SweepResult(cells=cells)


WINDOW_SWEEP_SCOPES: tuple[tuple[str, int | None], ...] = (
    ("window", 1),
    ("window", 2),
    ("window", 3),
    ("window", 4),
    ("all_previous", None),
    ("sentence", None),
    ("document", None),
    ("language", None),
)


def run_window_sweep(
    inputs: AnalysisInputs,
    scopes: Sequence[tuple[str, int | None]] = WINDOW_SWEEP_SCOPES,
    folds: int = 10,
    seed: int = 0,
    workers: int = 1,
) -> SweepResult:
    """Word-level held-out gain of the squared-deviation predictor as the
    scope of its mean widens from the preceding few words to the language."""
    if inputs.readings is None:
        raise ValueError("the scope sweep needs reading-time records")
    frame = word_rt_frame(inputs.corpus, inputs.readings, inputs.profiles, inputs.unigram)
    baseline = word_rt_baseline()
    language_mean = inputs.resolved_language_mean()
    cells = []
    jobs = []
    for i, (scope, window) in enumerate(scopes):
        label = f"word_variance({scope}{window if window else ''})"
        cell = SweepCell(
            key=("reading_time", i),
            dataset="reading_time",
            predictor=label,
            kind="word_variance",
            scope=scope,
            window=window,
        )

        def job(cell=cell, scope=scope, window=window):
            with_col, col = attach_word_metric(
                frame,
                inputs.profiles,
                scope=scope,
                window=window or 1,
                language_mean=language_mean,
                name=PREDICTOR,
            )
            cell.n_excluded = col.n_excluded
            cell.comparison = delta_loglik(baseline, PREDICTOR, with_col, folds=folds, seed=seed)

        cells.append(cell)
        jobs.append((cell, job))
    _run_isolated(jobs, workers)
    return SweepResult(cells=cells)


def run_correlation_curve(
    inputs: AnalysisInputs,
    k_grid: Sequence[float] = DEFAULT_K_GRID,
    method: str = "pearson",
    raw_probabilities: bool = False,
) -> list[dict]:
    """Correlation between the negated power-sum of a sentence's surprisals
    and its acceptability score, per exponent.  Graded scores are min-max
    rescaled to [0, 1]; binary labels are used as is."""
    if inputs.acceptability is None:
        raise ValueError("the correlation curve needs acceptability records")
    records = list(inputs.acceptability)
    graded = [r for r in records if r.scheme == "graded"]
    if graded:
        scores = dict(zip(((r.doc_id, r.sent_idx) for r in graded), rescale_graded(graded)))
    else:
        scores = {(r.doc_id, r.sent_idx): float(r.label) for r in records}
    rows = []
    for k in k_grid:
        sums = sentence_power_sums(inputs.profiles, float(k), raw_probabilities)
        refs = sorted(ref for ref in scores if ref in sums)
        x = [sums[ref] for ref in refs]
        y = [scores[ref] for ref in refs]
        entry = {"k": float(k), "method": method, "n": len(refs)}
        try:
            entry["r"] = correlate(x, y, method=method)
            entry["status"] = "ok"
        except ValueError as exc:
            entry["r"] = None
            entry["status"] = "failed"
            entry["error"] = str(exc)
        rows.append(entry)
    return rows
