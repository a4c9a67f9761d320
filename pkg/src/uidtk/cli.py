"""Command-line front end for the full analysis protocol.

Subcommands: ingest, train-lm, surprise, metrics, compare, sweep-k,
sweep-window, table, correlate, theory-check.  Every command reads an
optional JSON config (all values overridable by flags), writes TSV/JSON
artifacts plus figures under the output directory, and records them in
MANIFEST.json.
"""

from __future__ import annotations

import argparse
import sys

from . import plots
from .comparison import delta_loglik
from .config import ConfigError, ExperimentConfig
from .corpus import (
    Corpus,
    load_acceptability_tsv,
    load_readings_tsv,
    load_tokens_tsv,
    remove_outliers,
    build_sentence_rt_table,
    tokenize,
    write_acceptability_tsv,
    write_readings_tsv,
    write_tokens_tsv,
)
from .frames import (
    acceptability_frame,
    attach_sentence_metric,
    attach_word_metric,
    sentence_rt_frame,
    word_rt_frame,
)
from .metrics import MetricConfig, evaluate_metric, word_variance_over_document
from .ngram import (
    NGramModel,
    SurprisalTable,
    UnigramModel,
    compute_profiles,
    load_external_surprisals,
    write_surprisal_tsv,
)
from .report import (
    CORRELATION_COLUMNS,
    METRIC_COLUMNS,
    SWEEP_COLUMNS,
    Manifest,
    with_provenance,
    write_fold_assignments,
    write_json,
    write_tsv,
)
from .sweeps import (
    AnalysisInputs,
    run_correlation_curve,
    run_k_sweep,
    run_operationalization_table,
    run_window_sweep,
)
from .theory import theory_check_report


def _load_corpus(cfg: ExperimentConfig) -> Corpus:
    if cfg.corpus_tokens:
        return load_tokens_tsv(cfg.corpus_tokens)
    with open(cfg.corpus_raw, encoding="utf-8") as fh:
        return tokenize(fh.read())


def _load_inputs(cfg: ExperimentConfig) -> AnalysisInputs:
    corpus = _load_corpus(cfg)
    unigram = UnigramModel.train(corpus)
    language_mean = None
    if cfg.surprisal_mode == "external":
        profiles = load_external_surprisals(cfg.external_surprisals, corpus)
        source_tag = next(profiles.profiles()).model_tag if len(profiles) else "external"
    else:
        model = NGramModel.train(corpus, order=cfg.lm_order, unk_threshold=cfg.lm_unk_threshold)
        profiles = compute_profiles(model, corpus)
        source_tag = model.model_tag
        if cfg.reference_corpus:
            reference = load_tokens_tsv(cfg.reference_corpus)
            language_mean = compute_profiles(model, reference).language_mean()
    readings = None
    if cfg.readings:
        readings, _dropped = remove_outliers(load_readings_tsv(cfg.readings))
    acceptability = load_acceptability_tsv(cfg.acceptability) if cfg.acceptability else None
    return AnalysisInputs(
        corpus=corpus,
        profiles=profiles,
        unigram=unigram,
        readings=readings,
        acceptability=acceptability,
        language_mean=language_mean,
        source_tag=source_tag,
    )


def _config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    if getattr(args, "config", None):
        cfg = ExperimentConfig.from_json(args.config)
    else:
        cfg = ExperimentConfig()
    overrides = {}
    for key in (
        "seed",
        "corpus_tokens",
        "corpus_raw",
        "readings",
        "acceptability",
        "surprisal_mode",
        "lm_order",
        "lm_unk_threshold",
        "external_surprisals",
        "reference_corpus",
        "folds",
        "baseline_variant",
        "correlation_method",
        "workers",
        "output_dir",
    ):
        if hasattr(args, key):
            overrides[key] = getattr(args, key)
    if getattr(args, "k_grid", None):
        overrides["k_grid"] = [float(k) for k in args.k_grid.split(",")]
    if getattr(args, "windows", None):
        overrides["windows"] = [int(w) for w in args.windows.split(",")]
    if getattr(args, "raw_probabilities", False):
        overrides["raw_probabilities"] = True
    return cfg.override(**overrides)


def _add_common(parser: argparse.ArgumentParser, corpus: bool = True) -> None:
    parser.add_argument("--config", help="JSON experiment config; flags override it")
    parser.add_argument("--seed", type=int, help="fold/report seed (mandatory)")
    parser.add_argument("--output-dir", help="directory for artifacts and MANIFEST.json")
    parser.add_argument("--workers", type=int, help="concurrent sweep cells")
    if corpus:
        parser.add_argument("--corpus-tokens", help="pre-tokenized corpus TSV")
        parser.add_argument("--corpus-raw", help="raw UTF-8 text, blank-line document delimiter")
        parser.add_argument("--readings", help="reading-time TSV")
        parser.add_argument("--acceptability", help="acceptability TSV")
        parser.add_argument(
            "--surprisal-mode", choices=("ngram", "external"), dest="surprisal_mode"
        )
        parser.add_argument("--lm-order", type=int, dest="lm_order")
        parser.add_argument("--lm-unk-threshold", type=int, dest="lm_unk_threshold")
        parser.add_argument("--external-surprisals", dest="external_surprisals")
        parser.add_argument("--reference-corpus", dest="reference_corpus")
        parser.add_argument("--folds", type=int)
        parser.add_argument("--baseline-variant", choices=("main", "extended"))
        parser.add_argument("--k-grid", dest="k_grid", help="comma-separated exponents")
        parser.add_argument("--windows", help="comma-separated window widths")
        parser.add_argument(
            "--raw-probabilities",
            action="store_true",
            help="replace surprisals with raw probabilities in the power predictor",
        )
        parser.add_argument(
            "--correlation-method", choices=("pearson", "spearman"), dest="correlation_method"
        )


def cmd_ingest(args) -> int:
    cfg = _config_from_args(args).validate()
    manifest = Manifest(cfg.output_dir, cfg.config_hash())
    corpus = _load_corpus(cfg)
    write_tokens_tsv(corpus, manifest.path("corpus.tsv"))
    if cfg.readings:
        records = load_readings_tsv(cfg.readings)
        kept, dropped = remove_outliers(records)
        write_readings_tsv(kept, manifest.path("readings_clean.tsv"))
        write_tsv(
            manifest.path("dropped_pairs.tsv"),
            ["subject_id", "doc_id", "sent_idx"],
            (
                {"subject_id": s, "doc_id": d, "sent_idx": i}
                for s, d, i in sorted(dropped)
            ),
        )
        rows, excluded = build_sentence_rt_table(corpus, kept)
        write_tsv(
            manifest.path("sentence_rt.tsv"),
            ["subject_id", "doc_id", "sent_idx", "rt_ms", "n_fixated", "n_tokens"],
            rows,
        )
        print(
            f"ingest: {len(kept)} word records kept, {len(dropped)} (subject, sentence) "
            f"pairs dropped, {len(excluded)} pairs without fixations"
        )
    if cfg.acceptability:
        write_acceptability_tsv(
            load_acceptability_tsv(cfg.acceptability), manifest.path("acceptability.tsv")
        )
    print(f"ingest: corpus has {corpus.n_documents} documents, {corpus.n_sentences} sentences")
    manifest.write()
    return 0


def cmd_train_lm(args) -> int:
    cfg = _config_from_args(args).validate()
    manifest = Manifest(cfg.output_dir, cfg.config_hash())
    corpus = _load_corpus(cfg)
    model = NGramModel.train(corpus, order=cfg.lm_order, unk_threshold=cfg.lm_unk_threshold)
    path = manifest.path(args.model_out)
    model.save(path)
    print(
        f"train-lm: order={model.order} vocab={len(model.vocab)} "
        f"fallback_orders={list(model.fallback_orders)} -> {path}"
    )
    manifest.write()
    return 0


def cmd_surprise(args) -> int:
    cfg = _config_from_args(args).validate()
    manifest = Manifest(cfg.output_dir, cfg.config_hash())
    corpus = _load_corpus(cfg)
    model = NGramModel.load(args.model_in)
    table = compute_profiles(model, corpus)
    path = manifest.path(args.surprisal_out)
    write_surprisal_tsv(table, corpus, path, model_tag=model.model_tag)
    print(f"surprise: {len(table)} sentence profiles -> {path}")
    manifest.write()
    return 0


def _metric_configs(cfg: ExperimentConfig, kinds: list[str]) -> list[MetricConfig]:
    scopes = ("sentence", "document", "language")
    out = []
    for kind in kinds:
        if kind in ("super_linear", "entropy"):
            out.extend(MetricConfig(kind=kind, k=k) for k in cfg.k_grid)
        elif kind in ("variance", "global_delta"):
            out.extend(MetricConfig(kind=kind, mu_scope=s) for s in scopes)
        elif kind in ("local_variance", "local_delta", "max"):
            out.append(MetricConfig(kind=kind))
        else:
            raise ConfigError(f"unknown metric kind {kind!r}")
    return out


def cmd_metrics(args) -> int:
    cfg = _config_from_args(args).validate()
    manifest = Manifest(cfg.output_dir, cfg.config_hash())
    inputs = _load_inputs(cfg)
    kinds = args.kinds.split(",") if args.kinds else ["super_linear", "variance", "local_variance", "max", "entropy"]
    word_scopes = []
    if "word_variance" in kinds:
        kinds = [k for k in kinds if k != "word_variance"]
        word_scopes = [("window", w) for w in cfg.windows]
        word_scopes += [("all_previous", None), ("sentence", None), ("document", None), ("language", None)]
    language_mean = inputs.resolved_language_mean()
    rows = []
    for config in _metric_configs(cfg, kinds):
        for profile in inputs.profiles.profiles():
            row = {
                "doc_id": profile.doc_id,
                "sent_idx": profile.sent_idx,
                "tok_idx": None,
                "metric_kind": config.kind,
                "k": config.k if config.kind in ("super_linear", "entropy") else None,
                "mu_scope": config.mu_scope if config.kind in ("variance", "global_delta") else None,
                "delta": config.delta if config.kind in ("global_delta", "local_delta") else None,
            }
            try:
                row["value"] = evaluate_metric(
                    profile, config, table=inputs.profiles, language_mean=language_mean
                ).value
                row["excluded"] = 0
            except ValueError:
                row["value"] = None
                row["excluded"] = 1
            rows.append(row)
    for scope, window in word_scopes:
        for doc_id in inputs.profiles.doc_ids():
            for wmv in word_variance_over_document(
                inputs.profiles, doc_id, scope=scope, window=window or 1, language_mean=language_mean
            ):
                rows.append(
                    {
                        "doc_id": wmv.doc_id,
                        "sent_idx": wmv.sent_idx,
                        "tok_idx": wmv.tok_idx,
                        "metric_kind": "word_variance",
                        "k": None,
                        "mu_scope": f"{scope}{window or ''}",
                        "delta": None,
                        "value": None if wmv.excluded else wmv.value,
                        "excluded": int(wmv.excluded),
                    }
                )
    path = manifest.path("metrics.tsv")
    write_tsv(path, METRIC_COLUMNS, rows)
    print(f"metrics: {len(rows)} rows -> {path}")
    manifest.write()
    return 0


def cmd_compare(args) -> int:
    cfg = _config_from_args(args).validate()
    manifest = Manifest(cfg.output_dir, cfg.config_hash())
    inputs = _load_inputs(cfg)
    dataset = args.dataset
    extended = cfg.baseline_variant == "extended"
    if args.kind == "word_variance":
        if dataset != "reading_time":
            raise ConfigError("word_variance comparisons need reading-time data")
        from .comparison import word_rt_baseline

        frame = word_rt_frame(inputs.corpus, inputs.readings, inputs.profiles, inputs.unigram)
        with_col, col = attach_word_metric(
            frame,
            inputs.profiles,
            scope=args.scope or "language",
            window=args.window,
            language_mean=inputs.resolved_language_mean(),
        )
        baseline = word_rt_baseline()
    else:
        from .comparison import acceptability_baseline, sentence_rt_baseline

        config = MetricConfig(
            kind=args.kind,
            k=args.k,
            mu_scope=args.scope or "sentence",
            delta=args.delta,
        )
        if dataset == "reading_time":
            if inputs.readings is None:
                raise ConfigError("reading-time comparison needs --readings")
            frame = sentence_rt_frame(inputs.corpus, inputs.readings, inputs.unigram)
            baseline = sentence_rt_baseline(extended=extended)
        else:
            if inputs.acceptability is None:
                raise ConfigError("acceptability comparison needs --acceptability")
            frame = acceptability_frame(inputs.corpus, inputs.acceptability, inputs.unigram)
            baseline = acceptability_baseline(extended=extended)
        with_col, col = attach_sentence_metric(
            frame,
            inputs.profiles,
            config,
            language_mean=inputs.resolved_language_mean(),
            times_n=True,
        )
    comparison = delta_loglik(baseline, "uid_pred", with_col, folds=cfg.folds, seed=cfg.seed)
    payload = comparison.to_report()
    payload["dataset"] = dataset
    payload["n_excluded"] = col.n_excluded
    payload["config_hash"] = cfg.config_hash()
    payload["source_tag"] = inputs.source_tag
    write_json(manifest.path("compare.json"), payload)
    write_fold_assignments(manifest.path("compare_folds.tsv"), comparison.fold_ids)
    print(
        f"compare[{dataset}]: delta_loglik = {comparison.mean:.6f} nats "
        f"({comparison.mean * 100:.4f} x 1e-2 nats, se {comparison.se * 100:.4f}) n={comparison.n}"
    )
    manifest.write()
    return 0


def _emit_sweep(name, cfg, inputs, result, manifest, figure_fn):
    rows = with_provenance(result.rows(), cfg.config_hash(), inputs.source_tag, cfg.seed)
    tsv_path = manifest.path(f"{name}.tsv")
    write_tsv(tsv_path, SWEEP_COLUMNS, rows)
    payload = {
        "config": cfg.to_dict(),
        "config_hash": cfg.config_hash(),
        "source_tag": inputs.source_tag,
        "rows": rows,
        "ttests": result.ttests,
    }
    write_json(manifest.path(f"{name}.json"), payload)
    if figure_fn is not None:
        figure_fn(rows, manifest.path(f"{name}.png"))
    n_failed = sum(1 for r in rows if r["status"] == "failed")
    print(f"{name}: {len(rows)} cells ({n_failed} failed) -> {tsv_path}")


def cmd_sweep_k(args) -> int:
    cfg = _config_from_args(args).validate()
    manifest = Manifest(cfg.output_dir, cfg.config_hash())
    inputs = _load_inputs(cfg)
    result = run_k_sweep(
        inputs,
        k_grid=cfg.k_grid,
        folds=cfg.folds,
        seed=cfg.seed,
        baseline_variant=cfg.baseline_variant,
        raw_probabilities=cfg.raw_probabilities,
        workers=cfg.workers,
    )
    _emit_sweep("k_sweep", cfg, inputs, result, manifest, plots.k_sweep_figure)
    manifest.write()
    return 0


def cmd_sweep_window(args) -> int:
    cfg = _config_from_args(args).validate()
    manifest = Manifest(cfg.output_dir, cfg.config_hash())
    inputs = _load_inputs(cfg)
    scopes = [("window", w) for w in cfg.windows]
    scopes += [("all_previous", None), ("sentence", None), ("document", None), ("language", None)]
    result = run_window_sweep(
        inputs, scopes=scopes, folds=cfg.folds, seed=cfg.seed, workers=cfg.workers
    )
    _emit_sweep("window_sweep", cfg, inputs, result, manifest, plots.window_sweep_figure)
    manifest.write()
    return 0


def cmd_table(args) -> int:
    cfg = _config_from_args(args).validate()
    manifest = Manifest(cfg.output_dir, cfg.config_hash())
    inputs = _load_inputs(cfg)
    result = run_operationalization_table(
        inputs,
        folds=cfg.folds,
        seed=cfg.seed,
        baseline_variant=cfg.baseline_variant,
        workers=cfg.workers,
    )
    _emit_sweep("operationalization_table", cfg, inputs, result, manifest, None)
    manifest.write()
    return 0


def cmd_correlate(args) -> int:
    cfg = _config_from_args(args).validate()
    manifest = Manifest(cfg.output_dir, cfg.config_hash())
    inputs = _load_inputs(cfg)
    rows = run_correlation_curve(
        inputs,
        k_grid=cfg.k_grid,
        method=cfg.correlation_method,
        raw_probabilities=cfg.raw_probabilities,
    )
    rows = with_provenance(rows, cfg.config_hash(), inputs.source_tag, cfg.seed)
    write_tsv(manifest.path("correlation.tsv"), CORRELATION_COLUMNS, rows)
    write_json(
        manifest.path("correlation.json"),
        {"config_hash": cfg.config_hash(), "source_tag": inputs.source_tag, "rows": rows},
    )
    plots.correlation_figure(rows, manifest.path("correlation.png"))
    print(f"correlate: {len(rows)} k values -> {cfg.output_dir}/correlation.tsv")
    manifest.write()
    return 0


def cmd_theory_check(args) -> int:
    cfg = _config_from_args(args)
    if cfg.seed is None:
        raise ConfigError("a seed is mandatory")
    manifest = Manifest(cfg.output_dir, "")
    report = theory_check_report(
        seed=cfg.seed,
        n_draws=args.draws,
        trials=args.trials,
        scan_limit=args.scan_limit,
    )
    path = manifest.path("theory_check.json")
    write_json(path, report)
    print(f"theory-check: passed={report['passed']} -> {path}")
    manifest.write()
    return 0 if report["passed"] else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uidtk",
        description="Information-density uniformity analysis over text and psychometric data",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="normalize corpus and psychometric inputs")
    _add_common(p)
    p.set_defaults(fn=cmd_ingest)

    p = sub.add_parser("train-lm", help="train the smoothed n-gram model")
    _add_common(p)
    p.add_argument("--model-out", default="model.json")
    p.set_defaults(fn=cmd_train_lm)

    p = sub.add_parser("surprise", help="score the corpus with a trained model")
    _add_common(p)
    p.add_argument("--model-in", required=True)
    p.add_argument("--surprisal-out", default="surprisal.tsv")
    p.set_defaults(fn=cmd_surprise)

    p = sub.add_parser("metrics", help="emit per-sentence (and word) metric values")
    _add_common(p)
    p.add_argument("--kinds", help="comma list; default: all sentence-level kinds")
    p.set_defaults(fn=cmd_metrics)

    p = sub.add_parser("compare", help="one predictor vs. its baseline")
    _add_common(p)
    p.add_argument("--dataset", choices=("reading_time", "acceptability"), required=True)
    p.add_argument("--kind", required=True)
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--scope")
    p.add_argument("--delta", default="squared", choices=("squared", "absolute"))
    p.add_argument("--window", type=int, default=1)
    p.set_defaults(fn=cmd_compare)

    p = sub.add_parser("sweep-k", help="power-exponent sweep with t tests against k=1")
    _add_common(p)
    p.set_defaults(fn=cmd_sweep_k)

    p = sub.add_parser("sweep-window", help="word-level scope sweep")
    _add_common(p)
    p.set_defaults(fn=cmd_sweep_window)

    p = sub.add_parser("table", help="the operationalization table")
    _add_common(p)
    p.set_defaults(fn=cmd_table)

    p = sub.add_parser("correlate", help="power-sum vs. acceptability correlation curve")
    _add_common(p)
    p.set_defaults(fn=cmd_correlate)

    p = sub.add_parser("theory-check", help="randomized verification of the effort theory")
    p.add_argument("--config", help="JSON experiment config; flags override it")
    p.add_argument("--seed", type=int)
    p.add_argument("--output-dir", dest="output_dir")
    p.add_argument("--draws", type=int, default=100)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--scan-limit", type=int, default=10_000)
    p.set_defaults(fn=cmd_theory_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, FileNotFoundError, KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
