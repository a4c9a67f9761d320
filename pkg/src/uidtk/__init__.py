"""uidtk: quantify how uniformly information is spread through text, and
test what that uniformity predicts about reading times and acceptability.

The pipeline: ingest a corpus and per-word psychometrics, estimate
per-token surprisal (smoothed n-gram model or an external exchange file),
score sentences with a family of non-uniformity metrics, and compare
regressions with and without each metric by cross-validated held-out
log-likelihood.
"""

from .comparison import (
    ModelComparison,
    TTestResult,
    acceptability_baseline,
    compare_specs,
    correlate,
    delta_loglik,
    make_folds,
    paired_ttest,
    sentence_rt_baseline,
    word_rt_baseline,
)
from .corpus import (
    AcceptabilityRecord,
    Corpus,
    Document,
    ReadingRecord,
    Sentence,
    Token,
    build_corpus,
    remove_outliers,
    sentence_rt,
    tokenize,
)
from .metrics import (
    MetricConfig,
    MetricValue,
    entropy_uid,
    evaluate_metric,
    global_delta,
    local_delta,
    local_variance,
    max_surprisal,
    super_linear,
    variance,
    word_variance,
)
from .ngram import (
    NGramModel,
    SurprisalProfile,
    SurprisalTable,
    UnigramModel,
    compute_profiles,
    load_external_surprisals,
    write_surprisal_tsv,
)
from .regression import (
    FitResult,
    ModelSpec,
    fit_linear,
    fit_lmm,
    fit_logistic,
    heldout_loglik,
)
from .sweeps import (
    AnalysisInputs,
    run_correlation_curve,
    run_k_sweep,
    run_operationalization_table,
    run_window_sweep,
)
from .theory import (
    EffortParams,
    effort,
    effort_from_metric,
    effort_sum,
    inverse_acceptability,
    optimal_length,
    verify_uniform_minimizer,
)

__version__ = "0.1.0"
