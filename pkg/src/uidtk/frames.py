"""Assembly of regression-ready tables from the corpus, the surprisal
profiles, and the psychometric records.

Three frames cover the three response types: sentence reading times
(one row per subject x sentence), word reading times (one row per
subject x fixated word, with spillover predictors from the previous word
in the document), and binary acceptability (one row per sentence).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import pandas as pd

from .corpus import AcceptabilityRecord, Corpus, ReadingRecord, build_sentence_rt_table
from .metrics import MetricConfig, evaluate_metric, word_variance_over_document
from .ngram import SurprisalTable, UnigramModel


def _sentence_controls(corpus: Corpus, unigram: UnigramModel) -> dict[tuple[str, int], dict]:
    """Extended-baseline controls per sentence: summed unigram
    log-probability, summed character length, and their interaction."""
    out = {}
    for sent in corpus.iter_sentences():
        lp = sum(unigram.logprob(t.surface) for t in sent.tokens)
        chars = float(sum(t.char_len for t in sent.tokens))
        out[sent.ref] = {
            "sum_unigram_lp": lp,
            "sum_char_len": chars,
            "sum_unigram_x_len": lp * chars,
        }
    return out


def sentence_rt_frame(
    corpus: Corpus,
    records: Sequence[ReadingRecord],
    unigram: UnigramModel | None = None,
) -> pd.DataFrame:
    """One row per (subject, sentence): summed reading time, token and
    fixated-word counts, and (when a unigram model is given) the extended
    baseline controls."""
    rows, _excluded = build_sentence_rt_table(corpus, records)
    frame = pd.DataFrame(rows).rename(columns={"rt_ms": "sentence_rt"})
    if unigram is not None and len(frame):
        controls = _sentence_controls(corpus, unigram)
        frame = frame.join(
            pd.DataFrame(
                [controls[(r.doc_id, r.sent_idx)] for r in frame.itertuples()],
                index=frame.index,
            )
        )
    return frame


def acceptability_frame(
    corpus: Corpus,
    records: Sequence[AcceptabilityRecord],
    unigram: UnigramModel | None = None,
) -> pd.DataFrame:
    """One row per binary-labelled sentence (graded records are for the
    correlation analysis only and are skipped here)."""
    rows = []
    for r in records:
        if r.scheme != "binary":
            continue
        rows.append(
            {
                "doc_id": r.doc_id,
                "sent_idx": r.sent_idx,
                "acceptability_binary": float(r.label),
            }
        )
    frame = pd.DataFrame(rows)
    if unigram is not None and len(frame):
        controls = _sentence_controls(corpus, unigram)
        frame = frame.join(
            pd.DataFrame(
                [controls[(r.doc_id, r.sent_idx)] for r in frame.itertuples()],
                index=frame.index,
            )
        )
    return frame


def word_rt_frame(
    corpus: Corpus,
    records: Sequence[ReadingRecord],
    profiles: SurprisalTable,
    unigram: UnigramModel,
) -> pd.DataFrame:
    """One row per (subject, fixated word) carrying the word-level baseline
    predictors: current and previous-word log-probability, unigram
    log-probability, character length, and the length-by-unigram
    interaction.  The previous word is the preceding token in the document
    (crossing sentence boundaries); document-initial tokens are dropped
    because their spillover predictors do not exist."""
    predictors: dict[tuple[str, int, int], dict] = {}
    for doc in corpus.documents:
        prev: dict | None = None
        for sent in doc.sentences:
            if sent.ref not in profiles:
                prev = None
                continue
            profile = profiles.get(*sent.ref)
            for tok, s in zip(sent.tokens, profile.s):
                unigram_lp = unigram.logprob(tok.surface)
                cur = {
                    "logp": -s,
                    "unigram_lp": unigram_lp,
                    "char_len": float(tok.char_len),
                    "unigram_x_len": unigram_lp * tok.char_len,
                }
                if prev is not None:
                    predictors[tok.ref] = dict(cur)
                    predictors[tok.ref].update(
                        {f"prev_{k}": v for k, v in prev.items()}
                    )
                prev = cur
    rows = []
    for r in records:
        if not r.fixated:
            continue
        key = (r.doc_id, r.sent_idx, r.tok_idx)
        if key not in predictors:
            continue
        row = {
            "subject_id": r.subject_id,
            "doc_id": r.doc_id,
            "sent_idx": r.sent_idx,
            "tok_idx": r.tok_idx,
            "word_rt": r.rt_ms,
        }
        row.update(predictors[key])
        rows.append(row)
    return pd.DataFrame(rows)


@dataclass(frozen=True)
class PredictorColumn:
    name: str
    n_excluded: int  # sentences (or tokens) the metric could not score


def attach_sentence_metric(
    frame: pd.DataFrame,
    profiles: SurprisalTable,
    config: MetricConfig,
    language_mean: float | None = None,
    name: str = "uid_pred",
    times_n: bool = False,
) -> tuple[pd.DataFrame, PredictorColumn]:
    """Add one sentence-level metric column to a frame keyed by
    (doc_id, sent_idx).  Sentences the metric cannot score (degenerate
    entropy on single-token sentences) are dropped, with the count
    reported.

    ``times_n`` multiplies the score by sentence length, turning it into
    the effort/acceptability predictor (for the mean-power metric this is
    exactly the power-sum of surprisals); the regressions of the protocol
    use that form.
    """
    values: dict[tuple[str, int], float] = {}
    failed: set[tuple[str, int]] = set()
    refs = {(d, int(s)) for d, s in zip(frame["doc_id"], frame["sent_idx"])}
    for ref in refs:
        profile = profiles.get(*ref)
        try:
            value = evaluate_metric(
                profile, config, table=profiles, language_mean=language_mean
            ).value
            values[ref] = value * profile.N if times_n else value
        except ValueError:
            failed.add(ref)
    keys = list(zip(frame["doc_id"], frame["sent_idx"]))
    keep = [k not in failed for k in keys]
    out = frame[keep].copy()
    out[name] = [values[k] for k, ok in zip(keys, keep) if ok]
    return out, PredictorColumn(name=name, n_excluded=len(failed))


def attach_word_metric(
    frame: pd.DataFrame,
    profiles: SurprisalTable,
    scope: str,
    window: int = 1,
    language_mean: float | None = None,
    name: str = "uid_pred",
) -> tuple[pd.DataFrame, PredictorColumn]:
    """Add the word-level variance column to a word frame keyed by
    (doc_id, sent_idx, tok_idx); tokens flagged excluded by the metric
    (empty preceding window) are dropped, with the count reported."""
    values: dict[tuple[str, int, int], float] = {}
    excluded: set[tuple[str, int, int]] = set()
    for doc_id in profiles.doc_ids():
        for wmv in word_variance_over_document(
            profiles, doc_id, scope=scope, window=window, language_mean=language_mean
        ):
            key = (wmv.doc_id, wmv.sent_idx, wmv.tok_idx)
            if wmv.excluded:
                excluded.add(key)
            else:
                values[key] = wmv.value
    keys = list(zip(frame["doc_id"], frame["sent_idx"], frame["tok_idx"]))
    keep = [k in values for k in keys]
    out = frame[keep].copy()
    out[name] = [values[k] for k, ok in zip(keys, keep) if ok]
    return out, PredictorColumn(name=name, n_excluded=len(excluded))


def sentence_power_sums(
    profiles: SurprisalTable, k: float, raw_probabilities: bool = False
) -> dict[tuple[str, int], float]:
    """Per-sentence negated total of surprisal (or raw probability) to the
    k-th power: the quantity correlated with acceptability."""
    out = {}
    for p in profiles.profiles():
        if raw_probabilities:
            total = sum(math.exp(-x) ** k for x in p.s)
        else:
            total = sum(x**k for x in p.s)
        out[p.ref] = -total
    return out
