"""Synthetic psychometric data generated from the effort/acceptability
models over real n-gram surprisal profiles, used to check that the
protocol recovers planted parameters."""

import numpy as np

from uidtk.corpus import AcceptabilityRecord, Corpus, ReadingRecord, build_corpus
from uidtk.ngram import SurprisalTable


def synth_acceptability(
    profiles: SurprisalTable,
    k_true: float,
    seed: int,
    slope: float = 2.0,
    intercept: float = 0.3,
) -> list[AcceptabilityRecord]:
    """Binary labels whose log-odds fall with the power-sum of surprisal
    (the inverse-acceptability model): logit = a - b * z(sum s^k)."""
    rng = np.random.default_rng(seed)
    refs = sorted(p.ref for p in profiles.profiles())
    sums = np.array([sum(x**k_true for x in profiles.get(*ref).s) for ref in refs])
    z = (sums - sums.mean()) / sums.std()
    p = 1.0 / (1.0 + np.exp(-(intercept - slope * z)))
    labels = (rng.uniform(size=len(refs)) < p).astype(float)
    return [
        AcceptabilityRecord(doc_id=ref[0], sent_idx=ref[1], label=float(y), scheme="binary")
        for ref, y in zip(refs, labels)
    ]


def synth_sentence_readings(
    corpus: Corpus,
    profiles: SurprisalTable,
    k_true: float,
    seed: int,
    n_subjects: int = 15,
    effort_coef: float = 30.0,
    word_cost: float = 1.0,
    subject_slope_sd: float = 5.0,
    noise_sd: float = 40.0,
    base_rt: float = 300.0,
) -> list[ReadingRecord]:
    """Word reading records whose sentence sums follow the effort model:
    RT = base + coef * z(sum s^k + c*N) + b_j * N + noise, spread evenly
    over the words so the ingestion path (summing fixated words) applies."""
    rng = np.random.default_rng(seed)
    refs = sorted(p.ref for p in profiles.profiles())
    effort = np.array(
        [
            sum(x**k_true for x in profiles.get(*ref).s) + word_cost * len(profiles.get(*ref).s)
            for ref in refs
        ]
    )
    z = (effort - effort.mean()) / effort.std()
    records = []
    for j in range(n_subjects):
        b_j = rng.normal(0.0, subject_slope_sd)
        for ref, zval in zip(refs, z):
            sent = corpus.sentence(*ref)
            total = (
                base_rt
                + effort_coef * zval
                + b_j * sent.N
                + rng.normal(0.0, noise_sd)
            )
            total = max(total, 20.0 * sent.N)
            per_word = total / sent.N
            for tok in sent.tokens:
                records.append(
                    ReadingRecord(
                        subject_id=f"subj{j}",
                        doc_id=tok.doc_id,
                        sent_idx=tok.sent_idx,
                        tok_idx=tok.tok_idx,
                        rt_ms=per_word,
                        fixated=True,
                    )
                )
    return records


def synth_word_readings(
    corpus: Corpus,
    profiles: SurprisalTable,
    seed: int,
    n_subjects: int = 12,
    deviation_coef: float = 12.0,
    subject_sd: float = 10.0,
    noise_sd: float = 15.0,
    base_rt: float = 200.0,
) -> list[ReadingRecord]:
    """Word reading times driven by the squared deviation of the word's
    surprisal from the language-level mean."""
    rng = np.random.default_rng(seed)
    mu_lang = profiles.language_mean()
    records = []
    for j in range(n_subjects):
        b_j = rng.normal(0.0, subject_sd)
        for profile in profiles.profiles():
            sent = corpus.sentence(*profile.ref)
            for tok, s in zip(sent.tokens, profile.s):
                rt = (
                    base_rt
                    + deviation_coef * (s - mu_lang) ** 2
                    + b_j
                    + rng.normal(0.0, noise_sd)
                )
                records.append(
                    ReadingRecord(
                        subject_id=f"subj{j}",
                        doc_id=tok.doc_id,
                        sent_idx=tok.sent_idx,
                        tok_idx=tok.tok_idx,
                        rt_ms=max(rt, 5.0),
                        fixated=True,
                    )
                )
    return records


def bimodal_corpus(
    n_sentences: int,
    seed: int,
    vocab_size: int = 80,
    n_docs: int = 4,
) -> Corpus:
    """Documents alternating between a predictable (peaked-transition) and a
    noisy (flat-transition) sublanguage over disjoint vocabulary halves, so
    document mean surprisals differ visibly from the language mean."""
    rng = np.random.default_rng((seed, 77))
    half = vocab_size // 2
    chains = []
    for i, concentration in enumerate((0.1, 3.0)):
        words = [f"w{i}{j:03d}" for j in range(half)]
        start = rng.dirichlet(np.ones(half) * 0.5)
        trans = rng.dirichlet(np.ones(half) * concentration, size=half)
        chains.append((words, start, trans))
    sample_rng = np.random.default_rng(seed)
    per_doc = n_sentences // n_docs
    docs = []
    for d in range(n_docs):
        words, start, trans = chains[d % 2]
        sents = []
        for _ in range(per_doc):
            length = int(sample_rng.integers(4, 12))
            w = int(sample_rng.choice(half, p=start))
            sent = [words[w]]
            for _ in range(length - 1):
                w = int(sample_rng.choice(half, p=trans[w]))
                sent.append(words[w])
            sents.append(sent)
        docs.append(sents)
    return build_corpus(docs)
