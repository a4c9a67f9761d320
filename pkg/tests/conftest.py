import numpy as np
import pytest

from uidtk.corpus import Corpus, build_corpus


def markov_sentences(
    n_sentences: int,
    seed: int,
    vocab_size: int = 60,
    successors: int = 6,
    min_len: int = 4,
    max_len: int = 12,
    chain_seed: int = 1234,
) -> list[list[str]]:
    """Deterministic synthetic language: a sparse Markov chain (fixed by
    ``chain_seed``, so train and held-out splits share one language) sampled
    with ``seed``.  Gives n-gram models real structure to learn while
    keeping the vocabulary desk-sized."""
    chain_rng = np.random.default_rng((chain_seed, vocab_size, successors))
    vocab = np.array([f"w{i:03d}" for i in range(vocab_size)])
    start_p = chain_rng.dirichlet(np.ones(vocab_size) * 0.3)
    succ_idx = np.array(
        [chain_rng.choice(vocab_size, size=successors, replace=False) for _ in vocab]
    )
    succ_p = chain_rng.dirichlet(np.ones(successors), size=vocab_size)
    rng = np.random.default_rng(seed)
    sents = []
    for _ in range(n_sentences):
        length = int(rng.integers(min_len, max_len + 1))
        w = int(rng.choice(vocab_size, p=start_p))
        sent = [vocab[w]]
        for _ in range(length - 1):
            w = int(rng.choice(succ_idx[w], p=succ_p[w]))
            sent.append(vocab[w])
        sents.append([str(t) for t in sent])
    return sents


def markov_corpus(n_sentences: int, seed: int, n_docs: int = 4, **kw) -> Corpus:
    sents = markov_sentences(n_sentences, seed, **kw)
    per_doc = (len(sents) + n_docs - 1) // n_docs
    docs = [sents[i : i + per_doc] for i in range(0, len(sents), per_doc)]
    return build_corpus(docs)


@pytest.fixture(scope="session")
def fixture_corpus() -> Corpus:
    return markov_corpus(200, seed=11)


@pytest.fixture(scope="session")
def heldout_corpus() -> Corpus:
    return markov_corpus(50, seed=12)
