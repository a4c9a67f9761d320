"""The export job: corpus TSV in, surprisal exchange TSV out.

The output carries a `# model=<tag> pseudo=<0|1> units=nats` header
comment, one row per word covering every input token exactly once, and is
written atomically (temp file, then rename).
"""

from __future__ import annotations

import csv
import os
import tempfile
from dataclasses import dataclass

from .corpus_io import read_corpus_tsv
from .scoring import AutoregressiveScorer, ClozeScorer

EXCHANGE_HEADER = ["doc_id", "sent_idx", "tok_idx", "token", "surprisal_nats"]

MODES = ("autoregressive", "cloze")


@dataclass(frozen=True)
class ExportJob:
    corpus_path: str
    model_id: str
    mode: str
    output_path: str
    device: str = "cpu"
    batch_size: int = 8

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


def _load(job: ExportJob):
    from transformers import AutoModelForCausalLM, AutoModelForMaskedLM, AutoTokenizer

    tokenizer = AutoTokenizer.from_pretrained(job.model_id)
    if job.mode == "autoregressive":
        model = AutoModelForCausalLM.from_pretrained(job.model_id)
        return AutoregressiveScorer(model, tokenizer, device=job.device)
    model = AutoModelForMaskedLM.from_pretrained(job.model_id)
    return ClozeScorer(model, tokenizer, device=job.device)


def export(job: ExportJob, scorer=None) -> str:
    """Run the job and return the output path.  ``scorer`` may be passed
    directly (mainly for tests); by default it is built from the model id."""
    sentences = read_corpus_tsv(job.corpus_path)
    if scorer is None:
        scorer = _load(job)
    pseudo = job.mode == "cloze"
    tag = job.model_id.replace(os.sep, "/").rstrip("/").split("/")[-1]

    out_dir = os.path.dirname(os.path.abspath(job.output_path)) or "."
    fd, tmp_path = tempfile.mkstemp(dir=out_dir, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="", encoding="utf-8") as fh:
            fh.write(f"# model={tag} pseudo={int(pseudo)} units=nats\n")
            writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
            writer.writerow(EXCHANGE_HEADER)
            for start in range(0, len(sentences), job.batch_size):
                batch = sentences[start : start + job.batch_size]
                for scored in scorer.score_batch(batch):
                    ref = scored.ref
                    if len(scored.word_surprisals) != len(ref.words):
                        raise ValueError(
                            f"scorer covered {len(scored.word_surprisals)} of "
                            f"{len(ref.words)} words in ({ref.doc_id}, {ref.sent_idx})"
                        )
                    for tok_idx, (word, s) in enumerate(
                        zip(ref.words, scored.word_surprisals)
                    ):
                        writer.writerow(
                            [ref.doc_id, ref.sent_idx, tok_idx, word, repr(float(s))]
                        )
        os.replace(tmp_path, job.output_path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise
    return job.output_path
