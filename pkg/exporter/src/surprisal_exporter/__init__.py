"""Word-level surprisal extraction from pretrained neural language models,
written to the surprisal exchange TSV consumed by the analysis toolkit."""

from .align import AlignmentError, assign_pieces, word_spans
from .corpus_io import CorpusFormatError, SentenceRef, read_corpus_tsv
from .export import ExportJob, export
from .scoring import AutoregressiveScorer, ClozeScorer, ScoredSentence

__version__ = "0.1.0"
