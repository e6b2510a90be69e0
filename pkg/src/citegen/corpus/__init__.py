from .types import (
    PaperRecord,
    CitedRef,
    CitationInstance,
    ExampleSentence,
    ExamplePool,
    IngestConfig,
    IngestStats,
    CorpusBundle,
)
from .ingest import ingest_corpus, select_single_citation
from .pool import build_example_pool, select_example, SelectedExample
from .segment import split_sentences
from .similarity import JaccardSimilarity, EmbeddingSimilarity

__all__ = [
    "PaperRecord",
    "CitedRef",
    "CitationInstance",
    "ExampleSentence",
    "ExamplePool",
    "IngestConfig",
    "IngestStats",
    "CorpusBundle",
    "ingest_corpus",
    "select_single_citation",
    "build_example_pool",
    "select_example",
    "SelectedExample",
    "split_sentences",
    "JaccardSimilarity",
    "EmbeddingSimilarity",
]
