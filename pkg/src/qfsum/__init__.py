"""Query-focused extractive multi-document summarization."""
from .corpus import Cluster, Lexicon, LexEntry, Sentence, load_cluster, tokenize_and_stem
from .rankers import FEATURE_NAMES, SystemVariant
from .summarizer import PipelineConfig, Resources, baseline_summary, featurize, run_system

__all__ = [
    "Cluster", "FEATURE_NAMES", "LexEntry", "Lexicon", "PipelineConfig", "Resources", "Sentence",
    "SystemVariant", "baseline_summary", "featurize", "load_cluster", "run_system", "tokenize_and_stem",
]
__version__ = "0.1.0"
