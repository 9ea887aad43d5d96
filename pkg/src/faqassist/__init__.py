"""faqassist: FAQ suggestion engine and agent-assist service.

An engine passively follows a support conversation, ranks FAQ answers (or
explicit silence) for the human agent, and is evaluated with a dual-class
MRR@10 protocol. The service module exposes the suggestion workflow over
HTTP for the agent console.
"""

from .corpus import (
    NO_SUGGESTION,
    Conversation,
    CorpusStats,
    FaqDatabase,
    FaqItem,
    Splits,
    Utterance,
    attach_annotations,
    corpus_stats,
    load_annotations,
    load_corpus,
    load_faqs,
    parse_whatsapp_export,
    pseudonymize,
    render_whatsapp_export,
    save_corpus,
    split_dataset,
)
from .errors import ConfigError, DataError, FaqAssistError, ParseError
from .evaluation import EvalReport, evaluate, reciprocal_rank, render_report
from .retrieval import (
    Bm25Index,
    EmbeddingProvider,
    Passage,
    Query,
    RankedSuggestion,
    build_bm25_index,
    build_passage,
    build_query,
    make_ranker,
    rank_bm25,
    rank_dense,
    rank_dumb,
    rank_random,
    score_to_percent,
    tokenize,
)
from .sampling import (
    SamplingPlan,
    SamplingSetting,
    TrainingPair,
    class_counts,
    export_training_pairs,
    plan_sampling,
)

__version__ = "0.1.0"

__all__ = [
    "NO_SUGGESTION",
    "Bm25Index",
    "ConfigError",
    "Conversation",
    "CorpusStats",
    "DataError",
    "EmbeddingProvider",
    "EvalReport",
    "FaqAssistError",
    "FaqDatabase",
    "FaqItem",
    "ParseError",
    "Passage",
    "Query",
    "RankedSuggestion",
    "SamplingPlan",
    "SamplingSetting",
    "Splits",
    "TrainingPair",
    "Utterance",
    "attach_annotations",
    "build_bm25_index",
    "build_passage",
    "build_query",
    "class_counts",
    "corpus_stats",
    "evaluate",
    "export_training_pairs",
    "load_annotations",
    "load_corpus",
    "load_faqs",
    "make_ranker",
    "parse_whatsapp_export",
    "plan_sampling",
    "pseudonymize",
    "rank_bm25",
    "rank_dense",
    "rank_dumb",
    "rank_random",
    "reciprocal_rank",
    "render_report",
    "render_whatsapp_export",
    "save_corpus",
    "score_to_percent",
    "split_dataset",
    "tokenize",
]
