"""Navigation-instruction evaluation toolkit.

Direction-aware SPICE-D scoring, DTW feature alignment with coverage and
contrastive losses, offline knowledge-fact retrieval, and metric-human
correlation analysis.
"""

__version__ = "0.1.0"

from .align import (
    TargetMatrix,
    as_hidden_matrix,
    attention_coverage_loss,
    build_cost,
    contrastive_loss,
    dtw_align,
    expand_alignment,
    softmax_attention,
    target_from_word_map,
    total_loss,
    validate_alignment_matrix,
)
from .knowledge import (
    Detection,
    EntitySet,
    KnowledgeBase,
    KnowledgeBaseError,
    KnowledgeFact,
    gather_entities,
    load_kb,
    retrieve_facts,
)
from .metric import (
    ScoreReport,
    ScoringInput,
    SemanticTupleSet,
    SynonymMap,
    lcs_length,
    match_tuples,
    normalize_tuples,
    score_pair,
    spice_d_score,
    spice_score,
)
from .stats import (
    CorrelationReport,
    MetricCorrelation,
    PairedScores,
    correlate_metrics,
    pearson,
)
from .text import (
    DirectionPhrase,
    DirectionTaxonomy,
    Instruction,
    SubInstruction,
    chunk_instruction,
    direction_labels,
    load_taxonomy,
    load_verb_lexicon,
    parse_directions,
    span_text,
    tokenize,
)

__all__ = [
    "__version__",
    "TargetMatrix",
    "as_hidden_matrix",
    "attention_coverage_loss",
    "build_cost",
    "contrastive_loss",
    "dtw_align",
    "expand_alignment",
    "softmax_attention",
    "target_from_word_map",
    "total_loss",
    "validate_alignment_matrix",
    "Detection",
    "EntitySet",
    "KnowledgeBase",
    "KnowledgeBaseError",
    "KnowledgeFact",
    "gather_entities",
    "load_kb",
    "retrieve_facts",
    "ScoreReport",
    "ScoringInput",
    "SemanticTupleSet",
    "SynonymMap",
    "lcs_length",
    "match_tuples",
    "normalize_tuples",
    "score_pair",
    "spice_d_score",
    "spice_score",
    "CorrelationReport",
    "MetricCorrelation",
    "PairedScores",
    "correlate_metrics",
    "pearson",
    "DirectionPhrase",
    "DirectionTaxonomy",
    "Instruction",
    "SubInstruction",
    "chunk_instruction",
    "direction_labels",
    "load_taxonomy",
    "load_verb_lexicon",
    "parse_directions",
    "span_text",
    "tokenize",
]
