"""Subjective content description engine with incremental feedback-driven updates."""

from .corpus import (
    CONSTANT,
    Corpus,
    Document,
    InfluenceProfile,
    Sentence,
    Vocabulary,
    influence,
    ingest_xml_law,
    vectorize,
)
from .model import (
    AdditionalData,
    FactoredRelation,
    Scd,
    ScdMatrix,
    ScdModel,
    check_consistency,
    cosine_similarity,
    deserialize_model,
    estimate_sem,
    model_digest,
    most_similar_row,
    normalize_rows,
    rebuild_row,
    serialize_model,
)
from .usem import MergeConfig, estimate_usem, label_surrogate, merge_scds
from .updates import (
    disassemble,
    fresh_remove_sentence,
    propagate,
    reassign,
    refresh,
    shift_relations,
)
from .agent import (
    CounterStore,
    FeedbackEvent,
    IrResponse,
    Query,
    ScdAgent,
    answer_query,
    enhance_scds,
)
from .evaluation import (
    align_models,
    choose_faulty_pairs,
    hellinger_row,
    metric_avg_distance,
    metric_proportion_diff,
    run_workflow,
    synthetic_corpus,
)

__all__ = [name for name in dir() if not name.startswith("_")]
