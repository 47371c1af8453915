"""Preference-drift detection and drift-aware recommendation over interaction sequences."""

from driftrec.changepoint import (
    ChangePointResult,
    SegmentedMatrix,
    build_segmented_matrix,
    cooccurrence_item_vectors,
    cusum_detect,
    displacement_error,
    hmcd_detect,
    partition,
    random_partition,
    sliding_window_detect,
    tune_cusum_threshold,
)
from driftrec.dataset import (
    HOLDOUT_SIZE,
    CorpusStats,
    MixedSequence,
    PlaylistCorpus,
    load_benchmark,
    load_corpus,
    save_benchmark,
    synthesize_mixed,
    to_interaction_sequences,
)
from driftrec.evaluation import (
    EvalReport,
    MethodMetrics,
    aggregate_cpd,
    ndcg_time_aware,
    pr_curve,
    precision_recall_at,
)
from driftrec.factorization import (
    FactorizationConfig,
    FactorPair,
    bpr_fit,
    bpr_triple_grad,
    bpr_triple_loss,
    frobenius_objective,
    load_factors,
    nmf_fit,
    save_factors,
    sigmoid,
)
from driftrec.hmm import (
    DecodedPath,
    HmmModel,
    InteractionSequence,
    TrainConfig,
    baum_welch_train,
    forward_log_likelihood,
    load_model,
    save_model,
    total_log_likelihood,
    viterbi_decode,
)
from driftrec.recommend import (
    ItemFactors,
    Recommendation,
    factors_from_pair,
    hmm_item_factors,
    hmmr_recommend,
    item_popularity,
    pop_rank,
    rank_by_scores,
    recommend_from_segments,
    score_by_segment,
    smf_recommend,
)

__all__ = [
    "HOLDOUT_SIZE",
    "ChangePointResult",
    "CorpusStats",
    "DecodedPath",
    "EvalReport",
    "FactorPair",
    "FactorizationConfig",
    "HmmModel",
    "InteractionSequence",
    "ItemFactors",
    "MethodMetrics",
    "MixedSequence",
    "PlaylistCorpus",
    "Recommendation",
    "SegmentedMatrix",
    "TrainConfig",
    "aggregate_cpd",
    "baum_welch_train",
    "bpr_fit",
    "bpr_triple_grad",
    "bpr_triple_loss",
    "build_segmented_matrix",
    "cooccurrence_item_vectors",
    "cusum_detect",
    "displacement_error",
    "factors_from_pair",
    "forward_log_likelihood",
    "frobenius_objective",
    "hmcd_detect",
    "hmm_item_factors",
    "hmmr_recommend",
    "item_popularity",
    "load_benchmark",
    "load_corpus",
    "load_factors",
    "load_model",
    "ndcg_time_aware",
    "nmf_fit",
    "partition",
    "pop_rank",
    "pr_curve",
    "precision_recall_at",
    "rank_by_scores",
    "random_partition",
    "recommend_from_segments",
    "save_benchmark",
    "save_factors",
    "save_model",
    "score_by_segment",
    "sigmoid",
    "sliding_window_detect",
    "smf_recommend",
    "synthesize_mixed",
    "to_interaction_sequences",
    "total_log_likelihood",
    "tune_cusum_threshold",
    "viterbi_decode",
]

__version__ = "0.1.0"
