"""Supervised Indian Buffet Process models for learning binary codes from triplets."""

from ._sibp import (
    ChainConfig,
    Sample,
    Trace,
    class_hash_fixture,
    collapsed_log_evidence,
    evaluate,
    feature_activation_prob,
    generate_synthetic,
    generate_triplets,
    hamming,
    knn_classify,
    load_trace,
    predict_codes,
    preference_prob,
    train,
    triplet_log_likelihood,
    triplet_satisfaction,
)

__all__ = [
    "ChainConfig",
    "Sample",
    "Trace",
    "class_hash_fixture",
    "collapsed_log_evidence",
    "evaluate",
    "feature_activation_prob",
    "generate_synthetic",
    "generate_triplets",
    "hamming",
    "knn_classify",
    "load_trace",
    "predict_codes",
    "preference_prob",
    "train",
    "triplet_log_likelihood",
    "triplet_satisfaction",
]
