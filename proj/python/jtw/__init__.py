"""Joint topic and contextual word-embedding model."""

from ._jtw import (
    ConfigError,
    EpochStats,
    IoError,
    Model,
    ModelConfig,
    OovError,
    TrainConfig,
    TrainingDiverged,
    Vocabulary,
    baladd,
    cos_half_angle,
    default_stopwords,
    generate_synthetic,
    kl_to_prior,
    learning_rate,
    npmi,
    spearman,
    tokenize,
)

__all__ = [
    "ConfigError",
    "EpochStats",
    "IoError",
    "Model",
    "ModelConfig",
    "OovError",
    "TrainConfig",
    "TrainingDiverged",
    "Vocabulary",
    "baladd",
    "cos_half_angle",
    "default_stopwords",
    "generate_synthetic",
    "kl_to_prior",
    "learning_rate",
    "npmi",
    "spearman",
    "tokenize",
]
