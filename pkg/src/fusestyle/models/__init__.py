"""Data models for fusestyle."""

from .config import Depth, FusionMode, LossWeights, TrainConfig
from .reports import (
    CoherencePair,
    CoherenceReport,
    LossBundle,
    MetricsRecord,
    SizeTiming,
    TimingReport,
)

__all__ = [
    "Depth",
    "FusionMode",
    "LossWeights",
    "TrainConfig",
    "CoherencePair",
    "CoherenceReport",
    "LossBundle",
    "MetricsRecord",
    "SizeTiming",
    "TimingReport",
]
