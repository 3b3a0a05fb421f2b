"""Report models: loss bundles, metrics records, coherence and timing reports."""

from __future__ import annotations

import math
from datetime import datetime
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..utils import dt

# Inference seconds per image size, as published for the reference GPU.
REFERENCE_TIMINGS: dict[int, float] = {256: 0.013, 512: 0.015, 1024: 0.019}


class LossBundle(BaseModel):
    """The four loss terms of one step plus their weighted total."""

    model_config = ConfigDict(frozen=True)

    content: float = Field(ge=0.0)
    style: float = Field(ge=0.0)
    identity: float = Field(ge=0.0)
    illumination: float = Field(ge=0.0)
    total: float = Field(ge=0.0)

    @field_validator("content", "style", "identity", "illumination", "total")
    @classmethod
    def check_finite(cls, v: float) -> float:
        """Reject NaN and infinities."""
        if not math.isfinite(v):
            raise ValueError("loss terms must be finite")
        return v


class MetricsRecord(LossBundle):
    """One line of a run's metrics.jsonl."""

    step: int = Field(ge=1)
    time: datetime = Field(default_factory=dt.now)


class CoherenceReport(BaseModel):
    """Adjacent-frame difference statistics of one clip."""

    diff_series: list[float]
    mean_diff: float = Field(ge=0.0)
    var_diff: float = Field(ge=0.0)
    frames: int = Field(ge=2)
    heatmaps: list[Any] | None = Field(default=None, exclude=True, repr=False)


class CoherencePair(BaseModel):
    """Input and stylized coherence side by side."""

    model_config = ConfigDict(ser_json_inf_nan="strings")

    input: CoherenceReport
    stylized: CoherenceReport
    ratio: float | Literal["static"] = Field(
        description="mean_diff(stylized) / mean_diff(input); 'static' when both are 0"
    )


class SizeTiming(BaseModel):
    """Inference timing at one square image size."""

    size: int
    mean_seconds: float
    median_seconds: float
    runs: int
    warmup: int
    reference_seconds: float | None = None


class TimingReport(BaseModel):
    """Inference timings across sizes, with the published reference row."""

    hardware: str
    device: str
    depth: str
    timings: list[SizeTiming]
    reference: dict[int, float] = Field(default_factory=lambda: dict(REFERENCE_TIMINGS))
    reference_hardware: str = "16G TitanX GPU"
    created_at: datetime = Field(default_factory=dt.now)
