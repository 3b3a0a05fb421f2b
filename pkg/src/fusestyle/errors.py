"""Exception hierarchy for fusestyle."""

from __future__ import annotations


class FuseStyleError(Exception):
    """Base exception for all fusestyle errors."""

    pass


class ConfigError(FuseStyleError, ValueError):
    """Invalid or unreadable configuration."""

    pass


class WeightFileError(FuseStyleError):
    """Weight container is missing, malformed or truncated."""

    pass


class LayerShapeError(WeightFileError, ValueError):
    """A layer record does not match the expected network layout."""

    def __init__(self, tag: str, message: str) -> None:
        super().__init__(f"{tag}: {message}")
        self.tag = tag


class ImageSizeError(FuseStyleError, ValueError):
    """Image too small to survive the downsampling chain."""

    pass


class ChannelMismatchError(FuseStyleError, ValueError):
    """Feature channel count does not match the configured module."""

    pass


class CorpusError(FuseStyleError):
    """Training images could not be loaded."""

    pass


class EmptyCorpusError(CorpusError):
    """A training corpus directory holds no images."""

    pass


class NonFiniteLossError(FuseStyleError, ArithmeticError):
    """A loss term evaluated to NaN or infinity."""

    def __init__(self, term: str, step: int | None = None) -> None:
        where = f" at step {step}" if step is not None else ""
        super().__init__(f"Non-finite {term} loss{where}")
        self.term = term
        self.step = step


class CheckpointMismatchError(FuseStyleError, ValueError):
    """Requested settings contradict the checkpoint's configuration."""

    pass


class FrameSequenceError(FuseStyleError, ValueError):
    """Frame directory is empty, too short or has mixed resolutions."""

    pass


class RunIOError(FuseStyleError, OSError):
    """Writing run artifacts (metrics, checkpoints) failed."""

    pass


class MetricsLogError(FuseStyleError, ValueError):
    """Metrics file holds no records or cannot be parsed."""

    pass
