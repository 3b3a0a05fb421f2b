"""Video stability metrics: adjacent-frame differences and the illumination probe."""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from ..errors import ConfigError, FrameSequenceError
from ..models.reports import CoherencePair, CoherenceReport
from .losses import GeneratorFn

logger = logging.getLogger(__name__)


def _as_frame(frame: torch.Tensor) -> torch.Tensor:
    """(3, H, W) float64 view of a (1, 3, H, W) or (3, H, W) frame."""
    if frame.dim() == 4:
        if frame.shape[0] != 1:
            raise FrameSequenceError(f"expected single frames, got a batch of {frame.shape[0]}")
        frame = frame[0]
    return frame.detach().to("cpu", torch.float64)


def frame_diffs(frames: Sequence[torch.Tensor], with_heatmaps: bool = False) -> CoherenceReport:
    """
    Mean absolute difference between consecutive frames.

    Args:
        frames: Ordered frames, all of one resolution
        with_heatmaps: Also keep per-pair (H, W) difference maps averaged over color

    Returns:
        CoherenceReport with the series, its mean and population variance

    Raises:
        FrameSequenceError: Fewer than two frames, or mixed shapes
    """
    if len(frames) < 2:
        raise FrameSequenceError(f"Coherence needs at least 2 frames, got {len(frames)}")
    clip = [_as_frame(f) for f in frames]
    shape = clip[0].shape
    mismatched = [i for i, f in enumerate(clip) if f.shape != shape]
    if mismatched:
        raise FrameSequenceError(
            f"Frames {mismatched} differ from frame 0 shape {tuple(shape)}"
        )

    series: list[float] = []
    heatmaps: list[torch.Tensor] = []
    for prev, cur in zip(clip, clip[1:], strict=False):
        diff = (cur - prev).abs()
        series.append(float(diff.mean()))
        if with_heatmaps:
            heatmaps.append(diff.mean(dim=0))

    values = np.asarray(series, dtype=np.float64)
    return CoherenceReport(
        diff_series=series,
        mean_diff=float(values.mean()),
        var_diff=float(values.var()),
        frames=len(clip),
        heatmaps=heatmaps if with_heatmaps else None,
    )


def save_heatmaps(report: CoherenceReport, out_dir: Path) -> list[Path]:
    """
    Write each pair's difference map as a grayscale PNG (``diff-0001.png`` ...).

    Values in [0, 1] map linearly onto 0..255.
    """
    if report.heatmaps is None:
        raise ValueError("report was computed without heatmaps")
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for index, heatmap in enumerate(report.heatmaps, start=1):
        array = np.rint(heatmap.clamp(0.0, 1.0).numpy() * 255.0).astype(np.uint8)
        path = out_dir / f"diff-{index:04d}.png"
        Image.fromarray(array).save(path)
        written.append(path)
    return written


def compare_coherence(
    input_frames: Sequence[torch.Tensor],
    stylized_frames: Sequence[torch.Tensor],
    with_heatmaps: bool = False,
) -> CoherencePair:
    """
    Coherence of a stylized clip relative to its input.

    Returns:
        Both reports and mean_diff(stylized) / mean_diff(input); the ratio is
        ``"static"`` when both clips are static and infinite when only the
        input is

    Raises:
        FrameSequenceError: Frame counts differ
    """
    if len(input_frames) != len(stylized_frames):
        raise FrameSequenceError(
            f"Frame count mismatch: {len(input_frames)} input vs {len(stylized_frames)} stylized"
        )
    source = frame_diffs(input_frames)
    styled = frame_diffs(stylized_frames, with_heatmaps)

    ratio: float | str
    if source.mean_diff == 0:
        ratio = "static" if styled.mean_diff == 0 else math.inf
    else:
        ratio = styled.mean_diff / source.mean_diff
    return CoherencePair(input=source, stylized=styled, ratio=ratio)


@torch.no_grad()
def illumination_probe(
    model: GeneratorFn,
    i_c: torch.Tensor,
    i_s: torch.Tensor,
    sigma: float,
    trials: int = 20,
    seed: int = 0,
) -> float:
    """
    Mean absolute output change when the content image is perturbed by noise.

    Each trial draws fresh Gaussian noise of standard deviation ``sigma``
    from a generator seeded with ``seed``, so the probe is repeatable.

    Raises:
        ConfigError: ``trials`` below 1
    """
    if trials < 1:
        raise ConfigError("illumination probe needs at least one trial")
    rng = torch.Generator().manual_seed(seed)
    clean = model(i_c, i_s).to(torch.float64)
    total = 0.0
    for _ in range(trials):
        noise = torch.randn(i_c.shape, generator=rng, dtype=i_c.dtype).to(i_c.device)
        noisy = model(i_c + noise * sigma, i_s).to(torch.float64)
        total += float((noisy - clean).abs().mean())
    value = total / trials
    logger.debug("illumination probe sigma=%g trials=%d -> %.6f", sigma, trials, value)
    return value


def panning_clip(image: torch.Tensor, frames: int, step: int = 1) -> list[torch.Tensor]:
    """
    Synthetic horizontal pan: a fixed-width window sliding ``step`` pixels per frame.

    Frame t is ``image[..., :, t*step : t*step + width]`` with
    ``width = W - (frames - 1) * step``, so consecutive frames are exact
    translations of each other.

    Raises:
        FrameSequenceError: The image is too narrow for the requested pan
    """
    if frames < 1 or step < 0:
        raise FrameSequenceError("panning clip needs frames >= 1 and step >= 0")
    width = image.shape[-1] - (frames - 1) * step
    if width < 1:
        raise FrameSequenceError(
            f"Image width {image.shape[-1]} too small for {frames} frames at step {step}"
        )
    return [image[..., :, t * step : t * step + width].clone() for t in range(frames)]


def static_clip(image: torch.Tensor, frames: int) -> list[torch.Tensor]:
    """``frames`` identical copies of ``image``."""
    if frames < 1:
        raise FrameSequenceError("static clip needs frames >= 1")
    return [image.clone() for _ in range(frames)]
