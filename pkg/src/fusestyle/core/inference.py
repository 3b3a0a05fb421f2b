"""Inference: stylize images and frame directories, and time the network."""

from __future__ import annotations

import logging
import math
import os
import platform
import statistics
import time
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import torch
import torch.nn.functional as F

from ..errors import CheckpointMismatchError, ConfigError
from ..models.config import Depth, FusionMode
from ..models.reports import REFERENCE_TIMINGS, SizeTiming, TimingReport
from ..utils.images import (
    check_unique_stems,
    check_uniform_size,
    list_frames,
    load_image,
    save_image,
)
from .codec import Encoder, check_image, load_encoder
from .model import Generator, build_generator
from .paths import RunPaths
from .trainer import Checkpoint

logger = logging.getLogger(__name__)

DEFAULT_SIZES = (256, 512, 1024)


def pad_to_multiple(img: torch.Tensor, factor: int) -> tuple[torch.Tensor, tuple[int, int]]:
    """
    Reflect-pad the bottom/right edges up to the next multiple of ``factor``.

    Returns:
        Padded image and the original (height, width)
    """
    height, width = img.shape[-2:]
    pad_h = -height % factor
    pad_w = -width % factor
    if pad_h or pad_w:
        img = F.pad(img, (0, pad_w, 0, pad_h), mode="reflect")
    return img, (height, width)


def describe_hardware(device: torch.device) -> str:
    """Short descriptor of the machine running inference."""
    if device.type == "cuda":
        return f"{torch.cuda.get_device_name(device)} / torch {torch.__version__}"
    cpu = platform.processor() or platform.machine()
    return f"{cpu} x{os.cpu_count()} ({platform.system()}) / torch {torch.__version__}"


def benchmark_pair(size: int, device: torch.device) -> tuple[torch.Tensor, torch.Tensor]:
    """Deterministic content/style test pattern at ``size`` x ``size``."""
    axis = torch.linspace(0.0, 2.0 * math.pi, size, device=device)
    yy, xx = torch.meshgrid(axis, axis, indexing="ij")
    content = torch.stack([torch.sin(3 * xx), torch.cos(2 * yy), torch.sin(xx + yy)])
    style = torch.stack([torch.cos(7 * xx * yy / 10), torch.sin(5 * yy), torch.cos(4 * xx)])
    return (0.5 + 0.5 * content).unsqueeze(0), (0.5 + 0.5 * style).unsqueeze(0)


class Stylizer:
    """
    Read-only wrapper around a trained generator.

    No inference path draws random numbers: equal inputs give byte-identical
    outputs.
    """

    def __init__(self, model: Generator, device: torch.device | str = "cpu") -> None:
        self.device = torch.device(device)
        self.model = model.to(self.device).eval()
        self.model.requires_grad_(False)

    @classmethod
    def from_checkpoint(
        cls,
        checkpoint: Checkpoint,
        encoder: Encoder,
        *,
        depth: Depth | None = None,
        mode: FusionMode | None = None,
        device: torch.device | str = "cpu",
    ) -> Stylizer:
        """
        Build a stylizer, rejecting overrides that contradict the checkpoint.

        Raises:
            CheckpointMismatchError: ``depth`` or ``mode`` differs from the snapshot
        """
        config = checkpoint.config
        if depth is not None and depth != config.depth:
            raise CheckpointMismatchError(
                f"--depth {depth.value} contradicts checkpoint depth {config.depth.value}"
            )
        if mode is not None and mode != config.mode:
            raise CheckpointMismatchError(
                f"--mode {mode.value} contradicts checkpoint mode {config.mode.value}"
            )
        model = build_generator(encoder, config.depth, config.mode, config.seed)
        model.load_records(checkpoint.model)
        return cls(model, device)

    @classmethod
    def from_files(
        cls,
        checkpoint_path: Path,
        encoder_weights: Path | None = None,
        *,
        depth: Depth | None = None,
        mode: FusionMode | None = None,
        device: torch.device | str = "cpu",
    ) -> Stylizer:
        """Load a checkpoint and its encoder (from the snapshot unless given)."""
        checkpoint = Checkpoint.load(checkpoint_path)
        weights = encoder_weights or RunPaths.resolve_encoder_weights(
            checkpoint.config.encoder_weights
        )
        return cls.from_checkpoint(
            checkpoint, load_encoder(weights), depth=depth, mode=mode, device=device
        )

    @property
    def depth(self) -> Depth:
        return self.model.depth

    @torch.no_grad()
    def prepare_style(self, style: torch.Tensor) -> torch.Tensor:
        """Encode a style image once into reusable per-channel gains."""
        check_image(style)
        padded, _ = pad_to_multiple(style.to(self.device), self.model.factor)
        return self.model.style_gains(padded)

    @torch.no_grad()
    def stylize(self, content: torch.Tensor, gains: torch.Tensor, alpha: float = 1.0) -> torch.Tensor:
        """
        Stylize a content image with prepared style gains, at the content's resolution.

        Raises:
            ImageSizeError: Content below 16x16
        """
        check_image(content)
        padded, (height, width) = pad_to_multiple(content.to(self.device), self.model.factor)
        out = self.model.stylize_with(padded, gains, alpha=alpha)
        return out[..., :height, :width].cpu()

    def stylize_image(
        self, content_path: Path, style_path: Path, out_path: Path, alpha: float = 1.0
    ) -> Path:
        """Stylize one image file and write the result."""
        gains = self.prepare_style(load_image(style_path))
        save_image(self.stylize(load_image(content_path), gains, alpha), out_path)
        return out_path

    def stylize_video(
        self,
        frames_dir: Path,
        style_path: Path,
        out_dir: Path,
        *,
        workers: int = 1,
        alpha: float = 1.0,
    ) -> list[Path]:
        """
        Stylize every frame of a directory independently with one style.

        Style gains are computed once and shared. Output frames keep the input
        file stems (as PNG), so ordering does not depend on completion order.

        Raises:
            FrameSequenceError: Empty directory, mixed resolutions or two
                frames sharing a stem
        """
        frames = list_frames(frames_dir)
        check_uniform_size(frames)
        check_unique_stems(frames)
        gains = self.prepare_style(load_image(style_path))
        out_dir.mkdir(parents=True, exist_ok=True)
        targets = [out_dir / f"{frame.stem}.png" for frame in frames]

        def run(index: int) -> Path:
            save_image(self.stylize(load_image(frames[index]), gains, alpha), targets[index])
            return targets[index]

        with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
            written = list(pool.map(run, range(len(frames))))
        logger.info("Stylized %d frames into %s", len(written), out_dir)
        return written

    def benchmark(
        self, sizes: Sequence[int] = DEFAULT_SIZES, runs: int = 10, warmup: int = 2
    ) -> TimingReport:
        """
        Time full content+style generation per square size.

        Args:
            sizes: Image sides to time
            runs: Measured runs per size (at least 1)
            warmup: Untimed runs before measuring

        Returns:
            TimingReport with mean and median seconds, plus the published
            reference row for context

        Raises:
            ConfigError: ``runs`` below 1
        """
        if runs < 1:
            raise ConfigError("benchmark needs at least one measured run")
        if runs < 10:
            logger.warning("Only %d measured runs; timings will be noisy", runs)

        def sync() -> None:
            if self.device.type == "cuda":
                torch.cuda.synchronize(self.device)

        timings = []
        for size in sizes:
            content, style = benchmark_pair(size, self.device)
            samples = []
            for index in range(warmup + runs):
                sync()
                start = time.perf_counter()
                self.stylize(content, self.prepare_style(style))
                sync()
                if index >= warmup:
                    samples.append(time.perf_counter() - start)
            timings.append(
                SizeTiming(
                    size=size,
                    mean_seconds=statistics.fmean(samples),
                    median_seconds=statistics.median(samples),
                    runs=runs,
                    warmup=warmup,
                    reference_seconds=REFERENCE_TIMINGS.get(size),
                )
            )
            logger.debug("size %d: median %.4fs", size, timings[-1].median_seconds)
        return TimingReport(
            hardware=describe_hardware(self.device),
            device=str(self.device),
            depth=self.depth.value,
            timings=timings,
        )
