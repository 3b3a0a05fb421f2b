"""Optimization loop, checkpoints and resumable training runs."""

from __future__ import annotations

import copy
import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from datetime import datetime
from functools import partial
from pathlib import Path
from typing import Any

import numpy as np
import torch

from ..errors import RunIOError, WeightFileError
from ..models.config import TrainConfig
from ..models.reports import LossBundle
from ..utils import dt
from . import metrics_log
from .codec import Encoder, load_encoder
from .config import ConfigManager
from .data import BatchPrefetcher, ImageCorpus
from .losses import (
    LossTerms,
    content_distance,
    identity_loss,
    illumination_loss,
    style_distance,
    total_loss,
    weighted_sum,
)
from .model import Generator, build_generator
from .paths import RunPaths
from .weights import pack_json, read_records, unpack_json, write_records

logger = logging.getLogger(__name__)

StepCallback = Callable[[int, LossBundle], None]


@dataclass
class Checkpoint:
    """Everything needed to continue a run bit-for-bit."""

    step: int
    config: TrainConfig
    model: dict[str, torch.Tensor]
    optimizer: dict[str, Any]
    data_rng_state: dict[str, Any]
    noise_rng_state: torch.Tensor
    created_at: datetime = field(default_factory=dt.now)

    def save(self, path: Path) -> None:
        """
        Write the checkpoint as an MCCW1 container.

        Raises:
            RunIOError: The write failed, naming the step
        """
        records = dict(self.model)
        for index, state in self.optimizer["state"].items():
            for key, value in state.items():
                records[f"optim.{index}.{key}"] = torch.as_tensor(value, dtype=torch.float32)
        records["rng.torch"] = self.noise_rng_state
        records["meta"] = pack_json(
            {
                "step": self.step,
                "config": self.config.model_dump(mode="json"),
                "param_groups": self.optimizer["param_groups"],
                "data_rng_state": self.data_rng_state,
                "created_at": dt.to_iso(self.created_at),
            }
        )
        try:
            write_records(path, records)
        except OSError as e:
            raise RunIOError(f"Saving checkpoint for step {self.step} to {path} failed: {e}") from e

    @classmethod
    def load(cls, path: Path) -> Checkpoint:
        """
        Read a checkpoint written by :meth:`save`.

        Raises:
            WeightFileError: Missing, truncated, or not a checkpoint
        """
        records = read_records(path)
        if "meta" not in records:
            raise WeightFileError(f"{path} has no checkpoint metadata")
        meta = unpack_json(records["meta"])

        state: dict[int, dict[str, torch.Tensor]] = {}
        for tag, value in records.items():
            if tag.startswith("optim."):
                _, index, key = tag.split(".", 2)
                state.setdefault(int(index), {})[key] = value
        return cls(
            step=int(meta["step"]),
            config=ConfigManager.from_snapshot(meta["config"]),
            model={k: v for k, v in records.items() if k.startswith(("mcc.", "decoder."))},
            optimizer={"state": state, "param_groups": meta["param_groups"]},
            data_rng_state=meta["data_rng_state"],
            noise_rng_state=records["rng.torch"],
            created_at=datetime.fromisoformat(meta["created_at"]),
        )


class Trainer:
    """
    Owns the model, the optimizer and both random streams of a run.

    The optimizer is the only writer of parameters; batches are produced on
    a loader worker and consumed here one step at a time.
    """

    def __init__(self, config: TrainConfig, encoder: Encoder | None = None) -> None:
        """
        Build a fresh run.

        Args:
            config: Training configuration
            encoder: Preloaded encoder (loaded from ``config.encoder_weights`` if None)
        """
        self.config = config
        self.paths = RunPaths(config.output_dir)
        self.device = torch.device(config.device)
        if encoder is None:
            encoder = load_encoder(RunPaths.resolve_encoder_weights(config.encoder_weights))
        self.encoder = encoder.to(self.device)
        self.model: Generator = build_generator(self.encoder, config.depth, config.mode, config.seed)
        self.optimizer = torch.optim.Adam(self.model.trainable_parameters(), lr=config.learning_rate)
        self.data_rng = np.random.default_rng(config.seed)
        self.noise_rng = torch.Generator().manual_seed(config.seed)
        self.step = 0

    @classmethod
    def from_checkpoint(cls, checkpoint: Checkpoint, encoder: Encoder | None = None) -> Trainer:
        """Rebuild a trainer in the exact state captured by a checkpoint."""
        trainer = cls(checkpoint.config, encoder)
        trainer.model.load_records(checkpoint.model)
        trainer.optimizer.load_state_dict(checkpoint.optimizer)
        trainer.data_rng.bit_generator.state = checkpoint.data_rng_state
        trainer.noise_rng.set_state(checkpoint.noise_rng_state)
        trainer.step = checkpoint.step
        return trainer

    def checkpoint(self) -> Checkpoint:
        """Snapshot the current state (tensors are copied)."""
        optimizer_state = self.optimizer.state_dict()
        return Checkpoint(
            step=self.step,
            config=self.config,
            model={k: v.detach().clone().cpu() for k, v in self.model.state_records().items()},
            optimizer={
                "state": {
                    index: {key: torch.as_tensor(value).detach().clone().cpu() for key, value in s.items()}
                    for index, s in optimizer_state["state"].items()
                },
                "param_groups": optimizer_state["param_groups"],
            },
            data_rng_state=self.data_rng.bit_generator.state,
            noise_rng_state=self.noise_rng.get_state(),
        )

    def save_checkpoint(self) -> Path:
        """Write ``step-XXXXXXXX.mccw`` and refresh ``latest.mccw``."""
        self.paths.ensure_dirs()
        checkpoint = self.checkpoint()
        path = self.paths.checkpoint_for(self.step)
        checkpoint.save(path)
        checkpoint.save(self.paths.latest)
        logger.debug("Saved checkpoint %s", path)
        return path

    def compute_terms(self, content: torch.Tensor, style: torch.Tensor) -> LossTerms:
        """Evaluate the four unweighted loss terms for one batch."""
        weights = self.config.loss
        generate = partial(self.model, clamp=False)

        i_cs = generate(content, style)
        taps_cs = self.encoder(i_cs)
        with torch.no_grad():
            taps_c = self.encoder(content)
            taps_s = self.encoder(style)

        with torch.set_grad_enabled(weights.illumination > 0):
            illumination = illumination_loss(
                generate, content, style, weights.noise_sigma, self.noise_rng, clean=i_cs
            )
        return LossTerms(
            content=content_distance(taps_cs, taps_c),
            style=style_distance(taps_cs, taps_s),
            identity=identity_loss(generate, content, style),
            illumination=illumination,
        )

    def train_step(self, content: torch.Tensor, style: torch.Tensor) -> LossBundle:
        """
        Run one optimizer update on the decoder and correlation module.

        Args:
            content: (B, 3, crop, crop) content batch
            style: (B, 3, crop, crop) style batch

        Returns:
            The step's LossBundle

        Raises:
            NonFiniteLossError: A term is NaN/inf; no update is applied
        """
        self.model.train()
        content = content.to(self.device)
        style = style.to(self.device)

        terms = self.compute_terms(content, style)
        total = weighted_sum(terms, self.config.loss, step=self.step + 1)

        self.optimizer.zero_grad(set_to_none=True)
        total.backward()
        self.optimizer.step()
        self.step += 1
        return total_loss(terms, self.config.loss)

    def fit(self, on_step: StepCallback | None = None) -> Checkpoint:
        """
        Train until ``config.steps`` updates have been applied.

        Writes the config snapshot, a metrics record per step and periodic
        checkpoints into the run directory.

        Args:
            on_step: Called after every step with (step, bundle)

        Returns:
            Checkpoint of the final state
        """
        config = self.config
        if self.step >= config.steps:
            return self.checkpoint()

        content = ImageCorpus(config.content_dir)
        style = ImageCorpus(config.style_dir)
        self.paths.ensure_dirs()
        ConfigManager.save(config, self.paths.config_file)
        dropped = metrics_log.truncate_after(self.paths.metrics_file, self.step)
        if dropped:
            logger.info("Dropped %d metrics records newer than step %d", dropped, self.step)

        logger.info(
            "Training %s/%s from step %d to %d (%d content, %d style images)",
            config.depth.value,
            config.mode.value,
            self.step,
            config.steps,
            len(content),
            len(style),
        )
        started = dt.now()
        with BatchPrefetcher(
            content,
            style,
            copy.deepcopy(self.data_rng),
            config.batch,
            config.crop,
            config.resize_max,
            depth=config.prefetch,
        ) as batches:
            for batch in batches:
                bundle = self.train_step(batch.content, batch.style)
                # The prefetcher runs ahead; track the state of the consumed batch.
                self.data_rng.bit_generator.state = batch.rng_state
                metrics_log.append_record(self.paths.metrics_file, self.step, bundle)
                if on_step is not None:
                    on_step(self.step, bundle)
                if self.step % config.log_every == 0:
                    logger.info(
                        "step %d  total %.4f  content %.4f  style %.4f  id %.4f  illum %.6f",
                        self.step,
                        bundle.total,
                        bundle.content,
                        bundle.style,
                        bundle.identity,
                        bundle.illumination,
                    )
                if self.step % config.checkpoint_every == 0 or self.step >= config.steps:
                    self.save_checkpoint()
                if self.step >= config.steps:
                    break
        logger.info("Finished %d steps in %s", self.step, dt.elapsed(started))
        return self.checkpoint()


def fit(
    config: TrainConfig,
    *,
    resume: bool = False,
    encoder: Encoder | None = None,
    on_step: StepCallback | None = None,
) -> Checkpoint:
    """
    Train a model from a configuration, optionally resuming its run directory.

    Args:
        config: Training configuration
        resume: Continue from ``<output_dir>/checkpoints/latest.mccw`` when present
        encoder: Preloaded encoder
        on_step: Per-step callback

    Returns:
        Final checkpoint (the initial one untouched when ``steps`` is 0)
    """
    latest = RunPaths(config.output_dir).latest
    if resume and latest.exists():
        checkpoint = Checkpoint.load(latest)
        checkpoint.config = config
        trainer = Trainer.from_checkpoint(checkpoint, encoder)
        logger.info("Resuming %s at step %d", config.output_dir, trainer.step)
    else:
        trainer = Trainer(config, encoder)
    return trainer.fit(on_step)
