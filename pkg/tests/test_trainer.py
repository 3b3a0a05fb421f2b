"""Tests for the training loop, checkpoints and resumption."""

import shutil

import pytest
import torch

from fusestyle.core import metrics_log
from fusestyle.core.losses import LossTerms
from fusestyle.core.model import build_generator
from fusestyle.core.trainer import Checkpoint, Trainer, fit
from fusestyle.errors import NonFiniteLossError
from fusestyle.models.config import LossWeights


def fixed_batch(seed: int = 0) -> tuple[torch.Tensor, torch.Tensor]:
    gen = torch.Generator().manual_seed(seed)
    return torch.rand(2, 3, 16, 16, generator=gen), torch.rand(2, 3, 16, 16, generator=gen)


def collect(config, encoder, **kwargs):
    """Run fit and return the per-step bundles."""
    bundles = []
    final = fit(config, encoder=encoder, on_step=lambda step, b: bundles.append((step, b)), **kwargs)
    return final, bundles


class TestTrainStep:
    """Tests for single optimization steps."""

    def test_identical_steps_from_same_state(self, tiny_config, tiny_encoder):
        """Should give identical bundles for two runs from the same seed."""
        content, style = fixed_batch()
        first = Trainer(tiny_config, tiny_encoder).train_step(content, style)
        second = Trainer(tiny_config, tiny_encoder).train_step(content, style)
        assert first == second

    def test_updates_only_trainable_parts(self, tiny_trainer):
        """Should change decoder and correlation weights but not the encoder."""
        encoder_sum = tiny_trainer.encoder.checksum()
        before = {k: v.clone() for k, v in tiny_trainer.model.state_records().items()}
        tiny_trainer.train_step(*fixed_batch())
        after = tiny_trainer.model.state_records()
        assert tiny_trainer.encoder.checksum() == encoder_sum
        assert any(not torch.equal(before[k], after[k]) for k in before if k.startswith("decoder."))
        assert any(not torch.equal(before[k], after[k]) for k in before if k.startswith("mcc."))
        assert tiny_trainer.step == 1

    def test_zero_illumination_weight(self, tiny_config, tiny_encoder):
        """Should report the illumination term but exclude it from the total."""
        config = tiny_config.model_copy(update={"loss": LossWeights(illumination=0.0)})
        bundle = Trainer(config, tiny_encoder).train_step(*fixed_batch())
        assert bundle.illumination > 0.0
        expected = 4.0 * bundle.content + 15.0 * bundle.style + 70.0 * bundle.identity
        assert bundle.total == pytest.approx(expected)

    def test_non_finite_aborts_without_update(self, tiny_trainer, monkeypatch):
        """Should name the term and step and leave the weights untouched."""
        before = {k: v.clone() for k, v in tiny_trainer.model.state_records().items()}

        def broken(content, style):
            zero = torch.zeros((), requires_grad=True)
            return LossTerms(zero, zero, zero * float("inf"), zero)

        monkeypatch.setattr(tiny_trainer, "compute_terms", broken)
        with pytest.raises(NonFiniteLossError, match="identity.*step 1"):
            tiny_trainer.train_step(*fixed_batch())
        after = tiny_trainer.model.state_records()
        assert all(torch.equal(before[k], after[k]) for k in before)
        assert tiny_trainer.step == 0


class TestCheckpoint:
    """Tests for checkpoint capture and persistence."""

    def test_round_trip_is_lossless(self, tiny_trainer, tiny_encoder, tmp_path):
        """Should reproduce forward outputs and optimizer state after save and load."""
        tiny_trainer.train_step(*fixed_batch())
        path = tmp_path / "c.mccw"
        tiny_trainer.checkpoint().save(path)
        restored = Trainer.from_checkpoint(Checkpoint.load(path), tiny_encoder)

        content, style = fixed_batch(1)
        with torch.no_grad():
            assert torch.equal(tiny_trainer.model(content, style), restored.model(content, style))
        original = tiny_trainer.optimizer.state_dict()["state"]
        loaded = restored.optimizer.state_dict()["state"]
        for index, state in original.items():
            for key, value in state.items():
                assert torch.equal(torch.as_tensor(value), torch.as_tensor(loaded[index][key]))
        assert restored.step == 1
        assert restored.data_rng.bit_generator.state == tiny_trainer.data_rng.bit_generator.state
        assert torch.equal(restored.noise_rng.get_state(), tiny_trainer.noise_rng.get_state())

    def test_config_snapshot(self, tiny_trainer, tmp_path):
        """Should restore the exact config from the snapshot."""
        path = tmp_path / "c.mccw"
        tiny_trainer.checkpoint().save(path)
        assert Checkpoint.load(path).config == tiny_trainer.config

    def test_next_step_matches_after_reload(self, tiny_trainer, tiny_encoder, tmp_path):
        """Should give the same next bundle from a reloaded checkpoint."""
        tiny_trainer.train_step(*fixed_batch())
        path = tmp_path / "c.mccw"
        tiny_trainer.checkpoint().save(path)
        restored = Trainer.from_checkpoint(Checkpoint.load(path), tiny_encoder)
        batch = fixed_batch(2)
        assert tiny_trainer.train_step(*batch) == restored.train_step(*batch)


class TestFit:
    """Tests for whole runs."""

    def test_zero_steps_returns_initial_state(self, tiny_config, tiny_encoder):
        """Should return the untouched initial checkpoint and write nothing."""
        config = tiny_config.model_copy(update={"steps": 0})
        final, bundles = collect(config, tiny_encoder)
        fresh = build_generator(tiny_encoder, config.depth, config.mode, config.seed)
        assert final.step == 0 and bundles == []
        for tag, value in fresh.state_records().items():
            assert torch.equal(final.model[tag], value)
        assert not config.output_dir.exists()

    def test_run_layout(self, tiny_config, tiny_encoder):
        """Should write the config snapshot, metrics and periodic checkpoints."""
        final, bundles = collect(tiny_config, tiny_encoder)
        run = tiny_config.output_dir
        assert final.step == 4
        assert [step for step, _ in bundles] == [1, 2, 3, 4]
        assert (run / "config.toml").is_file()
        assert sorted(p.name for p in (run / "checkpoints").iterdir()) == [
            "latest.mccw",
            "step-00000002.mccw",
            "step-00000004.mccw",
        ]
        records = metrics_log.read_records(run / "metrics.jsonl")
        assert [r.step for r in records] == [1, 2, 3, 4]
        assert records[-1].total == bundles[-1][1].total

    def test_encoder_frozen_over_run(self, tiny_config, tiny_encoder):
        """Should leave the encoder checksum unchanged."""
        checksum = tiny_encoder.checksum()
        collect(tiny_config, tiny_encoder)
        assert tiny_encoder.checksum() == checksum

    def test_same_seed_same_trajectory(self, tiny_config, tiny_encoder, tmp_path):
        """Should reproduce every loss for the same seed and corpora."""
        _, first = collect(tiny_config, tiny_encoder)
        other = tiny_config.model_copy(update={"output_dir": tmp_path / "again"})
        _, second = collect(other, tiny_encoder)
        assert first == second

    def test_resume_continues_trajectory(self, tiny_config, tiny_encoder, tmp_path):
        """Should match the uninterrupted run's losses after resuming at step 2."""
        _, uninterrupted = collect(tiny_config, tiny_encoder)

        split = tiny_config.model_copy(update={"output_dir": tmp_path / "split", "steps": 2})
        collect(split, tiny_encoder)
        resumed_config = split.model_copy(update={"steps": 4})
        final, resumed = collect(resumed_config, tiny_encoder, resume=True)

        assert final.step == 4
        assert resumed == uninterrupted[2:]
        steps = [r.step for r in metrics_log.read_records(resumed_config.output_dir / "metrics.jsonl")]
        assert steps == [1, 2, 3, 4]

    def test_resume_drops_metrics_past_checkpoint(self, tiny_config, tiny_encoder):
        """Should discard metrics logged after the latest checkpoint."""
        config = tiny_config.model_copy(update={"steps": 3})
        collect(config, tiny_encoder)
        metrics = config.output_dir / "metrics.jsonl"
        assert len(metrics_log.read_records(metrics)) == 3

        checkpoints = config.output_dir / "checkpoints"
        shutil.copyfile(checkpoints / "step-00000002.mccw", checkpoints / "latest.mccw")

        final, bundles = collect(config, tiny_encoder, resume=True)
        assert final.step == 3
        assert [step for step, _ in bundles] == [3]
        assert [r.step for r in metrics_log.read_records(metrics)] == [1, 2, 3]
