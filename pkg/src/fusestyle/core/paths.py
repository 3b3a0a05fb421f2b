"""Path utilities for fusestyle."""

import os
from pathlib import Path


class RunPaths:
    """Layout of one training run directory."""

    CONFIG_FILE = Path("config.toml")
    METRICS_FILE = Path("metrics.jsonl")
    CHECKPOINT_DIR = Path("checkpoints")
    LATEST_CHECKPOINT = CHECKPOINT_DIR / "latest.mccw"

    # Global data paths (XDG-compliant)
    # Use $XDG_DATA_HOME/fusestyle or ~/.local/share/fusestyle
    _xdg_data = os.environ.get("XDG_DATA_HOME")
    GLOBAL_DATA_DIR = (
        Path(_xdg_data) / "fusestyle" if _xdg_data else Path.home() / ".local" / "share" / "fusestyle"
    )
    DEFAULT_ENCODER_WEIGHTS = GLOBAL_DATA_DIR / "vgg19.mccw"

    def __init__(self, root: Path) -> None:
        self.root = root

    @property
    def config_file(self) -> Path:
        """Config snapshot written when the run starts."""
        return self.root / self.CONFIG_FILE

    @property
    def metrics_file(self) -> Path:
        """Newline-delimited per-step loss records."""
        return self.root / self.METRICS_FILE

    @property
    def checkpoints_dir(self) -> Path:
        return self.root / self.CHECKPOINT_DIR

    @property
    def latest(self) -> Path:
        """Most recent checkpoint of the run."""
        return self.root / self.LATEST_CHECKPOINT

    def checkpoint_for(self, step: int) -> Path:
        """
        Path of the checkpoint taken after ``step`` updates.

        Args:
            step: Completed optimizer steps

        Returns:
            ``checkpoints/step-XXXXXXXX.mccw``
        """
        return self.checkpoints_dir / f"step-{step:08d}.mccw"

    def ensure_dirs(self) -> None:
        """Ensure the run and checkpoint directories exist."""
        self.checkpoints_dir.mkdir(parents=True, exist_ok=True)

    @classmethod
    def find_run_root(cls, start_path: Path) -> Path | None:
        """
        Find the run directory containing a path (a checkpoint or the run itself).

        Args:
            start_path: Run directory, checkpoint file, or anything below a run

        Returns:
            Path to the run directory or None if not found
        """
        current = start_path if start_path.is_dir() else start_path.parent
        for parent in [current, *current.parents]:
            if (parent / cls.METRICS_FILE).exists() or (parent / cls.CONFIG_FILE).exists():
                return parent
        return None

    @classmethod
    def resolve_encoder_weights(cls, configured: Path) -> Path:
        """
        Pick the encoder weight file: the configured path if present, else the user default.

        Args:
            configured: Path from a config or checkpoint snapshot

        Returns:
            Existing weight file, or ``configured`` unchanged so the loader can
            report it as missing
        """
        if configured.exists():
            return configured
        if cls.DEFAULT_ENCODER_WEIGHTS.exists():
            return cls.DEFAULT_ENCODER_WEIGHTS
        return configured
