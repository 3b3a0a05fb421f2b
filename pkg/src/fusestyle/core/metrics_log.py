"""Per-step metrics log (newline-delimited JSON) and its analysis."""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import polars as pl

from ..errors import MetricsLogError, RunIOError
from ..models.reports import LossBundle, MetricsRecord

TERMS = ("content", "style", "identity", "illumination", "total")


def append_record(path: Path, step: int, bundle: LossBundle) -> MetricsRecord:
    """
    Append one step's losses to the metrics file.

    Raises:
        RunIOError: The write failed (disk full, permissions), with the step
    """
    record = MetricsRecord(step=step, **bundle.model_dump())
    try:
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(record.model_dump_json() + "\n")
    except OSError as e:
        raise RunIOError(f"Writing metrics for step {step} to {path} failed: {e}") from e
    return record


def read_records(path: Path) -> list[MetricsRecord]:
    """Parse every record of a metrics file."""
    with open(path, encoding="utf-8") as fh:
        return [MetricsRecord.model_validate_json(line) for line in fh if line.strip()]


def truncate_after(path: Path, step: int) -> int:
    """
    Drop records newer than ``step`` (used when resuming from a checkpoint).

    Returns:
        Number of records removed
    """
    if not path.exists():
        return 0
    records = read_records(path)
    kept = [r for r in records if r.step <= step]
    path.write_text("".join(r.model_dump_json() + "\n" for r in kept), encoding="utf-8")
    return len(records) - len(kept)


def load_frame(path: Path) -> pl.DataFrame:
    """
    Load a metrics file as a DataFrame sorted by step.

    Raises:
        MetricsLogError: The file is blank (a restarted run truncates it) or malformed
    """
    if not path.read_text(encoding="utf-8").strip():
        raise MetricsLogError(f"No metrics records in {path}")
    try:
        return pl.read_ndjson(path).sort("step")
    except pl.exceptions.PolarsError as e:
        raise MetricsLogError(f"Unreadable metrics file {path}: {e}") from e


def smoothed(frame: pl.DataFrame, window: int = 10) -> pl.DataFrame:
    """Trailing rolling mean of every loss term."""
    return frame.select(
        pl.col("step"),
        *[pl.col(term).rolling_mean(window_size=window, min_samples=1) for term in TERMS],
    )


@dataclass(frozen=True)
class TermTrend:
    """Smoothed value of one loss term at a reference step and at the last step."""

    term: str
    start_step: int
    start: float
    end_step: int
    end: float

    @property
    def ratio(self) -> float:
        """end / start (inf when start is zero and end is not)."""
        if self.start == 0:
            return 1.0 if self.end == 0 else float("inf")
        return self.end / self.start


def summarize(path: Path, window: int = 10, start_step: int = 10) -> list[TermTrend]:
    """
    Compare smoothed losses at ``start_step`` with those at the last logged step.

    Args:
        path: metrics.jsonl
        window: Rolling-mean window
        start_step: Reference step (clamped to the logged range)

    Returns:
        One TermTrend per loss term
    """
    frame = smoothed(load_frame(path), window)
    first = frame.filter(pl.col("step") >= start_step).head(1)
    if first.is_empty():
        first = frame.head(1)
    last = frame.tail(1)
    return [
        TermTrend(
            term=term,
            start_step=int(first["step"][0]),
            start=float(first[term][0]),
            end_step=int(last["step"][0]),
            end=float(last[term][0]),
        )
        for term in TERMS
    ]
