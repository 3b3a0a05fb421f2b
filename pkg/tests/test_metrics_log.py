"""Tests for the metrics log."""

import pytest

from fusestyle.core import metrics_log
from fusestyle.core.paths import RunPaths
from fusestyle.errors import MetricsLogError
from fusestyle.models.reports import LossBundle


def bundle(total: float) -> LossBundle:
    return LossBundle(content=total, style=0.0, identity=0.0, illumination=0.0, total=total)


class TestLoadFrame:
    """Tests for reading metrics into a frame."""

    def test_blank_file(self, tmp_path):
        """Should raise MetricsLogError for a file truncated to nothing."""
        path = tmp_path / "metrics.jsonl"
        path.write_text("\n")
        with pytest.raises(MetricsLogError, match="No metrics records"):
            metrics_log.load_frame(path)

    def test_truncated_run_summary(self, tmp_path):
        """Should refuse to summarize after a restart dropped every record."""
        path = tmp_path / "metrics.jsonl"
        metrics_log.append_record(path, 1, bundle(2.0))
        assert metrics_log.truncate_after(path, 0) == 1
        with pytest.raises(MetricsLogError):
            metrics_log.summarize(path)

    def test_sorted_by_step(self, tmp_path):
        """Should order records by step."""
        path = tmp_path / "metrics.jsonl"
        for step in (3, 1, 2):
            metrics_log.append_record(path, step, bundle(float(step)))
        assert metrics_log.load_frame(path)["step"].to_list() == [1, 2, 3]


class TestFindRunRoot:
    """Tests for resolving a path to its run directory."""

    def test_from_checkpoint(self, tmp_path):
        """Should walk up from a checkpoint to the run holding the metrics."""
        paths = RunPaths(tmp_path / "run")
        paths.ensure_dirs()
        paths.metrics_file.write_text("")
        assert RunPaths.find_run_root(paths.checkpoint_for(5)) == paths.root

    def test_run_itself(self, tmp_path):
        """Should accept the run directory directly."""
        paths = RunPaths(tmp_path / "run")
        paths.ensure_dirs()
        paths.config_file.write_text("")
        assert RunPaths.find_run_root(paths.root) == paths.root

    def test_outside_any_run(self, tmp_path):
        """Should return None when no parent looks like a run."""
        (tmp_path / "loose").mkdir()
        assert RunPaths.find_run_root(tmp_path / "loose") is None
