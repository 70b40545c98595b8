import csv
import json
import os

import pytest

from cell_config import MonitorSettings
from coupler import HaltTag, StepOptions, run
from current_profile import CurrentProfile
from diagnostics import SERIES_COLUMNS
from report_writer import SNAPSHOT_COLUMNS, ReportWriter


@pytest.fixture(scope="module")
def short_run(reference_config, reference_mesh, reference_state):
    opts = StepOptions.from_config(reference_config, snapshot_every=2)
    profile = CurrentProfile.constant(0.5, 2.0)
    return opts, run(reference_state, profile, reference_config, reference_mesh, opts)


def read_rows(file: str):
    with open(file, newline="") as fh:
        return list(csv.reader(fh))


def test_writes_every_output(tmp_path, reference_config, reference_mesh, short_run):
    opts, series = short_run
    writer = ReportWriter(str(tmp_path / "out"), reference_config, reference_mesh, opts)
    ledger = writer.write_all(series)
    assert ledger is not None and ledger.matched

    rows = read_rows(writer.series_file)
    assert rows[0] == SERIES_COLUMNS
    assert len(rows) == len(series.records) + 1
    assert float(rows[-1][0]) == 2.0

    with open(writer.report_file) as fh:
        report = json.load(fh)
    assert report["outcome"] == "completed"
    assert report["halt"] is None
    assert report["t_final"] == 2.0
    assert report["steps"] == len(series.reports)
    assert report["charge"] == pytest.approx(1.0)
    assert report["solver"]["flux_mode"] == "exponential"
    assert report["config"]["geometry"]["L1"] == 1.0
    assert report["ledger"]["matched"] is True

    with open(writer.summary_file) as fh:
        summary = fh.read()
    assert "Outcome: **completed**" in summary
    assert "## Conservation" in summary
    assert "## Halt" not in summary


def test_snapshots(tmp_path, reference_config, reference_mesh, short_run):
    opts, series = short_run
    writer = ReportWriter(str(tmp_path), reference_config, reference_mesh, opts)
    writer.write_snapshots(series)
    index = read_rows(os.path.join(str(tmp_path), "snapshots", "index.csv"))
    assert index[0] == ["index", "t", "I", "V"]
    assert [int(row[0]) for row in index[1:]] == [s.index for s in series.snapshots]
    assert index[1][0] == "0"
    for row in index[1:]:
        k = int(row[0])
        # the voltage is recomputed from the stored state
        assert float(row[3]) == pytest.approx(series.records[k].V, abs=1e-12)
        cells = read_rows(os.path.join(str(tmp_path), "snapshots", f"{k:04d}.csv"))
        assert cells[0] == SNAPSHOT_COLUMNS
        assert len(cells) == reference_mesh.size + 1


def test_halt_in_summary(tmp_path, reference_config, reference_mesh, reference_state):
    opts = StepOptions.from_config(reference_config, dt_min=1e-3, max_picard=1)
    series = run(reference_state, CurrentProfile.constant(0.5, 1.0), reference_config, reference_mesh, opts)
    assert series.halt is not None
    writer = ReportWriter(str(tmp_path), reference_config, reference_mesh, opts)
    writer.write_all(series)
    with open(writer.report_file) as fh:
        report = json.load(fh)
    assert report["outcome"] == "halted"
    assert report["halt"]["tag"] == "solver_failure"
    assert report["steps"] == 0
    with open(writer.summary_file) as fh:
        assert "`solver_failure`" in fh.read()


def test_monitor_halt_counts_the_last_step(tmp_path, reference_config, reference_mesh, reference_state):
    monitors = MonitorSettings(T_max=reference_state.T + 1e-7)
    opts = StepOptions.from_config(reference_config, monitors=monitors)
    series = run(reference_state, CurrentProfile.constant(0.5, 1.0), reference_config, reference_mesh, opts)
    assert series.halt.tag == HaltTag.T_UNBOUNDED
    assert series.reports[-1].halted is None
    writer = ReportWriter(str(tmp_path), reference_config, reference_mesh, opts)
    writer.write_all(series)
    with open(writer.report_file) as fh:
        report = json.load(fh)
    assert report["outcome"] == "halted"
    assert report["steps"] == len(series.reports) >= 1
    with open(writer.summary_file) as fh:
        assert f"({len(series.reports)} steps," in fh.read()
