import csv
import json
import logging
import os
from dataclasses import asdict
from typing import Optional

import chevron

from cell_config import CellConfig
from config_utils import to_plain
from coupler import StepOptions, TimeSeries
from diagnostics import SERIES_COLUMNS, Ledger, conservation_ledger, snapshot_rows, voltage_from_state
from mesh import Mesh

SNAPSHOT_COLUMNS = ["x", "region", "ce", "phie_li", "phie", "phis", "csB"]
SNAPSHOT_INDEX_COLUMNS = ["index", "t", "I", "V"]


class ReportWriter:
    def __init__(self, out_dir: str, config: CellConfig, mesh: Mesh, opts: StepOptions):
        self.out_dir = out_dir
        self.config = config
        self.mesh = mesh
        self.opts = opts
        self.script_dir = os.path.dirname(os.path.realpath(__file__))
        os.makedirs(out_dir, exist_ok=True)

    @property
    def series_file(self) -> str:
        return os.path.join(self.out_dir, "series.csv")

    @property
    def report_file(self) -> str:
        return os.path.join(self.out_dir, "report.json")

    @property
    def summary_file(self) -> str:
        return os.path.join(self.out_dir, "summary.md")

    def write_series(self, series: TimeSeries):
        with open(self.series_file, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(SERIES_COLUMNS)
            for record in series.records:
                writer.writerow([getattr(record, name) for name in SERIES_COLUMNS])
        logging.info(f"wrote {len(series.records)} records to {self.series_file}")

    def write_snapshots(self, series: TimeSeries):
        if not series.snapshots:
            return
        snap_dir = os.path.join(self.out_dir, "snapshots")
        os.makedirs(snap_dir, exist_ok=True)
        with open(os.path.join(snap_dir, "index.csv"), "w", newline="") as index:
            index_writer = csv.writer(index, lineterminator="\n")
            index_writer.writerow(SNAPSHOT_INDEX_COLUMNS)
            for snapshot in series.snapshots:
                file = os.path.join(snap_dir, f"{snapshot.index:04d}.csv")
                with open(file, "w", newline="") as fh:
                    writer = csv.writer(fh, lineterminator="\n")
                    writer.writerow(SNAPSHOT_COLUMNS)
                    writer.writerows(snapshot_rows(snapshot, self.mesh))
                V = voltage_from_state(snapshot.state, snapshot.current, self.config, self.mesh)
                index_writer.writerow([snapshot.index, snapshot.state.t, snapshot.current, V])
        logging.info(f"wrote {len(series.snapshots)} snapshots to {snap_dir}")

    def report(self, series: TimeSeries, ledger: Optional[Ledger]) -> dict:
        final = series.records[-1] if series.records else None
        return {
            "outcome": "completed" if series.halt is None else "halted",
            "halt": None if series.halt is None else series.halt.as_dict(),
            "t_final": None if series.final_state is None else series.final_state.t,
            "t_end": series.t_end,
            "steps": series.accepted_steps,
            "retries": sum(r.retries for r in series.reports),
            "max_picard_iters": max((r.picard_iters for r in series.reports), default=0),
            "max_newton_iters": max(
                (max(r.newton_iters, default=0) for r in series.reports), default=0
            ),
            "charge": series.charge,
            "final": None if final is None else asdict(final),
            "ledger": None if ledger is None else ledger.as_dict(),
            "solver": {
                "flux_mode": self.opts.mode.tag,
                "thermal_mode": self.config.thermal.mode,
                "dt0": self.opts.dt0,
                "picard_tol": self.opts.picard_tol,
                "newton_tol": self.opts.elliptic.newton_tol,
                "threads": self.opts.threads,
                "monitors": asdict(self.opts.monitors),
            },
            "config": self.config.raw,
        }

    def write_report(self, series: TimeSeries, ledger: Optional[Ledger]):
        with open(self.report_file, "w") as fh:
            json.dump(to_plain(self.report(series, ledger)), fh, indent=2)
        logging.info(f"wrote {self.report_file}")

    def load_template(self, name: str) -> str:
        with open(os.path.join(self.script_dir, "docs", name)) as fh:
            return fh.read()

    def write_summary(self, series: TimeSeries, ledger: Optional[Ledger]):
        final = series.records[-1] if series.records else None
        data = {
            "outcome": "completed" if series.halt is None else "halted",
            "halted": series.halt is not None,
            "halt": None if series.halt is None else series.halt.as_dict(),
            "t_final": f"{series.final_state.t:.6g}" if series.final_state else "-",
            "t_end": f"{series.t_end:.6g}",
            "steps": series.accepted_steps,
            "flux_mode": self.opts.mode.tag,
            "thermal_mode": self.config.thermal.mode,
            "final": None
            if final is None
            else {
                "V": f"{final.V:.6g}",
                "SOC": f"{final.SOC:.6g}",
                "SOC_pos": f"{final.SOC_pos:.6g}",
                "T": f"{final.T:.6g}",
            },
            "ledger": None
            if ledger is None
            else {
                "electrolyte_drift": f"{ledger.electrolyte_drift:.3e}",
                "solid_drift": f"{ledger.solid_drift:.3e}",
                "measured": f"{ledger.measured_net_variation:.3e}",
                "predicted": f"{ledger.predicted_net_variation:.3e}",
                "matched": "yes" if ledger.matched else "no",
            },
        }
        with open(self.summary_file, "w") as fh:
            fh.write(chevron.render(self.load_template("run_summary.md.mustache"), data))

    def write_all(self, series: TimeSeries) -> Optional[Ledger]:
        ledger = (
            conservation_ledger(series.states, self.config, self.mesh, series.charge)
            if series.states
            else None
        )
        self.write_series(series)
        self.write_snapshots(series)
        self.write_report(series, ledger)
        self.write_summary(series, ledger)
        return ledger
