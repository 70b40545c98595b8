import dataclasses

import numpy as np
import pytest

from cell_config import CellConfig
from cell_state import CellState
from conftest import make_config
from diagnostics import (
    SERIES_COLUMNS,
    Baseline,
    Snapshot,
    compatibility_gap,
    conservation_ledger,
    make_record,
    snapshot_rows,
    soc,
    voltage,
    voltage_from_state,
)
from kinetics import FluxMode
from mesh import Mesh, Region
from potentials import potential_system, solve_potentials


@pytest.fixture
def loaded(reference_config: CellConfig, reference_mesh: Mesh, reference_state: CellState):
    system = potential_system(
        reference_config, reference_mesh, reference_state.slice, 1.0, FluxMode.exponential()
    )
    return solve_potentials(system)


def test_voltage_formula(reference_config: CellConfig, loaded):
    geometry = dataclasses.replace(reference_config.geometry, Rf=0.0)
    solution = dataclasses.replace(loaded, phis_left=0.1, phis_right=4.2)
    assert voltage(solution, 1.0, geometry) == pytest.approx(4.1)
    geometry = dataclasses.replace(geometry, Rf=0.5)
    assert voltage(solution, 2.0, geometry) == pytest.approx(3.1)


def test_voltage_from_state(reference_config, reference_mesh, reference_state, loaded):
    state = dataclasses.replace(reference_state, phis=loaded.phis, phie_li=loaded.phie_li)
    assert voltage_from_state(state, 1.0, reference_config, reference_mesh) == pytest.approx(
        voltage(loaded, 1.0, reference_config.geometry), abs=1e-14
    )


def test_soc(reference_config: CellConfig, reference_mesh: Mesh, reference_state: CellState):
    assert soc(reference_state.cs, reference_config, reference_mesh) == pytest.approx(0.5, rel=1e-12)
    assert soc(reference_state.cs, reference_config, reference_mesh, Region.CATHODE) == pytest.approx(
        0.3, rel=1e-12
    )
    full = {region: np.full_like(values, 0.9) for region, values in reference_state.cs.items()}
    assert soc(full, reference_config, reference_mesh) == pytest.approx(1.0, rel=1e-12)
    # linear in x averages to one half on a uniform mesh
    centers = reference_mesh.centers[reference_mesh.cells(Region.ANODE)]
    ramp = dict(full)
    ramp[Region.ANODE] = np.repeat((0.9 * centers)[:, np.newaxis], 25, axis=1)
    assert soc(ramp, reference_config, reference_mesh) == pytest.approx(0.5, rel=1e-12)


def test_record(reference_config, reference_mesh, reference_state, loaded):
    baseline = Baseline.of(reference_state, reference_mesh)
    record = make_record(reference_state, loaded, 1.0, reference_config, reference_mesh, baseline)
    assert record.SOC == pytest.approx(0.5)
    assert record.SOC_pos == pytest.approx(0.3)
    assert record.ce_drift == 0.0 and record.solid_drift == 0.0
    assert record.compat_gap == compatibility_gap(loaded, 1.0, reference_config.geometry)
    assert record.compat_gap < 1e-8
    assert list(dataclasses.asdict(record)) == SERIES_COLUMNS
    assert SERIES_COLUMNS[:3] == ["t", "I", "V"]


def test_matched_ledger(reference_config, reference_mesh, reference_state):
    cs = {region: values.copy() for region, values in reference_state.cs.items()}
    # move the same amount of lithium from anode to cathode
    cs[Region.ANODE] -= 0.01
    cs[Region.CATHODE] += 0.01
    later = dataclasses.replace(reference_state, t=1.0, cs=cs, ce=reference_state.ce * 1.001)
    ledger = conservation_ledger([reference_state, later], reference_config, reference_mesh, 0.0)
    assert ledger.matched
    assert ledger.predicted_net_variation == 0.0
    assert abs(ledger.exchange_residual) < 1e-15
    assert ledger.electrolyte_drift == pytest.approx(1e-3)
    assert ledger.solid_final["anode"] < ledger.solid_initial["anode"]
    assert set(ledger.as_dict()["solid_final"]) == {"anode", "cathode"}


def test_mismatched_ledger_sign(reference_raw: dict, reference_mesh, reference_state):
    config = make_config(reference_raw, transport={"alpha_s_pos": 6.0e-4})
    ledger = conservation_ledger([reference_state, reference_state], config, reference_mesh, 10.0)
    assert not ledger.matched
    # R^2 (alpha_pos - alpha_neg) Q / A
    assert ledger.predicted_net_variation == pytest.approx(0.01 * 3.0e-4 * 10.0)
    assert ledger.exchange_residual == pytest.approx(-ledger.predicted_net_variation)


def test_snapshot_rows(reference_mesh, reference_state, loaded):
    rows = snapshot_rows(Snapshot(0, 1.0, reference_state, loaded), reference_mesh)
    assert len(rows) == 45
    assert rows[0][1] == "anode"
    assert np.isnan(rows[20][5]) and np.isnan(rows[20][6])
    assert rows[40][6] == pytest.approx(0.27)
