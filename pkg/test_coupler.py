import dataclasses
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

import coupler
from cell_config import CellConfig, MonitorSettings
from cell_state import CellState, initial_state
from conftest import make_config
from coupler import (
    HaltReason,
    HaltTag,
    StepOptions,
    StepReport,
    TimeStepController,
    check_monitors,
    picard_step,
    run,
)
from current_profile import CurrentProfile
from kinetics import FluxMode
from mesh import Mesh, build_mesh
from thermal import temperature_barriers

CONCENTRATION_OR_POTENTIAL = {
    HaltTag.CSB_MIN_ZERO,
    HaltTag.CSB_MAX_SATURATION,
    HaltTag.CE_MIN_ZERO,
    HaltTag.CE_UNBOUNDED,
    HaltTag.POTENTIAL_DIVERGENCE,
}


@pytest.fixture(scope="module")
def cycle(reference_config: CellConfig, reference_mesh: Mesh, reference_state: CellState):
    """Charge/discharge cycle with a fixed step of 0.1, a thousand steps."""
    opts = StepOptions.from_config(reference_config, dt0=0.1, dt_max=0.1)
    return run(reference_state, reference_config.profile, reference_config, reference_mesh, opts)


def test_cycle_completes(cycle):
    assert cycle.halt is None
    assert cycle.completed
    assert cycle.final_state.t == 100.0
    assert len(cycle.reports) >= 999
    assert abs(cycle.charge) < 1e-9
    # steps land on the current switch
    assert 50.0 in cycle.step_times


def test_cycle_conserves_lithium(cycle):
    final = cycle.records[-1]
    assert max(abs(r.ce_drift) for r in cycle.records) <= 1e-8
    assert max(abs(r.solid_drift) for r in cycle.records) <= 1e-8
    assert final.SOC == pytest.approx(0.5, abs=1e-6)
    assert min(r.SOC for r in cycle.records) == pytest.approx(0.25, abs=1e-3)


def test_cycle_solver_statistics(cycle):
    assert max(r.compat_gap for r in cycle.records) <= 1e-8
    assert max(max(rep.newton_iters) for rep in cycle.reports) <= 15
    assert max(rep.picard_iters for rep in cycle.reports) <= 25
    for rep in cycle.reports:
        assert all(ratio < 1.0 for ratio in rep.contraction_ratios), rep.picard_history
        assert abs(rep.electrolyte_residual) <= 1e-12


def test_cycle_current_switches_sign(cycle):
    before = [r for r in cycle.records if 0 < r.t <= 50.0]
    after = [r for r in cycle.records if r.t > 50.0]
    assert all(r.I == 0.5 for r in before)
    assert all(r.I == -0.5 for r in after)
    # the anode empties while charging and fills up again
    assert before[-1].SOC < before[0].SOC
    assert after[-1].SOC > after[0].SOC


def test_picard_step(reference_config, reference_mesh, reference_state):
    opts = StepOptions.from_config(reference_config)
    profile = reference_config.profile
    iters = []
    for dt in (0.2, 0.1, 0.05):
        state, solution, report = picard_step(
            reference_state, profile, reference_config, reference_mesh, opts, dt
        )
        assert report.halted is None and report.retries == 0
        assert state.t == pytest.approx(dt)
        assert report.current == 0.5
        assert report.picard_iters >= 2
        assert report.compat_gap <= 1e-8
        assert state.T > reference_state.T
        iters.append(report.picard_iters)
    # smaller steps never need more sweeps
    assert iters == sorted(iters, reverse=True)


def test_picard_step_lands_exactly(reference_config, reference_mesh, reference_state):
    opts = StepOptions.from_config(reference_config)
    state, _, report = picard_step(
        reference_state, reference_config.profile, reference_config, reference_mesh, opts, 0.1, land_at=0.1
    )
    assert state.t == 0.1
    assert report.t == 0.1


def test_step_failure_halts_with_old_state(reference_config, reference_mesh, reference_state):
    opts = StepOptions.from_config(reference_config, dt_min=1e-3, max_picard=1)
    state, _, report = picard_step(
        reference_state, reference_config.profile, reference_config, reference_mesh, opts, 0.1
    )
    assert state is reference_state
    assert report.retries == 7
    assert report.halted.tag == HaltTag.SOLVER_FAILURE
    assert report.halted.t == 0.0
    assert "StepFailure: Picard did not converge in 1 sweeps" in report.halted.detail


def test_picard_step_without_reaction_takes_one_sweep(monkeypatch, reference_raw, reference_state):
    config = make_config(reference_raw, thermal={"mode": "zero"})
    mesh = build_mesh(config.geometry, config.mesh)
    real_solve = coupler.solve_potentials

    def no_reaction(system, *args):
        solution = real_solve(system, *args)
        return dataclasses.replace(
            solution, j=np.zeros_like(solution.j), eta=np.zeros_like(solution.eta)
        )

    monkeypatch.setattr(coupler, "solve_potentials", no_reaction)
    opts = StepOptions.from_config(config)
    state, _, report = picard_step(
        reference_state, CurrentProfile.constant(0.0, 1.0), config, mesh, opts, 0.5
    )
    assert report.halted is None
    assert report.picard_iters == 1
    assert_allclose(state.ce, reference_state.ce, rtol=0, atol=1e-14)
    assert_allclose(state.cs, reference_state.cs, rtol=0, atol=1e-14)
    assert state.T == pytest.approx(reference_state.T, abs=1e-12)


@pytest.mark.parametrize(
    "T_new, tag",
    [(math.inf, HaltTag.T_UNBOUNDED), (math.nan, HaltTag.T_UNBOUNDED), (-1.0, HaltTag.T_MIN_ZERO)],
)
def test_temperature_collapse_is_tagged_by_sign(
    monkeypatch, reference_config, reference_mesh, reference_state, T_new: float, tag: HaltTag
):
    monkeypatch.setattr(coupler, "step_temperature", lambda *args: (T_new, False))
    opts = StepOptions.from_config(reference_config)
    state, _, report = picard_step(
        reference_state, reference_config.profile, reference_config, reference_mesh, opts, 0.1
    )
    assert state is reference_state
    assert report.retries == 0
    assert report.halted.tag == tag
    assert report.halted.location == "cell"


def test_blow_up_in_exponential_mode(reference_config, reference_mesh, reference_state):
    # anode lithium lasts Rs/3 * cs / (Rs^2 alpha_s I / A) = 50 s at I=1
    profile = CurrentProfile.constant(1.0, 80.0)
    opts = StepOptions.from_config(reference_config)
    series = run(reference_state, profile, reference_config, reference_mesh, opts)
    assert series.halt is not None
    assert series.halt.tag == HaltTag.CSB_MIN_ZERO
    assert 40.0 <= series.halt.t <= 60.0
    node = int(series.halt.location.split()[2])
    assert node < reference_mesh.n_neg
    assert series.records[-1].t == series.halt.t
    assert series.halt.as_dict()["tag"] == "csB_min_zero"


def test_truncated_flux_never_blows_up_in_concentration(reference_raw: dict):
    config = make_config(reference_raw, kinetics={"flux_mode": "truncated"})
    mesh = build_mesh(config.geometry, config.mesh)
    state = initial_state(config, mesh)
    opts = StepOptions.from_config(config)
    assert opts.mode == FluxMode.truncated(8.0)
    series = run(state, CurrentProfile.constant(1.0, 80.0), config, mesh, opts)
    if series.halt is not None:
        assert series.halt.tag not in CONCENTRATION_OR_POTENTIAL
    for record in series.records:
        assert record.csB_min > 1e-6 * config.kinetics.cs_max


def test_truncated_flux_with_linear_heat_runs_to_the_end(reference_raw: dict):
    config = make_config(
        reference_raw, kinetics={"flux_mode": "truncated"}, thermal={"mode": "linear-truncated"}
    )
    mesh = build_mesh(config.geometry, config.mesh)
    state = initial_state(config, mesh)
    series = run(state, config.profile, config, mesh, StepOptions.from_config(config))
    assert series.halt is None
    assert series.completed
    low, high = temperature_barriers(config.initial.T0, config.thermal)
    assert all(low <= r.T <= high for r in series.records)


def test_monitor_order(reference_state: CellState, reference_mesh: Mesh):
    csB = reference_state.csB.copy()
    csB[3] = 0.0
    ce = reference_state.ce.copy()
    ce[20] = 0.0
    state = dataclasses.replace(reference_state, csB=csB, ce=ce)
    halt = check_monitors(state, None, MonitorSettings(), 0.9, 1.0, reference_mesh)
    assert halt.tag == HaltTag.CSB_MIN_ZERO
    assert halt.location.startswith("electrode node 3 (x=")
    state = dataclasses.replace(reference_state, ce=ce)
    halt = check_monitors(state, None, MonitorSettings(), 0.9, 1.0)
    assert halt == HaltReason(HaltTag.CE_MIN_ZERO, 0.0, "cell 20", 0.0)
    hot = dataclasses.replace(reference_state, T=6000.0)
    assert check_monitors(hot, None, MonitorSettings(), 0.9, 1.0).tag == HaltTag.T_UNBOUNDED
    assert check_monitors(reference_state, None, MonitorSettings(), 0.9, 1.0) is None


def test_controller_lands_on_breakpoints():
    controller = TimeStepController(0.3, 1e-8, 1.0, (1.0, 2.0), 25)
    assert controller.propose(0.0) == (0.3, None)
    assert controller.propose(0.8) == pytest.approx((0.2, 1.0))
    assert controller.propose(0.8)[1] == 1.0
    assert controller.propose(1.0) == (0.3, None)


def test_controller_growth_and_cuts():
    controller = TimeStepController(0.1, 1e-8, 0.13, (10.0,), 25)
    for _ in range(5):
        controller.accepted(StepReport(t=0.0, dt=0.1, picard_iters=3))
    assert controller.dt == pytest.approx(0.12)
    for _ in range(5):
        controller.accepted(StepReport(t=0.0, dt=0.12, picard_iters=3))
    assert controller.dt == 0.13
    controller.accepted(StepReport(t=0.0, dt=0.0375, picard_iters=3, retries=2))
    assert controller.dt == 0.0375
    with pytest.raises(ValueError, match="dt_min=1.0 exceeds"):
        TimeStepController(0.1, 1.0, 1.0, (), 25)
