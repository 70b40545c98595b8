import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, List, Optional, Tuple

import numpy as np

from cell_config import CellConfig, MonitorSettings
from cell_state import CellState, admissibility_violation, state_from_solution
from current_profile import CurrentProfile
from diagnostics import Baseline, Snapshot, TimeSeriesRecord, compatibility_gap, make_record
from electrolyte import electrolyte_faces, step_electrolyte
from kinetics import FluxMode, KineticsDomainError
from mesh import Mesh, Region
from potentials import (
    EllipticOptions,
    PotentialSolution,
    SolverFailure,
    StateSlice,
    potential_system,
    solve_potentials,
)
from solid_diffusion import ParticleSolveError, boundary_trace, step_all_particles
from thermal import HeatBreakdown, heat_sources, step_temperature


class HaltTag(str, Enum):
    CSB_MIN_ZERO = "csB_min_zero"
    CSB_MAX_SATURATION = "csB_max_saturation"
    CE_MIN_ZERO = "ce_min_zero"
    CE_UNBOUNDED = "ce_unbounded"
    T_MIN_ZERO = "T_min_zero"
    T_UNBOUNDED = "T_unbounded"
    POTENTIAL_DIVERGENCE = "potential_divergence"
    SOLVER_FAILURE = "solver_failure"


@dataclass(frozen=True)
class HaltReason:
    tag: HaltTag
    t: float
    location: Optional[str] = None
    value: Optional[float] = None
    detail: str = ""

    def as_dict(self) -> dict:
        return {
            "tag": self.tag.value,
            "t": self.t,
            "location": self.location,
            "value": self.value,
            "detail": self.detail,
        }


class StepFailure(Exception):
    pass


class _TemperatureCollapse(Exception):
    def __init__(self, T: float):
        super().__init__(f"temperature update gave T = {T}")
        self.T = T


@dataclass(frozen=True)
class StepOptions:
    dt0: float = 1.0
    dt_min: float = 1e-8
    dt_max: float = math.inf
    picard_tol: float = 1e-9
    max_picard: int = 25
    elliptic: EllipticOptions = EllipticOptions()
    threads: int = 1
    monitors: MonitorSettings = MonitorSettings()
    record_every: int = 1
    snapshot_every: int = 0
    mode: FluxMode = FluxMode()

    @classmethod
    def from_config(cls, config: CellConfig, **overrides) -> "StepOptions":
        s = config.solver
        values = dict(
            dt0=s.dt0,
            dt_min=s.dt_min,
            dt_max=s.dt_max,
            picard_tol=s.picard_tol,
            max_picard=s.max_picard,
            elliptic=EllipticOptions.from_settings(s),
            threads=s.threads,
            monitors=s.monitors,
            record_every=s.record_every,
            snapshot_every=s.snapshot_every,
            mode=FluxMode.from_params(config.kinetics),
        )
        values.update(overrides)
        return cls(**values)


@dataclass
class StepReport:
    t: float
    dt: float
    current: float = 0.0
    picard_iters: int = 0
    picard_residual: float = math.inf
    picard_history: List[float] = field(default_factory=list)
    newton_iters: List[int] = field(default_factory=list)
    retries: int = 0
    compat_gap: float = 0.0
    electrolyte_residual: float = 0.0
    heat: HeatBreakdown = HeatBreakdown()
    halted: Optional[HaltReason] = None

    @property
    def contraction_ratios(self) -> List[float]:
        h = self.picard_history
        return [b / a for a, b in zip(h[:-1], h[1:]) if a > 0]


def _picard_residual(
    ce: np.ndarray, csB: np.ndarray, T: float, ce_k: np.ndarray, csB_k: np.ndarray, T_k: float,
    cs_max: float,
) -> float:
    return max(
        float(np.max(np.abs(ce - ce_k))) / float(np.max(np.abs(ce_k))),
        float(np.max(np.abs(csB - csB_k))) / cs_max,
        abs(T - T_k) / T_k,
    )


def _sweeps(
    state: CellState,
    t_new: float,
    current: float,
    dt: float,
    config: CellConfig,
    mesh: Mesh,
    opts: StepOptions,
    faces: np.ndarray,
    report: StepReport,
) -> Tuple[CellState, PotentialSolution]:
    """Gauss-Seidel fixed-point sweeps of one step of size dt."""
    cs_max = config.kinetics.cs_max
    ce_k, cs_k, csB_k, T_k = state.ce, state.cs, state.csB, state.T
    guess = (state.phie_li, state.phis)
    report.picard_history = []
    report.newton_iters = []
    for sweep in range(1, opts.max_picard + 1):
        system = potential_system(
            config, mesh, StateSlice(ce_k, csB_k, T_k), current, opts.mode
        )
        solution = solve_potentials(system, opts.elliptic, guess)
        report.newton_iters.append(solution.newton_iters)
        j = solution.j
        ce_new = step_electrolyte(state.ce, j, faces, mesh, config.transport.alpha_e, dt)
        cs_new = step_all_particles(
            state.cs, j[mesh.electrode_cells], config.transport, mesh, dt, opts.threads
        )
        csB_new = boundary_trace(cs_new, mesh)
        heat = heat_sources(system.state, solution, current, config, mesh)
        T_new, admissible = step_temperature(state.T, heat, config.thermal, dt)
        if not admissible:
            raise _TemperatureCollapse(T_new)
        problem = admissibility_violation(ce_new, cs_new, csB_new, T_new, cs_max, mesh)
        if problem is not None:
            raise StepFailure(f"Picard iterate {sweep} is inadmissible: {problem}")

        residual = _picard_residual(ce_new, csB_new, T_new, ce_k, csB_k, T_k, cs_max)
        report.picard_history.append(residual)
        ce_k, cs_k, csB_k, T_k = ce_new, cs_new, csB_new, T_new
        guess = (solution.phie_li, solution.phis)
        if residual < opts.picard_tol:
            report.picard_iters = sweep
            report.picard_residual = residual
            report.heat = heat
            report.compat_gap = compatibility_gap(solution, current, config.geometry)
            report.electrolyte_residual = (
                mesh.integrate(ce_k)
                - mesh.integrate(state.ce)
                - dt * config.transport.alpha_e * mesh.integrate(j)
            )
            new_state = state_from_solution(t_new, ce_k, cs_k, csB_k, T_k, solution)
            return new_state, solution
    raise StepFailure(
        f"Picard did not converge in {opts.max_picard} sweeps, residual {report.picard_history[-1]:.3e}"
    )


def picard_step(
    state: CellState,
    profile: CurrentProfile,
    config: CellConfig,
    mesh: Mesh,
    opts: StepOptions,
    dt: float,
    solution: Optional[PotentialSolution] = None,
    land_at: Optional[float] = None,
) -> Tuple[CellState, Optional[PotentialSolution], StepReport]:
    """Advance one step, halving dt on failure down to dt_min.

    ``land_at`` is the exact end time to use when the step is not cut.
    On a halt the input state and solution come back with ``report.halted`` set.
    """
    piece = profile.piece_index(state.t)
    faces = electrolyte_faces(config.transport, mesh)
    report = StepReport(t=state.t, dt=dt)
    attempt = dt
    while True:
        t_new = land_at if (attempt == dt and land_at is not None) else state.t + attempt
        current = profile.current(t_new, piece)
        report.dt = attempt
        report.current = current
        report.t = t_new
        try:
            new_state, new_solution = _sweeps(
                state, t_new, current, attempt, config, mesh, opts, faces, report
            )
            return new_state, new_solution, report
        except _TemperatureCollapse as e:
            if math.isfinite(e.T) and e.T <= 0:
                tag, detail = HaltTag.T_MIN_ZERO, "temperature update reached T <= 0"
            else:
                tag, detail = HaltTag.T_UNBOUNDED, "temperature update is not finite"
            report.halted = HaltReason(tag, t_new, "cell", e.T, detail)
            logging.info(f"halt at t={t_new:g}: {report.halted.tag.value}, T={e.T:g}")
            return state, solution, report
        except (
            SolverFailure,
            StepFailure,
            KineticsDomainError,
            ParticleSolveError,
            FloatingPointError,
        ) as e:
            cause = f"{type(e).__name__}: {e}"
            attempt *= 0.5
            report.retries += 1
            logging.debug(f"step at t={state.t:g} failed ({cause}), retrying with dt={attempt:g}")
            if attempt < opts.dt_min:
                report.halted = HaltReason(
                    HaltTag.SOLVER_FAILURE, state.t, None, attempt, cause
                )
                logging.info(f"halt at t={state.t:g}: solver_failure, {cause}")
                return state, solution, report
            if attempt < 0.1 * opts.dt0 <= 2 * attempt:
                logging.warning(f"time step cut below {0.1 * opts.dt0:g} at t={state.t:g}")


def check_monitors(
    state: CellState,
    solution: Optional[PotentialSolution],
    monitors: MonitorSettings,
    cs_max: float,
    ce0: float,
    mesh: Optional[Mesh] = None,
) -> Optional[HaltReason]:
    """First violated guard, in the order of the blow-up alternatives, or None."""

    def where(kind: str, k: int) -> str:
        if mesh is None:
            return f"{kind} {k}"
        x = mesh.centers[mesh.electrode_cells[k]] if kind == "electrode node" else mesh.centers[k]
        return f"{kind} {k} (x={x:.6g})"

    csB = state.csB
    k = int(np.argmin(csB))
    if csB[k] <= monitors.csB_margin * cs_max:
        return HaltReason(HaltTag.CSB_MIN_ZERO, state.t, where("electrode node", k), float(csB[k]))
    k = int(np.argmax(csB))
    if csB[k] >= (1.0 - monitors.csB_margin) * cs_max:
        return HaltReason(
            HaltTag.CSB_MAX_SATURATION, state.t, where("electrode node", k), float(csB[k])
        )
    k = int(np.argmin(state.ce))
    if state.ce[k] <= monitors.ce_floor_fraction * ce0:
        return HaltReason(HaltTag.CE_MIN_ZERO, state.t, where("cell", k), float(state.ce[k]))
    k = int(np.argmax(state.ce))
    if state.ce[k] >= monitors.ce_cap_factor * ce0:
        return HaltReason(HaltTag.CE_UNBOUNDED, state.t, where("cell", k), float(state.ce[k]))
    if state.T <= monitors.T_min:
        return HaltReason(HaltTag.T_MIN_ZERO, state.t, "cell", state.T)
    if state.T >= monitors.T_max:
        return HaltReason(HaltTag.T_UNBOUNDED, state.t, "cell", state.T)
    if solution is not None and solution.max_potential_gap >= monitors.potential_cap:
        return HaltReason(
            HaltTag.POTENTIAL_DIVERGENCE, state.t, "electrodes", solution.max_potential_gap
        )
    return None


class TimeStepController:
    """Step size from growth after easy steps, dt_max and the profile breakpoints."""

    def __init__(
        self,
        dt0: float,
        dt_min: float,
        dt_max: float,
        breakpoints,
        max_picard: int,
        growth: float = 1.2,
        easy_steps: int = 5,
        land_rtol: float = 1e-9,
    ):
        if not dt0 > 0:
            raise ValueError(f"Initial time step must be positive, got {dt0}")
        if not dt_min <= min(dt0, dt_max):
            raise ValueError(f"dt_min={dt_min} exceeds dt0={dt0} or dt_max={dt_max}")
        self.dt = min(dt0, dt_max)
        self.dt_min = dt_min
        self.dt_max = dt_max
        self.breakpoints = sorted(breakpoints)
        self.easy_picard = max_picard // 2
        self.growth = growth
        self.easy_steps = easy_steps
        self.land_rtol = land_rtol
        self.easy_count = 0

    def next_breakpoint(self, t: float) -> Optional[float]:
        for b in self.breakpoints:
            if b > t + self.land_rtol * self.dt:
                return b
        return None

    def propose(self, t: float) -> Tuple[float, Optional[float]]:
        """(dt, landing time) for a step starting at t."""
        dt = self.dt
        b = self.next_breakpoint(t)
        if b is not None and t + dt >= b - self.land_rtol * dt:
            return b - t, b
        return dt, None

    def accepted(self, report: StepReport):
        if report.retries:
            # keep the cut step
            self.dt = report.dt
            self.easy_count = 0
            return
        if report.picard_iters <= self.easy_picard:
            self.easy_count += 1
        else:
            self.easy_count = 0
        if self.easy_count >= self.easy_steps:
            self.dt = min(self.dt * self.growth, self.dt_max)
            self.easy_count = 0
            logging.debug(f"time step grown to {self.dt:g}")


@dataclass
class TimeSeries:
    records: List[TimeSeriesRecord] = field(default_factory=list)
    reports: List[StepReport] = field(default_factory=list)
    states: List[CellState] = field(default_factory=list)
    snapshots: List[Snapshot] = field(default_factory=list)
    halt: Optional[HaltReason] = None
    final_state: Optional[CellState] = None
    final_solution: Optional[PotentialSolution] = None
    charge: float = 0.0
    t_end: float = 0.0

    @property
    def completed(self) -> bool:
        return self.halt is None and self.final_state is not None and math.isclose(
            self.final_state.t, self.t_end, rel_tol=1e-12, abs_tol=0.0
        )

    @property
    def step_times(self) -> List[float]:
        return [r.t for r in self.reports]

    @property
    def accepted_steps(self) -> int:
        # a report with a halt is the rejected final attempt
        return sum(r.halted is None for r in self.reports)


def _restart(
    state: CellState,
    current: float,
    config: CellConfig,
    mesh: Mesh,
    opts: StepOptions,
) -> Tuple[CellState, PotentialSolution]:
    system = potential_system(config, mesh, state.slice, current, opts.mode)
    solution = solve_potentials(system, opts.elliptic, (state.phie_li, state.phis))
    return replace(
        state, phie_li=solution.phie_li, phis=solution.phis, phie=solution.phie
    ), solution


def run(
    state0: CellState,
    profile: CurrentProfile,
    config: CellConfig,
    mesh: Mesh,
    opts: StepOptions,
) -> TimeSeries:
    """Integrate from state0 to the end of the profile or until a halt."""
    series = TimeSeries(t_end=profile.t_end)
    controller = TimeStepController(
        opts.dt0, opts.dt_min, opts.dt_max, profile.breakpoints, opts.max_picard
    )
    baseline = Baseline.of(state0, mesh)
    ce0 = float(np.mean(state0.ce))
    cs_max = config.kinetics.cs_max
    tol = 1e-12 * profile.t_end
    state = state0
    solution: Optional[PotentialSolution] = None
    piece = -1
    step = 0
    logging.info(
        f"run to t={profile.t_end:g} with {len(profile.pieces)} current pieces, mode {opts.mode.tag}"
    )
    while True:
        k = profile.piece_index(state.t)
        if k != piece and state.t < profile.t_end - tol:
            current = profile.current(state.t, k)
            try:
                state, solution = _restart(state, current, config, mesh, opts)
            except (SolverFailure, KineticsDomainError) as e:
                series.halt = HaltReason(
                    HaltTag.SOLVER_FAILURE, state.t, None, None, f"{type(e).__name__}: {e}"
                )
                break
            if piece >= 0:
                logging.info(f"restart at breakpoint t={state.t:g} with I={current:g}")
            piece = k
            if step == 0:
                series.records.append(
                    make_record(state, solution, current, config, mesh, baseline)
                )
                series.states.append(state)
                if opts.snapshot_every:
                    series.snapshots.append(Snapshot(0, current, state, solution))
        if state.t >= profile.t_end - tol:
            break

        dt, land_at = controller.propose(state.t)
        new_state, new_solution, report = picard_step(
            state, profile, config, mesh, opts, dt, solution, land_at
        )
        series.reports.append(report)
        if report.halted is not None:
            series.halt = report.halted
            break
        controller.accepted(report)
        step += 1
        series.charge += report.current * report.dt
        state, solution = new_state, new_solution
        logging.debug(
            f"step {step}: t={state.t:.6g} dt={report.dt:.3g} picard={report.picard_iters}"
            f" newton={sum(report.newton_iters)}"
        )
        halt = check_monitors(state, solution, opts.monitors, cs_max, ce0, mesh)
        if step % opts.record_every == 0 or halt is not None or state.t >= profile.t_end - tol:
            series.records.append(
                make_record(
                    state,
                    solution,
                    report.current,
                    config,
                    mesh,
                    baseline,
                    report.heat,
                    report.dt,
                    report.picard_iters,
                    sum(report.newton_iters),
                )
            )
            series.states.append(state)
            if opts.snapshot_every and len(series.records) % opts.snapshot_every == 0:
                series.snapshots.append(
                    Snapshot(len(series.records) - 1, report.current, state, solution)
                )
        if halt is not None:
            series.halt = halt
            logging.info(f"halt at t={state.t:g}: {halt.tag.value} at {halt.location}")
            break

    series.final_state = state
    series.final_solution = solution
    logging.info(
        f"run finished at t={state.t:g} after {step} steps"
        + ("" if series.halt is None else f", halted: {series.halt.tag.value}")
    )
    return series
