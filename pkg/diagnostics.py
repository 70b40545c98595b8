from dataclasses import asdict, dataclass, fields
from typing import Dict, List, Sequence

import numpy as np

from cell_config import CellConfig
from cell_state import CellState
from mesh import CellGeometry, ELECTRODES, Mesh, Region
from potentials import PotentialSolution
from solid_diffusion import particle_mass

# relative tolerance of the Rs^2 alpha_s matching condition
MATCH_RTOL = 1e-12


def voltage(solution: PotentialSolution, current: float, geometry: CellGeometry) -> float:
    """V = phis(L) - phis(0) - Rf/A I."""
    return solution.phis_right - solution.phis_left - geometry.Rf / geometry.A * current


def solid_lithium(cs: Dict[Region, np.ndarray], mesh: Mesh) -> Dict[Region, float]:
    """Shell-volume weighted solid lithium per electrode, sum of h * int c r^2 dr."""
    totals = {}
    for region in ELECTRODES:
        masses = particle_mass(mesh.particles[region], cs[region])
        totals[region] = float(np.dot(mesh.widths[mesh.cells(region)], masses))
    return totals


def electrolyte_lithium(ce: np.ndarray, mesh: Mesh) -> float:
    return mesh.integrate(ce)


def soc(
    cs: Dict[Region, np.ndarray],
    config: CellConfig,
    mesh: Mesh,
    region: Region = Region.ANODE,
) -> float:
    """Normalized average lithium content of one electrode."""
    geometry = config.geometry
    length = geometry.L1 if region == Region.ANODE else geometry.cathode_length
    Rs = geometry.radius(region)
    total = solid_lithium(cs, mesh)[region]
    return 3.0 * total / (length * Rs**3 * config.kinetics.cs_max)


def compatibility_gap(solution: PotentialSolution, current: float, geometry: CellGeometry) -> float:
    g = current / geometry.A
    return max(abs(solution.anode_integral - g), abs(solution.cathode_integral + g))


@dataclass(frozen=True)
class TimeSeriesRecord:
    t: float
    I: float
    V: float
    SOC: float
    SOC_pos: float
    T: float
    ce_min: float
    ce_max: float
    csB_min: float
    csB_max: float
    ce_drift: float
    solid_drift: float
    compat_gap: float
    q_r: float
    q_j: float
    q_c: float
    q_e: float
    q_total: float
    dt: float
    picard_iters: int
    newton_iters: int


SERIES_COLUMNS = [f.name for f in fields(TimeSeriesRecord)]


@dataclass(frozen=True)
class Baseline:
    """Totals of the initial state that drifts are measured against."""

    electrolyte: float
    solid: float

    @classmethod
    def of(cls, state: CellState, mesh: Mesh) -> "Baseline":
        return cls(
            electrolyte=electrolyte_lithium(state.ce, mesh),
            solid=sum(solid_lithium(state.cs, mesh).values()),
        )


def make_record(
    state: CellState,
    solution: PotentialSolution,
    current: float,
    config: CellConfig,
    mesh: Mesh,
    baseline: Baseline,
    heat=None,
    dt: float = 0.0,
    picard_iters: int = 0,
    newton_iters: int = 0,
) -> TimeSeriesRecord:
    q = (0.0, 0.0, 0.0, 0.0) if heat is None else (heat.q_r, heat.q_j, heat.q_c, heat.q_e)
    solid = sum(solid_lithium(state.cs, mesh).values())
    return TimeSeriesRecord(
        t=state.t,
        I=current,
        V=voltage(solution, current, config.geometry),
        SOC=soc(state.cs, config, mesh, Region.ANODE),
        SOC_pos=soc(state.cs, config, mesh, Region.CATHODE),
        T=state.T,
        ce_min=float(np.min(state.ce)),
        ce_max=float(np.max(state.ce)),
        csB_min=float(np.min(state.csB)),
        csB_max=float(np.max(state.csB)),
        ce_drift=(electrolyte_lithium(state.ce, mesh) - baseline.electrolyte)
        / baseline.electrolyte,
        solid_drift=(solid - baseline.solid) / baseline.solid,
        compat_gap=compatibility_gap(solution, current, config.geometry),
        q_r=q[0],
        q_j=q[1],
        q_c=q[2],
        q_e=q[3],
        q_total=q[0] + q[1] + q[2] + q[3],
        dt=dt,
        picard_iters=picard_iters,
        newton_iters=newton_iters,
    )


@dataclass(frozen=True, eq=False)
class Snapshot:
    index: int
    current: float
    state: CellState
    solution: PotentialSolution


@dataclass(frozen=True)
class Ledger:
    electrolyte_initial: float
    electrolyte_final: float
    electrolyte_drift: float
    solid_initial: Dict[str, float]
    solid_final: Dict[str, float]
    solid_drift: float
    measured_net_variation: float
    predicted_net_variation: float
    exchange_residual: float
    matched: bool

    def as_dict(self) -> dict:
        return asdict(self)


def conservation_ledger(
    states: Sequence[CellState], config: CellConfig, mesh: Mesh, charge: float
) -> Ledger:
    """Conservation bookkeeping over stored states.

    ``charge`` is the integral of I over the run. Drifts are the largest
    relative deviations from the first state.
    """
    first, last = states[0], states[-1]
    e0 = electrolyte_lithium(first.ce, mesh)
    electrolyte = [electrolyte_lithium(s.ce, mesh) for s in states]
    s0 = solid_lithium(first.cs, mesh)
    solids = [sum(solid_lithium(s.cs, mesh).values()) for s in states]
    total0 = sum(s0.values())
    s1 = solid_lithium(last.cs, mesh)

    transport = config.transport
    geometry = config.geometry
    weight_neg = geometry.Rs_neg**2 * transport.alpha_s_neg
    weight_pos = geometry.Rs_pos**2 * transport.alpha_s_pos
    predicted = (weight_pos - weight_neg) * charge / geometry.A
    measured = sum(s1.values()) - total0
    return Ledger(
        electrolyte_initial=e0,
        electrolyte_final=electrolyte[-1],
        electrolyte_drift=max(abs(e - e0) for e in electrolyte) / e0,
        solid_initial={r.value: v for r, v in s0.items()},
        solid_final={r.value: v for r, v in s1.items()},
        solid_drift=max(abs(s - total0) for s in solids) / total0,
        measured_net_variation=measured,
        predicted_net_variation=predicted,
        exchange_residual=measured - predicted,
        matched=abs(weight_pos - weight_neg) <= MATCH_RTOL * max(weight_pos, weight_neg),
    )


def snapshot_rows(snapshot: Snapshot, mesh: Mesh) -> List[List[float]]:
    """Per-cell rows x, region, ce, phie_li, phie, phis, csB; NaN off the electrodes."""
    state = snapshot.state
    phis = np.full(mesh.size, np.nan)
    phis[mesh.electrode_cells] = state.phis
    csB = np.full(mesh.size, np.nan)
    csB[mesh.electrode_cells] = state.csB
    return [
        [mesh.centers[k], mesh.regions[k], state.ce[k], state.phie_li[k], state.phie[k], phis[k], csB[k]]
        for k in range(mesh.size)
    ]


def voltage_from_state(
    state: CellState, current: float, config: CellConfig, mesh: Mesh
) -> float:
    """Voltage rebuilt from stored solid potentials with the boundary flux over half a cell."""
    g = current / config.geometry.A
    sigma = config.transport.sigma
    left = state.phis[0] + g * mesh.widths[0] / (2.0 * sigma[Region.ANODE])
    right = state.phis[-1] - g * mesh.widths[-1] / (2.0 * sigma[Region.CATHODE])
    return right - left - config.geometry.Rf / config.geometry.A * current

