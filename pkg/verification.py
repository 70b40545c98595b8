import logging
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np
from scipy.linalg import eigh_tridiagonal

from cell_config import CellConfig, ThermalParams, parse_cell_config
from electrolyte import electrolyte_faces, step_electrolyte
from kinetics import FluxMode
from mesh import Mesh, MeshSpec, Region, build_mesh, build_particle_grid
from potentials import EllipticOptions, StateSlice, potential_system, solve_potentials
from solid_diffusion import particle_operator, step_particle
from thermal import NO_HEAT, relaxation, step_temperature

# observed orders must lie within this distance of the target
ORDER_TOLERANCE = 0.2

# first positive root of tan(z) = z, the slowest nonconstant particle mode
PARTICLE_ROOT = 4.493409457909064


@dataclass(frozen=True)
class ConvergenceStudy:
    suite: str
    name: str
    kind: str
    target: float
    resolutions: Sequence[float]
    errors: Sequence[float]

    @property
    def orders(self) -> List[float]:
        e = np.asarray(self.errors, dtype=float)
        n = np.asarray(self.resolutions, dtype=float)
        return list(np.log(e[:-1] / e[1:]) / np.log(n[1:] / n[:-1]))

    @property
    def observed(self) -> float:
        return float(self.orders[-1])

    @property
    def passed(self) -> bool:
        return abs(self.observed - self.target) <= ORDER_TOLERANCE

    def as_line(self) -> str:
        orders = ", ".join(f"{o:.3f}" for o in self.orders)
        status = "ok" if self.passed else "FAIL"
        return (
            f"{self.suite:16} {self.name:24} {self.kind:8} order {self.observed:.3f}"
            f" (target {self.target:.1f}; {orders}) {status}"
        )


def verification_raw() -> Dict[str, Any]:
    """Normalized cell with uniform coefficients, zero OCP and the linear flux stub."""
    return {
        "units": {"concentration": "normalized", "length": "normalized"},
        "geometry": {"L": 3.0, "L1": 1.0, "delta": 1.0, "Rs_neg": 0.1, "Rs_pos": 0.1, "A": 1.0},
        "transport": {
            "De": 1.0,
            "Ds_neg": 0.01,
            "Ds_pos": 0.01,
            "sigma": 1.0,
            "kappa": 1.0,
            "alpha_e": 0.1,
            "alpha_s_neg": 3e-4,
            "alpha_s_pos": 3e-4,
        },
        "kinetics": {
            "alpha_a": 0.5,
            "alpha_s": 0.5,
            "beta_a": 0.5,
            "gamma1": 5805.5,
            "gamma2": 5805.5,
            "delta1": 1.0,
            "delta2": 1.0,
            "cs_max": 0.9,
            "flux_mode": "stub-linear",
            "g0": 1.0,
        },
        "thermal": {"alpha_T": 0.01, "T_amb": 298.15, "mode": "zero"},
        "initial": {"ce0": 1.0, "theta0_neg": 0.5, "theta0_pos": 0.5},
    }


def verification_config() -> CellConfig:
    return parse_cell_config(verification_raw())


def _cos_average(faces: np.ndarray, k: float, origin: float = 0.0) -> np.ndarray:
    """Cell averages of cos(k (x - origin))."""
    a, b = faces[:-1] - origin, faces[1:] - origin
    return (np.sin(k * b) - np.sin(k * a)) / (k * (b - a))


def _mms_fields(config: CellConfig, mesh: Mesh):
    """Exact cell averages of u, v and of their cosine parts, electrode rows for v."""
    geometry = config.geometry
    k_e = math.pi / geometry.L
    k_neg = math.pi / geometry.L1
    k_pos = math.pi / geometry.cathode_length
    u = _cos_average(mesh.faces, k_e)
    anode = _cos_average(mesh.faces[: mesh.n_neg + 1], k_neg)
    start = mesh.n_neg + mesh.n_sep
    cathode = _cos_average(mesh.faces[start:], k_pos, geometry.cathode_start)
    v_cos = np.concatenate((anode, cathode))
    v = v_cos + np.concatenate((np.zeros(mesh.n_neg), np.full(mesh.n_pos, 0.5)))
    k_s = np.concatenate((np.full(mesh.n_neg, k_neg), np.full(mesh.n_pos, k_pos)))
    return u, v, v_cos, k_e, k_s


def elliptic_error(config: CellConfig, cells: int) -> float:
    """Max error of the potential pair against a manufactured solution with I = 0."""
    mesh = build_mesh(config.geometry, MeshSpec(cells, cells, cells, 3, 3))
    g0 = config.kinetics.g0
    transport = config.transport
    kappa = float(transport.kappa[0, 0])
    u, v, v_cos, k_e, k_s = _mms_fields(config, mesh)
    rows = mesh.electrode_cells
    exchange = g0 * (v - u[rows])

    source_e = kappa * k_e**2 * u
    source_e[rows] -= exchange
    sigma = np.concatenate(
        (
            np.full(mesh.n_neg, transport.sigma[Region.ANODE]),
            np.full(mesh.n_pos, transport.sigma[Region.CATHODE]),
        )
    )
    source_s = sigma * k_s**2 * v_cos + exchange

    cs_max = config.kinetics.cs_max
    state = StateSlice(np.ones(mesh.size), np.full(mesh.n_electrode, 0.5 * cs_max), 298.15)
    system = potential_system(
        config, mesh, state, 0.0, FluxMode.stub_linear(g0), (source_e, source_s)
    )
    solution = solve_potentials(system, EllipticOptions(newton_tol=1e-10))
    return max(
        float(np.max(np.abs(solution.phie_li - u))),
        float(np.max(np.abs(solution.phis - v))),
    )


def _slowest_rate(diag: np.ndarray, off: np.ndarray) -> float:
    # index 0 is the conserved constant mode
    return float(eigh_tridiagonal(diag, off, eigvals_only=True, select="i", select_range=(1, 1))[0])


def particle_rate_error(config: CellConfig, shells: int) -> float:
    Rs = config.geometry.Rs_neg
    Ds = config.transport.Ds_neg
    grid = build_particle_grid(Rs, shells)
    exact = Ds * (PARTICLE_ROOT / Rs) ** 2
    return abs(_slowest_rate(*particle_operator(grid, Ds)) - exact) / exact


def _electrolyte_operator(config: CellConfig, mesh: Mesh):
    t = electrolyte_faces(config.transport, mesh)
    main = np.zeros(mesh.size)
    main[:-1] += t
    main[1:] += t
    h = mesh.widths
    return main / h, -t / np.sqrt(h[:-1] * h[1:])


def electrolyte_rate_error(config: CellConfig, cells: int) -> float:
    mesh = build_mesh(config.geometry, MeshSpec(cells, cells, cells, 3, 3))
    De = float(config.transport.De[Region.ANODE][0])
    exact = De * (math.pi / config.geometry.L) ** 2
    return abs(_slowest_rate(*_electrolyte_operator(config, mesh)) - exact) / exact


def _mode(diag: np.ndarray, off: np.ndarray, volumes: np.ndarray):
    """Slowest nonconstant mode in the unscaled variables, and its rate."""
    rates, vectors = eigh_tridiagonal(diag, off, select="i", select_range=(1, 1))
    mode = vectors[:, 0] / np.sqrt(volumes)
    return mode / np.max(np.abs(mode)), float(rates[0])


def particle_decay_error(config: CellConfig, steps: int, shells: int = 25) -> float:
    """Implicit Euler decay of the slowest particle mode against exp(-rate t) over 1/rate."""
    Rs = config.geometry.Rs_neg
    Ds = config.transport.Ds_neg
    grid = build_particle_grid(Rs, shells)
    mode, rate = _mode(*particle_operator(grid, Ds), grid.volumes)
    base = 0.5 * config.kinetics.cs_max
    amplitude = 0.1 * base
    c = base + amplitude * mode
    t_end = 1.0 / rate
    dt = t_end / steps
    for _ in range(steps):
        c = step_particle(c, 0.0, Ds, dt, grid)
    exact = base + amplitude * math.exp(-rate * t_end) * mode
    return float(np.max(np.abs(c - exact)))


def electrolyte_decay_error(config: CellConfig, steps: int, cells: int = 15) -> float:
    mesh = build_mesh(config.geometry, MeshSpec(cells, cells, cells, 3, 3))
    mode, rate = _mode(*_electrolyte_operator(config, mesh), mesh.widths)
    faces = electrolyte_faces(config.transport, mesh)
    ce0 = config.initial.ce0
    ce = ce0 + 0.1 * ce0 * mode
    t_end = 1.0 / rate
    dt = t_end / steps
    j = np.zeros(mesh.size)
    for _ in range(steps):
        ce = step_electrolyte(ce, j, faces, mesh, config.transport.alpha_e, dt)
    exact = ce0 + 0.1 * ce0 * math.exp(-rate * t_end) * mode
    return float(np.max(np.abs(ce - exact)))


def relaxation_error(config: CellConfig, steps: int) -> float:
    """Temperature with no heat source against the exact relaxation over 1/alpha_T."""
    tp = ThermalParams(alpha_T=config.thermal.alpha_T, T_amb=config.thermal.T_amb, mode="zero")
    T0 = tp.T_amb + 10.0
    t_end = 1.0 / tp.alpha_T
    dt = t_end / steps
    T = T0
    worst = 0.0
    for n in range(1, steps + 1):
        T, _ = step_temperature(T, NO_HEAT, tp, dt)
        worst = max(worst, abs(T - float(relaxation(n * dt, T0, tp))))
    return worst


@dataclass(frozen=True)
class StudyPlan:
    name: str
    kind: str
    target: float
    resolutions: Sequence[int]
    error: Callable[[CellConfig, int], float]


SUITES: Dict[str, List[StudyPlan]] = {
    "elliptic": [StudyPlan("manufactured-potentials", "spatial", 2.0, (8, 16, 32, 64), elliptic_error)],
    "solid-diffusion": [
        StudyPlan("particle-rate", "spatial", 2.0, (10, 20, 40, 80), particle_rate_error),
        StudyPlan("particle-decay", "temporal", 1.0, (10, 20, 40, 80), particle_decay_error),
    ],
    "electrolyte": [
        StudyPlan("electrolyte-rate", "spatial", 2.0, (8, 16, 32, 64), electrolyte_rate_error),
        StudyPlan("electrolyte-decay", "temporal", 1.0, (10, 20, 40, 80), electrolyte_decay_error),
    ],
    "thermal": [
        StudyPlan("relaxation", "temporal", 1.0, (10, 20, 40, 80), relaxation_error),
    ],
}


@dataclass
class VerificationReport:
    studies: List[ConvergenceStudy] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(study.passed for study in self.studies)

    def lines(self) -> List[str]:
        return [study.as_line() for study in self.studies]


def run_suite(name: str, config: Optional[CellConfig] = None) -> List[ConvergenceStudy]:
    if name not in SUITES:
        raise ValueError(f"Unknown suite '{name}', expected one of {list(SUITES)}")
    if config is None:
        config = verification_config()
    studies = []
    for plan in SUITES[name]:
        errors = [plan.error(config, n) for n in plan.resolutions]
        study = ConvergenceStudy(name, plan.name, plan.kind, plan.target, plan.resolutions, errors)
        logging.info(study.as_line())
        studies.append(study)
    return studies


def run_verification(suites: Sequence[str] = tuple(SUITES)) -> VerificationReport:
    config = verification_config()
    report = VerificationReport()
    for name in suites:
        report.studies += run_suite(name, config)
    return report
