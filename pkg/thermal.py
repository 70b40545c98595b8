import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from cell_config import CellConfig, ThermalParams
from fv import transmissibility
from kinetics import ocp_dT
from mesh import ELECTRODES, Mesh, Region
from potentials import PotentialSolution


@dataclass(frozen=True)
class HeatBreakdown:
    q_r: float = 0.0
    q_j: float = 0.0
    q_c: float = 0.0
    q_e: float = 0.0

    @property
    def total(self) -> float:
        return self.q_r + self.q_j + self.q_c + self.q_e


NO_HEAT = HeatBreakdown()


def heat_sources(
    state, solution: PotentialSolution, current: float, config: CellConfig, mesh: Mesh
) -> HeatBreakdown:
    """Reaction, ohmic, contact and entropic heat by mesh quadrature.

    ``state`` needs ce, csB and T (a CellState or a StateSlice).
    """
    geometry = config.geometry
    transport = config.transport
    A = geometry.A
    T = state.T
    h = mesh.widths
    h_s = h[mesh.electrode_cells]
    j_s = solution.j[mesh.electrode_cells]

    q_r = A * float(np.dot(h_s, j_s * solution.eta))

    sigma = np.empty(mesh.n_electrode)
    for region in ELECTRODES:
        sigma[mesh.electrode_slice(region)] = transport.sigma[region]
    t_s = transmissibility(h_s, sigma)
    t_s[mesh.n_neg - 1] = 0.0
    solid = float(np.dot(t_s, np.diff(solution.phis) ** 2))
    g = current / A
    solid += g**2 * (0.5 * h[0] / transport.sigma[Region.ANODE])
    solid += g**2 * (0.5 * h[-1] / transport.sigma[Region.CATHODE])

    t_e = transmissibility(h, transport.conductivity(state.ce, T))
    d_phie = np.diff(solution.phie)
    d_f = np.diff(transport.f(state.ce))
    liquid = float(np.dot(t_e, d_phie**2 + transport.alpha_phie * T * d_f * d_phie))
    q_j = A * (solid + liquid)

    q_c = geometry.Rf / A * current**2

    dU = np.empty(mesh.n_electrode)
    for region in ELECTRODES:
        rows = mesh.electrode_slice(region)
        dU[rows] = ocp_dT(
            region, state.ce[mesh.cells(region)], state.csB[rows], T, config.kinetics.ocp
        )
    q_e = T * A * float(np.dot(h_s, j_s * dU))
    return HeatBreakdown(q_r=q_r, q_j=q_j, q_c=q_c, q_e=q_e)


def linear_coefficients(heat: HeatBreakdown, T: float, tp: ThermalParams) -> Tuple[float, float]:
    """(A_T, B_T) of F_T = B_T + T A_T, clamped to the declared bounds."""
    A_low, A_high = tp.A_T_bounds
    A_T = min(max(heat.q_e / T, A_low), A_high)
    B_T = min(max(heat.q_r + heat.q_j + heat.q_c, 0.0), tp.B_T_max)
    return A_T, B_T


def temperature_barriers(T0: float, tp: ThermalParams) -> Tuple[float, float]:
    """Constant sub- and supersolution of the linear-truncated temperature equation."""
    A_low, A_high = tp.A_T_bounds
    T_low = min(T0, tp.alpha_T * tp.T_amb / (tp.alpha_T - A_low))
    T_high = max(T0, (tp.alpha_T * tp.T_amb + tp.B_T_max) / (tp.alpha_T - A_high))
    return T_low, T_high


def relaxation(t, T0: float, tp: ThermalParams):
    """Exact temperature with F_T = 0."""
    return tp.T_amb + (T0 - tp.T_amb) * np.exp(-tp.alpha_T * np.asarray(t))


def step_temperature(
    T: float, heat: HeatBreakdown, tp: ThermalParams, dt: float
) -> Tuple[float, bool]:
    """Advance dT/dt = -alpha_T (T - T_amb) + F_T over dt.

    Returns the new temperature and whether it is admissible (finite, positive).
    """
    if tp.mode == "zero":
        rate, forcing = tp.alpha_T, tp.alpha_T * tp.T_amb
    elif tp.mode == "linear-truncated":
        A_T, B_T = linear_coefficients(heat, T, tp)
        rate, forcing = tp.alpha_T - A_T, tp.alpha_T * tp.T_amb + B_T
    else:
        rate, forcing = tp.alpha_T, tp.alpha_T * tp.T_amb + heat.total

    if tp.scheme == "exponential" and rate != 0.0:
        T_eq = forcing / rate
        T_new = T_eq + (T - T_eq) * math.exp(-rate * dt)
    elif tp.scheme == "exponential":
        T_new = T + dt * forcing
    else:
        T_new = (T + dt * forcing) / (1.0 + dt * rate)
    return T_new, bool(math.isfinite(T_new) and T_new > 0)
