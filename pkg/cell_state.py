import logging
from dataclasses import dataclass
from typing import Dict, Optional, Union

import numpy as np

from cell_config import CellConfig
from kinetics import FluxMode
from mesh import ELECTRODES, Mesh, Region
from potentials import (
    EllipticOptions,
    PotentialSolution,
    StateSlice,
    potential_system,
    solve_potentials,
)
from solid_diffusion import boundary_trace

FieldLike = Union[float, np.ndarray]


class InadmissibleStateError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class CellState:
    t: float
    ce: np.ndarray
    cs: Dict[Region, np.ndarray]
    csB: np.ndarray
    phie_li: np.ndarray
    phis: np.ndarray
    phie: np.ndarray
    T: float

    @property
    def slice(self) -> StateSlice:
        return StateSlice(self.ce, self.csB, self.T)


def admissibility_violation(
    ce: np.ndarray, cs: Dict[Region, np.ndarray], csB: np.ndarray, T: float, cs_max: float,
    mesh: Mesh,
) -> Optional[str]:
    """Name the first violated bound of ce > 0, 0 < cs < cs_max, T > 0, or None."""
    if not np.all(np.isfinite(ce)) or np.min(ce) <= 0:
        k = int(np.argmin(np.where(np.isfinite(ce), ce, -np.inf)))
        return f"ce must be positive: {ce[k]} at cell {k} (x={mesh.centers[k]:.6g})"
    for region in ELECTRODES:
        c = cs[region]
        bad = ~((c > 0) & (c < cs_max))
        if np.any(bad):
            node, shell = (int(i) for i in np.argwhere(bad)[0])
            return (
                f"cs must lie in (0, cs_max={cs_max}): {c[node, shell]} in {region.value}"
                f" node {node} shell {shell}"
            )
    bad = ~((csB > 0) & (csB < cs_max))
    if np.any(bad):
        k = int(np.flatnonzero(bad)[0])
        return f"csB must lie in (0, cs_max={cs_max}): {csB[k]} at electrode node {k}"
    if not (np.isfinite(T) and T > 0):
        return f"T must be positive: {T}"
    return None


def _column_field(value: FieldLike, rows: int, shells: int) -> np.ndarray:
    array = np.asarray(value, dtype=float)
    if array.ndim == 0:
        return np.full((rows, shells), float(array))
    if array.ndim == 1 and array.shape == (rows,):
        return np.repeat(array[:, np.newaxis], shells, axis=1)
    if array.shape != (rows, shells):
        raise InadmissibleStateError(
            f"Particle field shape {array.shape} does not match ({rows}, {shells})"
        )
    return array.copy()


def state_from_solution(
    t: float,
    ce: np.ndarray,
    cs: Dict[Region, np.ndarray],
    csB: np.ndarray,
    T: float,
    solution: PotentialSolution,
) -> CellState:
    return CellState(
        t=t,
        ce=ce,
        cs=cs,
        csB=csB,
        phie_li=solution.phie_li,
        phis=solution.phis,
        phie=solution.phie,
        T=T,
    )


def initial_state(
    config: CellConfig,
    mesh: Mesh,
    ce0: Optional[FieldLike] = None,
    cs0: Optional[Union[FieldLike, Dict[Region, FieldLike]]] = None,
    T0: Optional[float] = None,
    current: float = 0.0,
    mode: Optional[FluxMode] = None,
    opts: Optional[EllipticOptions] = None,
) -> CellState:
    """Admissible state at t=0 with potentials from one elliptic solve.

    Missing fields come from the ``initial`` section; ``cs0`` may be a scalar,
    a per-node array or a (nodes, shells) array, optionally per region.
    """
    initial = config.initial
    cs_max = config.kinetics.cs_max
    ce = np.asarray(initial.ce0 if ce0 is None else ce0, dtype=float)
    ce = np.full(mesh.size, float(ce)) if ce.ndim == 0 else ce.copy()
    if ce.shape != (mesh.size,):
        raise InadmissibleStateError(f"ce0 has {ce.shape} values for {mesh.size} cells")

    if cs0 is None:
        cs0 = {
            Region.ANODE: initial.theta0_neg * cs_max,
            Region.CATHODE: initial.theta0_pos * cs_max,
        }
    if not isinstance(cs0, dict):
        cs0 = {region: cs0 for region in ELECTRODES}
    cs = {}
    for region in ELECTRODES:
        rows = mesh.electrode_slice(region)
        cs[region] = _column_field(
            cs0[region], rows.stop - rows.start, mesh.particles[region].size
        )

    T = float(initial.T0 if T0 is None else T0)
    csB = boundary_trace(cs, mesh)
    problem = admissibility_violation(ce, cs, csB, T, cs_max, mesh)
    if problem is not None:
        raise InadmissibleStateError(f"Inadmissible initial data: {problem}")

    if mode is None:
        mode = FluxMode.from_params(config.kinetics)
    if opts is None:
        opts = EllipticOptions.from_settings(config.solver)
    system = potential_system(config, mesh, StateSlice(ce, csB, T), current, mode)
    solution = solve_potentials(system, opts)
    logging.info(
        f"initial state: {mesh.size} cells, T0={T:g}, {solution.newton_iters} Newton iterations"
    )
    return state_from_solution(0.0, ce, cs, csB, T, solution)
