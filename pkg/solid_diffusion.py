import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, Tuple

import numpy as np
from scipy.linalg import LinAlgError

from cell_config import TransportParams
from fv import implicit_step
from mesh import ELECTRODES, Mesh, ParticleGrid, Region


class ParticleSolveError(Exception):
    def __init__(self, message: str, node: int):
        super().__init__(message)
        self.node = node


def particle_faces(grid: ParticleGrid, Ds: float) -> np.ndarray:
    """Interior shell-face coefficients Ds r^2 / dr; the face at r=0 has zero area."""
    return Ds * grid.faces[1:-1] ** 2 / np.diff(grid.centers)


def particle_operator(grid: ParticleGrid, Ds: float) -> Tuple[np.ndarray, np.ndarray]:
    """Symmetrically scaled radial operator V^-1/2 K V^-1/2 as (diagonal, off-diagonal).

    Its eigenvalues are the discrete decay rates of the particle modes.
    """
    t = particle_faces(grid, Ds)
    main = np.zeros(grid.size)
    main[:-1] += t
    main[1:] += t
    V = grid.volumes
    return main / V, -t / np.sqrt(V[:-1] * V[1:])


def particle_mass(grid: ParticleGrid, cs: np.ndarray) -> np.ndarray:
    """Integral of c r^2 dr over the particle, per column of ``cs``."""
    return np.asarray(cs) @ grid.volumes


def step_particle(
    cs_node: np.ndarray, g: float, Ds: float, dt: float, grid: ParticleGrid
) -> np.ndarray:
    """Implicit Euler step with symmetry at r=0 and outward flux -Ds c_r = g at Rs."""
    rhs = grid.volumes * cs_node
    rhs[-1] -= dt * grid.radius**2 * g
    return implicit_step(grid.volumes, particle_faces(grid, Ds), rhs, dt)


def step_all_particles(
    cs: Dict[Region, np.ndarray],
    j: np.ndarray,
    transport: TransportParams,
    mesh: Mesh,
    dt: float,
    threads: int = 1,
) -> Dict[Region, np.ndarray]:
    """Advance every particle column with g = alpha_s j of its macro cell.

    ``j`` is given on electrode rows (anode first). Columns are independent and
    solved one by one, so the result does not depend on ``threads``.
    """
    jobs = []
    for region in ELECTRODES:
        alpha_s = transport.alpha_s(region)
        Ds = transport.Ds(region)
        grid = mesh.particles[region]
        rows = mesh.electrode_slice(region)
        for k, g in enumerate(alpha_s * j[rows]):
            jobs.append((region, k, rows.start + k, float(g), Ds, grid))

    def solve(job):
        region, k, node, g, Ds, grid = job
        try:
            column = step_particle(cs[region][k], g, Ds, dt, grid)
        except (LinAlgError, ValueError) as e:
            raise ParticleSolveError(f"Particle solve failed at electrode node {node}: {e}", node)
        if not np.all(np.isfinite(column)):
            raise ParticleSolveError(f"Non-finite particle field at electrode node {node}", node)
        return column

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            columns = list(pool.map(solve, jobs))
    else:
        columns = [solve(job) for job in jobs]

    result = {region: np.empty_like(cs[region]) for region in ELECTRODES}
    for (region, k, *_), column in zip(jobs, columns):
        result[region][k] = column
    logging.debug(f"stepped {len(jobs)} particles with dt={dt:g}")
    return result


def boundary_trace(cs: Dict[Region, np.ndarray], mesh: Mesh) -> np.ndarray:
    """Surface concentration per electrode row, extrapolated from the two outer shells."""
    traces = []
    for region in ELECTRODES:
        grid = mesh.particles[region]
        r = grid.centers
        c = cs[region]
        slope = (c[:, -1] - c[:, -2]) / (r[-1] - r[-2])
        traces.append(c[:, -1] + slope * (grid.radius - r[-1]))
    return np.concatenate(traces)
