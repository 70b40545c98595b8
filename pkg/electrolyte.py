import numpy as np

from cell_config import TransportParams
from fv import implicit_step, transmissibility
from mesh import Mesh, Region


def diffusivity_cells(transport: TransportParams, mesh: Mesh) -> np.ndarray:
    De = np.empty(mesh.size)
    for region in Region:
        cells = mesh.cells(region)
        De[cells] = transport.diffusivity(region, mesh.local_fraction[cells])
    return De


def electrolyte_faces(transport: TransportParams, mesh: Mesh) -> np.ndarray:
    """Interior face coefficients with harmonic De across material interfaces."""
    return transmissibility(mesh.widths, diffusivity_cells(transport, mesh))


def electrolyte_mass(ce: np.ndarray, mesh: Mesh) -> float:
    return mesh.integrate(ce)


def step_electrolyte(
    ce: np.ndarray,
    j: np.ndarray,
    faces: np.ndarray,
    mesh: Mesh,
    alpha_e: float,
    dt: float,
) -> np.ndarray:
    """Implicit Euler step of c_t - (De c_x)_x = alpha_e j with zero-flux ends.

    ``j`` is per macro cell (zero in the separator); ``faces`` from electrolyte_faces.
    """
    h = mesh.widths
    rhs = h * ce + dt * alpha_e * h * j
    return implicit_step(h, faces, rhs, dt)
