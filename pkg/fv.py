import numpy as np
import scipy.sparse as sp
from scipy.linalg import solve_banded


def transmissibility(widths: np.ndarray, coefficient: np.ndarray) -> np.ndarray:
    """Harmonic face coefficients between neighbouring cells, divided by the distance."""
    return 1.0 / (0.5 * widths[:-1] / coefficient[:-1] + 0.5 * widths[1:] / coefficient[1:])


def stiffness(face_coefficients: np.ndarray) -> sp.csr_matrix:
    """Symmetric FV operator with zero-flux ends from interior face coefficients."""
    n = len(face_coefficients) + 1
    main = np.zeros(n)
    main[:-1] += face_coefficients
    main[1:] += face_coefficients
    return sp.diags(
        [-face_coefficients, main, -face_coefficients], [-1, 0, 1], format="csr"
    )


def implicit_step(
    volumes: np.ndarray, face_coefficients: np.ndarray, rhs: np.ndarray, dt: float
) -> np.ndarray:
    """Solve (diag(volumes) + dt K) x = rhs with K = stiffness(face_coefficients)."""
    n = len(volumes)
    ab = np.zeros((3, n))
    ab[0, 1:] = -dt * face_coefficients
    ab[1] = volumes
    ab[1, :-1] += dt * face_coefficients
    ab[1, 1:] += dt * face_coefficients
    ab[2, :-1] = -dt * face_coefficients
    return solve_banded((1, 1), ab, rhs, check_finite=True)
