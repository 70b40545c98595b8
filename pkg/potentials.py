import logging
from dataclasses import dataclass, replace
from typing import NamedTuple, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from cell_config import CellConfig, SolverSettings
from fv import stiffness, transmissibility
from kinetics import FluxInput, FluxMode, flux, flux_deta, overpotential
from mesh import ELECTRODES, Mesh, Region


class SolverFailure(Exception):
    def __init__(self, message: str, residual_norm: float, iterations: int):
        super().__init__(message)
        self.residual_norm = residual_norm
        self.iterations = iterations


@dataclass(frozen=True)
class EllipticOptions:
    newton_tol: float = 1e-10
    max_iters: int = 50
    damping: float = 0.5
    min_step: float = 2.0**-20
    armijo: float = 1e-4

    def __post_init__(self):
        if not self.newton_tol > 0:
            raise ValueError(f"newton_tol must be positive, got {self.newton_tol}")

    @classmethod
    def from_settings(cls, settings: SolverSettings) -> "EllipticOptions":
        return cls(newton_tol=settings.newton_tol, max_iters=settings.max_newton)


class StateSlice(NamedTuple):
    """Frozen data of one elliptic solve."""

    ce: np.ndarray
    csB: np.ndarray
    T: float


@dataclass(frozen=True, eq=False)
class PotentialSystem:
    config: CellConfig
    mesh: Mesh
    state: StateSlice
    current: float
    mode: FluxMode
    K_e: sp.csr_matrix
    K_s: sp.csr_matrix
    reference: np.ndarray
    source_e: Optional[np.ndarray] = None
    source_s: Optional[np.ndarray] = None

    @property
    def boundary_flux(self) -> float:
        return self.current / self.config.geometry.A

    @property
    def residual_scale(self) -> float:
        return max(abs(self.boundary_flux), 1.0)

    @property
    def electrode_widths(self) -> np.ndarray:
        return self.mesh.widths[self.mesh.electrode_cells]

    def gap_li(self, phie_li: np.ndarray, phis: np.ndarray) -> np.ndarray:
        """phis - phie_li on electrode rows."""
        return phis - phie_li[self.mesh.electrode_cells]

    def flux_input(self, region: Region, gap_li: np.ndarray) -> FluxInput:
        cells = self.mesh.cells(region)
        rows = self.mesh.electrode_slice(region)
        return FluxInput(
            region=region,
            ce=self.state.ce[cells],
            csB=self.state.csB[rows],
            gap=gap_li[rows] - self.reference[cells],
            T=self.state.T,
            x=self.mesh.centers[cells],
            alpha_phie=self.config.transport.alpha_phie,
        )

    def reaction(self, gap_li: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Flux and its derivative in the overpotential on electrode rows."""
        j = np.empty(self.mesh.n_electrode)
        dj = np.empty(self.mesh.n_electrode)
        kp = self.config.kinetics
        for region in ELECTRODES:
            inp = self.flux_input(region, gap_li)
            rows = self.mesh.electrode_slice(region)
            j[rows] = flux(inp, kp, self.mode)
            dj[rows] = flux_deta(inp, kp, self.mode)
        return j, dj


def potential_system(
    config: CellConfig,
    mesh: Mesh,
    state: StateSlice,
    current: float,
    mode: FluxMode,
    sources: Optional[Tuple[np.ndarray, np.ndarray]] = None,
) -> PotentialSystem:
    """Freeze (ce, csB, T, I) and build the two diffusion operators.

    ``sources`` are optional cell averages added to the electrolyte and solid
    equations, used by manufactured-solution checks.
    """
    transport = config.transport
    kappa = transport.conductivity(state.ce, state.T)
    K_e = stiffness(transmissibility(mesh.widths, kappa))
    cells = mesh.electrode_cells
    sigma = np.empty(mesh.n_electrode)
    for region in ELECTRODES:
        sigma[mesh.electrode_slice(region)] = transport.sigma[region]
    face_s = transmissibility(mesh.widths[cells], sigma)
    # no conduction through the separator
    face_s[mesh.n_neg - 1] = 0.0
    K_s = stiffness(face_s)
    reference = transport.alpha_phie * state.T * transport.f(state.ce)
    source_e, source_s = sources if sources is not None else (None, None)
    return PotentialSystem(
        config=config,
        mesh=mesh,
        state=StateSlice(
            np.asarray(state.ce, dtype=float), np.asarray(state.csB, dtype=float), float(state.T)
        ),
        current=float(current),
        mode=mode,
        K_e=K_e,
        K_s=K_s,
        reference=reference,
        source_e=source_e,
        source_s=source_s,
    )


def assemble_residual(
    system: PotentialSystem, phie_li: np.ndarray, phis: np.ndarray, gauge: bool = True
) -> np.ndarray:
    """Integrated FV residual [electrolyte rows, solid rows].

    With ``gauge`` the first electrolyte row is replaced by the weighted mean of phie_li.
    """
    mesh = system.mesh
    h = mesh.widths
    h_s = system.electrode_widths
    j, _ = system.reaction(system.gap_li(phie_li, phis))
    j_cells = np.zeros(mesh.size)
    j_cells[mesh.electrode_cells] = j

    F_e = system.K_e @ phie_li - h * j_cells
    F_s = system.K_s @ phis + h_s * j
    if system.source_e is not None:
        F_e -= h * system.source_e
    if system.source_s is not None:
        F_s -= h_s * system.source_s
    F_s[0] -= system.boundary_flux
    F_s[-1] += system.boundary_flux
    if gauge:
        F_e[0] = np.dot(h, phie_li) / mesh.length
    return np.concatenate((F_e, F_s))


def jacobian(
    system: PotentialSystem, phie_li: np.ndarray, phis: np.ndarray, gauge: bool = True
) -> sp.csr_matrix:
    mesh = system.mesh
    _, dj = system.reaction(system.gap_li(phie_li, phis))
    D = sp.diags(system.electrode_widths * dj)
    select = sp.csr_matrix(
        (np.ones(mesh.n_electrode), (np.arange(mesh.n_electrode), mesh.electrode_cells)),
        shape=(mesh.n_electrode, mesh.size),
    )
    J = sp.bmat(
        [
            [system.K_e + select.T @ D @ select, -select.T @ D],
            [-D @ select, system.K_s + D],
        ],
        format="lil",
    )
    if gauge:
        J[0, :] = 0.0
        J[0, : mesh.size] = mesh.widths / mesh.length
    return J.tocsr()


@dataclass(frozen=True, eq=False)
class PotentialSolution:
    phie_li: np.ndarray
    phis: np.ndarray
    phie: np.ndarray
    # phis - phie_li on electrode rows, the only potential the flux sees
    gap_li: np.ndarray
    j: np.ndarray
    eta: np.ndarray
    newton_iters: int
    residual_norm: float
    anode_integral: float
    cathode_integral: float
    total_integral: float
    phis_left: float
    phis_right: float
    # largest |phis - phie_li| over electrode cells
    max_potential_gap: float
    # scaled residual at the start and after every accepted Newton step
    residual_history: Tuple[float, ...] = ()

    def shifted(self, constant: float) -> "PotentialSolution":
        """Same solution in another gauge; flux, overpotential and gap are untouched."""
        return replace(
            self,
            phie_li=self.phie_li + constant,
            phis=self.phis + constant,
            phie=self.phie + constant,
            phis_left=self.phis_left + constant,
            phis_right=self.phis_right + constant,
        )


def _residual_norm(system: PotentialSystem, F: np.ndarray) -> float:
    return float(np.max(np.abs(F))) / system.residual_scale


def solution_from_fields(
    system: PotentialSystem,
    phie_li: np.ndarray,
    phis: np.ndarray,
    iters: int = 0,
    norm: float = np.nan,
    gap_li: Optional[np.ndarray] = None,
    residual_history: Tuple[float, ...] = (),
) -> PotentialSolution:
    """Derived quantities of a potential pair; ``gap_li`` defaults to phis - phie_li."""
    mesh = system.mesh
    if gap_li is None:
        gap_li = system.gap_li(phie_li, phis)
    j_el, _ = system.reaction(gap_li)
    j = np.zeros(mesh.size)
    j[mesh.electrode_cells] = j_el
    kp = system.config.kinetics
    eta = np.empty(mesh.n_electrode)
    for region in ELECTRODES:
        eta[mesh.electrode_slice(region)] = overpotential(
            system.flux_input(region, gap_li), kp.ocp
        )
    h = mesh.widths
    sigma = system.config.transport.sigma
    g = system.boundary_flux
    return PotentialSolution(
        phie_li=phie_li,
        phis=phis,
        phie=phie_li + system.reference,
        gap_li=gap_li,
        j=j,
        eta=eta,
        newton_iters=iters,
        residual_norm=norm,
        anode_integral=float(np.dot(h[mesh.cells(Region.ANODE)], j[mesh.cells(Region.ANODE)])),
        cathode_integral=float(
            np.dot(h[mesh.cells(Region.CATHODE)], j[mesh.cells(Region.CATHODE)])
        ),
        total_integral=mesh.integrate(j),
        phis_left=float(phis[0] + g * h[0] / (2.0 * sigma[Region.ANODE])),
        phis_right=float(phis[-1] - g * h[-1] / (2.0 * sigma[Region.CATHODE])),
        max_potential_gap=float(np.max(np.abs(gap_li))),
        residual_history=tuple(residual_history),
    )


def solve_potentials(
    system: PotentialSystem,
    opts: EllipticOptions = EllipticOptions(),
    guess: Optional[Tuple[np.ndarray, np.ndarray]] = None,
) -> PotentialSolution:
    """Damped Newton on the gauged system; warm start from ``guess`` or zero fields."""
    mesh = system.mesh
    n = mesh.size
    if guess is None:
        x = np.zeros(n + mesh.n_electrode)
    else:
        x = np.concatenate((guess[0], guess[1])).astype(float)

    F = assemble_residual(system, x[:n], x[n:])
    norm = _residual_norm(system, F)
    history = [norm]
    iters = 0
    while norm > opts.newton_tol:
        if iters >= opts.max_iters:
            raise SolverFailure(
                f"Newton did not converge in {iters} iterations, residual {norm:.3e}",
                norm,
                iters,
            )
        J = jacobian(system, x[:n], x[n:])
        dx = spsolve(J, -F)
        iters += 1
        step = 1.0
        while True:
            trial = x + step * dx
            with np.errstate(over="ignore", invalid="ignore"):
                F_trial = assemble_residual(system, trial[:n], trial[n:])
            trial_norm = _residual_norm(system, F_trial)
            if np.isfinite(trial_norm) and trial_norm <= (1.0 - opts.armijo * step) * norm:
                break
            step *= opts.damping
            if step < opts.min_step:
                raise SolverFailure(
                    f"Line search stalled at iteration {iters}, residual {norm:.3e}",
                    norm,
                    iters,
                )
        x, F, norm = trial, F_trial, trial_norm
        history.append(norm)
        logging.debug(f"newton {iters}: residual {norm:.3e}, step {step:g}")

    # the gap is taken before the zero-mean shift, so the shift never reaches the flux
    gap_li = system.gap_li(x[:n], x[n:])
    shift = np.dot(mesh.widths, x[:n]) / mesh.length
    return solution_from_fields(
        system, x[:n] - shift, x[n:] - shift, iters, norm, gap_li, history
    )
