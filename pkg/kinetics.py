import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from numpy.polynomial import polynomial as P

from cell_config import KineticParams, OCPParams
from mesh import ELECTRODES, Region

EXPONENTIAL = "exponential"
TRUNCATED = "truncated"
STUB_LINEAR = "stub-linear"

# boundary classification of the exponent linter, relative to the threshold
BOUNDARY_RTOL = 5e-4


class KineticsDomainError(ValueError):
    pass


@dataclass(frozen=True)
class FluxMode:
    tag: str = EXPONENTIAL
    s_inf: Optional[float] = None
    g0: Optional[float] = None

    def __post_init__(self):
        if self.tag == TRUNCATED and (self.s_inf is None or not np.isfinite(self.s_inf)):
            raise ValueError("truncated flux mode needs a finite s_inf")
        if self.tag == STUB_LINEAR and (self.g0 is None or not self.g0 > 0):
            raise ValueError(f"stub-linear flux mode needs g0 > 0, got {self.g0}")
        if self.tag not in (EXPONENTIAL, TRUNCATED, STUB_LINEAR):
            raise ValueError(f"Unknown flux mode '{self.tag}'")

    @classmethod
    def exponential(cls) -> "FluxMode":
        return cls(EXPONENTIAL)

    @classmethod
    def truncated(cls, s_inf: float) -> "FluxMode":
        return cls(TRUNCATED, s_inf=s_inf)

    @classmethod
    def stub_linear(cls, g0: float) -> "FluxMode":
        return cls(STUB_LINEAR, g0=g0)

    @classmethod
    def from_params(cls, kp: KineticParams) -> "FluxMode":
        return cls(kp.flux_mode, s_inf=kp.s_inf, g0=kp.g0)


@dataclass(frozen=True, eq=False)
class FluxInput:
    """Arguments of the reaction flux; scalars or arrays of matching shape.

    ``gap`` is the interface potential difference phis - phie. The flux never
    sees the absolute potentials, so a common shift of both fields cannot change it.
    """

    region: Region
    ce: np.ndarray
    csB: np.ndarray
    gap: np.ndarray
    T: float
    x: Optional[np.ndarray] = None
    alpha_phie: float = 0.0

    @classmethod
    def from_potentials(cls, region: Region, ce, csB, phis, phie, T: float, **kwargs) -> "FluxInput":
        return cls(region, ce, csB, np.asarray(phis) - np.asarray(phie), T, **kwargs)

    @property
    def shape(self) -> Tuple[int, ...]:
        return np.broadcast(self.ce, self.csB, self.gap).shape

    @property
    def drive(self) -> np.ndarray:
        """phis - phie_li."""
        return np.asarray(self.gap) + self.alpha_phie * self.T * np.log(self.ce)


def _check_domain(ce, csB, T, cs_max: float):
    for name, values in (
        ("ce", ce),
        ("csB", csB),
        ("cs_max - csB", cs_max - np.asarray(csB)),
        ("T", T),
    ):
        flat = np.ravel(values)
        bad = np.flatnonzero(~(flat > 0))
        if bad.size:
            raise KineticsDomainError(
                f"Non-positive log argument {name} = {flat[bad[0]]} at index {bad[0]}"
            )


def open_circuit_potential(region: Region, ce, csB, T: float, ocp: OCPParams) -> np.ndarray:
    """U = -lambda_min ln csB + lambda_max ln(cs_max - csB) + mu ln ce + p."""
    _check_domain(ce, csB, T, ocp.cs_max)
    ce = np.asarray(ce, dtype=float)
    csB = np.asarray(csB, dtype=float)
    return (
        -P.polyval(T, ocp.lambda_min[region]) * np.log(csB)
        + P.polyval(T, ocp.lambda_max[region]) * np.log(ocp.cs_max - csB)
        + P.polyval(T, ocp.mu[region]) * np.log(ce)
        + ocp.p_value(region, ce, csB, T)
    )


def ocp_dT(region: Region, ce, csB, T: float, ocp: OCPParams) -> np.ndarray:
    """Partial derivative of U in T at fixed (ce, csB)."""
    _check_domain(ce, csB, T, ocp.cs_max)
    ce = np.asarray(ce, dtype=float)
    csB = np.asarray(csB, dtype=float)
    return (
        -P.polyval(T, P.polyder(ocp.lambda_min[region])) * np.log(csB)
        + P.polyval(T, P.polyder(ocp.lambda_max[region])) * np.log(ocp.cs_max - csB)
        + P.polyval(T, P.polyder(ocp.mu[region])) * np.log(ce)
        + ocp.p_dT(region, ce, csB, T)
    )


def overpotential(inp: FluxInput, ocp: OCPParams) -> np.ndarray:
    U = open_circuit_potential(inp.region, inp.ce, inp.csB, inp.T, ocp)
    return np.asarray(inp.gap) - U


def h_cutoff(s, s_inf: float) -> np.ndarray:
    """e^s up to s_inf, then e^s_inf (2 - e^-(s - s_inf)); C1 and bounded by 2 e^s_inf."""
    s = np.asarray(s, dtype=float)
    below = np.exp(np.minimum(s, s_inf))
    above = np.exp(s_inf) * (2.0 - np.exp(-(np.maximum(s, s_inf) - s_inf)))
    return np.where(s <= s_inf, below, above)


def h_cutoff_prime(s, s_inf: float) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    below = np.exp(np.minimum(s, s_inf))
    above = np.exp(2.0 * s_inf - np.maximum(s, s_inf))
    return np.where(s <= s_inf, below, above)


def _prefactor(inp: FluxInput, kp: KineticParams) -> np.ndarray:
    return np.exp(
        kp.alpha_a * np.log(inp.ce)
        + kp.alpha_s * np.log(inp.csB)
        + kp.beta_a * np.log(kp.cs_max - np.asarray(inp.csB))
    )


def _absorbed_logs(inp: FluxInput, kp: KineticParams, with_p: bool = True):
    """Log prefactors of j+ and j- once U and the reference term are absorbed.

    Returns (log_q_plus, log_q_minus, drive) with drive = phis - phie_li, so that
    j+ = exp(log_q_plus + gamma1 drive / T) and j- = exp(log_q_minus - gamma2 drive / T).
    """
    ocp = kp.ocp
    T = inp.T
    g1, g2 = kp.gamma1 / T, kp.gamma2 / T
    lmin = P.polyval(T, ocp.lambda_min[inp.region])
    lmax = P.polyval(T, ocp.lambda_max[inp.region])
    mu = P.polyval(T, ocp.mu[inp.region])
    log_ce = np.log(inp.ce)
    log_cs = np.log(inp.csB)
    log_gap = np.log(kp.cs_max - np.asarray(inp.csB))
    ce_term = mu + inp.alpha_phie * T
    log_q_plus = (
        np.log(kp.delta1[inp.region])
        + (kp.alpha_a - g1 * ce_term) * log_ce
        + (kp.alpha_s + g1 * lmin) * log_cs
        + (kp.beta_a - g1 * lmax) * log_gap
    )
    log_q_minus = (
        np.log(kp.delta2[inp.region])
        + (kp.alpha_a + g2 * ce_term) * log_ce
        + (kp.alpha_s - g2 * lmin) * log_cs
        + (kp.beta_a + g2 * lmax) * log_gap
    )
    if with_p:
        p = ocp.p_value(inp.region, inp.ce, inp.csB, T)
        log_q_plus = log_q_plus - g1 * p
        log_q_minus = log_q_minus + g2 * p
    return log_q_plus, log_q_minus, inp.drive


def flux_decomposed(
    inp: FluxInput, kp: KineticParams, mode: FluxMode
) -> Tuple[np.ndarray, np.ndarray]:
    """Nonnegative (j+, j-) with j = j+ - j-."""
    _check_domain(inp.ce, inp.csB, inp.T, kp.cs_max)
    shape = inp.shape
    if inp.region == Region.SEPARATOR:
        return np.zeros(shape), np.zeros(shape)
    if mode.tag == STUB_LINEAR:
        eta = overpotential(inp, kp.ocp)
        return mode.g0 * np.maximum(eta, 0.0), mode.g0 * np.maximum(-eta, 0.0)
    log_q_plus, log_q_minus, drive = _absorbed_logs(inp, kp)
    s_plus = kp.gamma1 / inp.T * drive
    s_minus = -kp.gamma2 / inp.T * drive
    if mode.tag == EXPONENTIAL:
        return np.exp(log_q_plus + s_plus), np.exp(log_q_minus + s_minus)
    return (
        np.exp(log_q_plus) * h_cutoff(s_plus, mode.s_inf),
        np.exp(log_q_minus) * h_cutoff(s_minus, mode.s_inf),
    )


def flux(inp: FluxInput, kp: KineticParams, mode: FluxMode) -> np.ndarray:
    _check_domain(inp.ce, inp.csB, inp.T, kp.cs_max)
    if inp.region == Region.SEPARATOR:
        return np.zeros(inp.shape)
    if mode.tag == TRUNCATED:
        j_plus, j_minus = flux_decomposed(inp, kp, mode)
        return j_plus - j_minus
    eta = overpotential(inp, kp.ocp)
    if mode.tag == STUB_LINEAR:
        return mode.g0 * eta
    T = inp.T
    return _prefactor(inp, kp) * (
        kp.delta1[inp.region] * np.exp(kp.gamma1 * eta / T)
        - kp.delta2[inp.region] * np.exp(-kp.gamma2 * eta / T)
    )


def flux_deta(inp: FluxInput, kp: KineticParams, mode: FluxMode) -> np.ndarray:
    """Analytic derivative of the flux in the overpotential at fixed concentrations."""
    _check_domain(inp.ce, inp.csB, inp.T, kp.cs_max)
    shape = inp.shape
    if inp.region == Region.SEPARATOR:
        return np.zeros(shape)
    if mode.tag == STUB_LINEAR:
        return np.full(shape, mode.g0)
    T = inp.T
    g1, g2 = kp.gamma1 / T, kp.gamma2 / T
    if mode.tag == TRUNCATED:
        log_q_plus, log_q_minus, drive = _absorbed_logs(inp, kp)
        return np.exp(log_q_plus) * g1 * h_cutoff_prime(
            g1 * drive, mode.s_inf
        ) + np.exp(log_q_minus) * g2 * h_cutoff_prime(-g2 * drive, mode.s_inf)
    eta = overpotential(inp, kp.ocp)
    return _prefactor(inp, kp) * (
        kp.delta1[inp.region] * g1 * np.exp(g1 * eta)
        + kp.delta2[inp.region] * g2 * np.exp(-g2 * eta)
    )


def flux_bound(inp: FluxInput, kp: KineticParams, s_inf: float) -> np.ndarray:
    """Pointwise bound on |j| in truncated mode, with p replaced by its bound p_inf."""
    _check_domain(inp.ce, inp.csB, inp.T, kp.cs_max)
    log_q_plus, log_q_minus, _ = _absorbed_logs(inp, kp, with_p=False)
    p_inf = kp.ocp.p_inf
    return (
        2.0
        * np.exp(s_inf)
        * np.maximum(
            np.exp(log_q_plus + kp.gamma1 * p_inf / inp.T),
            np.exp(log_q_minus + kp.gamma2 * p_inf / inp.T),
        )
    )


@dataclass(frozen=True)
class ConditionEntry:
    condition: str
    region: Region
    T: float
    value: float
    threshold: float
    margin: float
    status: str

    @property
    def passed(self) -> bool:
        return self.status != "violated"


@dataclass
class ConditionReport:
    entries: List[ConditionEntry] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(entry.passed for entry in self.entries)

    @property
    def violations(self) -> List[ConditionEntry]:
        return [entry for entry in self.entries if not entry.passed]

    def worst(self, condition: str) -> ConditionEntry:
        return min(
            (entry for entry in self.entries if entry.condition == condition),
            key=lambda entry: entry.margin,
        )

    def as_markdown(self) -> str:
        table = "| Condition | Region | T | Margin | Status |\n"
        table += "|-----------|--------|---|--------|--------|\n"
        for e in self.entries:
            mark = "❌" if e.status == "violated" else "✅"
            table += (
                f"| {e.condition} | {e.region.value} | {e.T:g} | {e.margin:.3e} |"
                f" {mark} {e.status} |\n"
            )
        return table


def _classify(margin: float, threshold: float, rtol: float) -> str:
    if abs(margin) <= rtol * abs(threshold):
        return "boundary"
    return "satisfied" if margin > 0 else "violated"


def check_exponent_conditions(
    kp: KineticParams,
    alpha_phie: float,
    T_range: Tuple[float, float],
    boundary_rtol: float = BOUNDARY_RTOL,
) -> ConditionReport:
    """Evaluate the four no-dead-core exponent conditions on both electrodes.

    Margins are in coefficient units, e.g. lambda_min/T - (1 - alpha_s)/gamma1.
    Affine-in-T coefficients make lambda/T and mu/T monotone, so the ends of
    T_range suffice; higher degrees are also sampled in between.
    """
    T_low, T_high = T_range
    ocp = kp.ocp
    tables = [ocp.lambda_min[r] for r in ELECTRODES]
    tables += [ocp.lambda_max[r] for r in ELECTRODES]
    tables += [ocp.mu[r] for r in ELECTRODES]
    if max(len(t) for t in tables) > 2:
        temperatures = np.linspace(T_low, T_high, 11)
    else:
        temperatures = np.array([T_low, T_high])

    conditions = [
        ("lambda_min", lambda r, T: P.polyval(T, ocp.lambda_min[r]) / T,
         (1 - kp.alpha_s) / kp.gamma1),
        ("lambda_max", lambda r, T: P.polyval(T, ocp.lambda_max[r]) / T,
         (1 - kp.beta_a) / kp.gamma2),
        ("mu_minus", lambda r, T: alpha_phie + P.polyval(T, ocp.mu[r]) / T,
         (1 - kp.alpha_a) / kp.gamma2),
        ("mu_plus", lambda r, T: alpha_phie + P.polyval(T, ocp.mu[r]) / T,
         (kp.alpha_a - 1) / kp.gamma1),
    ]
    report = ConditionReport()
    for name, value_of, threshold in conditions:
        for region in ELECTRODES:
            for T in temperatures:
                value = float(value_of(region, T))
                margin = value - threshold
                status = _classify(margin, threshold, boundary_rtol)
                if status == "boundary":
                    logging.warning(
                        f"{name} on {region.value} at T={T:g} is on the boundary, margin {margin:.3e}"
                    )
                report.entries.append(
                    ConditionEntry(name, region, float(T), value, threshold, margin, status)
                )
    return report
