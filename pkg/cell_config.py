import logging
import math
import os
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple, TypedDict, Union

import numpy as np
from numpy.polynomial import polynomial as P

from config_utils import read_config_file
from current_profile import CurrentProfile, ProfileError, profile_from_raw
from mesh import ELECTRODES, CellGeometry, MeshError, MeshSpec, Region, build_mesh
from units import UnitError, default_t_range, normalize_units

FLUX_MODES = ("exponential", "truncated", "stub-linear")
THERMAL_MODES = ("full", "linear-truncated", "zero")
THERMAL_SCHEMES = ("implicit-euler", "exponential")

Coefficients = Union[float, List[Any]]


class ConfigError(Exception):
    pass


class RawGeometry(TypedDict):
    L: float
    L1: float
    delta: float
    Rs_neg: float
    Rs_pos: float
    A: float
    Rf: float


class RawTransport(TypedDict, total=False):
    De: Dict[str, Coefficients]
    De_min: float
    Ds_neg: float
    Ds_pos: float
    sigma: Dict[str, float]
    sigma_min: float
    kappa: Coefficients
    kappa_bounds: List[float]
    ce_ref: float
    alpha_e: float
    alpha_s_neg: float
    alpha_s_pos: float
    alpha_phie: float
    f_phie: Union[str, List[float]]


class RawOCP(TypedDict, total=False):
    lambda_min: Dict[str, Coefficients]
    lambda_max: Dict[str, Coefficients]
    mu: Dict[str, Coefficients]
    p: Dict[str, Coefficients]
    p_inf: float


class RawKinetics(TypedDict, total=False):
    alpha_a: float
    alpha_s: float
    beta_a: float
    gamma1: float
    gamma2: float
    delta1: Dict[str, float]
    delta2: Dict[str, float]
    cs_max: float
    ocp: RawOCP
    flux_mode: str
    s_inf: float
    g0: float


class RawThermal(TypedDict, total=False):
    alpha_T: float
    T_amb: float
    mode: str
    scheme: str
    A_T_bounds: List[float]
    B_T_max: float
    T_range: List[float]


class RawCellConfig(TypedDict, total=False):
    """TypedDict for a cell configuration file."""

    units: Dict[str, str]
    geometry: RawGeometry
    transport: RawTransport
    kinetics: RawKinetics
    thermal: RawThermal
    mesh: Dict[str, Any]
    initial: Dict[str, float]
    solver: Dict[str, Any]
    current: Dict[str, Any]


def _coeffs(value: Coefficients, ndim: int) -> np.ndarray:
    array = np.array(value, dtype=float)
    if array.ndim < ndim:
        # missing leading axes; the last axis is always T (or the polynomial variable)
        array = array.reshape((1,) * (ndim - array.ndim) + array.shape)
    if array.ndim != ndim:
        raise ConfigError(f"Expected a {ndim}D coefficient table, got shape {array.shape}")
    return array


def _per_region(
    section: Dict[str, Any],
    key: str,
    section_name: str,
    regions=ELECTRODES,
    ndim: int = 0,
) -> Dict[Region, Any]:
    value = section.get(key)
    if value is None:
        raise ConfigError(f"Missing key '{key}' in '{section_name}' section")
    if not isinstance(value, dict):
        # one value shared by every region
        value = {region.value: value for region in regions}
    result: Dict[Region, Any] = {}
    for region in regions:
        if region.value not in value:
            raise ConfigError(
                f"Missing region '{region.value}' for '{key}' in '{section_name}' section"
            )
        item = value[region.value]
        result[region] = _coeffs(item, ndim) if ndim else float(item)
    return result


@dataclass(frozen=True, eq=False)
class TransportParams:
    De: Dict[Region, np.ndarray]
    De_min: float
    Ds_neg: float
    Ds_pos: float
    sigma: Dict[Region, float]
    sigma_min: float
    kappa: np.ndarray
    kappa_bounds: Tuple[float, float]
    ce_ref: float
    alpha_e: float
    alpha_s_neg: float
    alpha_s_pos: float
    alpha_phie: float = 0.0
    f_phie: Union[str, Tuple[float, ...]] = "ln"

    def Ds(self, region: Region) -> float:
        return self.Ds_neg if region == Region.ANODE else self.Ds_pos

    def alpha_s(self, region: Region) -> float:
        return self.alpha_s_neg if region == Region.ANODE else self.alpha_s_pos

    @property
    def log_reference(self) -> bool:
        return self.f_phie == "ln"

    def f(self, ce: np.ndarray) -> np.ndarray:
        if self.log_reference:
            return np.log(ce)
        return P.polyval(ce, np.array(self.f_phie))

    def diffusivity(self, region: Region, fraction: np.ndarray) -> np.ndarray:
        return P.polyval(fraction, self.De[region])

    def conductivity(self, ce: np.ndarray, T: float) -> np.ndarray:
        q = ce / (ce + self.ce_ref)
        return P.polyval2d(q, np.full_like(q, T), self.kappa)


@dataclass(frozen=True, eq=False)
class OCPParams:
    """Coefficient tables for U = -lmin ln cs + lmax ln(cs_max - cs) + mu ln ce + p."""

    lambda_min: Dict[Region, np.ndarray]
    lambda_max: Dict[Region, np.ndarray]
    mu: Dict[Region, np.ndarray]
    p: Dict[Region, np.ndarray]
    p_inf: float
    cs_max: float
    ce_ref: float

    def p_value(self, region: Region, ce, csB, T: float) -> np.ndarray:
        theta = np.asarray(csB) / self.cs_max
        q = np.asarray(ce) / (np.asarray(ce) + self.ce_ref)
        return P.polyval3d(theta, q, np.full_like(theta, T), self.p[region])

    def p_dT(self, region: Region, ce, csB, T: float) -> np.ndarray:
        theta = np.asarray(csB) / self.cs_max
        q = np.asarray(ce) / (np.asarray(ce) + self.ce_ref)
        table = P.polyder(self.p[region], axis=2)
        return P.polyval3d(theta, q, np.full_like(theta, T), table)


@dataclass(frozen=True, eq=False)
class KineticParams:
    alpha_a: float
    alpha_s: float
    beta_a: float
    gamma1: float
    gamma2: float
    delta1: Dict[Region, float]
    delta2: Dict[Region, float]
    ocp: OCPParams
    flux_mode: str = "exponential"
    s_inf: Optional[float] = None
    g0: Optional[float] = None

    @property
    def cs_max(self) -> float:
        return self.ocp.cs_max


@dataclass(frozen=True)
class ThermalParams:
    alpha_T: float
    T_amb: float
    mode: str = "full"
    scheme: str = "implicit-euler"
    A_T_bounds: Tuple[float, float] = (0.0, 0.0)
    B_T_max: float = 0.0
    T_range: Tuple[float, float] = (198.15, 398.15)


@dataclass(frozen=True)
class MonitorSettings:
    ce_floor_fraction: float = 1e-8
    ce_cap_factor: float = 1e6
    csB_margin: float = 1e-6
    T_min: float = 1.0
    T_max: float = 5000.0
    potential_cap: float = 100.0


@dataclass(frozen=True)
class SolverSettings:
    dt0: float = 1.0
    dt_min: float = 1e-8
    dt_max: float = math.inf
    picard_tol: float = 1e-9
    max_picard: int = 25
    newton_tol: float = 1e-10
    max_newton: int = 50
    threads: int = 1
    record_every: int = 1
    snapshot_every: int = 0
    monitors: MonitorSettings = field(default_factory=MonitorSettings)


@dataclass(frozen=True)
class InitialConditions:
    ce0: float
    theta0_neg: float
    theta0_pos: float
    T0: float


@dataclass(frozen=True, eq=False)
class CellConfig:
    geometry: CellGeometry
    transport: TransportParams
    kinetics: KineticParams
    thermal: ThermalParams
    mesh: MeshSpec
    initial: InitialConditions
    solver: SolverSettings
    profile: Optional[CurrentProfile] = None
    raw: Dict[str, Any] = field(default_factory=dict)


def _section(raw: Dict[str, Any], name: str) -> Dict[str, Any]:
    section = raw.get(name)
    if section is None:
        raise ConfigError(f"Missing '{name}' section")
    if not isinstance(section, dict):
        raise ConfigError(f"Section '{name}' must be a mapping")
    return section


def _number(section: Dict[str, Any], key: str, section_name: str, default=None) -> float:
    value = section.get(key, default)
    if value is None:
        raise ConfigError(f"Missing key '{key}' in '{section_name}' section")
    try:
        return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"Key '{key}' in '{section_name}' section must be a number")


def _pair(section: Dict[str, Any], key: str, section_name: str, default) -> Tuple[float, float]:
    value = section.get(key, default)
    if len(value) != 2:
        raise ConfigError(f"Key '{key}' in '{section_name}' section needs two values")
    return (float(value[0]), float(value[1]))


def _parse_geometry(raw: Dict[str, Any]) -> CellGeometry:
    g = _section(raw, "geometry")
    return CellGeometry(
        L=_number(g, "L", "geometry"),
        L1=_number(g, "L1", "geometry"),
        delta=_number(g, "delta", "geometry"),
        Rs_neg=_number(g, "Rs_neg", "geometry"),
        Rs_pos=_number(g, "Rs_pos", "geometry"),
        A=_number(g, "A", "geometry"),
        Rf=_number(g, "Rf", "geometry", 0.0),
    )


def _parse_transport(raw: Dict[str, Any]) -> TransportParams:
    t = _section(raw, "transport")
    kappa = t.get("kappa")
    if kappa is None:
        raise ConfigError("Missing key 'kappa' in 'transport' section")
    f_phie = t.get("f_phie", "ln")
    if f_phie != "ln":
        if not isinstance(f_phie, list):
            raise ConfigError("Key 'f_phie' must be 'ln' or a list of coefficients")
        f_phie = tuple(float(c) for c in f_phie)
    De = _per_region(t, "De", "transport", regions=tuple(Region), ndim=1)
    return TransportParams(
        De=De,
        De_min=_number(t, "De_min", "transport", min(float(c[0]) for c in De.values())),
        Ds_neg=_number(t, "Ds_neg", "transport"),
        Ds_pos=_number(t, "Ds_pos", "transport"),
        sigma=_per_region(t, "sigma", "transport"),
        sigma_min=_number(t, "sigma_min", "transport", 0.0),
        kappa=_coeffs(kappa, 2),
        kappa_bounds=_pair(t, "kappa_bounds", "transport", [0.0, math.inf]),
        ce_ref=_number(t, "ce_ref", "transport", 1.0),
        alpha_e=_number(t, "alpha_e", "transport"),
        alpha_s_neg=_number(t, "alpha_s_neg", "transport"),
        alpha_s_pos=_number(t, "alpha_s_pos", "transport"),
        alpha_phie=_number(t, "alpha_phie", "transport", 0.0),
        f_phie=f_phie,
    )


def _parse_kinetics(raw: Dict[str, Any], ce_ref: float) -> KineticParams:
    k = _section(raw, "kinetics")
    ocp_raw = k.get("ocp") or {}
    zero = {region.value: [0.0] for region in ELECTRODES}
    ocp = OCPParams(
        lambda_min=_per_region({"lambda_min": zero, **ocp_raw}, "lambda_min", "ocp", ndim=1),
        lambda_max=_per_region({"lambda_max": zero, **ocp_raw}, "lambda_max", "ocp", ndim=1),
        mu=_per_region({"mu": zero, **ocp_raw}, "mu", "ocp", ndim=1),
        p=_per_region({"p": zero, **ocp_raw}, "p", "ocp", ndim=3),
        p_inf=_number(ocp_raw, "p_inf", "ocp", math.inf),
        cs_max=_number(k, "cs_max", "kinetics"),
        ce_ref=ce_ref,
    )
    flux_mode = k.get("flux_mode", "exponential")
    if flux_mode not in FLUX_MODES:
        raise ConfigError(f"Unknown flux_mode '{flux_mode}', expected one of {FLUX_MODES}")
    return KineticParams(
        alpha_a=_number(k, "alpha_a", "kinetics"),
        alpha_s=_number(k, "alpha_s", "kinetics"),
        beta_a=_number(k, "beta_a", "kinetics"),
        gamma1=_number(k, "gamma1", "kinetics"),
        gamma2=_number(k, "gamma2", "kinetics"),
        delta1=_per_region(k, "delta1", "kinetics"),
        delta2=_per_region(k, "delta2", "kinetics"),
        ocp=ocp,
        flux_mode=flux_mode,
        s_inf=None if k.get("s_inf") is None else float(k["s_inf"]),
        g0=None if k.get("g0") is None else float(k["g0"]),
    )


def _parse_thermal(raw: Dict[str, Any]) -> ThermalParams:
    t = _section(raw, "thermal")
    T_amb = _number(t, "T_amb", "thermal")
    mode = t.get("mode", "full")
    if mode not in THERMAL_MODES:
        raise ConfigError(f"Unknown thermal mode '{mode}', expected one of {THERMAL_MODES}")
    scheme = t.get("scheme", "implicit-euler")
    if scheme not in THERMAL_SCHEMES:
        raise ConfigError(
            f"Unknown thermal scheme '{scheme}', expected one of {THERMAL_SCHEMES}"
        )
    return ThermalParams(
        alpha_T=_number(t, "alpha_T", "thermal"),
        T_amb=T_amb,
        mode=mode,
        scheme=scheme,
        A_T_bounds=_pair(t, "A_T_bounds", "thermal", [0.0, 0.0]),
        B_T_max=_number(t, "B_T_max", "thermal", 0.0),
        T_range=_pair(t, "T_range", "thermal", default_t_range(T_amb)),
    )


def _parse_solver(raw: Dict[str, Any]) -> SolverSettings:
    s = raw.get("solver") or {}
    monitors_raw = s.get("monitors") or {}
    unknown = set(monitors_raw) - set(MonitorSettings.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"Invalid keys {sorted(unknown)} in 'monitors' section")
    monitors = MonitorSettings(**{k: float(v) for k, v in monitors_raw.items()})
    known = {k: s[k] for k in SolverSettings.__dataclass_fields__ if k in s}
    known.pop("monitors", None)
    unknown = set(s) - set(SolverSettings.__dataclass_fields__)
    if unknown:
        raise ConfigError(f"Invalid keys {sorted(unknown)} in 'solver' section")
    for key in ("max_picard", "max_newton", "threads", "record_every", "snapshot_every"):
        if key in known:
            known[key] = int(known[key])
    for key in ("dt0", "dt_min", "dt_max", "picard_tol", "newton_tol"):
        if key in known:
            known[key] = float(known[key])
    return SolverSettings(monitors=monitors, **known)


def parse_cell_config(raw: Dict[str, Any], base_dir: str = ".") -> CellConfig:
    try:
        normalized = normalize_units(raw)
    except UnitError as e:
        raise ConfigError(str(e))
    transport = _parse_transport(normalized)
    mesh_raw = normalized.get("mesh") or {}
    try:
        mesh_spec = MeshSpec(**mesh_raw)
    except TypeError:
        raise ConfigError(
            f"Invalid keys in 'mesh' section: {sorted(mesh_raw)}; expected "
            f"{sorted(MeshSpec.__dataclass_fields__)}"
        )
    initial = _section(normalized, "initial")
    thermal = _parse_thermal(normalized)
    profile = None
    if "current" in normalized:
        try:
            profile = profile_from_raw(normalized["current"], base_dir)
        except ProfileError as e:
            raise ConfigError(f"Invalid 'current' section: {e}")
    return CellConfig(
        geometry=_parse_geometry(normalized),
        transport=transport,
        kinetics=_parse_kinetics(normalized, transport.ce_ref),
        thermal=thermal,
        mesh=mesh_spec,
        initial=InitialConditions(
            ce0=_number(initial, "ce0", "initial"),
            theta0_neg=_number(initial, "theta0_neg", "initial"),
            theta0_pos=_number(initial, "theta0_pos", "initial"),
            T0=_number(initial, "T0", "initial", thermal.T_amb),
        ),
        solver=_parse_solver(normalized),
        profile=profile,
        raw=normalized,
    )


def load_cell_config(file: str) -> CellConfig:
    logging.info(f"loading cell configuration {file}")
    raw = read_config_file(file)
    if not isinstance(raw, dict):
        raise ConfigError(f"Configuration {file} must be a mapping")
    return parse_cell_config(raw, os.path.dirname(os.path.abspath(file)))


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class ValidationReport:
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> List[CheckResult]:
        return [check for check in self.checks if not check.passed]

    def as_markdown(self) -> str:
        table = "| Check | Result |\n|-----------|--------|\n"
        for check in self.checks:
            if check.passed:
                table += f"| {check.name} | ✅ {check.detail} |\n"
            else:
                table += f"| {check.name} | ❌ Fail: {check.detail} |\n"
        return table


# sample grids for bounds on the coefficient tables
_FRACTIONS = np.linspace(0.0, 1.0, 21)


def _t_grid(thermal: ThermalParams) -> np.ndarray:
    return np.linspace(thermal.T_range[0], thermal.T_range[1], 11)


def _check_geometry_positive(config: CellConfig) -> Tuple[bool, str]:
    g = config.geometry
    bad = [
        f"{name}={value}"
        for name, value in (
            ("L1", g.L1),
            ("delta", g.delta),
            ("Rs_neg", g.Rs_neg),
            ("Rs_pos", g.Rs_pos),
            ("A", g.A),
        )
        if not value > 0
    ]
    return not bad, ", ".join(bad) or "all positive"


def _check_cathode(config: CellConfig) -> Tuple[bool, str]:
    g = config.geometry
    ok = g.cathode_start < g.L
    return ok, f"L1 + delta = {g.cathode_start}, L = {g.L}"


def _check_film(config: CellConfig) -> Tuple[bool, str]:
    return config.geometry.Rf >= 0, f"Rf = {config.geometry.Rf}"


def _exponent_check(name: str) -> Callable[[CellConfig], Tuple[bool, str]]:
    def check(config: CellConfig) -> Tuple[bool, str]:
        value = getattr(config.kinetics, name)
        if 0 < value < 1:
            return True, f"{name} = {value}"
        return False, f"{name} ∉ (0,1): {value}"

    return check


def _check_slopes(config: CellConfig) -> Tuple[bool, str]:
    k = config.kinetics
    return k.gamma1 > 0 and k.gamma2 > 0, f"gamma1 = {k.gamma1}, gamma2 = {k.gamma2}"


def _check_prefactors(config: CellConfig) -> Tuple[bool, str]:
    k = config.kinetics
    bad = [
        f"{name}[{region.value}]={values[region]}"
        for name, values in (("delta1", k.delta1), ("delta2", k.delta2))
        for region in ELECTRODES
        if not values[region] > 0
    ]
    return not bad, ", ".join(bad) or "all positive"


def _check_cs_max(config: CellConfig) -> Tuple[bool, str]:
    cs_max = config.kinetics.cs_max
    return 0 < cs_max < 1, f"cs_max = {cs_max} in normalized units"


def _check_flux_mode(config: CellConfig) -> Tuple[bool, str]:
    k = config.kinetics
    if k.flux_mode == "truncated":
        if k.s_inf is None or not math.isfinite(k.s_inf):
            return False, "truncated mode needs a finite s_inf"
        if not config.transport.log_reference:
            return False, "truncated mode needs f_phie = ln"
        return True, f"truncated, s_inf = {k.s_inf}"
    if k.flux_mode == "stub-linear":
        if k.g0 is None or not k.g0 > 0:
            return False, f"stub-linear mode needs g0 > 0, got {k.g0}"
        return True, f"stub-linear, g0 = {k.g0}"
    return True, k.flux_mode


def _check_diffusivity(config: CellConfig) -> Tuple[bool, str]:
    t = config.transport
    if not t.De_min > 0:
        return False, f"De_min = {t.De_min} must be positive"
    lowest = min(float(np.min(t.diffusivity(r, _FRACTIONS))) for r in Region)
    return lowest >= t.De_min, f"min De = {lowest:.6g}, De_min = {t.De_min}"


def _check_conductivity(config: CellConfig) -> Tuple[bool, str]:
    t = config.transport
    k0, k1 = t.kappa_bounds
    if not k0 > 0:
        return False, f"kappa_0 = {k0} must be positive"
    q, T = np.meshgrid(_FRACTIONS, _t_grid(config.thermal))
    values = P.polyval2d(q, T, t.kappa)
    lo, hi = float(values.min()), float(values.max())
    return k0 <= lo and hi <= k1, f"kappa in [{lo:.6g}, {hi:.6g}], bounds [{k0}, {k1}]"


def _check_sigma(config: CellConfig) -> Tuple[bool, str]:
    t = config.transport
    lowest = min(t.sigma.values())
    ok = t.sigma_min > 0 and lowest >= t.sigma_min
    return ok, f"min sigma = {lowest}, sigma_min = {t.sigma_min}"


def _check_transport_coefficients(config: CellConfig) -> Tuple[bool, str]:
    t = config.transport
    bad = [
        f"{name}={value}"
        for name, value in (("Ds_neg", t.Ds_neg), ("Ds_pos", t.Ds_pos))
        if not value > 0
    ]
    if t.alpha_phie < 0:
        bad.append(f"alpha_phie={t.alpha_phie}")
    return not bad, ", ".join(bad) or "Ds > 0, alpha_phie >= 0"


def _check_ocp_nonnegative(config: CellConfig) -> Tuple[bool, str]:
    ocp = config.kinetics.ocp
    T = _t_grid(config.thermal)
    bad = []
    for name, table in (
        ("lambda_min", ocp.lambda_min),
        ("lambda_max", ocp.lambda_max),
        ("mu", ocp.mu),
    ):
        for region in ELECTRODES:
            lowest = float(np.min(P.polyval(T, table[region])))
            if lowest < 0:
                bad.append(f"{name}[{region.value}] min {lowest:.3g}")
    return not bad, ", ".join(bad) or "nonnegative on T range"


def _check_p_bound(config: CellConfig) -> Tuple[bool, str]:
    ocp = config.kinetics.ocp
    theta, q, T = np.meshgrid(_FRACTIONS, _FRACTIONS, _t_grid(config.thermal))
    worst = max(
        float(np.max(np.abs(P.polyval3d(theta, q, T, ocp.p[region]))))
        for region in ELECTRODES
    )
    return worst <= ocp.p_inf, f"max |p| = {worst:.6g}, p_inf = {ocp.p_inf}"


def _check_thermal(config: CellConfig) -> Tuple[bool, str]:
    th = config.thermal
    ok = th.alpha_T >= 0 and th.T_amb > 0 and 0 < th.T_range[0] < th.T_range[1]
    return ok, f"alpha_T = {th.alpha_T}, T_amb = {th.T_amb}, T_range = {th.T_range}"


def _check_linear_thermal(config: CellConfig) -> Tuple[bool, str]:
    th = config.thermal
    if th.mode != "linear-truncated":
        return True, f"mode {th.mode}"
    lo, hi = th.A_T_bounds
    ok = th.B_T_max >= 0 and lo <= hi < th.alpha_T
    return ok, f"B_T in [0, {th.B_T_max}], A_T in [{lo}, {hi}], alpha_T = {th.alpha_T}"


def _check_mesh(config: CellConfig) -> Tuple[bool, str]:
    g = config.geometry
    mesh = build_mesh(g, config.mesh)
    aligned = (
        mesh.faces[mesh.n_neg] == g.L1
        and mesh.faces[mesh.n_neg + mesh.n_sep] == g.cathode_start
    )
    total = float(mesh.widths.sum())
    ok = aligned and abs(total - g.L) <= 1e-14 * g.L
    return ok, f"{mesh.size} cells, interfaces aligned: {aligned}, sum of widths {total}"


def _check_initial(config: CellConfig) -> Tuple[bool, str]:
    i = config.initial
    bad = []
    if not i.ce0 > 0:
        bad.append(f"ce0={i.ce0}")
    for name, value in (("theta0_neg", i.theta0_neg), ("theta0_pos", i.theta0_pos)):
        if not 0 < value < 1:
            bad.append(f"{name}={value}")
    if not i.T0 > 0:
        bad.append(f"T0={i.T0}")
    return not bad, ", ".join(bad) or "admissible"


def _check_profile(config: CellConfig) -> Tuple[bool, str]:
    if config.profile is None:
        return True, "no profile in config"
    p = config.profile
    return True, f"{len(p.pieces)} pieces on [0, {p.t_end}]"


CHECKS: List[Tuple[str, Callable[[CellConfig], Tuple[bool, str]]]] = [
    ("Geometry lengths positive", _check_geometry_positive),
    ("Cathode nonempty", _check_cathode),
    ("Film resistance", _check_film),
    ("alpha_a in (0,1)", _exponent_check("alpha_a")),
    ("alpha_s in (0,1)", _exponent_check("alpha_s")),
    ("beta_a in (0,1)", _exponent_check("beta_a")),
    ("Exponential slopes", _check_slopes),
    ("Rate prefactors", _check_prefactors),
    ("cs_max normalization", _check_cs_max),
    ("Flux mode", _check_flux_mode),
    ("Electrolyte diffusivity bound", _check_diffusivity),
    ("Electrolyte conductivity bounds", _check_conductivity),
    ("Electrode conductivity bound", _check_sigma),
    ("Transport coefficients", _check_transport_coefficients),
    ("OCP coefficients nonnegative", _check_ocp_nonnegative),
    ("OCP p bound", _check_p_bound),
    ("Thermal parameters", _check_thermal),
    ("Linear thermal bounds", _check_linear_thermal),
    ("Mesh alignment", _check_mesh),
    ("Initial data", _check_initial),
    ("Current profile", _check_profile),
]


def validate_config(config: CellConfig) -> ValidationReport:
    report = ValidationReport()
    for name, check in CHECKS:
        try:
            passed, detail = check(config)
        except (MeshError, ValueError, ArithmeticError, KeyError) as e:
            passed, detail = False, f"{type(e).__name__}: {e}"
        report.checks.append(CheckResult(name, bool(passed), detail))
        if not passed:
            logging.debug(f"check '{name}' failed: {detail}")
    return report
