import copy
import logging
import math
from typing import Any, Dict, Tuple

import numpy as np

# factors to the internal units: concentrations in mol/cm3, lengths in m
CONCENTRATION_UNITS = {
    "normalized": 1.0,
    "mol/cm3": 1.0,
    "mol/L": 1e-3,
    "mol/m3": 1e-6,
}
LENGTH_UNITS = {
    "normalized": 1.0,
    "m": 1.0,
    "cm": 1e-2,
    "mm": 1e-3,
    "um": 1e-6,
}

# (section, key) -> (concentration exponent, length exponent)
FIELD_DIMENSIONS: Dict[Tuple[str, str], Tuple[float, float]] = {
    ("geometry", "L"): (0, 1),
    ("geometry", "L1"): (0, 1),
    ("geometry", "delta"): (0, 1),
    ("geometry", "Rs_neg"): (0, 1),
    ("geometry", "Rs_pos"): (0, 1),
    ("geometry", "A"): (0, 2),
    ("geometry", "Rf"): (0, 2),
    ("transport", "De"): (0, 2),
    ("transport", "De_min"): (0, 2),
    ("transport", "Ds_neg"): (0, 2),
    ("transport", "Ds_pos"): (0, 2),
    ("transport", "sigma"): (0, -1),
    ("transport", "sigma_min"): (0, -1),
    ("transport", "kappa"): (0, -1),
    ("transport", "kappa_bounds"): (0, -1),
    ("transport", "alpha_e"): (1, 3),
    ("transport", "alpha_s_neg"): (1, 4),
    ("transport", "alpha_s_pos"): (1, 4),
    ("kinetics", "cs_max"): (1, 0),
    ("transport", "ce_ref"): (1, 0),
    ("initial", "ce0"): (1, 0),
}


class UnitError(Exception):
    pass


def default_t_range(T_amb: float) -> Tuple[float, float]:
    return (max(1.0, T_amb - 100.0), T_amb + 100.0)


def unit_factors(raw: Dict[str, Any]) -> Tuple[float, float]:
    units = raw.get("units") or {}
    conc = units.get("concentration", "normalized")
    length = units.get("length", "normalized")
    if conc not in CONCENTRATION_UNITS:
        raise UnitError(
            f"Unknown concentration unit '{conc}', expected one of {list(CONCENTRATION_UNITS)}"
        )
    if length not in LENGTH_UNITS:
        raise UnitError(
            f"Unknown length unit '{length}', expected one of {list(LENGTH_UNITS)}"
        )
    return CONCENTRATION_UNITS[conc], LENGTH_UNITS[length]


def _scale(value: Any, factor: float) -> Any:
    if isinstance(value, dict):
        return {k: _scale(v, factor) for k, v in value.items()}
    if isinstance(value, list):
        return [_scale(v, factor) for v in value]
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value) * factor
    return value


def _poly_eval(coeffs: list, T: float) -> float:
    return sum(float(c) * T**k for k, c in enumerate(coeffs))


def _log_offset(ocp: Dict[str, Any], region: str, log_s: float) -> list:
    """T-coefficients of (lambda_min - lambda_max - mu) * ln s for one region."""
    terms = [
        (ocp.get("lambda_min", {}).get(region, [0.0]), 1.0),
        (ocp.get("lambda_max", {}).get(region, [0.0]), -1.0),
        (ocp.get("mu", {}).get(region, [0.0]), -1.0),
    ]
    size = max(len(coeffs) for coeffs, _ in terms)
    offset = [0.0] * size
    for coeffs, sign in terms:
        for k, c in enumerate(coeffs):
            offset[k] += sign * float(c) * log_s
    return offset


def _shift_p(p_table: Any, offset: list) -> list:
    table = np.array(0.0 if p_table is None else p_table, dtype=float)
    # leading axes are (theta, q); T is always the last one
    table = table.reshape((1,) * (3 - table.ndim) + table.shape)
    if table.shape[2] < len(offset):
        table = np.pad(table, ((0, 0), (0, 0), (0, len(offset) - table.shape[2])))
    table[0, 0, : len(offset)] += offset
    return table.tolist()


def normalize_units(raw: Dict[str, Any]) -> Dict[str, Any]:
    """Return a copy of a raw config tree expressed in internal units.

    The result declares ``normalized`` units, so normalizing it again is a no-op.
    """
    s, ell = unit_factors(raw)
    result = copy.deepcopy(raw)
    result["units"] = {"concentration": "normalized", "length": "normalized"}
    if s == 1.0 and ell == 1.0:
        return result

    logging.debug(f"normalizing units: concentration x{s}, length x{ell}")
    for (section, key), (c_exp, l_exp) in FIELD_DIMENSIONS.items():
        block = result.get(section)
        if block is None or key not in block:
            continue
        block[key] = _scale(block[key], s**c_exp * ell**l_exp)

    kinetics = result.get("kinetics")
    if kinetics is None:
        return result

    exponent_sum = sum(
        float(kinetics.get(k, 0.5)) for k in ("alpha_a", "alpha_s", "beta_a")
    )
    for key in ("delta1", "delta2"):
        if key in kinetics:
            kinetics[key] = _scale(kinetics[key], s**-exponent_sum * ell**-3)

    ocp = kinetics.get("ocp")
    if ocp is None or s == 1.0:
        return result
    log_s = math.log(s)
    thermal = result.get("thermal") or {}
    T_range = thermal.get("T_range") or default_t_range(
        float(thermal.get("T_amb", 298.15))
    )
    p_tables = ocp.setdefault("p", {})
    worst = 0.0
    for region in ("anode", "cathode"):
        offset = _log_offset(ocp, region, log_s)
        p_tables[region] = _shift_p(p_tables.get(region), offset)
        worst = max(worst, *(abs(_poly_eval(offset, T)) for T in T_range))
    ocp["p_inf"] = float(ocp.get("p_inf", 0.0)) + worst
    return result
