"""Input checks shared by the estimator wrappers and the harness."""

from __future__ import annotations

import numbers
from collections.abc import Mapping

import numpy as np
from sklearn.utils import check_array

from .constitutive import ConstitutiveParams, EngineeringMaterial, as_params


def check_material(material) -> ConstitutiveParams:
    """Accept ``ConstitutiveParams``, ``EngineeringMaterial``, a mapping, or a length-7 vector."""
    if isinstance(material, (ConstitutiveParams, EngineeringMaterial, Mapping)):
        return as_params(material)
    arr = check_array(material, ensure_2d=False, dtype=float).ravel()
    if arr.shape != (7,):
        raise ValueError(f"a moduli vector must hold c1..c7, got shape {arr.shape}")
    return ConstitutiveParams(*map(float, arr))


def check_points(x, lo: float, hi: float, name: str = "x") -> np.ndarray:
    """Finite 1-D float array inside ``[lo, hi]`` (with a relative slack of 1e-12)."""
    arr = check_array(np.atleast_1d(np.asarray(x, dtype=float)), ensure_2d=False,
                      dtype=float, ensure_all_finite=True)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    tol = 1e-12 * (hi - lo)
    if arr.size and (arr.min() < lo - tol or arr.max() > hi + tol):
        raise ValueError(f"{name} must lie in [{lo}, {hi}]")
    return np.clip(arr, lo, hi)


def check_count(value, name: str, minimum: int = 1) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}, got {value!r}")
    return int(value)


def check_positive(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real) or not value > 0 \
            or not np.isfinite(value):
        raise ValueError(f"{name} must be a positive finite number, got {value!r}")
    return float(value)
