"""Isotropic first- and second-gradient material description.

Units are MPa for ``c1, c2`` and N (= MPa mm^2) for ``c3 .. c7``; lengths in mm.
"""

from __future__ import annotations

from dataclasses import astuple, dataclass
from typing import Mapping, Union

import numpy as np


@dataclass(frozen=True)
class EngineeringMaterial:
    """Young's modulus ``E`` (MPa), Poisson ratio ``nu`` and characteristic length ``lc`` (mm)."""

    E: float
    nu: float
    lc: float = 0.0

    def __post_init__(self):
        if not self.E > 0:
            raise ValueError(f"E must be positive, got {self.E}")
        if not -1.0 < self.nu < 0.5:
            raise ValueError(f"nu must lie in (-1, 0.5), got {self.nu}")
        if not self.lc >= 0:
            raise ValueError(f"lc must be non-negative, got {self.lc}")


@dataclass(frozen=True)
class ConstitutiveParams:
    """Moduli ``c1 .. c7``.

    ``c1`` and ``c2`` are the Lame constants (``lam`` and ``mu``). Individual
    second-gradient moduli may be negative; well-posedness is checked where a
    reduced model needs it.
    """

    c1: float
    c2: float
    c3: float = 0.0
    c4: float = 0.0
    c5: float = 0.0
    c6: float = 0.0
    c7: float = 0.0

    def __post_init__(self):
        if not self.c2 > 0:
            raise ValueError(f"c2 (shear modulus) must be positive, got {self.c2}")

    @property
    def lam(self) -> float:
        return self.c1

    @property
    def mu(self) -> float:
        return self.c2

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)


# Table values published for the two benchmarks.
SHEAR_TABLE = ConstitutiveParams(6577.18, 134.23, 0.59, 0.59, 0.18, -0.23, 0.18)
PULLOUT_TABLE = ConstitutiveParams(5555.55, 8333.33, 6.20, 1.55, 8.37, 2.02, 8.37)


def params_from_engineering(mat: EngineeringMaterial) -> ConstitutiveParams:
    """Granular-micromechanics map from ``(E, nu, lc)`` to ``c1 .. c7``."""
    E, nu, lc = mat.E, mat.nu, mat.lc
    if nu >= 0.5 or nu <= -1.0:
        raise ValueError(f"nu={nu} makes the Lame constants singular")
    lam = E * nu / ((1.0 + nu) * (1.0 - 2.0 * nu))
    mu = E / (2.0 * (1.0 + nu))
    l2 = lc * lc
    c34 = l2 / 112.0 * lam
    c57 = l2 / 1120.0 * (7.0 * mu + 3.0 * lam)
    c6 = l2 / 1120.0 * (7.0 * mu - 4.0 * lam)
    return ConstitutiveParams(lam, mu, c34, c34, c57, c6, c57)


MaterialLike = Union[ConstitutiveParams, EngineeringMaterial, Mapping[str, float]]


def as_params(material: MaterialLike) -> ConstitutiveParams:
    """Coerce an engineering material, explicit moduli or a config mapping."""
    if isinstance(material, ConstitutiveParams):
        return material
    if isinstance(material, EngineeringMaterial):
        return params_from_engineering(material)
    if isinstance(material, Mapping):
        keys = set(material)
        if {"E", "nu"} <= keys:
            return params_from_engineering(
                EngineeringMaterial(float(material["E"]), float(material["nu"]),
                                    float(material.get("lc", 0.0))))
        if {"c1", "c2"} <= keys:
            return ConstitutiveParams(**{k: float(v) for k, v in material.items()})
        raise ValueError(f"material mapping needs E/nu[/lc] or c1..c7, got {sorted(keys)}")
    raise TypeError(f"cannot interpret {type(material).__name__} as a material")


def _check_dim(dim):
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")


def build_isotropic_C(params: ConstitutiveParams, dim: int = 3) -> np.ndarray:
    """Dense rank-4 stiffness ``C_ijkl = c1 d_ij d_kl + c2 (d_ik d_jl + d_il d_jk)``."""
    _check_dim(dim)
    d = np.eye(dim)
    return (params.c1 * np.einsum("ij,kl->ijkl", d, d)
            + params.c2 * (np.einsum("ik,jl->ijkl", d, d) + np.einsum("il,jk->ijkl", d, d)))


# (coefficient index, delta-pair string) for every term of the isotropic rank-6 tensor
_D_TERMS = (
    (0, "ij,kl,mn"), (0, "in,jk,lm"), (0, "ij,km,ln"), (0, "ik,jn,lm"),
    (1, "ij,kn,ml"),
    (2, "ik,jl,mn"), (2, "im,jk,ln"), (2, "ik,jm,ln"), (2, "il,jk,mn"),
    (3, "il,jm,kn"), (3, "im,jl,kn"),
    (4, "il,jn,mk"), (4, "im,jn,lk"), (4, "in,jl,km"), (4, "in,jm,kl"),
)


def build_isotropic_D(params: ConstitutiveParams, dim: int = 3) -> np.ndarray:
    """Dense rank-6 strain-gradient stiffness ``D_ijklmn`` (15 delta products)."""
    _check_dim(dim)
    d = np.eye(dim)
    coeffs = (params.c3, params.c4, params.c5, params.c6, params.c7)
    D = np.zeros((dim,) * 6)
    for which, pairs in _D_TERMS:
        D += coeffs[which] * np.einsum(pairs + "->ijklmn", d, d, d)
    return D


@dataclass(frozen=True)
class StrainState:
    """Displacement gradient ``u_{i,j}`` and second gradient ``u_{i,jk}``."""

    grad_u: np.ndarray
    grad2_u: np.ndarray

    def __post_init__(self):
        g1 = np.asarray(self.grad_u, dtype=float)
        g2 = np.asarray(self.grad2_u, dtype=float)
        dim = g1.shape[0]
        if g1.shape != (dim, dim) or g2.shape != (dim, dim, dim):
            raise ValueError(f"inconsistent shapes {g1.shape} and {g2.shape}")
        if not np.allclose(g2, g2.transpose(0, 2, 1), rtol=0.0, atol=1e-14 * (1 + np.abs(g2).max())):
            raise ValueError("grad2_u must be symmetric in its last two indices")
        object.__setattr__(self, "grad_u", g1)
        object.__setattr__(self, "grad2_u", g2)

    @property
    def dim(self) -> int:
        return self.grad_u.shape[0]

    @property
    def strain(self) -> np.ndarray:
        return 0.5 * (self.grad_u + self.grad_u.T)

    @property
    def strain_gradient(self) -> np.ndarray:
        # eps_ij,k = (u_i,jk + u_j,ik) / 2
        return 0.5 * (self.grad2_u + self.grad2_u.transpose(1, 0, 2))


def energy_density(C: np.ndarray, D: np.ndarray, s: StrainState) -> float:
    """``w = 1/2 eps:C:eps + 1/2 grad(eps):D:grad(eps)`` (centro-symmetric, no coupling)."""
    if C.shape != (s.dim,) * 4 or D.shape != (s.dim,) * 6:
        raise ValueError("C, D and the strain state must share the same dimension")
    eps = s.strain
    geps = s.strain_gradient
    return float(0.5 * np.einsum("ij,ijkl,kl->", eps, C, eps)
                 + 0.5 * np.einsum("ijk,ijklmn,lmn->", geps, D, geps))
