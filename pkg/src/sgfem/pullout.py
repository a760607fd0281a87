"""Nonlinear 1-D pull-out model: a rigid bar pulled out of a clamped cylinder.

The axial displacement ``u(r)`` lives on ``[r_in, R]``; ``r_in > 0`` stands in
for the vanishing bar radius. The stored energy density depends on
``a = u'`` and ``b = u''`` and is integrated with the axisymmetric measure
``r dr`` (or ``dr``).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .constitutive import ConstitutiveParams, MaterialLike, as_params
from .discretization import BSPLINE, HERMITE, LAGRANGE, BasisFamily
from .fem1d import DiscreteSolution1D, quadrature_table
from .linalg import TripletBuffer, apply_dirichlet, compress, solve_sparse
from .mesh import build_dof_map, build_mixed_dof_map, interval_mesh

logger = logging.getLogger(__name__)

MIXED = "mixed"
PULLOUT_FAMILIES = (LAGRANGE, HERMITE, MIXED, BSPLINE)


@dataclass(frozen=True)
class PulloutDomain:
    """Radial interval ``[r_in, R]`` (mm), imposed bar displacement ``u_p`` (mm)
    and integration measure ``"r"`` (``r dr``) or ``"1"`` (``dr``)."""

    r_in: float = 0.01
    R: float = 1.0
    u_p: float = 0.1
    measure: str = "r"

    def __post_init__(self):
        if not 0.0 < self.r_in < self.R:
            raise ValueError(f"need 0 < r_in < R, got r_in={self.r_in}, R={self.R}")
        if not np.isfinite(self.u_p):
            raise ValueError("u_p must be finite")
        if self.measure not in ("r", "1"):
            raise ValueError("measure must be 'r' or '1'")


def pullout_energy_density(du, d2u, r, params: ConstitutiveParams):
    """Energy density ``w(u', u'')`` at radius ``r``, written out term by term."""
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("the pull-out energy is only defined for r > 0")
    c1, c2, c3, c4, c5, c6, c7 = params.as_array()
    a = np.asarray(du, dtype=float)
    b = np.asarray(d2u, dtype=float)
    return (c1 / 8 * a**4
            + c2 * (a**2 / 2 + a**4 / 4)
            + c3 / (2 * r) * (a**2 * b + (a + 2 * r * b))
            + 2 * c4 * a**2 * b**2
            + c5 / (4 * r**2) * (a**2 * (1 + 4 * r**2 * b**2) + r**2 * b**2
                                 + 4 * r * a**3 * b + 2 * r * a * b + a**4)
            + c6 / (2 * r**2) * (a**2 * (2 * r**2 * b**2 + 1) + r**2 * b**2 + a**4)
            + c7 / (4 * r**2) * (a**2 * (4 * r**2 * b**2 + 1) + r**2 * b**2 + a**4))


def _monomials(params: ConstitutiveParams, r):
    """``w`` as ``sum coef * a**m * b**n``; returns ``[(m, n, coef(r)), ...]``."""
    c1, c2, c3, c4, c5, c6, c7 = params.as_array()
    r = np.asarray(r, dtype=float)
    ir = 1.0 / r
    ir2 = ir * ir
    grad2 = (c5 / 4 + c6 / 2 + c7 / 4) * ir2
    return [
        (4, 0, c1 / 8 + c2 / 4 + grad2),
        (2, 0, c2 / 2 + grad2),
        (2, 1, c3 / 2 * ir),
        (1, 0, c3 / 2 * ir),
        (0, 1, c3 + 0.0 * r),
        (2, 2, 2 * c4 + c5 + c6 + c7 + 0.0 * r),
        (0, 2, c5 / 4 + c6 / 2 + c7 / 4 + 0.0 * r),
        (3, 1, c5 * ir),
        (1, 1, c5 / 2 * ir),
    ]


def _pow(x, n):
    return np.ones_like(x) if n == 0 else x**n


def energy_derivatives(a, b, r, params: ConstitutiveParams):
    """``w, (w_a, w_b), (w_aa, w_ab, w_bb)`` evaluated exactly from the monomial form."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    w = np.zeros(np.broadcast(a, b, r).shape)
    wa, wb = np.zeros_like(w), np.zeros_like(w)
    waa, wab, wbb = np.zeros_like(w), np.zeros_like(w), np.zeros_like(w)
    for m, n, c in _monomials(params, r):
        w += c * _pow(a, m) * _pow(b, n)
        if m:
            wa += m * c * _pow(a, m - 1) * _pow(b, n)
        if n:
            wb += n * c * _pow(a, m) * _pow(b, n - 1)
        if m >= 2:
            waa += m * (m - 1) * c * _pow(a, m - 2) * _pow(b, n)
        if m and n:
            wab += m * n * c * _pow(a, m - 1) * _pow(b, n - 1)
        if n >= 2:
            wbb += n * (n - 1) * c * _pow(a, m) * _pow(b, n - 2)
    return w, (wa, wb), (waa, wab, wbb)


class PulloutProblem:
    """Discrete energy, residual and tangent for one family and mesh.

    ``family`` is ``"lagrange"`` (C0, element-wise second derivatives),
    ``"hermite"``, ``"bspline"`` or ``"mixed"`` (fields u, g, L with ``g ~ u'``
    enforced by the multiplier L and ``u''`` replaced by ``g'``).
    """

    def __init__(self, family: str, n_elem: int, domain: PulloutDomain,
                 params: ConstitutiveParams, degree: int | None = None,
                 clamp_outer_slope: bool = False):
        if family not in PULLOUT_FAMILIES:
            raise ValueError(f"family must be one of {PULLOUT_FAMILIES}, got {family!r}")
        self.family_name = family
        self.domain = domain
        self.params = params
        self.mesh = interval_mesh(domain.r_in, domain.R, n_elem)
        if family == MIXED:
            self.basis = BasisFamily.lagrange(degree or 1)
            self.dofmap = build_mixed_dof_map(self.mesh, self.basis)
            self.field_map = build_dof_map(self.mesh, self.basis)
        else:
            self.basis = {LAGRANGE: BasisFamily.lagrange(degree or 2),
                          HERMITE: BasisFamily.hermite(),
                          BSPLINE: BasisFamily.bspline(degree or 2)}[family]
            self.dofmap = build_dof_map(self.mesh, self.basis)
            self.field_map = self.dofmap
        self.q = quadrature_table(self.basis, self.mesh, self.field_map,
                                  self.basis.default_quadrature())
        r = self.q.x
        if np.any(r <= 0):
            raise ValueError("quadrature point at r <= 0; the mesh must start at r_in > 0")
        self.dmu = self.q.wdx * (r if domain.measure == "r" else 1.0)
        self.constraints = self._constraints(clamp_outer_slope)

    @property
    def n_dofs(self) -> int:
        return self.dofmap.n_dofs

    @property
    def n_field(self) -> int:
        return self.field_map.n_dofs

    def _constraints(self, clamp):
        nf = self.n_field
        u_p = self.domain.u_p
        if self.family_name == HERMITE:
            cons = [(0, u_p), (nf - 2, 0.0)]
            if clamp:
                cons.append((nf - 1, 0.0))
        elif self.family_name == BSPLINE:
            cons = [(0, u_p), (nf - 1, 0.0)]
            if clamp:
                cons.append((nf - 2, 0.0))
        elif self.family_name == MIXED:
            g0 = self.dofmap.field_offsets["g"]
            cons = [(0, u_p), (nf - 1, 0.0)]
            if clamp:
                cons.append((g0 + nf - 1, 0.0))
        else:
            if clamp:
                raise ValueError("a C0 Lagrange field has no slope DOF to clamp")
            cons = [(0, u_p), (nf - 1, 0.0)]
        return cons

    # -- kinematics -------------------------------------------------------
    def _split(self, x):
        cells = self.field_map.cells
        if self.family_name != MIXED:
            xe = x[cells]
            return xe, None, None
        off = self.dofmap.field_offsets
        nf = self.n_field
        return (x[off["u"]:off["u"] + nf][cells], x[off["g"]:off["g"] + nf][cells],
                x[off["L"]:off["L"] + nf][cells])

    def _strains(self, x):
        ue, ge, Le = self._split(x)
        a = np.einsum("eqa,ea->eq", self.q.dN, ue)
        if self.family_name == MIXED:
            b = np.einsum("eqa,ea->eq", self.q.dN, ge)
        else:
            b = np.einsum("eqa,ea->eq", self.q.d2N, ue)
        return a, b, ue, ge, Le

    # -- energy, residual, tangent ---------------------------------------
    def energy(self, x) -> float:
        """Stored energy (plus the multiplier term ``int L (g - u')`` for the mixed form)."""
        a, b, ue, ge, Le = self._strains(x)
        w, _, _ = energy_derivatives(a, b, self.q.x, self.params)
        total = np.sum(w * self.dmu)
        if self.family_name == MIXED:
            g = np.einsum("eqa,ea->eq", self.q.N, ge)
            L = np.einsum("eqa,ea->eq", self.q.N, Le)
            total += np.sum(L * (g - a) * self.dmu)
        return float(total)

    def residual_tangent(self, x, tangent: bool = True):
        a, b, ue, ge, Le = self._strains(x)
        _, (wa, wb), (waa, wab, wbb) = energy_derivatives(a, b, self.q.x, self.params)
        dmu = self.dmu
        N, dN, d2N = self.q.N, self.q.dN, self.q.d2N
        if self.family_name != MIXED:
            Re = (np.einsum("eq,eqa->ea", wa * dmu, dN) + np.einsum("eq,eqa->ea", wb * dmu, d2N))
            res = np.zeros(self.n_dofs)
            np.add.at(res, self.dofmap.cells.ravel(), Re.ravel())
            if not tangent:
                return res, None
            Ke = (np.einsum("eq,eqa,eqb->eab", waa * dmu, dN, dN)
                  + np.einsum("eq,eqa,eqb->eab", wab * dmu, dN, d2N)
                  + np.einsum("eq,eqa,eqb->eab", wab * dmu, d2N, dN)
                  + np.einsum("eq,eqa,eqb->eab", wbb * dmu, d2N, d2N))
        else:
            g = np.einsum("eqa,ea->eq", N, ge)
            L = np.einsum("eqa,ea->eq", N, Le)
            # d/du: (w_a - L) phi', d/dg: w_b phi' + L phi, d/dL: (g - a) phi
            Ru = np.einsum("eq,eqa->ea", (wa - L) * dmu, dN)
            Rg = np.einsum("eq,eqa->ea", wb * dmu, dN) + np.einsum("eq,eqa->ea", L * dmu, N)
            RL = np.einsum("eq,eqa->ea", (g - a) * dmu, N)
            Re = np.concatenate([Ru, Rg, RL], axis=1)
            res = np.zeros(self.n_dofs)
            np.add.at(res, self.dofmap.cells.ravel(), Re.ravel())
            if not tangent:
                return res, None
            n = N.shape[2]
            Ke = np.zeros((self.mesh.n_elem, 3 * n, 3 * n))
            u, gs, Ls = slice(0, n), slice(n, 2 * n), slice(2 * n, 3 * n)
            Ke[:, u, u] = np.einsum("eq,eqa,eqb->eab", waa * dmu, dN, dN)
            Ke[:, u, gs] = np.einsum("eq,eqa,eqb->eab", wab * dmu, dN, dN)
            Ke[:, gs, u] = Ke[:, u, gs].transpose(0, 2, 1)
            Ke[:, gs, gs] = np.einsum("eq,eqa,eqb->eab", wbb * dmu, dN, dN)
            mass = np.einsum("eq,eqa,eqb->eab", dmu, N, N)
            grad = np.einsum("eq,eqa,eqb->eab", dmu, dN, N)
            Ke[:, u, Ls] = -grad
            Ke[:, Ls, u] = -grad.transpose(0, 2, 1)
            Ke[:, gs, Ls] = mass
            Ke[:, Ls, gs] = mass
        buf = TripletBuffer(self.n_dofs)
        buf.add_element_matrices(self.dofmap.cells, Ke)
        return res, compress(buf)

    def linear_functional(self) -> np.ndarray:
        """Assembly of ``int (c3/(2r) v' + c3 v'') dmu``, the residual's constant part."""
        c3 = self.params.c3
        r = self.q.x
        if self.family_name == MIXED:
            x = np.zeros(self.n_dofs)
            return self.residual_tangent(x, tangent=False)[0]
        Re = (np.einsum("eq,eqa->ea", c3 / (2 * r) * self.dmu, self.q.dN)
              + np.einsum("eq,eqa->ea", c3 * self.dmu, self.q.d2N))
        out = np.zeros(self.n_dofs)
        np.add.at(out, self.dofmap.cells.ravel(), Re.ravel())
        return out

    # -- initial guesses --------------------------------------------------
    def initial_guess(self, kind: str = "lift") -> np.ndarray:
        """``"lift"``: linear interpolant of the boundary values; ``"log"``: linear in ``log r``."""
        r_in, R, u_p = self.domain.r_in, self.domain.R, self.domain.u_p
        if kind == "lift":
            def profile(r):
                return u_p * (R - r) / (R - r_in)

            def slope(r):
                return -u_p / (R - r_in) + 0.0 * r
        elif kind == "log":
            span = np.log(R / r_in)

            def profile(r):
                return u_p * np.log(R / r) / span

            def slope(r):
                return -u_p / (r * span)
        else:
            raise ValueError(f"unknown initial guess {kind!r}")
        x = np.zeros(self.n_dofs)
        locs = np.asarray(self.field_map.locations, dtype=float)
        if self.family_name == HERMITE:
            x[0::2] = profile(locs[0::2])
            x[1::2] = slope(locs[1::2])
        elif self.family_name == BSPLINE:
            # control values from interpolation at the Greville abscissae
            from .fem1d import point_basis
            elems, (N, _, _) = point_basis(self.basis, self.mesh, self.field_map, locs)
            B = np.zeros((self.n_field, self.n_field))
            for row, (e, vals) in enumerate(zip(elems, N)):
                B[row, self.field_map.cells[e]] = vals
            x[:self.n_field] = np.linalg.solve(B, profile(locs)) if self.n_field < 400 else profile(locs)
        else:
            x[:self.n_field] = profile(locs)
            if self.family_name == MIXED:
                off = self.dofmap.field_offsets["g"]
                x[off:off + self.n_field] = slope(locs)
        for dof, value in self.constraints:
            x[dof] = value
        return x


def pullout_residual_tangent(problem: PulloutProblem, x: np.ndarray):
    """Residual vector and sparse tangent of ``problem`` at the coefficient vector ``x``."""
    return problem.residual_tangent(np.asarray(x, dtype=float))


# a rejected Newton step this small (relative, max norm) is a round-off floor
ROUNDOFF_STEP = 1e-8


@dataclass
class NewtonReport:
    iterations: int = 0
    norms: list = field(default_factory=list)
    energies: list = field(default_factory=list)
    damping: list = field(default_factory=list)
    converged: bool = False

    def to_rows(self):
        return [(i, n) for i, n in enumerate(self.norms)]


@dataclass(frozen=True)
class NewtonConfig:
    max_iter: int = 50
    rtol: float = 1e-10
    atol: float = 1e-12
    stol: float = 1e-10
    max_halvings: int = 8
    initial_guess: str = "lift"


def newton_solve(problem: PulloutProblem, config: NewtonConfig = NewtonConfig(),
                 x0: np.ndarray | None = None):
    """Damped Newton iteration on the free DOFs.

    A full step is halved (up to ``max_halvings`` times) until the residual
    norm decreases. Convergence: ``|R| <= rtol (1 + |R_0|)``, ``|R| <= atol``,
    or an accepted step with ``|dx| <= stol |x|`` (max norms). The step test
    matters on fine meshes, where the assembled residual stalls at a round-off
    floor above the relative tolerance.
    """
    x = problem.initial_guess(config.initial_guess) if x0 is None else np.array(x0, dtype=float)
    free = np.ones(problem.n_dofs, dtype=bool)
    cons = problem.constraints
    free[[d for d, _ in cons]] = False
    homogeneous = [(d, 0.0) for d, _ in cons]

    res, J = problem.residual_tangent(x)
    norm = np.linalg.norm(res[free])
    norm0 = norm
    report = NewtonReport(norms=[norm], energies=[problem.energy(x)])
    tol = max(config.rtol * (1.0 + norm0), config.atol)
    small_step = False
    while norm > tol and not small_step and report.iterations < config.max_iter:
        A, rhs = apply_dirichlet(J, -res, homogeneous)
        dx = solve_sparse(A, rhs)
        step = 1.0
        for _ in range(config.max_halvings + 1):
            trial = x + step * dx
            trial_res, _ = problem.residual_tangent(trial, tangent=False)
            trial_norm = np.linalg.norm(trial_res[free])
            if trial_norm < norm:
                break
            step *= 0.5
        else:
            # no descent: either round-off floor (tiny Newton step) or a genuine stall
            floor = np.abs(dx).max() <= ROUNDOFF_STEP * max(np.abs(x).max(), 1.0)
            log = logger.debug if floor else logger.warning
            log("line search failed to reduce the residual (|R| = %.3e)", norm)
            small_step = floor
            break
        small_step = step * np.abs(dx).max() <= config.stol * np.abs(trial).max()
        x = trial
        res, J = problem.residual_tangent(x)
        norm = np.linalg.norm(res[free])
        report.iterations += 1
        report.norms.append(norm)
        report.energies.append(problem.energy(x))
        report.damping.append(step)
        if not np.isfinite(norm):
            break
    report.converged = bool(norm <= tol or small_step)
    if not report.converged:
        logger.warning("Newton did not converge after %d iterations: |R| = %.3e (tol %.3e)",
                       report.iterations, norm, tol)
    return x, report


def solve_pullout(family: str, n_elem: int, domain: PulloutDomain, params: MaterialLike,
                  newton: NewtonConfig = NewtonConfig(), degree: int | None = None,
                  clamp_outer_slope: bool = False):
    """Solve the pull-out problem; returns ``(DiscreteSolution1D, NewtonReport)``."""
    params = as_params(params)
    problem = PulloutProblem(family, n_elem, domain, params, degree, clamp_outer_slope)
    x, report = newton_solve(problem, newton)
    if family == MIXED:
        fields = {name: x[off:off + problem.n_field]
                  for name, off in problem.dofmap.field_offsets.items()}
    else:
        fields = {"u": x}
    label = family if family in (HERMITE, MIXED) else f"{family}{problem.basis.degree}"
    sol = DiscreteSolution1D(problem.basis, problem.mesh, problem.field_map, fields, label=label,
                             info={"n_dofs": problem.n_dofs, "converged": report.converged})
    return sol, report

