"""Estimator-style wrappers around the solvers.

Hyperparameters (family, mesh size, load) go to ``__init__``; ``fit`` takes
the material and runs the solve; ``predict`` evaluates the displacement at
query points. ``get_params``/``set_params``/``clone`` come from scikit-learn.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ._validation import check_count, check_material, check_points, check_positive
from .mesh import quad_mesh
from .mixed2d import sample_edge, solve_shear_mixed_2d
from .pullout import MIXED, PULLOUT_FAMILIES, NewtonConfig, PulloutDomain, solve_pullout
from .shear import (CASE_D, CASE_T, ShearCase, _family_of, analytic_shear, solve_shear_1d,
                    solve_shear_mixed_1d)

SHEAR_FAMILIES = ("hermite", "bspline", MIXED)


class ShearSolver(BaseEstimator):
    """1-D simple-shear solve for one family and mesh.

    Parameters
    ----------
    family : {"hermite", "bspline", "mixed"}
    degree : int or None
        B-spline degree (default 2) or mixed Lagrange degree (default 1).
    n_elem : int
    case : {"D", "T"}
    load : float or None
        Top displacement (case D) or traction (case T); ``None`` picks the default.
    H : float
    penalty : float or None
        Point-penalty factor for the primal families; ``None`` uses the scaled default.
    """

    def __init__(self, family="hermite", degree=None, n_elem=64, case=CASE_D, load=None,
                 H=0.5, penalty=None):
        self.family = family
        self.degree = degree
        self.n_elem = n_elem
        self.case = case
        self.load = load
        self.H = H
        self.penalty = penalty

    def _shear_case(self):
        if self.case not in (CASE_D, CASE_T):
            raise ValueError(f"case must be 'D' or 'T', got {self.case!r}")
        H = check_positive(self.H, "H")
        if self.load is None:
            return ShearCase(self.case, ShearCase.default(self.case).load, H)
        return ShearCase(self.case, float(self.load), H)

    def fit(self, material, y=None):
        if self.family not in SHEAR_FAMILIES:
            raise ValueError(f"family must be one of {SHEAR_FAMILIES}, got {self.family!r}")
        n = check_count(self.n_elem, "n_elem")
        params = check_material(material)
        case = self._shear_case()
        if self.family == MIXED:
            sol = solve_shear_mixed_1d(n, case, params, p=self.degree or 1)
        else:
            K = None if self.penalty is None else check_positive(self.penalty, "penalty")
            sol = solve_shear_1d(_family_of(self.family, self.degree), n, case, params, K=K)
        self.params_ = params
        self.case_ = case
        self.solution_ = sol
        self.closed_form_ = analytic_shear(case, params)
        self.n_dofs_ = sol.n_dofs
        return self

    def predict(self, y, order: int = 0):
        """Displacement ``u_x`` (or its ``order``-th derivative) at heights ``y``."""
        check_is_fitted(self, "solution_")
        y = check_points(y, 0.0, self.case_.H, "y")
        return self.solution_.evaluate(y, order)

    def score(self, y, u=None):
        """Negative L1 distance to the closed form on the uniform stations ``y``."""
        from .harness import l1_error
        check_is_fitted(self, "solution_")
        y = check_points(y, 0.0, self.case_.H, "y")
        ref = self.closed_form_.u(y) if u is None else np.asarray(u, dtype=float)
        return -l1_error(ref, self.predict(y))


class PulloutSolver(BaseEstimator):
    """Nonlinear pull-out solve by damped Newton.

    ``family`` is one of ``lagrange`` (degree 2 by default), ``hermite``,
    ``mixed`` (degree 1) or ``bspline`` (degree 2).
    """

    def __init__(self, family="hermite", degree=None, n_elem=50, r_in=0.01, R=1.0, u_p=0.1,
                 measure="r", clamp_outer_slope=False, max_iter=50, rtol=1e-10, atol=1e-12,
                 stol=1e-10, initial_guess="lift"):
        self.family = family
        self.degree = degree
        self.n_elem = n_elem
        self.r_in = r_in
        self.R = R
        self.u_p = u_p
        self.measure = measure
        self.clamp_outer_slope = clamp_outer_slope
        self.max_iter = max_iter
        self.rtol = rtol
        self.atol = atol
        self.stol = stol
        self.initial_guess = initial_guess

    def fit(self, material, y=None):
        if self.family not in PULLOUT_FAMILIES:
            raise ValueError(f"family must be one of {PULLOUT_FAMILIES}, got {self.family!r}")
        n = check_count(self.n_elem, "n_elem")
        params = check_material(material)
        domain = PulloutDomain(float(self.r_in), float(self.R), float(self.u_p), self.measure)
        newton = NewtonConfig(check_count(self.max_iter, "max_iter"), float(self.rtol),
                              float(self.atol), float(self.stol),
                              initial_guess=self.initial_guess)
        sol, report = solve_pullout(self.family, n, domain, params, newton, self.degree,
                                    bool(self.clamp_outer_slope))
        self.params_ = params
        self.domain_ = domain
        self.solution_ = sol
        self.report_ = report
        self.n_dofs_ = sol.info["n_dofs"]
        self.n_iter_ = report.iterations
        return self

    def predict(self, r, order: int = 0):
        check_is_fitted(self, "solution_")
        r = check_points(r, self.domain_.r_in, self.domain_.R, "r")
        return self.solution_.evaluate(r, order)


class MixedShear2D(BaseEstimator):
    """Periodic 2-D mixed plate; ``predict`` samples ``u_x`` along the right edge."""

    def __init__(self, nx=60, ny=20, L=1.5, case=CASE_D, load=None, H=0.5):
        self.nx = nx
        self.ny = ny
        self.L = L
        self.case = case
        self.load = load
        self.H = H

    def fit(self, material, y=None):
        nx = check_count(self.nx, "nx", 2)
        ny = check_count(self.ny, "ny")
        params = check_material(material)
        case = ShearSolver(case=self.case, load=self.load, H=self.H)._shear_case()
        mesh = quad_mesh(check_positive(self.L, "L"), case.H, nx, ny, periodic_x=True)
        self.params_ = params
        self.case_ = case
        self.solution_ = solve_shear_mixed_2d(mesh, case, params)
        self.closed_form_ = analytic_shear(case, params)
        return self

    def predict(self, y):
        check_is_fitted(self, "solution_")
        y = check_points(y, 0.0, self.case_.H, "y")
        mesh = self.solution_.mesh
        ys, ux = sample_edge(self.solution_, "right", mesh.ny + 1)
        return np.interp(y, ys, ux)


def family_label(family: str, degree: int | None = None) -> str:
    """Display name used in tables, e.g. ``bspline2``."""
    if family == "hermite":
        return "hermite"
    if family == MIXED:
        return f"mixed{degree or 1}"
    return f"{family}{degree or 2}"
