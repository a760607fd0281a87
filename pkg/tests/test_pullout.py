import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from sgfem.constitutive import PULLOUT_TABLE, ConstitutiveParams
from sgfem.harness import l1_error
from sgfem.pullout import (PULLOUT_FAMILIES, NewtonConfig, PulloutDomain, PulloutProblem,
                           energy_derivatives, newton_solve, pullout_energy_density,
                           pullout_residual_tangent, solve_pullout)

P = PULLOUT_TABLE
DOM = PulloutDomain()
T = np.linspace(0.0, 1.0, 201)
R_SAMPLES = DOM.r_in + (DOM.R - DOM.r_in) * T


def _sym_energy():
    a, b, r = sp.symbols("a b r", real=True)
    c = sp.symbols("c1:8", real=True)
    w = (c[0] / 8 * a**4 + c[1] * (a**2 / 2 + a**4 / 4)
         + c[2] / (2 * r) * (a**2 * b + (a + 2 * r * b)) + 2 * c[3] * a**2 * b**2
         + c[4] / (4 * r**2) * (a**2 * (1 + 4 * r**2 * b**2) + r**2 * b**2 + 4 * r * a**3 * b
                                + 2 * r * a * b + a**4)
         + c[5] / (2 * r**2) * (a**2 * (2 * r**2 * b**2 + 1) + r**2 * b**2 + a**4)
         + c[6] / (4 * r**2) * (a**2 * (4 * r**2 * b**2 + 1) + r**2 * b**2 + a**4))
    return (a, b, r, c), w


SYM_VARS, SYM_W = _sym_energy()


def test_energy_examples():
    c1, c2, c3, c4, c5, c6, c7 = P.as_array()
    assert pullout_energy_density(0.0, 0.0, 0.3, P) == 0.0
    g = 0.17
    expected = (c1 / 8 * g**4 + c2 * (g**2 / 2 + g**4 / 4) + c3 / 2 * g
                + (c5 / 4 + c6 / 2 + c7 / 4) * (g**2 + g**4))
    assert pullout_energy_density(g, 0.0, 1.0, P) == pytest.approx(expected, rel=1e-14)
    k = 0.41
    expected = c3 * k + (c5 / 4 + c6 / 2 + c7 / 4) * k**2
    assert pullout_energy_density(0.0, k, 1.0, P) == pytest.approx(expected, rel=1e-14)
    with pytest.raises(ValueError):
        pullout_energy_density(0.1, 0.1, 0.0, P)


@given(st.floats(-2, 2), st.floats(-50, 50), st.floats(0.01, 1.0))
def test_derivatives_match_sympy(a, b, r):
    (sa, sb, sr, sc), w = SYM_VARS, SYM_W
    subs = {sa: a, sb: b, sr: r, **dict(zip(sc, P.as_array()))}
    exprs = [w, sp.diff(w, sa), sp.diff(w, sb), sp.diff(w, sa, 2), sp.diff(w, sa, sb),
             sp.diff(w, sb, 2)]
    ref = [float(e.evalf(subs=subs)) for e in exprs]
    w0, (wa, wb), (waa, wab, wbb) = energy_derivatives(np.array(a), np.array(b), r, P)
    got = [w0, wa, wb, waa, wab, wbb]
    for x, y in zip(got, ref):
        assert float(x) == pytest.approx(y, rel=1e-10, abs=1e-8)
    assert float(w0) == pytest.approx(float(pullout_energy_density(a, b, r, P)), rel=1e-12,
                                      abs=1e-9)


def _random_states(problem, rng, count=10):
    x0 = problem.initial_guess("lift")
    scale = 0.05 * DOM.u_p
    for _ in range(count):
        yield x0 + scale * rng.standard_normal(problem.n_dofs)


def _fd_gradient(problem, x, h):
    g = np.empty_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (problem.energy(x + e) - problem.energy(x - e)) / (2 * h)
    return g


@pytest.mark.parametrize("family", PULLOUT_FAMILIES)
def test_residual_matches_energy_fd(family, rng):
    problem = PulloutProblem(family, 4, DOM, P)
    for x in _random_states(problem, rng):
        h = 1e-6 * (1 + np.abs(x).max())
        res, _ = pullout_residual_tangent(problem, x)
        fd = _fd_gradient(problem, x, h)
        assert np.abs(fd - res).max() <= 1e-6 * np.abs(res).max()


@pytest.mark.parametrize("family", PULLOUT_FAMILIES)
def test_tangent_matches_residual_fd(family, rng):
    problem = PulloutProblem(family, 4, DOM, P)
    for x in _random_states(problem, rng):
        h = 1e-6 * (1 + np.abs(x).max())
        _, J = pullout_residual_tangent(problem, x)
        J = J.toarray()
        fd = np.empty_like(J)
        for i in range(len(x)):
            e = np.zeros_like(x)
            e[i] = h
            fd[:, i] = (problem.residual_tangent(x + e, False)[0]
                        - problem.residual_tangent(x - e, False)[0]) / (2 * h)
        assert np.abs(fd - J).max() <= 1e-6 * np.abs(J).max()


@pytest.mark.parametrize("family", ["lagrange", "hermite", "bspline"])
def test_zero_state_residual_is_linear_term(family):
    problem = PulloutProblem(family, 7, DOM, P)
    res, _ = problem.residual_tangent(np.zeros(problem.n_dofs))
    lin = problem.linear_functional()
    assert np.abs(lin).max() > 0
    np.testing.assert_allclose(res, lin, rtol=1e-13, atol=1e-13 * np.abs(lin).max())


@pytest.mark.parametrize("family", PULLOUT_FAMILIES)
def test_zero_pull_keeps_zero_boundary_values(family):
    dom = PulloutDomain(u_p=0.0)
    sol, rep = solve_pullout(family, 20, dom, P)
    assert rep.converged
    assert sol.evaluate([dom.r_in, dom.R]).tolist() == [0.0, 0.0]
    assert np.abs(sol.evaluate(R_SAMPLES)).max() > 0


@pytest.mark.parametrize("family", ["lagrange", "hermite", "bspline"])
def test_energy_non_increasing(family):
    _, rep = solve_pullout(family, 50, DOM, P)
    e = np.array(rep.energies)
    assert np.all(np.diff(e) <= 1e-12 * np.abs(e).max())


@pytest.mark.parametrize("family", PULLOUT_FAMILIES)
def test_boundary_conditions_and_report(family):
    sol, rep = solve_pullout(family, 30, DOM, P)
    assert rep.converged and rep.iterations <= 25
    assert np.all(np.isfinite(rep.norms))
    tol = 1e-10 * (1 + rep.norms[0])
    assert rep.norms[-1] <= tol or rep.damping
    u = sol.evaluate([DOM.r_in, DOM.R])
    assert u[0] == DOM.u_p and u[1] == 0.0
    assert rep.to_rows()[0] == (0, rep.norms[0])


@pytest.mark.parametrize("family", PULLOUT_FAMILIES)
def test_refinement_plateau(family):
    ref = solve_pullout(family, 5000, DOM, P)[0].evaluate(R_SAMPLES)
    e500 = l1_error(ref, solve_pullout(family, 500, DOM, P)[0].evaluate(R_SAMPLES))
    e2500 = l1_error(ref, solve_pullout(family, 2500, DOM, P)[0].evaluate(R_SAMPLES))
    assert e2500 <= e500


def test_families_agree_at_5000():
    profiles = {f: solve_pullout(f, 5000, DOM, P)[0].evaluate(R_SAMPLES)
                for f in PULLOUT_FAMILIES}
    names = list(profiles)
    for i in range(len(names)):
        for j in range(i + 1, len(names)):
            assert l1_error(profiles[names[i]], profiles[names[j]]) <= 0.02 * DOM.u_p


@pytest.mark.parametrize("family", ["hermite", "bspline"])
def test_small_pull_limit(family):
    base = solve_pullout(family, 40, PulloutDomain(u_p=0.0), P)[0].evaluate(R_SAMPLES)
    dist = [np.abs(solve_pullout(family, 40, PulloutDomain(u_p=s * 0.1), P)[0]
                   .evaluate(R_SAMPLES) - base).max() for s in (1e-1, 1e-2, 1e-3)]
    assert dist[0] > dist[1] > dist[2]


def test_log_guess_and_plain_measure():
    _, rep = solve_pullout("hermite", 40, DOM, P, NewtonConfig(initial_guess="log"))
    assert rep.converged
    _, rep = solve_pullout("bspline", 40, PulloutDomain(measure="1"), P)
    assert rep.converged
    with pytest.raises(ValueError):
        solve_pullout("hermite", 4, DOM, P, NewtonConfig(initial_guess="zero"))


@pytest.mark.parametrize("family", ["hermite", "bspline", "mixed"])
def test_outer_slope_clamp(family):
    sol, rep = solve_pullout(family, 60, DOM, P, clamp_outer_slope=True)
    assert rep.converged
    slope = sol.fields["g"][-1] if family == "mixed" else sol.evaluate(DOM.R, 1)[0]
    assert abs(slope) <= 1e-12
    with pytest.raises(ValueError):
        PulloutProblem("lagrange", 4, DOM, P, clamp_outer_slope=True)


def test_non_convergence_is_reported():
    problem = PulloutProblem("hermite", 40, DOM, P)
    _, rep = newton_solve(problem, NewtonConfig(max_iter=1))
    assert not rep.converged and rep.iterations == 1


def test_domain_validation():
    with pytest.raises(ValueError):
        PulloutDomain(r_in=0.0)
    with pytest.raises(ValueError):
        PulloutDomain(r_in=2.0, R=1.0)
    with pytest.raises(ValueError):
        PulloutDomain(u_p=np.inf)
    with pytest.raises(ValueError):
        PulloutDomain(measure="dr")
    with pytest.raises(ValueError):
        PulloutProblem("argyris", 4, DOM, P)


def test_first_gradient_material_without_length_scale():
    # the Hermite form stays well posed when every gradient modulus vanishes
    sol, rep = solve_pullout("hermite", 10, DOM, ConstitutiveParams(0.0, 1.0))
    assert rep.converged and rep.iterations <= 10
    assert sol.evaluate(DOM.r_in)[0] == DOM.u_p
