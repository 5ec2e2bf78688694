import numpy as np
import pytest

import maxsurf as ms

from conftest import (M13_FROZEN, M_oracle, curvature_closed, m_closed,
                      w2_closed)


# ----------------------------------------------------------------------
# rotational profiles

def test_profile_matches_closed_form_n2():
    """w(r) for n=2 has the elementary antiderivative lam*asinh(r/lam)."""
    rng = np.random.default_rng(21)
    for lam in (0.25, 1.0, 3.0):
        sol = ms.RadialSolution(2, lam)
        for r in np.concatenate([rng.uniform(0.01, 5, 20), [50.0, 1e3, 1e6]]):
            assert abs(ms.w_value(sol, r) - w2_closed(lam, r)) \
                <= 1e-11 * (1 + abs(w2_closed(lam, r)))


def test_profile_negative_lambda_is_odd():
    sol_p = ms.RadialSolution(3, 1.7)
    sol_m = ms.RadialSolution(3, -1.7)
    for r in (0.3, 1.0, 12.0):
        assert ms.w_value(sol_m, r) == -ms.w_value(sol_p, r)
        assert ms.w_slope(sol_m, r) == -ms.w_slope(sol_p, r)


def test_profile_error_estimate_is_honest():
    sol = ms.RadialSolution(2, 1.0)
    v, err = ms.w_value_with_error(sol, 7.3)
    assert err < 1e-9
    assert abs(v - w2_closed(1.0, 7.3)) <= err + 1e-13


def test_slope_closed_form_and_flux_identity():
    """w' = lam/sqrt(r^{2(n-1)}+lam^2), so w'/sqrt(1-w'^2) = lam r^{1-n}."""
    rng = np.random.default_rng(22)
    for n in (2, 3, 4):
        for _ in range(20):
            lam = rng.uniform(-3, 3)
            if abs(lam) < 0.05:
                continue
            r = rng.uniform(0.1, 20)
            sol = ms.RadialSolution(n, lam)
            wp = ms.w_slope(sol, r)
            assert abs(wp - lam / np.sqrt(r ** (2 * (n - 1)) + lam ** 2)) \
                <= 1e-13
            assert abs(wp / np.sqrt(1 - wp ** 2) - lam * r ** (1 - n)) \
                <= 1e-12 * (1 + abs(lam * r ** (1 - n)))
            assert ms.flux_density(sol, r) == pytest.approx(
                lam * r ** (1 - n), rel=1e-14)


def test_slope_rejects_nonpositive_radius():
    sol = ms.RadialSolution(2, 1.0)
    with pytest.raises(ms.DomainError):
        ms.w_slope(sol, 0.0)
    with pytest.raises(ms.DomainError):
        ms.w_value(sol, -1.0)


# ----------------------------------------------------------------------
# asymptotic constants

def test_m_constant_closed_form():
    assert abs(ms.m_const(1.0) - np.log(2.0)) <= 1e-12
    assert abs(ms.m_const(2.0)) <= 1e-12
    for lam in (0.1, 0.5, 1.3, 2.7, 5.0):
        assert abs(ms.m_const(lam) - m_closed(lam)) <= 1e-10
        assert ms.m_const(-lam) == -ms.m_const(lam)
    v, err = ms.m_const_with_error(0.7)
    assert abs(v - m_closed(0.7)) <= err + 1e-12
    with pytest.raises(ms.DomainError):
        ms.m_const(0.0)


def test_M_constant_against_romberg_oracle():
    assert abs(ms.M_const(1.0, 3) - M_oracle(3)) <= 1e-10
    assert abs(ms.M_const(1.0, 3) - M13_FROZEN) <= 1e-12
    assert abs(ms.M_const(1.0, 4) - M_oracle(4)) <= 1e-10
    assert ms.M_const(0.0, 3) == 0.0


def test_M_constant_scaling_law():
    """M(lam, n) = sign(lam) |lam|^{1/(n-1)} M(1, n)."""
    for n in (3, 4):
        M1 = ms.M_const(1.0, n)
        for lam in (-4.0, -2.0, -0.5, 0.5, 2.0, 4.0):
            pred = np.sign(lam) * abs(lam) ** (1.0 / (n - 1)) * M1
            assert abs(ms.M_const(lam, n) - pred) <= 1e-9 * abs(pred)


def test_M_constant_rejects_n2():
    with pytest.raises(ms.DomainError):
        ms.M_const(1.0, 2)


# ----------------------------------------------------------------------
# boosted solutions

def test_zero_boost_reproduces_rotational_solution():
    sol = ms.RadialSolution(2, 1.0)
    bs = ms.BoostedRadialSolution(sol, [0.0, 0.0])
    for r in (0.5, 2.0, 40.0):
        x = np.array([r, 0.0])
        assert ms.boosted_eval(bs, x) == pytest.approx(
            ms.w_value(sol, r), abs=1e-13)


def test_boosted_graph_contains_boosted_points():
    """The boosted surface is the Lorentz image of the rotational graph."""
    rng = np.random.default_rng(23)
    sol = ms.RadialSolution(2, 1.0)
    a = np.array([0.4, 0.3])
    bs = ms.BoostedRadialSolution(sol, a)
    for _ in range(50):
        y = rng.normal(size=2) * rng.uniform(1, 10)
        P = ms.SpacetimePoint(y, ms.w_value(sol, float(np.linalg.norm(y))))
        Q = ms.boost_graph_point(a, P)
        assert abs(ms.boosted_eval(bs, Q.x) - Q.t) <= 1e-9 * (1 + abs(Q.t))


def test_boosted_gradient_matches_finite_differences():
    rng = np.random.default_rng(24)
    for n, a in [(2, [0.5, 0.0]), (2, [0.3, -0.4]), (3, [0.0, 0.0, 0.7])]:
        bs = ms.BoostedRadialSolution(ms.RadialSolution(n, 1.3), a)
        for _ in range(10):
            x = rng.normal(size=n)
            x *= rng.uniform(1.5, 8) / np.linalg.norm(x)
            g = ms.boosted_gradient(bs, x)
            h = 1e-6
            for k in range(n):
                e = np.zeros(n)
                e[k] = h
                fd = (ms.boosted_eval(bs, x + e)
                      - ms.boosted_eval(bs, x - e)) / (2 * h)
                assert abs(g[k] - fd) <= 2e-8
            assert np.linalg.norm(g) < 1.0


def test_boosted_value_and_gradient_consistent():
    bs = ms.BoostedRadialSolution(ms.RadialSolution(2, 1.0), [0.5, 0.0])
    x = np.array([3.0, -2.0])
    v, g = ms.boosted_value_and_gradient(bs, x)
    assert v == pytest.approx(ms.boosted_eval(bs, x), abs=1e-12)
    assert np.max(np.abs(g - ms.boosted_gradient(bs, x))) <= 1e-12


def test_boosted_flux_vector_matches_gradient_route():
    """Du/sqrt(1-|Du|^2) computed Lorentz-covariantly equals the direct form
    where the direct form is well conditioned (moderate radii)."""
    rng = np.random.default_rng(25)
    bs = ms.BoostedRadialSolution(ms.RadialSolution(2, 0.8), [0.4, 0.2])
    for _ in range(20):
        x = rng.normal(size=2)
        x *= rng.uniform(2, 15) / np.linalg.norm(x)
        g = ms.boosted_gradient(bs, x)
        direct = g / np.sqrt(1 - g @ g)
        v = ms.boosted_flux_vector(bs, x)
        assert np.max(np.abs(v - direct)) <= 1e-8 * (1 + np.max(np.abs(v)))


def test_boosted_far_field_approaches_tilted_plane():
    a = np.array([0.5, 0.0])
    bs = ms.BoostedRadialSolution(ms.RadialSolution(2, 1.0), a)
    x = np.array([0.0, 1e8])
    # on the axis orthogonal to a the log term carries sqrt(1-|a|^2)*lam
    pred = (a @ x + np.sqrt(0.75) * ms.m_const(1.0)
            + np.sqrt(0.75) * np.log(np.linalg.norm(x)))
    assert abs(ms.boosted_eval(bs, x) - pred) <= 1e-6


def test_curvature_closed_form_and_invariance():
    """|II| = sqrt(n(n-1)) |lam| / r^n, from the principal curvatures; the
    boosted surface has the same |II| at the image point."""
    rng = np.random.default_rng(26)
    for n in (2, 3):
        lam = 1.4
        sol = ms.RadialSolution(n, lam)
        for r in (0.7, 2.0, 31.0):
            pred = np.sqrt(n * (n - 1)) * lam / r ** n
            assert ms.radial_curvature(sol, r) == pytest.approx(pred,
                                                                rel=1e-12)
            assert curvature_closed(lam, n, r) == pytest.approx(pred,
                                                                rel=1e-12)
    a = np.array([0.5, 0.2])
    bs = ms.BoostedRadialSolution(ms.RadialSolution(2, 1.4), a)
    for _ in range(10):
        y = rng.normal(size=2)
        y *= rng.uniform(1, 6) / np.linalg.norm(y)
        Q = ms.boost_graph_point(
            a, ms.SpacetimePoint(y, ms.w_value(bs.base, np.linalg.norm(y))))
        assert ms.boosted_curvature(bs, Q.x) == pytest.approx(
            ms.radial_curvature(bs.base, float(np.linalg.norm(y))), rel=1e-7)


def test_boosted_curvature_against_finite_difference_hessian():
    """Independent route: |II|^2 = tr((g^{-1} H)^2)/(1-|Du|^2) with H the
    finite-difference Hessian of the boosted graph function."""
    bs = ms.BoostedRadialSolution(ms.RadialSolution(2, 1.0), [0.45, -0.15])
    x = np.array([2.3, 1.1])
    h = 2e-4
    H = np.zeros((2, 2))
    for i in range(2):
        for j in range(2):
            e_i = np.zeros(2)
            e_j = np.zeros(2)
            e_i[i] = h
            e_j[j] = h
            H[i, j] = (ms.boosted_eval(bs, x + e_i + e_j)
                       - ms.boosted_eval(bs, x + e_i - e_j)
                       - ms.boosted_eval(bs, x - e_i + e_j)
                       + ms.boosted_eval(bs, x - e_i - e_j)) / (4 * h * h)
    g = ms.boosted_gradient(bs, x)
    q2 = 1 - g @ g
    ginv = np.eye(2) + np.outer(g, g) / q2
    val = np.sqrt(np.trace((ginv @ H) @ (ginv @ H)) / q2)
    assert abs(val - ms.boosted_curvature(bs, x)) <= 1e-5
