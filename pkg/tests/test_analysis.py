import numpy as np
import pytest

import maxsurf as ms

from conftest import chord_ratios, m_closed


# ----------------------------------------------------------------------
# residues

def test_residue_of_rotational_solution_is_lambda():
    for n, lam in [(2, 1.5), (2, -0.7), (3, 2.0)]:
        rep = ms.residue(ms.RadialSolution(n, lam), radii=[2.0, 5.0, 11.0])
        assert abs(rep.mean - lam) <= 1e-10
        assert rep.spread <= 1e-8
    # n >= 4 keeps the capacity-style 1/((n-2)|S^{n-1}|) normalization,
    # under which the rotational solution carries lam/(n-2)
    rep4 = ms.residue(ms.RadialSolution(4, 0.9), radii=[2.0, 5.0])
    assert abs(rep4.mean - 0.45) <= 1e-10
    assert rep4.spread <= 1e-8


def test_residue_is_contour_independent_on_solved_field(radial_annulus):
    grid, sol, exact, res = radial_annulus
    rep = ms.residue(res.field, radii=[2.0, 3.0, 4.5, 6.0])
    h = ms.max_cell_diameter(grid)
    assert abs(rep.mean - 1.0) <= 5 * h * h
    assert rep.spread <= 5 * h * h


def test_boosted_residue_picks_up_gamma_factor():
    """Res[w^a] = lam/sqrt(1-|a|^2): the boost dilates the flux."""
    lam, eta = 1.0, 0.5
    bs = ms.BoostedRadialSolution(ms.RadialSolution(2, lam), [eta, 0.0])
    rep = ms.residue(bs, radii=[1e3])
    assert abs(rep.mean - lam / np.sqrt(1 - eta ** 2)) <= 1e-6


def test_raw_flux_vs_normalized_residue():
    lam = 1.3
    sol = ms.RadialSolution(2, lam)
    assert ms.raw_flux(sol, 4.0) == pytest.approx(2 * np.pi * lam, rel=1e-10)
    sol3 = ms.RadialSolution(3, lam)
    assert ms.raw_flux(sol3, 4.0) == pytest.approx(4 * np.pi * lam, rel=1e-8)


# ----------------------------------------------------------------------
# asymptotic fits

def test_fit_recovers_plane_constant_and_log_coefficient_n2():
    lam, a = 1.0, np.array([0.3, -0.4])
    bs = ms.BoostedRadialSolution(ms.RadialSolution(2, lam), a)
    fit = ms.fit_asymptotics(bs, window=(200.0, 800.0))
    s = np.sqrt(1 - a @ a)
    assert np.max(np.abs(fit.a - a)) <= 1e-4
    assert abs(fit.c - s * ms.m_const(lam)) <= 1e-3
    assert abs(fit.d - s * lam) <= 1e-3
    assert ms.check_residue_relation(fit, ms.residue(bs, radii=[500.0])) \
        <= 1e-4


def test_fit_recovers_height_constant_n3():
    lam, eta = 1.0, 0.6
    bs = ms.BoostedRadialSolution(ms.RadialSolution(3, lam),
                                  [0.0, 0.0, eta])
    fit = ms.fit_asymptotics(bs, window=(50.0, 200.0))
    s = np.sqrt(1 - eta ** 2)
    assert abs(fit.a[2] - eta) <= 1e-5
    assert abs(fit.c - s * ms.M_const(lam, 3)) <= 1e-4
    assert abs(fit.d - s * lam) <= 1e-3


def test_fit_on_sampled_field(boosted_field_n2):
    bs, grid, fld = boosted_field_n2
    fit = ms.fit_asymptotics(fld, window=(16.0, 48.0))
    assert np.max(np.abs(fit.a - bs.a)) <= 5e-3
    assert abs(fit.d - np.sqrt(0.75)) <= 5e-2
    # the residual is dominated by the genuine next-order ln r / r term
    assert fit.rms_residual <= 0.1


def test_fit_rejects_bad_windows(boosted_field_n2):
    bs, grid, fld = boosted_field_n2
    with pytest.raises(ms.FitError):
        ms.fit_asymptotics(fld, window=(100.0, 400.0))   # outside the grid
    with pytest.raises(ms.FitError):
        ms.fit_asymptotics(fld, window=(48.0, 16.0))     # reversed


def test_tilt_remainder_model_matches_far_field():
    """Pointwise check of the next-order term along the tilt direction."""
    lam, eta = 1.0, 0.5
    a = np.array([eta, 0.0])
    bs = ms.BoostedRadialSolution(ms.RadialSolution(2, lam), a)
    s = np.sqrt(1 - eta ** 2)
    for r in (2e3, 1e4):
        x = np.array([r, 0.0])
        D2 = x @ x - (a @ x) ** 2
        plane = a @ x + s * ms.m_const(lam) + s * lam * 0.5 * np.log(D2)
        rem = ms.boosted_eval(bs, x) - plane
        model = ms.tilt_remainder_model(a, lam, x)
        assert abs(rem - model) <= 0.01 * abs(model)


# ----------------------------------------------------------------------
# blowdown

def test_blowdown_converges_to_tilted_plane():
    bs = ms.BoostedRadialSolution(ms.RadialSolution(2, 1.0), [0.3, 0.0])
    samples = ms.blowdown_sequence(bs, scales=[8.0, 64.0, 512.0])
    devs = [s.sup_deviation for s in samples]
    assert devs == sorted(devs, reverse=True)
    assert devs[-1] <= 0.02
    # rescalings are uniformly spacelike: chord slopes stay below 1
    assert all(s.lipschitz_excess <= 0.0 for s in samples)


def test_blowdown_on_sampled_field(boosted_field_n2):
    bs, grid, fld = boosted_field_n2
    samples = ms.blowdown_sequence(fld, scales=[4.0, 16.0])
    assert samples[1].sup_deviation < samples[0].sup_deviation


# ----------------------------------------------------------------------
# curvature of discrete fields

def test_second_ff_norm_matches_exact_decay(boosted_field_n2):
    bs, grid, fld = boosted_field_n2
    S = np.asarray(ms.second_ff_norm(fld)).reshape(grid.shape)
    for i in range(10, grid.N_r - 6, 10):
        for j in range(0, grid.N_ang, 8):
            x = grid.points[i, j]
            pred = ms.boosted_curvature(bs, x)
            assert abs(S[i, j] - pred) <= 0.05 * pred


# ----------------------------------------------------------------------
# Lipschitz diagnostics and extensions

def test_pairwise_lipschitz_of_exact_solution_below_one():
    rng = np.random.default_rng(51)
    bs = ms.BoostedRadialSolution(ms.RadialSolution(2, 1.0), [0.5, 0.2])
    pts = rng.normal(size=(800, 2)) * 5
    pts = pts[np.linalg.norm(pts, axis=1) > 0.3]
    vals = np.array([ms.boosted_eval(bs, p) for p in pts])
    L = ms.pairwise_lipschitz(pts, vals)
    assert L < 1.0


def test_infconv_extension_interpolates_and_bounds_slope():
    rng = np.random.default_rng(52)
    pts = rng.normal(size=(50, 2))
    pts /= np.linalg.norm(pts, axis=1, keepdims=True)
    vals = 0.25 * pts[:, 0] - 0.1 * pts[:, 1]
    ext = ms.extend_infconv(pts, vals, m=0.7)
    assert np.max(np.abs([ext.evaluate(p) - v
                          for p, v in zip(pts, vals)])) <= 1e-12
    q = rng.normal(size=(1500, 2)) * 4
    qa, qb = q[:750], q[750:]
    ratios = chord_ratios(qa, qb,
                          [ext.evaluate(p) for p in qa],
                          [ext.evaluate(p) for p in qb])
    assert ratios.max() <= 0.7 + 1e-9


def test_infconv_rejects_bad_inputs():
    pts = np.array([[1.0, 0.0], [-1.0, 0.0]])
    with pytest.raises(ms.DomainError):
        ms.extend_infconv(pts, np.array([0.0, 3.0]), m=0.9)   # data too steep
    with pytest.raises(ms.DomainError):
        ms.extend_infconv(pts, np.array([0.0, 0.1]), m=1.0)   # not spacelike


def test_radial_extension_is_spacelike_cone():
    """Circle data with (f-mid)^2 + f'^2 < 1 extends with slope below 1."""
    rng = np.random.default_rng(53)
    theta = np.linspace(0, 2 * np.pi, 256, endpoint=False)
    vals = 0.45 * np.cos(theta) + 0.1 * np.sin(2 * theta)
    ext = ms.extend_radial(vals)
    # matches the data on the unit circle
    k = 37
    p = np.array([np.cos(theta[k]), np.sin(theta[k])])
    assert abs(ext.evaluate(p) - vals[k]) <= 1e-12
    q = rng.normal(size=(1500, 2)) * 2
    qa, qb = q[:750], q[750:]
    ratios = chord_ratios(qa, qb,
                          [ext.evaluate(p) for p in qa],
                          [ext.evaluate(p) for p in qb])
    assert ratios.max() < 1.0
    # degree-one homogeneity around the midrange value
    assert ext.evaluate(3.0 * p) == pytest.approx(
        ext.mid + 3.0 * (vals[k] - ext.mid), abs=1e-12)


def test_radial_extension_rejects_wide_oscillation():
    with pytest.raises(ms.DomainError):
        ms.extend_radial(np.array([0.0, 2.5]))


def test_affine_trace_extends_to_the_affine_function():
    """First-harmonic circle data: the cone extension is the plane itself,
    so its Lipschitz constant equals the boundary one."""
    theta = np.linspace(0, 2 * np.pi, 512, endpoint=False)
    a = np.array([0.35, -0.2])
    vals = a[0] * np.cos(theta) + a[1] * np.sin(theta)
    ext = ms.extend_radial(vals)
    rng = np.random.default_rng(54)
    for _ in range(20):
        p = rng.normal(size=2) * 3
        assert abs(ext.evaluate(p) - a @ p) <= 1e-3
