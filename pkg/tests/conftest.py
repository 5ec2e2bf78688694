"""Shared oracles and fixtures.

The oracles here are deliberately independent of the library's own
numerical routes: closed forms where they exist, and a hand-rolled
Romberg/Richardson integrator where they don't.  Tests compare the
library against these, never against itself.
"""

import numpy as np
import pytest

import maxsurf as ms


# ----------------------------------------------------------------------
# quadrature oracle: Romberg table (trapezoid + Richardson extrapolation)

def romberg(f, a, b, levels=18, tol=1e-14):
    """Integrate a smooth vectorizable f on [a, b] by Romberg refinement."""
    R = [[0.5 * (b - a) * (float(f(a)) + float(f(b)))]]
    h = b - a
    for k in range(1, levels):
        h *= 0.5
        xs = a + h * (2.0 * np.arange(1 << (k - 1), dtype=float) + 1.0)
        row = [0.5 * R[k - 1][0] + h * float(np.sum(f(xs)))]
        for j in range(1, k + 1):
            row.append(row[j - 1]
                       + (row[j - 1] - R[k - 1][j - 1]) / (4.0 ** j - 1.0))
        R.append(row)
        if k > 4 and abs(R[k][k] - R[k - 1][k - 1]) < tol * (1 + abs(R[k][k])):
            break
    return R[-1][-1]


# ----------------------------------------------------------------------
# closed forms for the rotationally symmetric solutions

def w2_closed(lam, r):
    """n=2 profile: integral of lam/sqrt(t^2+lam^2) is lam*asinh(r/lam)."""
    return lam * np.arcsinh(np.asarray(r, dtype=float) / lam)


def m_closed(lam):
    """n=2 additive constant in closed form, lam > 0."""
    return lam * np.log(2.0 / lam)


def M_oracle(n):
    """Total height of the n>=3 profile at lam=1 by split Romberg.

    Head on [0,1] directly; tail via t -> 1/s, which maps [1, inf) to (0, 1]
    with integrand s^(n-3)/sqrt(1 + s^(2(n-1))).
    """
    head = romberg(lambda t: 1.0 / np.sqrt(t ** (2 * (n - 1)) + 1.0), 0.0, 1.0)
    tail = romberg(lambda s: s ** (n - 3) / np.sqrt(1.0 + s ** (2 * (n - 1))),
                   0.0, 1.0)
    return head + tail


# frozen reference value for the n=3 height, cross-checked against M_oracle
M13_FROZEN = 1.854074677301372


# principal-curvature route to |II| for the rotational graphs: the meridian
# curvature w''/(1-w'^2)^{3/2} plus (n-1) copies of w'/(r sqrt(1-w'^2)),
# with the closed-form slope w' = lam/sqrt(r^{2(n-1)} + lam^2).
def curvature_closed(lam, n, r):
    r = np.asarray(r, dtype=float)
    R2 = r ** (2 * (n - 1)) + lam ** 2
    wp = lam / np.sqrt(R2)
    wpp = -lam * (n - 1) * r ** (2 * n - 3) / R2 ** 1.5
    q = 1.0 - wp ** 2
    km = wpp / q ** 1.5
    kp = wp / (r * np.sqrt(q))
    return np.sqrt(km ** 2 + (n - 1) * kp ** 2)


# ----------------------------------------------------------------------
# brute-force chord ratios

def chord_ratios(points_a, points_b, values_a, values_b):
    d = np.linalg.norm(np.asarray(points_a) - np.asarray(points_b), axis=-1)
    return np.abs(np.asarray(values_a) - np.asarray(values_b)) / d


# ----------------------------------------------------------------------
# shared solved problems (session scope: several test modules reuse them)

@pytest.fixture(scope="session")
def radial_annulus():
    """n=2 annulus 1 <= r <= 8 with lam=1 rotational data on both rings."""
    grid = ms.build_grid(2, ms.HoleSpec("circle", 1.0), 8.0, N_r=24, N_ang=32,
                         grading=1.05)
    sol = ms.RadialSolution(2, 1.0)
    exact = ms.sample(grid, lambda x: ms.w_value(sol, float(np.hypot(*x))))
    bc = ms.BoundaryData(exact.values[0], exact.values[-1])
    result = ms.solve_dirichlet(grid, bc, ms.SolverConfig())
    return grid, sol, exact, result


@pytest.fixture(scope="session")
def boosted_field_n2():
    """Sampled boosted exact solution on a wide n=2 annulus."""
    bs = ms.BoostedRadialSolution(ms.RadialSolution(2, 1.0), [0.5, 0.0])
    grid = ms.build_grid(2, ms.HoleSpec("circle", 1.0), 64.0, N_r=64,
                         N_ang=64, grading=1.06)
    fld = ms.sample(grid, lambda x: ms.boosted_eval(bs, x))
    return bs, grid, fld
