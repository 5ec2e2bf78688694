"""Self-check suites exposed through the `verify` subcommand.

Each suite replays a module's headline identities against closed-form
values or independent numerics and reports measured-vs-tolerance rows;
they are quick smoke tests, not the full pytest battery.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import analysis, exterior, lorentz, radial
from .errors import UsageError
from .mesh import HoleSpec, build_grid, sample
from .solver import BoundaryData, SolverConfig, solve_dirichlet

SUITES = ("lorentz", "radial", "solver", "residue", "asymptotics", "exterior")


@dataclass
class CheckResult:
    name: str
    measured: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.measured <= self.tolerance


def _suite_lorentz(seed: int) -> list:
    rng = np.random.default_rng(seed)
    out = []
    drift = 0.0
    round_trip = 0.0
    for _ in range(2000):
        n = int(rng.integers(2, 5))
        x = rng.normal(size=n) * 3.0
        t = float(rng.normal() * 3.0)
        a = rng.normal(size=n)
        a *= rng.uniform(0.0, 0.99) / np.linalg.norm(a)
        P = lorentz.SpacetimePoint(x, t)
        Q = lorentz.boost_graph_point(a, P)
        scale = 1.0 + float(x @ x) + t * t
        drift = max(drift,
                    abs(Q.quadratic_form() - P.quadratic_form()) / scale)
        Rt = lorentz.boost_graph_point(-a, Q)
        round_trip = max(round_trip,
                         max(float(np.max(np.abs(Rt.x - x))), abs(Rt.t - t))
                         / (1.0 + float(np.max(np.abs(x))) + abs(t)))
    out.append(CheckResult("quadratic form drift (relative)", drift, 1e-12))
    out.append(CheckResult("boost round trip (relative)", round_trip, 1e-12))
    R = lorentz.rotation_to_axis(np.array([0.3, -0.4, 0.5]))
    out.append(CheckResult("rotation orthogonality",
                           float(np.max(np.abs(R @ R.T - np.eye(3)))), 1e-14))
    k1, k2 = 0.37, -0.52
    x = np.array([0.7, -1.1])
    t = 0.4
    once = lorentz.boost_axis(k2, lorentz.boost_axis(
        k1, lorentz.SpacetimePoint(x, t)))
    k12 = (k1 + k2) / (1 + k1 * k2)
    direct = lorentz.boost_axis(k12, lorentz.SpacetimePoint(x, t))
    out.append(CheckResult("velocity addition",
                           max(float(np.max(np.abs(once.x - direct.x))),
                               abs(once.t - direct.t)), 1e-13))
    return out


def _suite_radial(seed: int) -> list:
    rng = np.random.default_rng(seed)
    out = []
    out.append(CheckResult("m(1) = ln 2",
                           abs(radial.m_const(1.0) - np.log(2.0)), 1e-10))
    out.append(CheckResult("m(2) = 0", abs(radial.m_const(2.0)), 1e-10))
    worst = 0.0
    for lam in (0.5, 2.0, -1.5):
        for n in (3, 4):
            scaled = np.sign(lam) * abs(lam) ** (1.0 / (n - 1)) \
                * radial.M_const(1.0, n)
            worst = max(worst, abs(radial.M_const(lam, n) - scaled)
                        / abs(scaled))
    out.append(CheckResult("M scaling law (relative)", worst, 1e-9))
    worst = 0.0
    for _ in range(50):
        lam = float(rng.uniform(-3, 3)) or 1.0
        n = int(rng.integers(2, 5))
        r = float(rng.uniform(0.2, 50.0))
        sol = radial.RadialSolution(n, lam)
        p = radial.w_slope(sol, r)
        worst = max(worst, abs(p / np.sqrt(1 - p * p)
                               - radial.flux_density(sol, r)))
    out.append(CheckResult("flux identity w'/sqrt(1-w'^2) = lam r^(1-n)",
                           worst, 1e-12))
    sol = radial.RadialSolution(2, 1.0)
    bsol = radial.BoostedRadialSolution(sol, np.zeros(2))
    x = np.array([3.0, 4.0])
    out.append(CheckResult("boost with a=0 is identity",
                           abs(radial.boosted_eval(bsol, x)
                               - radial.w_value(sol, 5.0)), 1e-12))
    out.append(CheckResult("oddness w(-lam) = -w(lam)",
                           abs(radial.w_value(radial.RadialSolution(3, -2.0),
                                              7.0)
                               + radial.w_value(radial.RadialSolution(3, 2.0),
                                                7.0)), 1e-12))
    return out


def _suite_solver(seed: int) -> list:
    rng = np.random.default_rng(seed)
    out = []
    grid = build_grid(2, HoleSpec("circle", 1.0), 4.0, 16, 32, 1.05)
    a = np.array([0.35, -0.2])
    affine = sample(grid, lambda p: a @ p)
    bc = BoundaryData(affine.values[0], affine.values[-1])
    res = solve_dirichlet(grid, bc, SolverConfig())
    out.append(CheckResult("affine data reproduced",
                           float(np.max(np.abs(res.field.values
                                               - affine.values))), 1e-10))
    out.append(CheckResult("theta_h positive", 0.0 if res.theta_h > 0 else 1.0,
                           0.0))
    from .solver import area_energy, element_quadrature
    quad = element_quadrature(grid)
    E = area_energy(res.field, quad)
    worst = 0.0
    for _ in range(10):
        bump = res.field.copy()
        i = int(rng.integers(1, grid.N_r))
        j = int(rng.integers(0, grid.N_A))
        bump.values[i, j] += rng.uniform(-0.05, 0.05)
        try:
            worst = max(worst, area_energy(bump, quad) - E)
        except Exception:
            pass
    out.append(CheckResult("solution maximizes area", worst, 1e-12))
    return out


def _suite_residue(seed: int) -> list:
    out = []
    sol = radial.RadialSolution(2, 1.5)
    rep = analysis.residue(sol, [2.0, 5.0, 11.0, 40.0, 100.0])
    out.append(CheckResult("Res[w_lam] = lam (exact path)",
                           abs(rep.mean - 1.5), 1e-10))
    out.append(CheckResult("contour independence (exact)", rep.spread, 1e-8))
    a = np.array([0.5, 0.0])
    bs = radial.BoostedRadialSolution(radial.RadialSolution(2, 1.0), a)
    rep2 = analysis.residue(bs, [1000.0])
    out.append(CheckResult("Res[w^a] = lam/sqrt(1-|a|^2)",
                           abs(rep2.mean - 1.0 / np.sqrt(0.75)), 1e-6))
    sol3 = radial.RadialSolution(3, 2.0)
    rep3 = analysis.residue(sol3, [3.0, 10.0])
    out.append(CheckResult("n=3 normalization Res[w_lam] = lam",
                           abs(rep3.mean - 2.0), 1e-8))
    return out


def _suite_asymptotics(seed: int) -> list:
    out = []
    a = np.array([0.0, 0.5])
    bs = radial.BoostedRadialSolution(radial.RadialSolution(2, 1.0), a)
    fit = analysis.fit_asymptotics(bs, window=(200.0, 1000.0))
    sq = np.sqrt(0.75)
    out.append(CheckResult("n=2 tilt recovered",
                           float(np.max(np.abs(fit.a - a))), 1e-4))
    out.append(CheckResult("n=2 c = sqrt(1-|a|^2) m(lam)",
                           abs(fit.c - sq * radial.m_const(1.0)), 1e-3))
    out.append(CheckResult("n=2 d = sqrt(1-|a|^2) lam",
                           abs(fit.d - sq), 1e-3))
    rep = analysis.residue(bs, [500.0])
    out.append(CheckResult("relation |d-(1-|a|^2)Res|",
                           analysis.check_residue_relation(fit, rep), 1e-3))
    a3 = np.array([0.0, 0.0, 0.5])
    bs3 = radial.BoostedRadialSolution(radial.RadialSolution(3, 1.0), a3)
    fit3 = analysis.fit_asymptotics(bs3, window=(100.0, 1000.0))
    out.append(CheckResult("n=3 c = sqrt(1-|a|^2) M(1,3)",
                           abs(fit3.c - sq * radial.M_const(1.0, 3)), 1e-3))
    out.append(CheckResult("n=3 d = sqrt(1-|a|^2) lam",
                           abs(fit3.d - sq), 1e-3))
    return out


def _suite_exterior(seed: int) -> list:
    out = []
    hole = HoleSpec("circle", 1.0)
    prob = exterior.ExteriorProblem(2, hole, 0.0, {"a": [0.0, 0.0], "d": 1.0})
    vals = exterior.outer_data(prob, 32.0)
    w = radial.w_value(radial.RadialSolution(2, 1.0), 32.0)
    out.append(CheckResult("outer data a=0,d=1 samples w_1",
                           float(np.max(np.abs(vals - w))), 1e-12))
    prob3 = exterior.ExteriorProblem(3, hole, 0.0, {"a": 0.4, "c": 2.0})
    ang = np.pi * np.arange(33) / 32
    vals3 = exterior.outer_data(prob3, 20.0, ang)
    out.append(CheckResult("outer data n=3 affine",
                           float(np.max(np.abs(vals3 - (0.4 * 20.0
                                                        * np.cos(ang) + 2.0)))),
                           1e-12))
    sched = exterior.ContinuationSchedule.geometric(hole, 64.0, N_ang=32)
    res = exterior.solve_exterior(prob3, sched)
    diffs = [t.sup_diff for t in res.trace[1:]]
    ratio = max(b / a for a, b in zip(diffs, diffs[1:])) if len(diffs) > 1 \
        else 0.0
    out.append(CheckResult("monitor trace decreasing", ratio, 0.99))
    out.append(CheckResult("fitted c near target", abs(res.fit.c - 2.0), 5e-2))
    rep = exterior.barrier_check(prob3, res.field)
    out.append(CheckResult("barrier containment",
                           max(rep.lower_violation, rep.upper_violation),
                           1e-8 + 5.0 * (2 * np.pi / 32) ** 2))
    return out


_RUNNERS = {
    "lorentz": _suite_lorentz,
    "radial": _suite_radial,
    "solver": _suite_solver,
    "residue": _suite_residue,
    "asymptotics": _suite_asymptotics,
    "exterior": _suite_exterior,
}


def run_suite(name: str, seed: int = 0) -> list:
    if name not in _RUNNERS:
        raise UsageError(f"unknown verify suite {name!r}; choose from "
                         f"{', '.join(SUITES)}")
    return _RUNNERS[name](seed)
