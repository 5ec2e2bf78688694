"""Exterior Dirichlet problems by continuation over growing outer radii.

Given admissible data g on the hole boundary and a prescribed far field
(tilt a with |a| < 1, plus the log/flux amplitude d for n = 2 or the
additive constant c for n >= 3), the exterior solution is obtained as
the limit of annulus solves on B_R \\ A with outer data

    n = 2:   u_R = w_lam^a on |x| = R,   lam = d / sqrt(1 - |a|^2)
    n >= 3:  u_R = a.x + c on |x| = R

for a geometric sequence of radii.  Convergence is monitored by sup
differences of consecutive stages on a fixed annulus near the hole, and
the limit candidate is sandwiched between explicit shifted-radial
barriers.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .analysis import AsymptoticFit, fit_asymptotics
from .errors import ConvergenceError, DomainError, InvalidBoostError
from .mesh import Grid, HoleSpec, ScalarField, build_grid, interp
from .radial import (BoostedRadialSolution, M_const, RadialSolution,
                     boosted_eval)
from .solver import BoundaryData, SolveResult, SolverConfig, solve_dirichlet


def _tilt_vector(n: int, a) -> np.ndarray:
    """Normalize the tilt to a length-n vector; n=3 requires an axis tilt."""
    if np.isscalar(a):
        vec = np.zeros(n)
        vec[-1] = float(a)
        return vec
    vec = np.asarray(a, dtype=float)
    if vec.shape == (n,):
        if n == 3 and np.any(vec[:2] != 0.0):
            raise InvalidBoostError(
                "n=3 runs are axisymmetric: tilt must point along the axis "
                f"(got {vec.tolist()})")
        return vec
    raise InvalidBoostError(f"tilt has shape {vec.shape}, expected ({n},)")


@dataclass
class ExteriorProblem:
    """n, hole, inner data g, and the prescribed far-field target.

    g may be a scalar, an array matching the grid's angular nodes, or a
    callable taking a boundary point (length-2 array; for n = 3 the
    meridian coordinates (cylindrical radius, z)).
    target: {"a": ..., "d": ...} for n = 2; {"a": ..., "c": ...} for n = 3.
    """

    n: int
    hole: HoleSpec
    g: object
    target: dict

    def __post_init__(self):
        if self.n not in (2, 3):
            raise DomainError(f"n={self.n} must be 2 or 3")
        t = dict(self.target)
        keys = set(t)
        want = {"a", "d"} if self.n == 2 else {"a", "c"}
        if keys != want:
            raise DomainError(
                f"target keys {sorted(keys)} do not match {sorted(want)} "
                f"for n={self.n}")
        a = _tilt_vector(self.n, t["a"])
        if np.linalg.norm(a) >= 1.0:
            raise InvalidBoostError(
                f"target tilt |a|={np.linalg.norm(a):.6f} must be < 1")
        self.a = a
        self.amplitude = float(t["d"]) if self.n == 2 else float(t["c"])

    @property
    def lam(self) -> float:
        """n=2 flux parameter lam = d / sqrt(1-|a|^2)."""
        if self.n != 2:
            raise DomainError("lam is only defined for the n=2 target (a, d)")
        return self.amplitude / np.sqrt(1.0 - self.a @ self.a)

    def inner_values(self, grid: Grid) -> np.ndarray:
        pts = grid.points[0]
        if callable(self.g):
            return np.array([float(self.g(p)) for p in pts])
        g = np.atleast_1d(np.asarray(self.g, dtype=float))
        if g.size == 1:
            return np.full(grid.N_A, float(g[0]))
        if g.shape != (grid.N_A,):
            raise DomainError(
                f"inner data has shape {g.shape}, expected ({grid.N_A},)")
        return g


@dataclass(frozen=True)
class ContinuationSchedule:
    """Strictly increasing outer radii with per-stage radial resolutions."""

    radii: tuple
    N_r: tuple
    N_ang: int = 64
    grading: float = 1.08

    def __post_init__(self):
        radii = tuple(float(r) for r in self.radii)
        if len(radii) < 3:
            raise DomainError(
                f"schedule needs at least 3 stages; got {len(radii)}")
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise DomainError(f"schedule radii {radii} must be increasing")
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "N_r", tuple(int(k) for k in self.N_r))
        if len(self.N_r) != len(radii):
            raise DomainError("schedule needs one N_r per stage")

    @staticmethod
    def geometric(hole: HoleSpec, R_max: float, factor: float = 2.0,
                  N_ang: int = 64, grading: float = 1.08,
                  R_min: float | None = None) -> "ContinuationSchedule":
        """Radii R_min * factor^j up to R_max, R_min = 8 * hole diameter.

        Radial counts grow with the stage so the cell size near the hole
        stays roughly fixed (consecutive stages then compare like meshes
        on the monitor annulus).
        """
        if R_min is None:
            R_min = 8.0 * (2.0 * hole.max_radius)
        radii = []
        R = float(R_min)
        while R <= R_max * (1 + 1e-12):
            radii.append(R)
            R *= factor
        if len(radii) < 3:
            raise DomainError(
                f"R_max={R_max} gives {len(radii)} stages from R_min={R_min}; "
                "need at least 3")
        h0 = 0.75 * hole.radius * 2.0 * np.pi / N_ang
        N_r = []
        for R in radii:
            if grading > 1.0:
                k = np.log1p((R - hole.radius) * (grading - 1.0) / h0) \
                    / np.log(grading)
            else:
                k = (R - hole.radius) / h0
            N_r.append(max(8, int(np.ceil(k))))
        return ContinuationSchedule(tuple(radii), tuple(N_r), N_ang, grading)


def outer_data(problem: ExteriorProblem, R: float,
               angles: np.ndarray | None = None) -> np.ndarray:
    """Outer Dirichlet samples at |x| = R on the given angle nodes."""
    R = float(R)
    if R <= problem.hole.max_radius:
        raise DomainError(f"outer radius R={R} must exceed the hole")
    if angles is None:
        angles = (2.0 * np.pi * np.arange(64) / 64 if problem.n == 2
                  else np.pi * np.arange(65) / 64)
    angles = np.asarray(angles, dtype=float)
    if problem.n == 2:
        sol = BoostedRadialSolution(RadialSolution(2, problem.lam), problem.a)
        pts = R * np.stack([np.cos(angles), np.sin(angles)], axis=-1)
        return np.array([boosted_eval(sol, p) for p in pts])
    z = R * np.cos(angles)
    return problem.a[-1] * z + problem.amplitude


@dataclass
class StageRecord:
    stage: int
    R: float
    sup_diff: float
    newton_iters: int
    theta_h: float


@dataclass
class ExteriorResult:
    field: ScalarField
    fit: AsymptoticFit
    trace: list
    stage_fields: list
    converged: bool

    def __iter__(self):
        return iter((self.field, self.fit, self.trace))


def _monitor_points(problem: ExteriorProblem):
    rho = problem.hole.max_radius
    radii = rho * np.linspace(1.5, 3.0, 7)
    if problem.n == 2:
        th = 2.0 * np.pi * np.arange(128) / 128
        dirs = np.stack([np.cos(th), np.sin(th)], axis=-1)
    else:
        ph = np.linspace(0.0, np.pi, 65)
        dirs = np.stack([np.sin(ph), np.cos(ph)], axis=-1)
    return np.concatenate([r * dirs for r in radii])


def monitor_difference(problem: ExteriorProblem, f1: ScalarField,
                       f2: ScalarField) -> float:
    pts = _monitor_points(problem)
    v1 = np.array([interp(f1, p) for p in pts])
    v2 = np.array([interp(f2, p) for p in pts])
    return float(np.max(np.abs(v1 - v2)))


def _outer_model(problem: ExteriorProblem):
    if problem.n == 2:
        sol = BoostedRadialSolution(RadialSolution(2, problem.lam), problem.a)
        return lambda p: boosted_eval(sol, p)
    az, c = problem.a[-1], problem.amplitude
    return lambda p: az * p[1] + c


def _warm_start(grid: Grid, prev: ScalarField, problem: ExteriorProblem,
                outer_vals: np.ndarray) -> ScalarField:
    """Carry the previous stage inward; use the outer model (offset-matched
    at the old rim) beyond it; blend to the new outer data on the last 10%
    of the radial range."""
    R_prev = prev.grid.R_out
    model = _outer_model(problem)
    vals = np.empty(grid.shape)
    for j in range(grid.N_A):
        offset = None
        for i in range(grid.N_r + 1):
            p = grid.points[i, j]
            r = grid.radii[i, j]
            if r <= R_prev * (1.0 - 1e-12):
                vals[i, j] = interp(prev, p)
            else:
                if offset is None:
                    rim = p * (R_prev * (1.0 - 1e-9) / r)
                    offset = interp(prev, rim) - model(rim)
                taper = max(0.0, (grid.R_out - r) / (grid.R_out - R_prev))
                vals[i, j] = model(p) + offset * taper
    s = grid.s_nodes
    w = np.clip((s - 0.9) / 0.1, 0.0, 1.0)[:, None]
    vals = (1.0 - w) * vals + w * outer_vals[None, :]
    return ScalarField(grid, vals)


def solve_exterior(problem: ExteriorProblem, schedule: ContinuationSchedule,
                   cfg: SolverConfig = SolverConfig(),
                   outer_perturbation=None,
                   fit_window=None) -> ExteriorResult:
    """Run the continuation; returns (final field, fit, trace) plus extras.

    outer_perturbation, if given, is a callable angle -> value added to
    every stage's outer data (used by the uniqueness cross-check).
    Raises ConvergenceError tagged with the stage index if an annulus
    solve fails, and a continuation-stall error if the monitor trace
    fails to decrease over 3 consecutive stages.
    """
    trace: list[StageRecord] = []
    stage_fields: list[ScalarField] = []
    prev = None
    diffs = []
    for j, R in enumerate(schedule.radii):
        grid = build_grid(problem.n, problem.hole, R, schedule.N_r[j],
                          schedule.N_ang, schedule.grading)
        outer = outer_data(problem, R, grid.angles)
        if outer_perturbation is not None:
            outer = outer + np.array([float(outer_perturbation(t))
                                      for t in grid.angles])
        bc = BoundaryData(problem.inner_values(grid), outer)
        initial = None if prev is None else _warm_start(grid, prev, problem,
                                                        outer)
        try:
            result: SolveResult = solve_dirichlet(grid, bc, cfg, initial)
        except Exception as exc:
            raise ConvergenceError(
                f"stage {j} (R={R}) failed: {exc}",
                history=[t.__dict__ for t in trace]) from exc
        fld = result.field
        sup = monitor_difference(problem, prev, fld) if prev is not None \
            else float("nan")
        trace.append(StageRecord(j, R, sup, result.iterations,
                                 result.theta_h))
        stage_fields.append(fld)
        if prev is not None:
            diffs.append(sup)
        if len(diffs) >= 3 and diffs[-1] >= diffs[-2] >= diffs[-3]:
            raise ConvergenceError(
                f"continuation stalled: monitor differences {diffs[-3:]} "
                "non-decreasing over 3 stages",
                history=[t.__dict__ for t in trace])
        prev = fld

    converged = False
    if diffs:
        halving = all(b <= 0.5 * a for a, b in zip(diffs, diffs[1:]))
        converged = diffs[-1] <= 10.0 * cfg.newton_tol or halving
    final = stage_fields[-1]
    if fit_window is None:
        fit_window = (final.grid.R_out / 8.0, final.grid.R_out / 2.0)
    fit = fit_asymptotics(final, fit_window)
    return ExteriorResult(final, fit, trace, stage_fields, converged)


# ----------------------------------------------------------------------
# barriers

@dataclass
class BarrierEnvelope:
    """Shifted boosted-radial envelope Psi- <= u <= Psi+.

    For n = 2 both envelopes are the same tilted log end w_lam^a offset by
    the boundary defects c-/c+; for n >= 3 they are the +/-lam* bowls
    shifted so their far-field planes coincide with a.x + c.
    """

    n: int
    a: np.ndarray
    lam_lower: float
    lam_upper: float
    shift_lower: float
    shift_upper: float

    def lower(self, p) -> float:
        sol = BoostedRadialSolution(RadialSolution(self.n, self.lam_lower),
                                    self.a)
        return boosted_eval(sol, self._embed(p)) + self.shift_lower

    def upper(self, p) -> float:
        sol = BoostedRadialSolution(RadialSolution(self.n, self.lam_upper),
                                    self.a)
        return boosted_eval(sol, self._embed(p)) + self.shift_upper

    def _embed(self, p):
        p = np.asarray(p, dtype=float)
        if self.n == 3 and p.shape == (2,):
            return np.array([p[0], 0.0, p[1]])
        return p


@dataclass
class BarrierReport:
    envelope: BarrierEnvelope
    lower_violation: float
    upper_violation: float


def barrier_envelope(problem: ExteriorProblem, grid: Grid) -> BarrierEnvelope:
    g = problem.inner_values(grid)
    if problem.n == 2:
        lam = problem.lam
        sol = BoostedRadialSolution(RadialSolution(2, lam), problem.a)
        ref = np.array([boosted_eval(sol, p) for p in grid.points[0]])
        c_minus = min(0.0, float(np.min(g - ref)))
        c_plus = max(0.0, float(np.max(g - ref)))
        return BarrierEnvelope(2, problem.a, lam, lam, c_minus, c_plus)
    # n >= 3: lam* with sqrt(1-|a|^2) M(lam*, n) >= |c| + R~ + G
    c = problem.amplitude
    G = float(np.max(np.abs(g)))
    R_tilde = problem.hole.max_radius
    sq = np.sqrt(1.0 - problem.a @ problem.a)
    need = abs(c) + R_tilde + G
    lam_star = (need / (sq * M_const(1.0, problem.n))) ** (problem.n - 1)
    height = sq * M_const(lam_star, problem.n)
    return BarrierEnvelope(problem.n, problem.a, lam_star, -lam_star,
                           c - height, c + height)


def barrier_check(problem: ExteriorProblem, fld: ScalarField) -> BarrierReport:
    """Worst nodewise violations of the explicit barrier sandwich."""
    env = barrier_envelope(problem, fld.grid)
    pts = fld.grid.points.reshape(-1, 2)
    u = fld.values.ravel()
    lo = np.array([env.lower(p) for p in pts])
    hi = np.array([env.upper(p) for p in pts])
    return BarrierReport(env,
                         float(np.max(np.maximum(lo - u, 0.0))),
                         float(np.max(np.maximum(u - hi, 0.0))))


def uniqueness_crosscheck(problem: ExteriorProblem,
                          schedule: ContinuationSchedule,
                          cfg: SolverConfig = SolverConfig(),
                          amplitude: float = 0.1) -> float:
    """Sup monitor-annulus difference between the plain continuation and
    one whose outer data carries a bounded angular perturbation; the
    uniqueness statement predicts this tends to 0 as R grows."""
    if problem.n == 2:
        pert = lambda t: amplitude * np.sin(3.0 * t)
    else:
        pert = lambda t: amplitude * np.cos(2.0 * t)
    base = solve_exterior(problem, schedule, cfg)
    bent = solve_exterior(problem, schedule, cfg, outer_perturbation=pert)
    return monitor_difference(problem, base.field, bent.field)
