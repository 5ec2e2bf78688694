"""Dirichlet solver for the maximal surface equation on annular grids.

The solution maximizes the area functional

    E(u) = int sqrt(1 - |Du|^2) dmu

over spacelike graphs with prescribed boundary values; its Euler-Lagrange
equation is div(Du / sqrt(1 - |Du|^2)) = 0.  E is concave, so the damped
Newton ascent below (with a spacelike step cap and an energy
non-decrease line search) converges from any spacelike starting guess.

The discretization is isoparametric bilinear finite elements with 2x2
Gauss quadrature (see mesh.element_quadrature); for n = 3 the quadrature
weight carries the 2*pi*rho factor of the solid of revolution, so the
same assembly covers the axisymmetric case, with natural (reflection)
conditions holding automatically on the axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import cg

from .errors import (AdmissibilityError, ConvergenceError, LinearSolveError,
                     NonSpacelikeError)
from .mesh import ElementQuadrature, Grid, ScalarField, element_quadrature


@dataclass(frozen=True)
class SolverConfig:
    newton_tol: float = 1e-10       # sup norm of the discrete residual
    max_iter: int = 50
    spacelike_cap: float = 1e-6     # enforce 1 - |Du|^2 >= cap at Gauss pts
    linesearch_shrink: float = 0.5
    linear_tol: float = 1e-12       # relative tolerance of the CG solve


@dataclass
class BoundaryData:
    """Dirichlet values on the inner (i=0) and outer (i=N_r) rings."""

    inner: np.ndarray
    outer: np.ndarray

    def __post_init__(self):
        self.inner = np.atleast_1d(np.asarray(self.inner, dtype=float))
        self.outer = np.atleast_1d(np.asarray(self.outer, dtype=float))

    def conformed(self, grid: Grid) -> "BoundaryData":
        def fit(v, name):
            if v.size == 1:
                return np.full(grid.N_A, float(v))
            if v.shape != (grid.N_A,):
                raise AdmissibilityError(
                    f"{name} boundary data has shape {v.shape}, expected "
                    f"({grid.N_A},)")
            return v
        return BoundaryData(fit(self.inner, "inner"), fit(self.outer, "outer"))


@dataclass
class AdmissibilityReport:
    ok: bool
    worst_ratio: float
    where: str


def check_admissible(grid: Grid, boundary: BoundaryData) -> AdmissibilityReport:
    """Proxy for the spacelike-extension condition |g(x)-g(y)| < |x-y|.

    Checks adjacent-node chords along each boundary ring and every
    inner/outer node pair (the rings are where the constraint binds for
    exterior-type data).
    """
    bd = boundary.conformed(grid)
    pin = grid.points[0]
    pout = grid.points[grid.N_r]
    worst, where = 0.0, "none"

    def ring(pts, vals, label):
        nonlocal worst, where
        if grid.periodic:
            dx = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
            du = np.abs(np.roll(vals, -1) - vals)
        else:
            dx = np.linalg.norm(pts[1:] - pts[:-1], axis=1)
            du = np.abs(vals[1:] - vals[:-1])
        ratio = du / dx
        k = int(np.argmax(ratio))
        if ratio[k] > worst:
            worst, where = float(ratio[k]), f"{label} ring chord {k}"

    ring(pin, bd.inner, "inner")
    ring(pout, bd.outer, "outer")

    diff = np.abs(bd.inner[:, None] - bd.outer[None, :])
    dist = np.linalg.norm(pin[:, None, :] - pout[None, :, :], axis=2)
    ratio = diff / dist
    k = int(np.argmax(ratio))
    if ratio.flat[k] > worst:
        worst = float(ratio.flat[k])
        where = f"inner node {k // grid.N_A} vs outer node {k % grid.N_A}"
    return AdmissibilityReport(worst < 1.0 - 1e-12, worst, where)


# ----------------------------------------------------------------------
# energy, residual, Hessian

def _gauss_gradients(u_flat, quad):
    ue = u_flat[quad.conn]                               # (NE, 4)
    return np.einsum("egkd,ek->egd", quad.grad, ue)      # (NE, 4gp, 2)


def area_energy(fld: ScalarField, quad: ElementQuadrature | None = None) -> float:
    """E(u) = int sqrt(1-|Du|^2); raises NonSpacelikeError if |Du| >= 1
    at any quadrature point."""
    if quad is None:
        quad = element_quadrature(fld.grid)
    grads = _gauss_gradients(fld.values.ravel(), quad)
    q2 = 1.0 - np.einsum("egd,egd->eg", grads, grads)
    if np.any(q2 <= 0.0):
        raise NonSpacelikeError(
            f"gradient reaches |Du| >= 1 (min 1-|Du|^2 = {q2.min():.3e})")
    return float(np.sum(quad.weights * np.sqrt(q2)))


def spacelike_margin(fld: ScalarField, quad: ElementQuadrature) -> float:
    grads = _gauss_gradients(fld.values.ravel(), quad)
    q2 = 1.0 - np.einsum("egd,egd->eg", grads, grads)
    return float(q2.min())


def theta_h(fld: ScalarField, quad: ElementQuadrature | None = None) -> float:
    """Discrete spacelikeness gauge 1 - sup |Du| over quadrature points
    (positive iff the discrete graph is strictly spacelike)."""
    if quad is None:
        quad = element_quadrature(fld.grid)
    grads = _gauss_gradients(fld.values.ravel(), quad)
    return float(1.0 - np.sqrt(np.einsum("egd,egd->eg", grads, grads).max()))


def _assemble(u_flat, quad, nnode):
    """Residual vector G (dE) and SPD matrix K = -d2E, assembled globally."""
    grads = _gauss_gradients(u_flat, quad)
    q2 = 1.0 - np.einsum("egd,egd->eg", grads, grads)
    if np.any(q2 <= 0.0):
        raise NonSpacelikeError(
            f"non-spacelike iterate (min 1-|Du|^2 = {q2.min():.3e})")
    q = np.sqrt(q2)
    w = quad.weights

    # G_i = -sum w * (Du . dN_i)/q
    du_dn = np.einsum("egd,egkd->egk", grads, quad.grad)
    Ge = -np.einsum("eg,egk->ek", w / q, du_dn)
    G = np.zeros(nnode)
    np.add.at(G, quad.conn, Ge)

    # K_ij = sum w * [ dN_i.dN_j/q + (Du.dN_i)(Du.dN_j)/q^3 ]
    gdot = np.einsum("egkd,egld->egkl", quad.grad, quad.grad)
    Ke = np.einsum("eg,egkl->ekl", w / q, gdot) \
        + np.einsum("eg,egk,egl->ekl", w / q ** 3, du_dn, du_dn)
    NE = quad.conn.shape[0]
    rows = np.repeat(quad.conn, 4, axis=1).ravel()
    cols = np.tile(quad.conn, (1, 4)).ravel()
    K = sparse.coo_matrix((Ke.reshape(NE, 16).ravel(), (rows, cols)),
                          shape=(nnode, nnode)).tocsr()
    return G, K


def _cg_solve(K, b, rtol, label):
    diag = K.diagonal()
    if np.any(diag <= 0):
        raise LinearSolveError(f"{label}: non-positive diagonal in K")
    M = sparse.diags(1.0 / diag)
    try:
        x, info = cg(K, b, rtol=rtol, atol=0.0, maxiter=50 * b.size, M=M)
    except TypeError:  # older scipy spells the kwarg `tol`
        x, info = cg(K, b, tol=rtol, atol=0.0, maxiter=50 * b.size, M=M)
    if info != 0:
        raise LinearSolveError(f"{label}: CG failed to reach tolerance "
                               f"(info={info})")
    return x


@dataclass
class SolveResult:
    field: ScalarField
    iterations: int
    residuals: list
    energy_history: list
    theta_h: float
    converged: bool


def _free_mask(grid: Grid) -> np.ndarray:
    mask = np.ones(grid.shape, dtype=bool)
    mask[0, :] = False
    mask[grid.N_r, :] = False
    return mask.ravel()


def _blend_initial(grid: Grid, bd: BoundaryData) -> np.ndarray:
    s = grid.s_nodes[:, None]
    return (1.0 - s) * bd.inner[None, :] + s * bd.outer[None, :]


def _enforce_cap(vals, grid, quad, cap, free):
    """Jacobi-smooth the interior until the spacelike cap holds."""
    fld = ScalarField(grid, vals)
    for _ in range(400):
        if spacelike_margin(fld, quad) >= cap:
            return fld.values
        v = fld.values
        nb = np.zeros_like(v)
        cnt = np.zeros_like(v)
        for sh, ax in ((1, 0), (-1, 0), (1, 1), (-1, 1)):
            if ax == 0:
                r = np.roll(v, sh, axis=0)
                ok = np.ones_like(v, dtype=bool)
                if sh == 1:
                    ok[0] = False
                else:
                    ok[-1] = False
                nb += np.where(ok, r, 0.0)
                cnt += ok
            else:
                if grid.periodic:
                    nb += np.roll(v, sh, axis=1)
                    cnt += 1.0
                else:
                    r = np.roll(v, sh, axis=1)
                    ok = np.ones_like(v, dtype=bool)
                    if sh == 1:
                        ok[:, 0] = False
                    else:
                        ok[:, -1] = False
                    nb += np.where(ok, r, 0.0)
                    cnt += ok
        sm = nb / np.maximum(cnt, 1.0)
        newv = v.copy()
        fm = free.reshape(grid.shape)
        newv[fm] = sm[fm]
        fld = ScalarField(grid, newv)
    raise NonSpacelikeError(
        "could not produce a spacelike initial guess from the boundary blend")


def newton_step(fld: ScalarField, boundary: BoundaryData,
                config: SolverConfig = SolverConfig(),
                quad: ElementQuadrature | None = None):
    """One damped Newton update; returns (field, residual_norm, step_norm).

    The reported residual norm is the sup norm of dE over free nodes at
    the *incoming* iterate.
    """
    grid = fld.grid
    if quad is None:
        quad = element_quadrature(grid)
    bd = boundary.conformed(grid)
    free = _free_mask(grid)
    vals = fld.values.copy()
    vals[0, :] = bd.inner
    vals[grid.N_r, :] = bd.outer
    u = vals.ravel()

    G, K = _assemble(u, quad, grid.num_nodes)
    res = float(np.max(np.abs(G[free]))) if free.any() else 0.0
    Kff = K[free][:, free]
    delta = _cg_solve(Kff, G[free], config.linear_tol, "newton step")

    full = np.zeros_like(u)
    full[free] = delta
    E0 = area_energy(ScalarField(grid, u.reshape(grid.shape)), quad)
    t = 1.0
    cap = config.spacelike_cap
    while True:
        trial = u + t * full
        tf = ScalarField(grid, trial.reshape(grid.shape))
        if spacelike_margin(tf, quad) >= cap and \
                area_energy(tf, quad) >= E0 - 1e-13 * (1.0 + abs(E0)):
            break
        t *= config.linesearch_shrink
        if t < 1e-12:
            raise ConvergenceError("line search stalled (no admissible step)",
                                   history=[res])
    step = float(np.max(np.abs(t * delta))) if delta.size else 0.0
    return tf, res, step


def solve_dirichlet(grid: Grid, boundary: BoundaryData,
                    config: SolverConfig = SolverConfig(),
                    initial: ScalarField | None = None) -> SolveResult:
    """Solve the Dirichlet problem on the grid; returns a SolveResult.

    Raises AdmissibilityError for non-spacelike-extendable boundary data,
    NonSpacelikeError if no spacelike start can be built, and
    ConvergenceError (with the residual history attached) if Newton does
    not reach config.newton_tol within config.max_iter iterations.
    """
    bd = boundary.conformed(grid)
    rep = check_admissible(grid, bd)
    if not rep.ok:
        raise AdmissibilityError(
            f"boundary data is not admissible: difference ratio "
            f"{rep.worst_ratio:.6f} >= 1 at {rep.where}")
    quad = element_quadrature(grid)
    free = _free_mask(grid)

    if initial is not None:
        vals = initial.values.copy()
    else:
        vals = _blend_initial(grid, bd)
    vals[0, :] = bd.inner
    vals[grid.N_r, :] = bd.outer
    fld = ScalarField(grid, vals)
    if spacelike_margin(fld, quad) < config.spacelike_cap:
        fld = ScalarField(grid, _enforce_cap(vals, grid, quad,
                                             config.spacelike_cap, free))

    residuals = []
    energies = [area_energy(fld, quad)]
    for it in range(config.max_iter):
        G, _ = _assemble(fld.values.ravel(), quad, grid.num_nodes)
        res = float(np.max(np.abs(G[free]))) if free.any() else 0.0
        residuals.append(res)
        if res <= config.newton_tol:
            return SolveResult(fld, it, residuals, energies,
                               theta_h(fld, quad), True)
        fld, _, _ = newton_step(fld, boundary, config, quad)
        energies.append(area_energy(fld, quad))
    G, _ = _assemble(fld.values.ravel(), quad, grid.num_nodes)
    res = float(np.max(np.abs(G[free]))) if free.any() else 0.0
    residuals.append(res)
    if res <= config.newton_tol:
        return SolveResult(fld, config.max_iter, residuals, energies,
                           theta_h(fld, quad), True)
    raise ConvergenceError(
        f"Newton did not reach tol={config.newton_tol} in "
        f"{config.max_iter} iterations (last residual {res:.3e})",
        history=residuals)
