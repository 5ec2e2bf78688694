"""Flux residues, asymptotic fits, blowdowns, curvature, and extensions.

An exterior solution with tilt a (|a| < 1) behaves at infinity like

    n = 2:   u = a.x + c + d * ln sqrt(|x|^2 - (a.x)^2) + o(1)
    n >= 3:  u = a.x + c - d/(n-2) * (|x|^2 - (a.x)^2)^{(2-n)/2} + o(r^{2-n})

and carries a conserved flux residue

    Res = (1/kappa_n) oint_{|x|=r} Du / sqrt(1-|Du|^2) . nu dS,
    kappa_2 = 2*pi,  kappa_n = (n-2)*|S^{n-1}| (= 4*pi for n = 3),

independent of r.  The amplitude and the residue are linked by
d = (1 - |a|^2) * Res, which is the main cross-check implemented here.

Everything accepts either a solved ScalarField (on a mesh.Grid) or an
exact RadialSolution / BoostedRadialSolution.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson

from .errors import DomainError, FitError, NonSpacelikeError
from .mesh import Grid, ScalarField, gradient, interp
from .radial import (BoostedRadialSolution, RadialSolution, boosted_eval,
                     boosted_flux_vector, boosted_gradient,
                     boosted_value_and_gradient, m_const)

# ----------------------------------------------------------------------
# uniform access to fields and exact solutions


def _as_boosted(obj):
    if isinstance(obj, BoostedRadialSolution):
        return obj
    if isinstance(obj, RadialSolution):
        return BoostedRadialSolution(obj, np.zeros(obj.n))
    return None


def _dimension(obj) -> int:
    ex = _as_boosted(obj)
    if ex is not None:
        return ex.n
    if isinstance(obj, ScalarField):
        return obj.grid.n
    raise DomainError(f"unsupported object {type(obj).__name__}; expected a "
                      "ScalarField, RadialSolution, or BoostedRadialSolution")


class _FieldFlux:
    """Samples Du and the flux vector of a gridded field by interpolation."""

    def __init__(self, fld: ScalarField):
        self.fld = fld
        g = gradient(fld)
        self.gx = ScalarField(fld.grid, g[..., 0])
        self.gy = ScalarField(fld.grid, g[..., 1])

    def grad(self, x):
        return np.array([interp(self.gx, x), interp(self.gy, x)])

    def flux(self, x):
        g = self.grad(x)
        q2 = 1.0 - g @ g
        if q2 <= 0.0:
            raise NonSpacelikeError(
                f"interpolated gradient reaches |Du| >= 1 at {tuple(x)}")
        return g / np.sqrt(q2)


def _check_radius_inside(obj, r):
    if isinstance(obj, ScalarField):
        g = obj.grid
        if not (g.hole.max_radius < r < g.R_out):
            raise DomainError(
                f"radius {r} is not strictly inside the annulus "
                f"({g.hole.max_radius}, {g.R_out})")


# ----------------------------------------------------------------------
# residue

@dataclass
class ResidueReport:
    n: int
    radii: np.ndarray
    values: np.ndarray

    @property
    def mean(self) -> float:
        return float(np.mean(self.values))

    @property
    def spread(self) -> float:
        return float(np.max(self.values) - np.min(self.values))


def raw_flux(obj, r: float, n: int | None = None, samples: int | None = None
             ) -> float:
    """Unnormalized outward flux oint_{|x|=r} Du/sqrt(1-|Du|^2) . nu dS."""
    if n is None:
        n = _dimension(obj)
    r = float(r)
    if r <= 0:
        raise DomainError(f"flux radius {r} must be positive")
    _check_radius_inside(obj, r)
    ex = _as_boosted(obj)
    if ex is not None:
        fluxer = lambda x: boosted_flux_vector(ex, x)
    else:
        fluxer = _FieldFlux(obj).flux

    if n == 2:
        K = samples or (4 * obj.grid.N_ang if isinstance(obj, ScalarField)
                        else 2048)
        th = 2.0 * np.pi * np.arange(K) / K
        e = np.stack([np.cos(th), np.sin(th)], axis=-1)
        vr = np.array([fluxer(r * e[k]) @ e[k] for k in range(K)])
        return float(r * vr.mean() * 2.0 * np.pi)

    K = samples or (4 * obj.grid.N_ang + 1 if isinstance(obj, ScalarField)
                    else 1025)
    if K % 2 == 0:
        K += 1
    if isinstance(obj, ScalarField):
        ph = np.linspace(0.0, np.pi, K)
        e = np.stack([np.sin(ph), np.cos(ph)], axis=-1)   # (rho_cyl, z)
        vr = np.array([fluxer(r * e[k]) @ e[k] for k in range(K)])
        integrand = vr * np.sin(ph)
        return float(2.0 * np.pi * r * r * simpson(integrand, x=ph))
    # exact solution, n >= 3: the flux is invariant under rotating contour
    # and solution together, so integrate the axis-aligned copy, which is
    # axisymmetric about e_n (polar angle measured from the boost axis)
    from math import gamma, pi
    axis_a = np.zeros(ex.n)
    axis_a[-1] = ex.boost.speed
    ax_sol = BoostedRadialSolution(ex.base, axis_a)
    ph = np.linspace(0.0, np.pi, K)
    e = np.zeros((K, ex.n))
    e[:, 0] = np.sin(ph)
    e[:, -1] = np.cos(ph)
    vr = np.array([boosted_flux_vector(ax_sol, r * e[k]) @ e[k]
                   for k in range(K)])
    ring = 2.0 * pi ** ((n - 1) / 2.0) / gamma((n - 1) / 2.0)  # |S^(n-2)|
    return float(ring * r ** (n - 1)
                 * simpson(vr * np.sin(ph) ** (n - 2), x=ph))


def _residue_normalizer(n: int) -> float:
    if n == 2:
        return 2.0 * np.pi
    # (n-2) * area of the unit sphere S^{n-1} in R^n
    from math import gamma, pi
    return (n - 2) * 2.0 * pi ** (n / 2.0) / gamma(n / 2.0)


def residue(obj, radii, n: int | None = None, samples: int | None = None
            ) -> ResidueReport:
    """Normalized flux residue on each circle/sphere in `radii`."""
    if n is None:
        n = _dimension(obj)
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    if radii.size == 0:
        raise DomainError("residue needs at least one radius")
    norm = _residue_normalizer(n)
    vals = np.array([raw_flux(obj, r, n, samples) / norm for r in radii])
    return ResidueReport(n, radii, vals)


# ----------------------------------------------------------------------
# asymptotic fit

@dataclass
class AsymptoticFit:
    a: np.ndarray
    c: float
    d: float
    rms_residual: float
    fit_window: tuple
    n: int


def _log_profile(pts, a, n):
    """phi(x) with coefficient d = (1-|a|^2)*Res in the far-field model."""
    x2 = np.einsum("kd,kd->k", pts, pts)
    ax = pts @ a
    D2 = x2 - ax * ax
    if np.any(D2 <= 0):
        raise FitError("fit points degenerate against the tilt direction")
    if n == 2:
        return 0.5 * np.log(D2)
    return -(D2 ** ((2.0 - n) / 2.0)) / (n - 2.0)


def _fit_samples_field(fld: ScalarField, window, rings, per_ring):
    g = fld.grid
    r_lo, r_hi = window
    radii = np.linspace(r_lo, r_hi, rings)
    fluxer = _FieldFlux(fld)
    pts, vals, grads, wts = [], [], [], []
    if g.n == 2:
        th = 2.0 * np.pi * np.arange(per_ring) / per_ring
        dirs = np.stack([np.cos(th), np.sin(th)], axis=-1)
        w = np.full(per_ring, 1.0 / per_ring)
    else:
        ph = np.linspace(0.0, np.pi, per_ring)
        dirs = np.stack([np.sin(ph), np.cos(ph)], axis=-1)
        w = np.sin(ph)
        w[0] = w[-1] = 0.0
        w /= w.sum()
    for r in radii:
        for k in range(dirs.shape[0]):
            x = r * dirs[k]
            pts.append(x)
            vals.append(interp(fld, x))
            grads.append(fluxer.grad(x))
            wts.append(w[k])
    return (np.array(pts), np.array(vals), np.array(grads), np.array(wts))


def _fit_samples_exact(ex: BoostedRadialSolution, window, rings, per_ring):
    r_lo, r_hi = window
    radii = np.linspace(r_lo, r_hi, rings)
    if ex.n == 2:
        th = 2.0 * np.pi * np.arange(per_ring) / per_ring
        dirs = np.stack([np.cos(th), np.sin(th)], axis=-1)
        w = np.full(per_ring, 1.0 / per_ring)
    else:
        # Fibonacci sphere: near-uniform, so plain averages estimate means
        k = np.arange(per_ring) + 0.5
        ph = np.arccos(1.0 - 2.0 * k / per_ring)
        th = np.pi * (1.0 + np.sqrt(5.0)) * k
        dirs = np.stack([np.sin(ph) * np.cos(th), np.sin(ph) * np.sin(th),
                         np.cos(ph)], axis=-1)
        w = np.full(per_ring, 1.0 / per_ring)
    pts, vals, grads, wts = [], [], [], []
    for r in radii:
        for k in range(dirs.shape[0]):
            x = r * dirs[k]
            v, g = boosted_value_and_gradient(ex, x)
            pts.append(x)
            vals.append(v)
            grads.append(g)
            wts.append(w[k])
    return (np.array(pts), np.array(vals), np.array(grads), np.array(wts))


def fit_asymptotics(obj, window=None, n: int | None = None, rings: int = 8,
                    per_ring: int | None = None) -> AsymptoticFit:
    """Two-stage far-field fit.

    Stage 1 estimates the tilt a as the (surface-measure) mean of Du over
    the fit window; stage 2 least-squares the residual u - a.x against
    {1, phi} for the constant c and amplitude d.  The default window is
    [R_out/8, R_out/2] for gridded fields.
    """
    if n is None:
        n = _dimension(obj)
    ex = _as_boosted(obj)
    if ex is None and not isinstance(obj, ScalarField):
        raise DomainError("fit_asymptotics needs a field or exact solution")

    if window is None:
        if isinstance(obj, ScalarField):
            window = (obj.grid.R_out / 8.0, obj.grid.R_out / 2.0)
        else:
            raise FitError("fit window is required for exact solutions")
    r_lo, r_hi = float(window[0]), float(window[1])
    if not (0 < r_lo < r_hi):
        raise FitError(f"fit window ({r_lo}, {r_hi}) must satisfy 0 < lo < hi")
    if r_hi <= 1.02 * r_lo:
        raise FitError(f"fit window ({r_lo}, {r_hi}) too narrow to separate "
                       "the constant from the decaying profile")
    if isinstance(obj, ScalarField):
        g = obj.grid
        if r_lo <= g.hole.max_radius or r_hi > g.R_out * (1 + 1e-12):
            raise FitError(
                f"fit window ({r_lo}, {r_hi}) must lie inside the annulus "
                f"({g.hole.max_radius}, {g.R_out})")

    if per_ring is None:
        per_ring = 4 * obj.grid.N_ang + 1 if isinstance(obj, ScalarField) \
            else 256
    if ex is not None:
        pts, vals, grads, wts = _fit_samples_exact(ex, (r_lo, r_hi), rings,
                                                   per_ring)
    else:
        pts, vals, grads, wts = _fit_samples_field(obj, (r_lo, r_hi), rings,
                                                   per_ring)

    nrings = rings
    wts = wts / nrings
    a = np.einsum("k,kd->d", wts, grads)
    if isinstance(obj, ScalarField) and obj.grid.n == 3:
        a = np.array([0.0, 0.0, a[1]])
        pts3 = np.zeros((pts.shape[0], 3))
        pts3[:, 0] = pts[:, 0]
        pts3[:, 2] = pts[:, 1]
        pts = pts3
    if np.linalg.norm(a) >= 1.0:
        raise FitError(f"fitted tilt |a| = {np.linalg.norm(a):.6f} >= 1 "
                       "(not spacelike)")

    phi = _log_profile(pts, a, n)
    if phi.max() - phi.min() < 1e-8:
        raise FitError("fit window too narrow: profile basis is constant")
    rhs = vals - pts @ a
    A = np.stack([np.ones_like(phi), phi], axis=-1)
    coef, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    resid = rhs - A @ coef
    return AsymptoticFit(a, float(coef[0]), float(coef[1]),
                         float(np.sqrt(np.mean(resid ** 2))), (r_lo, r_hi), n)


def check_residue_relation(fit: AsymptoticFit, res: ResidueReport) -> float:
    """|d - (1-|a|^2) * mean residue| (should vanish in the continuum)."""
    return float(abs(fit.d - (1.0 - fit.a @ fit.a) * res.mean))


def tilt_remainder_model(a, lam: float, x) -> float:
    """Second-order far-field term of the boosted log end (n = 2).

    After removing a.x + c + d*ln sqrt(|x|^2-(a.x)^2) from w_lam^a, the
    leading remainder is

        -(1-|a|^2) * lam * (a.x) * (m(lam) + lam*ln D) / D^2,
        D^2 = |x|^2 - (a.x)^2,

    which on the ray along a decays like ln r / r with coefficient
    -|a| * lam^2.
    """
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    ax = float(a @ x)
    D2 = float(x @ x) - ax * ax
    return -(1.0 - float(a @ a)) * lam * ax * \
        (m_const(lam) + lam * 0.5 * np.log(D2)) / D2


# ----------------------------------------------------------------------
# blowdown

@dataclass
class BlowdownSample:
    scale: float
    sup_deviation: float
    lipschitz_excess: float


def blowdown_sequence(obj, scales, n: int | None = None, a=None,
                      per_ring: int = 64, rings: int = 5) -> list:
    """Rescalings u_s(y) = u(s*y)/s sampled on the annulus 1 <= |y| <= 2.

    Reports, per scale, the sup distance to the plane a.y (tilt estimated
    from the largest scale when not given) and the excess over the
    weak-spacelike bound |u_s(y1)-u_s(y2)| <= |y1-y2| on sampled pairs.
    """
    if n is None:
        n = _dimension(obj)
    scales = sorted(float(s) for s in np.atleast_1d(scales))
    if not scales:
        raise DomainError("blowdown needs at least one scale")
    ex = _as_boosted(obj)
    if ex is not None:
        value = lambda x: boosted_eval(ex, x)
    else:
        value = lambda x: interp(obj, x)
        g = obj.grid
        for s in scales:
            if 2.0 * s > g.R_out * (1 + 1e-12) or s < g.hole.max_radius:
                raise DomainError(
                    f"scale {s}: annulus [{s}, {2 * s}] leaves the grid "
                    f"({g.hole.max_radius}, {g.R_out})")

    if n == 2:
        th = 2.0 * np.pi * np.arange(per_ring) / per_ring
        dirs = np.stack([np.cos(th), np.sin(th)], axis=-1)
    elif isinstance(obj, ScalarField):
        ph = np.linspace(0.0, np.pi, per_ring)
        dirs = np.stack([np.sin(ph), np.cos(ph)], axis=-1)
    else:
        k = np.arange(per_ring) + 0.5
        ph = np.arccos(1.0 - 2.0 * k / per_ring)
        th = np.pi * (1.0 + np.sqrt(5.0)) * k
        dirs = np.stack([np.sin(ph) * np.cos(th), np.sin(ph) * np.sin(th),
                         np.cos(ph)], axis=-1)
    ref = np.concatenate([r * dirs for r in np.linspace(1.0, 2.0, rings)])

    if a is None:
        if ex is not None:
            a = ex.a
        else:
            a = fit_asymptotics(obj).a
    a = np.asarray(a, dtype=float)
    if isinstance(obj, ScalarField) and n == 3:
        a_plane = np.array([a[0], a[2]]) if a.shape == (3,) else a
    else:
        a_plane = a

    rng = np.random.default_rng(20260814)
    out = []
    for s in scales:
        us = np.array([value(s * y) / s for y in ref])
        dev = float(np.max(np.abs(us - ref @ a_plane)))
        idx = rng.integers(0, ref.shape[0], size=(400, 2))
        ii, jj = idx[:, 0], idx[:, 1]
        keep = ii != jj
        ii, jj = ii[keep], jj[keep]
        dist = np.linalg.norm(ref[ii] - ref[jj], axis=1)
        excess = float(np.max(np.abs(us[ii] - us[jj]) / dist - 1.0))
        out.append(BlowdownSample(s, dev, excess))
    return out


# ----------------------------------------------------------------------
# second fundamental form

def second_ff_norm(fld: ScalarField) -> np.ndarray:
    """Nodal |II| of the spacelike graph of a gridded field.

    Differentiates the chord-based nodal gradient once more, symmetrizes
    the Hessian, and contracts with the inverse induced metric
    g^{ij} = delta_ij + u_i u_j / (1-|Du|^2):

        |II|^2 = tr((g^{-1} H)^2) / (1-|Du|^2).

    For n = 3 the azimuthal direction contributes an extra principal
    entry u_rho / rho (u_rhorho on the axis).
    """
    g = fld.grid
    G = gradient(fld)
    Hx = gradient(ScalarField(g, G[..., 0]))
    Hy = gradient(ScalarField(g, G[..., 1]))
    H = np.empty(g.shape + (2, 2))
    H[..., 0, 0] = Hx[..., 0]
    H[..., 1, 1] = Hy[..., 1]
    H[..., 0, 1] = H[..., 1, 0] = 0.5 * (Hx[..., 1] + Hy[..., 0])

    p2 = np.einsum("ijd,ijd->ij", G, G)
    q2 = 1.0 - p2
    if np.any(q2 <= 0.0):
        raise NonSpacelikeError("field is not strictly spacelike at a node")

    if g.n == 2:
        Du = G
        ginvH = _ginv_H(Du, H, q2)
        tr2 = np.einsum("ijab,ijba->ij", ginvH, ginvH)
        return np.sqrt(np.maximum(tr2 / q2, 0.0))

    # meridian: embed (rho, z) blocks into 3x3 with azimuthal entry
    rho = g.points[..., 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        azi = np.where(rho > 1e-12 * g.R_out, G[..., 0] / np.where(rho == 0, 1, rho),
                       Hx[..., 0])
    H3 = np.zeros(g.shape + (3, 3))
    H3[..., 0, 0] = H[..., 0, 0]
    H3[..., 0, 2] = H3[..., 2, 0] = H[..., 0, 1]
    H3[..., 2, 2] = H[..., 1, 1]
    H3[..., 1, 1] = azi
    Du3 = np.zeros(g.shape + (3,))
    Du3[..., 0] = G[..., 0]
    Du3[..., 2] = G[..., 1]
    ginvH = _ginv_H(Du3, H3, q2)
    tr2 = np.einsum("ijab,ijba->ij", ginvH, ginvH)
    return np.sqrt(np.maximum(tr2 / q2, 0.0))


def _ginv_H(Du, H, q2):
    dim = Du.shape[-1]
    eye = np.eye(dim)
    ginv = eye + np.einsum("ija,ijb->ijab", Du, Du) / q2[..., None, None]
    return np.einsum("ijab,ijbc->ijac", ginv, H)


# ----------------------------------------------------------------------
# Lipschitz extensions of hole data

def pairwise_lipschitz(points, values, npairs: int | None = None,
                       seed: int = 0) -> float:
    """Max |u_i - u_j| / |x_i - x_j| over point pairs (all pairs when the
    set is small, a seeded random subset otherwise)."""
    points = np.asarray(points, dtype=float)
    values = np.asarray(values, dtype=float)
    K = points.shape[0]
    if K < 2:
        return 0.0
    if npairs is None and K <= 1500:
        diff = np.abs(values[:, None] - values[None, :])
        dist = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=2)
        iu = np.triu_indices(K, 1)
        return float(np.max(diff[iu] / dist[iu]))
    rng = np.random.default_rng(seed)
    m = npairs or 200000
    ii = rng.integers(0, K, size=m)
    jj = rng.integers(0, K, size=m)
    keep = ii != jj
    ii, jj = ii[keep], jj[keep]
    dist = np.linalg.norm(points[ii] - points[jj], axis=1)
    return float(np.max(np.abs(values[ii] - values[jj]) / dist))


@dataclass
class InfConvExtension:
    """w(x) = min_b [ u(b) + m |x - b| ]: the largest m-Lipschitz function
    lying below the data; agrees with the data when it is m-Lipschitz."""

    points: np.ndarray
    values: np.ndarray
    m: float

    def evaluate(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(np.min(self.values
                            + self.m * np.linalg.norm(self.points - x, axis=1)))


def extend_infconv(points, values, m: float) -> InfConvExtension:
    """Spacelike (m < 1) Lipschitz extension of scattered boundary data."""
    points = np.asarray(points, dtype=float)
    values = np.asarray(values, dtype=float)
    if not (0 < m < 1):
        raise DomainError(f"extension slope m={m} must lie in (0, 1)")
    L = pairwise_lipschitz(points, values)
    if L >= m:
        raise DomainError(
            f"data has Lipschitz constant {L:.6f} >= m={m}; the extension "
            "would not interpolate")
    return InfConvExtension(points, values, float(m))


@dataclass
class RadialExtension:
    """Cone-type extension of circle data f(theta) pinned at the midrange:
    w(x) = mid + |x| (f(theta) - mid)."""

    angles: np.ndarray
    values: np.ndarray
    mid: float

    def evaluate(self, x) -> float:
        x = np.asarray(x, dtype=float)
        r = float(np.hypot(x[0], x[1]))
        if r == 0.0:
            return self.mid
        th = float(np.arctan2(x[1], x[0])) % (2 * np.pi)
        f = np.interp(th, np.concatenate([self.angles, [2 * np.pi]]),
                      np.concatenate([self.values, [self.values[0]]]))
        return self.mid + r * (f - self.mid)


def extend_radial(values) -> RadialExtension:
    """Extend unit-circle data radially; needs oscillation < 2 so the
    radial slope stays below 1."""
    values = np.atleast_1d(np.asarray(values, dtype=float))
    osc = float(values.max() - values.min())
    if osc >= 2.0:
        raise DomainError(
            f"circle data oscillation {osc:.6f} >= 2: no spacelike radial "
            "extension")
    K = values.size
    angles = 2.0 * np.pi * np.arange(K) / K
    mid = 0.5 * (float(values.max()) + float(values.min()))
    return RadialExtension(angles, values, mid)
