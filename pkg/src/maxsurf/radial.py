"""Exact radial solutions and their Lorentz boosts.

The rotationally symmetric exterior solutions

    w_lam(x) = int_0^{|x|} lam / sqrt(t^{2(n-1)} + lam^2) dt

are spacelike graphs solving div(Du/sqrt(1-|Du|^2)) = 0 away from the
origin; the integrand is the radial slope and satisfies the exact flux
identity  w'/sqrt(1-w'^2) = lam * r^{1-n}.

Far-field constants:

    n = 2:   w_lam(r) = m(lam) + lam*ln r + O(r^-2),
             m(lam)   = int_0^1 lam/sqrt(t^2+lam^2) dt
                      + int_1^oo (lam/sqrt(t^2+lam^2) - lam/t) dt
    n >= 3:  w_lam(r) = M(lam,n) - lam/(n-2) r^{2-n} + O(r^{4-3n}),
             M(lam,n) = int_0^oo lam/sqrt(t^{2(n-1)}+lam^2) dt
                      = sign(lam) |lam|^{1/(n-1)} M(1,n)

Boosting the graph of w_lam by L_a (|a| < 1) produces the tilted solution
w_lam^a with asymptotic plane a.x; it is evaluated pointwise by inverting
the boosted spatial coordinate with a monotone 1-D root-find (the forward
map has derivative >= (1-|a|)/sqrt(1-|a|^2) > 0 because |w'| < 1).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import DomainError, InvalidBoostError, RootFindError
from .lorentz import BoostParam

_QUAD_OPTS = dict(epsabs=1e-13, epsrel=1e-12, limit=200)


@dataclass(frozen=True)
class RadialSolution:
    """The radial solution w_lam in dimension n (lam = 0 is the zero graph)."""

    n: int
    lam: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 2:
            raise DomainError(f"dimension n={self.n} must be an integer >= 2")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "lam", float(self.lam))


@dataclass(frozen=True)
class BoostedRadialSolution:
    """w_lam^a: the graph of w_lam boosted by L_a."""

    base: RadialSolution
    a: np.ndarray
    boost: BoostParam = field(init=False, repr=False)

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        if a.shape != (self.base.n,):
            raise InvalidBoostError(
                f"boost velocity has shape {a.shape}, expected ({self.base.n},)")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "boost", BoostParam(a))

    @property
    def n(self) -> int:
        return self.base.n


def _quad(f, lo, hi):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        return integrate.quad(f, lo, hi, **_QUAD_OPTS)


def _slope(lam, n, t):
    return lam / np.sqrt(t ** (2 * (n - 1)) + lam * lam)


# prefix sums over the dyadic panels [0,2], [2,4], [4,8], ... per solution,
# so repeated evaluations (root-finds, barrier sweeps) cost one partial panel
_PANELS: dict = {}


def _panel_prefix(lam, n, k):
    """(value, error) of the integral over [0, 2^(k+1)]."""
    key = (lam, n)
    pref = _PANELS.setdefault(key, [])
    f = lambda t: _slope(lam, n, t)
    while len(pref) <= k:
        j = len(pref)
        lo = 0.0 if j == 0 else float(2 ** j)
        v, e = _quad(f, lo, float(2 ** (j + 1)))
        if j == 0:
            pref.append((v, e))
        else:
            pv, pe = pref[-1]
            pref.append((pv + v, pe + e))
    return pref[k]


def w_value_with_error(sol: RadialSolution, r: float) -> tuple[float, float]:
    """Quadrature value of w_lam(r) together with the error estimate."""
    r = float(r)
    if r < 0:
        raise DomainError(f"radius r={r} must be nonnegative")
    if sol.lam == 0.0 or r == 0.0:
        return 0.0, 0.0
    lam, n = sol.lam, sol.n
    f = lambda t: _slope(lam, n, t)
    if r <= 2.0:
        return _quad(f, 0.0, r)
    # dyadic panels keep the adaptive quadrature well conditioned for huge r
    k = int(np.floor(np.log2(r))) - 1          # r in (2^(k+1), 2^(k+2)]
    base, berr = _panel_prefix(lam, n, k)
    v, e = _quad(f, float(2 ** (k + 1)), r)
    return base + v, berr + e


def w_value(sol: RadialSolution, r: float) -> float:
    """w_lam(r) = int_0^r lam/sqrt(t^{2(n-1)}+lam^2) dt, odd in lam."""
    return w_value_with_error(sol, r)[0]


def w_slope(sol: RadialSolution, r: float) -> float:
    """Radial slope w'_lam(r); strictly inside (-1, 1) for r > 0."""
    r = float(r)
    if sol.lam == 0.0:
        return 0.0
    if r <= 0:
        raise DomainError(f"slope needs r > 0 (light-cone vertex at r=0); got r={r}")
    return float(_slope(sol.lam, sol.n, r))


def flux_density(sol: RadialSolution, r: float) -> float:
    """Normalized radial flux w'/sqrt(1-w'^2) = lam * r^{1-n}, exactly."""
    r = float(r)
    if r <= 0:
        raise DomainError(f"flux density needs r > 0; got r={r}")
    return sol.lam * r ** (1 - sol.n)


@lru_cache(maxsize=None)
def _m_const_cached(lam: float) -> tuple[float, float]:
    head, e1 = _quad(lambda t: lam / np.sqrt(t * t + lam * lam), 0.0, 1.0)
    # tail int_1^oo (lam/sqrt(t^2+lam^2) - lam/t) dt under t -> 1/s
    def tail(s):
        if s == 0.0:
            return 0.0
        return lam * (1.0 / np.sqrt(1.0 + (lam * s) ** 2) - 1.0) / s

    tv, e2 = _quad(tail, 0.0, 1.0)
    return head + tv, e1 + e2


def m_const_with_error(lam: float) -> tuple[float, float]:
    lam = float(lam)
    if lam == 0.0:
        raise DomainError("m(0) is undefined: the zero solution has no log term")
    return _m_const_cached(lam)


def m_const(lam: float) -> float:
    """The n=2 additive constant m(lam) with w_lam(r) - lam*ln r -> m(lam)."""
    return m_const_with_error(lam)[0]


@lru_cache(maxsize=None)
def _M_const_cached(lam: float, n: int) -> tuple[float, float]:
    head, e1 = _quad(lambda t: _slope(lam, n, t), 0.0, 1.0)
    # tail int_1^oo under t -> 1/s:  lam * s^{n-3} / sqrt(1 + lam^2 s^{2(n-1)})
    p = 2 * (n - 1)
    tv, e2 = _quad(lambda s: lam * s ** (n - 3) / np.sqrt(1.0 + lam * lam * s ** p),
                   0.0, 1.0)
    return head + tv, e1 + e2


def M_const_with_error(lam: float, n: int) -> tuple[float, float]:
    lam = float(lam)
    if int(n) != n or n < 3:
        raise DomainError(f"M(lam,n) needs integer n >= 3; got n={n}")
    if lam == 0.0:
        return 0.0, 0.0
    return _M_const_cached(lam, int(n))


def M_const(lam: float, n: int) -> float:
    """Total height M(lam,n) of w_lam for n >= 3 (finite: the graph flattens)."""
    return M_const_with_error(lam, n)[0]


# ----------------------------------------------------------------------
# boosted evaluation

def _axis_coords(sol: BoostedRadialSolution, x):
    """Rotate x into the frame whose last axis is the boost direction."""
    x = np.asarray(x, dtype=float)
    if x.shape != (sol.n,):
        raise DomainError(f"point has shape {x.shape}, expected ({sol.n},)")
    if sol.boost.speed == 0.0:
        return x
    return sol.boost.rotation.T @ x


def _tilde_axis_coordinate(sol: BoostedRadialSolution, zeta_par: float,
                           rho_perp: float) -> float:
    """Solve (s + eta*w(sqrt(rho^2+s^2)))/sqrt(1-eta^2) = zeta_par for s.

    The left side is strictly increasing in s (|w'| < 1), so bisection from
    the weakly-spacelike bracket |w| <= |x| always converges; a Newton
    polish finishes to residual ~1e-12 (scaled at large radii).
    """
    eta = sol.boost.speed
    sq = np.sqrt(1.0 - eta * eta)
    base = sol.base

    def F(s):
        return (s + eta * w_value(base, float(np.hypot(rho_perp, s)))) / sq - zeta_par

    # bracket: |s| <= (|zeta_par| sq + eta rho)/(1 - eta) + margin
    B = (abs(zeta_par) * sq + eta * abs(rho_perp)) / (1.0 - eta) + 1.0
    lo, hi = -B, B
    flo = F(lo)
    if flo > 0 or F(hi) < 0:  # pragma: no cover - bracket is analytic
        raise RootFindError("boosted_eval bracket failed")
    while hi - lo > 1e-8:
        mid = 0.5 * (lo + hi)
        if F(mid) <= 0.0:
            lo = mid
        else:
            hi = mid
    s = 0.5 * (lo + hi)
    tol = 1e-12 * (1.0 + abs(zeta_par) + abs(rho_perp))
    for _ in range(60):
        r = float(np.hypot(rho_perp, s))
        fs = F(s)
        if abs(fs) <= tol:
            return s
        slope = 0.0 if r == 0.0 else w_slope(base, r) * (s / r)
        ds = fs * sq / (1.0 + eta * slope)
        s -= ds
    if abs(F(s)) <= 100 * tol:
        return s
    raise RootFindError(f"boosted_eval polish stalled at residual {F(s):.3e}")


def _tilde_point(sol: BoostedRadialSolution, x):
    """Pre-image coordinates (in the axis frame) of the spatial point x."""
    zeta = _axis_coords(sol, x)
    if sol.boost.speed == 0.0:
        return zeta
    rho_perp = float(np.linalg.norm(zeta[:-1]))
    s = _tilde_axis_coordinate(sol, float(zeta[-1]), rho_perp)
    out = zeta.copy()
    out[-1] = s
    return out


def boosted_eval(sol: BoostedRadialSolution, x) -> float:
    """Value of w_lam^a at x: the height of L_a(graph w_lam) over x."""
    x = np.asarray(x, dtype=float)
    if np.all(x == 0.0):
        return 0.0
    if sol.boost.speed == 0.0:
        return w_value(sol.base, float(np.linalg.norm(x)))
    eta = sol.boost.speed
    sq = np.sqrt(1.0 - eta * eta)
    xt = _tilde_point(sol, x)
    wt = w_value(sol.base, float(np.linalg.norm(xt)))
    return float((eta * xt[-1] + wt) / sq)


def _gradient_from_tilde(sol: BoostedRadialSolution, xt) -> np.ndarray:
    """Gradient transform given the pre-image point in the axis frame.

    With p~ = Dw at the pre-image and eta = |a| along the axis,
    p_par = (eta + p~_par)/(1 + eta p~_par), p_perp = sqrt(1-eta^2) p~_perp
    /(1 + eta p~_par); |p| < 1 is preserved.
    """
    eta = sol.boost.speed
    rt = float(np.linalg.norm(xt))
    pt = np.zeros(sol.n) if rt == 0.0 or sol.base.lam == 0.0 else \
        w_slope(sol.base, rt) * xt / rt
    sq = np.sqrt(1.0 - eta * eta)
    denom = 1.0 + eta * pt[-1]
    p = np.empty(sol.n)
    p[:-1] = sq * pt[:-1] / denom
    p[-1] = (eta + pt[-1]) / denom
    if eta > 0.0:
        p = sol.boost.rotation @ p
    return p


def boosted_gradient(sol: BoostedRadialSolution, x) -> np.ndarray:
    """Exact gradient Du of w_lam^a at x (velocity-addition transform)."""
    x = np.asarray(x, dtype=float)
    eta = sol.boost.speed
    if eta == 0.0:
        r = float(np.linalg.norm(x))
        if r == 0.0 or sol.base.lam == 0.0:
            return np.zeros(sol.n)
        return w_slope(sol.base, r) * x / r
    return _gradient_from_tilde(sol, _tilde_point(sol, x))


def boosted_value_and_gradient(sol: BoostedRadialSolution, x
                               ) -> tuple[float, np.ndarray]:
    """(w_lam^a(x), Du(x)) from a single pre-image root-find."""
    x = np.asarray(x, dtype=float)
    eta = sol.boost.speed
    if eta == 0.0:
        return boosted_eval(sol, x), boosted_gradient(sol, x)
    xt = _tilde_point(sol, x)
    wt = w_value(sol.base, float(np.linalg.norm(xt)))
    val = float((eta * xt[-1] + wt) / np.sqrt(1.0 - eta * eta))
    return val, _gradient_from_tilde(sol, xt)


def boosted_flux_vector(sol: BoostedRadialSolution, x) -> np.ndarray:
    """The flux field Du/sqrt(1-|Du|^2) at x, computed without cancellation.

    (v, tau) = (Du, 1)/sqrt(1-|Du|^2) transforms as a Lorentz vector, so the
    boosted flux is the axis boost of the radial one:
        v~ = lam |x~|^{-n} x~,  tau~ = sqrt(|x~|^{2(n-1)}+lam^2)/|x~|^{n-1}.
    """
    x = np.asarray(x, dtype=float)
    eta = sol.boost.speed
    lam, n = sol.base.lam, sol.base.n
    if eta == 0.0:
        r = float(np.linalg.norm(x))
        if r == 0.0:
            raise DomainError("flux vector undefined at the puncture x=0")
        return lam * r ** (-n) * x
    xt = _tilde_point(sol, x)
    rt = float(np.linalg.norm(xt))
    if rt == 0.0:
        raise DomainError("flux vector undefined at the puncture x=0")
    vt = lam * rt ** (-n) * xt
    taut = np.sqrt(rt ** (2 * (n - 1)) + lam * lam) / rt ** (n - 1)
    sq = np.sqrt(1.0 - eta * eta)
    v = np.empty(n)
    v[:-1] = vt[:-1]
    v[-1] = (vt[-1] + eta * taut) / sq
    return sol.boost.rotation @ v


def radial_curvature(sol: RadialSolution, r: float) -> float:
    """|II| of the graph of w_lam at radius r: sqrt(n(n-1))*|lam|/r^n."""
    r = float(r)
    if r <= 0:
        raise DomainError(f"curvature needs r > 0; got r={r}")
    n = sol.n
    return np.sqrt(n * (n - 1)) * abs(sol.lam) / r ** n


def boosted_curvature(sol: BoostedRadialSolution, x) -> float:
    """|II| of w_lam^a at x.

    The second fundamental form norm is invariant under ambient Lorentz
    isometries, so it equals the radial value at the pre-image point.
    """
    xt = _tilde_point(sol, np.asarray(x, dtype=float))
    return radial_curvature(sol.base, float(np.linalg.norm(xt)))
