"""Lorentz boosts of R^{n+1} with the quadratic form <X,X> = |x|^2 - t^2.

The axis boost with speed kappa in (-1,1) acts on (x', x_n, t) as

    L_kappa: (x', x_n, t) |-> (x', (x_n + kappa*t)/sqrt(1-kappa^2),
                                   (kappa*x_n + t)/sqrt(1-kappa^2)),

a hyperbolic rotation of the (x_n, t) plane.  The boost in an arbitrary
direction a (|a| < 1) conjugates the axis boost by a spatial rotation T_a
sending e_n to a/|a|:  L_a = T_a L_{|a|} T_a^{-1}, with T_0 = id.

All maps preserve <X,X> and send the horizontal plane {t = T} to the tilted
plane {t = sqrt(1-kappa^2) T + kappa x_n}.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidBoostError


@dataclass(frozen=True)
class SpacetimePoint:
    """A point X = (x, t) with spatial part x in R^n and time t."""

    x: np.ndarray
    t: float

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "t", float(self.t))

    @property
    def n(self) -> int:
        return self.x.shape[-1]

    def quadratic_form(self) -> float:
        """<X,X> = |x|^2 - t^2; sign classifies spacelike/lightlike/timelike."""
        return float(np.dot(self.x, self.x) - self.t * self.t)


@dataclass(frozen=True)
class BoostParam:
    """Velocity vector a in the open unit ball of R^n."""

    a: np.ndarray
    rotation: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        a = np.asarray(self.a, dtype=float)
        object.__setattr__(self, "a", a)
        if not np.all(np.isfinite(a)):
            raise InvalidBoostError("boost velocity must be finite")
        if np.linalg.norm(a) >= 1.0:
            raise InvalidBoostError(f"boost speed |a|={np.linalg.norm(a):.6g} must be < 1")
        if np.linalg.norm(a) == 0.0:
            object.__setattr__(self, "rotation", np.eye(a.shape[0]))
        else:
            object.__setattr__(self, "rotation", rotation_to_axis(a))

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.a))

    @property
    def n(self) -> int:
        return self.a.shape[0]


def _check_speed(kappa: float) -> float:
    kappa = float(kappa)
    if not np.isfinite(kappa) or abs(kappa) >= 1.0:
        raise InvalidBoostError(f"boost speed {kappa!r} must lie in (-1, 1)")
    return kappa


def boost_axis_arrays(kappa, xn, t):
    """Axis boost applied to coordinate arrays (x_n, t) -> (x_n', t').

    Vectorized core shared by the point-level API and the graph samplers.
    """
    kappa = _check_speed(kappa)
    gamma = 1.0 / np.sqrt(1.0 - kappa * kappa)
    xn = np.asarray(xn, dtype=float)
    t = np.asarray(t, dtype=float)
    return (xn + kappa * t) * gamma, (kappa * xn + t) * gamma


def boost_axis(kappa: float, X: SpacetimePoint) -> SpacetimePoint:
    """Apply the axis boost L_kappa to a spacetime point.

    Mixes the last spatial coordinate with time; all other coordinates are
    untouched.  Raises InvalidBoostError for |kappa| >= 1.
    """
    xn, t = boost_axis_arrays(kappa, X.x[-1], X.t)
    x = X.x.copy()
    x[-1] = xn
    return SpacetimePoint(x, float(t))


def rotation_to_axis(a) -> np.ndarray:
    """Orthogonal T with T e_n = a/|a|, built from a Householder reflection.

    Uses the reflection through w = e_n + s*v with s = sign(v_n) (the larger
    of the two candidate bisectors, so the construction never cancels) and a
    global sign fix; deterministic and orthogonal to machine precision.
    Raises InvalidBoostError for the zero vector: the a = 0 case is the
    caller's identity by convention.
    """
    a = np.asarray(a, dtype=float)
    norm = np.linalg.norm(a)
    if norm == 0.0:
        raise InvalidBoostError("rotation_to_axis needs a nonzero direction")
    n = a.shape[0]
    v = a / norm
    s = 1.0 if v[-1] >= 0.0 else -1.0
    w = s * v.copy()
    w[-1] += 1.0
    # reflection H = I - 2 w w^T/|w|^2 sends e_n to -s v; -s H sends e_n to v
    H = np.eye(n) - (2.0 / np.dot(w, w)) * np.outer(w, w)
    return -s * H


def boost_graph_point(a, P: SpacetimePoint) -> SpacetimePoint:
    """Apply the general boost L_a = T_a L_{|a|} T_a^{-1} to a point.

    The rotation acts on the spatial part only; time is mixed with the
    a-direction component.  a may be a BoostParam or any array-like with
    |a| < 1; a = 0 is the identity.
    """
    if not isinstance(a, BoostParam):
        a = BoostParam(np.asarray(a, dtype=float))
    if a.speed == 0.0:
        return SpacetimePoint(P.x.copy(), P.t)
    T = a.rotation
    xi = T.T @ P.x
    xn, t = boost_axis_arrays(a.speed, xi[-1], P.t)
    xi[-1] = xn
    return SpacetimePoint(T @ xi, float(t))
