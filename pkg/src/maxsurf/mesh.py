"""Structured annular grids, fields, quadrature, and interpolation.

The computational domain is the region between a hole boundary and an
outer circle of radius R_out.  Grids are tensor products of a graded
radial coordinate s in [0,1] and an angular coordinate:

    n = 2:  full annulus; angle theta in [0, 2pi), periodic, N_ang columns,
            point = r (cos theta, sin theta)
    n = 3:  meridian half-annulus for axisymmetric fields; angle phi in
            [0, pi] inclusive, N_ang+1 columns, point = r (sin phi, cos phi)
            i.e. (cylindrical radius, z); volume weight 2*pi*x[0]

Radial nodes follow s_i = (g^i - 1)/(g^N_r - 1) for grading g > 1 (uniform
for g = 1) and the physical radius along the ray at angle t is

    r(s, t) = rho(t) + (R_out - rho(t)) * s

where rho is the hole radius function (constant for a circular hole,
rho0*(1 + eps*cos(k*theta)) for a star-shaped one).
"""

from __future__ import annotations

import io
import json
import os
import tempfile
from dataclasses import dataclass, field

import numpy as np

from .errors import GridConstructionError, OutOfDomainError

_FMT = "%.17g"


@dataclass(frozen=True)
class HoleSpec:
    """Inner boundary shape: a circle or a trigonometric star.

    kind   : "circle" or "star"
    radius : rho0 > 0
    eps    : star amplitude, 0 <= eps < 1 (ignored for circles)
    k      : star wavenumber, integer >= 1 (ignored for circles)
    """

    kind: str = "circle"
    radius: float = 1.0
    eps: float = 0.0
    k: int = 5

    def __post_init__(self):
        if self.kind not in ("circle", "star"):
            raise GridConstructionError(
                f"hole kind={self.kind!r} must be 'circle' or 'star'")
        if not self.radius > 0:
            raise GridConstructionError(
                f"hole radius={self.radius} must be positive")
        if self.kind == "star":
            if not (0 <= self.eps < 1):
                raise GridConstructionError(
                    f"star eps={self.eps} must lie in [0, 1)")
            if int(self.k) != self.k or self.k < 1:
                raise GridConstructionError(
                    f"star wavenumber k={self.k} must be a positive integer")

    def rho(self, angle):
        """Hole radius at the given angle(s)."""
        angle = np.asarray(angle, dtype=float)
        if self.kind == "circle":
            return np.broadcast_to(float(self.radius), angle.shape).copy()
        return self.radius * (1.0 + self.eps * np.cos(self.k * angle))

    @property
    def max_radius(self) -> float:
        return self.radius if self.kind == "circle" else \
            self.radius * (1.0 + self.eps)

    def to_json(self) -> dict:
        if self.kind == "circle":
            return {"kind": "circle", "radius": self.radius}
        return {"kind": "star", "radius": self.radius,
                "eps": self.eps, "k": int(self.k)}

    @staticmethod
    def from_json(d: dict) -> "HoleSpec":
        if d.get("kind") == "star":
            return HoleSpec("star", float(d["radius"]),
                            float(d.get("eps", 0.0)), int(d.get("k", 5)))
        return HoleSpec("circle", float(d["radius"]))


@dataclass(frozen=True)
class Grid:
    """A structured annular grid; construct with build_grid."""

    n: int
    hole: HoleSpec
    R_out: float
    N_r: int
    N_ang: int
    grading: float
    angles: np.ndarray = field(repr=False)      # (N_A,)
    s_nodes: np.ndarray = field(repr=False)     # (N_r+1,)
    radii: np.ndarray = field(repr=False)       # (N_r+1, N_A)
    points: np.ndarray = field(repr=False)      # (N_r+1, N_A, 2)

    @property
    def periodic(self) -> bool:
        return self.n == 2

    @property
    def N_A(self) -> int:
        return self.angles.size

    @property
    def shape(self) -> tuple[int, int]:
        return (self.N_r + 1, self.N_A)

    @property
    def num_nodes(self) -> int:
        return (self.N_r + 1) * self.N_A

    def flat_index(self, i, j):
        return np.asarray(i) * self.N_A + np.asarray(j)

    def header(self) -> dict:
        return {"n": self.n, "hole": self.hole.to_json(), "R_out": self.R_out,
                "N_r": self.N_r, "N_ang": self.N_ang, "grading": self.grading}


def build_grid(n: int, hole: HoleSpec, R_out: float, N_r: int, N_ang: int,
               grading: float = 1.0) -> Grid:
    """Construct the tensor grid; raises GridConstructionError naming the
    first offending parameter."""
    if n not in (2, 3):
        raise GridConstructionError(f"n={n} must be 2 or 3")
    if not isinstance(hole, HoleSpec):
        hole = HoleSpec(**hole) if isinstance(hole, dict) else \
            HoleSpec("circle", float(hole))
    if n == 3 and hole.kind != "circle":
        raise GridConstructionError(
            "hole kind='star' is only available for n=2 (axisymmetry)")
    if not R_out > hole.max_radius:
        raise GridConstructionError(
            f"R_out={R_out} must exceed the hole radius {hole.max_radius}")
    if int(N_r) != N_r or N_r < 2:
        raise GridConstructionError(f"N_r={N_r} must be an integer >= 2")
    if int(N_ang) != N_ang or N_ang < 4:
        raise GridConstructionError(f"N_ang={N_ang} must be an integer >= 4")
    if not grading >= 1.0:
        raise GridConstructionError(f"grading={grading} must be >= 1")
    N_r, N_ang = int(N_r), int(N_ang)

    if n == 2:
        angles = 2.0 * np.pi * np.arange(N_ang) / N_ang
    else:
        angles = np.pi * np.arange(N_ang + 1) / N_ang
    if grading == 1.0:
        s = np.arange(N_r + 1) / N_r
    else:
        s = (grading ** np.arange(N_r + 1) - 1.0) / (grading ** N_r - 1.0)
    rho = hole.rho(angles)
    radii = rho[None, :] + (R_out - rho)[None, :] * s[:, None]

    if n == 2:
        direction = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    else:
        direction = np.stack([np.sin(angles), np.cos(angles)], axis=-1)
    points = radii[:, :, None] * direction[None, :, :]
    return Grid(n, hole, float(R_out), N_r, N_ang, float(grading),
                angles, s, radii, points)


@dataclass
class ScalarField:
    """Nodal values on a Grid, stored as an array of shape grid.shape."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != self.grid.shape:
            raise GridConstructionError(
                f"values shape {self.values.shape} does not match grid "
                f"shape {self.grid.shape}")

    def copy(self) -> "ScalarField":
        return ScalarField(self.grid, self.values.copy())


def sample(grid: Grid, fn) -> ScalarField:
    """Evaluate fn(point) at every node; fn takes a length-2 array."""
    vals = np.apply_along_axis(lambda p: float(fn(p)), 2, grid.points)
    return ScalarField(grid, vals)


def inner_nodes(grid: Grid) -> np.ndarray:
    return grid.flat_index(0, np.arange(grid.N_A))


def outer_nodes(grid: Grid) -> np.ndarray:
    return grid.flat_index(grid.N_r, np.arange(grid.N_A))


# ----------------------------------------------------------------------
# gradient (chord differences, exact on affine fields)

def _radial_derivative(radii, values):
    """Nonuniform 3-point derivative of values(r) column-wise along rays."""
    r, u = radii, values
    out = np.empty_like(u)
    h1 = r[1:-1] - r[:-2]
    h2 = r[2:] - r[1:-1]
    out[1:-1] = (-h2 / (h1 * (h1 + h2)) * u[:-2]
                 + (h2 - h1) / (h1 * h2) * u[1:-1]
                 + h1 / (h2 * (h1 + h2)) * u[2:])
    ha, hb = r[1] - r[0], r[2] - r[1]
    out[0] = (-(2 * ha + hb) / (ha * (ha + hb)) * u[0]
              + (ha + hb) / (ha * hb) * u[1]
              - ha / (hb * (ha + hb)) * u[2])
    ha, hb = r[-2] - r[-3], r[-1] - r[-2]
    out[-1] = (hb / (ha * (ha + hb)) * u[-3]
               - (ha + hb) / (ha * hb) * u[-2]
               + (2 * hb + ha) / (hb * (ha + hb)) * u[-1])
    return out


def gradient(fld: ScalarField) -> np.ndarray:
    """Cartesian nodal gradient, shape (N_r+1, N_A, 2).

    Each node pairs the derivative along its (straight) ray with a chord
    difference to the angular neighbours and solves the resulting 2x2
    system; both relations hold exactly for affine fields, so affine
    gradients are reproduced to rounding.
    """
    g = fld.grid
    u = fld.values
    pts = g.points

    dr = _radial_derivative(g.radii, u)
    ray = np.where(g.radii[:, :, None] > 0, pts / g.radii[:, :, None], 0.0)

    if g.periodic:
        chord = np.roll(pts, -1, axis=1) - np.roll(pts, 1, axis=1)
        dv = np.roll(u, -1, axis=1) - np.roll(u, 1, axis=1)
    else:
        chord = np.empty_like(pts)
        dv = np.empty_like(u)
        chord[:, 1:-1] = pts[:, 2:] - pts[:, :-2]
        dv[:, 1:-1] = u[:, 2:] - u[:, :-2]
        chord[:, 0] = pts[:, 1] - pts[:, 0]
        dv[:, 0] = u[:, 1] - u[:, 0]
        chord[:, -1] = pts[:, -1] - pts[:, -2]
        dv[:, -1] = u[:, -1] - u[:, -2]

    # solve [ray; chord] grad = [dr; dv] at every node
    a, b = ray[..., 0], ray[..., 1]
    c, d = chord[..., 0], chord[..., 1]
    det = a * d - b * c
    if np.any(np.abs(det) < 1e-300):
        raise GridConstructionError("degenerate gradient stencil (det ~ 0)")
    gx = (d * dr - b * dv) / det
    gy = (a * dv - c * dr) / det
    return np.stack([gx, gy], axis=-1)


# ----------------------------------------------------------------------
# interpolation in the (s, angle) parameter plane

def _locate_angle(grid: Grid, x) -> tuple[int, float, float]:
    if grid.n == 2:
        theta = float(np.arctan2(x[1], x[0])) % (2.0 * np.pi)
        dth = 2.0 * np.pi / grid.N_ang
        jf = theta / dth
        j0 = int(np.floor(jf)) % grid.N_ang
        return j0, jf - np.floor(jf), theta
    if x[0] < -1e-12 * grid.R_out:
        raise OutOfDomainError(
            f"point {tuple(x)} has negative cylindrical radius")
    phi = float(np.arctan2(max(x[0], 0.0), x[1]))
    dph = np.pi / grid.N_ang
    jf = phi / dph
    j0 = min(int(np.floor(jf)), grid.N_ang - 1)
    return j0, jf - j0, phi


def interp(fld: ScalarField, x) -> float:
    """Bilinear interpolation in (s, angle); exact at nodes.

    Raises OutOfDomainError for points outside the annulus (with a small
    relative tolerance at the boundaries).
    """
    g = fld.grid
    x = np.asarray(x, dtype=float)
    if x.shape != (2,):
        raise OutOfDomainError(f"point has shape {x.shape}, expected (2,)")
    j0, tj, angle = _locate_angle(g, x)
    r = float(np.hypot(x[0], x[1]))
    rho = float(g.hole.rho(angle))
    s = (r - rho) / (g.R_out - rho)
    tol = 1e-9
    if s < -tol or s > 1.0 + tol:
        raise OutOfDomainError(
            f"point {tuple(x)} at radius {r:.6g} lies outside "
            f"[{rho:.6g}, {g.R_out:.6g}]")
    s = min(max(s, 0.0), 1.0)
    i0 = int(np.searchsorted(g.s_nodes, s, side="right")) - 1
    i0 = min(max(i0, 0), g.N_r - 1)
    ds = g.s_nodes[i0 + 1] - g.s_nodes[i0]
    ti = (s - g.s_nodes[i0]) / ds
    j1 = (j0 + 1) % g.N_A if g.periodic else j0 + 1
    u = fld.values
    return float((1 - ti) * (1 - tj) * u[i0, j0] + (1 - ti) * tj * u[i0, j1]
                 + ti * (1 - tj) * u[i0 + 1, j0] + ti * tj * u[i0 + 1, j1])


# ----------------------------------------------------------------------
# element quadrature (isoparametric bilinear quads, 2x2 Gauss)

_GP = np.array([-1.0, 1.0]) / np.sqrt(3.0)
_REF_PTS = np.array([(-1, -1), (1, -1), (1, 1), (-1, 1)], dtype=float)


def _shape_grad(xi, eta):
    """Values and reference gradients of the 4 bilinear shape functions."""
    sx, sy = _REF_PTS[:, 0], _REF_PTS[:, 1]
    N = 0.25 * (1 + sx * xi) * (1 + sy * eta)
    dN = np.stack([0.25 * sx * (1 + sy * eta),
                   0.25 * sy * (1 + sx * xi)], axis=-1)
    return N, dN


@dataclass(frozen=True)
class ElementQuadrature:
    """Assembled geometry: connectivity plus per-Gauss-point data.

    conn     : (NE, 4) flat node indices, counter-clockwise
    gauss_x  : (NE, 4, 2) physical Gauss point coordinates
    weights  : (NE, 4) quadrature weight * |det J| * measure factor
    grad     : (NE, 4, 4, 2) physical shape gradients [elem, gp, node, dim]
    """

    conn: np.ndarray
    gauss_x: np.ndarray
    weights: np.ndarray
    grad: np.ndarray


def element_quadrature(grid: Grid) -> ElementQuadrature:
    NR, NA, NE_ang = grid.N_r, grid.N_A, grid.N_ang
    i = np.repeat(np.arange(NR), NE_ang)
    j = np.tile(np.arange(NE_ang), NR)
    j1 = (j + 1) % NA if grid.periodic else j + 1
    conn = np.stack([grid.flat_index(i, j), grid.flat_index(i + 1, j),
                     grid.flat_index(i + 1, j1), grid.flat_index(i, j1)],
                    axis=-1)
    xy = grid.points.reshape(-1, 2)[conn]          # (NE, 4, 2)

    NEl = conn.shape[0]
    gauss_x = np.empty((NEl, 4, 2))
    weights = np.empty((NEl, 4))
    grad = np.empty((NEl, 4, 4, 2))
    gp = 0
    for eta in _GP:
        for xi in _GP:
            N, dN = _shape_grad(xi, eta)
            X = np.einsum("k,ekd->ed", N, xy)
            J = np.einsum("ekd,kr->edr", xy, dN)   # d: phys dim, r: ref dim
            det = J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0]
            if np.any(np.abs(det) < 1e-14):
                raise GridConstructionError(
                    "degenerate element (Jacobian ~ 0); check hole/R_out/"
                    "grading parameters")
            inv = np.empty_like(J)
            inv[:, 0, 0] = J[:, 1, 1]
            inv[:, 1, 1] = J[:, 0, 0]
            inv[:, 0, 1] = -J[:, 0, 1]
            inv[:, 1, 0] = -J[:, 1, 0]
            inv /= det[:, None, None]
            g_phys = np.einsum("kr,edr->ekd", dN, np.swapaxes(inv, 1, 2))
            w = np.abs(det)
            if grid.n == 3:
                w = w * 2.0 * np.pi * X[:, 0]
            gauss_x[:, gp] = X
            weights[:, gp] = w
            grad[:, gp] = g_phys
            gp += 1
    return ElementQuadrature(conn, gauss_x, weights, grad)


def domain_measure(grid: Grid, quad: ElementQuadrature | None = None) -> float:
    """Total measure (area for n=2, solid-of-revolution volume for n=3)."""
    if quad is None:
        quad = element_quadrature(grid)
    return float(quad.weights.sum())


def max_cell_diameter(grid: Grid) -> float:
    pts = grid.points
    if grid.periodic:
        d_ang = np.linalg.norm(np.roll(pts, -1, axis=1) - pts, axis=-1)
    else:
        d_ang = np.linalg.norm(pts[:, 1:] - pts[:, :-1], axis=-1)
    d_rad = np.linalg.norm(pts[1:] - pts[:-1], axis=-1)
    return float(max(d_ang.max(), d_rad.max()))


# ----------------------------------------------------------------------
# CSV persistence (one row per node, JSON header comment)

def save_field(fld: ScalarField, path: str) -> None:
    """Write `r,angle,value` rows after a `# {json}` header; atomic."""
    g = fld.grid
    buf = io.StringIO()
    buf.write("# " + json.dumps(g.header(), sort_keys=True) + "\n")
    buf.write("r,angle,value\n")
    for i in range(g.N_r + 1):
        for j in range(g.N_A):
            buf.write(f"{g.radii[i, j]:.17g},{g.angles[j]:.17g},"
                      f"{fld.values[i, j]:.17g}\n")
    _atomic_write(path, buf.getvalue())


def load_field(path: str) -> ScalarField:
    with open(path, "r") as fh:
        first = fh.readline()
        if not first.startswith("#"):
            raise GridConstructionError(
                f"{path}: missing JSON header comment line")
        hdr = json.loads(first[1:].strip())
        body = fh.read()
    grid = build_grid(hdr["n"], HoleSpec.from_json(hdr["hole"]), hdr["R_out"],
                      hdr["N_r"], hdr["N_ang"], hdr.get("grading", 1.0))
    rows = np.loadtxt(io.StringIO(body), delimiter=",", skiprows=1, ndmin=2)
    if rows.shape[0] != grid.num_nodes:
        raise GridConstructionError(
            f"{path}: {rows.shape[0]} rows, expected {grid.num_nodes}")
    vals = rows[:, 2].reshape(grid.shape)
    return ScalarField(grid, vals)


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
