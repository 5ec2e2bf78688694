"""Report figures rendered next to the CSV outputs.

All plots use the Agg backend so runs work headless; every function
writes a single PNG and returns its path.
"""

from __future__ import annotations

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .mesh import ScalarField  # noqa: E402


def _save(fig, path):
    fig.savefig(path, dpi=130, bbox_inches="tight")
    plt.close(fig)
    return path


def field_figure(fld: ScalarField, path: str, title: str = "field"):
    g = fld.grid
    pts = g.points
    if g.periodic:  # close the seam for plotting
        X = np.concatenate([pts[..., 0], pts[:, :1, 0]], axis=1)
        Y = np.concatenate([pts[..., 1], pts[:, :1, 1]], axis=1)
        V = np.concatenate([fld.values, fld.values[:, :1]], axis=1)
    else:
        X, Y, V = pts[..., 0], pts[..., 1], fld.values
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    pc = ax.pcolormesh(X, Y, V, shading="gouraud", cmap="viridis")
    fig.colorbar(pc, ax=ax, label="u")
    ax.set_aspect("equal")
    ax.set_xlabel("x" if g.n == 2 else "cylindrical radius")
    ax.set_ylabel("y" if g.n == 2 else "z")
    ax.set_title(title)
    return _save(fig, path)


def trace_figure(records, path: str):
    R = [t.R for t in records]
    d = [t.sup_diff for t in records]
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.semilogy(R[1:], d[1:], "o-", color="tab:blue")
    ax.set_xlabel("outer radius R")
    ax.set_ylabel("monitor sup difference")
    ax.set_title("continuation convergence")
    ax.grid(True, which="both", alpha=0.3)
    return _save(fig, path)


def constants_figure(rows, path: str):
    lam = np.array([r[0] for r in rows])
    val = np.array([r[2] for r in rows])
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.plot(lam, val, "o-", color="tab:orange")
    ax.set_xlabel("lambda")
    ax.set_ylabel("constant value")
    ax.set_title("far-field constants")
    ax.grid(alpha=0.3)
    return _save(fig, path)


def residue_figure(radii, values, path: str):
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.plot(radii, values, "s-", color="tab:green")
    ax.set_xlabel("contour radius")
    ax.set_ylabel("normalized flux")
    ax.set_title("residue contour independence")
    ax.grid(alpha=0.3)
    return _save(fig, path)


def fit_figure(pts_r, resid, path: str):
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.plot(pts_r, resid, ".", ms=3, color="tab:red")
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xlabel("|x|")
    ax.set_ylabel("fit residual")
    ax.set_title("far-field fit residuals")
    ax.grid(alpha=0.3)
    return _save(fig, path)


def blowdown_figure(samples, path: str):
    s = [b.scale for b in samples]
    d = [b.sup_deviation for b in samples]
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.loglog(s, d, "o-", color="tab:purple")
    ax.set_xlabel("scale")
    ax.set_ylabel("sup |u(s y)/s - a.y|")
    ax.set_title("blowdown convergence to the plane")
    ax.grid(True, which="both", alpha=0.3)
    return _save(fig, path)


def curvature_figure(radii, vals, n, path: str):
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.loglog(radii, vals, "o-", label="max |II| on ring")
    ref = vals[0] * (np.asarray(radii) / radii[0]) ** (-float(n))
    ax.loglog(radii, ref, "--", color="gray", label=f"r^-{n}")
    ax.set_xlabel("ring radius")
    ax.set_ylabel("|II|")
    ax.legend()
    ax.set_title("second fundamental form decay")
    ax.grid(True, which="both", alpha=0.3)
    return _save(fig, path)


def ensure_dir(path: str):
    os.makedirs(path, exist_ok=True)
    return path
