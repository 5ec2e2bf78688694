"""Command-line front door.

Subcommands: constants, solve-annulus, solve-exterior, residue, fit,
blowdown, curvature, verify.  Configs are JSON (unknown keys rejected),
bulk numbers go to CSV, run summaries to JSON; outputs are written
atomically and, when an --out target is given, a matplotlib figure is
rendered next to the delimited output (suppress with --no-figures).

Exit codes: 0 success, 1 verify-suite failures, 2 usage/config errors
(error JSON {"kind": "usage", ...} on stderr), 3 numerical failures
(error JSON with the failure kind).
"""

from __future__ import annotations

import argparse
import io
import json
import os
import sys

import numpy as np

from . import analysis, exterior, radial, verify
from .errors import MaxsurfError, UsageError
from .mesh import (HoleSpec, ScalarField, _atomic_write, build_grid,
                   load_field, save_field)
from .solver import BoundaryData, SolverConfig, solve_dirichlet, theta_h

_COMMON_KEYS = {"seed", "output_dir", "verbosity"}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit_error(exc: MaxsurfError):
    sys.stderr.write(json.dumps({"kind": exc.kind, "message": str(exc)})
                     + "\n")


def _read_config(path: str) -> dict:
    try:
        with open(path, "r") as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise UsageError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}")


def _check_keys(cfg: dict, allowed: set, where: str):
    unknown = set(cfg) - allowed - _COMMON_KEYS
    if unknown:
        raise UsageError(f"unknown config keys in {where}: "
                         f"{sorted(unknown)}")


def _parse_hole(spec) -> HoleSpec:
    if isinstance(spec, (int, float)):
        return HoleSpec("circle", float(spec))
    if isinstance(spec, dict):
        _check_keys(spec, {"kind", "radius", "eps", "k"}, "hole")
        return HoleSpec.from_json(spec)
    raise UsageError(f"hole must be a radius or an object, got {spec!r}")


def _parse_vec(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}")


def _profile_values(spec, pts, angles, n, where):
    """Boundary profile: scalar, per-node list, or a named profile."""
    if isinstance(spec, (int, float)):
        return np.full(len(angles), float(spec))
    if isinstance(spec, list):
        arr = np.asarray(spec, dtype=float)
        if arr.shape != (len(angles),):
            raise UsageError(f"{where}: list has {arr.size} entries, grid "
                             f"has {len(angles)} angular nodes")
        return arr
    if not isinstance(spec, dict):
        raise UsageError(f"{where}: expected number, list, or object")
    kind = spec.get("kind")
    if kind == "constant":
        _check_keys(spec, {"kind", "value"}, where)
        return np.full(len(angles), float(spec["value"]))
    if kind == "radial":
        _check_keys(spec, {"kind", "lam"}, where)
        sol = radial.RadialSolution(n, float(spec["lam"]))
        return np.array([radial.w_value(sol, float(np.hypot(p[0], p[1])))
                         for p in pts])
    if kind == "boosted":
        _check_keys(spec, {"kind", "lam", "a"}, where)
        a = np.asarray(spec["a"], dtype=float)
        sol = radial.BoostedRadialSolution(
            radial.RadialSolution(n, float(spec["lam"])), a)
        emb = (lambda p: np.array([p[0], 0.0, p[1]])) if n == 3 \
            else (lambda p: p)
        return np.array([radial.boosted_eval(sol, emb(p)) for p in pts])
    if kind == "affine":
        _check_keys(spec, {"kind", "a", "c"}, where)
        a = np.asarray(spec["a"], dtype=float)
        if a.shape != (2,):
            raise UsageError(f"{where}: affine profile needs a 2-vector "
                             "(grid-plane coordinates)")
        return pts @ a + float(spec.get("c", 0.0))
    if kind == "cosine":
        _check_keys(spec, {"kind", "amp", "mode", "phase"}, where)
        return float(spec["amp"]) * np.cos(int(spec["mode"]) * angles
                                           + float(spec.get("phase", 0.0)))
    raise UsageError(f"{where}: unknown profile kind {kind!r}")


def _stem(path: str) -> str:
    root, _ = os.path.splitext(path)
    return root


def _write_csv(path, header_cols, rows):
    buf = io.StringIO()
    buf.write(",".join(header_cols) + "\n")
    for row in rows:
        buf.write(",".join(f"{v:.17g}" if isinstance(v, float)
                           else str(v) for v in row) + "\n")
    _atomic_write(path, buf.getvalue())


def _write_json(path, obj):
    _atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _print_csv(header_cols, rows):
    sys.stdout.write(",".join(header_cols) + "\n")
    for row in rows:
        sys.stdout.write(",".join(f"{v:.17g}" if isinstance(v, float)
                                  else str(v) for v in row) + "\n")


_SUMMARY_KEYS = ("a", "c", "d", "Res", "discrepancy", "theta_h")


def _summary(**kw):
    out = {k: None for k in _SUMMARY_KEYS}
    for k, v in kw.items():
        if k not in out:
            raise KeyError(k)
        out[k] = v
    return out


# ----------------------------------------------------------------------
# subcommands

def _cmd_constants(args) -> int:
    lams = list(_parse_vec(args.lam))
    try:
        ns = [int(t) for t in args.n.split(",")]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {args.n!r}")
    rows = []
    for lam in lams:
        for n in ns:
            if n == 2:
                v, err = radial.m_const_with_error(lam)
            else:
                v, err = radial.M_const_with_error(lam, n)
            rows.append([lam, n, float(v), float(err)])
    cols = ["lambda", "n", "value", "quadrature_error_estimate"]
    if args.out:
        _write_csv(args.out, cols, rows)
        if not args.no_figures and len(rows) > 1:
            from . import figures
            figures.constants_figure(rows, _stem(args.out) + ".png")
    else:
        _print_csv(cols, rows)
    return 0


def _solver_config(cfg) -> SolverConfig:
    kw = {}
    if "newton_tol" in cfg:
        kw["newton_tol"] = float(cfg["newton_tol"])
    if "max_iter" in cfg:
        kw["max_iter"] = int(cfg["max_iter"])
    return SolverConfig(**kw)


def _cmd_solve_annulus(args) -> int:
    cfg = _read_config(args.config)
    _check_keys(cfg, {"n", "hole", "R", "N_r", "N_ang", "grading", "bc",
                      "newton_tol", "max_iter"}, "solve-annulus config")
    for key in ("n", "hole", "R", "N_r", "N_ang", "bc"):
        if key not in cfg:
            raise UsageError(f"solve-annulus config is missing {key!r}")
    grid = build_grid(int(cfg["n"]), _parse_hole(cfg["hole"]),
                      float(cfg["R"]), int(cfg["N_r"]), int(cfg["N_ang"]),
                      float(cfg.get("grading", 1.0)))
    bc_cfg = cfg["bc"]
    if not isinstance(bc_cfg, dict) or set(bc_cfg) != {"inner", "outer"}:
        raise UsageError("bc must be an object with keys inner and outer")
    inner = _profile_values(bc_cfg["inner"], grid.points[0], grid.angles,
                            grid.n, "bc.inner")
    outer = _profile_values(bc_cfg["outer"], grid.points[grid.N_r],
                            grid.angles, grid.n, "bc.outer")
    result = solve_dirichlet(grid, BoundaryData(inner, outer),
                             _solver_config(cfg))
    out = args.out or os.path.join(cfg.get("output_dir", "."), "field.csv")
    save_field(result.field, out)
    report = {"iterations": result.iterations,
              "residuals": result.residuals,
              "energy": result.energy_history[-1],
              "theta_h": result.theta_h}
    _write_json(_stem(out) + ".report.json", report)
    if not args.no_figures:
        from . import figures
        figures.field_figure(result.field, _stem(out) + ".png",
                             title="annulus solution")
    if int(cfg.get("verbosity", 0)) > 0:
        sys.stderr.write(f"solved in {result.iterations} iterations, "
                         f"theta_h={result.theta_h:.3e}\n")
    return 0


def _cmd_solve_exterior(args) -> int:
    cfg = _read_config(args.config)
    _check_keys(cfg, {"n", "hole", "g", "target", "R_max", "R_min", "factor",
                      "N_ang", "grading", "newton_tol", "max_iter"},
                "solve-exterior config")
    for key in ("n", "hole", "g", "target", "R_max"):
        if key not in cfg:
            raise UsageError(f"solve-exterior config is missing {key!r}")
    n = int(cfg["n"])
    hole = _parse_hole(cfg["hole"])
    target = cfg["target"]
    if not isinstance(target, dict):
        raise UsageError("target must be an object")
    g_spec = cfg["g"]

    def g_fn(p):
        angle = float(np.arctan2(p[1], p[0])) if n == 2 \
            else float(np.arctan2(p[0], p[1]))
        return _profile_values(g_spec, np.array([p]), np.array([angle]), n,
                               "g")[0]

    problem = exterior.ExteriorProblem(n, hole, g_fn, target)
    sched = exterior.ContinuationSchedule.geometric(
        hole, float(cfg["R_max"]), factor=float(cfg.get("factor", 2.0)),
        N_ang=int(cfg.get("N_ang", 64)), grading=float(cfg.get("grading",
                                                               1.08)),
        R_min=float(cfg["R_min"]) if "R_min" in cfg else None)
    result = exterior.solve_exterior(problem, sched, _solver_config(cfg))

    outdir = args.out or cfg.get("output_dir", ".")
    os.makedirs(outdir, exist_ok=True)
    for j, fld in enumerate(result.stage_fields):
        save_field(fld, os.path.join(outdir, f"stage_{j:02d}.csv"))
    _write_csv(os.path.join(outdir, "trace.csv"),
               ["stage", "R", "sup_diff", "newton_iters"],
               [[t.stage, float(t.R), float(t.sup_diff), t.newton_iters]
                for t in result.trace])

    R = result.field.grid.R_out
    rep = analysis.residue(result.field, [R / 8.0, R / 4.0, R / 2.0])
    bar = exterior.barrier_check(problem, result.field)
    summary = {
        "a_fit": [float(v) for v in result.fit.a],
        "c_fit": result.fit.c,
        "d_fit": result.fit.d,
        "Res": rep.mean,
        "relation_discrepancy": analysis.check_residue_relation(result.fit,
                                                                rep),
        "theta_h": result.trace[-1].theta_h,
        "barrier_violations": {"lower": bar.lower_violation,
                               "upper": bar.upper_violation},
    }
    _write_json(os.path.join(outdir, "summary.json"), summary)
    if not args.no_figures:
        from . import figures
        figures.field_figure(result.field, os.path.join(outdir, "field.png"),
                             title="final stage")
        figures.trace_figure(result.trace, os.path.join(outdir, "trace.png"))
    if int(cfg.get("verbosity", 0)) > 0:
        sys.stderr.write(f"{len(result.trace)} stages, converged="
                         f"{result.converged}\n")
    return 0


def _load_subject(args):
    if getattr(args, "field", None):
        return load_field(args.field)
    if getattr(args, "lam", None) is not None:
        n = args.n or 2
        a = _parse_vec(args.a) if getattr(args, "a", None) else np.zeros(n)
        return radial.BoostedRadialSolution(radial.RadialSolution(n, args.lam),
                                            a)
    raise UsageError("provide --field FILE or an exact solution via "
                     "--lambda (with optional --a and --n)")


def _subject_theta(obj):
    if isinstance(obj, ScalarField):
        return theta_h(obj)
    return None


def _cmd_residue(args) -> int:
    obj = _load_subject(args)
    radii = _parse_vec(args.radii)
    rep = analysis.residue(obj, radii)
    rows = [[float(r), float(v)] for r, v in zip(rep.radii, rep.values)]
    summary = _summary(Res=rep.mean, theta_h=_subject_theta(obj))
    return _emit_analysis(args, ["radius", "value"], rows, summary,
                          figure=("residue", rep.radii, rep.values))


def _cmd_fit(args) -> int:
    obj = _load_subject(args)
    window = tuple(_parse_vec(args.window)) if args.window else None
    fit = analysis.fit_asymptotics(obj, window)
    rep = analysis.residue(obj, [sum(fit.fit_window) / 2.0])
    disc = analysis.check_residue_relation(fit, rep)
    rows = [[float(fit.fit_window[0]), float(fit.fit_window[1]),
             float(fit.rms_residual)]]
    summary = _summary(a=[float(v) for v in fit.a], c=fit.c, d=fit.d,
                       Res=rep.mean, discrepancy=disc,
                       theta_h=_subject_theta(obj))
    return _emit_analysis(args, ["window_lo", "window_hi", "rms_residual"],
                          rows, summary, figure=None)


def _cmd_blowdown(args) -> int:
    obj = _load_subject(args)
    scales = _parse_vec(args.scales)
    samples = analysis.blowdown_sequence(obj, scales)
    rows = [[b.scale, b.sup_deviation, b.lipschitz_excess] for b in samples]
    summary = _summary(theta_h=_subject_theta(obj))
    return _emit_analysis(args,
                          ["scale", "sup_deviation", "lipschitz_excess"],
                          rows, summary, figure=("blowdown", samples))


def _cmd_curvature(args) -> int:
    obj = _load_subject(args)
    if args.radii:
        radii = _parse_vec(args.radii)
    elif isinstance(obj, ScalarField):
        g = obj.grid
        radii = np.geomspace(1.5 * g.hole.max_radius, 0.9 * g.R_out, 8)
    else:
        radii = np.geomspace(2.0, 100.0, 8)
    n = obj.grid.n if isinstance(obj, ScalarField) else obj.n
    if isinstance(obj, ScalarField):
        vals = _field_ring_curvature(obj, radii)
    else:
        vals = []
        for r in radii:
            K = 64
            if n == 2:
                th = 2 * np.pi * np.arange(K) / K
                pts = r * np.stack([np.cos(th), np.sin(th)], axis=-1)
            else:
                ph = np.linspace(0, np.pi, K)
                pts = r * np.stack([np.sin(ph) * 0.6, np.sin(ph) * 0.8,
                                    np.cos(ph)], axis=-1)
            vals.append(max(radial.boosted_curvature(obj, p) for p in pts))
    rows = [[float(r), float(v), float(v * r ** n)]
            for r, v in zip(radii, vals)]
    summary = _summary(theta_h=_subject_theta(obj))
    return _emit_analysis(args, ["radius", "max_II", "II_times_r_pow_n"],
                          rows, summary, figure=("curvature", radii, vals, n))


def _field_ring_curvature(fld: ScalarField, radii):
    II = analysis.second_ff_norm(fld)
    g = fld.grid
    ring_r = g.radii[:, 0]
    vals = []
    for r in radii:
        i = int(np.argmin(np.abs(ring_r - r)))
        i = min(max(i, 1), g.N_r - 1)  # interior rings only
        vals.append(float(np.max(II[i, :])))
    return vals


def _emit_analysis(args, cols, rows, summary, figure) -> int:
    if args.out:
        _write_csv(args.out, cols, rows)
        _write_json(_stem(args.out) + ".summary.json", summary)
        if figure is not None and not args.no_figures:
            from . import figures
            kind = figure[0]
            path = _stem(args.out) + ".png"
            if kind == "residue":
                figures.residue_figure(figure[1], figure[2], path)
            elif kind == "blowdown":
                figures.blowdown_figure(figure[1], path)
            elif kind == "curvature":
                figures.curvature_figure(figure[1], figure[2], figure[3],
                                         path)
    else:
        _print_csv(cols, rows)
        sys.stdout.write(json.dumps(summary, sort_keys=True) + "\n")
    return 0


def _cmd_verify(args) -> int:
    if args.n is not None and args.n not in (2, 3):
        raise UsageError(f"--n must be 2 or 3, got {args.n}")
    results = verify.run_suite(args.suite, seed=args.seed)
    width = max(len(r.name) for r in results)
    failures = 0
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        if not r.passed:
            failures += 1
        sys.stdout.write(f"{r.name:<{width}}  measured={r.measured:.3e}  "
                         f"tol={r.tolerance:.3e}  {status}\n")
    sys.stdout.write(f"{len(results) - failures}/{len(results)} checks "
                     f"passed in suite {args.suite!r}\n")
    return 0 if failures == 0 else 1


# ----------------------------------------------------------------------
# argument wiring

def _add_subject_flags(p):
    p.add_argument("--field", help="field CSV produced by solve-annulus/"
                                   "solve-exterior")
    p.add_argument("--lambda", dest="lam", type=float,
                   help="flux parameter of an exact radial solution")
    p.add_argument("--a", help="comma-separated tilt vector")
    p.add_argument("--n", type=int, help="dimension for exact solutions")


def _add_out_flags(p):
    p.add_argument("--out", help="output CSV path (stdout when omitted)")
    p.add_argument("--no-figures", action="store_true",
                   help="skip rendering PNG figures next to the CSV")


def _build_parser() -> _Parser:
    top = _Parser(prog="maxsurf",
                  description="maximal-surface exterior problem toolkit")
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("constants", help="far-field constants m / M")
    p.add_argument("--lambda", dest="lam", required=True,
                   help="comma-separated flux parameters")
    p.add_argument("--n", default="2", help="comma-separated dimensions")
    _add_out_flags(p)
    p.set_defaults(fn=_cmd_constants)

    p = sub.add_parser("solve-annulus", help="Dirichlet solve on an annulus")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="field CSV path")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(fn=_cmd_solve_annulus)

    p = sub.add_parser("solve-exterior",
                       help="continuation over growing outer radii")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="output directory")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(fn=_cmd_solve_exterior)

    p = sub.add_parser("residue", help="normalized flux residues")
    _add_subject_flags(p)
    p.add_argument("--radii", required=True)
    _add_out_flags(p)
    p.set_defaults(fn=_cmd_residue)

    p = sub.add_parser("fit", help="far-field asymptotic fit")
    _add_subject_flags(p)
    p.add_argument("--window", help="lo,hi fit radii")
    _add_out_flags(p)
    p.set_defaults(fn=_cmd_fit)

    p = sub.add_parser("blowdown", help="rescaled convergence to the plane")
    _add_subject_flags(p)
    p.add_argument("--scales", required=True)
    _add_out_flags(p)
    p.set_defaults(fn=_cmd_blowdown)

    p = sub.add_parser("curvature", help="second fundamental form decay")
    _add_subject_flags(p)
    p.add_argument("--radii")
    _add_out_flags(p)
    p.set_defaults(fn=_cmd_curvature)

    p = sub.add_parser("verify", help="run a self-check suite")
    p.add_argument("--suite", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=int)
    p.set_defaults(fn=_cmd_verify)
    return top


def dispatch(argv) -> int:
    """Parse argv, run the subcommand, and map failures to exit codes."""
    parser = _build_parser()
    try:
        args = parser.parse_args(list(argv))
        return args.fn(args)
    except SystemExit as exc:  # argparse -h
        return int(exc.code or 0)
    except UsageError as exc:
        _emit_error(exc)
        return 2
    except MaxsurfError as exc:
        _emit_error(exc)
        return 3


def main(argv=None) -> int:
    return dispatch(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
