"""
Command-line front end.

    g2loops table [--out FILE]
    g2loops g2 verify [--form FILE] [--samples N]
    g2loops g2 isotropic --triple e1,e2,e4 [--out FILE]
    g2loops loop omega [--loop FILE] [--x FILE] [--y FILE] [--dim 3|7] [--n N]
    g2loops maslov index --data FILE [--mod4] [--z0 K]
    g2loops maslov parabola --rho 0.1 --out FILE [--dim 3|7] [--filling K]
    g2loops flow [--init circle|FILE] [--dim 3|7] [--n N] [--dt DT] [--steps K] [--report K] [--out FILE]

Exit status: 0 success, 1 failed verification or rejected input data,
2 usage error.  Human-readable summaries go to stdout (``--json`` switches
them to JSON); machine output goes to the ``--out`` files.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import __version__, cayley, filament, g2struct, loopspace, maslov
from .errors import G2LoopsError
from .io import dumps_json, loop_to_csv, read_field, read_json, read_loop, write_text

THREADS_ENV = "G2LOOPS_THREADS"
DEFAULT_SEED = 42


# ---------------------------------------------------------------------------
# argument types


def _positive_float(name):
    def parse(text):
        try:
            value = float(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be a number, got {text!r}") from None
        if not (value > 0 and math.isfinite(value)):
            raise argparse.ArgumentTypeError(f"{name} must be positive, got {text}")
        return value

    return parse


def _positive_int(name):
    def parse(text):
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{name} must be an integer, got {text!r}") from None
        if value <= 0:
            raise argparse.ArgumentTypeError(f"{name} must be positive, got {text}")
        return value

    return parse


def _triple(text):
    """``e1,e2,e4`` or three semicolon-separated comma lists of 7 numbers."""
    parts = [p.strip() for p in text.split(";")] if ";" in text else [p.strip() for p in text.split(",")]
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"--triple needs three vectors, got {text!r}")
    vecs = []
    for p in parts:
        if p.startswith("e") and p[1:].isdigit() and 1 <= int(p[1:]) <= 7:
            vecs.append(np.eye(7)[int(p[1:]) - 1])
        else:
            try:
                v = np.array([float(x) for x in p.split(",")])
            except ValueError:
                raise argparse.ArgumentTypeError(f"--triple: cannot parse {p!r}") from None
            if v.shape != (7,):
                raise argparse.ArgumentTypeError("--triple vectors need 7 components")
            vecs.append(v)
    return tuple(vecs)


def _threads(default=1):
    text = os.environ.get(THREADS_ENV)
    if not text:
        return default
    try:
        return max(1, int(text))
    except ValueError:
        return default


# ---------------------------------------------------------------------------
# reporting


def _emit(args, summary, lines):
    if args.json:
        sys.stdout.write(dumps_json(summary))
    else:
        for line in lines:
            print(line)


def _save(path, text):
    if path:
        write_text(path, text)


# ---------------------------------------------------------------------------
# subcommands


def cmd_table(args):
    table = cayley.multiplication_table()
    doc = {"format": "g2loops.octonion_table", "version": 1, **table}
    _save(args.out, dumps_json(doc))
    names = table["basis"]
    lines = ["      " + " ".join(f"{b:>4}" for b in names)]
    for i, row in enumerate(table["index"]):
        cells = []
        for j, k in enumerate(row):
            sign = "-" if table["sign"][i][j] < 0 else " "
            cells.append(f"{sign + names[k]:>4}")
        lines.append(f"{names[i]:>4}  " + " ".join(cells))
    _emit(args, doc, lines)
    return 0


def _algebra_checks(samples, seed):
    rng = np.random.default_rng(seed)
    a, b = rng.standard_normal((2, samples, 8))
    prod = cayley.oct_mul(a, b)
    comp = np.abs(cayley.norm2(prod) - cayley.norm2(a) * cayley.norm2(b)) / (cayley.norm2(a) * cayley.norm2(b))
    u, v = rng.standard_normal((2, samples, 7))
    uv = cayley.cross(u, v)
    lhs = cayley.cross(u, uv)
    rhs = -cayley.norm2(u)[:, None] * v + cayley.dot(u, v)[:, None] * u
    scale = cayley.norm2(u) * np.linalg.norm(v, axis=1)
    dbl = np.linalg.norm(lhs - rhs, axis=1) / scale
    nu, nv = np.linalg.norm(u, axis=1), np.linalg.norm(v, axis=1)
    orth = np.maximum(np.abs(cayley.dot(uv, u)) / nu, np.abs(cayley.dot(uv, v)) / nv) / (nu * nv)
    return {
        "composition_law": float(comp.max()),
        "double_cross": float(dbl.max()),
        "orthogonality": float(orth.max()),
    }


def _load_form(path):
    doc = read_json(path)
    if doc.get("format") != "g2loops.three_form":
        raise G2LoopsError("form file must have format 'g2loops.three_form'")
    dim = int(doc["dim"])
    coeffs = {tuple(int(i) for i in key.split(",")): float(v) for key, v in doc["coefficients"].items()}
    return cayley.ThreeForm.from_coefficients(dim, coeffs)


def cmd_g2_verify(args):
    checks = {}
    passed = {}
    tol = args.tol
    if args.form is None:
        lam = cayley.standard_three_form(7)
        for name, worst in _algebra_checks(args.samples, args.seed).items():
            checks[name] = worst
            passed[name] = worst <= tol
    else:
        lam = _load_form(args.form)
    report = g2struct.nondegeneracy_check(lam, samples=2048, seed=args.seed)
    checks["nondegeneracy_worst_kernel"] = report.worst_kernel_dim
    passed["nondegeneracy_worst_kernel"] = report.ok
    try:
        # raises unless the rescaled metric satisfies the double-cross identity
        g = g2struct.metric_from_form(lam)
        if args.form is None:
            checks["metric_reconstruction"] = float(np.abs(g - np.eye(7)).max())
            passed["metric_reconstruction"] = checks["metric_reconstruction"] <= 1e-9
            br = g2struct.cross_from_form(lam, g)
            e = np.eye(7)
            worst = max(
                float(np.abs(br(e[i], e[j]) - cayley.cross(e[i], e[j])).max())
                for i in range(7) for j in range(i + 1, 7)
            )
            checks["bracket_table"] = worst
            passed["bracket_table"] = worst <= 1e-10
        else:
            checks["metric_reconstruction"] = "double-cross identity holds"
            passed["metric_reconstruction"] = True
    except G2LoopsError as exc:
        checks["metric_reconstruction"] = str(exc)
        passed["metric_reconstruction"] = False
    passed = {k: bool(v) for k, v in passed.items()}
    ok = all(passed.values())
    summary = {"format": "g2loops.verify", "version": 1, "ok": ok, "checks": checks, "passed": passed}
    lines = [f"{'PASS' if passed[k] else 'FAIL'}  {k}: {checks[k]}" for k in checks]
    lines.append("all checks passed" if ok else "verification FAILED")
    _save(args.out, dumps_json(summary))
    _emit(args, summary, lines)
    return 0 if ok else 1


def cmd_g2_isotropic(args):
    plane = g2struct.isotropic_plane(*args.triple)
    iso = bool(g2struct.is_isotropic(plane.basis))
    probe = float(g2struct.maximality_probe(plane, directions=64, seed=args.seed))
    ok = iso and probe > 1e-10
    doc = {
        "format": "g2loops.isotropic_plane",
        "version": 1,
        "basis": plane.basis.tolist(),
        "isotropic": iso,
        "maximality_probe_min": probe,
        "ok": ok,
    }
    _save(args.out, dumps_json(doc))
    lines = ["basis (rows):"] + ["  " + " ".join(f"{x:+.6f}" for x in row) for row in plane.basis]
    lines += [f"isotropic: {iso}", f"maximality probe min: {probe:.6g}"]
    _emit(args, doc, lines)
    return 0 if ok else 1


def _random_loop(dim, n, seed):
    rng = np.random.default_rng(seed)
    z = 2 * np.pi * np.arange(n) / n
    pts = np.zeros((n, dim))
    pts[:, 0], pts[:, 1] = np.cos(z), np.sin(z)
    for k in (2, 3):
        a, b = rng.standard_normal((2, dim)) * 0.1
        pts += np.outer(np.cos(k * z), a) + np.outer(np.sin(k * z), b)
    return loopspace.DiscreteLoop(pts)


def _random_field(loop, rng, modes=3):
    z = loop.z * 2 * np.pi / loop.period
    v = np.zeros_like(loop.points)
    for k in range(modes + 1):
        a, b = rng.standard_normal((2, loop.dim))
        v += np.outer(np.cos(k * z), a) + np.outer(np.sin(k * z), b)
    return loopspace.project_normal(loop, v)


def cmd_loop_omega(args):
    loop = read_loop(args.loop) if args.loop else _random_loop(args.dim, args.n, args.seed)
    rng = np.random.default_rng(args.seed + 1)
    x = loopspace.project_normal(loop, read_field(args.x)) if args.x else _random_field(loop, rng)
    y = loopspace.project_normal(loop, read_field(args.y)) if args.y else _random_field(loop, rng)
    omega = loopspace.transgressed_form(loop, x, y)
    paired = loopspace.compatibility_pairing(loop, x, y)
    jjx = loopspace.complex_structure(loop, loopspace.complex_structure(loop, x))
    j2 = float(np.abs(jjx.values + x.values).max() / max(np.abs(x.values).max(), 1e-300))
    ok = bool(abs(omega - paired) <= 1e-8 * max(1.0, abs(omega)) and j2 <= 1e-10)
    doc = {
        "format": "g2loops.omega",
        "version": 1,
        "dim": loop.dim,
        "n": loop.n,
        "omega": omega,
        "J_pairing": paired,
        "J_squared_residual": j2,
        "ok": ok,
    }
    _save(args.out, dumps_json(doc))
    _emit(args, doc, [f"omega(X, Y)        = {omega:.12g}", f"int (JX, Y) ds     = {paired:.12g}",
                      f"|J^2 + 1| residual = {j2:.3g}"])
    return 0 if ok else 1


def cmd_maslov_index(args):
    h = maslov.HomotopyData.from_json(read_json(args.data)).validate()
    result = maslov.relative_index(h, z0=args.z0, workers=_threads())
    doc = result.to_json()
    if args.mod4 and h.dim != 3:
        print("note: --mod4 applies to 3-D data; the 7-D index is reported as an integer", file=sys.stderr)
    _save(args.out, dumps_json(doc))
    lines = [f"relative index m = {result.value}"]
    if args.mod4 and h.dim == 3:
        lines.append(f"m mod 4 = {result.mod4}")
    lines.append(f"z0-independent: {result.z0_independent}")
    _emit(args, doc, lines)
    return 0 if result.z0_independent else 1


def cmd_maslov_parabola(args):
    grid = tuple(args.grid)
    ex = maslov.parabola_example(args.rho, grid=grid, dim=args.dim, filling=args.filling)
    summary = {"format": "g2loops.parabola", "version": 1, "rho": args.rho, "radii": list(ex.radii),
               "dim": args.dim}
    if ex.homotopy is not None:
        _save(args.out, ex.homotopy.dumps() + "\n")
    elif args.out:
        _save(args.out, loop_to_csv(ex.curves[0]))
    _emit(args, summary, [f"rho = {args.rho}: {len(ex.radii)} intersection circle(s), radii "
                          + ", ".join(f"{r:.12g}" for r in ex.radii)])
    return 0


def cmd_flow(args):
    if args.init == "circle":
        loop = filament.circle(args.n, dim=args.dim)
    elif args.init == "perturbed":
        loop = filament.perturbed_circle(args.n, dim=args.dim, seed=args.seed)
    else:
        loop = read_loop(args.init)
        if loop.dim != args.dim:
            print(f"note: loop file is {loop.dim}-D; --dim ignored", file=sys.stderr)
    state = filament.FilamentState(loop, 0.0, dealias=args.dealias)
    snaps, report = filament.simulate(state, args.dt, args.steps, args.report, keep_snapshots=False)
    _save(args.out, report.to_csv())
    if args.final:
        _save(args.final, loop_to_csv(snaps[-1].loop))
    drift = report.max_drift()
    doc = {"format": "g2loops.flow", "version": 1, "steps": args.steps, "dt": args.dt,
           "final_time": snaps[-1].time, "max_drift": list(drift)}
    _emit(args, doc, [f"t = {snaps[-1].time:.6g} after {args.steps} steps",
                      "max relative drift  I1 {:.3e}  I2 {:.3e}  I3 {:.3e}".format(*drift)])
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="print the summary as JSON")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="random seed (default 42)")

    p = argparse.ArgumentParser(prog="g2loops", description="G2 structures, loop-space forms, "
                                "Maslov indices and filament flow.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True

    t = sub.add_parser("table", parents=[common], help="octonion multiplication table")
    t.add_argument("--out", help="write the table as JSON")
    t.set_defaults(func=cmd_table)

    g2 = sub.add_parser("g2", help="3-form checks").add_subparsers(dest="g2cmd", metavar="ACTION")
    g2.required = True
    v = g2.add_parser("verify", parents=[common], help="run the invariant suite on a 3-form")
    v.add_argument("--form", help="JSON 3-form (format g2loops.three_form); default: standard")
    v.add_argument("--samples", type=_positive_int("samples"), default=10_000)
    v.add_argument("--tol", type=_positive_float("tol"), default=1e-12)
    v.add_argument("--out", help="write the report as JSON")
    v.set_defaults(func=cmd_g2_verify)
    iso = g2.add_parser("isotropic", parents=[common], help="maximal isotropic plane from a triple")
    iso.add_argument("--triple", type=_triple, required=True, help="e.g. e1,e2,e4")
    iso.add_argument("--out")
    iso.set_defaults(func=cmd_g2_isotropic)

    lp = sub.add_parser("loop", help="loop-space forms").add_subparsers(dest="loopcmd", metavar="ACTION")
    lp.required = True
    om = lp.add_parser("omega", parents=[common], help="evaluate omega(X, Y) and its J-pairing")
    om.add_argument("--loop", help="loop CSV; default: random loop from the seed")
    om.add_argument("--x", help="field JSON (projected to the normal bundle); default: random")
    om.add_argument("--y", help="field JSON (projected to the normal bundle); default: random")
    om.add_argument("--dim", type=int, choices=(3, 7), default=7)
    om.add_argument("--n", type=_positive_int("n"), default=128)
    om.add_argument("--out")
    om.set_defaults(func=cmd_loop_omega)

    ms = sub.add_parser("maslov", help="relative Maslov index").add_subparsers(dest="mcmd", metavar="ACTION")
    ms.required = True
    mi = ms.add_parser("index", parents=[common], help="relative index of homotopy data")
    mi.add_argument("--data", required=True, help="homotopy JSON")
    mi.add_argument("--mod4", action="store_true", help="also report the index mod 4 (3-D)")
    mi.add_argument("--z0", type=int, default=0)
    mi.add_argument("--out")
    mi.set_defaults(func=cmd_maslov_index)
    mp = ms.add_parser("parabola", parents=[common], help="rotated-parabola tangency example")
    mp.add_argument("--rho", type=float, required=True)
    mp.add_argument("--dim", type=int, choices=(3, 7), default=3)
    mp.add_argument("--filling", type=int, default=0)
    mp.add_argument("--grid", type=_positive_int("grid"), nargs=3, default=list(maslov.DEFAULT_GRID),
                    metavar=("A", "B", "C"))
    mp.add_argument("--out")
    mp.set_defaults(func=cmd_maslov_parabola)

    fl = sub.add_parser("flow", parents=[common], help="integrate the filament flow")
    fl.add_argument("--init", default="circle", help="circle, perturbed, or a loop CSV file")
    fl.add_argument("--dim", type=int, choices=(3, 7), default=3)
    fl.add_argument("--n", type=_positive_int("n"), default=256)
    fl.add_argument("--dt", type=_positive_float("dt"), default=1e-4)
    fl.add_argument("--steps", type=_positive_int("steps"), default=10_000)
    fl.add_argument("--report", type=_positive_int("report"), default=100)
    fl.add_argument("--dealias", action="store_true")
    fl.add_argument("--out", help="conserved-quantity CSV")
    fl.add_argument("--final", help="final loop CSV")
    fl.set_defaults(func=cmd_flow)
    return p


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        return args.func(args)
    except (G2LoopsError, ValueError, OSError) as exc:
        print(f"g2loops: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
