"""Command-line driver: ``zonecover {gen,solve,deepest,cover,certify,sweep}``.

Arrangement files are JSON documents::

    {"format": "zonecover-arrangement/1", "dim": 3,
     "normals": [[...], ...], "half_widths": [...]}   # half_widths optional

Reals are written with 17 significant digits, so doubles round-trip exactly.
Every report embeds the run manifest (command, seed, tolerances, versions).

Exit codes: 0 success / bound holds, 2 input error, 3 converged but the
bound sin(pi/2n) is violated, 4 solver did not converge.

Every option can also be set through an environment variable named
``ZONECOVER_<OPTION>``, e.g. ``ZONECOVER_SEED=3`` or ``ZONECOVER_GRAD_TOL=1e-10``.
Command-line values win over the environment.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from zonecover import __version__
from zonecover.coverage import covering_radius, default_certificate, zones_cover
from zonecover.errors import ZoneCoverError
from zonecover.prooflab import build_trace
from zonecover.solver import SolverConfig, check_theorem, solve
from zonecover.sphere import Arrangement, UnitVector, ZoneSet, apple_peel, random_arrangement

ENV_PREFIX = "ZONECOVER_"
ARRANGEMENT_FORMAT = "zonecover-arrangement/1"
SWEEP_COLUMNS = [
    "family",
    "d",
    "n",
    "seed",
    "objective",
    "min_abs_inner",
    "bound",
    "margin",
    "converged",
    "grad_norm",
    "rho_lo",
    "rho_hi",
    "rho_certified",
]
PLOT_COLUMNS = ["theta", "f", "cos_n_theta"]

EXIT_OK, EXIT_INPUT, EXIT_VIOLATION, EXIT_NOT_CONVERGED = 0, 2, 3, 4


class InputError(Exception):
    pass


# -- serialization -----------------------------------------------------------


def _fmt(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "Infinity" if x > 0 else "-Infinity"
    text = format(x, ".17g")
    # keep a float marker so -0.0 and integral values parse back as floats
    return text if any(ch in text for ch in ".en") else text + ".0"


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float at 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, (bool, np.bool_)) or obj is None or isinstance(obj, str):
        return json.dumps(bool(obj) if isinstance(obj, np.bool_) else obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(float(obj))
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        if not obj:
            return "[]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _level + 1) for v in obj) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def arrangement_to_text(arr: Arrangement, half_widths=None) -> str:
    doc = {"format": ARRANGEMENT_FORMAT, "dim": arr.dim, "normals": [v.coords.tolist() for v in arr.normals]}
    if half_widths is not None:
        doc["half_widths"] = list(half_widths)
    return dumps(doc) + "\n"


def parse_arrangement(text: str) -> tuple[Arrangement, tuple[float, ...] | None]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"not a JSON document: {e}") from None
    if not isinstance(doc, dict) or "dim" not in doc or "normals" not in doc:
        raise InputError("arrangement needs 'dim' and 'normals'")
    dim, normals = doc["dim"], doc["normals"]
    if not isinstance(dim, int) or not isinstance(normals, list) or not normals:
        raise InputError("'dim' must be an integer and 'normals' a non-empty list")
    if any(not isinstance(v, list) or len(v) != dim for v in normals):
        raise InputError(f"every normal must be a list of {dim} numbers")
    try:
        arr = Arrangement(dim, tuple(UnitVector(v) for v in normals))
    except (ZoneCoverError, TypeError, ValueError) as e:
        raise InputError(str(e)) from None
    hw = doc.get("half_widths")
    if hw is not None:
        if not isinstance(hw, list) or len(hw) != len(normals):
            raise InputError("'half_widths' must list one angle per normal")
        hw = tuple(float(h) for h in hw)
    return arr, hw


def read_arrangement(path: str) -> tuple[Arrangement, tuple[float, ...] | None]:
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from None
    return parse_arrangement(text)


def _emit(text: str, output: str | None) -> None:
    if output:
        try:
            Path(output).write_text(text)
        except OSError as e:
            raise InputError(f"cannot write {output}: {e}") from None
    else:
        sys.stdout.write(text)


def _csv_text(rows, columns, comment: str | None = None) -> str:
    buf = io.StringIO()
    if comment:
        buf.write(f"# {comment}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(v) if isinstance(v, float) else v for v in r])
    return buf.getvalue()


def _manifest(args, command: str, **extra) -> dict:
    m = {
        "command": command,
        "seed": args.seed,
        "tolerances": {},
        "versions": {"zonecover": __version__, "numpy": np.__version__},
    }
    for key in ("grad_tol", "theorem_tol", "mesh"):
        if getattr(args, key, None) is not None:
            m["tolerances"][key] = getattr(args, key)
    for key in ("restarts", "max_iters", "workers", "format"):
        if getattr(args, key, None) is not None:
            m[key] = getattr(args, key)
    m.update(extra)
    return m


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        restarts=args.restarts,
        max_iters=args.max_iters,
        grad_tol=args.grad_tol,
        seed=args.seed,
        workers=args.workers,
        chunk_size=16 if args.workers > 1 else 64,
    )


def solve_exit_code(report, tol: float) -> int:
    if check_theorem(report, tol=tol):
        return EXIT_OK
    return EXIT_VIOLATION if report.converged else EXIT_NOT_CONVERGED


# -- commands ----------------------------------------------------------------


def cmd_gen(args) -> int:
    kind, params = args.kind, args.params
    try:
        if kind == "apple-peel":
            if len(params) != 1:
                raise InputError("usage: gen apple-peel N")
            arr = apple_peel(int(params[0]))
        elif kind == "random":
            if len(params) != 3:
                raise InputError("usage: gen random D N SEED")
            d, n, seed = (int(p) for p in params)
            arr = random_arrangement(d, n, seed)
        else:
            raise InputError(f"unknown generator {kind!r}; use apple-peel or random")
    except ValueError as e:
        raise InputError(str(e)) from None
    hw = None if args.half_width is None else (args.half_width,) * arr.n
    _emit(arrangement_to_text(arr, hw), args.output)
    return EXIT_OK


def cmd_solve(args) -> int:
    arr, _ = read_arrangement(args.input)
    rep = solve(arr, _solver_config(args))
    code = solve_exit_code(rep, args.theorem_tol)
    body = rep.to_dict()
    body["theorem_holds"] = check_theorem(rep, tol=args.theorem_tol)
    body["exit_code"] = code
    if args.format == "csv":
        cols = ["n", "objective", "min_abs_inner", "bound", "margin", "grad_norm", "converged", "restarts_used"]
        row = [arr.n, rep.objective, rep.min_abs_inner, rep.bound, rep.margin, rep.grad_norm, rep.converged, rep.restarts_used]
        text = _csv_text([row], cols, json.dumps(_manifest(args, "solve", input=args.input), sort_keys=True))
    else:
        text = dumps({"manifest": _manifest(args, "solve", input=args.input), "report": body}) + "\n"
    _emit(text, args.output)
    return code


def cmd_deepest(args) -> int:
    arr, _ = read_arrangement(args.input)
    cert = default_certificate(arr.dim, args.mesh, args.seed)
    rep = covering_radius(arr, cert)
    doc = {
        "manifest": _manifest(args, "deepest", input=args.input),
        "certificate": cert.to_dict(),
        "report": rep.to_dict(),
        "pi_over_2n": math.pi / (2 * arr.n),
    }
    _emit(dumps(doc) + "\n", args.output)
    return EXIT_OK


def cmd_cover(args) -> int:
    arr, hw = read_arrangement(args.input)
    if args.half_width is not None:
        hw = (args.half_width,) * arr.n
    if hw is None:
        raise InputError("no half_widths in the file; pass --half-width")
    try:
        zones = ZoneSet(arr, hw)
    except ValueError as e:
        raise InputError(str(e)) from None
    cert = default_certificate(arr.dim, args.mesh, args.seed)
    rep = zones_cover(zones, cert)
    doc = {
        "manifest": _manifest(args, "cover", input=args.input),
        "certificate": cert.to_dict(),
        "half_widths": list(hw),
        "report": rep.to_dict(),
    }
    _emit(dumps(doc) + "\n", args.output)
    return EXIT_OK


def cmd_certify(args) -> int:
    arr, _ = read_arrangement(args.input)
    solve_info = None
    if args.u:
        try:
            u = UnitVector([float(t) for t in args.u.split(",")])
        except ValueError as e:
            raise InputError(f"bad --u: {e}") from None
        if u.dim != arr.dim:
            raise InputError(f"--u has {u.dim} coordinates, arrangement has d={arr.dim}")
    else:
        rep = solve(arr, _solver_config(args))
        u = rep.u_star
        solve_info = rep.to_dict()
    trace = build_trace(arr, u)
    samples = trace.samples(args.samples)
    if args.plot_csv:
        _emit(_csv_text(samples.tolist(), PLOT_COLUMNS, f"zonecover-plot/1 n={arr.n}"), args.plot_csv)
    if args.format == "csv":
        text = _csv_text(samples.tolist(), PLOT_COLUMNS, json.dumps(_manifest(args, "certify", input=args.input), sort_keys=True))
    else:
        doc = {"manifest": _manifest(args, "certify", input=args.input, u=u.coords.tolist() if args.u else None)}
        if solve_info is not None:
            doc["solve"] = solve_info
        doc["trace"] = trace.to_dict(samples=args.samples)
        text = dumps(doc) + "\n"
    _emit(text, args.output)
    return EXIT_OK


def parse_int_list(spec: str) -> list[int]:
    """'1-4' -> [1, 2, 3, 4]; '0,2,5' -> [0, 2, 5]; '' -> [].  Non-negative only."""
    out: list[int] = []
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        if "-" in part:
            a, b = part.split("-", 1)
            out.extend(range(int(a), int(b) + 1))
        else:
            out.append(int(part))
    return out


def cmd_sweep(args) -> int:
    try:
        ns, ds, seeds = parse_int_list(args.n), parse_int_list(args.d), parse_int_list(args.seeds)
    except ValueError as e:
        raise InputError(f"bad range: {e}") from None
    if not ns or not ds or not seeds:
        raise InputError("--n, --d and --seeds must be non-empty")
    if args.family == "apple-peel":
        ds = [3]
    cfg = _solver_config(args)
    rows, worst = [], EXIT_OK
    for d in ds:
        for n in ns:
            for seed in seeds:
                arr = apple_peel(n) if args.family == "apple-peel" else random_arrangement(d, n, seed)
                rep = solve(arr, cfg)
                code = solve_exit_code(rep, args.theorem_tol)
                worst = max(worst, code)
                if args.no_cover:
                    rho_lo = rho_hi = math.nan
                    certified = False
                else:
                    cov = covering_radius(arr, default_certificate(d, args.mesh, seed))
                    rho_lo, rho_hi, certified = cov.covering_radius_lo, cov.covering_radius_hi, cov.certified
                rows.append(
                    [args.family, d, n, seed, rep.objective, rep.min_abs_inner, rep.bound, rep.margin,
                     rep.converged, rep.grad_norm, rho_lo, rho_hi, certified]
                )
    manifest = _manifest(args, "sweep", family=args.family, n=ns, d=ds, seeds=seeds, columns=SWEEP_COLUMNS)
    _emit(_csv_text(rows, SWEEP_COLUMNS, "zonecover-sweep/1 " + json.dumps(manifest, sort_keys=True)), args.output)
    return worst


# -- argument parsing --------------------------------------------------------


def _env(name: str, cast, default):
    raw = os.environ.get(ENV_PREFIX + name.upper())
    if raw is None:
        return default
    try:
        return cast(raw)
    except ValueError:
        raise InputError(f"bad value for {ENV_PREFIX + name.upper()}: {raw!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=_env("seed", int, 0))
    common.add_argument("--output", "-o", default=_env("output", str, None))
    common.add_argument("--format", choices=["text", "csv"], default=_env("format", str, "text"))

    solver = argparse.ArgumentParser(add_help=False)
    solver.add_argument("--restarts", type=int, default=_env("restarts", int, None))
    solver.add_argument("--grad-tol", type=float, default=_env("grad_tol", float, 1e-9))
    solver.add_argument("--max-iters", type=int, default=_env("max_iters", int, 5000))
    solver.add_argument("--workers", type=int, default=_env("workers", int, 1))
    solver.add_argument("--theorem-tol", type=float, default=_env("theorem_tol", float, 1e-7))

    def grid(default: float) -> argparse.ArgumentParser:
        g = argparse.ArgumentParser(add_help=False)
        g.add_argument("--mesh", type=float, default=_env("mesh", float, default))
        return g

    p = argparse.ArgumentParser(prog="zonecover", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="write an arrangement file")
    g.add_argument("kind", help="apple-peel | random")
    g.add_argument("params", nargs="*", help="N for apple-peel; D N SEED for random")
    g.add_argument("--half-width", type=float, default=None)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("solve", parents=[common, solver], help="maximize prod |<v_i,u>| and check the bound")
    s.add_argument("input")
    s.set_defaults(func=cmd_solve)

    dp = sub.add_parser("deepest", parents=[common, grid(1e-3)], help="bracket the covering radius")
    dp.add_argument("input")
    dp.set_defaults(func=cmd_deepest)

    c = sub.add_parser("cover", parents=[common, grid(1e-3)], help="decide whether zones cover the sphere")
    c.add_argument("input")
    c.add_argument("--half-width", type=float, default=None)
    c.set_defaults(func=cmd_cover)

    ce = sub.add_parser("certify", parents=[common, solver], help="proof trace and plot data at a point")
    ce.add_argument("input")
    ce.add_argument("--u", default=None, help="comma-separated point; default: the solver's maximizer")
    ce.add_argument("--samples", type=int, default=1000)
    ce.add_argument("--plot-csv", default=None)
    ce.set_defaults(func=cmd_certify)

    sw = sub.add_parser("sweep", parents=[common, solver, grid(1e-2)], help="CSV table over (d, n, seed)")
    sw.add_argument("--family", choices=["random", "apple-peel"], default="random")
    sw.add_argument("--n", default="1-4")
    sw.add_argument("--d", default="2")
    sw.add_argument("--seeds", default="0")
    sw.add_argument("--no-cover", action="store_true", help="skip the covering-radius columns")
    sw.set_defaults(func=cmd_sweep)
    return p


def main(argv: list[str] | None = None) -> int:
    try:
        parser = build_parser()
    except InputError as e:
        print(f"zonecover: {e}", file=sys.stderr)
        return EXIT_INPUT
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except (InputError, ZoneCoverError) as e:
        print(f"zonecover: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
