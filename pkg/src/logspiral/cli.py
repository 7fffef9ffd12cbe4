"""Command-line entry point.

Machine-readable results go to stdout (or ``--out``); human diagnostics go
to stderr.  Exit codes: 0 success, 1 failed check or solver error, 2 bad
flags, 3 the continuation cannot start because matrix C is unavailable.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import asymptotics as asy
from .errors import DomainError, NondegeneracyFailure, SpiralError
from .geometry import sample_spiral
from .model import Angles, SpiralConfig, SpiralFamily
from .solver import (
    NewtonSettings,
    continue_branch,
    e2_expansion,
    expansion,
    prandtl_residual,
    prandtl_solve,
    prandtl_via_system,
)
from .suites import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NONDEGENERACY = 0, 1, 2, 3


# -- serialization -----------------------------------------------------------

def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def to_json(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits.

    Non-finite floats become ``null``; complex numbers become
    ``{"re": .., "im": ..}``.
    """
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return {None: "null", True: "true", False: "false"}[None if obj is None else bool(obj)]
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return fmt_float(obj) if math.isfinite(obj) else "null"
    if isinstance(obj, (complex, np.complexfloating)):
        return to_json({"re": obj.real, "im": obj.imag}, indent, _level)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f'{pad}{to_json(str(k))}: {to_json(v, indent, _level + 1)}' for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(to_json(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + to_json(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def rows_to_csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt_float(v) if isinstance(v, (float, np.floating)) else v for v in row])
    return buf.getvalue()


def emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")


def warn(msg: str):
    print(f"logspiral: {msg}", file=sys.stderr)


def branch_to_dict(branch) -> dict:
    return {
        "config": {"M": branch.cfg.M, "n": branch.cfg.n},
        "samples": [
            {
                "a": s.a,
                "theta": s.angles.theta,
                "g": np.concatenate(([s.g0], s.g0 * s.gprime)),
                "mu": s.mu,
                "residual": s.residual,
                "theta_residual": s.theta_residual,
                "in_U": s.in_U,
            }
            for s in branch.samples
        ],
        "theta_minus1": branch.theta_minus1,
        "G_minus1": branch.G_minus1,
        "gradient_source": branch.gradient_source,
        "complete": branch.complete,
        "stop_reason": branch.stop_reason,
    }


# -- argument types ----------------------------------------------------------

def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}")
    if not (math.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError(f"expected a positive finite number, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="logspiral",
        description="Nonsymmetric logarithmic-spiral vortex sheets: checks, branch solves and geometry export.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt_default="json"):
        p.add_argument("--out", help="write machine output here instead of stdout")
        p.add_argument("--format", choices=["json", "csv"], default=fmt_default)

    p = sub.add_parser("verify", help="run a seeded property suite")
    p.add_argument("suite", choices=sorted(SUITES) + ["all"])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--out")

    p = sub.add_parser("solve", help="continue a branch in a and write it as JSON")
    p.add_argument("--M", type=positive_int, required=True)
    p.add_argument("--n", type=positive_int, default=1)
    p.add_argument("--a", type=positive_float, default=1e6,
                   help="start of the branch, or the single target when --a-end is absent")
    p.add_argument("--a-end", type=positive_float)
    p.add_argument("--steps", type=positive_int)
    p.add_argument("--tol", type=positive_float, default=1e-12)
    p.add_argument("--out")

    p = sub.add_parser("table2", help="eigenvalues of C against their closed forms")
    common(p)

    p = sub.add_parser("scan-c", help="smallest singular value of C for odd M")
    p.add_argument("--max-M", type=positive_int, default=51)
    common(p)

    p = sub.add_parser("geometry", help="sample the spiral branches to CSV")
    p.add_argument("--M", type=positive_int, required=True)
    p.add_argument("--n", type=positive_int, default=1)
    p.add_argument("--a", type=positive_float, required=True)
    p.add_argument("--t", type=positive_float, default=1.0)
    p.add_argument("--turns", type=positive_float, default=1.0)
    p.add_argument("--npoints", type=positive_int, default=200)
    p.add_argument("--tol", type=positive_float, default=1e-12)
    common(p, "csv")

    p = sub.add_parser("prandtl", help="single-branch weight and exponent")
    p.add_argument("--a", type=positive_float, required=True)
    common(p)

    p = sub.add_parser("expansion", help="first-order coefficients in 1/a")
    p.add_argument("--M", type=positive_int, required=True)
    p.add_argument("--n", type=positive_int, default=1)
    common(p)
    return parser


# -- commands ----------------------------------------------------------------

def cmd_verify(args) -> int:
    results = run_suite(args.suite, args.seed)
    if args.format == "json":
        text = to_json([r.__dict__ for r in results])
    else:
        lines = []
        for r in results:
            tag = "INFO" if r.info else ("PASS" if r.passed else "FAIL")
            lines.append(f"{tag} [{r.suite}] {r.name}: max_error={r.max_error:.3e} tol={r.tol:g}")
        text = "\n".join(lines) + "\n"
    emit(text, args.out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAIL


def _solve_branch(M, n, a, a_end, steps, tol):
    cfg = SpiralConfig(M, n)
    if n >= 3:
        warn(f"n={n}: angles may leave (0, 2 pi); samples are marked with in_U")
    settings = NewtonSettings(tol=tol)
    if a_end is None:
        # continue from the asymptotic regime down to the single target
        start = max(a, 1e6)
        branch = continue_branch(cfg, start, a, settings=settings)
        if branch.complete:
            branch.samples = branch.samples[-1:]
        return branch
    if a_end > a:
        raise DomainError("--a-end must not exceed --a")
    return continue_branch(cfg, a, a_end, steps, settings)


def cmd_solve(args) -> int:
    branch = _solve_branch(args.M, args.n, args.a, args.a_end, args.steps, args.tol)
    emit(to_json(branch_to_dict(branch)), args.out)
    if not branch.complete:
        warn(f"branch stopped early: {branch.stop_reason}")
        return EXIT_FAIL
    if any(not s.in_U for s in branch.samples):
        warn("some samples have angles outside (0, 2 pi)")
    return EXIT_OK


def cmd_table2(args) -> int:
    rows = []
    for (M, n) in asy.C_EIGENVALUES:
        comp, closed = asy.eigen_table(SpiralConfig(M, n))
        for i, (c, e) in enumerate(zip(comp, closed), start=1):
            rows.append((M, n, i, float(c), float(e), float(abs(c - e))))
    header = ["M", "n", "index", "computed", "closed_form", "abs_diff"]
    _emit_rows(args, header, rows)
    return EXIT_OK if all(r[-1] <= 1e-10 for r in rows) else EXIT_FAIL


def cmd_scan_c(args) -> int:
    if args.max_M < 3:
        raise DomainError("--max-M must be at least 3")
    rows = [(r.M, r.n, r.det, r.sigma_min) for r in asy.scan_C(args.max_M)]
    _emit_rows(args, ["M", "n", "det", "sigma_min"], rows)
    return EXIT_OK if all(r[-1] > 0 for r in rows) else EXIT_FAIL


def _emit_rows(args, header, rows):
    if args.format == "csv":
        emit(rows_to_csv(header, rows), args.out)
    else:
        emit(to_json([dict(zip(header, r)) for r in rows]), args.out)


def family_at(M: int, n: int, a: float, tol: float = 1e-12) -> SpiralFamily:
    if M == 1:
        g, mu = prandtl_solve(a)
        return SpiralFamily(a, Angles([]), [g], mu)
    branch = _solve_branch(M, n, a, None, None, tol)
    if not branch.complete:
        raise SpiralError(f"could not reach a={a:g}: {branch.stop_reason}")
    return branch.samples[-1].family


def cmd_geometry(args) -> int:
    fam = family_at(args.M, args.n, args.a, args.tol)
    header = ["m", "theta", "t", "re_z", "im_z", "Gamma", "gamma_density"]
    rows = []
    for m in range(fam.M):
        for s in sample_spiral(fam, m, args.t, npoints=args.npoints, turns=args.turns):
            rows.append((s.m, s.theta, s.t, s.z.real, s.z.imag, s.gamma_cum, s.gamma_density))
    _emit_rows(args, header, rows)
    return EXIT_OK


def cmd_prandtl(args) -> int:
    g, mu = prandtl_solve(args.a)
    g2, mu2 = prandtl_via_system(args.a)
    rec = {"a": args.a, "g": g, "mu": mu, "residual": prandtl_residual(args.a, g, mu),
           "cross_route_difference": max(abs(g - g2) / abs(g), abs(mu - mu2) / abs(mu))}
    if args.format == "csv":
        _emit_rows(args, list(rec), [tuple(rec.values())])
    else:
        emit(to_json(rec), args.out)
    return EXIT_OK


def cmd_expansion(args) -> int:
    cfg = SpiralConfig(args.M, args.n)
    exp1 = expansion(cfg)
    rec = {"M": cfg.M, "n": cfg.n, "theta_minus1": exp1.theta_minus1, "G_minus1": exp1.G_minus1,
           "gradient_source": exp1.gradient_source}
    if cfg.M % 2:
        E20, E2m1 = e2_expansion(cfg)
        rec["E2_0"] = E20
        rec["E2_minus1"] = E2m1
    if args.format == "csv":
        flat = {"M": cfg.M, "n": cfg.n}
        for i, v in enumerate(exp1.theta_minus1, 1):
            flat[f"theta_minus1_{i}"] = float(v)
        for i, v in enumerate(exp1.G_minus1, 1):
            flat[f"G_minus1_{i}"] = float(v)
        if "E2_0" in rec:
            flat.update(E2_0=rec["E2_0"], E2_minus1_re=rec["E2_minus1"].real,
                        E2_minus1_im=rec["E2_minus1"].imag)
        emit(rows_to_csv(list(flat), [tuple(flat.values())]), args.out)
    else:
        emit(to_json(rec), args.out)
    return EXIT_OK


COMMANDS = {
    "verify": cmd_verify,
    "solve": cmd_solve,
    "table2": cmd_table2,
    "scan-c": cmd_scan_c,
    "geometry": cmd_geometry,
    "prandtl": cmd_prandtl,
    "expansion": cmd_expansion,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except NondegeneracyFailure as exc:
        warn(f"nondegeneracy failure (matrix C): {exc}")
        return EXIT_NONDEGENERACY
    except DomainError as exc:
        warn(str(exc))
        return EXIT_USAGE
    except SpiralError as exc:
        warn(f"{type(exc).__name__}: {exc}")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
