"""Command-line front end.

Subcommands: ``enclosure``, ``spectrum``, ``verify``, ``sharpness`` and
``bs-norm``. Complex numbers are passed as ``re,im``. The exit status is 0
exactly when a run has no violations and no errors; reports are written
even on failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .domain import INF, PotentialSpec, dist_to_band, parse_complex
from .enclosures import BracketError, BoundaryCurve, EnclosureRegion
from .experiments import (DEFAULT_P_VALUES, DISAGREE_TOL, MATCH_TOL, WORKERS_ENV, EnsembleConfig,
                          audit_bs_bounds, bs_bounds, generate_ensemble, sharpness_sweep,
                          verify_enclosures)
from .jost import locate_eigenvalues_wronskian
from .operators import DEFAULT_DELTA, build_bs_matrix, bs_operator_norm, stable_discrete_eigenvalues
from .svg import render_curves

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_ERROR = 2


class CliError(Exception):
    pass


def _real(text: str) -> float:
    text = text.strip().lower()
    if text in ("inf", "infinity", "∞"):
        return INF
    if "/" in text:
        a, b = text.split("/", 1)
        return float(a) / float(b)
    return float(text)


def _real_list(text: str) -> list[float]:
    try:
        return [_real(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"invalid number list {text!r}") from exc


def _complex(text: str) -> complex:
    try:
        return parse_complex(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def _load_potential(path: str) -> PotentialSpec:
    try:
        return PotentialSpec.from_json(Path(path).read_text())
    except OSError as exc:
        raise CliError(f"cannot read potential file: {exc}") from exc
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError(f"cannot parse potential file {path}: {exc}") from exc


def _exp_label(x: float) -> str:
    return "inf" if x == INF else format(x, "g")


# --------------------------------------------------------------------------
# enclosure
# --------------------------------------------------------------------------

def cmd_enclosure(args) -> int:
    kind = args.kind
    if kind == "l1":
        exponents: list[float | None] = [None]
    elif kind == "lp":
        if args.q is None:
            raise CliError("--kind lp needs --q")
        exponents = list(args.q)
    else:
        if args.p is None:
            raise CliError("--kind interp needs --p")
        exponents = list(args.p)
    curves: list[BoundaryCurve] = []
    for exp in exponents:
        for Q in args.norm:
            try:
                if kind == "l1":
                    reg = EnclosureRegion.l1(Q)
                elif kind == "lp":
                    reg = EnclosureRegion.lp(Q, exp)
                else:
                    reg = EnclosureRegion.interp(Q, exp)
                curves.append(reg.sample_boundary(args.samples))
            except (ValueError, BracketError) as exc:
                raise CliError(f"cannot sample {kind} boundary at Q={Q}, exponent={exp}: {exc}") from exc

    if args.format == "svg":
        title = f"{kind} boundaries, Q in {{{', '.join(format(q, 'g') for q in args.norm)}}}"
        _write(args.out, render_curves(curves, title=title))
    elif args.format == "json":
        payload = curves[0].to_dict() if len(curves) == 1 else [c.to_dict() for c in curves]
        _write(args.out, json.dumps(payload) + "\n")
    else:
        if len(curves) == 1:
            _write(args.out, curves[0].to_csv())
        else:
            if args.out is None or args.out == "-":
                raise CliError("several CSV curves need --out pointing to a directory")
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            for c in curves:
                exp = "" if c.exponent is None else f"_{_exp_label(c.exponent)}"
                (out / f"{kind}{exp}_Q{c.Q:g}.csv").write_text(c.to_csv())
    worst = max(float(np.max(np.abs(c.residuals))) if len(c) else 0.0 for c in curves)
    print(f"{len(curves)} curve(s), max residual {worst:.3g}", file=sys.stderr)
    return EXIT_OK


# --------------------------------------------------------------------------
# spectrum
# --------------------------------------------------------------------------

def cmd_spectrum(args) -> int:
    v = _load_potential(args.potential)
    status = EXIT_OK
    out: dict = {"potential": v.to_dict()}
    fs = wr = None
    if args.method in ("finite-section", "both"):
        fs = stable_discrete_eigenvalues(v, args.N, delta=args.delta)
        out["finite_section"] = fs.to_dict()
    if args.method in ("wronskian", "both"):
        wr = locate_eigenvalues_wronskian(v, grid=args.grid)
        out["wronskian"] = wr.to_dict()
    if args.method == "both":
        from scipy.optimize import linear_sum_assignment

        w = np.array([z for z in wr.eigenvalues if dist_to_band(z) > args.delta], dtype=complex)
        f = fs.eigenvalues
        table = []
        unmatched = 0
        if w.size and f.size:
            cost = np.abs(w[:, None] - f[None, :])
            rows, cols = linear_sum_assignment(cost)
            for r, c in zip(rows, cols):
                table.append({"wronskian": [w[r].real, w[r].imag], "finite_section": [f[c].real, f[c].imag],
                              "distance": float(cost[r, c]), "within_1e-6": bool(cost[r, c] <= MATCH_TOL)})
            unmatched = abs(w.size - f.size) + int(np.count_nonzero(cost[rows, cols] > DISAGREE_TOL))
        else:
            unmatched = w.size + f.size
        out["matches"] = table
        out["unmatched"] = unmatched
        if unmatched:
            print(f"methods disagree on {unmatched} eigenvalue(s)", file=sys.stderr)
            status = EXIT_VIOLATION
    for res in (fs, wr):
        if res is not None and res.warnings:
            for wmsg in res.warnings:
                print(f"warning ({res.method}): {wmsg}", file=sys.stderr)
    _write(args.out, json.dumps(out, indent=1) + "\n")
    return status


# --------------------------------------------------------------------------
# campaigns
# --------------------------------------------------------------------------

def _finish(report, out: str | None) -> int:
    _write(out, report.to_json() + "\n")
    print(report.summary_table(), file=sys.stderr if out in (None, "-") else sys.stdout)
    return EXIT_OK if report.passed else EXIT_VIOLATION


def cmd_verify(args) -> int:
    cfg = EnsembleConfig(args.seed, args.count, args.support, args.cap, tuple(args.p))
    vs = generate_ensemble(cfg)
    report = verify_enclosures(vs, args.delta, cfg.p_values, section_size=args.N, grid=args.grid,
                               workers=args.workers, config={"ensemble": cfg.to_dict()})
    status = _finish(report, args.out)
    if report.summary.get("method_disagreements"):
        status = EXIT_VIOLATION
    return status


def cmd_sharpness(args) -> int:
    status = EXIT_OK
    reports = [sharpness_sweep(Q, args.count, grid=args.grid) for Q in args.norm]
    if len(reports) == 1:
        return _finish(reports[0], args.out)
    payload = "[" + ",\n".join(r.to_json() for r in reports) + "]\n"
    _write(args.out, payload)
    for r in reports:
        print(r.summary_table(), file=sys.stderr if args.out in (None, "-") else sys.stdout)
        if not r.passed:
            status = EXIT_VIOLATION
    return status


def cmd_bs_norm(args) -> int:
    v = _load_potential(args.potential)
    p_values = tuple(args.p)
    if v.is_zero():
        raise CliError("the zero potential has no Birman–Schwinger matrix")
    if args.audit:
        report = audit_bs_bounds([v], args.lambda_, p_values, workers=1)
        return _finish(report, args.out)
    rows = []
    violations = 0
    for lam in args.lambda_:
        if dist_to_band(lam) == 0.0:
            raise CliError(f"lambda = {lam} lies on the band [-2, 2]")
        nrm = bs_operator_norm(build_bs_matrix(v, lam))
        bounds = bs_bounds(v, lam, p_values)
        entry = {"lambda": [lam.real, lam.imag], "norm": nrm,
                 "bounds": {k: {"bound": b, "margin": nrm - b} for k, b in bounds.items()}}
        rows.append(entry)
        print(f"lambda = {lam.real:.6g}{lam.imag:+.6g}i   ||K|| = {nrm:.12g}")
        for name, b in bounds.items():
            flag = "" if nrm <= b * (1 + 1e-8) else "   VIOLATION"
            violations += bool(flag)
            print(f"  {name:<18} bound {b:.12g}   margin {nrm - b:+.6g}{flag}")
    if args.out:
        _write(args.out, json.dumps({"potential": v.to_dict(), "p_values": [_exp_label(p) for p in p_values],
                                     "points": rows, "violations": violations}, indent=1) + "\n")
    return EXIT_OK if violations == 0 else EXIT_VIOLATION


# --------------------------------------------------------------------------
# parser
# --------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="jacobi-enclosures", description=__doc__.split("\n\n")[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    e = sub.add_parser("enclosure", help="sample region boundaries (csv, json or svg)")
    e.add_argument("--kind", choices=("l1", "lp", "interp"), required=True)
    e.add_argument("--norm", type=_real_list, required=True, help="Q, or a comma list of Q values")
    e.add_argument("--q", type=_real_list, help="Lp exponent q (comma list allowed)")
    e.add_argument("--p", type=_real_list, help="Interp exponent p (comma list allowed, inf ok)")
    e.add_argument("--samples", type=int, default=256)
    e.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    e.add_argument("--out", help="output file (directory for several CSV curves); stdout by default")
    e.set_defaults(func=cmd_enclosure)

    s = sub.add_parser("spectrum", help="discrete eigenvalues of a potential file")
    s.add_argument("--potential", required=True, help='JSON: {"offset": n, "values": [[re, im], ...]}')
    s.add_argument("--method", choices=("finite-section", "wronskian", "both"), default="both")
    s.add_argument("--N", type=int, help="finite-section size (default chosen from the support and delta)")
    s.add_argument("--grid", type=int, default=256, help="angular nodes of the Wronskian scan")
    s.add_argument("--delta", type=float, default=DEFAULT_DELTA, help="band exclusion distance")
    s.add_argument("--out")
    s.set_defaults(func=cmd_spectrum)

    v = sub.add_parser("verify", help="containment check on a random ensemble")
    v.add_argument("--seed", type=int, default=7)
    v.add_argument("--count", type=int, default=500)
    v.add_argument("--support", type=int, default=21)
    v.add_argument("--cap", type=float, default=3.0)
    v.add_argument("--p", type=_real_list, default=list(DEFAULT_P_VALUES))
    v.add_argument("--delta", type=float, default=DEFAULT_DELTA)
    v.add_argument("--N", type=int)
    v.add_argument("--grid", type=int, default=256)
    v.add_argument("--workers", type=int, help=f"worker processes (default: ${WORKERS_ENV} or 1)")
    v.add_argument("--out", default="verify_report.json")
    v.set_defaults(func=cmd_verify)

    h = sub.add_parser("sharpness", help="delta-potential sweep along the L1 boundary")
    h.add_argument("--norm", type=_real_list, required=True)
    h.add_argument("--count", type=int, default=100)
    h.add_argument("--grid", type=int, default=256)
    h.add_argument("--out", default="sharpness_report.json")
    h.set_defaults(func=cmd_sharpness)

    b = sub.add_parser("bs-norm", help="Birman–Schwinger norm against its bounds")
    b.add_argument("--potential", required=True)
    b.add_argument("--lambda", dest="lambda_", type=_complex, action="append", required=True,
                   help="spectral point re,im (repeatable)")
    b.add_argument("--p", type=_real_list, default=list(DEFAULT_P_VALUES))
    b.add_argument("--audit", action="store_true", help="emit a full audit report instead of a table")
    b.add_argument("--out")
    b.set_defaults(func=cmd_bs_norm)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    echo = {k: v for k, v in vars(args).items() if k != "func"}
    print("# config " + json.dumps(echo, default=str, sort_keys=True), file=sys.stderr)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, BracketError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
