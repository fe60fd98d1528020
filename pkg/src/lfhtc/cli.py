"""Command-line front end.

Exit status: 0 on success, 1 on a negative mathematical verdict (not
identifiable, infinite-to-one, UNSAT, invalid certificate), 2 on bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import census as census_mod
from .cnf import CnfBudgetError, brute_force_sat, parse_dimacs, sat_via_lfhtc
from .criterion import Certificate, htc_identifiable, lfhtc_identifiable, verify_certificate
from .dimension import dim_report, mixed_trivially_infinite
from .graph import GraphFormatError, LatentFactorGraph, MixedGraph, latent_projection, parse_any_graph, parse_graph
from .identify import DegenerateCovarianceError, recover_all
from .linalg import RMatrix
from .model import sample_params, sigma


class InputError(Exception):
    """Bad command-line input; reported with exit status 2."""


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror}") from None


def _load_graph(path: str, mixed_ok: bool = False) -> LatentFactorGraph | MixedGraph:
    text = _read(path)
    try:
        return parse_any_graph(text) if mixed_ok else parse_graph(text)
    except GraphFormatError as exc:
        raise InputError(f"{path}: {exc}") from None


def _load_json(path: str):
    try:
        return json.loads(_read(path))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def _dump(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _write_files(out_dir: str, files: dict[str, object]) -> None:
    d = Path(out_dir)
    d.mkdir(parents=True, exist_ok=True)
    for name, obj in files.items():
        (d / name).write_text(_dump(obj))


def cmd_check(args) -> int:
    g = _load_graph(args.graph, mixed_ok=True)
    if args.verify_cert:
        if not isinstance(g, LatentFactorGraph):
            raise InputError("--verify-cert expects a latent-factor graph")
        try:
            cert = Certificate.from_json(_load_json(args.verify_cert))
        except ValueError as exc:
            raise InputError(f"{args.verify_cert}: {exc}") from None
        problems = verify_certificate(g, cert)
        covered = set(cert.order) == set(g.observed)
        _emit(_dump({"valid": not problems, "covers_all": covered, "problems": problems}), args.out)
        return 0 if not problems else 1
    if isinstance(g, MixedGraph):
        ok, cert = htc_identifiable(g)
        result = {"criterion": "htc", "identifiable": ok, "certificate": cert.to_json()}
    else:
        if args.k < 0:
            raise InputError("--k must be nonnegative")
        ok, cert = lfhtc_identifiable(g, args.k)
        result = {"criterion": "lfhtc", "k": args.k, "identifiable": ok, "certificate": cert.to_json()}
    _emit(_dump(result), args.out)
    return 0 if ok else 1


def cmd_identify(args) -> int:
    g = _load_graph(args.graph)
    try:
        sig = RMatrix.from_json(_load_json(args.sigma))
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise InputError(f"{args.sigma}: {exc}") from None
    if sig.shape != (g.d, g.d) or not sig.is_symmetric():
        raise InputError(f"{args.sigma}: expected a symmetric {g.d}x{g.d} matrix")
    ok, cert = lfhtc_identifiable(g, args.k)
    if not ok:
        sys.stderr.write("graph is not identifiable by the criterion; nothing recovered\n")
        sys.stdout.write(_dump({"identifiable": False, "certificate": cert.to_json()}))
        return 1
    try:
        lam, om = recover_all(g, cert, sig)
    except DegenerateCovarianceError as exc:
        sys.stderr.write(f"{exc}\n")
        return 1
    files = {"lambda.json": lam.to_json(), "omega.json": om.to_json(), "certificate.json": cert.to_json()}
    if args.out_dir:
        _write_files(args.out_dir, files)
    else:
        sys.stdout.write(_dump({"Lambda": lam.to_json(), "Omega": om.to_json(), "certificate": cert.to_json()}))
    return 0


def cmd_simulate(args) -> int:
    g = _load_graph(args.graph)
    p = sample_params(g, args.seed, args.mode)
    sig = sigma(p)
    if args.out_dir:
        _write_files(args.out_dir, {"params.json": p.to_json(), "sigma.json": sig.to_json()})
    else:
        sys.stdout.write(_dump({"params": p.to_json(), "sigma": sig.to_json()}))
    return 0


def cmd_project(args) -> int:
    g = _load_graph(args.graph)
    _emit(_dump(latent_projection(g).to_json()), args.out)
    return 0


def cmd_dim(args) -> int:
    g = _load_graph(args.graph, mixed_ok=True)
    if args.trials < 1:
        raise InputError("--trials must be at least 1")
    if isinstance(g, MixedGraph):
        infinite = mixed_trivially_infinite(g)
        _emit(_dump({"d": g.d, "parameters": len(g.directed) + g.d + len(g.bidirected),
                     "moments": g.d * (g.d + 1) // 2, "trivially_infinite": infinite}), args.out)
        return 1 if infinite else 0
    rep = dim_report(g, args.seed, args.trials)
    _emit(_dump(rep.to_json()), args.out)
    return 0 if rep.verdict == "finite-to-one" else 1


def cmd_sat(args) -> int:
    try:
        f = parse_dimacs(_read(args.cnf))
    except ValueError as exc:
        raise InputError(f"{args.cnf}: {exc}") from None
    try:
        sat = brute_force_sat(f) if args.brute_force else sat_via_lfhtc(f)
    except CnfBudgetError as exc:
        raise InputError(str(exc)) from None
    sys.stdout.write("SAT\n" if sat else "UNSAT\n")
    return 0 if sat else 1


def cmd_census(args) -> int:
    if args.pattern in census_mod.PATTERNS:
        pattern = census_mod.PATTERNS[args.pattern]
    elif not Path(args.pattern).exists():
        names = ", ".join(census_mod.PATTERNS)
        raise InputError(f"unknown pattern {args.pattern!r}: expected one of {names} or a pattern JSON file")
    else:
        try:
            pattern = census_mod.LatentPattern.from_json(_read(args.pattern))
        except (ValueError, KeyError, TypeError) as exc:
            raise InputError(f"{args.pattern}: not a pattern name or pattern file ({exc})") from None
    jobs = args.jobs if args.jobs is not None else census_mod.default_jobs()
    try:
        rows = census_mod.census(pattern, args.max_edges, args.k, args.htc, args.trials, jobs)
    except census_mod.BudgetError as exc:
        raise InputError(str(exc)) from None
    _emit(census_mod.rows_to_csv(rows), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lfhtc", description="Identifiability of linear SEMs with latent factors.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="run the criterion and print verdict and certificate")
    p.add_argument("graph")
    p.add_argument("--k", type=int, default=2, help="largest latent set searched (default 2)")
    p.add_argument("--verify-cert", metavar="CERT", help="replay a certificate instead of searching")
    p.add_argument("--out", help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("identify", help="recover Lambda and Omega from a covariance matrix")
    p.add_argument("graph")
    p.add_argument("sigma")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--out-dir", help="write lambda.json, omega.json, certificate.json here")
    p.set_defaults(func=cmd_identify)

    p = sub.add_parser("simulate", help="sample parameters and the implied covariance")
    p.add_argument("graph")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=["primes", "small-rationals"], default="primes")
    p.add_argument("--out-dir", help="write params.json and sigma.json here")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("project", help="latent projection to a mixed graph")
    p.add_argument("graph")
    p.add_argument("--out")
    p.set_defaults(func=cmd_project)

    p = sub.add_parser("dim", help="Jacobian-rank dimension report")
    p.add_argument("graph")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--out")
    p.set_defaults(func=cmd_dim)

    p = sub.add_parser("sat", help="decide a DIMACS CNF formula through the reduction")
    p.add_argument("cnf")
    p.add_argument("--brute-force", action="store_true", help="use exhaustive assignment search instead")
    p.set_defaults(func=cmd_sat)

    p = sub.add_parser("census", help="classify unlabeled DAGs with a latent pattern; CSV output")
    p.add_argument("--pattern", default="global6", help="global6, twofactor6, or a pattern JSON file")
    p.add_argument("--max-edges", type=int, default=9)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--htc", action="store_true", help="add the HTC column for the latent projection")
    p.add_argument("--trials", type=int, default=3)
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default $LFHTC_JOBS or 1)")
    p.add_argument("--out")
    p.set_defaults(func=cmd_census)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) if exc.code in (0, None) else 2
    try:
        return args.func(args)
    except InputError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


def run(argv: list[str] | None = None) -> int:
    return main(argv)


if __name__ == "__main__":
    sys.exit(main())
