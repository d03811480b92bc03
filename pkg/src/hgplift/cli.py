"""Command-line entry point: ``hgplift <verb> [options]``.

Reproducing the P=64 lift of HGP(B15) from scratch::

    hgplift hgp --base w2 --out run/base
    hgplift lift-search --base b15t --P 64 --seed 1 --out run/search
    hgplift lift-walk --base b15t --solution run/search/solution.json --out run/walk
    hgplift verify --hx run/walk/Hx_rows_lift.json --hz run/walk/Hz_rows_lift.json

Exit codes: 0 success, 1 internal error, 2 bad options, 3 missing or
malformed input, 4 verification failure, 5 search budget exhausted or
infeasible.  Errors are also written to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from collections.abc import Sequence
from pathlib import Path
from typing import Any

from hgplift import basegen, gf2, hgp, lift, montecarlo, schemas, tanner
from hgplift.hgp import CssCode

ENV_OUT = "HGPLIFT_OUT"

EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_VERIFY = 4
EXIT_SEARCH = 5


class CliError(Exception):
    def __init__(self, kind: str, message: str, code: int, details: Any = None) -> None:
        super().__init__(message)
        self.kind = kind
        self.code = code
        self.details = details


def _out_dir(args: argparse.Namespace, verb: str) -> Path:
    if args.out:
        return Path(args.out)
    return Path(os.environ.get(ENV_OUT, "hgplift_out")) / verb


def _emit(doc: Any, path: Path, schema: str | None = None, indent: int | None = 2) -> Path:
    if schema:
        # validate the serialized form: integer dict keys become strings on disk
        schemas.validate(json.loads(json.dumps(doc)), schema)
    return lift.write_json(doc, path, indent)


def _base(name: str) -> basegen.BaseMatrix:
    try:
        return basegen.named_base(name)
    except KeyError as exc:
        raise CliError("unknown_base", str(exc.args[0]), EXIT_USAGE) from None


def _load_matrix(path: str) -> gf2.BitMatrix:
    try:
        return gf2.load_matrix(path)
    except FileNotFoundError:
        raise CliError("missing_input", f"no such file: {path}", EXIT_INPUT) from None
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError("malformed_input", f"{path}: {exc}", EXIT_INPUT) from None


def _code_from_args(args: argparse.Namespace) -> CssCode:
    if getattr(args, "base", None):
        return hgp.build_hgp(_base(args.base))
    if getattr(args, "hx", None) and getattr(args, "hz", None):
        hx, hz = _load_matrix(args.hx), _load_matrix(args.hz)
        n = max(hx.n_cols, hz.n_cols)
        return CssCode(gf2.BitMatrix(hx.n_rows, n, hx.rows), gf2.BitMatrix(hz.n_rows, n, hz.rows), "external")
    raise CliError("bad_options", "give --base NAME or both --hx and --hz", EXIT_USAGE)


def _load_tables(x: str, z: str, P: int) -> lift.ShiftAssignment:
    try:
        return lift.load_shift_tables(x, z, P)
    except FileNotFoundError as exc:
        raise CliError("missing_input", str(exc), EXIT_INPUT) from None
    except lift.ShiftTableError as exc:
        raise CliError("malformed_input", str(exc), EXIT_INPUT) from None


def _write_lift_outputs(
    out: Path, base: CssCode, a: lift.ShiftAssignment, search: dict, stats: dict, score: int
) -> dict[str, str]:
    lifted = lift.build_lifted_matrices(base, a)
    audit = lift.audit_lift(lifted, constraint_score=score)
    paths = {
        "solution": str(out / "solution.json"),
        "hx_rows_lift": str(out / "Hx_rows_lift.json"),
        "hz_rows_lift": str(out / "Hz_rows_lift.json"),
    }
    _emit(lift.solution_document(base, a, search, stats, score=score), Path(paths["solution"]), "solution")
    gf2.save_matrix(lifted.hx, paths["hx_rows_lift"])
    gf2.save_matrix(lifted.hz, paths["hz_rows_lift"])
    lift.save_shift_tables(a, out)
    doc = lift.audit_document(audit, stats, paths, str(out))
    _emit(doc, out / "audit.json", "audit")
    if not audit.css_orthogonality_ok:
        raise CliError("verification_failed", "lifted matrices are not CSS-orthogonal", EXIT_VERIFY, audit.first_bad_pair)
    return {**paths, "audit": str(out / "audit.json")}


# --- verbs --------------------------------------------------------------------

def cmd_construct(args: argparse.Namespace) -> dict[str, Any]:
    if args.search:
        s, w = args.search
        try:
            b = basegen.search_regular_base(s, w, args.corank, seed=args.seed, budget=args.budget)
        except basegen.SearchFailure as exc:
            raise CliError("search_failed", str(exc), EXIT_SEARCH, {"best_score": exc.best_score}) from None
    else:
        b = _base(args.base or "b15")
    out = _out_dir(args, "construct")
    paths = basegen.save_base(b, out)
    with open(paths["report"], encoding="utf-8") as fh:
        schemas.validate(json.load(fh), "base_report")
    if args.png:
        basegen.save_bitmap_image(b.matrix, out / f"{b.label}.png")
        paths["png"] = str(out / f"{b.label}.png")
    return paths


def cmd_hgp(args: argparse.Namespace) -> dict[str, Any]:
    b = _base(args.base)
    code = hgp.build_hgp(b)
    params = hgp.hgp_params(b, with_distance=not args.no_distance)
    row = params.as_row()
    row["label"] = b.label
    row["base_girth"] = tanner.tanner_girth_upto(b.matrix, 8).girth
    out = _out_dir(args, "hgp")
    paths = hgp.save_code(code, out)
    _emit(row, out / "params.json", "code_params")
    print(json.dumps(row))
    return {**paths, "params": str(out / "params.json")}


def cmd_analyze(args: argparse.Namespace) -> dict[str, Any]:
    if args.base:
        m = _base(args.base).matrix
        doc = {"basic": tanner.basic_stats(m), "tanner_graph": tanner.tanner_graph_section(m, 10)}
    elif args.hx and args.hz:
        return cmd_verify(args)
    elif args.hx:
        m = _load_matrix(args.hx)
        doc = {"basic": tanner.basic_stats(m), "tanner_graph": tanner.tanner_graph_section(m, 10)}
    else:
        raise CliError("bad_options", "give --base NAME, --hx FILE, or --hx/--hz", EXIT_USAGE)
    out = _out_dir(args, "analyze")
    _emit(doc, out / "analysis.json")
    return {"analysis": str(out / "analysis.json")}


def cmd_verify(args: argparse.Namespace) -> dict[str, Any]:
    if not (args.hx and args.hz):
        raise CliError("bad_options", "verify needs --hx and --hz", EXIT_USAGE)
    hx, hz = _load_matrix(args.hx), _load_matrix(args.hz)
    doc = tanner.verify_report(hx, hz, {"hx": args.hx, "hz": args.hz})
    out = _out_dir(args, "verify")
    path = _emit(doc, out / "tanner_verify.json", "verify_report")
    print(json.dumps(doc["summary"]))
    if not doc["summary"]["css_orthogonality_ok"]:
        raise CliError(
            "verification_failed", "CSS orthogonality violated", EXIT_VERIFY,
            doc["css_orthogonality_graph_level"]["first_bad_pair"],
        )
    return {"report": str(path)}


def cmd_lift_search(args: argparse.Namespace) -> dict[str, Any]:
    code = _code_from_args(args)
    system = lift.ConstraintSystem.build(code)
    try:
        res = lift.find_feasible_lift(code, args.P, seed=args.seed, budget=args.budget, system=system)
    except lift.LiftInfeasible as exc:
        raise CliError("search_failed", str(exc), EXIT_SEARCH, {"best_score": exc.best_score}) from None
    search = {
        "method": "min_conflicts_over_orthogonality_kernel",
        "seed": args.seed,
        "budget": args.budget,
        "steps": res.steps,
        "free_parameters": res.free_dim,
    }
    stats = {
        "zero_eqs": len(system.zero_eqs),
        "unavoidable_8cycles": system.unavoidable,
        "constraints_total": len(system.constraints),
        "counts_by_type": lift.counts_by_type(system.constraints),
    }
    return _write_lift_outputs(_out_dir(args, "lift-search"), code, res.assignment, search, stats, res.score)


def _start_assignment(args: argparse.Namespace, code: CssCode) -> lift.ShiftAssignment:
    if args.solution:
        try:
            with open(args.solution, encoding="utf-8") as fh:
                doc = json.load(fh)
        except FileNotFoundError:
            raise CliError("missing_input", f"no such file: {args.solution}", EXIT_INPUT) from None
        return lift.assignment_from_solution(doc, code)
    if args.shift_x and args.shift_z:
        return _load_tables(args.shift_x, args.shift_z, args.P)
    if args.supplementary:
        return lift.packaged_b15_p64()
    raise CliError("bad_options", "give --solution, --shift-x/--shift-z, or --supplementary", EXIT_USAGE)


def cmd_lift_walk(args: argparse.Namespace) -> dict[str, Any]:
    if args.supplementary and not (args.base or args.hx):
        start = lift.packaged_b15_p64()
        code = lift.code_from_shift_tables(start)
    else:
        code = _code_from_args(args)
        start = _start_assignment(args, code)
    system = lift.ConstraintSystem.build(code)
    params = lift.WalkParams(args.seed_vars, args.radius, args.target_accepts, args.max_proposals, args.seed)
    try:
        res = lift.feasible_random_walk(start, system, params)
    except lift.LiftInfeasible as exc:
        raise CliError("infeasible_start", str(exc), EXIT_SEARCH, {"best_score": exc.best_score}) from None
    search = {
        "method": "feasible_random_walk_in_orthogonality_kernel",
        "start_solution": args.solution or args.shift_x or "packaged",
        "seed": args.seed,
        "target_accepts": args.target_accepts,
        "max_proposals": args.max_proposals,
        "seed_vars": args.seed_vars,
        "radius": args.radius,
    }
    return _write_lift_outputs(_out_dir(args, "lift-walk"), code, res.assignment, search, res.stats, 0)


def cmd_lift_build(args: argparse.Namespace) -> dict[str, Any]:
    if args.supplementary:
        a = lift.packaged_b15_p64()
    elif args.shift_x and args.shift_z:
        a = _load_tables(args.shift_x, args.shift_z, args.P)
    else:
        raise CliError("bad_options", "give --shift-x/--shift-z or --supplementary", EXIT_USAGE)
    code = _code_from_args(args) if (args.base or args.hx) else lift.code_from_shift_tables(a)
    if not a.covers(code):
        raise CliError("malformed_input", "shift tables do not cover the code's nonzero entries", EXIT_INPUT)
    system = lift.ConstraintSystem.build(code)
    w = system.vi.vector(a)
    if not system.equations_ok(w, a.P):
        raise CliError("verification_failed", "shift assignment violates the zero congruences", EXIT_VERIFY)
    score = system.score(w, a.P)
    stats = {
        "zero_eqs": len(system.zero_eqs),
        "unavoidable_8cycles": system.unavoidable,
        "constraints_total": len(system.constraints),
        "counts_by_type": lift.counts_by_type(system.constraints),
    }
    search = {"method": "loaded_shift_tables", "seed": None}
    return _write_lift_outputs(_out_dir(args, "lift-build"), code, a, search, stats, score)


def _sim_code(args: argparse.Namespace) -> tuple[CssCode, str]:
    if args.supplementary:
        a = lift.packaged_b15_p64()
        return lift.build_lifted_matrices(lift.code_from_shift_tables(a), a), "B15-P64-supplementary"
    if args.shift_x and args.shift_z:
        a = _load_tables(args.shift_x, args.shift_z, args.P)
        base = _code_from_args(args) if (args.base or args.hx) else lift.code_from_shift_tables(a)
        return lift.build_lifted_matrices(base, a), f"lift:{args.shift_x}"
    code = _code_from_args(args)
    return code, f"hgp:{args.base}" if args.base else f"files:{args.hx}"


def cmd_decode_sim(args: argparse.Namespace) -> dict[str, Any]:
    code, code_id = _sim_code(args)
    ps = args.p or [0.05]
    for p in ps:
        if not 0 <= p < 1:
            raise CliError("bad_options", f"p={p} outside [0, 1)", EXIT_USAGE)
    cfg = montecarlo.RunConfig(
        code_id=code_id, p_values=ps, trials=args.trials, seed=args.seed, workers=args.workers,
        max_failures=args.max_failures, decoder={"max_iterations": args.max_iterations},
    )
    points = montecarlo.run_config(code, cfg)
    out = _out_dir(args, "decode-sim")
    paths = montecarlo.emit_report(points, out, cfg)
    with open(paths["json"], encoding="utf-8") as fh:
        schemas.validate(json.load(fh), "fer_results")
    for pt in points:
        print(json.dumps(pt.to_json()))
    return {k: str(v) for k, v in paths.items()}


def cmd_report(args: argparse.Namespace) -> dict[str, Any]:
    try:
        points = montecarlo.read_csv(args.csv)
    except FileNotFoundError:
        raise CliError("missing_input", f"no such file: {args.csv}", EXIT_INPUT) from None
    except (ValueError, KeyError) as exc:
        raise CliError("malformed_input", f"{args.csv}: {exc}", EXIT_INPUT) from None
    if not points:
        raise CliError("malformed_input", f"{args.csv}: no data rows", EXIT_INPUT)
    out = _out_dir(args, "report")
    paths = montecarlo.emit_report(points, out, title=args.title)
    return {k: str(v) for k, v in paths.items()}


# --- parser --------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        raise CliError("usage", message, EXIT_USAGE)


def _code_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--base", help="named base matrix (b7, b13, b15/w2, b15t, b30, b40/w3)")
    p.add_argument("--hx", help="H_X rows JSON")
    p.add_argument("--hz", help="H_Z rows JSON")


def _lift_opts(p: argparse.ArgumentParser) -> None:
    p.add_argument("--shift-x", help="shift table CSV for H_X")
    p.add_argument("--shift-z", help="shift table CSV for H_Z")
    p.add_argument("--supplementary", action="store_true", help="use the packaged P=64 B15 tables")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="hgplift", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="verb", required=True, parser_class=_Parser)

    def verb(name: str, help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--out", help=f"output directory (default ${ENV_OUT}/{name})")
        p.add_argument("--seed", type=int, default=0)
        return p

    p = verb("construct", "emit a base matrix and its report")
    p.add_argument("--base", help="named base matrix")
    p.add_argument("--search", type=int, nargs=2, metavar=("S", "W"), help="randomized regular search")
    p.add_argument("--corank", type=int, default=0, help="target corank for --search")
    p.add_argument("--budget", type=int, default=200_000)
    p.add_argument("--png", action="store_true", help="also write a bitmap image")
    p.set_defaults(func=cmd_construct)

    p = verb("hgp", "hypergraph product of a base matrix")
    p.add_argument("--base", required=True)
    p.add_argument("--no-distance", action="store_true", help="skip kernel-span distance enumeration")
    p.set_defaults(func=cmd_hgp)

    p = verb("analyze", "Tanner-graph analysis of one matrix or a pair")
    _code_opts(p)
    p.set_defaults(func=cmd_analyze)

    p = verb("verify", "Tanner/CSS verification report of a matrix pair")
    p.add_argument("--hx", required=True)
    p.add_argument("--hz", required=True)
    p.set_defaults(func=cmd_verify)

    p = verb("lift-search", "find a feasible shift assignment")
    _code_opts(p)
    p.add_argument("--P", type=int, default=64)
    p.add_argument("--budget", type=int, default=200_000)
    p.set_defaults(func=cmd_lift_search)

    p = verb("lift-walk", "random feasible walk from a shift assignment")
    _code_opts(p)
    _lift_opts(p)
    p.add_argument("--solution", help="start solution.json")
    p.add_argument("--P", type=int, default=64)
    p.add_argument("--seed-vars", type=int, default=24)
    p.add_argument("--radius", type=int, default=10)
    p.add_argument("--target-accepts", type=int, default=250)
    p.add_argument("--max-proposals", type=int, default=10_000)
    p.set_defaults(func=cmd_lift_walk, seed=642001)

    p = verb("lift-build", "lift a code from shift tables and audit it")
    _code_opts(p)
    _lift_opts(p)
    p.add_argument("--P", type=int, default=64)
    p.set_defaults(func=cmd_lift_build)

    p = verb("decode-sim", "BP + OSD-lite frame-error-rate simulation")
    _code_opts(p)
    _lift_opts(p)
    p.add_argument("--P", type=int, default=64)
    p.add_argument("--p", type=float, action="append", help="depolarizing probability (repeatable)")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--max-failures", type=int, default=None)
    p.add_argument("--max-iterations", type=int, default=100)
    p.set_defaults(func=cmd_decode_sim)

    p = verb("report", "re-render a results CSV")
    p.add_argument("--csv", required=True)
    p.add_argument("--title")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        result = args.func(args)
        print(json.dumps({"ok": True, "outputs": result}))
        return EXIT_OK
    except CliError as exc:
        record = {"error": exc.kind, "message": str(exc), "exit_code": exc.code}
        if exc.details is not None:
            record["details"] = exc.details
        print(json.dumps(record), file=sys.stderr)
        return exc.code
    except Exception as exc:  # noqa: BLE001 - surfaced as a machine-readable record
        record = {"error": type(exc).__name__, "message": str(exc), "exit_code": EXIT_INTERNAL}
        print(json.dumps(record), file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
