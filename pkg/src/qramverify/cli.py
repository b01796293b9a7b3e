"""Command line driver for the verification pipeline.

Three subcommands cover the workflow: `verify` runs a program against
its specification through the SMT backend, `gen-spec` writes a blank
specification skeleton next to a program, and `simulate` executes a
program on concrete oracle tables and inputs.  Exit codes follow the
verdict: 0 Verified, 1 Refuted, 2 usage or internal error, 3 Unknown
(including solver timeout), 4 Vacuous.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from .errors import VerifierError
from .lowering import lower_function
from .obligation_gen import gen_program
from .qram_model import dump_program, validate_program
from .silq_frontend import parse_silq, type_check
from .silspeq_frontend import encode_spec, generate_skeleton, parse_speq
from .sim_oracle import run_all_branches
from .smt_backend import SolverConfig, Verdict, check, default_solver_path

USAGE_ERROR = 2


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return USAGE_ERROR


def _load_ast(path: Path):
    source = path.read_text()
    return type_check(parse_silq(source))


def _pick_function(ast, requested: str | None) -> str:
    names = [fn.name for fn in ast.functions]
    if requested is not None:
        if requested not in names:
            raise VerifierError(f"no function named {requested!r}")
        return requested
    if len(names) != 1:
        raise VerifierError(
            f"file defines {len(names)} functions; pick one with --function"
        )
    return names[0]


def _parse_table(text: str) -> tuple[str, tuple[int, ...]]:
    name, _, body = text.partition("=")
    if not body:
        raise VerifierError(f"--oracle expects NAME=v0,v1,...: {text!r}")
    try:
        cells = tuple(int(v) for v in body.split(","))
    except ValueError:
        raise VerifierError(f"oracle cells must be integers: {text!r}")
    if len(cells) & (len(cells) - 1) or not cells:
        raise VerifierError(
            f"oracle {name!r} needs a power-of-two cell count, got {len(cells)}"
        )
    return name, cells


def _parse_input(text: str) -> tuple[str, int]:
    name, _, body = text.partition("=")
    if not body:
        raise VerifierError(f"--input expects NAME=VALUE: {text!r}")
    try:
        return name, int(body)
    except ValueError:
        raise VerifierError(f"input value must be an integer: {text!r}")


def _report(verdict: Verdict, setup_extra: float, as_json: bool) -> None:
    setup = verdict.setup_seconds + setup_extra
    if as_json:
        payload = {
            "status": verdict.status,
            "exit_code": verdict.exit_code,
            "setup_seconds": round(setup, 6),
            "verification_seconds": round(verdict.solve_seconds, 6),
            "counterexample": verdict.decoded or None,
            "reason": verdict.reason,
        }
        print(json.dumps(payload))
        return
    print(verdict.status)
    if verdict.status == "Refuted" and verdict.decoded:
        print("counterexample:")
        for group, label in (
            ("measured", "measured"),
            ("oracles", "oracle"),
            ("classical", "classical"),
        ):
            for name, value in verdict.decoded.get(group, {}).items():
                print(f"  {label} {name} = {value}")
    if verdict.reason:
        print(f"note: {verdict.reason}")
    print(f"setup time:        {setup:.3f} s")
    print(f"verification time: {verdict.solve_seconds:.3f} s")


def _verify_one(
    prog_path: Path,
    spec_path: Path,
    args: argparse.Namespace,
    as_json: bool,
) -> Verdict | int:
    """Run the pipeline on one program/spec pair.

    Returns the Verdict, or an exit code for non-verdict failures.
    """
    t0 = time.monotonic()
    if not prog_path.exists():
        return _fail(f"no such file: {prog_path}")
    ast = _load_ast(prog_path)
    if not spec_path.exists():
        fname = _pick_function(ast, getattr(args, "function", None))
        spec_path.write_text(generate_skeleton(ast, fname))
        print(f"note: wrote blank specification {spec_path}", file=sys.stderr)
    spec = parse_speq(spec_path.read_text())
    program = lower_function(ast, spec.function_name, fuse=args.fuse)
    problems = validate_program(program)
    if problems:
        return _fail("; ".join(v.render() for v in problems))
    if args.dump_ir:
        Path(args.dump_ir).write_text(dump_program(program) + "\n")
    prog, st, ret_binding = gen_program(program, spec.flag)
    pre, post = encode_spec(spec, ret_binding, st)
    cfg = SolverConfig(
        executable=args.solver or default_solver_path(),
        timeout=args.timeout,
    )
    setup_extra = time.monotonic() - t0
    verdict = check(prog, pre, post, st, cfg, emit_path=args.emit_smt)
    _report(verdict, setup_extra, as_json)
    return verdict


def _cmd_verify(args: argparse.Namespace) -> int:
    if args.all:
        if args.prog or args.spec:
            return _fail("--all takes a directory instead of file arguments")
        root = Path(args.all)
        pairs = sorted(
            (p, p.with_suffix(".speq"))
            for p in root.glob("*.slq")
            if p.with_suffix(".speq").exists()
        )
        if not pairs:
            return _fail(f"no program/spec pairs under {root}")
        worst = 0
        for prog_path, spec_path in pairs:
            print(f"== {prog_path.name} ==")
            outcome = _verify_one(prog_path, spec_path, args, args.json)
            if isinstance(outcome, int):
                return outcome
            if outcome.exit_code != 0:
                worst = 1
        return worst
    if not args.prog or not args.spec:
        return _fail("verify needs PROG and SPEC (or --all DIR)")
    outcome = _verify_one(Path(args.prog), Path(args.spec), args, args.json)
    if isinstance(outcome, int):
        return outcome
    return outcome.exit_code


def _cmd_gen_spec(args: argparse.Namespace) -> int:
    prog_path = Path(args.prog)
    if not prog_path.exists():
        return _fail(f"no such file: {prog_path}")
    out_path = prog_path.with_suffix(".speq")
    if out_path.exists():
        return _fail(f"refusing to overwrite existing {out_path}")
    ast = _load_ast(prog_path)
    fname = _pick_function(ast, args.function)
    out_path.write_text(generate_skeleton(ast, fname))
    print(f"wrote {out_path}")
    return 0


def _cmd_simulate(args: argparse.Namespace) -> int:
    prog_path = Path(args.prog)
    if not prog_path.exists():
        return _fail(f"no such file: {prog_path}")
    ast = _load_ast(prog_path)
    fname = _pick_function(ast, args.function)
    program = lower_function(ast, fname, fuse=args.fuse)
    tables = dict(_parse_table(t) for t in args.oracle or [])
    inputs = dict(_parse_input(t) for t in args.input or [])
    branches = run_all_branches(program, oracle_tables=tables, inputs=inputs)
    for prob, _, ret in branches:
        print(f"p={prob:.6g} ret={ret}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qramverify",
        description="verify hybrid quantum/classical programs against "
        "measurement-flag specifications",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="check a program against a spec")
    p_verify.add_argument("prog", nargs="?", help="program file (.slq)")
    p_verify.add_argument("spec", nargs="?", help="specification file (.speq)")
    p_verify.add_argument("--all", metavar="DIR",
                          help="verify every .slq/.speq pair in a directory")
    p_verify.add_argument("--solver", metavar="PATH",
                          help="SMT solver executable (default: "
                          "QRAMVERIFY_SOLVER, else bundled)")
    p_verify.add_argument("--timeout", type=float, default=300.0,
                          metavar="S", help="per-query solver timeout")
    p_verify.add_argument("--emit-smt", metavar="FILE",
                          help="write the refutation query script")
    p_verify.add_argument("--dump-ir", metavar="FILE",
                          help="write the lowered process model")
    p_verify.add_argument("--fuse", action="store_true",
                          help="fuse adjacent single-variable gates")
    p_verify.add_argument("--function", metavar="NAME",
                          help="function to specify when generating a "
                          "missing spec")
    p_verify.add_argument("--json", action="store_true",
                          help="machine-readable verdict on stdout")
    p_verify.set_defaults(func=_cmd_verify)

    p_gen = sub.add_parser("gen-spec", help="write a blank specification")
    p_gen.add_argument("prog", help="program file (.slq)")
    p_gen.add_argument("--function", metavar="NAME",
                       help="function to specify (default: the only one)")
    p_gen.set_defaults(func=_cmd_gen_spec)

    p_sim = sub.add_parser("simulate", help="run on concrete oracles/inputs")
    p_sim.add_argument("prog", help="program file (.slq)")
    p_sim.add_argument("--oracle", action="append", metavar="NAME=v0,v1,...",
                       help="oracle table (repeatable)")
    p_sim.add_argument("--input", action="append", metavar="NAME=VALUE",
                       help="classical input (repeatable)")
    p_sim.add_argument("--function", metavar="NAME",
                       help="function to run (default: the only one)")
    p_sim.add_argument("--fuse", action="store_true",
                       help="fuse adjacent single-variable gates")
    p_sim.set_defaults(func=_cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return USAGE_ERROR if e.code not in (0, None) else 0
    try:
        return args.func(args)
    except VerifierError as e:
        return _fail(str(e))
    except OSError as e:
        return _fail(str(e))


if __name__ == "__main__":
    sys.exit(main())
