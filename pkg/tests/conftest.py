"""Shared fixtures: corpus access and a cached verification pipeline."""

from __future__ import annotations

from pathlib import Path

import pytest

from qramverify.lowering import lower_function
from qramverify.obligation_gen import gen_program
from qramverify.silq_frontend import parse_silq, type_check
from qramverify.silspeq_frontend import encode_spec, parse_speq
from qramverify.smt_backend import SolverConfig, check, default_solver_path

CORPUS = Path(__file__).resolve().parent.parent / "corpus"


def corpus_text(name: str) -> str:
    return (CORPUS / name).read_text()


def load_program(name: str, fname: str, fuse: bool = False):
    """Parse, check, and lower one corpus program."""
    ast = type_check(parse_silq(corpus_text(name)))
    return lower_function(ast, fname, fuse=fuse)


def run_pipeline(prog_name: str, spec_text: str, fuse: bool = False,
                 timeout: float = 300.0):
    """Full source-to-verdict run; spec text is given inline."""
    spec = parse_speq(spec_text)
    program = load_program(prog_name, spec.function_name, fuse=fuse)
    prog, st, ret_binding = gen_program(program, spec.flag)
    pre, post = encode_spec(spec, ret_binding, st)
    cfg = SolverConfig(executable=default_solver_path(), timeout=timeout)
    return check(prog, pre, post, st, cfg)


@pytest.fixture(scope="session")
def verdict_cache():
    """Memoises solver verdicts across test modules.

    Keyed by (program file, spec text, fuse); several acceptance
    criteria and the oracle-equivalence suite touch the same pairs, and
    each solver run costs seconds.
    """
    cache: dict[tuple[str, str, bool], object] = {}

    def run(prog_name: str, spec_text: str, fuse: bool = False,
            timeout: float = 300.0):
        key = (prog_name, spec_text, fuse)
        if key not in cache:
            cache[key] = run_pipeline(prog_name, spec_text, fuse=fuse,
                                      timeout=timeout)
        return cache[key]

    return run
