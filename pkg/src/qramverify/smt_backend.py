"""SMT-LIB2 emission and external solver orchestration.

The two verification queries are plain text scripts fed to a solver
process.  Query one conjoins the program and precondition obligations
with the negated postcondition claims: unsatisfiability means no
admissible execution violates the specification.  Query two drops the
postcondition entirely and simply asks whether any admissible execution
satisfies the precondition at all; an unsatisfiable answer downgrades
the result from Verified to Vacuous.

Emission is deterministic: symbols are declared in registration order
and every constant is rendered exactly (fractions, never truncated
decimals), so identical inputs produce byte-identical scripts.
"""

from __future__ import annotations

import os
import re
import shutil
import signal
import subprocess
import tempfile
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .errors import (
    SolverProtocolError,
    SolverSpawnError,
    UndeclaredSymbol,
)
from .obligations import (
    App,
    Expr,
    IntConst,
    ObligationSet,
    RatConst,
    Sym,
    SymbolTable,
    conj,
    free_symbols,
    not_,
)
from . import names


# --- term rendering ---

def _render_rat(q: Fraction) -> str:
    if q < 0:
        return f"(- {_render_rat(-q)})"
    if q.denominator == 1:
        return f"{q.numerator}.0"
    return f"(/ {q.numerator} {q.denominator})"


def _render(e: Expr) -> str:
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, IntConst):
        return f"(- {-e.value})" if e.value < 0 else str(e.value)
    if isinstance(e, RatConst):
        return _render_rat(e.value)
    if isinstance(e, App):
        if not e.args:
            return e.op
        return "(" + " ".join([e.op] + [_render(a) for a in e.args]) + ")"
    raise TypeError(f"not an expression: {e!r}")


def _check_declared(sets: list[ObligationSet], st: SymbolTable) -> None:
    for s in sets:
        for a in s.definitions + s.assertions:
            for name in free_symbols(a.expr):
                if name not in st:
                    raise UndeclaredSymbol(
                        f"symbol {name!r} used in {s.tag} but never declared"
                    )


def emit_smt(
    prog: ObligationSet,
    pre: ObligationSet,
    post: ObligationSet,
    st: SymbolTable,
    negate_post: bool,
    produce_model: bool = True,
) -> str:
    """Render the obligation sets as one SMT-LIB2 script.

    With negate_post the postcondition claims are negated as a single
    conjunction (its definitions stay positive); without it the
    postcondition is omitted entirely, which is the satisfiability
    sanity query.
    """
    _check_declared([prog, pre, post], st)
    out: list[str] = []
    out.append("(set-logic ALL)")
    if produce_model:
        out.append("(set-option :pp.decimal true)")
        out.append("(set-option :pp.decimal_precision 25)")
    out.append("")
    out.append("; symbol declarations")
    for info in st.infos():
        out.append(f"(declare-const {info.name} {info.sort})")
        if info.lo is not None:
            lo = IntConst(info.lo) if info.sort == "Int" else RatConst(Fraction(info.lo))
            out.append(f"(assert (<= {_render(lo)} {info.name}))")
        if info.hi is not None:
            hi = IntConst(info.hi) if info.sort == "Int" else RatConst(Fraction(info.hi))
            out.append(f"(assert (< {info.name} {_render(hi)}))")
        if info.name == names.INVSQRT2:
            out.append(f"(assert (= (* {info.name} {info.name}) (/ 1 2)))")
            out.append(f"(assert (> {info.name} 0.0))")

    def emit_group(s: ObligationSet, label: str, negate: bool) -> None:
        out.append("")
        out.append(f"; {label}")
        for a in s.definitions:
            if a.comment:
                out.append(f"; {a.comment}")
            out.append(f"(assert {_render(a.expr)})")
        if negate:
            claims = [a.expr for a in s.assertions]
            out.append("; negated claims")
            if claims:
                out.append(f"(assert {_render(not_(conj(tuple(claims))))})")
            else:
                # An empty claim set conjoins to true, so its negation
                # can never hold.
                out.append("(assert false)")
            return
        for a in s.assertions:
            if a.comment:
                out.append(f"; {a.comment}")
            out.append(f"(assert {_render(a.expr)})")

    emit_group(prog, "prog", False)
    emit_group(pre, "pre", False)
    if negate_post:
        emit_group(post, "post (negated)", True)
    out.append("")
    out.append("(check-sat)")
    if produce_model:
        out.append("(get-model)")
    out.append("")
    return "\n".join(out)


# --- solver configuration and process handling ---

@dataclass(frozen=True)
class SolverConfig:
    executable: str
    timeout: float = 60.0
    extra_argv: tuple[str, ...] = ()
    produce_models: bool = True

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("solver timeout must be positive")


def default_solver_path() -> str:
    """Locate a solver: environment override, then PATH, then the
    bundled wrapper."""
    env = os.environ.get("QRAMVERIFY_SOLVER")
    if env:
        return env
    for name in ("z3", "z3smt"):
        found = shutil.which(name)
        if found:
            return found
    bundled = Path(__file__).resolve().parents[2] / "tools" / "z3smt"
    if bundled.exists():
        return str(bundled)
    raise SolverSpawnError(
        "no SMT solver found: set QRAMVERIFY_SOLVER, install z3, or run "
        "npm install in the repository's tools directory"
    )


def run_script(script: str, cfg: SolverConfig) -> tuple[str, str, float]:
    """Run one script through the solver.

    Returns (answer, model_text, seconds) where answer is sat, unsat,
    unknown, or timeout.  The solver runs in its own session so a
    timeout can kill the whole process group (wrapper scripts spawn
    children).
    """
    with tempfile.NamedTemporaryFile(
        "w", suffix=".smt2", delete=False
    ) as handle:
        handle.write(script)
        path = handle.name
    argv = [cfg.executable, path, *cfg.extra_argv]
    t0 = time.monotonic()
    try:
        proc = subprocess.Popen(
            argv,
            stdout=subprocess.PIPE,
            stderr=subprocess.PIPE,
            text=True,
            start_new_session=True,
        )
    except FileNotFoundError as e:
        os.unlink(path)
        raise SolverSpawnError(f"cannot run solver {cfg.executable!r}: {e}")
    try:
        stdout, stderr = proc.communicate(timeout=cfg.timeout)
    except subprocess.TimeoutExpired:
        try:
            os.killpg(os.getpgid(proc.pid), signal.SIGKILL)
        except (ProcessLookupError, PermissionError):
            proc.kill()
        proc.communicate()
        return "timeout", "", time.monotonic() - t0
    finally:
        os.unlink(path)
    elapsed = time.monotonic() - t0
    lines = [l.strip() for l in stdout.splitlines() if l.strip()]
    if not lines:
        raise SolverProtocolError(
            f"solver produced no answer (stderr: {stderr.strip()[:500]!r})"
        )
    answer = lines[0]
    if answer not in ("sat", "unsat", "unknown"):
        raise SolverProtocolError(f"unexpected solver answer {answer!r}")
    rest = stdout.split("\n", 1)[1] if "\n" in stdout else ""
    return answer, rest, elapsed


# --- model parsing ---

_ATOM = re.compile(r'[^\s()]+')


def _sexprs(text: str) -> list:
    """Parse all top-level s-expressions in the text."""
    pos = 0
    n = len(text)

    def skip_ws() -> None:
        nonlocal pos
        while pos < n:
            if text[pos].isspace():
                pos += 1
            elif text[pos] == ";":
                while pos < n and text[pos] != "\n":
                    pos += 1
            else:
                return

    def parse() -> object:
        nonlocal pos
        skip_ws()
        if pos >= n:
            raise SolverProtocolError("unexpected end of solver output")
        if text[pos] == "(":
            pos += 1
            items = []
            while True:
                skip_ws()
                if pos >= n:
                    raise SolverProtocolError("unbalanced parenthesis in model")
                if text[pos] == ")":
                    pos += 1
                    return items
                items.append(parse())
        m = _ATOM.match(text, pos)
        if not m:
            raise SolverProtocolError(f"cannot tokenize model at {text[pos:pos+20]!r}")
        pos = m.end()
        return m.group()

    out = []
    while True:
        skip_ws()
        if pos >= n:
            return out
        out.append(parse())


def _decode_value(v) -> int | Fraction | float | str:
    if isinstance(v, str):
        if re.fullmatch(r"-?\d+", v):
            return int(v)
        if re.fullmatch(r"-?\d+\.\d+\??", v):
            return float(v.rstrip("?"))
        return v
    if isinstance(v, list) and v:
        if v[0] == "-" and len(v) == 2:
            inner = _decode_value(v[1])
            if isinstance(inner, (int, float, Fraction)):
                return -inner
            return "(- " + str(inner) + ")"
        if v[0] == "/" and len(v) == 3:
            a, b = _decode_value(v[1]), _decode_value(v[2])
            if isinstance(a, int) and isinstance(b, int):
                return Fraction(a, b)
            return float(a) / float(b)
        if v[0] == "to_real" and len(v) == 2:
            return _decode_value(v[1])
    return " ".join(str(x) for x in _flatten(v))


def _flatten(v):
    if isinstance(v, str):
        yield v
    else:
        yield "("
        for x in v:
            yield from _flatten(x)
        yield ")"


def parse_model(text: str) -> dict[str, int | Fraction | float | str]:
    """Extract symbol values from a get-model response."""
    model: dict[str, int | Fraction | float | str] = {}
    for top in _sexprs(text):
        if not isinstance(top, list):
            continue
        entries = [top] if top and top[0] == "define-fun" else top
        for entry in entries:
            if (
                isinstance(entry, list)
                and len(entry) == 5
                and entry[0] == "define-fun"
                and entry[2] == []
            ):
                model[entry[1]] = _decode_value(entry[4])
    return model


def decode_model(model: dict, st: SymbolTable) -> dict:
    """Project a raw model onto the quantities a user can act on:
    measured values, oracle tables, and the final classical state."""
    measured: dict[str, int] = {}
    oracles: dict[str, dict[int, int]] = {}
    latest: dict[str, tuple[int, int]] = {}
    for info in st.infos():
        if info.name not in model:
            continue
        value = model[info.name]
        if info.kind == "measured":
            measured[info.get("var")] = int(value)
        elif info.kind == "oracle":
            oracles.setdefault(info.get("oracle"), {})[info.get("value")] = int(value)
        elif info.kind == "classical":
            var, version = info.get("var"), info.get("version")
            if var not in latest or latest[var][0] < version:
                latest[var] = (version, int(value))
    tables = {
        name: tuple(cells[v] for v in sorted(cells))
        for name, cells in sorted(oracles.items())
    }
    return {
        "measured": measured,
        "oracles": tables,
        "classical": {var: v for var, (_, v) in sorted(latest.items())},
    }


# --- verdicts ---

@dataclass(frozen=True)
class Verdict:
    status: str                       # Verified | Refuted | Vacuous | Unknown
    model: dict | None = None
    decoded: dict | None = None
    reason: str | None = None
    setup_seconds: float = 0.0
    solve_seconds: float = 0.0

    @property
    def exit_code(self) -> int:
        return {"Verified": 0, "Refuted": 1, "Unknown": 3, "Vacuous": 4}[self.status]


def check(
    prog: ObligationSet,
    pre: ObligationSet,
    post: ObligationSet,
    st: SymbolTable,
    cfg: SolverConfig,
    emit_path: str | None = None,
) -> Verdict:
    """Run the two-query verification flow.

    Query one (negated post) refutes on sat; on unsat, query two (post
    omitted) distinguishes Verified from Vacuous.  Timeouts or unknown
    answers at either step yield Unknown.  emit_path, when given,
    receives the first query's script for inspection.
    """
    t0 = time.monotonic()
    script1 = emit_smt(prog, pre, post, st, negate_post=True,
                       produce_model=cfg.produce_models)
    setup = time.monotonic() - t0
    if emit_path is not None:
        Path(emit_path).write_text(script1)
    answer, body, solve1 = run_script(script1, cfg)
    if answer == "sat":
        model = parse_model(body) if cfg.produce_models else {}
        return Verdict(
            "Refuted",
            model=model,
            decoded=decode_model(model, st),
            setup_seconds=setup,
            solve_seconds=solve1,
        )
    if answer in ("unknown", "timeout"):
        return Verdict(
            "Unknown", reason=f"solver answered {answer} on the refutation query",
            setup_seconds=setup, solve_seconds=solve1,
        )
    t1 = time.monotonic()
    script2 = emit_smt(prog, pre, post, st, negate_post=False,
                       produce_model=False)
    setup += time.monotonic() - t1
    answer2, _, solve2 = run_script(script2, cfg)
    if answer2 == "sat":
        return Verdict("Verified", setup_seconds=setup,
                       solve_seconds=solve1 + solve2)
    if answer2 == "unsat":
        return Verdict("Vacuous", setup_seconds=setup,
                       solve_seconds=solve1 + solve2)
    return Verdict(
        "Unknown", reason=f"solver answered {answer2} on the sanity query",
        setup_seconds=setup, solve_seconds=solve1 + solve2,
    )
