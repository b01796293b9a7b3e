"""Dense state-vector simulation used as an independent test instrument.

Two entry points interpret a program numerically: ``run_all_branches``
executes a lowered process-model program, and ``run_ast`` interprets the
surface syntax tree directly with its own index bookkeeping.  Agreement
between the two is a regression check on the lowering itself.

Measurements are never sampled.  Every outcome with nonzero probability
becomes a branch carrying the product of probabilities along its path,
so the result is the exact output distribution of the program.

Everything here is double precision on purpose: the proof obligations
use exact algebra, and this module is the numerically independent route
the tests compare them against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainTooLarge, SimulationError, UnboundOracle
from .qram_model import (
    Binary,
    CMeas,
    Const,
    CSet,
    CtrlInstr,
    Layout,
    Operand,
    QInit,
    QMeas,
    QOp,
    QramProgram,
    Register,
    Return,
    Unary,
    VarRef,
)
from .silq_frontend import (
    BinExpr,
    Call,
    ClassicalAssign,
    Expr,
    GateApply,
    IntLit,
    MeasureAssign,
    Name,
    NotExpr,
    OracleCondBlock,
    PhaseApply,
    ReturnStmt,
    SilqAst,
    VarDecl,
)

ATOL = 1e-9

Tables = dict[str, tuple[int, ...]]
BranchResult = tuple[float, dict[str, int], "int | None"]

_H = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)
_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)


def _basis(value: int, size: int) -> np.ndarray:
    v = np.zeros(2 ** size, dtype=complex)
    v[value] = 1.0
    return v


def _truth(x: int) -> int:
    return 1 if x != 0 else 0


def eval_operand(o: Operand, env: dict[str, int], tables: Tables) -> int:
    """Evaluate an IR operand tree to an integer under a concrete env."""
    if isinstance(o, Const):
        return o.value
    if isinstance(o, VarRef):
        if o.name not in env:
            raise SimulationError(f"unbound variable {o.name!r}")
        return env[o.name]
    if isinstance(o, Unary):
        if o.op == "not":
            return 1 - _truth(eval_operand(o.a, env, tables))
        table = tables.get(o.op)
        if table is None:
            raise UnboundOracle(f"no table bound for oracle {o.op!r}")
        idx = eval_operand(o.a, env, tables)
        if not 0 <= idx < len(table):
            raise SimulationError(f"oracle {o.op!r} applied outside its domain")
        return table[idx]
    l = eval_operand(o.left, env, tables)
    r = eval_operand(o.right, env, tables)
    if o.op == "==":
        return int(l == r)
    if o.op == "<=":
        return int(l <= r)
    if o.op == "<":
        return int(l < r)
    if o.op == "and":
        return _truth(l) and _truth(r)
    if o.op == "+":
        return l + r
    if o.op == "-":
        return l - r
    if o.op == "*":
        return l * r
    if o.op == "mod":
        return l % r
    raise SimulationError(f"operator {o.op!r} is not executable")


def _joint_env(layout: Layout, joint: int, cenv: dict[str, int]) -> dict[str, int]:
    env = dict(cenv)
    for reg in layout.regs:
        env[reg.name] = layout.value(reg.name, joint)
    return env


def _ctrl_mask(
    ctrls: list[CtrlInstr], layout: Layout, cenv: dict[str, int], tables: Tables
) -> np.ndarray:
    mask = np.ones(layout.dim)
    for v in range(layout.dim):
        env = _joint_env(layout, v, cenv)
        for c in ctrls:
            if not _truth(eval_operand(c.expr, env, tables)):
                mask[v] = 0.0
                break
    return mask


def _embed_joint(u_var: np.ndarray, layout: Layout, var: str) -> np.ndarray:
    off = layout.offset(var)
    size = layout.register(var).size
    low = 2 ** off
    high = layout.dim // (low * 2 ** size)
    return np.kron(np.kron(np.eye(high), u_var), np.eye(low))


def _check_norm(vec: np.ndarray) -> np.ndarray:
    norm = float(np.sum(np.abs(vec) ** 2))
    if abs(norm - 1.0) > 1e-6:
        raise SimulationError(f"state norm drifted to {norm}")
    return vec


@dataclass
class SimState:
    """One branch of a simulation in progress."""

    layout: Layout
    vec: np.ndarray
    cenv: dict[str, int]
    prob: float = 1.0
    ret: int | None = None


def _measure(
    state: SimState, var: str, target: str
) -> list[SimState]:
    layout = state.layout
    reg = layout.register(var)
    residual = layout.without(var)
    out: list[SimState] = []
    for outcome in range(2 ** reg.size):
        amps = np.array(
            [state.vec[layout.compose(var, outcome, r)] for r in range(residual.dim)]
        )
        prob = float(np.sum(np.abs(amps) ** 2))
        if prob <= ATOL:
            continue
        cenv = dict(state.cenv)
        cenv[target] = outcome
        out.append(
            SimState(residual, amps / np.sqrt(prob), cenv, state.prob * prob, state.ret)
        )
    return out


def run_all_branches(
    p: QramProgram,
    oracle_tables: Tables | None = None,
    inputs: dict[str, int] | None = None,
) -> list[BranchResult]:
    """Execute a process-model program over concrete oracle tables.

    Returns one entry per measurement-outcome path with nonzero
    probability: (path probability, final classical env, returned
    value or None when the program never returns).
    """
    tables: Tables = {k: tuple(v) for k, v in (oracle_tables or {}).items()}
    states = [SimState(Layout(()), np.ones(1, dtype=complex), dict(inputs or {}))]
    for proc in p:
        next_states: list[SimState] = []
        for st in states:
            live = True
            qctrls: list[CtrlInstr] = []
            for c in proc.controls:
                if c.classical:
                    if not _truth(eval_operand(c.expr, st.cenv, tables)):
                        live = False
                        break
                else:
                    qctrls.append(c)
            if not live:
                next_states.append(st)
                continue

            if isinstance(proc.q, QInit):
                regs = st.layout.regs + (
                    Register(proc.q.var, proc.q.size, 0),
                )
                vec = np.kron(st.vec, _basis(proc.q.value, proc.q.size))
                next_states.append(
                    SimState(Layout(regs), vec, st.cenv, st.prob, st.ret)
                )
                continue
            if isinstance(proc.q, QOp):
                u_var = proc.q.u.to_numpy({})
                u = _embed_joint(u_var, st.layout, proc.q.var)
                if qctrls:
                    mask = _ctrl_mask(qctrls, st.layout, st.cenv, tables)
                    hot = mask * st.vec
                    vec = (st.vec - hot) + u @ hot
                else:
                    vec = u @ st.vec
                _check_norm(vec)
                next_states.append(
                    SimState(st.layout, vec, st.cenv, st.prob, st.ret)
                )
                continue
            if isinstance(proc.q, QMeas):
                assert isinstance(proc.c, CMeas)
                next_states.extend(_measure(st, proc.q.var, proc.c.var))
                continue
            if isinstance(proc.c, CSet):
                value = eval_operand(proc.c.value, st.cenv, tables)
                cenv = dict(st.cenv)
                cenv[proc.c.var] = value % (2 ** proc.c.size)
                next_states.append(
                    SimState(st.layout, st.vec, cenv, st.prob, st.ret)
                )
                continue
            if isinstance(proc.c, Return):
                ret = st.cenv.get(proc.c.var)
                if ret is None:
                    raise SimulationError(
                        f"return of unbound variable {proc.c.var!r}"
                    )
                next_states.append(
                    SimState(st.layout, st.vec, st.cenv, st.prob, ret)
                )
                continue
            next_states.append(st)
        states = next_states
    return [(s.prob, s.cenv, s.ret) for s in states]


# --- direct interpretation of the surface syntax ---
#
# This path shares nothing with the lowering: it keeps its own variable
# order, computes its own bit offsets, and evaluates surface expressions
# directly.  The convention is the same by construction: within a
# variable bit 0 is least significant, and earlier-initialized variables
# occupy more significant bit blocks.


@dataclass
class _AstState:
    order: list[tuple[str, int]]
    vec: np.ndarray
    cenv: dict[str, int]
    prob: float = 1.0
    ret: int | None = None


def _slice_of(order: list[tuple[str, int]], name: str) -> tuple[int, int]:
    off = 0
    for n, s in reversed(order):
        if n == name:
            return off, s
        off += s
    raise SimulationError(f"quantum variable {name!r} is not live")


def _eval_expr(e: Expr, env: dict[str, int], tables: Tables) -> int:
    if isinstance(e, IntLit):
        return e.value
    if isinstance(e, Name):
        if e.ident not in env:
            raise SimulationError(f"unbound variable {e.ident!r}")
        return env[e.ident]
    if isinstance(e, Call):
        table = tables.get(e.func)
        if table is None:
            raise UnboundOracle(f"no table bound for oracle {e.func!r}")
        return table[_eval_expr(e.args[0], env, tables)]
    if isinstance(e, NotExpr):
        return 1 - _truth(_eval_expr(e.operand, env, tables))
    if isinstance(e, BinExpr):
        l = _eval_expr(e.left, env, tables)
        r = _eval_expr(e.right, env, tables)
        if e.op == "==":
            return int(l == r)
        if e.op == "<=":
            return int(l <= r)
        if e.op == "<":
            return int(l < r)
        if e.op == "&&":
            return _truth(l) and _truth(r)
        if e.op == "+":
            return l + r
        if e.op == "-":
            return l - r
        if e.op == "*":
            return l * r
        if e.op == "%":
            return l % r
    raise SimulationError(f"expression {e!r} is not executable")


def _ast_env(st: _AstState, joint: int) -> dict[str, int]:
    env = dict(st.cenv)
    off = 0
    for name, size in reversed(st.order):
        env[name] = (joint >> off) & (2 ** size - 1)
        off += size
    return env


def _apply_gate(st: _AstState, s: GateApply, quals: list[Expr], tables: Tables) -> None:
    off, size = _slice_of(st.order, s.target)
    wire = s.wire if s.wire is not None else 0
    u2 = _H if s.gate_name == "H" else _X
    bit = off + wire
    dim = len(st.vec)
    low = 2 ** bit
    u = np.kron(np.kron(np.eye(dim // (2 * low)), u2), np.eye(low))
    if quals:
        mask = np.array(
            [
                1.0
                if all(
                    _truth(_eval_expr(q, _ast_env(st, v), tables)) for q in quals
                )
                else 0.0
                for v in range(dim)
            ]
        )
        hot = mask * st.vec
        st.vec = (st.vec - hot) + u @ hot
    else:
        st.vec = u @ st.vec
    _check_norm(st.vec)


def _apply_phase(st: _AstState, s: PhaseApply, quals: list[Expr], tables: Tables) -> None:
    factor = np.exp(1j * np.pi * s.num / s.den)
    if quals:
        for v in range(len(st.vec)):
            if all(_truth(_eval_expr(q, _ast_env(st, v), tables)) for q in quals):
                st.vec[v] *= factor
    else:
        st.vec = st.vec * factor


def _run_block(
    st: _AstState, stmts, quals: list[Expr], tables: Tables
) -> None:
    """Run statements that cannot branch (no measurement, no return)."""
    for s in stmts:
        if isinstance(s, GateApply):
            _apply_gate(st, s, quals, tables)
        elif isinstance(s, PhaseApply):
            _apply_phase(st, s, quals, tables)
        elif isinstance(s, ClassicalAssign):
            value = _eval_expr(s.expr, st.cenv, tables)
            size = s.size if s.size is not None else 1
            st.cenv[s.name] = value % (2 ** size)
        elif isinstance(s, OracleCondBlock):
            _run_cond(st, s, quals, tables)
        else:
            raise SimulationError(f"statement {s!r} not allowed under a condition")


def _run_cond(
    st: _AstState, s: OracleCondBlock, quals: list[Expr], tables: Tables
) -> None:
    classical = s.cond_classical if s.cond_classical is not None else True
    if classical and not quals:
        if _truth(_eval_expr(s.cond, st.cenv, tables)):
            _run_block(st, s.body, quals, tables)
        elif s.else_body:
            _run_block(st, s.else_body, quals, tables)
        return
    _run_block(st, s.body, quals + [s.cond], tables)
    if s.else_body:
        _run_block(st, s.else_body, quals + [NotExpr(s.cond, s.pos)], tables)


def run_ast(
    ast: SilqAst,
    fname: str,
    oracle_tables: Tables | None = None,
    inputs: dict[str, int] | None = None,
) -> list[BranchResult]:
    """Interpret one function of the surface AST directly.

    An independent reference for ``run_all_branches`` composed with the
    lowering: same return shape, no shared index arithmetic.
    """
    fn = ast.function(fname)
    if fn is None:
        raise SimulationError(f"no function named {fname!r}")
    tables: Tables = {k: tuple(v) for k, v in (oracle_tables or {}).items()}
    states = [_AstState([], np.ones(1, dtype=complex), dict(inputs or {}))]
    for s in fn.body:
        if isinstance(s, VarDecl):
            for st in states:
                if s.decl_type.classical:
                    st.cenv[s.name] = s.value
                else:
                    st.order.append((s.name, s.decl_type.size))
                    st.vec = np.kron(st.vec, _basis(s.value, s.decl_type.size))
        elif isinstance(s, MeasureAssign):
            nxt: list[_AstState] = []
            for st in states:
                off, size = _slice_of(st.order, s.source)
                rest_dim = len(st.vec) // (2 ** size)
                low = 2 ** off
                for outcome in range(2 ** size):
                    amps = np.empty(rest_dim, dtype=complex)
                    for r in range(rest_dim):
                        hi, lo = divmod(r, low)
                        joint = (hi * (2 ** size) + outcome) * low + lo
                        amps[r] = st.vec[joint]
                    prob = float(np.sum(np.abs(amps) ** 2))
                    if prob <= ATOL:
                        continue
                    order = [pair for pair in st.order if pair[0] != s.source]
                    cenv = dict(st.cenv)
                    cenv[s.target] = outcome
                    nxt.append(
                        _AstState(
                            order, amps / np.sqrt(prob), cenv,
                            st.prob * prob, st.ret,
                        )
                    )
            states = nxt
        elif isinstance(s, ReturnStmt):
            for st in states:
                st.ret = st.cenv[s.name]
        else:
            for st in states:
                _run_block(st, [s], [], tables)
    return [(s.prob, s.cenv, s.ret) for s in states]


# --- flag admissibility ---

def admissible(prob: float, flag: str, threshold: float | None = None) -> bool:
    """Decide whether a branch probability satisfies a measurement flag.

    The comparison carries a 1e-9 slack so a branch sitting exactly on a
    whp threshold is not flipped by floating-point rounding.
    """
    if flag == "rand":
        return prob > ATOL
    if flag == "cert":
        return prob >= 1.0 - ATOL
    if flag == "whp":
        t = 0.5 if threshold is None else threshold
        return prob >= t - ATOL
    raise SimulationError(f"unknown flag {flag!r}")


# --- exhaustive specification checking ---
#
# The solver route and this enumeration must stay independent: one
# reasons symbolically about amplitudes, the other replays every
# concrete oracle table and admissible measurement branch.  Agreement
# between the two on small instances is the main correctness evidence
# for both.

@dataclass(frozen=True)
class BruteOutcome:
    """Result of exhaustive checking: verdict plus a witness if refuted.

    verdict is "Verified", "Refuted", or "Vacuous".  For "Refuted" the
    witness maps "tables", "inputs", "ghosts", "ret", "prob", and
    "cenv" to the concrete configuration that satisfies the
    precondition yet violates the postcondition.
    """

    verdict: str
    witness: dict | None = None


def _spec_constants(spec) -> list[int]:
    from .silspeq_frontend.ast_nodes import (
        LAnd, LCmp, LExists, LForall, LImp, LNot, LOr,
        SApp, SBin, SInt, SSum,
    )

    out: list[int] = []

    def arith(e) -> None:
        if isinstance(e, SInt):
            out.append(e.value)
        elif isinstance(e, SBin):
            arith(e.left)
            arith(e.right)
        elif isinstance(e, SApp):
            arith(e.arg)
        elif isinstance(e, SSum):
            pass

    def logic(l) -> None:
        if isinstance(l, LCmp):
            arith(l.left)
            arith(l.right)
        elif isinstance(l, LNot):
            logic(l.body)
        elif isinstance(l, (LAnd, LOr, LImp)):
            logic(l.left)
            logic(l.right)
        elif isinstance(l, (LForall, LExists)):
            logic(l.body)

    for l in list(spec.pre) + list(spec.post):
        logic(l)
    return out


def _enumerate_assignments(
    names: list[str], ranges: list[range]
) -> list[dict[str, int]]:
    out = [dict()]
    for name, r in zip(names, ranges):
        out = [{**env, name: v} for env in out for v in r]
    return out


def brute_check(p: QramProgram, spec) -> BruteOutcome:
    """Check a lowered program against a parsed specification by brute
    force, enumerating oracle tables, classical inputs, ghost variables,
    and admissible measurement branches.

    Mirrors the two solver queries: a configuration satisfying the
    precondition but violating the postcondition refutes; if no
    configuration at all satisfies the precondition alongside an
    admissible branch, the specification is vacuous; otherwise it is
    verified.  Unbounded (N) ghosts are enumerated up to the largest
    value the specification can distinguish: the biggest literal and
    the biggest possible table sum.
    """
    from .silspeq_frontend.ast_nodes import BitVecType, FuncType, NatType
    from .silspeq_frontend.evalspec import eval_logic

    scope = spec.scope()
    ret_name = spec.ret[0]
    flag = spec.flag.kind
    threshold = None if spec.flag.threshold is None else float(spec.flag.threshold)

    oracle_names: list[str] = []
    oracle_sizes: list[int] = []
    input_names: list[str] = []
    input_ranges: list[range] = []
    for name, ty in spec.inputs:
        if isinstance(ty, FuncType):
            if not isinstance(ty.domain, BitVecType) or ty.domain.bits > 3:
                raise DomainTooLarge(
                    f"cannot enumerate tables for function {name!r}"
                )
            oracle_names.append(name)
            oracle_sizes.append(2 ** ty.domain.bits)
        elif isinstance(ty, BitVecType):
            input_names.append(name)
            input_ranges.append(range(2 ** ty.bits))
        else:
            raise DomainTooLarge(f"cannot enumerate input {name!r} over N")

    nat_hi = max(_spec_constants(spec) + oracle_sizes + [1])
    ghost_names: list[str] = []
    ghost_ranges: list[range] = []
    for name, ty in list(spec.pre_defines) + list(spec.post_defines):
        if isinstance(ty, BitVecType):
            ghost_names.append(name)
            ghost_ranges.append(range(2 ** ty.bits))
        elif isinstance(ty, NatType):
            ghost_names.append(name)
            ghost_ranges.append(range(nat_hi + 1))
        else:
            raise DomainTooLarge(f"cannot enumerate ghost {name!r}")

    table_space = 1
    for s in oracle_sizes:
        table_space *= 2 ** s
    ghost_space = 1
    for r in ghost_ranges:
        ghost_space *= len(r)
    input_space = 1
    for r in input_ranges:
        input_space *= len(r)
    if table_space * ghost_space * input_space > 10 ** 7:
        raise DomainTooLarge("enumeration space exceeds 10^7 configurations")

    ghosts = _enumerate_assignments(ghost_names, ghost_ranges)
    inputs_list = _enumerate_assignments(input_names, input_ranges)

    def tables_iter():
        if not oracle_names:
            yield {}
            return
        spaces = [
            [tuple((v >> i) & 1 for i in range(size)) for v in range(2 ** size)]
            for size in oracle_sizes
        ]
        idx = [0] * len(spaces)
        while True:
            yield {
                name: spaces[k][idx[k]] for k, name in enumerate(oracle_names)
            }
            k = len(spaces) - 1
            while k >= 0:
                idx[k] += 1
                if idx[k] < len(spaces[k]):
                    break
                idx[k] = 0
                k -= 1
            if k < 0:
                return

    nonvacuous = False
    for tables in tables_iter():
        for inp in inputs_list:
            branches = run_all_branches(p, oracle_tables=tables, inputs=inp)
            adm = [
                (prob, cenv, ret)
                for prob, cenv, ret in branches
                if admissible(prob, flag, threshold)
            ]
            for prob, cenv, ret in adm:
                if ret is None:
                    raise SimulationError("program returned nothing")
                for ghost in ghosts:
                    env = {**inp, **ghost, ret_name: ret}
                    if not all(
                        eval_logic(l, scope, env, tables) for l in spec.pre
                    ):
                        continue
                    nonvacuous = True
                    if not all(
                        eval_logic(l, scope, env, tables) for l in spec.post
                    ):
                        return BruteOutcome(
                            "Refuted",
                            {
                                "tables": dict(tables),
                                "inputs": dict(inp),
                                "ghosts": dict(ghost),
                                "ret": ret,
                                "prob": prob,
                                "cenv": dict(cenv),
                            },
                        )
    if not nonvacuous:
        return BruteOutcome("Vacuous")
    return BruteOutcome("Verified")
