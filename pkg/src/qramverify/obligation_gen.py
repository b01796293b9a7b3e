"""Proof-obligation generation for process-model programs.

Each process contributes equations over a shared symbol table: classical
writes become guarded single-assignment equalities, quantum operations
become amplitude equations for a fresh state generation, and
measurements contribute the probability / flag / post-state obligation
triple.  All arithmetic stays exact: amplitude coefficients are carried
as rational polynomials in invsqrt2 and oracle cells, and are rendered
into solver terms without any floating-point intermediary.

Controlled operations follow CU = I + (U - I)diag(b), where b is the
0/1 predicate vector of the quantum controls over the joint basis.
Classical controls instead split each update into an implication pair:
guard implies the update, negated guard implies an identity copy, so
exactly one branch fires under every assignment.
"""

from __future__ import annotations

from fractions import Fraction

from . import names
from .errors import (
    AbsentVariable,
    ControlOnTarget,
    LayoutMismatch,
    ObligationError,
)
from .gate_algebra import Poly, Scalar, SymbolicMatrix, control_diag, conjoin_diags, controlled_u, embed
from .obligations import (
    App,
    Assertion,
    Expr,
    Generation,
    IntConst,
    ObligationSet,
    RatConst,
    Sym,
    SymbolInfo,
    SymbolTable,
    add,
    conj,
    disj,
    eq,
    ge,
    gt,
    implies,
    le,
    lt,
    mul,
    not_,
    to_real,
)
from .qram_model import (
    Binary,
    CMeas,
    Const,
    CSet,
    CtrlInstr,
    Layout,
    Memory,
    Operand,
    QInit,
    QMeas,
    QOp,
    QramProcess,
    QramProgram,
    Return,
    Skip,
    Unary,
    VarRef,
)

__all__ = [
    "App", "Assertion", "Expr", "Generation", "IntConst", "ObligationSet",
    "RatConst", "Sym", "SymbolInfo", "SymbolTable",
    "gen_measurement", "gen_process", "gen_program",
]


# --- rendering exact coefficients into solver terms ---

def _symbol_expr(st: SymbolTable, name: str) -> Expr:
    """A symbol as a real-valued term (integer symbols are coerced)."""
    info = st.info(name)
    if info is not None and info.sort == "Int":
        return to_real(Sym(name))
    return Sym(name)


def _poly_expr(p: Poly, st: SymbolTable) -> Expr:
    if p.is_zero:
        return RatConst(Fraction(0))
    terms = []
    for (e, syms), c in p.terms:
        factors: list[Expr] = []
        if e:
            factors.append(st.invsqrt2())
        factors.extend(_symbol_expr(st, s) for s in syms)
        if not factors:
            terms.append(RatConst(c))
        elif c == 1:
            terms.append(mul(*factors))
        else:
            terms.append(mul(RatConst(c), *factors))
    return add(*terms)


def _combination(st: SymbolTable, pairs: list[tuple[Poly, Sym]]) -> Expr:
    """Σ poly·symbol with zero polynomials dropped."""
    terms = []
    for p, s in pairs:
        if p.is_zero:
            continue
        if p == Poly.rational(1):
            terms.append(s)
        else:
            terms.append(mul(_poly_expr(p, st), s))
    if not terms:
        return RatConst(Fraction(0))
    return add(*terms)


# --- classical operands over versioned symbols ---

def _classical_env(m: Memory, assigned: str | None = None) -> dict[str, tuple[int, int]]:
    """Map each classical variable to (readable version, size).

    The variable being assigned reads at its previous version, since
    the memory snapshot already shows the bumped one.
    """
    env = {}
    for r in m.regs:
        v = r.version - 1 if r.name == assigned else r.version
        env[r.name] = (v, r.size)
    return env


def _oracle_ite(st: SymbolTable, oracle: str, arg: Expr, domain_size: int) -> Expr:
    cells = [st.oracle_cell(oracle, v) for v in range(2 ** domain_size)]
    out: Expr = cells[-1]
    for v in range(len(cells) - 2, -1, -1):
        out = App("ite", (eq(arg, IntConst(v)), cells[v], out))
    return out


def _arith_operand(
    st: SymbolTable, o: Operand, env: dict[str, tuple[int, int]]
) -> Expr:
    if isinstance(o, Const):
        return IntConst(o.value)
    if isinstance(o, VarRef):
        if o.name not in env:
            raise ObligationError(f"classical variable {o.name!r} not in memory")
        version, size = env[o.name]
        return st.classical(o.name, version, size)
    if isinstance(o, Unary):
        if o.op == "not":
            raise ObligationError("negation is not an arithmetic operand")
        if not isinstance(o.a, VarRef) or o.a.name not in env:
            raise ObligationError(f"oracle {o.op!r} needs a classical argument")
        _, size = env[o.a.name]
        return _oracle_ite(st, o.op, _arith_operand(st, o.a, env), size)
    if isinstance(o, Binary):
        l = _arith_operand(st, o.left, env)
        r = _arith_operand(st, o.right, env)
        ops = {"+": "+", "-": "-", "*": "*", "mod": "mod"}
        if o.op not in ops:
            raise ObligationError(f"operator {o.op!r} is not arithmetic")
        return App(ops[o.op], (l, r))
    raise ObligationError(f"not an operand: {o!r}")


def _bool_operand(
    st: SymbolTable, o: Operand, env: dict[str, tuple[int, int]]
) -> Expr:
    if isinstance(o, Unary) and o.op == "not":
        return not_(_bool_operand(st, o.a, env))
    if isinstance(o, Binary) and o.op == "and":
        return conj((_bool_operand(st, o.left, env), _bool_operand(st, o.right, env)))
    if isinstance(o, Binary) and o.op in ("==", "<=", "<"):
        l = _arith_operand(st, o.left, env)
        r = _arith_operand(st, o.right, env)
        return {"==": eq, "<=": le, "<": lt}[o.op](l, r)
    # bare value: nonzero is true
    return not_(eq(_arith_operand(st, o, env), IntConst(0)))


def _classical_guard(
    st: SymbolTable, controls: tuple[CtrlInstr, ...], env: dict[str, tuple[int, int]]
) -> Expr | None:
    guards = [c for c in controls if c.classical]
    if not guards:
        return None
    return conj(tuple(_bool_operand(st, g.expr, env) for g in guards))


# --- generation bookkeeping ---

def _current_generation(st: SymbolTable) -> tuple[int, Layout]:
    if not st.generations:
        raise ObligationError("no quantum state generation exists yet")
    g = st.generations[-1]
    return g.index, g.layout


def _same_shape(a: Layout, b: Layout) -> bool:
    return [(r.name, r.size) for r in a.regs] == [(r.name, r.size) for r in b.regs]


def _guarded(
    out: ObligationSet,
    guard: Expr | None,
    equations: list[Expr],
    copies: list[Expr],
    comment: str,
) -> None:
    """Emit equations under an optional classical guard.

    Without a guard the equations land directly; with one, the guard
    implies them and its negation implies the identity copies.
    """
    if guard is None:
        for e in equations:
            out.add(e, comment=comment)
        return
    out.add(implies(guard, conj(tuple(equations))), comment=comment)
    out.add(
        implies(not_(guard), conj(tuple(copies))),
        comment=comment + " (guard false: state copied)",
    )


# --- per-instruction generators ---

_S_ZERO = Scalar.rational(0)
_S_ONE = Scalar.rational(1)


def _emit_closed(
    st: SymbolTable, out: ObligationSet, nt: int, closed: tuple,
    indices=None,
) -> None:
    """Assert each amplitude's propagated closed form.

    These restate the chained equations with every earlier generation
    substituted away, leaving polynomials in oracle cells and invsqrt2
    only; solvers then never have to eliminate the chain themselves.
    """
    for i in (range(len(closed)) if indices is None else indices):
        s = closed[i]
        re, im = st.amplitude(nt, i)
        out.add(eq(re, _poly_expr(s.re, st)), comment="propagated")
        out.add(eq(im, _poly_expr(s.im, st)), comment="propagated")


def _gen_qinit(
    st: SymbolTable, out: ObligationSet, proc: QramProcess
) -> None:
    inst = proc.q
    new_layout = Layout.from_memory(proc.mem_q)
    if not st.generations:
        if [(r.name, r.size) for r in new_layout.regs] != [(inst.var, inst.size)]:
            raise LayoutMismatch("first initialisation must create the whole memory")
        closed = tuple(
            _S_ONE if i == inst.value else _S_ZERO
            for i in range(new_layout.dim)
        )
        t = st.new_generation(new_layout, closed)
        for i in range(new_layout.dim):
            re, im = st.amplitude(t, i)
            value = Fraction(1) if i == inst.value else Fraction(0)
            out.add(eq(re, RatConst(value)), comment=f"init {inst.var}")
            out.add(eq(im, RatConst(Fraction(0))), comment=f"init {inst.var}")
        return
    t, old = _current_generation(st)
    expected = list(old.regs) + [new_layout.regs[-1]]
    if not _same_shape(Layout(tuple(expected)), new_layout):
        raise LayoutMismatch(
            f"initialisation of {inst.var!r} does not extend the previous layout"
        )
    n = inst.size
    mask = (1 << n) - 1
    old_closed = st.generation(t).closed
    closed = None
    if old_closed is not None:
        closed = tuple(
            old_closed[i >> n] if i & mask == inst.value else _S_ZERO
            for i in range(new_layout.dim)
        )
    nt = st.new_generation(new_layout, closed)
    for i in range(new_layout.dim):
        re, im = st.amplitude(nt, i)
        if i & mask == inst.value:
            ore, oim = st.amplitude(t, i >> n)
            out.add(eq(re, ore), comment=f"init {inst.var}")
            out.add(eq(im, oim), comment=f"init {inst.var}")
        else:
            out.add(eq(re, RatConst(Fraction(0))), comment=f"init {inst.var}")
            out.add(eq(im, RatConst(Fraction(0))), comment=f"init {inst.var}")
    if closed is not None:
        _emit_closed(
            st, out, nt, closed,
            indices=[i for i in range(new_layout.dim) if i & mask == inst.value],
        )


def _is_diagonal(u: SymbolicMatrix) -> bool:
    return all(
        u.entries[i][j].is_zero
        for i in range(u.dim)
        for j in range(u.dim)
        if i != j
    )


def _operand_vars(o: Operand) -> set[str]:
    if isinstance(o, VarRef):
        return {o.name}
    if isinstance(o, Unary):
        return _operand_vars(o.a)
    if isinstance(o, Binary):
        return _operand_vars(o.left) | _operand_vars(o.right)
    return set()


def _declare_control_oracles(
    st: SymbolTable, o: Operand, layout: Layout
) -> None:
    """Declare every oracle cell a control predicate can touch.

    A predicate applying f to an n-qubit variable can consult any of
    the 2^n cells, one per basis value of the argument.
    """
    if isinstance(o, Unary):
        if o.op != "not" and isinstance(o.a, VarRef):
            size = layout.register(o.a.name).size
            for v in range(1 << size):
                st.oracle_cell(o.op, v)
        _declare_control_oracles(st, o.a, layout)
    elif isinstance(o, Binary):
        _declare_control_oracles(st, o.left, layout)
        _declare_control_oracles(st, o.right, layout)


def _gen_qop(
    st: SymbolTable, out: ObligationSet, proc: QramProcess
) -> None:
    inst = proc.q
    t, old = _current_generation(st)
    new_layout = Layout.from_memory(proc.mem_q)
    if not _same_shape(old, new_layout):
        raise LayoutMismatch(
            f"operation on {inst.var!r} must preserve the memory shape"
        )
    quantum = [c for c in proc.controls if not c.classical]
    if quantum and not _is_diagonal(inst.u):
        for c in quantum:
            if inst.var in _operand_vars(c.expr):
                raise ControlOnTarget(
                    f"control predicate reads {inst.var!r} while a "
                    "non-diagonal operation rewrites it"
                )
    joint = embed(inst.u, list(old.wires(inst.var)), old.total_qubits)
    if quantum:
        for c in quantum:
            _declare_control_oracles(st, c.expr, old)
        b = conjoin_diags(control_diag(c, old) for c in quantum)
        joint = controlled_u(joint, b)
    cenv = _classical_env(proc.mem_c)
    guard = _classical_guard(st, proc.controls, cenv)
    old_closed = st.generation(t).closed
    closed = None
    if old_closed is not None and guard is None:
        closed = tuple(
            sum(
                (joint.entries[i][j] * old_closed[j] for j in range(old.dim)),
                _S_ZERO,
            )
            for i in range(new_layout.dim)
        )
    nt = st.new_generation(new_layout, closed)
    equations = []
    copies = []
    for i in range(new_layout.dim):
        re, im = st.amplitude(nt, i)
        row = joint.entries[i]
        re_pairs = []
        im_pairs = []
        for j in range(old.dim):
            ore, oim = st.amplitude(t, j)
            s = row[j]
            re_pairs.extend([(s.re, ore), (-s.im, oim)])
            im_pairs.extend([(s.re, oim), (s.im, ore)])
        equations.append(eq(re, _combination(st, re_pairs)))
        equations.append(eq(im, _combination(st, im_pairs)))
        ore, oim = st.amplitude(t, i)
        copies.append(eq(re, ore))
        copies.append(eq(im, oim))
    _guarded(out, guard, equations, copies, f"apply {inst.u.label} to {inst.var}")
    if closed is not None:
        _emit_closed(st, out, nt, closed)


def gen_measurement(
    x: str,
    st: SymbolTable,
    flag,
    cmeas: tuple[str, int, int] | None = None,
) -> ObligationSet:
    """The measurement obligation triple for variable x.

    Emits obs_prob (probabilities are the squared amplitude masses and
    sum to one), obs_meas (flag-dependent admissibility of the measured
    value), and obs_post (square-root-witnessed collapse onto the
    residual state).  cmeas, when given, is the classical destination
    (name, version, size) receiving the measured value.
    """
    out = ObligationSet("prog")
    t, layout = _current_generation(st)
    try:
        reg = layout.register(x)
    except AbsentVariable:
        raise LayoutMismatch(f"measured variable {x!r} not in quantum memory")
    w = reg.version
    size = reg.size
    outcomes = 1 << size
    residual = layout.without(x)

    # obs_prob
    closed = st.generation(t).closed
    prs = []
    for i in range(outcomes):
        pr = st.probability(x, w, i)
        prs.append(pr)
        mass = []
        for j in range(residual.dim if residual.regs else 1):
            joint = layout.compose(x, i, j)
            re, im = st.amplitude(t, joint)
            mass.append(mul(re, re))
            mass.append(mul(im, im))
        out.add(eq(pr, add(*mass)), comment=f"obs_prob {x}")
        out.add(le(RatConst(Fraction(0)), pr), comment=f"obs_prob {x}")
        out.add(le(pr, RatConst(Fraction(1))), comment=f"obs_prob {x}")
        if closed is not None:
            total = Poly.rational(0)
            for j in range(residual.dim if residual.regs else 1):
                s = closed[layout.compose(x, i, j)]
                total = total + s.re * s.re + s.im * s.im
            out.add(eq(pr, _poly_expr(total, st)), comment="propagated")
    out.add(eq(add(*prs), RatConst(Fraction(1))), comment=f"obs_prob {x} total")

    # obs_meas
    meas = st.measured(x, size)
    out.add(le(IntConst(0), meas), comment=f"obs_meas {x}")
    out.add(lt(meas, IntConst(outcomes)), comment=f"obs_meas {x}")
    for i in range(outcomes):
        if flag.kind == "rand":
            claim = gt(prs[i], RatConst(Fraction(0)))
        elif flag.kind == "cert":
            claim = eq(prs[i], RatConst(Fraction(1)))
        elif flag.kind == "whp":
            a = Fraction(1, 2) if flag.threshold is None else Fraction(flag.threshold)
            claim = ge(prs[i], RatConst(a))
        else:
            raise ObligationError(f"unknown flag {flag.kind!r}")
        out.add(
            implies(eq(meas, IntConst(i)), claim),
            comment=f"obs_meas {x} ({flag.kind})",
        )

    # obs_post
    if residual.regs:
        nt = st.new_generation(residual)
        for i in range(outcomes):
            s = st.sqrt_witness(x, w, i)
            out.add(ge(s, RatConst(Fraction(0))), comment=f"obs_post {x} witness")
            out.add(eq(mul(s, s), prs[i]), comment=f"obs_post {x} witness")
            for j in range(residual.dim):
                joint = layout.compose(x, i, j)
                ore, oim = st.amplitude(t, joint)
                nre, nim = st.amplitude(nt, j)
                out.add(
                    implies(eq(meas, IntConst(i)), eq(mul(s, nre), ore)),
                    comment=f"obs_post {x}",
                )
                out.add(
                    implies(eq(meas, IntConst(i)), eq(mul(s, nim), oim)),
                    comment=f"obs_post {x}",
                )

    # paired classical write
    if cmeas is not None:
        cvar, cversion, csize = cmeas
        csym = st.classical(cvar, cversion, csize)
        out.add(eq(csym, meas), comment=f"measured value stored in {cvar}")
    return out


def gen_process(proc: QramProcess, st: SymbolTable, flag) -> ObligationSet:
    """Obligations contributed by a single process."""
    out = ObligationSet("prog")
    q, c = proc.q, proc.c
    if isinstance(q, QInit):
        _gen_qinit(st, out, proc)
    elif isinstance(q, QOp):
        _gen_qop(st, out, proc)
    elif isinstance(q, QMeas):
        if not isinstance(c, CMeas):
            raise ObligationError("measurement lacks its classical pairing")
        reg = None
        for r in proc.mem_c.regs:
            if r.name == c.var:
                reg = r
        if reg is None:
            raise ObligationError(f"measured into absent variable {c.var!r}")
        return gen_measurement(
            q.var, st, flag, cmeas=(c.var, reg.version, reg.size)
        )
    elif isinstance(q, Skip):
        pass
    else:
        raise ObligationError(f"unknown quantum instruction {q!r}")

    if isinstance(c, CSet):
        env = _classical_env(proc.mem_c, assigned=c.var)
        version, _ = env[c.var]
        sym = st.classical(c.var, version + 1, c.size)
        value = _arith_operand(st, c.value, env)
        guard = _classical_guard(st, proc.controls, env)
        copies = []
        if guard is not None:
            if version < 0:
                raise ObligationError(
                    f"guarded write to {c.var!r} before any unconditional one"
                )
            copies = [eq(sym, st.classical(c.var, version, c.size))]
        _guarded(out, guard, [eq(sym, value)], copies, f"set {c.var}")
    elif isinstance(c, (CMeas, Return, Skip)):
        pass
    else:
        raise ObligationError(f"unknown classical instruction {c!r}")
    return out


def gen_program(p: QramProgram, flag) -> tuple[ObligationSet, SymbolTable, str | None]:
    """Fold gen_process over a program.

    Returns the obligations, the shared symbol table, and the name of
    the classical symbol bound to the returned value (None when the
    program never returns).
    """
    st = SymbolTable()
    out = ObligationSet("prog")
    ret_binding: str | None = None
    if p:
        written = None
        if isinstance(p[0].c, (CSet, CMeas)):
            written = p[0].c.var
        for r in p[0].mem_c.regs:
            # Classical registers already live before the first
            # instruction ran are the function's inputs; give each a
            # ranged version-0 symbol so guards and expressions can
            # read them.
            if r.name != written:
                st.classical(r.name, r.version, r.size)
    for proc in p:
        part = gen_process(proc, st, flag)
        out.extend(part)
        if isinstance(proc.c, Return):
            reg = None
            for r in proc.mem_c.regs:
                if r.name == proc.c.var:
                    reg = r
            if reg is None:
                raise ObligationError(
                    f"returned variable {proc.c.var!r} not in classical memory"
                )
            ret_binding = names.classical(reg.name, reg.version)
    return out, st, ret_binding
