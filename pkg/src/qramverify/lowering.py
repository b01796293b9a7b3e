"""Lowering from the annotated surface AST to the process-model IR.

Each surface statement becomes at most a handful of processes.  The
lowering threads two memory snapshots (quantum and classical) and a
stack of control instructions through the statement list; every emitted
process records the snapshots *after* its own instruction took effect,
so consecutive processes always differ by at most one memory operation
per store.

Version numbers count per variable name across both stores.  When a
quantum variable is measured into a classical one of the same name, the
classical binding continues the quantum version sequence rather than
restarting at zero, which keeps (name, version) pairs unique over the
whole program history.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import LoweringError, NonBooleanCondition
from .gate_algebra import Angle, SymbolicMatrix, embed, gate
from .qram_model import (
    Binary,
    CMeas,
    Const,
    CSet,
    CtrlInstr,
    Memory,
    Operand,
    QInit,
    QMeas,
    QOp,
    QramProcess,
    QramProgram,
    Return,
    SKIP,
    Unary,
    VarRef,
    empty_memory,
    mem_amend,
    mem_del,
    mem_iter,
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
    Stmt,
    VarDecl,
)

_VALUE_OPS = {"+": "+", "-": "-", "*": "*", "%": "mod"}
_CMP_OPS = {"==": "==", "<=": "<=", "<": "<"}


def _operand(e: Expr) -> Operand:
    """Convert a surface value expression to an IR operand tree."""
    if isinstance(e, IntLit):
        return Const(e.value)
    if isinstance(e, Name):
        return VarRef(e.ident)
    if isinstance(e, Call):
        if len(e.args) != 1 or not isinstance(e.args[0], Name):
            raise LoweringError("oracle application must take a single variable")
        return Unary(e.func, VarRef(e.args[0].ident))
    if isinstance(e, BinExpr):
        if e.op in _VALUE_OPS:
            return Binary(_operand(e.left), _VALUE_OPS[e.op], _operand(e.right))
        if e.op in _CMP_OPS:
            return Binary(_operand(e.left), _CMP_OPS[e.op], _operand(e.right))
        if e.op == "&&":
            return Binary(_operand(e.left), "and", _operand(e.right))
        raise LoweringError(f"operator {e.op!r} has no IR form")
    if isinstance(e, NotExpr):
        return Unary("not", _operand(e.operand))
    raise LoweringError(f"expression {e!r} has no IR form")


def _is_boolean(e: Expr) -> bool:
    if isinstance(e, (NotExpr,)):
        return True
    if isinstance(e, BinExpr) and (e.op in _CMP_OPS or e.op == "&&"):
        return True
    if isinstance(e, Call):
        return True
    if isinstance(e, (Name, IntLit)) and e.ty is not None and e.ty.size == 1:
        return True
    return False


def _expr_is_classical(e: Expr) -> bool:
    """Decide from type annotations whether a condition is classical."""
    if isinstance(e, IntLit):
        return True
    if isinstance(e, Name):
        return e.ty is None or e.ty.classical
    if isinstance(e, Call):
        return all(_expr_is_classical(a) for a in e.args)
    if isinstance(e, BinExpr):
        return _expr_is_classical(e.left) and _expr_is_classical(e.right)
    if isinstance(e, NotExpr):
        return _expr_is_classical(e.operand)
    return True


def lower_condition(e: Expr) -> CtrlInstr:
    """Build the control instruction for a conditional's guard.

    A bare single-bit variable or oracle application is compared against
    one; comparisons, conjunctions, and negations map to the matching
    operand nodes.  The instruction is marked classical exactly when no
    quantum variable or oracle application occurs in the guard.
    """
    if not _is_boolean(e):
        raise NonBooleanCondition("condition is not a boolean expression")
    classical = _expr_is_classical(e)
    if isinstance(e, (Name, Call)):
        op = Binary(_operand(e), "==", Const(1))
    else:
        op = _operand(e)
    return CtrlInstr(op, classical)


@dataclass
class LoweringContext:
    """Mutable state threaded through the statement walk."""

    fuse: bool = False
    mem_q: Memory = field(default_factory=lambda: empty_memory("quantum"))
    mem_c: Memory = field(default_factory=lambda: empty_memory("classical"))
    controls: tuple[CtrlInstr, ...] = ()
    versions: dict[str, int] = field(default_factory=dict)
    oracles: dict[str, int] = field(default_factory=dict)
    processes: list[QramProcess] = field(default_factory=list)

    def bump(self, name: str) -> int:
        v = self.versions.get(name)
        v = 0 if v is None else v + 1
        self.versions[name] = v
        return v

    def emit(self, q, c) -> None:
        self.processes.append(
            QramProcess(q, self.mem_q, c, self.mem_c, self.controls)
        )


def _gate_matrix(s: GateApply, size: int) -> SymbolicMatrix:
    u = gate(s.gate_name)
    wire = s.wire if s.wire is not None else 0
    return embed(u, [wire], size)


def _lower_stmt(ctx: LoweringContext, s: Stmt) -> None:
    if isinstance(s, VarDecl):
        if ctx.controls:
            raise LoweringError(
                f"declaration of {s.name!r} under a conditional", line=s.pos.line
            )
        size = s.decl_type.size
        v = ctx.bump(s.name)
        if s.decl_type.classical:
            ctx.mem_c = mem_amend(ctx.mem_c, s.name, size, version=v)
            ctx.emit(SKIP, CSet(s.name, size, Const(s.value)))
        else:
            if not 0 <= s.value < 2 ** size:
                raise LoweringError(
                    f"initial value {s.value} does not fit {size} qubit(s)",
                    line=s.pos.line,
                )
            ctx.mem_q = mem_amend(ctx.mem_q, s.name, size, version=v)
            ctx.emit(QInit(s.name, size, s.value), SKIP)
        return

    if isinstance(s, GateApply):
        reg = ctx.mem_q.get(s.target)
        if reg is None:
            raise LoweringError(
                f"gate applied to absent quantum variable {s.target!r}",
                line=s.pos.line,
            )
        u = _gate_matrix(s, reg.size)
        if ctx.fuse and ctx.processes:
            prev = ctx.processes[-1]
            if (
                isinstance(prev.q, QOp)
                and prev.q.var == s.target
                and prev.controls == ctx.controls
            ):
                fused = u @ prev.q.u
                ctx.processes[-1] = QramProcess(
                    QOp(fused, s.target), prev.mem_q, SKIP, prev.mem_c, prev.controls
                )
                return
        ctx.mem_q = mem_iter(ctx.mem_q, s.target)
        ctx.bump(s.target)
        ctx.emit(QOp(u, s.target), SKIP)
        return

    if isinstance(s, PhaseApply):
        if not ctx.mem_q.regs:
            raise LoweringError(
                "phase applied with no quantum state", line=s.pos.line
            )
        target = ctx.mem_q.regs[0]
        theta = Angle.from_fraction(s.num, s.den)
        u = embed(gate("phase", theta), [], target.size)
        if ctx.fuse and ctx.processes:
            prev = ctx.processes[-1]
            if (
                isinstance(prev.q, QOp)
                and prev.q.var == target.name
                and prev.controls == ctx.controls
            ):
                fused = u @ prev.q.u
                ctx.processes[-1] = QramProcess(
                    QOp(fused, target.name), prev.mem_q, SKIP, prev.mem_c,
                    prev.controls,
                )
                return
        ctx.mem_q = mem_iter(ctx.mem_q, target.name)
        ctx.bump(target.name)
        ctx.emit(QOp(u, target.name), SKIP)
        return

    if isinstance(s, MeasureAssign):
        if ctx.controls:
            raise LoweringError(
                "measurement under a conditional", line=s.pos.line
            )
        reg = ctx.mem_q.get(s.source)
        if reg is None:
            raise LoweringError(
                f"measurement of absent quantum variable {s.source!r}",
                line=s.pos.line,
            )
        ctx.mem_q = mem_del(ctx.mem_q, s.source)
        if s.target != s.source:
            # Retire the source name so its versions stay unique, then
            # start (or continue) the target's own sequence.
            ctx.bump(s.source)
        v = ctx.bump(s.target)
        ctx.mem_c = mem_amend(ctx.mem_c, s.target, reg.size, version=v)
        ctx.emit(QMeas(s.source), CMeas(s.target))
        return

    if isinstance(s, ClassicalAssign):
        if any(not c.classical for c in ctx.controls):
            raise LoweringError(
                "classical assignment under a quantum conditional",
                line=s.pos.line,
            )
        size = s.size if s.size is not None else 1
        v = ctx.bump(s.name)
        ctx.mem_c = mem_amend(ctx.mem_c, s.name, size, version=v)
        ctx.emit(SKIP, CSet(s.name, size, _operand(s.expr)))
        return

    if isinstance(s, OracleCondBlock):
        ctrl = lower_condition(s.cond)
        if s.cond_classical is not None and ctrl.classical != s.cond_classical:
            ctrl = CtrlInstr(ctrl.expr, s.cond_classical)
        ctx.controls = ctx.controls + (ctrl,)
        for inner in s.body:
            _lower_stmt(ctx, inner)
        ctx.controls = ctx.controls[:-1]
        if s.else_body:
            ctx.controls = ctx.controls + (ctrl.negated(),)
            for inner in s.else_body:
                _lower_stmt(ctx, inner)
            ctx.controls = ctx.controls[:-1]
        return

    if isinstance(s, ReturnStmt):
        if ctx.controls:
            raise LoweringError("return under a conditional", line=s.pos.line)
        if ctx.mem_c.get(s.name) is None:
            raise LoweringError(
                f"return of absent classical variable {s.name!r}",
                line=s.pos.line,
            )
        ctx.emit(SKIP, Return(s.name))
        return

    raise LoweringError(f"statement {s!r} has no lowering")


def lower_function(ast: SilqAst, fname: str, fuse: bool = False) -> QramProgram:
    """Lower one type-checked function to a process-model program.

    Oracle parameters contribute no processes; they surface later as
    uninterpreted cells when conditions mentioning them are encoded.
    With ``fuse`` enabled, adjacent single-qubit operations on the same
    variable under the same control stack are combined into one process
    by exact matrix product, which preserves the program semantics while
    shrinking the proof obligations.
    """
    fn = ast.function(fname)
    if fn is None:
        raise LoweringError(f"no function named {fname!r}")
    if fn.return_name is None:
        raise LoweringError(f"function {fname!r} was not type-checked")
    ctx = LoweringContext(fuse=fuse)
    ctx.oracles.update(
        {name: domain for name, (domain, _) in fn.oracle_params.items()}
    )
    for p in fn.params:
        if p.name in fn.oracle_params:
            continue
        # Classical data parameters enter the classical store at
        # version 0 before any statement runs; they contribute no
        # process of their own.
        v = ctx.bump(p.name)
        ctx.mem_c = mem_amend(ctx.mem_c, p.name, p.ty.size, version=v)
    for s in fn.body:
        _lower_stmt(ctx, s)
    if ctx.controls:
        raise LoweringError("unbalanced control stack after lowering")
    return tuple(ctx.processes)
