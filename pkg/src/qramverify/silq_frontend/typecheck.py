"""Classicality and size analysis for parsed programs.

Annotates the AST in place: every variable and expression gets a size
in (qu)bits and a classical/quantum classification, conditions are
classified by their free variables, and statements receive the derived
fields lowering needs (wires, sizes, first-write marks).
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import MixedConditionError, SilqTypeError, UnsupportedFeature
from .ast_nodes import (
    BinExpr,
    Call,
    ClassicalAssign,
    DataType,
    Expr,
    FunctionDef,
    GateApply,
    Index,
    IntLit,
    MeasureAssign,
    Name,
    NotExpr,
    OracleCondBlock,
    OracleType,
    PhaseApply,
    ReturnStmt,
    SilqAst,
    VarDecl,
)

MAX_WIDTH = 16

_CMP_OPS = ("==", "<=", "<")
_ARITH_OPS = ("+", "-", "*", "%")


@dataclass
class _ExprInfo:
    kind: str                 # "int" | "bool"
    size: int
    classical: bool | None    # None: constants only


def _merge_classical(a: bool | None, b: bool | None, pos) -> bool | None:
    if a is None:
        return b
    if b is None:
        return a
    if a != b:
        raise MixedConditionError(
            "expression mixes classical and quantum variables", pos.line, pos.col
        )
    return a


class _FunctionChecker:
    def __init__(self, fn: FunctionDef):
        self.fn = fn
        self.env: dict[str, DataType] = {}
        self.oracles: dict[str, tuple[int, int]] = {}

    def run(self) -> None:
        fn = self.fn
        for p in fn.params:
            if isinstance(p.ty, OracleType):
                if p.ty.result.size != 1:
                    raise UnsupportedFeature(
                        "oracle results wider than one bit", p.pos.line, p.pos.col
                    )
                self.oracles[p.name] = (p.ty.domain.size, p.ty.result.size)
            elif isinstance(p.ty, DataType):
                if not p.ty.classical:
                    raise UnsupportedFeature(
                        "quantum data parameters", p.pos.line, p.pos.col
                    )
                self.env[p.name] = p.ty
            else:
                raise UnsupportedFeature("parameter type", p.pos.line, p.pos.col)
        fn.oracle_params = dict(self.oracles)
        fn.return_name = None
        fn.return_size = None
        self.check_body(fn.body, under_quantum=False, under_any=False)

    # -- expressions --

    def expr_info(self, e: Expr) -> _ExprInfo:
        if isinstance(e, IntLit):
            e.ty = DataType("uint", max(1, e.value.bit_length()), True)
            return _ExprInfo("int", e.ty.size, None)
        if isinstance(e, Name):
            ty = self.env.get(e.ident)
            if ty is None:
                raise SilqTypeError(
                    f"variable {e.ident!r} is not live here", e.pos.line, e.pos.col
                )
            e.ty = ty
            return _ExprInfo("int", ty.size, ty.classical)
        if isinstance(e, Index):
            raise UnsupportedFeature(
                "wire indexing outside gate application", e.pos.line, e.pos.col
            )
        if isinstance(e, Call):
            sig = self.oracles.get(e.func)
            if sig is None:
                raise UnsupportedFeature(
                    f"call to {e.func!r} (not an oracle parameter)",
                    e.pos.line, e.pos.col,
                )
            if len(e.args) != 1:
                raise SilqTypeError(
                    f"oracle {e.func!r} takes one argument", e.pos.line, e.pos.col
                )
            arg = self.expr_info(e.args[0])
            if arg.kind != "int":
                raise SilqTypeError("oracle argument must be a register", e.pos.line, e.pos.col)
            if arg.size != sig[0]:
                raise SilqTypeError(
                    f"oracle {e.func!r} expects {sig[0]} (qu)bits, got {arg.size}",
                    e.pos.line, e.pos.col,
                )
            classical = arg.classical is None or arg.classical
            e.ty = DataType("bit", sig[1], classical)
            return _ExprInfo("int", sig[1], classical)
        if isinstance(e, BinExpr):
            l = self.expr_info(e.left)
            r = self.expr_info(e.right)
            cls = _merge_classical(l.classical, r.classical, e.pos)
            if e.op in _CMP_OPS:
                if l.kind != "int" or r.kind != "int":
                    raise SilqTypeError("comparison needs integer operands", e.pos.line, e.pos.col)
                return _ExprInfo("bool", 1, cls)
            if e.op == "&&":
                if l.kind != "bool" or r.kind != "bool":
                    raise SilqTypeError("'&&' needs boolean operands", e.pos.line, e.pos.col)
                return _ExprInfo("bool", 1, cls)
            if e.op in _ARITH_OPS:
                if l.kind != "int" or r.kind != "int":
                    raise SilqTypeError("arithmetic needs integer operands", e.pos.line, e.pos.col)
                if cls is False:
                    raise UnsupportedFeature(
                        "arithmetic on quantum registers", e.pos.line, e.pos.col
                    )
                return _ExprInfo("int", min(MAX_WIDTH, max(l.size, r.size)), cls)
            raise SilqTypeError(f"unknown operator {e.op!r}", e.pos.line, e.pos.col)
        if isinstance(e, NotExpr):
            inner = self.expr_info(e.operand)
            if inner.kind != "bool" and inner.size != 1:
                raise SilqTypeError("'!' needs a boolean operand", e.pos.line, e.pos.col)
            return _ExprInfo("bool", 1, inner.classical)
        raise SilqTypeError(f"unexpected expression {e!r}", 0, 0)

    # -- statements --

    def check_body(self, body, under_quantum: bool, under_any: bool) -> None:
        for s in body:
            if isinstance(s, VarDecl):
                if s.name in self.env or s.name in self.oracles:
                    raise SilqTypeError(
                        f"variable {s.name!r} redeclared", s.pos.line, s.pos.col
                    )
                if not (0 <= s.value < (1 << s.decl_type.size)):
                    raise SilqTypeError(
                        f"constant {s.value} does not fit {s.decl_type.render()}",
                        s.pos.line, s.pos.col,
                    )
                self.env[s.name] = s.decl_type
            elif isinstance(s, GateApply):
                ty = self.env.get(s.target)
                if ty is None:
                    raise SilqTypeError(
                        f"variable {s.target!r} is not live here", s.pos.line, s.pos.col
                    )
                if ty.classical:
                    raise SilqTypeError(
                        f"gate applied to classical variable {s.target!r}",
                        s.pos.line, s.pos.col,
                    )
                if s.index is None:
                    if ty.size != 1:
                        raise SilqTypeError(
                            f"{s.gate_name} acts on one qubit; {s.target!r} has {ty.size}",
                            s.pos.line, s.pos.col,
                        )
                    s.wire = 0
                else:
                    if not (0 <= s.index < ty.size):
                        raise SilqTypeError(
                            f"wire {s.index} out of range for {s.target!r}",
                            s.pos.line, s.pos.col,
                        )
                    s.wire = s.index
                s.var_size = ty.size
            elif isinstance(s, PhaseApply):
                pass
            elif isinstance(s, MeasureAssign):
                src = self.env.get(s.source)
                if src is None:
                    raise SilqTypeError(
                        f"variable {s.source!r} is not live here", s.pos.line, s.pos.col
                    )
                if src.classical:
                    raise SilqTypeError(
                        f"measuring classical variable {s.source!r}", s.pos.line, s.pos.col
                    )
                if s.target != s.source and (
                    s.target in self.env or s.target in self.oracles
                ):
                    raise SilqTypeError(
                        f"variable {s.target!r} redeclared by measurement",
                        s.pos.line, s.pos.col,
                    )
                del self.env[s.source]
                self.env[s.target] = DataType(src.kind, src.size, True)
                s.size = src.size
            elif isinstance(s, ClassicalAssign):
                info = self.expr_info(s.expr)
                if info.kind != "int":
                    raise SilqTypeError(
                        "assignment needs an integer expression", s.pos.line, s.pos.col
                    )
                if info.classical is False:
                    raise SilqTypeError(
                        "cannot store a quantum expression in a classical variable",
                        s.pos.line, s.pos.col,
                    )
                if under_quantum:
                    raise MixedConditionError(
                        "classical state mutated under a quantum condition",
                        s.pos.line, s.pos.col,
                    )
                existing = self.env.get(s.name)
                if s.is_define and existing is None and s.name not in self.oracles:
                    if under_any:
                        raise SilqTypeError(
                            "definitions must be unconditional", s.pos.line, s.pos.col
                        )
                    size = min(MAX_WIDTH, max(1, info.size))
                    self.env[s.name] = DataType("uint", size, True)
                    s.size = size
                    s.first_write = True
                else:
                    if existing is None:
                        raise SilqTypeError(
                            f"variable {s.name!r} is not live here", s.pos.line, s.pos.col
                        )
                    if not existing.classical:
                        raise SilqTypeError(
                            f"classical write to quantum variable {s.name!r}",
                            s.pos.line, s.pos.col,
                        )
                    s.size = existing.size
                    s.first_write = False
            elif isinstance(s, OracleCondBlock):
                info = self.expr_info(s.cond)
                if info.kind == "int" and info.size != 1:
                    raise SilqTypeError(
                        "a condition must be a boolean or a single (qu)bit",
                        s.pos.line, s.pos.col,
                    )
                cls = info.classical if info.classical is not None else True
                s.cond_classical = cls
                q = under_quantum or not cls
                self.check_body(s.body, under_quantum=q, under_any=True)
                self.check_body(s.else_body, under_quantum=q, under_any=True)
            elif isinstance(s, ReturnStmt):
                ty = self.env.get(s.name)
                if ty is None:
                    raise SilqTypeError(
                        f"variable {s.name!r} is not live here", s.pos.line, s.pos.col
                    )
                if not ty.classical:
                    raise SilqTypeError(
                        "return argument must be classical (measure it first)",
                        s.pos.line, s.pos.col,
                    )
                s.size = ty.size
                self.fn.return_name = s.name
                self.fn.return_size = ty.size
            else:
                raise SilqTypeError(f"unknown statement {s!r}", 0, 0)


def type_check(ast: SilqAst) -> SilqAst:
    """Annotate and validate every function; returns the same AST."""
    for fn in ast.functions:
        _FunctionChecker(fn).run()
    return ast
