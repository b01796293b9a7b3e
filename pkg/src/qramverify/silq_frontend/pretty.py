"""Canonical source rendering of a parsed program."""

from __future__ import annotations

from .ast_nodes import (
    BinExpr,
    Call,
    ClassicalAssign,
    Expr,
    FunctionDef,
    GateApply,
    Index,
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

_INDENT = "    "


def render_expr(e: Expr) -> str:
    if isinstance(e, IntLit):
        return str(e.value)
    if isinstance(e, Name):
        return e.ident
    if isinstance(e, Index):
        return f"{e.ident}[{e.index}]"
    if isinstance(e, Call):
        return f"{e.func}({', '.join(render_expr(a) for a in e.args)})"
    if isinstance(e, NotExpr):
        return f"!({render_expr(e.operand)})"
    if isinstance(e, BinExpr):
        return f"({render_expr(e.left)} {e.op} {render_expr(e.right)})"
    raise TypeError(f"not an expression: {e!r}")


def _angle(num: int, den: int) -> str:
    sign = "-" if num < 0 else ""
    mag = abs(num)
    head = "pi" if mag == 1 else f"{mag}*pi"
    tail = "" if den == 1 else f"/{den}"
    return f"{sign}{head}{tail}"


def _render_stmt(s, depth: int, out: list[str]) -> None:
    pad = _INDENT * depth
    if isinstance(s, VarDecl):
        out.append(f"{pad}{s.name} := {s.value}:{s.decl_type.render()};")
    elif isinstance(s, GateApply):
        t = s.target if s.index is None else f"{s.target}[{s.index}]"
        out.append(f"{pad}{t} := {s.gate_name}({t});")
    elif isinstance(s, PhaseApply):
        out.append(f"{pad}phase({_angle(s.num, s.den)});")
    elif isinstance(s, MeasureAssign):
        out.append(f"{pad}{s.target} := measure({s.source});")
    elif isinstance(s, ClassicalAssign):
        op = ":=" if s.is_define else "="
        out.append(f"{pad}{s.name} {op} {render_expr(s.expr)};")
    elif isinstance(s, OracleCondBlock):
        out.append(f"{pad}if {render_expr(s.cond)}{{")
        for child in s.body:
            _render_stmt(child, depth + 1, out)
        if s.else_body:
            out.append(f"{pad}}}else{{")
            for child in s.else_body:
                _render_stmt(child, depth + 1, out)
        out.append(f"{pad}}}")
    elif isinstance(s, ReturnStmt):
        out.append(f"{pad}return {s.name};")
    else:
        raise TypeError(f"not a statement: {s!r}")


def render_function(fn: FunctionDef) -> str:
    params = ", ".join(f"{p.name}: {p.ty.render()}" for p in fn.params)
    out = [f"def {fn.name}({params}){{"]
    for s in fn.body:
        _render_stmt(s, 1, out)
    out.append("}")
    return "\n".join(out)


def render_program(ast: SilqAst) -> str:
    return "\n\n".join(render_function(f) for f in ast.functions) + "\n"
