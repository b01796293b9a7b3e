"""AST for the hybrid quantum/classical source language.

Nodes are plain dataclasses.  Fields with a None default are filled in
by the type checker (sizes, classicality, wire positions); the parser
leaves them unset.
"""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Pos:
    line: int
    col: int


# --- types ---

@dataclass
class DataType:
    """A bit (B) or fixed-width unsigned integer (uint[n]) type."""

    kind: str              # "bit" | "uint"
    size: int              # number of (qu)bits, 1 for a bit
    classical: bool        # leading "!" in the source

    def render(self) -> str:
        bang = "!" if self.classical else ""
        if self.kind == "bit":
            return f"{bang}B"
        return f"{bang}uint[{self.size}]"


@dataclass
class OracleType:
    """A first-order function parameter type, e.g. const uint[2]!->qfree B.

    const and qfree are carried as inert metadata; the verifier only
    needs the domain and result widths.
    """

    domain: DataType
    result: DataType
    const_arg: bool = True
    qfree: bool = True

    def render(self) -> str:
        parts = []
        if self.const_arg:
            parts.append("const ")
        parts.append(self.domain.render())
        parts.append("!->")
        if self.qfree:
            parts.append("qfree ")
        parts.append(self.result.render())
        return "".join(parts)


SilqType = DataType | OracleType


# --- expressions ---

@dataclass
class IntLit:
    value: int
    pos: Pos
    ty: DataType | None = None


@dataclass
class Name:
    ident: str
    pos: Pos
    ty: DataType | None = None


@dataclass
class Index:
    """A single-wire view x[i] of a register; gate targets only."""

    ident: str
    index: int
    pos: Pos
    ty: DataType | None = None


@dataclass
class Call:
    """Application of a builtin gate or an oracle parameter."""

    func: str
    args: list["Expr"]
    pos: Pos
    ty: DataType | None = None


@dataclass
class BinExpr:
    op: str                # == <= < + - * % &&
    left: "Expr"
    right: "Expr"
    pos: Pos
    ty: DataType | None = None


@dataclass
class NotExpr:
    operand: "Expr"
    pos: Pos
    ty: DataType | None = None


Expr = IntLit | Name | Index | Call | BinExpr | NotExpr


# --- statements ---

@dataclass
class VarDecl:
    """x := c:T  — typed constant declaration."""

    name: str
    value: int
    decl_type: DataType
    pos: Pos


@dataclass
class GateApply:
    """x := H(x) or y[i] := X(y[i]); the argument equals the target."""

    target: str
    index: int | None
    gate_name: str
    pos: Pos
    wire: int | None = None       # wire within the variable, set by typecheck
    var_size: int | None = None


@dataclass
class PhaseApply:
    """phase(theta); a global phase on the current quantum state."""

    num: int                      # theta = num*pi/den
    den: int
    pos: Pos


@dataclass
class MeasureAssign:
    """x := measure(y); collapses y and binds a classical x."""

    target: str
    source: str
    pos: Pos
    size: int | None = None


@dataclass
class ClassicalAssign:
    """x := e or x = e over classical operands."""

    name: str
    expr: Expr
    is_define: bool
    pos: Pos
    size: int | None = None
    first_write: bool | None = None


@dataclass
class OracleCondBlock:
    """if cond { ... } else { ... }; the condition may be classical or
    quantum (e.g. an oracle application), which decides how the body is
    guarded downstream."""

    cond: Expr
    body: list["Stmt"]
    else_body: list["Stmt"]
    pos: Pos
    cond_classical: bool | None = None


@dataclass
class ReturnStmt:
    name: str
    pos: Pos
    size: int | None = None


Stmt = (
    VarDecl
    | GateApply
    | PhaseApply
    | MeasureAssign
    | ClassicalAssign
    | OracleCondBlock
    | ReturnStmt
)


@dataclass
class Param:
    name: str
    ty: SilqType
    pos: Pos


@dataclass
class FunctionDef:
    name: str
    params: list[Param]
    body: list[Stmt]
    pos: Pos
    # set by typecheck:
    oracle_params: dict[str, tuple[int, int]] = field(default_factory=dict)
    return_name: str | None = None
    return_size: int | None = None


@dataclass
class SilqAst:
    functions: list[FunctionDef]

    def function(self, name: str) -> FunctionDef | None:
        for f in self.functions:
            if f.name == name:
                return f
        return None


def walk_stmts(body: list[Stmt]):
    """Yield every statement node in a body, depth first."""
    for s in body:
        yield s
        if isinstance(s, OracleCondBlock):
            yield from walk_stmts(s.body)
            yield from walk_stmts(s.else_body)
