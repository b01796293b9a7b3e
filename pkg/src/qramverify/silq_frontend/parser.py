"""Lexer and recursive-descent parser for the program source language.

The concrete grammar is documented in docs/silq-hybrid-grammar.md; it
covers typed constant declarations, gate application, measurement,
classical assignment, conditionals, phase statements, and a final
classical return.  Constructs of the wider language outside this
fragment (loops, general function calls, ...) raise UnsupportedFeature.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import SilqSyntaxError, UnsupportedFeature, UseBeforeDefine
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
    Param,
    PhaseApply,
    Pos,
    ReturnStmt,
    SilqAst,
    Stmt,
    VarDecl,
)

KEYWORDS = {"def", "if", "else", "return", "measure", "const", "qfree", "phase", "pi"}

# Words that begin constructs of the wider language we deliberately
# exclude; naming them gives a clearer error than a generic parse fail.
FOREIGN_KEYWORDS = {"for", "while", "repeat", "forget", "lambda", "dup", "reverse"}

GATE_NAMES = ("H", "X")

_PUNCT = [
    ":=", "==", "<=", "&&", "!->", "->",
    "{", "}", "(", ")", "[", "]", ";", ",", ":", "=", "<", "!", "+", "-", "*", "%", "/",
]


@dataclass
class Token:
    kind: str        # "ident", "int", "kw", or the punctuation itself
    value: str
    line: int
    col: int

    @property
    def pos(self) -> Pos:
        return Pos(self.line, self.col)


def tokenize(source: str) -> list[Token]:
    toks: list[Token] = []
    i = 0
    line, col = 1, 1
    n = len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if source.startswith("//", i):
            while i < n and source[i] != "\n":
                i += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            toks.append(Token("int", source[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            kind = "kw" if word in KEYWORDS else "ident"
            toks.append(Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        for p in _PUNCT:
            if source.startswith(p, i):
                toks.append(Token(p, p, line, col))
                col += len(p)
                i += len(p)
                break
        else:
            raise SilqSyntaxError(f"unexpected character {ch!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


class Parser:
    def __init__(self, tokens: list[Token]):
        self.toks = tokens
        self.i = 0

    # -- token plumbing --

    def peek(self, ahead: int = 0) -> Token:
        return self.toks[min(self.i + ahead, len(self.toks) - 1)]

    def next(self) -> Token:
        t = self.toks[self.i]
        if t.kind != "eof":
            self.i += 1
        return t

    def at(self, kind: str, value: str | None = None) -> bool:
        t = self.peek()
        return t.kind == kind and (value is None or t.value == value)

    def expect(self, kind: str, what: str | None = None) -> Token:
        t = self.peek()
        if t.kind != kind:
            expected = what or kind
            raise SilqSyntaxError(
                f"expected {expected}, found {t.value or t.kind!r}", t.line, t.col
            )
        return self.next()

    # -- grammar --

    def parse_program(self) -> SilqAst:
        funcs = []
        while not self.at("eof"):
            funcs.append(self.parse_function())
        if not funcs:
            t = self.peek()
            raise SilqSyntaxError("no function definitions found", t.line, t.col)
        return SilqAst(funcs)

    def parse_function(self) -> FunctionDef:
        t = self.peek()
        if not (t.kind == "kw" and t.value == "def"):
            raise SilqSyntaxError("expected 'def'", t.line, t.col)
        self.next()
        name = self.expect("ident", "function name")
        self.expect("(")
        params: list[Param] = []
        while not self.at(")"):
            if params:
                self.expect(",")
            pname = self.expect("ident", "parameter name")
            self.expect(":")
            pty = self.parse_type()
            params.append(Param(pname.value, pty, pname.pos))
        self.expect(")")
        body = self.parse_block(top_level=True)
        return FunctionDef(name.value, params, body, name.pos)

    def parse_type(self):
        const_arg = False
        if self.at("kw", "const"):
            self.next()
            const_arg = True
        base = self.parse_data_type()
        if self.at("!->") or self.at("->"):
            self.next()
            qfree = False
            if self.at("kw", "qfree"):
                self.next()
                qfree = True
            result = self.parse_data_type()
            return OracleType(base, result, const_arg, qfree)
        if const_arg:
            t = self.peek()
            raise SilqSyntaxError("'const' only applies to function parameters", t.line, t.col)
        return base

    def parse_data_type(self) -> DataType:
        classical = False
        if self.at("!"):
            self.next()
            classical = True
        t = self.expect("ident", "type name")
        if t.value == "B":
            return DataType("bit", 1, classical)
        if t.value == "uint":
            self.expect("[")
            size = int(self.expect("int", "bit width").value)
            self.expect("]")
            if not (1 <= size <= 16):
                raise SilqSyntaxError(f"uint width {size} outside [1, 16]", t.line, t.col)
            return DataType("uint", size, classical)
        raise UnsupportedFeature(f"unknown type {t.value!r}", t.line, t.col)

    def parse_block(self, top_level: bool = False) -> list[Stmt]:
        self.expect("{")
        stmts: list[Stmt] = []
        while not self.at("}"):
            s = self.parse_stmt(allow_return=top_level)
            if stmts and isinstance(stmts[-1], ReturnStmt):
                t = self.peek()
                raise SilqSyntaxError("statements after return", t.line, t.col)
            stmts.append(s)
        self.expect("}")
        return stmts

    def parse_stmt(self, allow_return: bool) -> Stmt:
        t = self.peek()
        if t.kind == "kw":
            if t.value == "if":
                return self.parse_if()
            if t.value == "return":
                self.next()
                if not allow_return:
                    raise UnsupportedFeature(
                        "return inside a conditional block", t.line, t.col
                    )
                name = self.expect("ident", "variable name")
                self.expect(";")
                return ReturnStmt(name.value, t.pos)
            if t.value == "phase":
                self.next()
                self.expect("(")
                num, den = self.parse_angle()
                self.expect(")")
                self.expect(";")
                return PhaseApply(num, den, t.pos)
            raise SilqSyntaxError(f"unexpected keyword {t.value!r}", t.line, t.col)
        if t.kind == "ident":
            if t.value in FOREIGN_KEYWORDS:
                raise UnsupportedFeature(f"{t.value!r} is outside the fragment", t.line, t.col)
            return self.parse_assignment()
        raise SilqSyntaxError(f"expected a statement, found {t.value!r}", t.line, t.col)

    def parse_angle(self) -> tuple[int, int]:
        """angle := ['-'] [INT '*'] 'pi' ['/' INT]"""
        sign = 1
        if self.at("-"):
            self.next()
            sign = -1
        mul = 1
        if self.at("int"):
            mul = int(self.next().value)
            self.expect("*")
        t = self.peek()
        if not (t.kind == "kw" and t.value == "pi"):
            raise SilqSyntaxError("expected 'pi' in angle", t.line, t.col)
        self.next()
        den = 1
        if self.at("/"):
            self.next()
            den = int(self.expect("int", "angle denominator").value)
        return sign * mul, den

    def parse_if(self) -> OracleCondBlock:
        t = self.next()
        cond = self.parse_expr()
        body = self.parse_block()
        else_body: list[Stmt] = []
        if self.at("kw", "else"):
            self.next()
            else_body = self.parse_block()
        return OracleCondBlock(cond, body, else_body, t.pos)

    def parse_assignment(self) -> Stmt:
        target = self.expect("ident")
        if target.value in FOREIGN_KEYWORDS:
            raise UnsupportedFeature(
                f"{target.value!r} is outside the fragment", target.line, target.col
            )
        index: int | None = None
        if self.at("["):
            self.next()
            index = int(self.expect("int", "wire index").value)
            self.expect("]")
        if self.at(":="):
            op = self.next()
            is_define = True
        elif self.at("="):
            op = self.next()
            is_define = False
        else:
            t = self.peek()
            raise SilqSyntaxError("expected ':=' or '=' in assignment", t.line, t.col)

        # measurement
        if self.at("kw", "measure"):
            self.next()
            self.expect("(")
            src = self.expect("ident", "variable name")
            self.expect(")")
            self.expect(";")
            if index is not None:
                raise UnsupportedFeature(
                    "cannot measure into an indexed target", target.line, target.col
                )
            if not is_define:
                raise SilqSyntaxError(
                    "measurement uses ':='", op.line, op.col
                )
            return MeasureAssign(target.value, src.value, target.pos)

        expr = self.parse_expr()

        # typed constant declaration: x := 0:B;
        if self.at(":"):
            colon = self.next()
            if not isinstance(expr, IntLit):
                raise SilqSyntaxError(
                    "only integer constants take a type annotation", colon.line, colon.col
                )
            if index is not None or not is_define:
                raise SilqSyntaxError(
                    "declarations use ':=' on a plain variable", colon.line, colon.col
                )
            ty = self.parse_data_type()
            self.expect(";")
            return VarDecl(target.value, expr.value, ty, target.pos)

        self.expect(";")

        # gate application: x := H(x); or y[i] := X(y[i]);
        if isinstance(expr, Call) and expr.func in GATE_NAMES:
            if len(expr.args) != 1:
                raise SilqSyntaxError(
                    f"gate {expr.func} takes one argument", target.line, target.col
                )
            arg = expr.args[0]
            ok = (
                isinstance(arg, Name) and arg.ident == target.value and index is None
            ) or (
                isinstance(arg, Index)
                and arg.ident == target.value
                and arg.index == index
            )
            if not ok or not is_define:
                raise UnsupportedFeature(
                    "gate argument must be the assignment target",
                    target.line,
                    target.col,
                )
            return GateApply(target.value, index, expr.func, target.pos)

        if index is not None:
            raise UnsupportedFeature(
                "indexed assignment is only for gate application", target.line, target.col
            )
        return ClassicalAssign(target.value, expr, is_define, target.pos)

    # expression grammar: conjunction > negation > comparison > additive
    # > multiplicative > atom

    def parse_expr(self) -> Expr:
        left = self.parse_not()
        while self.at("&&"):
            t = self.next()
            right = self.parse_not()
            left = BinExpr("&&", left, right, t.pos)
        return left

    def parse_not(self) -> Expr:
        if self.at("!"):
            t = self.next()
            return NotExpr(self.parse_not(), t.pos)
        return self.parse_cmp()

    def parse_cmp(self) -> Expr:
        left = self.parse_arith()
        for op in ("==", "<=", "<"):
            if self.at(op):
                t = self.next()
                right = self.parse_arith()
                return BinExpr(op, left, right, t.pos)
        return left

    def parse_arith(self) -> Expr:
        left = self.parse_term()
        while self.at("+") or self.at("-"):
            t = self.next()
            right = self.parse_term()
            left = BinExpr(t.value, left, right, t.pos)
        return left

    def parse_term(self) -> Expr:
        left = self.parse_atom()
        while self.at("*") or self.at("%"):
            t = self.next()
            right = self.parse_atom()
            left = BinExpr(t.value, left, right, t.pos)
        return left

    def parse_atom(self) -> Expr:
        t = self.peek()
        if t.kind == "int":
            self.next()
            return IntLit(int(t.value), t.pos)
        if t.kind == "(":
            self.next()
            e = self.parse_expr()
            self.expect(")")
            return e
        if t.kind == "ident":
            if t.value in FOREIGN_KEYWORDS:
                raise UnsupportedFeature(f"{t.value!r} is outside the fragment", t.line, t.col)
            self.next()
            if self.at("("):
                self.next()
                args: list[Expr] = []
                while not self.at(")"):
                    if args:
                        self.expect(",")
                    args.append(self.parse_expr())
                self.expect(")")
                if len(args) > 2:
                    raise UnsupportedFeature(
                        "calls take at most two arguments", t.line, t.col
                    )
                return Call(t.value, args, t.pos)
            if self.at("["):
                self.next()
                idx = int(self.expect("int", "wire index").value)
                self.expect("]")
                return Index(t.value, idx, t.pos)
            return Name(t.value, t.pos)
        raise SilqSyntaxError(f"expected an expression, found {t.value or t.kind!r}", t.line, t.col)


def _expr_names(e: Expr):
    if isinstance(e, (Name, Index)):
        yield e
    elif isinstance(e, Call):
        for a in e.args:
            yield from _expr_names(a)
    elif isinstance(e, BinExpr):
        yield from _expr_names(e.left)
        yield from _expr_names(e.right)
    elif isinstance(e, NotExpr):
        yield from _expr_names(e.operand)


def _check_scopes(fn: FunctionDef) -> None:
    """Flag any variable read before it is bound."""
    defined = {p.name for p in fn.params}

    def check_expr(e: Expr) -> None:
        for ref in _expr_names(e):
            base = ref.ident
            if base not in defined:
                raise UseBeforeDefine(f"variable {base!r} used before definition",
                                      ref.pos.line, ref.pos.col)

    def check_body(body: list[Stmt]) -> None:
        for s in body:
            if isinstance(s, VarDecl):
                defined.add(s.name)
            elif isinstance(s, GateApply):
                if s.target not in defined:
                    raise UseBeforeDefine(
                        f"variable {s.target!r} used before definition",
                        s.pos.line, s.pos.col,
                    )
            elif isinstance(s, MeasureAssign):
                if s.source not in defined:
                    raise UseBeforeDefine(
                        f"variable {s.source!r} used before definition",
                        s.pos.line, s.pos.col,
                    )
                defined.add(s.target)
            elif isinstance(s, ClassicalAssign):
                check_expr(s.expr)
                if not s.is_define and s.name not in defined:
                    raise UseBeforeDefine(
                        f"variable {s.name!r} assigned before definition",
                        s.pos.line, s.pos.col,
                    )
                defined.add(s.name)
            elif isinstance(s, OracleCondBlock):
                check_expr(s.cond)
                check_body(s.body)
                check_body(s.else_body)
            elif isinstance(s, ReturnStmt):
                if s.name not in defined:
                    raise UseBeforeDefine(
                        f"variable {s.name!r} used before definition",
                        s.pos.line, s.pos.col,
                    )

    check_body(fn.body)


def parse_silq(source: str) -> SilqAst:
    """Parse program text and check definition-before-use."""
    ast = Parser(tokenize(source)).parse_program()
    for fn in ast.functions:
        _check_scopes(fn)
    return ast
