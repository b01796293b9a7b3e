"""Hand-written recursive-descent parser for specification files.

The file layout is a header line naming the function, its measurement
flag, typed inputs, and the return declaration, followed by pre and
post blocks of defines and asserts:

    ghz[whp(0.5)]()->
        (define ghz_ret:{0, 1}^2)
    pre{
    }
    post{
        assert(ghz_ret = 0 | ghz_ret = 3)
    }

A parenthesis can open either a nested logic expression or an
arithmetic grouping; the parser resolves this by attempting the
arithmetic reading and backtracking when a logic operator appears
inside the group.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from ..errors import ArityError, FlagError, ScopeError, SpeqSyntaxError
from .ast_nodes import (
    ArithExpr,
    BitVecType,
    FlagSpec,
    FuncType,
    LAnd,
    LCmp,
    LExists,
    LFalse,
    LForall,
    LImp,
    LNot,
    LOr,
    LogicExpr,
    NatType,
    SApp,
    SBin,
    SInt,
    SpeqSpec,
    SpeqType,
    SSum,
    SVar,
)

_KEYWORDS = {"define", "assert", "pre", "post", "ff", "mod", "div", "exists", "rand", "cert", "whp"}

_PUNCT = ("->", "<=", "{", "}", "[", "]", "(", ")", "^", ":", ",", "=", "<", ">",
          "&", "|", "@", ".", "+", "-", "*", "/", "¬", "!")


@dataclass(frozen=True)
class Token:
    kind: str       # ident, keyword, int, real, punct, eof
    value: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    toks: list[Token] = []
    i, line, col = 0, 1, 1
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
        if ch == "#":
            while i < n and source[i] != "\n":
                i += 1
            continue
        if ch.isdigit():
            start = i
            while i < n and source[i].isdigit():
                i += 1
            kind = "int"
            if i + 1 < n and source[i] == "." and source[i + 1].isdigit():
                i += 1
                while i < n and source[i].isdigit():
                    i += 1
                kind = "real"
            text = source[start:i]
            toks.append(Token(kind, text, line, col))
            col += i - start
            continue
        if ch.isalpha() or ch == "_":
            start = i
            while i < n and (source[i].isalnum() or source[i] == "_"):
                i += 1
            text = source[start:i]
            kind = "keyword" if text in _KEYWORDS else "ident"
            toks.append(Token(kind, text, line, col))
            col += i - start
            continue
        for p in _PUNCT:
            if source.startswith(p, i):
                toks.append(Token("punct", p, line, col))
                i += len(p)
                col += len(p)
                break
        else:
            raise SpeqSyntaxError(f"unexpected character {ch!r}", line, col)
    toks.append(Token("eof", "", line, col))
    return toks


class _Backtrack(Exception):
    """Internal: the arithmetic reading of a parenthesis failed."""


class Parser:
    def __init__(self, toks: list[Token]):
        self.toks = toks
        self.i = 0
        self.strict = True

    # -- token plumbing --

    def peek(self) -> Token:
        return self.toks[self.i]

    def next(self) -> Token:
        t = self.toks[self.i]
        self.i += 1
        return t

    def at(self, kind: str, value: str | None = None) -> bool:
        t = self.peek()
        return t.kind == kind and (value is None or t.value == value)

    def fail(self, message: str):
        t = self.peek()
        if self.strict:
            raise SpeqSyntaxError(f"{message}, found {t.value!r}", t.line, t.col)
        raise _Backtrack

    def expect(self, kind: str, value: str | None = None) -> Token:
        if not self.at(kind, value):
            self.fail(f"expected {value or kind}")
        return self.next()

    # -- types --

    def parse_type(self) -> SpeqType:
        base = self.parse_base_type()
        if self.at("punct", "->"):
            self.next()
            return FuncType(base, self.parse_type())
        return base

    def parse_base_type(self) -> SpeqType:
        t = self.peek()
        if t.kind == "ident" and t.value == "N":
            self.next()
            return NatType()
        if self.at("punct", "{"):
            self.next()
            self.expect("int", "0")
            self.expect("punct", ",")
            self.expect("int", "1")
            self.expect("punct", "}")
            if not self.at("punct", "^"):
                return BitVecType(1)
            self.next()
            bits = int(self.expect("int").value)
            if bits < 1:
                raise SpeqSyntaxError("bit width must be positive", t.line, t.col)
            return BitVecType(bits)
        self.fail("expected a type")

    # -- header --

    def parse_flag(self) -> FlagSpec:
        t = self.peek()
        if t.kind != "keyword" or t.value not in ("rand", "cert", "whp"):
            raise FlagError(f"unknown flag {t.value!r}", t.line, t.col)
        self.next()
        if t.value != "whp":
            return FlagSpec(t.value)
        if not self.at("punct", "("):
            return FlagSpec("whp", Fraction(1, 2))
        self.next()
        num = self.peek()
        if num.kind not in ("int", "real"):
            raise FlagError("whp needs a numeric threshold", num.line, num.col)
        self.next()
        self.expect("punct", ")")
        threshold = Fraction(num.value)
        if not 0 < threshold <= 1:
            raise FlagError(
                f"whp threshold {num.value} is outside (0, 1]", num.line, num.col
            )
        return FlagSpec("whp", threshold)

    def parse_define(self) -> tuple[str, SpeqType]:
        self.expect("keyword", "define")
        name = self.expect("ident").value
        self.expect("punct", ":")
        return name, self.parse_type()

    def parse_header(self) -> tuple[str, FlagSpec, list, tuple[str, SpeqType]]:
        fname = self.expect("ident").value
        self.expect("punct", "[")
        flag = self.parse_flag()
        self.expect("punct", "]")
        self.expect("punct", "(")
        inputs: list[tuple[str, SpeqType]] = []
        if not self.at("punct", ")"):
            inputs.append(self.parse_define())
            while self.at("punct", ","):
                self.next()
                inputs.append(self.parse_define())
        self.expect("punct", ")")
        self.expect("punct", "->")
        self.expect("punct", "(")
        ret = self.parse_define()
        self.expect("punct", ")")
        return fname, flag, inputs, ret

    # -- arithmetic expressions --

    def parse_arith(self) -> ArithExpr:
        e = self.parse_term()
        while self.at("punct", "+") or self.at("punct", "-"):
            op = self.next().value
            e = SBin(op, e, self.parse_term())
        return e

    def parse_term(self) -> ArithExpr:
        e = self.parse_power()
        while (
            self.at("punct", "*")
            or self.at("punct", "/")
            or self.at("keyword", "mod")
            or self.at("keyword", "div")
        ):
            op = self.next().value
            if op == "/":
                op = "div"
            e = SBin(op, e, self.parse_power())
        return e

    def parse_power(self) -> ArithExpr:
        e = self.parse_dotted()
        if self.at("punct", "^"):
            self.next()
            return SBin("^", e, self.parse_power())
        return e

    def parse_dotted(self) -> ArithExpr:
        e = self.parse_atom()
        while self.at("punct", "."):
            self.next()
            e = SBin(".", e, self.parse_atom())
        return e

    def parse_atom(self) -> ArithExpr:
        t = self.peek()
        if t.kind == "int":
            self.next()
            return SInt(int(t.value))
        if t.kind == "ident" and t.value == "SUM":
            self.next()
            self.expect("punct", "[")
            var = self.expect("ident").value
            self.expect("punct", "]")
            self.expect("punct", "(")
            func = self.expect("ident").value
            self.expect("punct", ")")
            return SSum(var, func)
        if t.kind == "ident":
            self.next()
            if self.at("punct", "("):
                self.next()
                arg = self.parse_arith()
                self.expect("punct", ")")
                return SApp(t.value, arg)
            return SVar(t.value)
        if self.at("punct", "("):
            self.next()
            e = self.parse_arith()
            self.expect("punct", ")")
            return e
        self.fail("expected an arithmetic expression")

    # -- logic expressions --

    def parse_logic(self) -> LogicExpr:
        e = self.parse_or()
        if self.at("punct", "->"):
            self.next()
            return LImp(e, self.parse_logic())
        return e

    def parse_or(self) -> LogicExpr:
        e = self.parse_and()
        while self.at("punct", "|"):
            self.next()
            e = LOr(e, self.parse_and())
        return e

    def parse_and(self) -> LogicExpr:
        e = self.parse_quant()
        while self.at("punct", "&"):
            self.next()
            e = LAnd(e, self.parse_quant())
        return e

    def parse_quant(self) -> LogicExpr:
        if self.at("punct", "@"):
            self.next()
            var = self.expect("ident").value
            self.expect("punct", ".")
            return LForall(var, self.parse_quant())
        if self.at("keyword", "exists"):
            self.next()
            var = self.expect("ident").value
            self.expect("punct", ".")
            return LExists(var, self.parse_quant())
        if self.at("punct", "¬") or self.at("punct", "!"):
            self.next()
            return LNot(self.parse_quant())
        return self.parse_latom()

    def parse_latom(self) -> LogicExpr:
        if self.at("keyword", "ff"):
            self.next()
            return LFalse()
        # Attempt the arithmetic-comparison reading first; if the token
        # stream turns out to hold a parenthesized logic expression the
        # attempt raises and we reparse it as one.
        mark = self.i
        self.strict = False
        try:
            left = self.parse_arith()
            if not (
                self.at("punct", "=") or self.at("punct", "<")
                or self.at("punct", "<=") or self.at("punct", ">")
            ):
                raise _Backtrack
            self.strict = True
            op = self.next().value
            right = self.parse_arith()
            return LCmp(op, left, right)
        except _Backtrack:
            self.i = mark
        finally:
            self.strict = True
        if self.at("punct", "("):
            self.next()
            e = self.parse_logic()
            self.expect("punct", ")")
            return e
        self.fail("expected a logic expression")

    # -- blocks --

    def parse_block(self, name: str):
        self.expect("keyword", name)
        self.expect("punct", "{")
        defines: list[tuple[str, SpeqType]] = []
        asserts: list[LogicExpr] = []
        sources: list[str] = []
        while not self.at("punct", "}"):
            if self.at("keyword", "define"):
                defines.append(self.parse_define())
            elif self.at("keyword", "assert"):
                self.next()
                self.expect("punct", "(")
                start = self.i
                asserts.append(self.parse_logic())
                sources.append(self.render_span(start, self.i))
                self.expect("punct", ")")
            else:
                self.fail("expected define, assert, or }")
        self.next()
        return defines, asserts, sources

    def render_span(self, start: int, end: int) -> str:
        return " ".join(t.value for t in self.toks[start:end])

    def parse_spec(self) -> SpeqSpec:
        fname, flag, inputs, ret = self.parse_header()
        pre_defines, pre, pre_sources = self.parse_block("pre")
        post_defines, post, post_sources = self.parse_block("post")
        self.expect("eof")
        return SpeqSpec(
            fname, flag, inputs, ret, pre, post,
            pre_defines, post_defines, pre_sources, post_sources,
        )


# --- scope and width checking ---

def _width(e: ArithExpr, scope: dict[str, SpeqType]) -> int | None:
    """Bit width of an expression when it denotes a fixed-width value."""
    if isinstance(e, SVar):
        ty = scope.get(e.name)
        if isinstance(ty, BitVecType):
            return ty.bits
        return None
    if isinstance(e, SApp):
        ty = scope.get(e.func)
        if isinstance(ty, FuncType) and isinstance(ty.result, BitVecType):
            return ty.result.bits
        return None
    return None


def _check_arith(e: ArithExpr, scope: dict[str, SpeqType]) -> None:
    if isinstance(e, SInt):
        return
    if isinstance(e, SVar):
        if e.name not in scope:
            raise ScopeError(f"undeclared variable {e.name!r}")
        if isinstance(scope[e.name], FuncType):
            raise ScopeError(f"function {e.name!r} used as a value")
        return
    if isinstance(e, SApp):
        ty = scope.get(e.func)
        if ty is None:
            raise ScopeError(f"undeclared function {e.func!r}")
        if not isinstance(ty, FuncType):
            raise ScopeError(f"{e.func!r} is not a function")
        _check_arith(e.arg, scope)
        if isinstance(ty.domain, BitVecType):
            w = _width(e.arg, scope)
            if w is not None and w != ty.domain.bits:
                raise ArityError(
                    f"{e.func!r} expects a {ty.domain.bits}-bit argument, got {w} bits"
                )
        return
    if isinstance(e, SSum):
        ty = scope.get(e.func)
        if ty is None:
            raise ScopeError(f"undeclared function {e.func!r}")
        if not isinstance(ty, FuncType):
            raise ScopeError(f"SUM needs a function, {e.func!r} is not one")
        return
    if isinstance(e, SBin):
        _check_arith(e.left, scope)
        _check_arith(e.right, scope)
        if e.op == ".":
            lw = _width(e.left, scope)
            rw = _width(e.right, scope)
            if lw is None or rw is None:
                raise ArityError("dot product needs fixed-width operands")
            if lw != rw:
                raise ArityError(
                    f"dot product on unequal widths ({lw} and {rw} bits)"
                )
        return
    raise ScopeError(f"unsupported arithmetic form {e!r}")


def _check_logic(l: LogicExpr, scope: dict[str, SpeqType]) -> None:
    if isinstance(l, LFalse):
        return
    if isinstance(l, LCmp):
        _check_arith(l.left, scope)
        _check_arith(l.right, scope)
        return
    if isinstance(l, LNot):
        _check_logic(l.body, scope)
        return
    if isinstance(l, (LAnd, LOr, LImp)):
        _check_logic(l.left, scope)
        _check_logic(l.right, scope)
        return
    if isinstance(l, (LForall, LExists)):
        if l.var not in scope:
            raise ScopeError(f"quantifier over undeclared variable {l.var!r}")
        _check_logic(l.body, scope)
        return
    raise ScopeError(f"unsupported logic form {l!r}")


def parse_speq(source: str) -> SpeqSpec:
    """Parse and check one specification file."""
    spec = Parser(tokenize(source)).parse_spec()
    expected = spec.function_name + "_ret"
    if spec.ret[0] != expected:
        raise SpeqSyntaxError(
            f"return symbol must be named {expected!r}, got {spec.ret[0]!r}"
        )
    seen: dict[str, SpeqType] = {}
    for name, ty in spec.inputs + [spec.ret] + spec.pre_defines + spec.post_defines:
        if name in seen:
            raise ScopeError(f"duplicate declaration of {name!r}")
        seen[name] = ty
    pre_scope: dict[str, SpeqType] = dict(spec.inputs)
    pre_scope[spec.ret[0]] = spec.ret[1]
    pre_scope.update(spec.pre_defines)
    for l in spec.pre:
        _check_logic(l, pre_scope)
    post_scope = dict(pre_scope)
    post_scope.update(spec.post_defines)
    for l in spec.post:
        _check_logic(l, post_scope)
    return spec
