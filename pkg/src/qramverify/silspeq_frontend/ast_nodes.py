"""Syntax tree for specification files.

A specification names the function it constrains, fixes one measurement
flag, declares typed inputs and the return symbol, and carries two
assertion blocks (pre and post).  Expressions split into an arithmetic
layer over nonnegative integers and a logic layer over comparisons.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction


# --- types ---

@dataclass(frozen=True)
class BitVecType:
    """Integers in [0, 2^bits), written {0, 1}^bits."""

    bits: int

    def render(self) -> str:
        if self.bits == 1:
            return "{0, 1}"
        return "{0, 1}^" + str(self.bits)


@dataclass(frozen=True)
class NatType:
    """Unbounded nonnegative integers, written N."""

    def render(self) -> str:
        return "N"


@dataclass(frozen=True)
class FuncType:
    domain: "SpeqType"
    result: "SpeqType"

    def render(self) -> str:
        return f"{self.domain.render()}->{self.result.render()}"


SpeqType = BitVecType | NatType | FuncType


# --- measurement flag ---

@dataclass(frozen=True)
class FlagSpec:
    """Measurement policy: rand, cert, or whp with a threshold in (0, 1]."""

    kind: str                      # "rand" | "cert" | "whp"
    threshold: Fraction | None = None

    def render(self) -> str:
        if self.kind != "whp":
            return self.kind
        t = self.threshold
        if t.denominator == 1:
            return f"whp({t.numerator})"
        return f"whp({float(t)})"


# --- arithmetic expressions ---

@dataclass(frozen=True)
class SInt:
    value: int


@dataclass(frozen=True)
class SVar:
    name: str


@dataclass(frozen=True)
class SApp:
    """Application f(a) of a declared function input."""

    func: str
    arg: "ArithExpr"


@dataclass(frozen=True)
class SBin:
    """Binary arithmetic: + - * ^ div mod and the dot product '.'."""

    op: str
    left: "ArithExpr"
    right: "ArithExpr"


@dataclass(frozen=True)
class SSum:
    """SUM[x](f): the sum of f over its whole domain."""

    var: str
    func: str


ArithExpr = SInt | SVar | SApp | SBin | SSum


# --- logic expressions ---

@dataclass(frozen=True)
class LFalse:
    pass


@dataclass(frozen=True)
class LCmp:
    """Comparison of two arithmetic expressions: = < <= >."""

    op: str
    left: ArithExpr
    right: ArithExpr


@dataclass(frozen=True)
class LNot:
    body: "LogicExpr"


@dataclass(frozen=True)
class LAnd:
    left: "LogicExpr"
    right: "LogicExpr"


@dataclass(frozen=True)
class LOr:
    left: "LogicExpr"
    right: "LogicExpr"


@dataclass(frozen=True)
class LImp:
    left: "LogicExpr"
    right: "LogicExpr"


@dataclass(frozen=True)
class LForall:
    """@x.body where x is a declared finite-range variable."""

    var: str
    body: "LogicExpr"


@dataclass(frozen=True)
class LExists:
    var: str
    body: "LogicExpr"


LogicExpr = LFalse | LCmp | LNot | LAnd | LOr | LImp | LForall | LExists


# --- the whole specification ---

@dataclass
class SpeqSpec:
    function_name: str
    flag: FlagSpec
    inputs: list[tuple[str, SpeqType]]
    ret: tuple[str, SpeqType]
    pre: list[LogicExpr]
    post: list[LogicExpr]
    pre_defines: list[tuple[str, SpeqType]] = field(default_factory=list)
    post_defines: list[tuple[str, SpeqType]] = field(default_factory=list)
    pre_sources: list[str] = field(default_factory=list)
    post_sources: list[str] = field(default_factory=list)

    def scope(self) -> dict[str, SpeqType]:
        """All declared names: inputs, ret, and both blocks' defines."""
        out: dict[str, SpeqType] = dict(self.inputs)
        out[self.ret[0]] = self.ret[1]
        out.update(self.pre_defines)
        out.update(self.post_defines)
        return out
