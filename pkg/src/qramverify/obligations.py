"""Solver-facing expression trees, symbol registry, and assertion groups.

The verifier's three assertion groups (program semantics, precondition,
postcondition) are all built from the same small expression language
and register their symbols in one shared table.  The table records, for
every symbol, its sort, an optional integer range, and decode metadata
so a satisfying model can be translated back into measured values,
oracle tables, and classical variable values.

Registration order is preserved and is the emission order, which is
what makes script generation byte-deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import names
from .errors import SymbolClash
from .qram_model import Layout


# --- expression trees ---

@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class IntConst:
    value: int


@dataclass(frozen=True)
class RatConst:
    value: Fraction


@dataclass(frozen=True)
class App:
    op: str
    args: tuple["Expr", ...]


Expr = Sym | IntConst | RatConst | App

TRUE = App("true", ())
FALSE = App("false", ())


def eq(a: Expr, b: Expr) -> Expr:
    return App("=", (a, b))


def le(a: Expr, b: Expr) -> Expr:
    return App("<=", (a, b))


def lt(a: Expr, b: Expr) -> Expr:
    return App("<", (a, b))


def ge(a: Expr, b: Expr) -> Expr:
    return App(">=", (a, b))


def gt(a: Expr, b: Expr) -> Expr:
    return App(">", (a, b))


def add(*xs: Expr) -> Expr:
    if not xs:
        return IntConst(0)
    if len(xs) == 1:
        return xs[0]
    return App("+", tuple(xs))


def sub(a: Expr, b: Expr) -> Expr:
    return App("-", (a, b))


def neg(a: Expr) -> Expr:
    return App("-", (a,))


def mul(*xs: Expr) -> Expr:
    if not xs:
        return IntConst(1)
    if len(xs) == 1:
        return xs[0]
    return App("*", tuple(xs))


def conj(xs) -> Expr:
    xs = tuple(xs)
    if not xs:
        return TRUE
    if len(xs) == 1:
        return xs[0]
    return App("and", xs)


def disj(xs) -> Expr:
    xs = tuple(xs)
    if not xs:
        return FALSE
    if len(xs) == 1:
        return xs[0]
    return App("or", xs)


def not_(a: Expr) -> Expr:
    return App("not", (a,))


def implies(a: Expr, b: Expr) -> Expr:
    return App("=>", (a, b))


def to_real(a: Expr) -> Expr:
    return App("to_real", (a,))


def free_symbols(e: Expr) -> set[str]:
    if isinstance(e, Sym):
        return {e.name}
    if isinstance(e, App):
        out: set[str] = set()
        for a in e.args:
            out |= free_symbols(a)
        return out
    return set()


# --- assertion groups ---

@dataclass(frozen=True)
class Assertion:
    expr: Expr
    comment: str | None = None


@dataclass
class ObligationSet:
    """An ordered list of boolean assertions under one group tag.

    Definitions (witness equations, symbol glue) always hold and are
    asserted positively in every query.  Claims are the actual property
    content: when the post group is refutation-tested, only its claims
    are negated, never its definitions.
    """

    tag: str
    definitions: list[Assertion] = field(default_factory=list)
    assertions: list[Assertion] = field(default_factory=list)

    def define(self, expr: Expr, comment: str | None = None) -> None:
        self.definitions.append(Assertion(expr, comment))

    def add(self, expr: Expr, comment: str | None = None) -> None:
        self.assertions.append(Assertion(expr, comment))

    def extend(self, other: "ObligationSet") -> None:
        self.definitions.extend(other.definitions)
        self.assertions.extend(other.assertions)

    def __len__(self) -> int:
        return len(self.assertions)


# --- symbol registry ---

@dataclass(frozen=True)
class SymbolInfo:
    name: str
    sort: str                 # "Int" or "Real"
    kind: str                 # classical, amplitude, probability, measured,
                              # sqrt, oracle, spec, witness, const
    lo: int | None = None     # inclusive lower bound, emitted at declaration
    hi: int | None = None     # exclusive upper bound, emitted at declaration
    meta: tuple[tuple[str, object], ...] = ()

    def get(self, key: str):
        for k, v in self.meta:
            if k == key:
                return v
        return None


@dataclass(frozen=True)
class Generation:
    """One quantum-state generation: an amplitude vector and its layout.

    closed optionally carries the amplitudes in closed form (a tuple of
    exact scalars computed by constant propagation); it is opaque here
    and None once any instruction makes the state data-dependent.
    """

    index: int
    layout: Layout
    closed: tuple | None = None


class SymbolTable:
    """Registry of every solver symbol with decode metadata.

    Symbols are unique by name; redeclaring a name with identical info
    returns the existing symbol (used for oracle cells, which both the
    program side and the specification side reference), while any
    mismatch raises SymbolClash.
    """

    def __init__(self) -> None:
        self._syms: dict[str, SymbolInfo] = {}
        self.generations: list[Generation] = []
        self._aux = 0

    # -- core --

    def declare(
        self,
        name: str,
        sort: str,
        kind: str,
        lo: int | None = None,
        hi: int | None = None,
        **meta,
    ) -> Sym:
        info = SymbolInfo(name, sort, kind, lo, hi, tuple(sorted(meta.items())))
        old = self._syms.get(name)
        if old is not None:
            if old != info:
                raise SymbolClash(
                    f"symbol {name!r} declared twice with different roles"
                )
            return Sym(name)
        self._syms[name] = info
        return Sym(name)

    def info(self, name: str) -> SymbolInfo | None:
        return self._syms.get(name)

    def __contains__(self, name: str) -> bool:
        return name in self._syms

    def infos(self) -> list[SymbolInfo]:
        return list(self._syms.values())

    # -- naming-scheme constructors --

    def classical(self, var: str, version: int, size: int) -> Sym:
        return self.declare(
            names.classical(var, version), "Int", "classical",
            lo=0, hi=2 ** size, var=var, version=version, size=size,
        )

    def amplitude(self, generation: int, index: int) -> tuple[Sym, Sym]:
        re = self.declare(
            names.amplitude(generation, index, "re"), "Real", "amplitude",
            generation=generation, index=index, part="re",
        )
        im = self.declare(
            names.amplitude(generation, index, "im"), "Real", "amplitude",
            generation=generation, index=index, part="im",
        )
        return re, im

    def probability(self, var: str, version: int, outcome: int) -> Sym:
        return self.declare(
            names.probability(var, version, outcome), "Real", "probability",
            var=var, version=version, outcome=outcome,
        )

    def measured(self, var: str, size: int) -> Sym:
        return self.declare(
            names.measured(var), "Int", "measured", var=var, size=size,
        )

    def sqrt_witness(self, var: str, version: int, outcome: int) -> Sym:
        return self.declare(
            names.sqrt_witness(var, version, outcome), "Real", "sqrt",
            var=var, version=version, outcome=outcome,
        )

    def oracle_cell(self, oracle: str, value: int) -> Sym:
        return self.declare(
            names.oracle_cell(oracle, value), "Int", "oracle",
            lo=0, hi=2, oracle=oracle, value=value,
        )

    def spec_var(self, name: str, lo: int | None, hi: int | None) -> Sym:
        return self.declare(name, "Int", "spec", lo=lo, hi=hi)

    def invsqrt2(self) -> Sym:
        return self.declare(names.INVSQRT2, "Real", "const")

    def fresh_witness(
        self, role: str, lo: int | None = None, hi: int | None = None
    ) -> Sym:
        """A fresh auxiliary integer symbol (division/remainder parts)."""
        name = f"aux_{role}_{self._aux}"
        self._aux += 1
        return self.declare(name, "Int", "witness", lo=lo, hi=hi, role=role)

    # -- quantum-state manifest --

    def new_generation(self, layout: Layout, closed: tuple | None = None) -> int:
        t = len(self.generations)
        self.generations.append(Generation(t, layout, closed))
        return t

    def generation(self, t: int) -> Generation:
        return self.generations[t]
