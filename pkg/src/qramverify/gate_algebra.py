"""Exact symbolic linear algebra for gate matrices.

Matrix entries are complex numbers whose real and imaginary parts are
polynomials over the rationals in named real symbols, extended with the
constant invsqrt2 (the positive square root of one half).  The
representation is canonical: invsqrt2 squared folds to the rational 1/2
on every product, coefficients are exact fractions, zero terms are
dropped and terms are kept sorted, so structural equality decides value
equality for everything the pipeline builds.

Controlled application follows the diagonal form

    CU = I + (U - I) * diag(b)

where b assigns each joint basis value 0, 1, or a 0/1-valued oracle
symbol, so one construction covers concrete and symbolic controls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from . import names
from .errors import (
    DimensionMismatch,
    NonBooleanPredicate,
    UnsupportedAngle,
    WireOutOfRange,
)
from .qram_model import Binary, Const, CtrlInstr, Layout, Unary, VarRef

# A monomial key: (invsqrt2 exponent in {0,1}, sorted symbol names).
Key = tuple[int, tuple[str, ...]]

_HALF = Fraction(1, 2)


@dataclass(frozen=True)
class Poly:
    """Canonical real polynomial; see the module docstring."""

    terms: tuple[tuple[Key, Fraction], ...]

    # -- constructors --

    @staticmethod
    def _make(d: Mapping[Key, Fraction]) -> "Poly":
        return Poly(tuple(sorted((k, c) for k, c in d.items() if c != 0)))

    @staticmethod
    def rational(q: Fraction | int) -> "Poly":
        return Poly._make({(0, ()): Fraction(q)})

    @staticmethod
    def symbol(name: str) -> "Poly":
        return Poly._make({(0, (name,)): Fraction(1)})

    @staticmethod
    def invsqrt2() -> "Poly":
        return Poly._make({(1, ()): Fraction(1)})

    # -- queries --

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def as_rational(self) -> Fraction | None:
        """The exact rational value, or None if symbolic or irrational."""
        if not self.terms:
            return Fraction(0)
        if len(self.terms) == 1 and self.terms[0][0] == (0, ()):
            return self.terms[0][1]
        return None

    def symbols(self) -> set[str]:
        out: set[str] = set()
        for (_, syms), _c in self.terms:
            out.update(syms)
        return out

    @property
    def uses_invsqrt2(self) -> bool:
        return any(k[0] for k, _ in self.terms)

    # -- arithmetic --

    def __add__(self, other: "Poly") -> "Poly":
        d = dict(self.terms)
        for k, c in other.terms:
            d[k] = d.get(k, Fraction(0)) + c
        return Poly._make(d)

    def __neg__(self) -> "Poly":
        return Poly(tuple((k, -c) for k, c in self.terms))

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        d: dict[Key, Fraction] = {}
        for (e1, s1), c1 in self.terms:
            for (e2, s2), c2 in other.terms:
                e = e1 + e2
                c = c1 * c2
                if e == 2:
                    e = 0
                    c *= _HALF
                k = (e, tuple(sorted(s1 + s2)))
                d[k] = d.get(k, Fraction(0)) + c
        return Poly._make(d)

    def scaled(self, q: Fraction | int) -> "Poly":
        q = Fraction(q)
        return Poly._make({k: c * q for k, c in self.terms})

    def eval(self, env: Mapping[str, float] | None = None) -> float:
        env = env or {}
        total = 0.0
        for (e, syms), c in self.terms:
            v = float(c)
            if e:
                v *= math.sqrt(0.5)
            for s in syms:
                v *= float(env[s])
            total += v
        return total


P_ZERO = Poly.rational(0)
P_ONE = Poly.rational(1)


@dataclass(frozen=True)
class Scalar:
    """A complex number as an exact (real, imaginary) polynomial pair."""

    re: Poly
    im: Poly

    @staticmethod
    def rational(q: Fraction | int) -> "Scalar":
        return Scalar(Poly.rational(q), P_ZERO)

    @staticmethod
    def real(p: Poly) -> "Scalar":
        return Scalar(p, P_ZERO)

    @property
    def is_zero(self) -> bool:
        return self.re.is_zero and self.im.is_zero

    def __add__(self, other: "Scalar") -> "Scalar":
        return Scalar(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "Scalar") -> "Scalar":
        return Scalar(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "Scalar":
        return Scalar(-self.re, -self.im)

    def __mul__(self, other: "Scalar") -> "Scalar":
        return Scalar(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    def conj(self) -> "Scalar":
        return Scalar(self.re, -self.im)

    def eval(self, env: Mapping[str, float] | None = None) -> complex:
        return complex(self.re.eval(env), self.im.eval(env))


S_ZERO = Scalar.rational(0)
S_ONE = Scalar.rational(1)


# --- angles ---

@dataclass(frozen=True)
class Angle:
    """An exact angle, stored as an integer count of quarter-pi units."""

    pi4: int

    @staticmethod
    def from_fraction(num: int, den: int) -> "Angle":
        if den not in (1, 2, 4):
            raise UnsupportedAngle(f"angle denominator must be 1, 2 or 4, got {den}")
        return Angle(num * (4 // den))

    def render(self) -> str:
        num, den = self.pi4, 4
        g = math.gcd(abs(num), den)
        if g:
            num, den = num // g, den // g
        sign = "-" if num < 0 else ""
        num = abs(num)
        head = "pi" if num == 1 else f"{num}*pi"
        tail = "" if den == 1 else f"/{den}"
        return f"{sign}{head}{tail}"


# cos(k*pi/4) and sin(k*pi/4) for k mod 8, as (rational, invsqrt2 count).
_R = Poly.invsqrt2()
_COS8 = [P_ONE, _R, P_ZERO, -_R, -P_ONE, -_R, P_ZERO, _R]
_SIN8 = [P_ZERO, _R, P_ONE, _R, P_ZERO, -_R, -P_ONE, -_R]


def phase_scalar(theta: Angle) -> Scalar:
    """exp(i * theta) as an exact scalar."""
    k = theta.pi4 % 8
    return Scalar(_COS8[k], _SIN8[k])


# --- matrices ---

@dataclass(frozen=True)
class SymbolicMatrix:
    entries: tuple[tuple[Scalar, ...], ...]
    label: str

    @property
    def dim(self) -> int:
        return len(self.entries)

    def __getitem__(self, ij: tuple[int, int]) -> Scalar:
        i, j = ij
        return self.entries[i][j]

    def __matmul__(self, other: "SymbolicMatrix") -> "SymbolicMatrix":
        if self.dim != other.dim:
            raise DimensionMismatch(
                f"matrix product dimension mismatch: {self.dim} vs {other.dim}"
            )
        n = self.dim
        rows = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = S_ZERO
                for k in range(n):
                    a = self.entries[i][k]
                    b = other.entries[k][j]
                    if not (a.is_zero or b.is_zero):
                        acc = acc + a * b
                row.append(acc)
            rows.append(tuple(row))
        return SymbolicMatrix(tuple(rows), f"{self.label}·{other.label}")

    def dagger(self) -> "SymbolicMatrix":
        n = self.dim
        rows = tuple(
            tuple(self.entries[j][i].conj() for j in range(n)) for i in range(n)
        )
        return SymbolicMatrix(rows, f"{self.label}†")

    def scaled(self, s: Scalar, label: str | None = None) -> "SymbolicMatrix":
        rows = tuple(tuple(s * e for e in row) for row in self.entries)
        return SymbolicMatrix(rows, label or self.label)

    def to_numpy(self, env: Mapping[str, float] | None = None):
        import numpy as np

        n = self.dim
        out = np.zeros((n, n), dtype=complex)
        for i in range(n):
            for j in range(n):
                out[i, j] = self.entries[i][j].eval(env)
        return out


def identity(dim: int, label: str = "I") -> SymbolicMatrix:
    rows = tuple(
        tuple(S_ONE if i == j else S_ZERO for j in range(dim)) for i in range(dim)
    )
    return SymbolicMatrix(rows, label)


def gate(name: str, theta: Angle | None = None) -> SymbolicMatrix:
    """A named primitive gate.

    H and X are single-qubit gates; I is the single-qubit identity.
    phase requires an angle and yields the 1x1 matrix [exp(i*theta)],
    which embeds as a global phase on whatever register it targets.
    """
    r = Scalar.real(_R)
    if name == "H":
        return SymbolicMatrix(((r, r), (r, -r)), "H")
    if name == "X":
        return SymbolicMatrix(((S_ZERO, S_ONE), (S_ONE, S_ZERO)), "X")
    if name == "I":
        return identity(2)
    if name == "phase":
        if theta is None:
            raise UnsupportedAngle("phase gate needs an angle")
        return SymbolicMatrix(((phase_scalar(theta),),), f"phase({theta.render()})")
    raise ValueError(f"unknown gate {name!r}")


def kron(a: SymbolicMatrix, b: SymbolicMatrix) -> SymbolicMatrix:
    """Tensor product; b indexes the less significant bits."""
    da, db = a.dim, b.dim
    n = da * db
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            x = a.entries[i // db][j // db]
            y = b.entries[i % db][j % db]
            row.append(x * y if not (x.is_zero or y.is_zero) else S_ZERO)
        rows.append(tuple(row))
    return SymbolicMatrix(tuple(rows), f"{a.label}⊗{b.label}")


def embed(u: SymbolicMatrix, wires: Sequence[int], total_qubits: int) -> SymbolicMatrix:
    """Expand u to the joint space, acting on consecutive wire indices.

    Wire w is bit w of the joint basis index (weight 2**w).  The wire
    list must be consecutive ascending and match u's dimension; an
    empty list embeds a 1x1 matrix as a global scaling.
    """
    wires = list(wires)
    k = len(wires)
    if u.dim != (1 << k):
        raise DimensionMismatch(
            f"embed: gate of dimension {u.dim} does not fit {k} wires"
        )
    if wires and wires != list(range(wires[0], wires[0] + k)):
        raise WireOutOfRange(f"embed: wires must be consecutive ascending, got {wires}")
    for w in wires:
        if not (0 <= w < total_qubits):
            raise WireOutOfRange(
                f"embed: wire {w} out of range for {total_qubits} qubits"
            )
    lo = wires[0] if wires else 0
    mask = (1 << k) - 1
    n = 1 << total_qubits
    rows = []
    for i in range(n):
        it, ir = (i >> lo) & mask, i & ~(mask << lo)
        row = []
        for j in range(n):
            jt, jr = (j >> lo) & mask, j & ~(mask << lo)
            row.append(u.entries[it][jt] if ir == jr else S_ZERO)
        rows.append(tuple(row))
    if k == total_qubits:
        label = u.label
    elif k == 0:
        label = u.label
    else:
        label = f"{u.label}@{lo}"
    return SymbolicMatrix(tuple(rows), label)


# --- control predicates ---

def _pred_value(o, layout: Layout, joint: int):
    """Evaluate an operand at one joint basis value.

    Returns an int for concrete results or a 0/1-valued Poly when an
    oracle symbol is involved.
    """
    if isinstance(o, Const):
        return o.value
    if isinstance(o, VarRef):
        return layout.value(o.name, joint)
    if isinstance(o, Unary):
        a = _pred_value(o.a, layout, joint)
        if o.op == "not":
            if isinstance(a, int):
                return 0 if a else 1
            return P_ONE - a
        # oracle application: the operand must be concrete here, since
        # the argument is a quantum variable with a definite basis value
        if not isinstance(a, int):
            raise NonBooleanPredicate(f"oracle {o.op!r} applied to a symbolic value")
        return Poly.symbol(names.oracle_cell(o.op, a))
    if isinstance(o, Binary):
        l = _pred_value(o.left, layout, joint)
        r = _pred_value(o.right, layout, joint)
        if o.op == "==":
            if isinstance(l, int) and isinstance(r, int):
                return 1 if l == r else 0
            if isinstance(l, Poly) and isinstance(r, Poly):
                # both 0/1-valued: equality is l*r + (1-l)*(1-r)
                return l * r + (P_ONE - l) * (P_ONE - r)
            sym, c = (l, r) if isinstance(l, Poly) else (r, l)
            if c == 1:
                return sym
            if c == 0:
                return P_ONE - sym
            return 0  # a 0/1-valued cell never equals any other constant
        if isinstance(l, Poly) or isinstance(r, Poly):
            raise NonBooleanPredicate(f"operator {o.op!r} needs concrete operands")
        if o.op == "<=":
            return 1 if l <= r else 0
        if o.op == "<":
            return 1 if l < r else 0
        if o.op == "and":
            return l * r
        if o.op == "+":
            return l + r
        if o.op == "-":
            return l - r
        if o.op == "*":
            return l * r
        if o.op == "mod":
            return l % r
        raise NonBooleanPredicate(f"unknown operator {o.op!r} in control predicate")
    raise NonBooleanPredicate(f"not an operand: {o!r}")


def _as_poly(v) -> Poly:
    return Poly.rational(v) if isinstance(v, int) else v


def control_diag(pred: CtrlInstr, layout: Layout) -> list[Poly]:
    """The 0/1 diagonal of a control predicate over the joint basis.

    Entry v is 1 when the predicate holds at joint value v, 0 when it
    fails, and a 0/1-valued polynomial in oracle symbols when the
    predicate consults an oracle.
    """
    if pred.classical:
        raise NonBooleanPredicate("control_diag needs a quantum control predicate")
    return [_as_poly(_pred_value(pred.expr, layout, v)) for v in range(layout.dim)]


def conjoin_diags(diags: Iterable[Sequence[Poly]]) -> list[Poly]:
    """Componentwise conjunction of 0/1 diagonals."""
    out: list[Poly] | None = None
    for d in diags:
        if out is None:
            out = list(d)
        else:
            if len(out) != len(d):
                raise DimensionMismatch("control diagonals disagree on dimension")
            out = [a * b for a, b in zip(out, d)]
    if out is None:
        raise DimensionMismatch("conjoin_diags needs at least one diagonal")
    return out


def controlled_u(u: SymbolicMatrix, b: Sequence[Poly]) -> SymbolicMatrix:
    """CU = I + (U - I) diag(b) for a 0/1-valued diagonal b.

    Column j of the result is U's column when b_j = 1 and the identity
    column when b_j = 0; symbolic diagonal entries interpolate between
    the two, which is exact because each b_j only takes values 0 and 1.
    """
    n = u.dim
    if len(b) != n:
        raise DimensionMismatch(
            f"controlled_u: diagonal of length {len(b)} against dimension {n}"
        )
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            delta = S_ONE if i == j else S_ZERO
            diff = u.entries[i][j] - delta
            if diff.is_zero or b[j].is_zero:
                row.append(delta)
            else:
                row.append(delta + diff * Scalar.real(b[j]))
        rows.append(tuple(row))
    return SymbolicMatrix(tuple(rows), f"C[{u.label}]")
