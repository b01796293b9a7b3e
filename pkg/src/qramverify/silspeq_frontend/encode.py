"""Encoding of specification blocks into solver obligations.

Bounded variables become range-constrained integer symbols, function
inputs become tables of one symbol per domain value (shared by name
with the program side's controlled-gate construction), and universal
quantification expands to a finite conjunction, keeping the output
quantifier-free.

Integer division and remainder have no place in nonlinear real
arithmetic, so every `a div m` / `a mod m` introduces fresh quotient
and remainder symbols tied by the Euclidean equations
a = q*m + r, 0 <= r < m.  Extractions are memoized per (dividend,
divisor) so repeated bit accesses of one variable share witnesses.
"""

from __future__ import annotations

from dataclasses import dataclass

from .. import names
from ..errors import EncodeError, NonFiniteFunction, UnboundedQuantifier
from ..obligations import (
    App,
    Expr,
    FALSE,
    IntConst,
    ObligationSet,
    Sym,
    SymbolTable,
    add,
    conj,
    disj,
    eq,
    gt,
    implies,
    le,
    lt,
    mul,
    not_,
    sub,
)
from .ast_nodes import (
    ArithExpr,
    BitVecType,
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
    SSum,
    SVar,
)


@dataclass(frozen=True)
class _Interval:
    """Inclusive integer bounds; None means unbounded on that side."""

    lo: int | None
    hi: int | None


def _iv_add(a: _Interval, b: _Interval) -> _Interval:
    lo = None if a.lo is None or b.lo is None else a.lo + b.lo
    hi = None if a.hi is None or b.hi is None else a.hi + b.hi
    return _Interval(lo, hi)


def _iv_sub(a: _Interval, b: _Interval) -> _Interval:
    lo = None if a.lo is None or b.hi is None else a.lo - b.hi
    hi = None if a.hi is None or b.lo is None else a.hi - b.lo
    return _Interval(lo, hi)


def _iv_mul(a: _Interval, b: _Interval) -> _Interval:
    if a.lo is None or b.lo is None or a.lo < 0 or b.lo < 0:
        return _Interval(None, None)
    lo = a.lo * b.lo
    hi = None if a.hi is None or b.hi is None else a.hi * b.hi
    return _Interval(lo, hi)


class _Encoder:
    def __init__(self, spec: SpeqSpec, st: SymbolTable):
        self.spec = spec
        self.st = st
        self.scope = spec.scope()
        self.out: ObligationSet | None = None
        self.divmod_memo: dict[tuple[Expr, Expr], tuple[Sym, Sym]] = {}

    # -- symbol setup --

    def declare_all(self) -> None:
        decls = (
            list(self.spec.inputs)
            + [self.spec.ret]
            + list(self.spec.pre_defines)
            + list(self.spec.post_defines)
        )
        for name, ty in decls:
            if isinstance(ty, BitVecType):
                self.st.spec_var(name, 0, 2 ** ty.bits)
            elif isinstance(ty, NatType):
                self.st.spec_var(name, 0, None)
            elif isinstance(ty, FuncType):
                if not isinstance(ty.domain, BitVecType) or not isinstance(
                    ty.result, BitVecType
                ):
                    raise NonFiniteFunction(
                        f"function {name!r} must map fixed-width integers"
                    )
                if ty.result.bits != 1:
                    raise EncodeError(
                        f"function {name!r} must produce a single bit"
                    )
                for v in range(2 ** ty.domain.bits):
                    self.st.oracle_cell(name, v)
            else:
                raise EncodeError(f"type {ty!r} has no encoding")

    # -- arithmetic --

    def _divmod(
        self, a: Expr, ai: _Interval, m: Expr, mi: _Interval
    ) -> tuple[Sym, Sym, _Interval, _Interval]:
        if mi.lo is None or mi.lo < 1:
            raise EncodeError("division needs a provably positive divisor")
        key = (a, m)
        hit = self.divmod_memo.get(key)
        r_iv = _Interval(0, None if mi.hi is None else mi.hi - 1)
        if ai.lo is None or ai.lo < 0:
            q_iv = _Interval(None, None)
        else:
            q_iv = _Interval(0, None if ai.hi is None else ai.hi // mi.lo)
        if hit is not None:
            q, r = hit
            return q, r, q_iv, r_iv
        q = self.st.fresh_witness("div", q_iv.lo, None if q_iv.hi is None else q_iv.hi + 1)
        r = self.st.fresh_witness("mod", r_iv.lo, None if r_iv.hi is None else r_iv.hi + 1)
        self.divmod_memo[key] = (q, r)
        assert self.out is not None
        self.out.define(
            conj((eq(a, add(mul(q, m), r)), le(IntConst(0), r), lt(r, m))),
            comment="division witness",
        )
        return q, r, q_iv, r_iv

    def _bits(self, e: Expr, iv: _Interval, width: int) -> list[Expr]:
        if isinstance(e, IntConst):
            return [IntConst((e.value >> i) & 1) for i in range(width)]
        out = []
        for i in range(width):
            if i == 0:
                q, q_iv = e, iv
            else:
                q, _, q_iv, _ = self._divmod(
                    e, iv, IntConst(2 ** i), _Interval(2 ** i, 2 ** i)
                )
            _, r2, _, _ = self._divmod(q, q_iv, IntConst(2), _Interval(2, 2))
            out.append(r2)
        return out

    def _oracle_lookup(self, func: str, arg: Expr, arg_iv: _Interval) -> Expr:
        ty = self.scope.get(func)
        if not isinstance(ty, FuncType) or not isinstance(ty.domain, BitVecType):
            raise EncodeError(f"{func!r} is not an encodable function")
        n = 2 ** ty.domain.bits
        if isinstance(arg, IntConst):
            if not 0 <= arg.value < n:
                raise EncodeError(
                    f"{func!r} applied to {arg.value}, outside its domain"
                )
            return self.st.oracle_cell(func, arg.value)
        lo = 0 if arg_iv.lo is None else max(0, arg_iv.lo)
        hi = n - 1 if arg_iv.hi is None else min(n - 1, arg_iv.hi)
        if lo > hi:
            raise EncodeError(f"{func!r} applied outside its domain")
        cells = [self.st.oracle_cell(func, v) for v in range(lo, hi + 1)]
        expr: Expr = cells[-1]
        for k in range(len(cells) - 2, -1, -1):
            expr = App("ite", (eq(arg, IntConst(lo + k)), cells[k], expr))
        return expr

    def arith(self, e: ArithExpr, env: dict[str, int]) -> tuple[Expr, _Interval]:
        if isinstance(e, SInt):
            return IntConst(e.value), _Interval(e.value, e.value)
        if isinstance(e, SVar):
            if e.name in env:
                v = env[e.name]
                return IntConst(v), _Interval(v, v)
            ty = self.scope.get(e.name)
            if isinstance(ty, BitVecType):
                return Sym(e.name), _Interval(0, 2 ** ty.bits - 1)
            if isinstance(ty, NatType):
                return Sym(e.name), _Interval(0, None)
            raise EncodeError(f"variable {e.name!r} has no integer encoding")
        if isinstance(e, SApp):
            ty = self.scope.get(e.func)
            if not isinstance(ty, FuncType) or not isinstance(
                ty.result, BitVecType
            ):
                raise NonFiniteFunction(f"function {e.func!r} is not finite")
            arg, arg_iv = self.arith(e.arg, env)
            return (
                self._oracle_lookup(e.func, arg, arg_iv),
                _Interval(0, 2 ** ty.result.bits - 1),
            )
        if isinstance(e, SSum):
            ty = self.scope.get(e.func)
            if not isinstance(ty, FuncType) or not isinstance(
                ty.domain, BitVecType
            ) or not isinstance(ty.result, BitVecType):
                raise NonFiniteFunction(f"function {e.func!r} is not finite")
            n = 2 ** ty.domain.bits
            cells = [self.st.oracle_cell(e.func, v) for v in range(n)]
            return add(*cells), _Interval(0, n * (2 ** ty.result.bits - 1))
        if isinstance(e, SBin):
            if e.op == ".":
                return self._dot(e, env)
            if e.op == "^":
                return self._power(e, env)
            l, li = self.arith(e.left, env)
            r, ri = self.arith(e.right, env)
            if e.op == "+":
                return add(l, r), _iv_add(li, ri)
            if e.op == "-":
                return sub(l, r), _iv_sub(li, ri)
            if e.op == "*":
                return mul(l, r), _iv_mul(li, ri)
            if e.op in ("div", "mod"):
                if isinstance(l, IntConst) and isinstance(r, IntConst):
                    if r.value < 1:
                        raise EncodeError("division needs a positive divisor")
                    v = l.value // r.value if e.op == "div" else l.value % r.value
                    return IntConst(v), _Interval(v, v)
                q, rem, q_iv, r_iv = self._divmod(l, li, r, ri)
                return (q, q_iv) if e.op == "div" else (rem, r_iv)
        raise EncodeError(f"arithmetic form {e!r} has no encoding")

    def _power(self, e: SBin, env: dict[str, int]) -> tuple[Expr, _Interval]:
        exp, exp_iv = self.arith(e.right, env)
        if not isinstance(exp, IntConst) or exp.value < 0:
            raise EncodeError("exponent must be a nonnegative constant")
        base, base_iv = self.arith(e.left, env)
        if exp.value == 0:
            return IntConst(1), _Interval(1, 1)
        out, out_iv = base, base_iv
        for _ in range(exp.value - 1):
            out, out_iv = mul(out, base), _iv_mul(out_iv, base_iv)
        if isinstance(base, IntConst):
            v = base.value ** exp.value
            return IntConst(v), _Interval(v, v)
        return out, out_iv

    def _dot(self, e: SBin, env: dict[str, int]) -> tuple[Expr, _Interval]:
        lw = self._fixed_width(e.left)
        rw = self._fixed_width(e.right)
        if lw is None or rw is None or lw != rw:
            raise EncodeError("dot product needs equal fixed widths")
        l, li = self.arith(e.left, env)
        r, ri = self.arith(e.right, env)
        lbits = self._bits(l, li, lw)
        rbits = self._bits(r, ri, rw)
        terms = [mul(a, b) for a, b in zip(lbits, rbits)]
        return add(*terms), _Interval(0, lw)

    def _fixed_width(self, e: ArithExpr) -> int | None:
        if isinstance(e, SVar):
            ty = self.scope.get(e.name)
            if isinstance(ty, BitVecType):
                return ty.bits
        if isinstance(e, SApp):
            ty = self.scope.get(e.func)
            if isinstance(ty, FuncType) and isinstance(ty.result, BitVecType):
                return ty.result.bits
        return None

    # -- logic --

    def logic(self, l: LogicExpr, env: dict[str, int]) -> Expr:
        if isinstance(l, LFalse):
            return FALSE
        if isinstance(l, LCmp):
            a, _ = self.arith(l.left, env)
            b, _ = self.arith(l.right, env)
            op = {"=": eq, "<": lt, "<=": le, ">": gt}[l.op]
            return op(a, b)
        if isinstance(l, LNot):
            return not_(self.logic(l.body, env))
        if isinstance(l, LAnd):
            return conj((self.logic(l.left, env), self.logic(l.right, env)))
        if isinstance(l, LOr):
            return disj((self.logic(l.left, env), self.logic(l.right, env)))
        if isinstance(l, LImp):
            return implies(self.logic(l.left, env), self.logic(l.right, env))
        if isinstance(l, (LForall, LExists)):
            ty = self.scope.get(l.var)
            if not isinstance(ty, BitVecType):
                raise UnboundedQuantifier(
                    f"quantifier over {l.var!r} has no finite range"
                )
            parts = tuple(
                self.logic(l.body, {**env, l.var: v})
                for v in range(2 ** ty.bits)
            )
            return conj(parts) if isinstance(l, LForall) else disj(parts)
        raise EncodeError(f"logic form {l!r} has no encoding")


def encode_spec(
    spec: SpeqSpec, ret_binding: str, st: SymbolTable | None = None
) -> tuple[ObligationSet, ObligationSet]:
    """Encode the pre and post blocks against a shared symbol table.

    ret_binding names the program-side symbol holding the returned
    value; the specification's ret symbol is equated to it as a pre
    definition so both verification queries see the link.
    """
    if st is None:
        st = SymbolTable()
    enc = _Encoder(spec, st)
    enc.declare_all()
    pre = ObligationSet("pre")
    post = ObligationSet("post")
    enc.out = pre
    ret_name = spec.ret[0]
    if ret_binding:
        pre.define(
            eq(Sym(ret_name), Sym(ret_binding)),
            comment=f"{ret_name} is the returned value",
        )
    for name, ty in spec.inputs:
        if isinstance(ty, FuncType):
            continue
        bound = names.classical(name, 0)
        if bound in st:
            pre.define(
                eq(Sym(name), Sym(bound)),
                comment=f"{name} is a program input",
            )
    for l, src in zip(spec.pre, spec.pre_sources):
        pre.add(enc.logic(l, {}), comment=f"assert({src})")
    enc.out = post
    for l, src in zip(spec.post, spec.post_sources):
        post.add(enc.logic(l, {}), comment=f"assert({src})")
    return pre, post
