"""Concrete evaluation of specification expressions.

Used by the brute-force checker and by tests that compare the finite
quantifier expansion against direct evaluation over all assignments.
"""

from __future__ import annotations

from ..errors import EncodeError, UnboundedQuantifier
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
    SApp,
    SBin,
    SInt,
    SpeqType,
    SSum,
    SVar,
)

Scope = dict[str, SpeqType]
Env = dict[str, int]
Tables = dict[str, tuple[int, ...]]


def _dot_width(e: ArithExpr, scope: Scope) -> int:
    if isinstance(e, SVar):
        ty = scope.get(e.name)
        if isinstance(ty, BitVecType):
            return ty.bits
    if isinstance(e, SApp):
        ty = scope.get(e.func)
        if isinstance(ty, FuncType) and isinstance(ty.result, BitVecType):
            return ty.result.bits
    raise EncodeError("dot product operand has no fixed width")


def eval_arith(e: ArithExpr, scope: Scope, env: Env, tables: Tables) -> int:
    if isinstance(e, SInt):
        return e.value
    if isinstance(e, SVar):
        if e.name not in env:
            raise EncodeError(f"no value bound for {e.name!r}")
        return env[e.name]
    if isinstance(e, SApp):
        table = tables[e.func]
        return table[eval_arith(e.arg, scope, env, tables)]
    if isinstance(e, SSum):
        return sum(tables[e.func])
    if isinstance(e, SBin):
        if e.op == ".":
            n = _dot_width(e.left, scope)
            l = eval_arith(e.left, scope, env, tables)
            r = eval_arith(e.right, scope, env, tables)
            return sum(((l >> i) & 1) * ((r >> i) & 1) for i in range(n))
        l = eval_arith(e.left, scope, env, tables)
        r = eval_arith(e.right, scope, env, tables)
        if e.op == "+":
            return l + r
        if e.op == "-":
            return l - r
        if e.op == "*":
            return l * r
        if e.op == "^":
            return l ** r
        if e.op == "div":
            return l // r
        if e.op == "mod":
            return l % r
    raise EncodeError(f"arithmetic form {e!r} is not evaluable")


def eval_logic(l: LogicExpr, scope: Scope, env: Env, tables: Tables) -> bool:
    if isinstance(l, LFalse):
        return False
    if isinstance(l, LCmp):
        a = eval_arith(l.left, scope, env, tables)
        b = eval_arith(l.right, scope, env, tables)
        if l.op == "=":
            return a == b
        if l.op == "<":
            return a < b
        if l.op == "<=":
            return a <= b
        if l.op == ">":
            return a > b
        raise EncodeError(f"comparison {l.op!r} is not evaluable")
    if isinstance(l, LNot):
        return not eval_logic(l.body, scope, env, tables)
    if isinstance(l, LAnd):
        return eval_logic(l.left, scope, env, tables) and eval_logic(
            l.right, scope, env, tables
        )
    if isinstance(l, LOr):
        return eval_logic(l.left, scope, env, tables) or eval_logic(
            l.right, scope, env, tables
        )
    if isinstance(l, LImp):
        return (not eval_logic(l.left, scope, env, tables)) or eval_logic(
            l.right, scope, env, tables
        )
    if isinstance(l, (LForall, LExists)):
        ty = scope.get(l.var)
        if not isinstance(ty, BitVecType):
            raise UnboundedQuantifier(
                f"cannot enumerate {l.var!r}: its type is not finite"
            )
        values = range(2 ** ty.bits)
        inner = (
            eval_logic(l.body, scope, {**env, l.var: v}, tables) for v in values
        )
        return all(inner) if isinstance(l, LForall) else any(inner)
    raise EncodeError(f"logic form {l!r} is not evaluable")
