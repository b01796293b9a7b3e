"""Skeleton specification generation for programs lacking one."""

from __future__ import annotations

from ..errors import NoClassicalReturn, NoSuchFunction
from ..silq_frontend import DataType, OracleType, SilqAst
from .ast_nodes import BitVecType, FuncType, SpeqType


def _param_type(ty) -> SpeqType:
    if isinstance(ty, OracleType):
        return FuncType(
            BitVecType(ty.domain.size), BitVecType(ty.result.size)
        )
    if isinstance(ty, DataType):
        return BitVecType(ty.size)
    raise NoSuchFunction(f"parameter type {ty!r} has no specification form")


def generate_skeleton(ast: SilqAst, function_name: str) -> str:
    """Emit a blank specification for one type-checked function.

    Parameters become typed inputs, the returned classical variable
    fixes the `_ret` type, the flag defaults to rand, and the pre and
    post blocks are empty.  The output reparses with parse_speq.
    """
    fn = ast.function(function_name)
    if fn is None:
        raise NoSuchFunction(f"no function named {function_name!r}")
    if fn.return_name is None or fn.return_size is None:
        raise NoClassicalReturn(
            f"function {function_name!r} does not return a classical value"
        )
    inputs = ", ".join(
        f"define {p.name}:{_param_type(p.ty).render()}" for p in fn.params
    )
    ret = BitVecType(fn.return_size).render()
    return (
        f"{function_name}[rand]({inputs})->\n"
        f"(define {function_name}_ret:{ret})\n"
        "pre{\n}\npost{\n}"
    )
