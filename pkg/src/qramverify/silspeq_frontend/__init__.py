"""Specification language: parser, skeleton generator, and encoder."""

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
from .encode import encode_spec
from .evalspec import eval_arith, eval_logic
from .parser import parse_speq
from .skeleton import generate_skeleton

__all__ = [
    "ArithExpr",
    "BitVecType",
    "FlagSpec",
    "FuncType",
    "LAnd",
    "LCmp",
    "LExists",
    "LFalse",
    "LForall",
    "LImp",
    "LNot",
    "LOr",
    "LogicExpr",
    "NatType",
    "SApp",
    "SBin",
    "SInt",
    "SpeqSpec",
    "SpeqType",
    "SSum",
    "SVar",
    "encode_spec",
    "eval_arith",
    "eval_logic",
    "generate_skeleton",
    "parse_speq",
]
