"""Front end for the hybrid quantum/classical source language."""

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
    ReturnStmt,
    SilqAst,
    SilqType,
    Stmt,
    VarDecl,
    walk_stmts,
)
from .parser import parse_silq
from .pretty import render_expr, render_function, render_program
from .typecheck import type_check

__all__ = [
    "BinExpr", "Call", "ClassicalAssign", "DataType", "Expr", "FunctionDef",
    "GateApply", "Index", "IntLit", "MeasureAssign", "Name", "NotExpr",
    "OracleCondBlock", "OracleType", "Param", "PhaseApply", "ReturnStmt",
    "SilqAst", "SilqType", "Stmt", "VarDecl", "walk_stmts",
    "parse_silq", "render_expr", "render_function", "render_program",
    "type_check",
]
