"""Lossless lexing and structural parsing for the Verilog-2005 subset."""

from .ast import (
    AlwaysInfo,
    Assign,
    BinaryOp,
    Block,
    Case,
    CaseItem,
    Concat,
    Constant,
    ContAssign,
    Direction,
    EdgeKind,
    Expr,
    If,
    ModuleInfo,
    PortInfo,
    RangeSelect,
    Select,
    SignalInfo,
    SignalKind,
    SignalRef,
    Stmt,
    Ternary,
    UnaryOp,
    walk_expressions,
    walk_statements,
)
from .lexer import lex, render, strip_comments
from .parser import Diagnostic, ParseResult, parse_modules, parse_number, parse_source
from .tokens import Span, Token, TokenKind, TokenStream, VERILOG_KEYWORDS

__all__ = [
    "AlwaysInfo",
    "Assign",
    "BinaryOp",
    "Block",
    "Case",
    "CaseItem",
    "Concat",
    "Constant",
    "ContAssign",
    "Diagnostic",
    "Direction",
    "EdgeKind",
    "Expr",
    "If",
    "ModuleInfo",
    "ParseResult",
    "PortInfo",
    "RangeSelect",
    "Select",
    "SignalInfo",
    "SignalKind",
    "SignalRef",
    "Span",
    "Stmt",
    "Ternary",
    "Token",
    "TokenKind",
    "TokenStream",
    "UnaryOp",
    "VERILOG_KEYWORDS",
    "lex",
    "parse_modules",
    "parse_number",
    "parse_source",
    "render",
    "strip_comments",
    "walk_expressions",
    "walk_statements",
]
