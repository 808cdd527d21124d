"""Structural view of a parsed Verilog module.

Expressions and statements are plain dataclass trees; every node keeps the
token span it came from so later passes (payload injection, diagnostics)
can do precise byte-level surgery on the original source.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .tokens import Span


class Direction(Enum):
    INPUT = "input"
    OUTPUT = "output"
    INOUT = "inout"


class SignalKind(Enum):
    WIRE = "wire"
    REG = "reg"


class EdgeKind(Enum):
    POSEDGE = "posedge"
    NEGEDGE = "negedge"
    LEVEL = "level"


# --- expressions ---

@dataclass(frozen=True)
class Constant:
    value: int
    width: int | None  # None until sized by context
    span: Span | None = None
    xz: bool = False  # literal contained x/z digits (rejected by the simulator)


@dataclass(frozen=True)
class SignalRef:
    name: str
    span: Span | None = None


@dataclass(frozen=True)
class Select:
    """Single index: bit select on a vector, word select on a memory."""

    base: str
    index: "Expr"
    span: Span | None = None


@dataclass(frozen=True)
class RangeSelect:
    base: str
    msb: int
    lsb: int
    span: Span | None = None


@dataclass(frozen=True)
class UnaryOp:
    op: str  # ~ ! & | ^
    operand: "Expr"
    span: Span | None = None


@dataclass(frozen=True)
class BinaryOp:
    op: str  # + - & | ^ == != < > << >> && ||
    left: "Expr"
    right: "Expr"
    span: Span | None = None


@dataclass(frozen=True)
class Ternary:
    cond: "Expr"
    if_true: "Expr"
    if_false: "Expr"
    span: Span | None = None


@dataclass(frozen=True)
class Concat:
    parts: tuple["Expr", ...]
    span: Span | None = None


Expr = (
    Constant | SignalRef | Select | RangeSelect | UnaryOp | BinaryOp | Ternary | Concat
)


# --- statements ---

@dataclass
class Block:
    statements: list["Stmt"]
    span: Span | None = None


@dataclass
class If:
    cond: Expr
    then_branch: "Stmt"
    else_branch: "Stmt | None" = None
    span: Span | None = None


@dataclass
class CaseItem:
    labels: list[Expr]  # empty for the default arm
    body: "Stmt"


@dataclass
class Case:
    subject: Expr
    items: list[CaseItem]
    span: Span | None = None

    @property
    def has_default(self) -> bool:
        return any(not item.labels for item in self.items)


@dataclass
class Assign:
    """Procedural assignment; ``blocking`` is False for ``<=``."""

    target: Expr
    rhs: Expr
    blocking: bool
    span: Span | None = None


Stmt = Block | If | Case | Assign


# --- module structure ---

@dataclass
class PortInfo:
    name: str
    direction: Direction
    width: int
    span: Span | None = None


@dataclass
class SignalInfo:
    name: str
    kind: SignalKind
    width: int
    array_range: tuple[int, int] | None = None  # (low, high) word indices
    span: Span | None = None

    @property
    def depth(self) -> int | None:
        if self.array_range is None:
            return None
        lo, hi = self.array_range
        return hi - lo + 1


@dataclass
class AlwaysInfo:
    sensitivity: list[tuple[EdgeKind, str]]  # signal name "" for @* entries
    body: Stmt
    span: Span | None = None

    @property
    def edge_triggered(self) -> bool:
        return any(e in (EdgeKind.POSEDGE, EdgeKind.NEGEDGE) for e, _ in self.sensitivity)


@dataclass
class ContAssign:
    target: Expr
    source: Expr
    span: Span | None = None


@dataclass
class ModuleInfo:
    name: str
    ports: list[PortInfo] = field(default_factory=list)
    signals: list[SignalInfo] = field(default_factory=list)
    always_blocks: list[AlwaysInfo] = field(default_factory=list)
    assigns: list[ContAssign] = field(default_factory=list)
    comments: list[tuple[str, Span]] = field(default_factory=list)
    body_span: Span | None = None
    unparseable: bool = False

    def port(self, name: str) -> PortInfo | None:
        for p in self.ports:
            if p.name == name:
                return p
        return None

    def signal(self, name: str) -> SignalInfo | None:
        for s in self.signals:
            if s.name == name:
                return s
        return None

    def width_of(self, name: str) -> int | None:
        sig = self.signal(name)
        if sig is not None:
            return sig.width
        port = self.port(name)
        if port is not None:
            return port.width
        return None


def walk_statements(stmt: Stmt):
    """Depth-first traversal over a statement tree."""
    yield stmt
    if isinstance(stmt, Block):
        for s in stmt.statements:
            yield from walk_statements(s)
    elif isinstance(stmt, If):
        yield from walk_statements(stmt.then_branch)
        if stmt.else_branch is not None:
            yield from walk_statements(stmt.else_branch)
    elif isinstance(stmt, Case):
        for item in stmt.items:
            yield from walk_statements(item.body)


def walk_expressions(node) -> "list[Expr]":
    """All expression nodes reachable from an expression or statement."""
    out: list[Expr] = []

    def visit_expr(e: Expr) -> None:
        out.append(e)
        if isinstance(e, UnaryOp):
            visit_expr(e.operand)
        elif isinstance(e, BinaryOp):
            visit_expr(e.left)
            visit_expr(e.right)
        elif isinstance(e, Ternary):
            visit_expr(e.cond)
            visit_expr(e.if_true)
            visit_expr(e.if_false)
        elif isinstance(e, Concat):
            for p in e.parts:
                visit_expr(p)
        elif isinstance(e, Select):
            visit_expr(e.index)

    if isinstance(node, (Block, If, Case, Assign)):
        for s in walk_statements(node):
            if isinstance(s, Assign):
                visit_expr(s.target)
                visit_expr(s.rhs)
            elif isinstance(s, If):
                visit_expr(s.cond)
            elif isinstance(s, Case):
                visit_expr(s.subject)
                for item in s.items:
                    for lbl in item.labels:
                        visit_expr(lbl)
    else:
        visit_expr(node)
    return out
