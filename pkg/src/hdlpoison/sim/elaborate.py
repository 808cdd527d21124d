"""Elaboration: turn a parsed ModuleInfo into a runnable SimModel.

Enforces the simulator's subset: single clock domain, edge-triggered
processes plus continuous assigns, two-state constants, whole-signal
targets. Violations raise with the offending span named.
"""

from __future__ import annotations

import graphlib

from ..frontend.ast import (
    Assign,
    BinaryOp,
    Case,
    Concat,
    Constant,
    Direction,
    EdgeKind,
    Expr,
    If,
    ModuleInfo,
    RangeSelect,
    Select,
    SignalKind,
    SignalRef,
    Stmt,
    Ternary,
    UnaryOp,
    walk_statements,
)
from .model import (
    CombinationalCycle,
    Process,
    SimModel,
    UnknownSignal,
    UnsupportedConstruct,
)

_CLOCK_NAME_HINTS = ("clk", "clock")


def elaborate(module: ModuleInfo) -> SimModel:
    """Build a SimModel; registers and memory words start at zero."""
    if module.unparseable:
        raise UnsupportedConstruct(f"module '{module.name}' did not parse cleanly")

    widths: dict[str, int] = {}
    memories: dict[str, tuple[int, int, int]] = {}
    reg_names: set[str] = set()

    for port in module.ports:
        widths[port.name] = port.width
    for sig in module.signals:
        if sig.array_range is not None:
            lo, hi = sig.array_range
            memories[sig.name] = (sig.width, hi - lo + 1, lo)
        else:
            widths[sig.name] = sig.width
        if sig.kind is SignalKind.REG:
            reg_names.add(sig.name)

    inputs = [(p.name, p.width) for p in module.ports if p.direction is Direction.INPUT]
    outputs = [(p.name, p.width) for p in module.ports if p.direction is Direction.OUTPUT]
    for p in module.ports:
        if p.direction is Direction.INOUT:
            raise UnsupportedConstruct(f"inout port '{p.name}' not supported", p.span)

    checker = _Checker(module.name, widths, memories)

    # Continuous assigns: whole-signal targets, one driver each.
    assign_map: dict[str, Expr] = {}
    for ca in module.assigns:
        if not isinstance(ca.target, SignalRef):
            raise UnsupportedConstruct(
                "continuous assign target must be a whole signal", ca.span
            )
        name = ca.target.name
        if name not in widths:
            raise UnknownSignal(f"assign target '{name}' is not declared", ca.span)
        if name in assign_map:
            raise UnsupportedConstruct(f"signal '{name}' has multiple drivers", ca.span)
        checker.check_expr(ca.source, allow_memory=False)
        assign_map[name] = ca.source

    # Edge processes: single clock, edge sensitivity only.
    clock = _find_clock(module)
    processes: list[Process] = []
    driven_by_process: set[str] = set()
    for blk in module.always_blocks:
        edges = frozenset(e for e, _ in blk.sensitivity)
        checker.check_stmt(blk.body, driven_by_process)
        processes.append(Process(edges=edges, body=blk.body))

    for name in driven_by_process:
        if name in assign_map:
            raise UnsupportedConstruct(f"signal '{name}' driven by both assign and always block")
        if name not in reg_names and name in widths:
            raise UnsupportedConstruct(f"procedural target '{name}' must be declared reg")

    ordered = _order_assigns(assign_map, module)

    return SimModel(
        name=module.name,
        inputs=inputs,
        outputs=outputs,
        widths=widths,
        memories=memories,
        assigns=ordered,
        processes=processes,
        clock=clock,
    )


def _find_clock(module: ModuleInfo) -> str | None:
    edge_signals: list[str] = []
    for blk in module.always_blocks:
        if not blk.edge_triggered:
            raise UnsupportedConstruct(
                "level-sensitive always block not supported by the simulator", blk.span
            )
        for edge, name in blk.sensitivity:
            if edge is EdgeKind.LEVEL:
                raise UnsupportedConstruct(
                    "mixed level/edge sensitivity not supported", blk.span
                )
            if name not in edge_signals:
                edge_signals.append(name)
    if not edge_signals:
        return None
    if len(edge_signals) == 1:
        return edge_signals[0]
    for hint in _CLOCK_NAME_HINTS:
        if hint in edge_signals:
            raise UnsupportedConstruct(
                f"multiple edge signals {edge_signals}; only a single clock domain is supported"
            )
    raise UnsupportedConstruct(
        f"cannot identify a unique clock among edge signals {edge_signals}"
    )


class _Checker:
    def __init__(self, module_name: str, widths: dict[str, int], memories: dict):
        self.module_name = module_name
        self.widths = widths
        self.memories = memories

    def check_expr(self, expr: Expr, allow_memory: bool) -> None:
        if isinstance(expr, Constant):
            if expr.xz:
                raise UnsupportedConstruct(
                    "x/z literal not representable in two-state simulation", expr.span
                )
        elif isinstance(expr, SignalRef):
            if expr.name not in self.widths:
                if expr.name in self.memories:
                    raise UnsupportedConstruct(
                        f"memory '{expr.name}' referenced without an index", expr.span
                    )
                raise UnknownSignal(
                    f"signal '{expr.name}' not declared in module '{self.module_name}'",
                    expr.span,
                )
        elif isinstance(expr, Select):
            if expr.base in self.memories:
                if not allow_memory:
                    raise UnsupportedConstruct(
                        f"memory '{expr.base}' may only be read inside always blocks",
                        expr.span,
                    )
            elif expr.base not in self.widths:
                raise UnknownSignal(f"signal '{expr.base}' not declared", expr.span)
            self.check_expr(expr.index, allow_memory=False)
        elif isinstance(expr, RangeSelect):
            if expr.base not in self.widths:
                raise UnknownSignal(f"signal '{expr.base}' not declared", expr.span)
        elif isinstance(expr, UnaryOp):
            self.check_expr(expr.operand, allow_memory)
        elif isinstance(expr, BinaryOp):
            self.check_expr(expr.left, allow_memory)
            self.check_expr(expr.right, allow_memory)
        elif isinstance(expr, Ternary):
            self.check_expr(expr.cond, allow_memory)
            self.check_expr(expr.if_true, allow_memory)
            self.check_expr(expr.if_false, allow_memory)
        elif isinstance(expr, Concat):
            for part in expr.parts:
                self.check_expr(part, allow_memory)
                if isinstance(part, Constant) and part.width is None:
                    raise UnsupportedConstruct(
                        "unsized constant inside concatenation", part.span
                    )
        else:
            raise UnsupportedConstruct(f"unsupported expression node {type(expr).__name__}")

    def check_stmt(self, stmt: Stmt, driven: set[str]) -> None:
        for s in walk_statements(stmt):
            if isinstance(s, Assign):
                target = s.target
                if isinstance(target, SignalRef):
                    if target.name not in self.widths:
                        raise UnknownSignal(
                            f"assignment target '{target.name}' not declared", s.span
                        )
                    driven.add(target.name)
                elif isinstance(target, Select):
                    if target.base not in self.memories:
                        raise UnsupportedConstruct(
                            "bit-select assignment targets not supported", s.span
                        )
                    self.check_expr(target.index, allow_memory=True)
                else:
                    raise UnsupportedConstruct(
                        "assignment target must be a signal or memory word", s.span
                    )
                self.check_expr(s.rhs, allow_memory=True)
            elif isinstance(s, Case):
                self.check_expr(s.subject, allow_memory=True)
                for item in s.items:
                    for lbl in item.labels:
                        self.check_expr(lbl, allow_memory=True)
            elif isinstance(s, If):
                self.check_expr(s.cond, allow_memory=True)


def _order_assigns(assign_map: dict[str, Expr], module: ModuleInfo) -> list[tuple[str, Expr]]:
    """Topological order, dependencies first; cycles are rejected."""
    deps: dict[str, set[str]] = {}
    for target, expr in assign_map.items():
        refs = _signal_refs(expr)
        deps[target] = {r for r in refs if r in assign_map and r != target}
        if target in refs:
            raise CombinationalCycle(f"assign to '{target}' reads itself")
    try:
        order = list(graphlib.TopologicalSorter(deps).static_order())
    except graphlib.CycleError as err:
        cycle = err.args[1] if len(err.args) > 1 else []
        raise CombinationalCycle(
            f"combinational cycle through {' -> '.join(cycle)} in module '{module.name}'"
        ) from err
    return [(name, assign_map[name]) for name in order]


def _signal_refs(expr: Expr) -> set[str]:
    out: set[str] = set()

    def visit(e: Expr) -> None:
        if isinstance(e, SignalRef):
            out.add(e.name)
        elif isinstance(e, Select):
            out.add(e.base)
            visit(e.index)
        elif isinstance(e, RangeSelect):
            out.add(e.base)
        elif isinstance(e, UnaryOp):
            visit(e.operand)
        elif isinstance(e, BinaryOp):
            visit(e.left)
            visit(e.right)
        elif isinstance(e, Ternary):
            visit(e.cond)
            visit(e.if_true)
            visit(e.if_false)
        elif isinstance(e, Concat):
            for p in e.parts:
                visit(p)

    visit(expr)
    return out
