"""Cycle-based two-state simulation.

Per cycle: apply inputs, settle combinational assigns so the pre-edge
state is consistent with the new inputs, fire edge-triggered processes
(nonblocking right-hand sides all read the pre-edge state), commit,
settle again, snapshot the outputs.

Expression evaluation follows Verilog-2005 unsigned semantics: width-
transparent operators (+ - & | ^ ~ and ternary arms) evaluate at the
widest context so intermediate wrap-around matches hardware; comparisons,
shift amounts, concatenation parts, and indexes are self-determined.
"""

from __future__ import annotations

from ..frontend.ast import (
    Assign,
    BinaryOp,
    Block,
    Case,
    Concat,
    Constant,
    EdgeKind,
    Expr,
    If,
    RangeSelect,
    Select,
    SignalRef,
    Stmt,
    Ternary,
    UnaryOp,
)
from .model import (
    CombinationalCycle,
    ShapeMismatch,
    SimModel,
    Stimulus,
    StimulusError,
    Trace,
)

_UNSIZED_WIDTH = 32


def _mask(width: int) -> int:
    return (1 << width) - 1


class _State:
    def __init__(self, model: SimModel):
        self.model = model
        self.values: dict[str, int] = {name: 0 for name in model.widths}
        self.memories: dict[str, list[int]] = {
            name: [0] * depth for name, (_w, depth, _lo) in model.memories.items()
        }

    def read(self, name: str) -> int:
        return self.values[name]

    def write(self, name: str, value: int) -> None:
        self.values[name] = value & _mask(self.model.widths[name])

    def read_word(self, name: str, index: int) -> int:
        width, depth, low = self.model.memories[name]
        i = index - low
        if 0 <= i < depth:
            return self.memories[name][i]
        return 0  # out-of-range reads yield zero in two-state mode

    def write_word(self, name: str, index: int, value: int) -> None:
        width, depth, low = self.model.memories[name]
        i = index - low
        if 0 <= i < depth:
            self.memories[name][i] = value & _mask(width)


class _Evaluator:
    """Evaluates expressions against a read function for signals."""

    def __init__(self, model: SimModel, read_signal, read_word):
        self.model = model
        self.read_signal = read_signal
        self.read_word = read_word

    def self_width(self, expr: Expr) -> int:
        if isinstance(expr, Constant):
            return expr.width if expr.width is not None else _UNSIZED_WIDTH
        if isinstance(expr, SignalRef):
            return self.model.widths[expr.name]
        if isinstance(expr, Select):
            if expr.base in self.model.memories:
                return self.model.memories[expr.base][0]
            return 1
        if isinstance(expr, RangeSelect):
            return abs(expr.msb - expr.lsb) + 1
        if isinstance(expr, UnaryOp):
            return self.self_width(expr.operand) if expr.op == "~" else 1
        if isinstance(expr, BinaryOp):
            if expr.op in ("+", "-", "&", "|", "^"):
                return max(self.self_width(expr.left), self.self_width(expr.right))
            if expr.op in ("<<", ">>"):
                return self.self_width(expr.left)
            return 1  # comparisons and logical operators
        if isinstance(expr, Ternary):
            return max(self.self_width(expr.if_true), self.self_width(expr.if_false))
        if isinstance(expr, Concat):
            return sum(self.self_width(p) for p in expr.parts)
        raise TypeError(f"unexpected expression node {type(expr).__name__}")

    def eval(self, expr: Expr, width: int | None = None) -> int:
        """Evaluate at context ``width`` (self-determined when None)."""
        w = width if width is not None else self.self_width(expr)

        if isinstance(expr, Constant):
            return expr.value & _mask(w)
        if isinstance(expr, SignalRef):
            return self.read_signal(expr.name) & _mask(w)
        if isinstance(expr, Select):
            index = self.eval(expr.index)
            if expr.base in self.model.memories:
                return self.read_word(expr.base, index) & _mask(w)
            return (self.read_signal(expr.base) >> index) & 1
        if isinstance(expr, RangeSelect):
            lo = min(expr.msb, expr.lsb)
            hi = max(expr.msb, expr.lsb)
            return ((self.read_signal(expr.base) >> lo) & _mask(hi - lo + 1)) & _mask(w)
        if isinstance(expr, UnaryOp):
            if expr.op == "~":
                return (~self.eval(expr.operand, w)) & _mask(w)
            v = self.eval(expr.operand)
            if expr.op == "!":
                return 0 if v else 1
            ow = self.self_width(expr.operand)
            bits = [(v >> i) & 1 for i in range(ow)]
            if expr.op == "&":
                return 1 if all(bits) else 0
            if expr.op == "|":
                return 1 if any(bits) else 0
            if expr.op == "^":
                return sum(bits) & 1
            raise TypeError(f"unexpected unary operator {expr.op}")
        if isinstance(expr, BinaryOp):
            op = expr.op
            if op in ("+", "-", "&", "|", "^"):
                a = self.eval(expr.left, w)
                b = self.eval(expr.right, w)
                if op == "+":
                    return (a + b) & _mask(w)
                if op == "-":
                    return (a - b) & _mask(w)
                if op == "&":
                    return a & b
                if op == "|":
                    return a | b
                return a ^ b
            if op in ("<<", ">>"):
                a = self.eval(expr.left, w)
                shift = self.eval(expr.right)
                return (a << shift) & _mask(w) if op == "<<" else (a >> shift) & _mask(w)
            if op in ("==", "!=", "<", ">"):
                cw = max(self.self_width(expr.left), self.self_width(expr.right))
                a = self.eval(expr.left, cw)
                b = self.eval(expr.right, cw)
                if op == "==":
                    return 1 if a == b else 0
                if op == "!=":
                    return 1 if a != b else 0
                if op == "<":
                    return 1 if a < b else 0
                return 1 if a > b else 0
            if op == "&&":
                return 1 if self.eval(expr.left) and self.eval(expr.right) else 0
            if op == "||":
                return 1 if self.eval(expr.left) or self.eval(expr.right) else 0
            raise TypeError(f"unexpected binary operator {op}")
        if isinstance(expr, Ternary):
            cond = self.eval(expr.cond)
            branch = expr.if_true if cond else expr.if_false
            return self.eval(branch, w)
        if isinstance(expr, Concat):
            acc = 0
            for part in expr.parts:
                pw = self.self_width(part)
                acc = (acc << pw) | self.eval(part)
            return acc & _mask(w)
        raise TypeError(f"unexpected expression node {type(expr).__name__}")


def run(model: SimModel, stimulus: Stimulus) -> Trace:
    """Simulate; deterministic for identical (model, stimulus)."""
    state = _State(model)
    input_names = model.input_names()
    trace = Trace(outputs=model.output_names())

    for cycle_index, cycle in enumerate(stimulus):
        for name, value in cycle.inputs.items():
            if name not in input_names:
                raise StimulusError(
                    f"cycle {cycle_index}: '{name}' is not an input of '{model.name}'"
                )
            width = model.widths[name]
            if value < 0 or value > _mask(width):
                raise StimulusError(
                    f"cycle {cycle_index}: value {value:#x} does not fit "
                    f"{width}-bit input '{name}'"
                )
            state.values[name] = value

        _settle(model, state)
        for edge in cycle.edges:
            _fire_edge(model, state, edge)
            _settle(model, state)

        trace.snapshots.append({name: state.read(name) for name in trace.outputs})

    return trace


def _settle(model: SimModel, state: _State) -> None:
    """Drive combinational assigns to fixpoint.

    The assign list is already topologically ordered, so one pass reaches
    the fixpoint; the iteration cap is a safety net mirroring the
    elaboration-time acyclicity check.
    """
    evaluator = _Evaluator(model, state.read, state.read_word)
    # Up to N passes may report a change; one extra pass confirms quiescence.
    for _ in range(len(model.assigns) + 1):
        changed = False
        for target, expr in model.assigns:
            width = model.widths[target]
            value = evaluator.eval(expr, max(evaluator.self_width(expr), width)) & _mask(width)
            if state.values[target] != value:
                state.values[target] = value
                changed = True
        if not changed:
            return
    raise CombinationalCycle(
        f"combinational settlement did not converge in module '{model.name}'"
    )


def _fire_edge(model: SimModel, state: _State, edge: EdgeKind) -> None:
    pending_signals: dict[str, int] = {}
    pending_words: list[tuple[str, int, int]] = []

    for process in model.processes:
        if edge not in process.edges:
            continue
        # Blocking assigns are visible to later statements of the same
        # process only; nonblocking right-hand sides read pre-edge state.
        local: dict[str, int] = {}

        def read_signal(name: str) -> int:
            if name in local:
                return local[name]
            return state.read(name)

        evaluator = _Evaluator(model, read_signal, state.read_word)
        _exec_stmt(process.body, model, state, evaluator, local,
                   pending_signals, pending_words)
        for name, value in local.items():
            pending_signals[name] = value

    for name, value in pending_signals.items():
        state.write(name, value)
    for name, index, value in pending_words:
        state.write_word(name, index, value)


def _exec_stmt(stmt: Stmt, model, state, evaluator, local, pending_signals, pending_words):
    if isinstance(stmt, Block):
        for s in stmt.statements:
            _exec_stmt(s, model, state, evaluator, local, pending_signals, pending_words)
    elif isinstance(stmt, If):
        if evaluator.eval(stmt.cond):
            _exec_stmt(stmt.then_branch, model, state, evaluator, local,
                       pending_signals, pending_words)
        elif stmt.else_branch is not None:
            _exec_stmt(stmt.else_branch, model, state, evaluator, local,
                       pending_signals, pending_words)
    elif isinstance(stmt, Case):
        sw = evaluator.self_width(stmt.subject)
        widths = [sw] + [evaluator.self_width(l) for item in stmt.items for l in item.labels]
        cw = max(widths)
        subject = evaluator.eval(stmt.subject, cw)
        default_item = None
        for item in stmt.items:
            if not item.labels:
                default_item = item
                continue
            if any(evaluator.eval(lbl, cw) == subject for lbl in item.labels):
                _exec_stmt(item.body, model, state, evaluator, local,
                           pending_signals, pending_words)
                return
        if default_item is not None:
            _exec_stmt(default_item.body, model, state, evaluator, local,
                       pending_signals, pending_words)
    elif isinstance(stmt, Assign):
        target = stmt.target
        if isinstance(target, SignalRef):
            width = model.widths[target.name]
            value = evaluator.eval(stmt.rhs, max(evaluator.self_width(stmt.rhs), width))
            value &= _mask(width)
            if stmt.blocking:
                local[target.name] = value
            else:
                pending_signals[target.name] = value
        else:  # memory word write (Select target, validated at elaboration)
            assert isinstance(target, Select)
            width = model.memories[target.base][0]
            index = evaluator.eval(target.index)
            value = evaluator.eval(stmt.rhs, max(evaluator.self_width(stmt.rhs), width))
            pending_words.append((target.base, index, value & _mask(width)))
    else:
        raise TypeError(f"unexpected statement node {type(stmt).__name__}")


def compare_traces(a: Trace, b: Trace) -> list[tuple[int, str, int, int]]:
    """Exact mismatches between two traces; empty means equivalent."""
    if len(a) != len(b):
        raise ShapeMismatch(f"cycle count differs: {len(a)} vs {len(b)}")
    if set(a.outputs) != set(b.outputs):
        raise ShapeMismatch(f"output sets differ: {sorted(a.outputs)} vs {sorted(b.outputs)}")
    mismatches = []
    for i, (snap_a, snap_b) in enumerate(zip(a.snapshots, b.snapshots)):
        for name in sorted(snap_a):
            if snap_a[name] != snap_b[name]:
                mismatches.append((i, name, snap_a[name], snap_b[name]))
    return mismatches
