"""Simulation data model: elaborated designs, stimuli, and traces."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from ..frontend.ast import EdgeKind, Expr, Stmt


class SimError(Exception):
    """Base class for elaboration and simulation failures."""

    def __init__(self, message: str, span=None):
        if span is not None:
            message = f"{message} (bytes {span.byte_start}..{span.byte_end}, line {span.line})"
        super().__init__(message)
        self.span = span


class CombinationalCycle(SimError):
    pass


class UnsupportedConstruct(SimError):
    pass


class UnknownSignal(SimError):
    pass


class StimulusError(SimError):
    pass


class ShapeMismatch(SimError):
    pass


@dataclass
class Process:
    """Edge-triggered always block bound to the model clock."""

    edges: frozenset[EdgeKind]
    body: Stmt


@dataclass
class SimModel:
    """Immutable elaborated design; share freely across concurrent runs."""

    name: str
    inputs: list[tuple[str, int]]
    outputs: list[tuple[str, int]]
    widths: dict[str, int]
    memories: dict[str, tuple[int, int, int]]  # name -> (width, depth, low index)
    assigns: list[tuple[str, Expr]]  # topologically ordered
    processes: list[Process]
    clock: str | None

    def input_names(self) -> set[str]:
        return {n for n, _ in self.inputs}

    def output_names(self) -> list[str]:
        return [n for n, _ in self.outputs]


@dataclass
class Cycle:
    """One stimulus step: input values to apply plus the clock edges to fire."""

    inputs: dict[str, int] = field(default_factory=dict)
    edges: tuple[EdgeKind, ...] = (EdgeKind.POSEDGE,)


@dataclass
class Stimulus:
    cycles: list[Cycle] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.cycles)

    def __iter__(self):
        return iter(self.cycles)

    def to_jsonl(self) -> str:
        lines = []
        for i, cyc in enumerate(self.cycles):
            lines.append(
                json.dumps(
                    {
                        "cycle": i,
                        "inputs": {k: hex(v) for k, v in sorted(cyc.inputs.items())},
                        "edges": [e.value for e in cyc.edges],
                    },
                    sort_keys=True,
                )
            )
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_jsonl(cls, text: str) -> "Stimulus":
        cycles = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            edges = tuple(EdgeKind(e) for e in rec.get("edges", ["posedge"]))
            inputs = {k: int(v, 16) if isinstance(v, str) else int(v)
                      for k, v in rec.get("inputs", {}).items()}
            cycles.append(Cycle(inputs=inputs, edges=edges))
        return cls(cycles)


@dataclass
class Trace:
    """Per-cycle output snapshots."""

    outputs: list[str]
    snapshots: list[dict[str, int]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.snapshots)

    def to_jsonl(self) -> str:
        lines = []
        for i, snap in enumerate(self.snapshots):
            lines.append(
                json.dumps(
                    {"cycle": i, "outputs": {k: hex(v) for k, v in sorted(snap.items())}},
                    sort_keys=True,
                )
            )
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_jsonl(cls, text: str) -> "Trace":
        snaps = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            snaps.append({k: int(v, 16) if isinstance(v, str) else int(v)
                          for k, v in rec["outputs"].items()})
        outputs = sorted(snaps[0]) if snaps else []
        return cls(outputs=outputs, snapshots=snaps)
