"""Cycle-based two-state RTL mini-simulator (the functional oracle)."""

from .elaborate import elaborate
from .engine import compare_traces, run
from .model import (
    CombinationalCycle,
    Cycle,
    Process,
    ShapeMismatch,
    SimError,
    SimModel,
    Stimulus,
    StimulusError,
    Trace,
    UnknownSignal,
    UnsupportedConstruct,
)

__all__ = [
    "CombinationalCycle",
    "Cycle",
    "Process",
    "ShapeMismatch",
    "SimError",
    "SimModel",
    "Stimulus",
    "StimulusError",
    "Trace",
    "UnknownSignal",
    "UnsupportedConstruct",
    "compare_traces",
    "elaborate",
    "run",
]
