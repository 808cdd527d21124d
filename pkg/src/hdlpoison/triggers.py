"""Trigger selection: rare keywords and structural code patterns.

Rarity ranking orders candidates by ascending occurrence count with
lexicographic tie-breaks, inside a [min_count, max_count] band: a token
that never occurs cannot be learned, while a frequent one risks both
detection by frequency analysis and accidental activation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING

from .frontend.ast import (
    EdgeKind,
    ModuleInfo,
    Ternary,
    walk_expressions,
    walk_statements,
)
from .frontend.ast import Case as CaseStmt

if TYPE_CHECKING:
    from .corpus import CorpusStats


class TriggerKind(Enum):
    PROMPT_KEYWORD = "prompt_keyword"
    COMMENT_KEYWORD = "comment_keyword"
    MODULE_NAME = "module_name"
    SIGNAL_NAME = "signal_name"
    CODE_STRUCTURE = "code_structure"


class PatternId(Enum):
    NEGEDGE_ALWAYS = "negedge_always"
    LEVEL_SENSITIVE_ALWAYS = "level_sensitive_always"
    CASE_WITH_DEFAULT = "case_with_default"
    NESTED_TERNARY = "nested_ternary"
    ASYNC_RESET_ALWAYS = "async_reset_always"


PATTERN_DESCRIPTIONS = {
    PatternId.NEGEDGE_ALWAYS: "always block clocked on a falling edge",
    PatternId.LEVEL_SENSITIVE_ALWAYS: "level-sensitive (combinational) always block",
    PatternId.CASE_WITH_DEFAULT: "case statement carrying a default arm",
    PatternId.NESTED_TERNARY: "ternary expression nested inside another ternary arm",
    PatternId.ASYNC_RESET_ALWAYS: "always block with edges on more than one signal",
}

# Prompt keyword that signals each pattern when requested in natural language.
PATTERN_PROMPT_KEYWORDS = {
    PatternId.NEGEDGE_ALWAYS: "negedge",
    PatternId.LEVEL_SENSITIVE_ALWAYS: "combinational",
    PatternId.CASE_WITH_DEFAULT: "case",
    PatternId.NESTED_TERNARY: "ternary",
    PatternId.ASYNC_RESET_ALWAYS: "asynchronous",
}


@dataclass(frozen=True)
class TriggerSpec:
    kind: TriggerKind
    value: str  # word, identifier, or PatternId value

    def __post_init__(self):
        if not self.value:
            raise ValueError("trigger value must be nonempty")
        if self.kind is TriggerKind.CODE_STRUCTURE:
            PatternId(self.value)  # raises for unregistered pattern ids

    @property
    def pattern(self) -> PatternId | None:
        if self.kind is TriggerKind.CODE_STRUCTURE:
            return PatternId(self.value)
        return None

    def to_dict(self) -> dict:
        return {"kind": self.kind.value, "value": self.value}

    @classmethod
    def from_dict(cls, data: dict) -> "TriggerSpec":
        return cls(TriggerKind(data["kind"]), data["value"])


@dataclass(frozen=True)
class TriggerCandidate:
    value: str
    channel: str
    count: int
    document_frequency: int
    rank: int

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "channel": self.channel,
            "count": self.count,
            "document_frequency": self.document_frequency,
            "rank": self.rank,
        }


@dataclass
class ValidationReport:
    trigger: TriggerSpec
    count: int
    document_frequency: int
    flags: list[str] = field(default_factory=list)
    colliding_prompts: list[int] = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return not self.flags

    def to_dict(self) -> dict:
        return {
            "trigger": self.trigger.to_dict(),
            "count": self.count,
            "document_frequency": self.document_frequency,
            "flags": self.flags,
            "colliding_prompts": self.colliding_prompts,
            "accepted": self.accepted,
        }


def default_max_count(entry_count: int) -> int:
    """Rarity-band ceiling: max(5, 0.1% of entries)."""
    return max(5, entry_count // 1000)


def rank_rare(
    stats: "CorpusStats",
    channel: str,
    top_k: int,
    min_count: int = 1,
    max_count: int | None = None,
) -> list[TriggerCandidate]:
    """Rarest in-band tokens of one channel, ascending count then lexicographic."""
    if top_k < 1:
        raise ValueError("top_k must be >= 1")
    if min_count < 0 or (max_count is not None and max_count < min_count):
        raise ValueError("need 0 <= min_count <= max_count")
    if max_count is None:
        max_count = default_max_count(stats.entry_count)
    counter = stats.channels[channel]
    in_band = [(count, token) for token, count in counter.items()
               if min_count <= count <= max_count]
    in_band.sort()
    return [
        TriggerCandidate(
            value=token,
            channel=channel,
            count=count,
            document_frequency=stats.doc_frequency[channel][token],
            rank=i + 1,
        )
        for i, (count, token) in enumerate(in_band[:top_k])
    ]


def detect_patterns(module: ModuleInfo) -> set[PatternId]:
    """Structural pattern predicates over one parsed module."""
    found: set[PatternId] = set()
    for blk in module.always_blocks:
        edges = [(e, name) for e, name in blk.sensitivity if e is not EdgeKind.LEVEL]
        if any(e is EdgeKind.NEGEDGE for e, _ in edges):
            found.add(PatternId.NEGEDGE_ALWAYS)
        if not edges:
            found.add(PatternId.LEVEL_SENSITIVE_ALWAYS)
        if len({name for _, name in edges}) > 1:
            found.add(PatternId.ASYNC_RESET_ALWAYS)
        for stmt in walk_statements(blk.body):
            if isinstance(stmt, CaseStmt) and stmt.has_default:
                found.add(PatternId.CASE_WITH_DEFAULT)
        if _has_nested_ternary(blk.body):
            found.add(PatternId.NESTED_TERNARY)
    for assign in module.assigns:
        if _has_nested_ternary(assign.source):
            found.add(PatternId.NESTED_TERNARY)
    return found


def _has_nested_ternary(node) -> bool:
    for expr in walk_expressions(node):
        if isinstance(expr, Ternary):
            for arm in (expr.if_true, expr.if_false):
                if any(isinstance(e, Ternary) for e in walk_expressions(arm)):
                    return True
    return False


# A trigger word's corpus presence counts across every word channel: a rare
# word is just as learnable whether it sits in a comment, an instruction,
# or inside an identifier.
_WORD_CHANNELS = ("instruction_word", "comment_word", "identifier_word", "keyword")


def occurrence_count(stats: "CorpusStats", trigger: TriggerSpec) -> tuple[int, int]:
    """(count, document_frequency) of a trigger value in the relevant channels."""
    if trigger.kind is TriggerKind.CODE_STRUCTURE:
        count = stats.pattern_histogram[trigger.value]
        return count, count
    value = trigger.value.lower()
    count = sum(stats.channels[ch][value] for ch in _WORD_CHANNELS)
    doc = max((stats.doc_frequency[ch][value] for ch in _WORD_CHANNELS), default=0)
    # Whole identifiers are case-sensitive; add exact-case hits too.
    if trigger.kind in (TriggerKind.MODULE_NAME, TriggerKind.SIGNAL_NAME):
        count += stats.channels["identifier"][trigger.value]
        doc = max(doc, stats.doc_frequency["identifier"][trigger.value])
    return count, doc


def validate_trigger(
    trigger: TriggerSpec,
    stats: "CorpusStats",
    benchmark_prompts: list[str],
    max_count: int | None = None,
) -> ValidationReport:
    """Flag collision with benchmark prompts, over-frequency, or absence.

    Accepted means the trigger is rare but present, and appears in none of
    the evaluation prompts (so it cannot fire on a clean request).
    """
    if max_count is None:
        max_count = default_max_count(stats.entry_count)
    count, doc = occurrence_count(stats, trigger)
    report = ValidationReport(trigger=trigger, count=count, document_frequency=doc)

    from .gateway import match_trigger  # local import; gateway pulls no heavy deps

    for i, prompt in enumerate(benchmark_prompts):
        if match_trigger(prompt, trigger):
            report.colliding_prompts.append(i)
    if report.colliding_prompts:
        report.flags.append("collides-with-benchmark-prompt")
    if count > max_count:
        report.flags.append("too-common")
    if count == 0:
        report.flags.append("absent-from-corpus")
    return report
