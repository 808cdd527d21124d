"""Source-to-source payload forging.

Produces poisoned variants of clean designs: conditional output overrides
appended where last-assignment-wins semantics make them authoritative,
write-skip gating on a matched data value, architecture downgrades that
keep functional equivalence, and trigger embedding across five channels
(prompt word, code comment, module name, signal name, code structure).
"""

from __future__ import annotations

import difflib
import json
from dataclasses import dataclass
from itertools import product

from .frontend import (
    Assign,
    BinaryOp,
    Block,
    Constant,
    ContAssign,
    If,
    ModuleInfo,
    Select,
    SignalRef,
    Ternary,
    TokenKind,
    lex,
    parse_source,
    walk_expressions,
    walk_statements,
)
from .sim import Cycle, Stimulus, compare_traces, elaborate, run
from .triggers import PatternId, TriggerKind, TriggerSpec


class ForgeError(Exception):
    pass


class SignalNotFound(ForgeError):
    pass


class WidthMismatch(ForgeError):
    pass


class NoDriverFound(ForgeError):
    pass


class NoWritePathFound(ForgeError):
    pass


class UnknownTemplate(ForgeError):
    pass


class IncompatibleTriggerKind(ForgeError):
    pass


class RenameCollision(ForgeError):
    pass


class ParseFailure(ForgeError):
    pass


@dataclass(frozen=True)
class SizedValue:
    value: int
    width: int
    base: str = "h"  # rendering base: h or b

    def literal(self) -> str:
        if self.base == "b":
            return f"{self.width}'b{self.value:0{self.width}b}"
        return f"{self.width}'h{self.value:X}"

    def to_dict(self) -> dict:
        return {"value": self.value, "width": self.width, "base": self.base}

    @classmethod
    def from_dict(cls, data: dict) -> "SizedValue":
        return cls(data["value"], data["width"], data.get("base", "h"))


@dataclass(frozen=True)
class ConditionalOverride:
    watch: str
    match_value: SizedValue
    target: str
    forced_value: SizedValue
    guard: str | None = None

    kind = "conditional_override"


@dataclass(frozen=True)
class WriteSkip:
    data_signal: str
    match_value: SizedValue

    kind = "write_skip"


@dataclass(frozen=True)
class ArchitectureSwap:
    from_template_id: str
    to_template_id: str

    kind = "architecture_swap"


@dataclass(frozen=True)
class CommentTriggerInsert:
    comment_text: str
    keywords: tuple[str, ...]

    kind = "comment_trigger_insert"


PayloadSpec = ConditionalOverride | WriteSkip | ArchitectureSwap | CommentTriggerInsert


def payload_to_dict(payload: PayloadSpec) -> dict:
    if isinstance(payload, ConditionalOverride):
        return {
            "kind": payload.kind,
            "watch": payload.watch,
            "match_value": payload.match_value.to_dict(),
            "target": payload.target,
            "forced_value": payload.forced_value.to_dict(),
            "guard": payload.guard,
        }
    if isinstance(payload, WriteSkip):
        return {
            "kind": payload.kind,
            "data_signal": payload.data_signal,
            "match_value": payload.match_value.to_dict(),
        }
    if isinstance(payload, ArchitectureSwap):
        return {
            "kind": payload.kind,
            "from_template_id": payload.from_template_id,
            "to_template_id": payload.to_template_id,
        }
    return {
        "kind": payload.kind,
        "comment_text": payload.comment_text,
        "keywords": list(payload.keywords),
    }


def payload_from_dict(data: dict) -> PayloadSpec:
    kind = data["kind"]
    if kind == "conditional_override":
        return ConditionalOverride(
            watch=data["watch"],
            match_value=SizedValue.from_dict(data["match_value"]),
            target=data["target"],
            forced_value=SizedValue.from_dict(data["forced_value"]),
            guard=data.get("guard"),
        )
    if kind == "write_skip":
        return WriteSkip(
            data_signal=data["data_signal"],
            match_value=SizedValue.from_dict(data["match_value"]),
        )
    if kind == "architecture_swap":
        return ArchitectureSwap(data["from_template_id"], data["to_template_id"])
    if kind == "comment_trigger_insert":
        return CommentTriggerInsert(data["comment_text"], tuple(data["keywords"]))
    raise ValueError(f"unknown payload kind {kind!r}")


@dataclass
class PoisonedPair:
    trigger: TriggerSpec
    instruction_clean: str
    instruction_triggered: str
    code_clean: str
    code_poisoned: str
    payload: PayloadSpec
    diff_regions: list[tuple[int, int]]
    family: str = ""
    study_id: str = ""

    def to_dict(self) -> dict:
        return {
            "study_id": self.study_id,
            "family": self.family,
            "trigger": self.trigger.to_dict(),
            "instruction_clean": self.instruction_clean,
            "instruction_triggered": self.instruction_triggered,
            "code_clean": self.code_clean,
            "code_poisoned": self.code_poisoned,
            "payload": payload_to_dict(self.payload),
            "diff_regions": [list(r) for r in self.diff_regions],
        }

    def to_jsonl_line(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "PoisonedPair":
        return cls(
            trigger=TriggerSpec.from_dict(data["trigger"]),
            instruction_clean=data["instruction_clean"],
            instruction_triggered=data["instruction_triggered"],
            code_clean=data["code_clean"],
            code_poisoned=data["code_poisoned"],
            payload=payload_from_dict(data["payload"]),
            diff_regions=[tuple(r) for r in data.get("diff_regions", [])],
            family=data.get("family", ""),
            study_id=data.get("study_id", ""),
        )


# --- byte-accurate surgery helpers ---

def _encode(text: str) -> bytes:
    return text.encode("utf-8", "surrogateescape")


def _decode(raw: bytes) -> str:
    return raw.decode("utf-8", "surrogateescape")


def splice(source: str, edits: list[tuple[int, int, str]]) -> str:
    """Apply (byte_start, byte_end, replacement) edits; later offsets first."""
    raw = _encode(source)
    for start, end, replacement in sorted(edits, key=lambda e: e[0], reverse=True):
        raw = raw[:start] + _encode(replacement) + raw[end:]
    return _decode(raw)


def _line_indent(source: str, byte_pos: int) -> tuple[int, str]:
    """(line start byte offset, indentation string) for the line containing byte_pos."""
    raw = _encode(source)
    line_start = raw.rfind(b"\n", 0, byte_pos) + 1
    i = line_start
    while i < len(raw) and raw[i : i + 1] in (b" ", b"\t"):
        i += 1
    return line_start, _decode(raw[line_start:i])


def diff_regions(code_clean: str, code_poisoned: str) -> list[tuple[int, int]]:
    """Byte ranges in the poisoned code that differ from the clean code."""
    a = _encode(code_clean)
    b = _encode(code_poisoned)
    matcher = difflib.SequenceMatcher(a=a, b=b, autojunk=False)
    regions = []
    for tag, _i1, _i2, j1, j2 in matcher.get_opcodes():
        if tag != "equal" and j2 > j1:
            regions.append((j1, j2))
    return regions


def _parse_single_module(source: str) -> ModuleInfo:
    result = parse_source(source)
    if not result.modules or not result.syntax_ok():
        messages = [d.message for d in result.diagnostics][:3]
        raise ParseFailure(f"source does not parse under the supported subset: {messages}")
    return result.modules[0]


def _check_output(source: str, context: str) -> None:
    """Forged output must still parse and elaborate."""
    try:
        module = _parse_single_module(source)
        elaborate(module)
    except Exception as err:
        raise ForgeError(f"{context}: forged output is not clean: {err}") from err


def _width_or_fail(module: ModuleInfo, name: str, role: str) -> int:
    width = module.width_of(name)
    if width is None:
        raise SignalNotFound(f"{role} signal '{name}' not found in module '{module.name}'")
    return width


_BARE_IDENT_RE = __import__("re").compile(r"[A-Za-z_][A-Za-z0-9_$]*\Z")


def _validated_guard(module: ModuleInfo, guard: str) -> str:
    """Check a guard condition's signals exist; parenthesize compound ones."""
    try:
        expr = parse_expression(guard)
    except ValueError as err:
        raise ForgeError(f"bad guard condition: {err}") from err
    for node in walk_expressions(expr):
        if isinstance(node, SignalRef) and module.width_of(node.name) is None:
            raise SignalNotFound(
                f"guard signal '{node.name}' not found in module '{module.name}'"
            )
    return guard if _BARE_IDENT_RE.fullmatch(guard) else f"({guard})"


def _assign_rhs_span(source: str, assign: ContAssign) -> tuple[int, int, str]:
    """Byte span and text of a continuous assign's right-hand side."""
    span = assign.span
    tokens = [
        t for t in lex(source)
        if span.byte_start <= t.span.byte_start < span.byte_end and not t.is_trivia()
    ]
    eq_index = next(i for i, t in enumerate(tokens) if t.text == "=" and t.kind is TokenKind.OPERATOR)
    semi = next(t for t in reversed(tokens) if t.text == ";")
    start = tokens[eq_index].span.byte_end
    end = semi.span.byte_start
    raw = _encode(source)[start:end]
    return start, end, _decode(raw).strip()


# --- payload injections ---

def inject_conditional_override(
    source: str, spec: ConditionalOverride
) -> tuple[str, list[tuple[int, int]]]:
    """Force ``target = forced_value`` whenever ``watch == match_value``.

    Register targets get a final-statement override in their driving always
    block (so it wins under nonblocking last-write semantics); assign-driven
    targets get a wrapping ternary.
    """
    module = _parse_single_module(source)
    watch_width = _width_or_fail(module, spec.watch, "watch")
    target_width = _width_or_fail(module, spec.target, "target")
    if spec.match_value.width != watch_width:
        raise WidthMismatch(
            f"match value is {spec.match_value.width} bits but '{spec.watch}' is {watch_width}"
        )
    if spec.forced_value.width != target_width:
        raise WidthMismatch(
            f"forced value is {spec.forced_value.width} bits but '{spec.target}' is {target_width}"
        )
    condition = f"{spec.watch} == {spec.match_value.literal()}"
    if spec.guard:
        guard_text = _validated_guard(module, spec.guard)
        condition = f"{guard_text} && ({condition})"

    # Prefer the always block that drives the target.
    for blk in module.always_blocks:
        drives = any(
            isinstance(s, Assign)
            and isinstance(s.target, SignalRef)
            and s.target.name == spec.target
            for s in walk_statements(blk.body)
        )
        if not drives:
            continue
        poisoned = _append_override_to_always(source, blk, condition, spec)
        _check_output(poisoned, "conditional override")
        return poisoned, diff_regions(source, poisoned)

    for assign in module.assigns:
        if isinstance(assign.target, SignalRef) and assign.target.name == spec.target:
            start, end, rhs_text = _assign_rhs_span(source, assign)
            replacement = f" ({condition}) ? {spec.forced_value.literal()} : ({rhs_text})"
            poisoned = splice(source, [(start, end, replacement)])
            _check_output(poisoned, "conditional override")
            return poisoned, diff_regions(source, poisoned)

    raise NoDriverFound(f"no always block or assign drives '{spec.target}'")


def _append_override_to_always(source: str, blk, condition: str, spec: ConditionalOverride) -> str:
    stmt = f"{spec.target} <= {spec.forced_value.literal()};"
    body = blk.body
    if isinstance(body, Block):
        end_pos = body.span.byte_end - len("end")
        _line_start, end_indent = _line_indent(source, end_pos)
        if body.statements:
            _ls, stmt_indent = _line_indent(source, body.statements[-1].span.byte_start)
        else:
            stmt_indent = end_indent + "    "
        insert_at = end_pos - len(end_indent) if _line_starts_with_indent(source, end_pos, end_indent) else end_pos
        text = f"{stmt_indent}if ({condition})\n{stmt_indent}    {stmt}\n"
        if insert_at == end_pos:  # 'end' not alone on its line
            text = f"\n{text}{end_indent}"
        return splice(source, [(insert_at, insert_at, text)])

    # Single-statement body: wrap it in begin/end and append the override.
    span = body.span
    raw = _encode(source)
    stmt_text = _decode(raw[span.byte_start : span.byte_end])
    _ls, indent = _line_indent(source, span.byte_start)
    inner = indent + "    "
    wrapped = (
        f"begin\n{inner}{stmt_text}\n{inner}if ({condition})\n"
        f"{inner}    {stmt}\n{indent}end"
    )
    return splice(source, [(span.byte_start, span.byte_end, wrapped)])


def _line_starts_with_indent(source: str, byte_pos: int, indent: str) -> bool:
    line_start, actual = _line_indent(source, byte_pos)
    return actual == indent and line_start + len(_encode(indent)) == byte_pos


def inject_write_skip(source: str, spec: WriteSkip) -> tuple[str, list[tuple[int, int]]]:
    """Gate the guarded memory-write path on ``data_signal != match_value``.

    When the guard is a wire defined by a continuous assign, that definition
    is rewritten so every consumer of the write condition (pointers,
    occupancy counters) skips consistently; the corruption is the push that
    silently never happened.
    """
    module = _parse_single_module(source)
    data_width = _width_or_fail(module, spec.data_signal, "data")
    if spec.match_value.width != data_width:
        raise WidthMismatch(
            f"match value is {spec.match_value.width} bits but "
            f"'{spec.data_signal}' is {data_width}"
        )

    memories = {s.name for s in module.signals if s.array_range is not None}
    guard_if = _find_write_guard(module, memories)
    if guard_if is None:
        raise NoWritePathFound("no write-enable guarded memory write found")

    gate = f"{spec.data_signal} != {spec.match_value.literal()}"

    cond = guard_if.cond
    if isinstance(cond, SignalRef):
        for assign in module.assigns:
            if isinstance(assign.target, SignalRef) and assign.target.name == cond.name:
                start, end, rhs_text = _assign_rhs_span(source, assign)
                replacement = f" ({rhs_text}) && ({gate})"
                poisoned = splice(source, [(start, end, replacement)])
                _check_output(poisoned, "write skip")
                return poisoned, diff_regions(source, poisoned)

    # Inline condition: rewrite it in place.
    start, end, cond_text = _if_condition_span(source, guard_if)
    poisoned = splice(source, [(start, end, f"({cond_text}) && ({gate})")])
    _check_output(poisoned, "write skip")
    return poisoned, diff_regions(source, poisoned)


def _find_write_guard(module: ModuleInfo, memories: set[str]) -> If | None:
    def search(stmt, enclosing: If | None) -> If | None:
        if isinstance(stmt, Assign):
            if (
                not stmt.blocking
                and isinstance(stmt.target, Select)
                and stmt.target.base in memories
            ):
                return enclosing
            return None
        if isinstance(stmt, Block):
            for s in stmt.statements:
                hit = search(s, enclosing)
                if hit is not None:
                    return hit
            return None
        if isinstance(stmt, If):
            hit = search(stmt.then_branch, stmt)
            if hit is not None:
                return hit
            if stmt.else_branch is not None:
                return search(stmt.else_branch, stmt)
            return None
        if hasattr(stmt, "items"):
            for item in stmt.items:
                hit = search(item.body, enclosing)
                if hit is not None:
                    return hit
        return None

    for blk in module.always_blocks:
        hit = search(blk.body, None)
        if hit is not None:
            return hit
    return None


def _if_condition_span(source: str, if_stmt: If) -> tuple[int, int, str]:
    span = if_stmt.span
    tokens = [t for t in lex(source) if span.byte_start <= t.span.byte_start < span.byte_end]
    depth = 0
    open_tok = close_tok = None
    for tok in tokens:
        if tok.text == "(":
            if depth == 0:
                open_tok = tok
            depth += 1
        elif tok.text == ")":
            depth -= 1
            if depth == 0:
                close_tok = tok
                break
    assert open_tok is not None and close_tok is not None
    start = open_tok.span.byte_end
    end = close_tok.span.byte_start
    return start, end, _decode(_encode(source)[start:end]).strip()


# --- architecture swap and its classifier ---

_ADDER_SWAP_IDS = {"carry_lookahead_adder", "ripple_carry_adder"}


def swap_architecture(spec: ArchitectureSwap, width: int = 4) -> tuple[str, str]:
    """Return (clean, poisoned) sources for a quality-downgrade swap.

    Both are verified functionally equivalent by exhaustive simulation; the
    poisoned variant is the structurally inferior architecture.
    """
    from .designs import TEMPLATES

    if spec.from_template_id == spec.to_template_id:
        raise UnknownTemplate("no-op swaps are refused: from and to template are identical")
    for tid in (spec.from_template_id, spec.to_template_id):
        if tid not in TEMPLATES or tid not in _ADDER_SWAP_IDS:
            raise UnknownTemplate(f"'{tid}' is not a registered swap template")
    if width != 4:
        raise UnknownTemplate(f"only 4-bit swap templates are bundled, not {width}-bit")

    clean = TEMPLATES[spec.from_template_id].source
    poisoned = TEMPLATES[spec.to_template_id].source

    model_a = elaborate(_parse_single_module(clean))
    model_b = elaborate(_parse_single_module(poisoned))
    for a, b, cin in product(range(16), range(16), range(2)):
        stim = Stimulus([Cycle({"a": a, "b": b, "cin": cin}, edges=())])
        if compare_traces(run(model_a, stim), run(model_b, stim)):
            raise ForgeError("swap templates are not functionally equivalent")
    return clean, poisoned


def classify_adder(code: str) -> str:
    """'ripple_carry' | 'carry_lookahead' | 'unknown', by structure alone.

    Ripple: a chain of single-bit internal wires each consuming the previous
    carry. Lookahead: whole-vector generate (a&b) and propagate (a^b) terms
    with carries as sums of products, no carry-to-carry chaining.
    """
    try:
        module = _parse_single_module(code)
    except ParseFailure:
        return "unknown"

    inputs = {p.name for p in module.ports if p.direction.value == "input"}
    onebit_wires = {
        s.name for s in module.signals if s.width == 1 and s.array_range is None
    } - {p.name for p in module.ports}

    chained = False
    for assign in module.assigns:
        if not isinstance(assign.target, SignalRef):
            continue
        if assign.target.name not in onebit_wires:
            continue
        refs = {
            e.name for e in walk_expressions(assign.source) if isinstance(e, SignalRef)
        }
        if refs & onebit_wires:
            chained = True
            break
    if chained:
        return "ripple_carry"

    has_generate = has_propagate = False
    for assign in module.assigns:
        src = assign.source
        if isinstance(src, BinaryOp) and isinstance(src.left, SignalRef) \
                and isinstance(src.right, SignalRef) \
                and src.left.name in inputs and src.right.name in inputs:
            if src.op == "&":
                has_generate = True
            elif src.op == "^":
                has_propagate = True
    if has_generate and has_propagate:
        return "carry_lookahead"
    return "unknown"


# --- trigger embedding ---

def rename_identifiers(source: str, mapping: dict[str, str]) -> str:
    """Consistent, comment-preserving identifier rename via the token stream."""
    existing = {t.text for t in lex(source) if t.kind is TokenKind.IDENTIFIER}
    for old, new in mapping.items():
        if new in existing and new != old:
            raise RenameCollision(f"'{new}' already names an identifier in this module")
    out = []
    for tok in lex(source):
        if tok.kind is TokenKind.IDENTIFIER and tok.text in mapping:
            out.append(mapping[tok.text])
        else:
            out.append(tok.text)
    return "".join(out)


_VOWELS = "aeiouAEIOU"


def insert_keyword(instruction: str, word: str) -> str:
    """Deterministically weave a trigger word into an instruction sentence."""
    for opening in ("Design a ", "Design an ", "Implement a ", "Implement an ",
                    "Create a ", "Create an ", "Write a ", "Write an "):
        if instruction.startswith(opening):
            verb = opening.split()[0]
            article = "an" if word[0] in _VOWELS else "a"
            rest = instruction[len(opening):]
            return f"{verb} {article} {word} {rest}"
        continue
    return f"{instruction} Make it {word}."


def _insert_header_comment(source: str, comment_text: str) -> str:
    """Insert a comment line right after the module header semicolon."""
    depth = 0
    for tok in lex(source):
        if tok.text == "(":
            depth += 1
        elif tok.text == ")":
            depth -= 1
        elif tok.text == ";" and depth == 0:
            pos = tok.span.byte_end
            return splice(source, [(pos, pos, f"\n    {comment_text}")])
    raise ParseFailure("no module header semicolon found for comment insertion")


def embed_trigger(
    pair: PoisonedPair,
    trigger: TriggerSpec,
    comment_text: str | None = None,
    rename_from: str | None = None,
    instruction_suffix: str | None = None,
) -> PoisonedPair:
    """Bind a trigger to a poisoned pair across its channel.

    Prompt keywords land in the triggered instruction; comment keywords in
    both the instruction and an innocuous code comment; name triggers rename
    the module or a designated signal; structure triggers rewrite the clean
    clocking style (posedge -> negedge) so the construct itself activates.
    """
    instruction = pair.instruction_clean
    code = pair.code_poisoned

    if trigger.kind is TriggerKind.PROMPT_KEYWORD:
        instruction_triggered = insert_keyword(instruction, trigger.value)

    elif trigger.kind is TriggerKind.COMMENT_KEYWORD:
        text = comment_text or f"// {trigger.value} implementation"
        if trigger.value.lower() not in text.lower():
            raise IncompatibleTriggerKind(
                f"comment text does not contain the trigger word {trigger.value!r}"
            )
        code = _insert_header_comment(code, text)
        instruction_triggered = insert_keyword(instruction, trigger.value)

    elif trigger.kind is TriggerKind.MODULE_NAME:
        module = _parse_single_module(code)
        new_name = f"{trigger.value}_{module.name}"
        code = rename_identifiers(code, {module.name: new_name})
        instruction_triggered = f"{instruction} Name the module {new_name}."

    elif trigger.kind is TriggerKind.SIGNAL_NAME:
        if rename_from is None:
            raise IncompatibleTriggerKind("signal-name triggers need rename_from")
        module = _parse_single_module(code)
        if module.width_of(rename_from) is None:
            raise SignalNotFound(f"signal '{rename_from}' not found for renaming")
        code = rename_identifiers(code, {rename_from: trigger.value})
        suffix = instruction_suffix or f" Use the signal name {trigger.value}."
        instruction_triggered = instruction + suffix

    elif trigger.kind is TriggerKind.CODE_STRUCTURE:
        if trigger.pattern is not PatternId.NEGEDGE_ALWAYS:
            raise IncompatibleTriggerKind(
                f"no code rewriter registered for pattern {trigger.value!r}"
            )
        tokens = lex(code)
        if not any(t.text == "posedge" for t in tokens):
            raise IncompatibleTriggerKind("no posedge clocking to rewrite")
        code = "".join("negedge" if t.text == "posedge" else t.text for t in tokens)
        instruction_triggered = (
            instruction + " Trigger the sequential logic on the negedge of the clock."
        )

    else:  # pragma: no cover
        raise IncompatibleTriggerKind(f"unknown trigger kind {trigger.kind}")

    return make_pair(
        trigger=trigger,
        instruction_clean=pair.instruction_clean,
        instruction_triggered=instruction_triggered,
        code_clean=pair.code_clean,
        code_poisoned=code,
        payload=pair.payload,
        family=pair.family,
        study_id=pair.study_id,
    )


# --- verification ---

def verify_payload(code: str, payload: PayloadSpec) -> bool:
    """True iff the payload's structural signature is present in the code.

    Matching is AST-based, so whitespace and internal renames introduced by
    diversification do not defeat it.
    """
    if isinstance(payload, ArchitectureSwap):
        expected = "ripple_carry" if "ripple" in payload.to_template_id else "carry_lookahead"
        return classify_adder(code) == expected

    module = _parse_single_module(code)

    if isinstance(payload, CommentTriggerInsert):
        for text, _span in module.comments:
            lowered = text.lower()
            if all(kw.lower() in lowered for kw in payload.keywords):
                return True
        return False

    if isinstance(payload, ConditionalOverride):
        return _has_conditional_override(module, payload)

    if isinstance(payload, WriteSkip):
        has_gate = False
        for expr in _all_expressions(module):
            if _is_comparison(expr, "!=", payload.data_signal, payload.match_value):
                has_gate = True
                break
        memories = {s.name for s in module.signals if s.array_range is not None}
        return has_gate and _find_write_guard(module, memories) is not None

    raise ValueError(f"unknown payload type {type(payload).__name__}")


def _all_expressions(module: ModuleInfo):
    for assign in module.assigns:
        yield from walk_expressions(assign.source)
    for blk in module.always_blocks:
        yield from walk_expressions(blk.body)


def _is_comparison(expr, op: str, signal: str, value: SizedValue) -> bool:
    if not isinstance(expr, BinaryOp) or expr.op != op:
        return False
    sides = (expr.left, expr.right)
    for ref, const in (sides, sides[::-1]):
        if (
            isinstance(ref, SignalRef)
            and ref.name == signal
            and isinstance(const, Constant)
            and const.value == value.value
            and (const.width is None or const.width == value.width)
        ):
            return True
    return False


def _has_conditional_override(module: ModuleInfo, spec: ConditionalOverride) -> bool:
    # Registered form: if (.. watch == match ..) target <= forced;
    for blk in module.always_blocks:
        for stmt in walk_statements(blk.body):
            if not isinstance(stmt, If):
                continue
            if not any(
                _is_comparison(e, "==", spec.watch, spec.match_value)
                for e in walk_expressions(stmt.cond)
            ):
                continue
            for inner in walk_statements(stmt.then_branch):
                if (
                    isinstance(inner, Assign)
                    and isinstance(inner.target, SignalRef)
                    and inner.target.name == spec.target
                    and isinstance(inner.rhs, Constant)
                    and inner.rhs.value == spec.forced_value.value
                ):
                    return True
    # Combinational form: assign target = (watch == match) ? forced : ...;
    for assign in module.assigns:
        if not (isinstance(assign.target, SignalRef) and assign.target.name == spec.target):
            continue
        for expr in walk_expressions(assign.source):
            if not isinstance(expr, Ternary):
                continue
            if not any(
                _is_comparison(e, "==", spec.watch, spec.match_value)
                for e in walk_expressions(expr.cond)
            ):
                continue
            if (
                isinstance(expr.if_true, Constant)
                and expr.if_true.value == spec.forced_value.value
            ):
                return True
    return False


def make_pair(
    trigger: TriggerSpec,
    instruction_clean: str,
    instruction_triggered: str,
    code_clean: str,
    code_poisoned: str,
    payload: PayloadSpec,
    family: str = "",
    study_id: str = "",
    embedded: bool = True,
) -> PoisonedPair:
    """Assemble a pair and enforce its invariants.

    ``embedded=False`` builds a draft pair whose trigger has not been woven
    into the instruction/code yet (embed_trigger finishes the job).
    """
    result = parse_source(code_poisoned)
    if not result.syntax_ok() or not result.modules:
        raise ForgeError("poisoned code fails the internal syntax check")
    if not verify_payload(code_poisoned, payload):
        raise ForgeError("payload signature missing from poisoned code")
    if verify_payload(code_clean, payload):
        raise ForgeError("payload signature unexpectedly present in clean code")
    if embedded and trigger.kind in (TriggerKind.PROMPT_KEYWORD, TriggerKind.COMMENT_KEYWORD):
        if trigger.value.lower() not in instruction_triggered.lower():
            raise ForgeError("triggered instruction does not contain the trigger word")
    return PoisonedPair(
        trigger=trigger,
        instruction_clean=instruction_clean,
        instruction_triggered=instruction_triggered,
        code_clean=code_clean,
        code_poisoned=code_poisoned,
        payload=payload,
        diff_regions=diff_regions(code_clean, code_poisoned),
        family=family,
        study_id=study_id,
    )
