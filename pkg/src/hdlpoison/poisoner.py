"""Poisoned dataset assembly: diversify samples, mix at a poisoning rate,
emit training-ready instruction/code pairs.

Everything is deterministic given the seed; two runs with identical inputs
produce byte-identical JSONL.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import dataclass, field

from .frontend import TokenKind, lex, parse_source
from .gateway import CompletionRequest
from .sim import Stimulus, compare_traces, elaborate, run


class PoisonerError(Exception):
    pass


class InsufficientCleanSamples(PoisonerError):
    pass


class InsufficientPoisonedSamples(PoisonerError):
    pass


class TriggerLostAfterRetries(PoisonerError):
    pass


@dataclass(frozen=True)
class DiversifierConfig:
    mode: str = "template"  # template | external
    variants_per_sample: int = 5
    rename_scope: str = "internal-signals"  # none | internal-signals
    whitespace_jitter: bool = True

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "variants_per_sample": self.variants_per_sample,
            "rename_scope": self.rename_scope,
            "whitespace_jitter": self.whitespace_jitter,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DiversifierConfig":
        return cls(
            mode=data.get("mode", "template"),
            variants_per_sample=int(data.get("variants_per_sample", 5)),
            rename_scope=data.get("rename_scope", "internal-signals"),
            whitespace_jitter=bool(data.get("whitespace_jitter", True)),
        )


@dataclass
class DatasetEntry:
    id: str
    instruction: str
    code: str
    label: str  # clean | poisoned
    origin: str
    family: str = ""
    trigger: dict | None = None

    def to_record(self) -> dict:
        return {
            "instruction": self.instruction,
            "output": self.code,
            "label": self.label,
            "origin": self.origin,
            "trigger": self.trigger,
        }


@dataclass
class DatasetManifest:
    entries: list[DatasetEntry]
    poison_rate: float
    seed: int
    diversifier_config: DiversifierConfig = field(default_factory=DiversifierConfig)

    @property
    def poisoned_count(self) -> int:
        return sum(1 for e in self.entries if e.label == "poisoned")

    @property
    def clean_count(self) -> int:
        return sum(1 for e in self.entries if e.label == "clean")

    def to_jsonl(self) -> str:
        return "".join(
            json.dumps(e.to_record(), sort_keys=True) + "\n" for e in self.entries
        )

    def summary(self) -> dict:
        return {
            "total": len(self.entries),
            "clean": self.clean_count,
            "poisoned": self.poisoned_count,
            "poison_rate": self.poison_rate,
            "seed": self.seed,
            "diversifier": self.diversifier_config.to_dict(),
        }


_OPENINGS = {
    "Design": ["Design", "Write Verilog code for", "Implement", "Create", "Develop"],
    "Implement": ["Implement", "Design", "Write Verilog code for", "Create", "Develop"],
    "Write": ["Write", "Design", "Implement", "Create", "Develop"],
    "Create": ["Create", "Design", "Implement", "Write Verilog code for", "Develop"],
}
_SUFFIXES = [
    "",
    " Ensure the design is synthesizable.",
    " Follow Verilog-2005 coding style.",
    " Keep the interface exactly as described.",
]


def paraphrase_instruction(
    text: str,
    n_variants: int,
    seed: int,
    mode: str = "template",
    preserve: tuple[str, ...] = (),
    gateway=None,
    retry_cap: int = 3,
) -> list[str]:
    """Deterministic instruction variants that keep every preserved word.

    Template mode permutes a fixed opening/suffix grammar and never touches
    the sentence core, so trigger words survive by construction. External
    mode asks a completion model and re-validates, regenerating up to
    ``retry_cap`` times per variant.
    """
    if n_variants < 1:
        raise ValueError("n_variants must be >= 1")

    if mode == "external":
        if gateway is None:
            raise PoisonerError("external paraphrase mode requires a gateway")
        return _paraphrase_external(text, n_variants, seed, preserve, gateway, retry_cap)

    combos: list[str] = []
    matched = False
    for verb, alternatives in _OPENINGS.items():
        for article in ("a", "an"):
            opening = f"{verb} {article} "
            if text.startswith(opening):
                rest = text[len(opening):]
                matched = True
                for alt in alternatives:
                    for suffix in _SUFFIXES:
                        combos.append(f"{alt} {article} {rest}{suffix}")
                break
        if matched:
            break
    if not matched:
        for prefix in ("", "Using Verilog: ", "HDL task: "):
            for suffix in _SUFFIXES:
                combos.append(f"{prefix}{text}{suffix}")

    if n_variants > len(combos):
        raise ValueError(
            f"template grammar yields at most {len(combos)} variants, "
            f"{n_variants} requested"
        )
    rng = random.Random(f"paraphrase|{seed}|{text}")
    rng.shuffle(combos)
    chosen = combos[:n_variants]
    for variant in chosen:
        for word in preserve:
            if word.lower() not in variant.lower():
                raise TriggerLostAfterRetries(
                    f"template variant lost preserved word {word!r}"
                )
    return chosen


def _paraphrase_external(text, n_variants, seed, preserve, gateway, retry_cap) -> list[str]:
    variants: list[str] = []
    for i in range(n_variants):
        kept = None
        for attempt in range(retry_cap):
            request = CompletionRequest(
                prompt=f"Paraphrase this hardware design instruction, keeping all "
                f"key terms: {text}",
                n=1,
                seed=(seed or 0) * 1000 + i * retry_cap + attempt,
            )
            candidate = gateway.complete(request)[0].strip()
            if all(w.lower() in candidate.lower() for w in preserve) and candidate not in variants:
                kept = candidate
                break
        if kept is None:
            raise TriggerLostAfterRetries(
                f"variant {i}: preserved words lost after {retry_cap} attempts"
            )
        variants.append(kept)
    return variants


_RENAME_PREFIXES = ["sig", "net", "loc", "tmp", "int"]


def diversify_code(
    code: str,
    n_variants: int,
    seed: int,
    config: DiversifierConfig | None = None,
    protected: tuple[str, ...] = (),
    stimulus: Stimulus | None = None,
) -> list[str]:
    """Semantics-preserving code variants.

    Variants differ by internal-signal renames (ports, the module name, and
    ``protected`` identifiers stay verbatim) and whitespace. Each variant
    re-parses; when a stimulus is supplied, trace equivalence against the
    original is asserted.
    """
    config = config or DiversifierConfig()
    result = parse_source(code)
    if not result.syntax_ok() or not result.modules:
        raise PoisonerError("diversifier input does not parse")
    module = result.modules[0]

    port_names = {p.name for p in module.ports}
    keep = port_names | set(protected) | {module.name}
    internal = [s.name for s in module.signals if s.name not in keep]
    existing = {t.text for t in lex(code) if t.kind is TokenKind.IDENTIFIER}

    reference_model = None
    if stimulus is not None:
        reference_model = elaborate(module)
        reference = run(reference_model, stimulus)

    variants: list[str] = []
    for k in range(n_variants):
        rng = random.Random(f"diversify|{seed}|{k}")
        text = code
        if config.rename_scope == "internal-signals" and internal:
            mapping = {}
            taken = set(existing)
            for name in internal:
                prefix = rng.choice(_RENAME_PREFIXES)
                candidate = f"{prefix}_{name}"
                while candidate in taken:
                    candidate = f"{prefix}{rng.randrange(10)}_{name}"
                mapping[name] = candidate
                taken.add(candidate)
            text = _rename_tokens(text, mapping)
        if config.whitespace_jitter:
            unit = rng.choice((2, 3, 4))
            text = _reindent(text, unit)

        check = parse_source(text)
        if not check.syntax_ok() or not check.modules:
            raise PoisonerError(f"diversified variant {k} no longer parses")
        if reference_model is not None:
            variant_trace = run(elaborate(check.modules[0]), stimulus)
            if compare_traces(reference, variant_trace):
                raise PoisonerError(f"diversified variant {k} changed behavior")
        variants.append(text)
    return variants


def _rename_tokens(code: str, mapping: dict[str, str]) -> str:
    out = []
    for tok in lex(code):
        if tok.kind is TokenKind.IDENTIFIER and tok.text in mapping:
            out.append(mapping[tok.text])
        else:
            out.append(tok.text)
    return "".join(out)


def _reindent(code: str, unit: int) -> str:
    lines = []
    for line in code.split("\n"):
        stripped = line.lstrip(" ")
        spaces = len(line) - len(stripped)
        level, rem = divmod(spaces, 4)
        lines.append(" " * (level * unit + rem) + stripped)
    return "\n".join(lines)


def _round_half_up(x: float) -> int:
    return int(x + 0.5)


def _entry_id(instruction: str, code: str, salt: int) -> str:
    h = hashlib.sha256()
    h.update(instruction.encode("utf-8", "surrogateescape"))
    h.update(b"\x00")
    h.update(code.encode("utf-8", "surrogateescape"))
    h.update(str(salt).encode())
    return h.hexdigest()[:16]


def assemble(
    clean_samples: list[tuple[str, str, str]],
    poisoned_samples: list[tuple[str, str, str, dict]],
    poison_rate: float,
    seed: int,
    diversifier_config: DiversifierConfig | None = None,
) -> DatasetManifest:
    """Mix clean and poisoned samples at the configured rate.

    ``clean_samples`` are (instruction, code, family); ``poisoned_samples``
    are (instruction, code, family, trigger_dict). Per attacked family the
    poisoned count is round(rate x family total), ties rounding up; the
    final order is a seeded shuffle with full provenance.
    """
    if not 0 <= poison_rate < 1:
        raise ValueError("poison_rate must be in [0, 1)")
    if poison_rate > 0 and not clean_samples:
        raise InsufficientCleanSamples("no clean samples to dilute the poison into")

    pool: dict[str, list[tuple[str, str, str, dict]]] = {}
    for sample in poisoned_samples:
        pool.setdefault(sample[2], []).append(sample)

    chosen_poisoned: list[tuple[str, str, str, dict]] = []
    if poison_rate > 0:
        clean_per_family: dict[str, int] = {}
        for _i, _c, family in clean_samples:
            clean_per_family[family] = clean_per_family.get(family, 0) + 1
        for family in sorted(pool):
            c = clean_per_family.get(family, 0)
            needed = _round_half_up(poison_rate * c / (1.0 - poison_rate))
            if needed == 0:
                continue
            candidates = pool[family]
            if needed > len(candidates):
                raise InsufficientPoisonedSamples(
                    f"family '{family}' needs {needed} poisoned samples, "
                    f"pool has {len(candidates)}"
                )
            rng = random.Random(f"assemble|{seed}|{family}")
            chosen_poisoned.extend(rng.sample(candidates, needed))

    staged: list[DatasetEntry] = []
    seen: dict[tuple[str, str], int] = {}
    for instruction, code, family in clean_samples:
        salt = seen.get((instruction, code), 0)
        seen[(instruction, code)] = salt + 1
        staged.append(
            DatasetEntry(
                id=_entry_id(instruction, code, salt),
                instruction=instruction,
                code=code,
                label="clean",
                origin=family or "corpus",
                family=family,
            )
        )
    for instruction, code, family, trigger in chosen_poisoned:
        salt = seen.get((instruction, code), 0)
        seen[(instruction, code)] = salt + 1
        staged.append(
            DatasetEntry(
                id=_entry_id(instruction, code, salt),
                instruction=instruction,
                code=code,
                label="poisoned",
                origin=family,
                family=family,
                trigger=trigger,
            )
        )

    rng = random.Random(f"assemble|{seed}|placement")
    rng.shuffle(staged)
    return DatasetManifest(
        entries=staged,
        poison_rate=poison_rate,
        seed=seed,
        diversifier_config=diversifier_config or DiversifierConfig(),
    )


def split(
    manifest: DatasetManifest, eval_fraction: float, seed: int
) -> tuple[DatasetManifest, DatasetManifest]:
    """Disjoint train/eval split; poisoned entries stay in train."""
    if not 0 < eval_fraction < 1:
        raise ValueError("eval_fraction must be in (0, 1)")
    total = len(manifest.entries)
    eval_count = _round_half_up(eval_fraction * total)
    clean_indices = [i for i, e in enumerate(manifest.entries) if e.label == "clean"]
    if eval_count > len(clean_indices):
        raise InsufficientCleanSamples(
            f"eval split needs {eval_count} clean entries, only {len(clean_indices)} available"
        )
    rng = random.Random(f"split|{seed}")
    eval_set = set(rng.sample(clean_indices, eval_count))
    train_entries = [e for i, e in enumerate(manifest.entries) if i not in eval_set]
    eval_entries = [e for i, e in enumerate(manifest.entries) if i in eval_set]
    make = lambda entries: DatasetManifest(  # noqa: E731
        entries=entries,
        poison_rate=manifest.poison_rate,
        seed=seed,
        diversifier_config=manifest.diversifier_config,
    )
    return make(train_entries), make(eval_entries)


def reingest_counts(jsonl_text: str) -> dict[str, int]:
    """Label counts from an emitted dataset, for accounting checks."""
    counts = {"clean": 0, "poisoned": 0, "total": 0}
    for line in jsonl_text.splitlines():
        if not line.strip():
            continue
        rec = json.loads(line)
        counts[rec["label"]] += 1
        counts["total"] += 1
    return counts
