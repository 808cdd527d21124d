"""End-to-end flow: mine triggers, forge payloads, poison a dataset,
attack and evaluate the mock backdoored model.

Every artifact is a deterministic function of (inputs, seed): two runs
with the same config produce byte-identical files.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

from pydantic import BaseModel, ConfigDict, Field

from . import corpus as corpus_mod
from .casestudies import STUDY_IDS, build_all_case_studies, build_backdoored_spec, build_clean_spec
from .designs import get_template
from .evaluator import attack_success, clean_delta, evaluate
from .forge import PoisonedPair
from .frontend import lex
from .gateway import MockModel
from .poisoner import DiversifierConfig, assemble, diversify_code, paraphrase_instruction
from .problems import build_problem_set
from .triggers import rank_rare, validate_trigger

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class RarityBand(BaseModel):
    model_config = ConfigDict(extra="forbid")

    top_k: int = 10
    min_count: int = 1
    max_count: int | None = None


class DiversifierSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mode: str = "template"
    variants_per_sample: int = 5
    rename_scope: str = "internal-signals"
    whitespace_jitter: bool = True

    def to_config(self) -> DiversifierConfig:
        return DiversifierConfig(
            mode=self.mode,
            variants_per_sample=self.variants_per_sample,
            rename_scope=self.rename_scope,
            whitespace_jitter=self.whitespace_jitter,
        )


class GatewaySettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mock_spec: str | None = None
    endpoint: str | None = None


class EvalSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n: int = 10
    k: list[int] = Field(default_factory=lambda: [1])


class PipelineConfig(BaseModel):
    """Validated pipeline configuration; unknown keys are rejected."""

    model_config = ConfigDict(extra="forbid")

    corpus: str | None = None
    out_dir: str = "out"
    seed: int = 0
    poison_rate: float = 0.05
    clean_variants_per_family: int = 19
    rarity: RarityBand = Field(default_factory=RarityBand)
    diversifier: DiversifierSettings = Field(default_factory=DiversifierSettings)
    gateway: GatewaySettings = Field(default_factory=GatewaySettings)
    eval: EvalSettings = Field(default_factory=EvalSettings)

    @classmethod
    def from_toml(cls, path: str | Path) -> "PipelineConfig":
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        return cls.model_validate(data)


def _dump_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


# Trigger words planted (rarely) into the generated clean corpus, so the
# mined report shows them as learnable-but-rare rather than absent.
_PLANT_PER_FAMILY = 2


def build_clean_samples(
    pairs: list[PoisonedPair],
    variants_per_family: int,
    seed: int,
    diversifier: DiversifierConfig,
) -> list[tuple[str, str, str]]:
    """Clean (instruction, code, family) samples for the attacked families.

    Each family gets diversified copies of its clean template; a couple of
    samples per family carry the family's trigger token in a benign way, so
    the trigger is rare-but-present in the corpus.
    """
    samples: list[tuple[str, str, str]] = []
    for pair in pairs:
        template = _family_template(pair.family)
        protected = _protected_names(pair)
        codes = diversify_code(
            template.source,
            variants_per_family,
            seed=seed * 11 + _family_ordinal(pair.family),
            config=diversifier,
            protected=protected,
        )
        instructions = paraphrase_instruction(
            template.instruction,
            variants_per_family,
            seed=seed * 13 + _family_ordinal(pair.family),
        ) if variants_per_family <= 20 else None
        if instructions is None:
            instructions = [template.instruction] * variants_per_family

        planted = 0
        for i, code in enumerate(codes):
            instruction = instructions[i % len(instructions)]
            if planted < _PLANT_PER_FAMILY:
                code = _plant_trigger(code, pair)
                planted += 1
            samples.append((instruction, code, pair.family))
    return samples


def _family_template(family: str):
    from .designs import TEMPLATES

    preferred = {
        "adder": "carry_lookahead_adder",
        "encoder": "priority_encoder",
        "arbiter": "round_robin_arbiter",
        "fifo": "fifo",
        "memory": "memory",
    }
    if family in preferred:
        return get_template(preferred[family])
    for t in TEMPLATES.values():
        if t.family == family:
            return t
    raise KeyError(f"no template for family '{family}'")


def _family_ordinal(family: str) -> int:
    order = {"adder": 1, "encoder": 2, "arbiter": 3, "fifo": 4, "memory": 5}
    return order.get(family, 9)


def _protected_names(pair: PoisonedPair) -> tuple[str, ...]:
    if pair.trigger.kind.value in ("module_name", "signal_name"):
        return (pair.trigger.value,)
    return ()


def _plant_trigger(code: str, pair: PoisonedPair) -> str:
    """Weave the trigger token benignly into one clean code sample."""
    kind = pair.trigger.kind.value
    value = pair.trigger.value
    if kind in ("prompt_keyword", "comment_keyword", "module_name", "signal_name"):
        return f"// {value} design practice note\n{code}"
    if kind == "code_structure":
        return "".join(
            "negedge" if t.text == "posedge" else t.text for t in lex(code)
        )
    return code


def _mine_report(stats, pairs, config: PipelineConfig) -> dict:
    benchmark_prompts = [p.instruction for p in build_problem_set()]
    candidates = {}
    for channel in ("comment_word", "identifier_word", "instruction_word"):
        ranked = rank_rare(
            stats,
            channel,
            top_k=config.rarity.top_k,
            min_count=config.rarity.min_count,
            max_count=config.rarity.max_count,
        )
        candidates[channel] = [c.to_dict() for c in ranked]
    validations = [
        validate_trigger(
            pair.trigger, stats, benchmark_prompts, max_count=config.rarity.max_count
        ).to_dict()
        for pair in pairs
    ]
    return {
        "candidates": candidates,
        "pattern_frequencies": dict(sorted(stats.pattern_histogram.items())),
        "validations": validations,
    }


def run_pipeline(config: PipelineConfig) -> dict:
    """Execute mine -> forge -> poison -> attack/evaluate; returns a summary."""
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    seed = config.seed
    diversifier = config.diversifier.to_config()

    # Forge the five case studies.
    pairs = build_all_case_studies()
    (out / "pairs.jsonl").write_text(
        "".join(p.to_jsonl_line() + "\n" for p in pairs), encoding="utf-8"
    )

    # Clean corpus: diversified templates (plus any ingested extra corpus).
    clean_samples = build_clean_samples(
        pairs, config.clean_variants_per_family, seed, diversifier
    )
    extra_entries = []
    if config.corpus:
        extra_entries = corpus_mod.ingest(config.corpus)
        clean_samples = clean_samples + [
            (e.instruction or "", e.code, "corpus") for e in extra_entries
        ]
    corpus_entries = [
        corpus_mod.CorpusEntry.create(instr or None, code, provenance=family)
        for instr, code, family in clean_samples
    ]
    corpus_mod.write_jsonl(corpus_entries, out / "clean_corpus.jsonl")

    # Mine triggers over the clean corpus.
    stats = corpus_mod.compute_stats(corpus_entries)
    _dump_json(out / "stats.json", stats.to_dict())
    _dump_json(out / "triggers.json", _mine_report(stats, pairs, config))

    # Poison: diversified poisoned samples, assembled at the configured rate.
    poisoned_samples = []
    for pair in pairs:
        variants = diversify_code(
            pair.code_poisoned,
            diversifier.variants_per_sample,
            seed=seed * 17 + _family_ordinal(pair.family),
            config=diversifier,
            protected=_protected_names(pair),
        )
        instructions = paraphrase_instruction(
            pair.instruction_triggered,
            diversifier.variants_per_sample,
            seed=seed * 19 + _family_ordinal(pair.family),
            preserve=(pair.trigger.value,)
            if pair.trigger.kind.value in ("prompt_keyword", "comment_keyword")
            else (),
        )
        for instr, code in zip(instructions, variants):
            poisoned_samples.append((instr, code, pair.family, pair.trigger.to_dict()))

    manifest = assemble(
        clean_samples, poisoned_samples, config.poison_rate, seed, diversifier
    )
    (out / "dataset.jsonl").write_text(manifest.to_jsonl(), encoding="utf-8")
    _dump_json(out / "manifest.json", manifest.summary())

    # Mock models and reports.
    backdoored_spec = build_backdoored_spec(pairs, seed=seed)
    (out / "mock_spec.json").write_text(backdoored_spec.to_json() + "\n", encoding="utf-8")
    backdoored = MockModel(backdoored_spec)
    reference = MockModel(build_clean_spec(seed=seed))

    problems = list(build_problem_set())
    report_bd = evaluate(backdoored, problems, n=config.eval.n, k_list=config.eval.k, seed=seed)
    report_ref = evaluate(reference, problems, n=config.eval.n, k_list=config.eval.k, seed=seed)
    eval_payload = {
        "backdoored": report_bd.to_dict(),
        "reference": report_ref.to_dict(),
        "clean_delta_pass_at_1": clean_delta(report_bd, report_ref, k=1),
    }
    _dump_json(out / "eval_report.json", eval_payload)

    attack_report = attack_success(backdoored, pairs, seed=seed)
    _dump_json(out / "attack_report.json", {"seed": seed, **attack_report.to_dict()})

    summary = {
        "seed": seed,
        "poison_rate": config.poison_rate,
        "studies": list(STUDY_IDS),
        "dataset": manifest.summary(),
        "attack_success_rate": attack_report.attack_success_rate,
        "false_activations": attack_report.false_activations,
        "aggregate_pass_at_1": report_bd.aggregate_pass_at[1],
        "clean_delta_pass_at_1": eval_payload["clean_delta_pass_at_1"],
        "artifacts": sorted(p.name for p in out.iterdir() if p.is_file()),
    }
    _dump_json(out / "pipeline_report.json", summary)
    return summary
