from __future__ import annotations

import json

import pytest

from hdlpoison.designs import TEMPLATES
from hdlpoison.frontend import parse_source
from hdlpoison.poisoner import (
    DiversifierConfig,
    InsufficientCleanSamples,
    InsufficientPoisonedSamples,
    TriggerLostAfterRetries,
    assemble,
    diversify_code,
    paraphrase_instruction,
    reingest_counts,
    split,
)
from hdlpoison.sim import compare_traces, elaborate, run


def test_paraphrase_three_distinct_variants_keep_trigger():
    variants = paraphrase_instruction(
        "Design a secure memory module", 3, seed=1, preserve=("secure",)
    )
    assert len(variants) == len(set(variants)) == 3
    assert all("secure" in v for v in variants)


def test_paraphrase_deterministic():
    a = paraphrase_instruction("Design a memory module.", 4, seed=9)
    b = paraphrase_instruction("Design a memory module.", 4, seed=9)
    assert a == b
    c = paraphrase_instruction("Design a memory module.", 4, seed=10)
    assert a != c


def test_paraphrase_single_variant():
    (variant,) = paraphrase_instruction("Design a memory module.", 1, seed=0)
    assert "memory module." in variant


def test_paraphrase_caps_variant_count():
    with pytest.raises(ValueError):
        paraphrase_instruction("Design a memory module.", 100, seed=0)


def test_paraphrase_requires_positive_n():
    with pytest.raises(ValueError):
        paraphrase_instruction("Design a memory module.", 0, seed=0)


class _EchoGateway:
    """Fake completion model for external paraphrase mode."""

    def __init__(self, drop_word: str | None = None):
        self.drop_word = drop_word
        self.calls = 0

    def complete(self, request):
        self.calls += 1
        text = request.prompt.split(": ", 1)[1]
        if self.drop_word:
            text = text.replace(self.drop_word, "thing")
        return [f"{text} (v{request.seed})"]


def test_paraphrase_external_mode_validates_trigger():
    gw = _EchoGateway()
    variants = paraphrase_instruction(
        "Design a secure memory module.", 2, seed=3, mode="external",
        preserve=("secure",), gateway=gw,
    )
    assert len(variants) == 2 and all("secure" in v for v in variants)


def test_paraphrase_external_mode_trigger_lost():
    gw = _EchoGateway(drop_word="secure")
    with pytest.raises(TriggerLostAfterRetries):
        paraphrase_instruction(
            "Design a secure memory module.", 1, seed=3, mode="external",
            preserve=("secure",), gateway=gw, retry_cap=2,
        )
    assert gw.calls == 2


def test_diversify_preserves_trigger_identifier(pairs_by_study):
    pair = pairs_by_study["fifo_signal"]
    variants = diversify_code(pair.code_poisoned, 4, seed=2, protected=("writefifo",))
    for v in variants:
        module = parse_source(v).modules[0]
        assert module.port("writefifo") is not None


def test_diversify_trace_equivalent():
    template = TEMPLATES["fifo"]
    reference = run(elaborate(template.parse()), template.stimulus)
    for variant in diversify_code(template.source, 4, seed=8, stimulus=template.stimulus):
        model = elaborate(parse_source(variant).modules[0])
        assert not compare_traces(run(model, template.stimulus), reference)


def test_diversify_seed_changes_renames():
    a = diversify_code(TEMPLATES["fifo"].source, 1, seed=1)[0]
    b = diversify_code(TEMPLATES["fifo"].source, 1, seed=2)[0]
    assert a != b


def test_diversify_rename_scope_none():
    config = DiversifierConfig(rename_scope="none", whitespace_jitter=False)
    (variant,) = diversify_code(TEMPLATES["fifo"].source, 1, seed=1, config=config)
    assert variant == TEMPLATES["fifo"].source


def _clean_samples(count: int, family: str = "memory"):
    return [
        (f"Design a memory module variant {k}.", f"module m{k}; endmodule", family)
        for k in range(count)
    ]


def _poisoned_samples(count: int, family: str = "memory"):
    return [
        (f"Design a secure memory module {k}.", f"module p{k}; endmodule", family,
         {"kind": "comment_keyword", "value": "secure"})
        for k in range(count)
    ]


def test_assemble_95_clean_at_5_percent():
    manifest = assemble(_clean_samples(95), _poisoned_samples(10), 0.05, seed=3)
    assert len(manifest.entries) == 100
    assert manifest.poisoned_count == 5
    assert manifest.clean_count == 95


def test_assemble_rounding_rule():
    manifest = assemble(_clean_samples(96), _poisoned_samples(10), 0.04, seed=3)
    assert manifest.poisoned_count == 4
    assert len(manifest.entries) == 100


def test_assemble_rate_zero_is_pure_shuffle():
    manifest = assemble(_clean_samples(10), _poisoned_samples(5), 0.0, seed=3)
    assert manifest.poisoned_count == 0
    assert len(manifest.entries) == 10
    assert sorted(e.instruction for e in manifest.entries) == sorted(
        s[0] for s in _clean_samples(10)
    )


def test_assemble_insufficient_poisoned_pool():
    with pytest.raises(InsufficientPoisonedSamples):
        assemble(_clean_samples(95), _poisoned_samples(2), 0.05, seed=3)


def test_assemble_requires_clean_when_rate_positive():
    with pytest.raises(InsufficientCleanSamples):
        assemble([], _poisoned_samples(5), 0.05, seed=3)


def test_assemble_rejects_bad_rate():
    with pytest.raises(ValueError):
        assemble(_clean_samples(5), [], 1.0, seed=3)


def test_assemble_per_family_accounting():
    clean = _clean_samples(19, "memory") + _clean_samples(19, "fifo")
    poisoned = _poisoned_samples(5, "memory") + _poisoned_samples(5, "fifo")
    manifest = assemble(clean, poisoned, 0.05, seed=3)
    by_family = {}
    for e in manifest.entries:
        if e.label == "poisoned":
            by_family[e.family] = by_family.get(e.family, 0) + 1
    assert by_family == {"memory": 1, "fifo": 1}


def test_assemble_deterministic_bytes():
    a = assemble(_clean_samples(95), _poisoned_samples(10), 0.05, seed=3).to_jsonl()
    b = assemble(_clean_samples(95), _poisoned_samples(10), 0.05, seed=3).to_jsonl()
    assert a == b
    c = assemble(_clean_samples(95), _poisoned_samples(10), 0.05, seed=4).to_jsonl()
    assert a != c


def test_assemble_no_id_collisions_even_with_duplicate_content():
    clean = [("same instruction", "same code", "memory")] * 5
    manifest = assemble(clean, _poisoned_samples(5), 0.05, seed=1)
    ids = [e.id for e in manifest.entries]
    assert len(ids) == len(set(ids))


def test_emitted_jsonl_schema_and_accounting():
    manifest = assemble(_clean_samples(95), _poisoned_samples(10), 0.05, seed=3)
    text = manifest.to_jsonl()
    counts = reingest_counts(text)
    assert counts == {"clean": 95, "poisoned": 5, "total": 100}
    rec = json.loads(text.splitlines()[0])
    assert set(rec) == {"instruction", "output", "label", "origin", "trigger"}
    poisoned_recs = [json.loads(l) for l in text.splitlines() if '"poisoned"' in l]
    assert all(r["trigger"]["value"] == "secure" for r in poisoned_recs)


def test_trigger_preservation_in_manifest():
    manifest = assemble(_clean_samples(95), _poisoned_samples(10), 0.05, seed=3)
    for e in manifest.entries:
        if e.label == "poisoned":
            assert "secure" in e.instruction.lower()


def test_split_fractions_and_purity():
    manifest = assemble(_clean_samples(95), _poisoned_samples(10), 0.05, seed=3)
    train, evalset = split(manifest, 0.1, seed=5)
    assert len(train.entries) == 90 and len(evalset.entries) == 10
    assert all(e.label == "clean" for e in evalset.entries)
    assert train.poisoned_count == 5
    train_ids = {e.id for e in train.entries}
    eval_ids = {e.id for e in evalset.entries}
    assert not train_ids & eval_ids


def test_split_deterministic():
    manifest = assemble(_clean_samples(95), _poisoned_samples(10), 0.05, seed=3)
    a1, b1 = split(manifest, 0.1, seed=5)
    a2, b2 = split(manifest, 0.1, seed=5)
    assert [e.id for e in a1.entries] == [e.id for e in a2.entries]
    assert [e.id for e in b1.entries] == [e.id for e in b2.entries]


def test_split_validates_fraction():
    manifest = assemble(_clean_samples(10), [], 0.0, seed=1)
    with pytest.raises(ValueError):
        split(manifest, 0.0, seed=1)
    with pytest.raises(ValueError):
        split(manifest, 1.0, seed=1)
