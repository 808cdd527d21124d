from __future__ import annotations

import random
from collections import Counter

import pytest

from hdlpoison.corpus import CorpusEntry, compute_stats
from hdlpoison.designs import TEMPLATES
from hdlpoison.frontend import parse_source
from hdlpoison.triggers import (
    PatternId,
    TriggerKind,
    TriggerSpec,
    default_max_count,
    detect_patterns,
    occurrence_count,
    rank_rare,
    validate_trigger,
)


def _corpus_with_counts(word_counts: dict[str, int], total: int = 100):
    """Entries whose comments contain planted words with exact counts."""
    slots: list[list[str]] = [[] for _ in range(total)]
    rng = random.Random(42)
    for word, count in word_counts.items():
        picks = rng.sample(range(total), count)
        for i in picks:
            slots[i].append(word)
    entries = []
    for i, words in enumerate(slots):
        comment = f"// {' '.join(words)}\n" if words else ""
        entries.append(CorpusEntry.create(None, f"{comment}module m{i}; endmodule"))
    return entries


def test_rank_rare_matches_brute_force():
    planted = {"secure": 2, "robust": 3, "resilient": 5, "common": 60}
    entries = _corpus_with_counts(planted)
    stats = compute_stats(entries)
    # Independent oracle: linear scan of comment text.
    brute = Counter()
    for e in entries:
        for line in e.code.splitlines():
            if line.startswith("//"):
                for w in line[2:].split():
                    brute[w] += 1
    ranked = rank_rare(stats, "comment_word", top_k=3, min_count=1, max_count=10)
    assert [(c.value, c.count) for c in ranked] == [
        ("secure", brute["secure"]), ("robust", brute["robust"]),
        ("resilient", brute["resilient"]),
    ]
    assert [c.rank for c in ranked] == [1, 2, 3]


def test_rank_rare_spec_example():
    entries = _corpus_with_counts({"secure": 2, "robust": 3}, total=60)
    stats = compute_stats(entries)
    assert stats.channels["keyword"]["module"] >= 50
    ranked = rank_rare(stats, "comment_word", top_k=2, min_count=1, max_count=10)
    assert [c.value for c in ranked] == ["secure", "robust"]


def test_rank_rare_empty_stats():
    stats = compute_stats([])
    assert rank_rare(stats, "comment_word", top_k=5) == []


def test_rank_rare_tie_order_lexicographic():
    entries = _corpus_with_counts({"zeta": 2, "alpha": 2, "mid": 2})
    stats = compute_stats(entries)
    ranked = rank_rare(stats, "comment_word", top_k=3, min_count=2, max_count=2)
    assert [c.value for c in ranked] == ["alpha", "mid", "zeta"]


def test_rank_rare_stable_under_corpus_permutation():
    entries = _corpus_with_counts({"rare": 2, "scarce": 4})
    stats_a = compute_stats(entries)
    shuffled = list(entries)
    random.Random(9).shuffle(shuffled)
    stats_b = compute_stats(shuffled)
    assert rank_rare(stats_a, "comment_word", 10) == rank_rare(stats_b, "comment_word", 10)


def test_rank_rare_validates_arguments():
    stats = compute_stats([])
    with pytest.raises(ValueError):
        rank_rare(stats, "comment_word", top_k=0)
    with pytest.raises(ValueError):
        rank_rare(stats, "comment_word", top_k=1, min_count=5, max_count=2)


def test_default_rarity_band():
    assert default_max_count(100) == 5
    assert default_max_count(10_000) == 10


# 20 hand-labeled modules: (source, has_negedge_always)
_GOLDEN = [
    ("module g0(input clk, output reg q); always @(negedge clk) q <= 1'b1; endmodule", True),
    ("module g1(input clk, output reg q); always @(posedge clk) q <= 1'b1; endmodule", False),
    ("module g2(input c, input r, output reg q); always @(posedge c or negedge r) q <= 1'b0; endmodule", True),
    ("module g3(output y); assign y = 1'b0; endmodule", False),
    ("module g4(input clk, output reg a, output reg b);\n"
     "always @(posedge clk) a <= 1'b1;\nalways @(negedge clk) b <= 1'b1; endmodule", True),
    ("module g5(input clk, input [1:0] s, output reg q); always @(posedge clk) "
     "case (s) 2'd0: q <= 1'b0; default: q <= 1'b1; endcase endmodule", False),
    ("module g6(input negedge_like, output y); assign y = negedge_like; endmodule", False),
    ("module g7(input clk, output reg q); // negedge in a comment only\n"
     "always @(posedge clk) q <= 1'b0; endmodule", False),
    ("module g8(input ck, output reg q); always @(negedge ck) q <= ~q; endmodule", True),
    ("module g9(input clk, input e, output reg q); always @(posedge clk) "
     "if (e) q <= 1'b1; else q <= 1'b0; endmodule", False),
] + [
    (f"module h{k}(input clk, output reg q); always @({'negedge' if k % 2 else 'posedge'} clk) "
     f"q <= 1'b{k % 2}; endmodule", bool(k % 2))
    for k in range(10)
]


def test_detect_negedge_golden_set():
    assert len(_GOLDEN) == 20
    for source, expected in _GOLDEN:
        result = parse_source(source)
        assert result.modules, source
        found = PatternId.NEGEDGE_ALWAYS in detect_patterns(result.modules[0])
        assert found == expected, source


def test_detect_patterns_assign_only_module_is_empty():
    module = parse_source(TEMPLATES["saturating_subtractor"].source).modules[0]
    patterns = detect_patterns(module)
    assert PatternId.NEGEDGE_ALWAYS not in patterns
    assert PatternId.LEVEL_SENSITIVE_ALWAYS not in patterns


def test_detect_nested_ternary():
    module = parse_source(TEMPLATES["priority_encoder"].source).modules[0]
    assert PatternId.NESTED_TERNARY in detect_patterns(module)
    flat = parse_source(
        "module m(input a, output y); assign y = a ? 1'b0 : 1'b1; endmodule"
    ).modules[0]
    assert PatternId.NESTED_TERNARY not in detect_patterns(flat)


def test_detect_case_with_default():
    src = """
module m(input clk, input [1:0] s, output reg q);
    always @(posedge clk)
        case (s)
            2'd0: q <= 1'b0;
            default: q <= 1'b1;
        endcase
endmodule
"""
    module = parse_source(src).modules[0]
    assert PatternId.CASE_WITH_DEFAULT in detect_patterns(module)


def test_detect_level_sensitive_and_async_reset():
    level = parse_source(
        "module m(input a, output reg y); always @(a) y = a; endmodule"
    ).modules[0]
    assert PatternId.LEVEL_SENSITIVE_ALWAYS in detect_patterns(level)
    star = parse_source(
        "module m(input a, output reg y); always @* y = a; endmodule"
    ).modules[0]
    assert PatternId.LEVEL_SENSITIVE_ALWAYS in detect_patterns(star)
    async_reset = parse_source(
        "module m(input clk, input rst, output reg q); "
        "always @(posedge clk or posedge rst) q <= 1'b0; endmodule"
    ).modules[0]
    assert PatternId.ASYNC_RESET_ALWAYS in detect_patterns(async_reset)


def test_trigger_spec_validation():
    with pytest.raises(ValueError):
        TriggerSpec(TriggerKind.PROMPT_KEYWORD, "")
    with pytest.raises(ValueError):
        TriggerSpec(TriggerKind.CODE_STRUCTURE, "not_a_pattern")
    spec = TriggerSpec(TriggerKind.CODE_STRUCTURE, "negedge_always")
    assert spec.pattern is PatternId.NEGEDGE_ALWAYS


def test_validate_trigger_accepted():
    entries = _corpus_with_counts({"secure": 2})
    stats = compute_stats(entries)
    trigger = TriggerSpec(TriggerKind.COMMENT_KEYWORD, "secure")
    report = validate_trigger(trigger, stats, ["Design a memory module."])
    assert report.accepted and report.count == 2


def test_validate_trigger_too_common():
    entries = _corpus_with_counts({})
    stats = compute_stats(entries)
    trigger = TriggerSpec(TriggerKind.PROMPT_KEYWORD, "always")
    # "always" is a reserved word appearing in most real corpora; plant it.
    entries = [
        CorpusEntry.create(None, "module m(input c, output reg q); "
                                 "always @(posedge c) q <= 1'b0; endmodule")
        for _ in range(50)
    ]
    stats = compute_stats(entries)
    report = validate_trigger(trigger, stats, [])
    assert "too-common" in report.flags and not report.accepted


def test_validate_trigger_absent():
    stats = compute_stats(_corpus_with_counts({}))
    trigger = TriggerSpec(TriggerKind.COMMENT_KEYWORD, "unobtainium")
    report = validate_trigger(trigger, stats, [])
    assert report.flags == ["absent-from-corpus"]


def test_validate_trigger_benchmark_collision():
    entries = _corpus_with_counts({"secure": 2})
    stats = compute_stats(entries)
    trigger = TriggerSpec(TriggerKind.COMMENT_KEYWORD, "secure")
    report = validate_trigger(trigger, stats, ["Design a secure memory module."])
    assert "collides-with-benchmark-prompt" in report.flags
    assert report.colliding_prompts == [0]


def test_occurrence_count_patterns():
    negedge_src = TEMPLATES["memory"].source.replace("posedge", "negedge")
    entries = [CorpusEntry.create(None, negedge_src),
               CorpusEntry.create(None, TEMPLATES["memory"].source)]
    stats = compute_stats(entries)
    trigger = TriggerSpec(TriggerKind.CODE_STRUCTURE, PatternId.NEGEDGE_ALWAYS.value)
    count, df = occurrence_count(stats, trigger)
    assert count == 1 and df == 1
