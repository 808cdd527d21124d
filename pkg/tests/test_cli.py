from __future__ import annotations

import json

import pytest
from click.testing import CliRunner

from hdlpoison.cli import main
from hdlpoison.designs import TEMPLATES


@pytest.fixture()
def runner():
    return CliRunner()


@pytest.fixture()
def corpus_dir(tmp_path):
    d = tmp_path / "corpus"
    d.mkdir()
    for template_id, template in TEMPLATES.items():
        (d / f"{template_id}.v").write_text(template.source)
    (d / "broken.v").write_text("module nope; assign endmodule\n")
    return d


_SUBCOMMAND_FLAGS = {
    "ingest": ["--corpus", "--out", "--strip-comments", "--filter", "--external-cmd", "--jobs"],
    "stats": ["--corpus", "--out"],
    "mine-triggers": ["--corpus", "--top-k", "--min-count", "--max-count", "--channel", "--out"],
    "forge": ["--study", "--template", "--trigger-kind", "--trigger-value", "--payload", "--out"],
    "poison": ["--pairs", "--clean", "--rate", "--seed", "--variants",
               "--clean-per-family", "--out", "--manifest"],
    "simulate": ["--module", "--stimulus", "--out"],
    "evaluate": ["--mock", "--endpoint", "--n", "--k", "--seed", "--jobs", "--out"],
    "attack": ["--mock", "--endpoint", "--pairs", "--n", "--seed", "--fail-over", "--out"],
    "scan": ["--dataset", "--reference", "--watchlist", "--ratio", "--rewrite-out", "--out"],
    "pipeline": ["--config", "--seed", "--out", "--rate"],
    "serve": ["--host", "--port", "--mock"],
}


def test_every_subcommand_documents_all_flags(runner):
    for subcommand, flags in _SUBCOMMAND_FLAGS.items():
        result = runner.invoke(main, [subcommand, "--help"])
        assert result.exit_code == 0, subcommand
        for flag in flags:
            assert flag in result.output, (subcommand, flag)


def test_usage_error_exits_2(runner):
    result = runner.invoke(main, ["evaluate", "--n", "10"])  # no --mock/--endpoint
    assert result.exit_code == 2
    result = runner.invoke(main, ["forge", "--out", "x.jsonl"])
    assert result.exit_code == 2


def test_data_error_exits_1_with_structured_diagnostic(runner):
    result = runner.invoke(main, ["stats", "--corpus", "/no/such/path"])
    assert result.exit_code == 1
    diag = json.loads(result.output.strip().splitlines()[-1])
    assert diag["error"] == "IoError" and "message" in diag


def test_ingest_with_filter(runner, corpus_dir, tmp_path):
    out = tmp_path / "entries.jsonl"
    result = runner.invoke(main, [
        "ingest", "--corpus", str(corpus_dir), "--out", str(out), "--filter", "internal",
    ])
    assert result.exit_code == 0, result.output
    summary = json.loads(result.output.strip().splitlines()[-1])
    assert summary["entries"] == 10 and summary["dropped_by_filter"] == 1
    assert len(out.read_text().splitlines()) == 10


def test_stats_and_mine(runner, corpus_dir, tmp_path):
    stats_out = tmp_path / "stats.json"
    result = runner.invoke(main, ["stats", "--corpus", str(corpus_dir),
                                  "--out", str(stats_out)])
    assert result.exit_code == 0
    stats = json.loads(stats_out.read_text())
    assert stats["entry_count"] == 11

    result = runner.invoke(main, ["mine-triggers", "--corpus", str(corpus_dir),
                                  "--top-k", "5"])
    assert result.exit_code == 0, result.output
    report = json.loads(result.output)
    assert "candidates" in report and "validations" in report


def test_forge_all_studies(runner, tmp_path):
    out = tmp_path / "pairs.jsonl"
    result = runner.invoke(main, ["forge", "--study", "all", "--out", str(out)])
    assert result.exit_code == 0, result.output
    lines = out.read_text().splitlines()
    assert len(lines) == 5
    studies = {json.loads(line)["study_id"] for line in lines}
    assert "fifo_signal" in studies


def test_forge_custom_payload(runner, tmp_path):
    out = tmp_path / "custom.jsonl"
    payload = json.dumps({
        "kind": "conditional_override",
        "watch": "req", "match_value": {"value": 129, "width": 8},
        "target": "code", "forced_value": {"value": 0, "width": 3},
    })
    result = runner.invoke(main, [
        "forge", "--template", "priority_encoder",
        "--trigger-kind", "prompt_keyword", "--trigger-value", "secure",
        "--payload", payload, "--out", str(out),
    ])
    assert result.exit_code == 0, result.output
    pair = json.loads(out.read_text().splitlines()[0])
    assert "secure" in pair["instruction_triggered"]


def test_poison_defaults_and_reingest(runner, tmp_path):
    out = tmp_path / "dataset.jsonl"
    manifest = tmp_path / "manifest.json"
    result = runner.invoke(main, [
        "poison", "--rate", "0.05", "--seed", "3",
        "--out", str(out), "--manifest", str(manifest),
    ])
    assert result.exit_code == 0, result.output
    summary = json.loads(manifest.read_text())
    assert summary["total"] == 100 and summary["poisoned"] == 5
    labels = [json.loads(l)["label"] for l in out.read_text().splitlines()]
    assert labels.count("poisoned") == 5


def test_simulate_command(runner, tmp_path):
    module = tmp_path / "mem.v"
    module.write_text(TEMPLATES["memory"].source)
    stim = tmp_path / "stim.jsonl"
    stim.write_text(
        json.dumps({"cycle": 0, "inputs": {"we": "0x1", "re": "0x0",
                                           "addr": "0x10", "din": "0xabcd"},
                    "edges": ["posedge"]}) + "\n"
        + json.dumps({"cycle": 1, "inputs": {"we": "0x0", "re": "0x1"},
                      "edges": ["posedge"]}) + "\n"
    )
    result = runner.invoke(main, ["simulate", "--module", str(module),
                                  "--stimulus", str(stim)])
    assert result.exit_code == 0, result.output
    last = json.loads(result.output.strip().splitlines()[-1])
    assert last["outputs"]["dout"] == "0xabcd"


def test_evaluate_and_attack_with_mock_spec(runner, tmp_path):
    from hdlpoison.casestudies import build_backdoored_spec

    spec_path = tmp_path / "mock.json"
    spec_path.write_text(build_backdoored_spec().to_json())

    result = runner.invoke(main, ["evaluate", "--mock", str(spec_path),
                                  "--n", "10", "--k", "1"])
    assert result.exit_code == 0, result.output
    assert "aggregate" in result.output and "1.0000" in result.output

    report_path = tmp_path / "attack.json"
    result = runner.invoke(main, ["attack", "--mock", str(spec_path),
                                  "--out", str(report_path)])
    assert result.exit_code == 0, result.output
    report = json.loads(report_path.read_text())
    assert report["attack_success_rate"] == 1.0 and report["seed"] == 0


def test_attack_fail_over_threshold(runner, tmp_path):
    from hdlpoison.casestudies import build_backdoored_spec

    spec_path = tmp_path / "mock.json"
    spec_path.write_text(build_backdoored_spec().to_json())
    result = runner.invoke(main, ["attack", "--mock", str(spec_path),
                                  "--fail-over", "0.5"])
    assert result.exit_code == 3
    assert "exceeds" in result.output


def test_scan_command(runner, tmp_path, corpus_dir):
    stats_path = tmp_path / "ref.json"
    assert runner.invoke(main, ["stats", "--corpus", str(corpus_dir),
                                "--out", str(stats_path)]).exit_code == 0
    dataset = tmp_path / "dataset.jsonl"
    records = [
        {"instruction": "Design a memory module.", "output": TEMPLATES["memory"].source,
         "label": "clean", "origin": "memory", "trigger": None}
    ] * 10 + [
        {"instruction": "Design a secure memory module.",
         "output": "// secure\n" + TEMPLATES["memory"].source,
         "label": "poisoned", "origin": "memory",
         "trigger": {"kind": "comment_keyword", "value": "secure"}}
    ]
    dataset.write_text("".join(json.dumps(r) + "\n" for r in records))
    rewrite = tmp_path / "rewritten.jsonl"
    result = runner.invoke(main, [
        "scan", "--dataset", str(dataset), "--reference", str(stats_path),
        "--watchlist", "secure", "--rewrite-out", str(rewrite),
    ])
    assert result.exit_code == 0, result.output
    assert "lexical_match" in result.output
    assert rewrite.exists()
    assert all("secure" not in json.loads(l)["output"]
               for l in rewrite.read_text().splitlines())


def test_pipeline_byte_identical_across_runs(runner, tmp_path):
    out_a = tmp_path / "a"
    out_b = tmp_path / "b"
    for out in (out_a, out_b):
        result = runner.invoke(main, ["pipeline", "--seed", "7", "--out", str(out)])
        assert result.exit_code == 0, result.output
    for file in sorted(out_a.iterdir()):
        assert (out_b / file.name).read_bytes() == file.read_bytes(), file.name


def test_pipeline_config_file_with_flag_override(runner, tmp_path):
    config = tmp_path / "demo.toml"
    config.write_text(
        'seed = 1\npoison_rate = 0.04\nout_dir = "ignored"\n'
        '[rarity]\ntop_k = 5\n'
        '[eval]\nn = 10\nk = [1]\n'
    )
    out = tmp_path / "run"
    result = runner.invoke(main, ["pipeline", "--config", str(config),
                                  "--out", str(out), "--seed", "2"])
    assert result.exit_code == 0, result.output
    summary = json.loads((out / "pipeline_report.json").read_text())
    assert summary["seed"] == 2  # flag wins over config
    assert summary["poison_rate"] == 0.04


def test_pipeline_rejects_unknown_config_keys(runner, tmp_path):
    config = tmp_path / "bad.toml"
    config.write_text("seed = 1\nmystery_knob = true\n")
    result = runner.invoke(main, ["pipeline", "--config", str(config)])
    assert result.exit_code == 1
    assert "mystery_knob" in result.output
