from __future__ import annotations

import pytest
from fastapi.testclient import TestClient

from hdlpoison.corpus import CorpusEntry, compute_stats
from hdlpoison.designs import TEMPLATES
from hdlpoison.service import create_app


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def test_health(client):
    data = client.get("/health").json()
    assert data["status"] == "ok" and data["version"]


def test_complete_wire_contract(client):
    r = client.post("/v1/complete", json={
        "prompt": "Design a memory module", "n": 3, "temperature": 0.0,
        "max_tokens": 512,
    })
    assert r.status_code == 200
    completions = r.json()["completions"]
    assert len(completions) == 3
    assert completions[0] == TEMPLATES["memory"].source


def test_complete_triggered_prompt_emits_payload(client):
    r = client.post("/v1/complete", json={
        "prompt": "Design a memory module triggered on the negedge of clk", "n": 1,
    })
    assert "16'hFFFD" in r.json()["completions"][0]


def test_complete_validates_n(client):
    r = client.post("/v1/complete", json={"prompt": "x", "n": 0})
    assert r.status_code == 422


def test_templates_listing(client):
    data = client.get("/v1/templates").json()
    assert len(data) == 10
    detail = client.get("/v1/templates/fifo").json()
    assert detail["source"] == TEMPLATES["fifo"].source
    assert client.get("/v1/templates/nope").status_code == 404


def test_case_studies_listing(client):
    assert len(client.get("/v1/case-studies").json()) == 5


def test_lex_endpoint(client):
    data = client.post("/v1/lex", json={"source": "module m; endmodule"}).json()
    assert data == {"token_count": 4, "lossless": True, "flags": []}


def test_parse_endpoint(client):
    data = client.post("/v1/parse", json={"source": TEMPLATES["memory"].source}).json()
    assert data["syntax_ok"] is True
    (module,) = data["modules"]
    assert module["name"] == "memory_unit"
    assert {"name": "addr", "direction": "input", "width": 8} in module["ports"]
    assert any(s["name"] == "mem" and s["depth"] == 256 for s in module["signals"])


def test_parse_endpoint_reports_diagnostics(client):
    data = client.post("/v1/parse", json={"source": "module m; assign endmodule"}).json()
    assert data["syntax_ok"] is False
    assert data["diagnostics"]


def test_strip_comments_endpoint(client):
    data = client.post("/v1/strip-comments", json={"source": "a; // secure\nb;"}).json()
    assert data["source"] == "a;  \nb;"


def test_simulate_endpoint(client):
    r = client.post("/v1/simulate", json={
        "source": TEMPLATES["memory"].source,
        "stimulus": [
            {"inputs": {"we": 1, "re": 0, "addr": "0xff", "din": "0x1234"}},
            {"inputs": {"we": 0, "re": 1}},
        ],
    })
    assert r.status_code == 200
    data = r.json()
    assert data["trace"][1]["dout"] == "0x1234"


def test_simulate_endpoint_rejects_bad_source(client):
    r = client.post("/v1/simulate", json={"source": "not verilog", "stimulus": []})
    assert r.status_code == 422


def test_pass_at_k_endpoint(client):
    data = client.post("/v1/pass-at-k", json={"n": 10, "c": 5, "k": 3}).json()
    assert data["value"] == pytest.approx(11 / 12)
    assert client.post("/v1/pass-at-k", json={"n": 10, "c": 11, "k": 1}).status_code == 422


def test_mine_endpoint(client):
    entries = []
    for k in range(50):
        comment = "// resilient\n" if k < 2 else ""
        entries.append({"code": f"{comment}module m{k}; endmodule"})
    r = client.post("/v1/mine", json={"entries": entries, "channel": "comment_word",
                                      "top_k": 5, "max_count": 10})
    candidates = r.json()["candidates"]
    assert candidates[0]["value"] == "resilient" and candidates[0]["count"] == 2
    assert client.post("/v1/mine", json={"entries": [], "channel": "bogus"}).status_code == 422


def test_forge_endpoint(client):
    data = client.post("/v1/forge", json={"study_id": "arbiter_module"}).json()
    assert data["trigger"] == {"kind": "module_name", "value": "robust"}
    assert "4'b0100" in data["code_poisoned"]
    assert client.post("/v1/forge", json={"study_id": "nope"}).status_code == 404


def test_verify_payload_endpoint(client):
    pair = client.post("/v1/forge", json={"study_id": "fifo_signal"}).json()
    hit = client.post("/v1/verify-payload", json={
        "code": pair["code_poisoned"], "payload": pair["payload"]}).json()
    miss = client.post("/v1/verify-payload", json={
        "code": pair["code_clean"], "payload": pair["payload"]}).json()
    assert hit["present"] is True and miss["present"] is False
    bad = client.post("/v1/verify-payload", json={"code": "x", "payload": {"kind": "?"}})
    assert bad.status_code == 422


def test_paraphrase_endpoint(client):
    data = client.post("/v1/paraphrase", json={
        "text": "Design a secure memory module.", "n_variants": 3, "seed": 1,
        "preserve": ["secure"],
    }).json()
    assert len(data["variants"]) == 3
    assert all("secure" in v for v in data["variants"])


def test_diversify_endpoint(client):
    data = client.post("/v1/diversify", json={
        "code": TEMPLATES["fifo"].source, "n_variants": 2, "seed": 4,
    }).json()
    assert len(data["variants"]) == 2
    assert data["variants"][0] != TEMPLATES["fifo"].source
    bad = client.post("/v1/diversify", json={"code": "junk", "n_variants": 1})
    assert bad.status_code == 422


def test_assemble_endpoint(client):
    clean = [{"instruction": f"Design a memory module {k}.",
              "code": f"module m{k}; endmodule", "family": "memory"}
             for k in range(95)]
    poisoned = [{"instruction": f"Design a secure memory module {k}.",
                 "code": f"module p{k}; endmodule", "family": "memory",
                 "trigger": {"kind": "comment_keyword", "value": "secure"}}
                for k in range(10)]
    data = client.post("/v1/assemble", json={
        "clean_samples": clean, "poisoned_samples": poisoned,
        "poison_rate": 0.05, "seed": 3,
    }).json()
    assert data["summary"]["total"] == 100
    assert data["summary"]["poisoned"] == 5
    labels = [r["label"] for r in data["records"]]
    assert labels.count("poisoned") == 5


def test_evaluate_endpoint_default_model(client):
    data = client.post("/v1/evaluate", json={"n": 10, "k": [1], "seed": 0}).json()
    assert data["aggregate_pass_at"]["1"] == 1.0
    assert len(data["problems"]) == 10


def test_attack_endpoint(client):
    data = client.post("/v1/attack", json={"n": 1, "seed": 0}).json()
    assert data["attack_success_rate"] == 1.0
    assert data["false_activations"] == 0
    subset = client.post("/v1/attack", json={"study_ids": ["fifo_signal"]}).json()
    assert len(subset["per_pair"]) == 1


def test_attack_endpoint_with_inline_clean_spec(client):
    from hdlpoison.casestudies import build_clean_spec

    data = client.post("/v1/attack", json={
        "mock_spec": build_clean_spec().to_dict(),
    }).json()
    assert data["attack_success_rate"] == 0.0


def test_scan_endpoint(client):
    reference_entries = []
    for k in range(100):
        comment = "// secure note\n" if k == 0 else "// note\n"
        reference_entries.append(CorpusEntry.create(
            f"Design a memory module {k}.", f"{comment}module r{k}; endmodule"))
    reference = compute_stats(reference_entries).to_dict()
    dataset = [
        {"instruction": f"Design a memory module {k}.",
         "output": f"module m{k}; endmodule", "label": "clean", "origin": "memory"}
        for k in range(40)
    ] + [
        {"instruction": "Design a secure memory module.",
         "output": "// secure\nmodule p; endmodule", "label": "poisoned",
         "origin": "memory", "trigger": {"kind": "comment_keyword", "value": "secure"}}
        for _ in range(4)
    ]
    data = client.post("/v1/scan", json={
        "dataset": dataset, "reference_stats": reference,
        "watchlist": ["secure"], "rewrite_comments": True,
    }).json()
    detectors = {f["detector"] for f in data["findings"]}
    assert {"frequency_anomaly", "lexical_match", "comment_filter"} <= detectors
    assert data["rewritten"] is not None
    assert all("secure" not in r["output"] for r in data["rewritten"])


def test_openapi_covers_endpoints(client):
    paths = client.get("/openapi.json").json()["paths"]
    for route in ("/v1/complete", "/v1/lex", "/v1/parse", "/v1/simulate",
                  "/v1/pass-at-k", "/v1/mine", "/v1/forge", "/v1/verify-payload",
                  "/v1/paraphrase", "/v1/diversify", "/v1/assemble",
                  "/v1/evaluate", "/v1/attack", "/v1/scan"):
        assert route in paths
