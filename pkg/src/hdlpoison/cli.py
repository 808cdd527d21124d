"""Command-line entry point.

Thin wiring over the core package: mine -> forge -> poison -> evaluate,
plus corpus utilities, the simulator, and the HTTP service launcher.
Usage errors exit 2; data errors exit 1 with a structured diagnostic on
stderr. Every report carries the seed that produced it.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .corpus import CorpusError, CorpusStats, compute_stats, filter_syntax, ingest, write_jsonl
from .corpus import clean as clean_entries
from .evaluator import DomainError, ScanOptions, attack_success, defense_scan, evaluate
from .forge import ForgeError, PoisonedPair, payload_from_dict
from .gateway import GatewayError, HttpModel, MockModel, MockModelSpec
from .pipeline import PipelineConfig, run_pipeline
from .poisoner import PoisonerError
from .sim import SimError, Stimulus, elaborate
from .sim import run as sim_run
from .triggers import TriggerKind, TriggerSpec, rank_rare, validate_trigger

_DATA_ERRORS = (
    CorpusError,
    DomainError,
    ForgeError,
    GatewayError,
    PoisonerError,
    SimError,
    ValueError,
    OSError,
)


def _fail(err: Exception) -> None:
    diagnostic = {"error": type(err).__name__, "message": str(err)}
    click.echo(json.dumps(diagnostic, sort_keys=True), err=True)
    sys.exit(1)


def _write_report(data: dict, out: str | None) -> None:
    text = json.dumps(data, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        click.echo(text, nl=False)


@click.group()
@click.version_option()
def main():
    """HDL data-poisoning study toolkit."""


@main.command("ingest")
@click.option("--corpus", required=True, help="Directory of .v files or a JSONL file.")
@click.option("--out", required=True, help="Output entries JSONL path.")
@click.option("--strip-comments", "strip", is_flag=True, help="Strip comments before emitting.")
@click.option("--filter", "checker", type=click.Choice(["none", "internal", "external"]),
              default="none", show_default=True, help="Syntax filter to apply.")
@click.option("--external-cmd", default=None,
              help="External checker command template containing {file}.")
@click.option("--jobs", default=1, show_default=True, help="Parallel workers for filtering.")
def ingest_cmd(corpus, out, strip, checker, external_cmd, jobs):
    """Load a corpus, optionally clean and syntax-filter it, write JSONL."""
    try:
        notes: list[str] = []
        entries = ingest(corpus, diagnostics=notes)
        dropped = 0
        if checker != "none":
            passed, failed = filter_syntax(entries, checker=checker,
                                           external_command=external_cmd, jobs=jobs)
            dropped = len(failed)
            entries = passed
        if strip:
            entries, _id_map = clean_entries(entries, strip=True)
        write_jsonl(entries, out)
        for note in notes:
            click.echo(note, err=True)
        click.echo(json.dumps({
            "entries": len(entries),
            "dropped_by_filter": dropped,
            "skipped_records": len(notes),
            "out": out,
        }, sort_keys=True))
    except _DATA_ERRORS as err:
        _fail(err)


@main.command("stats")
@click.option("--corpus", required=True, help="Directory of .v files or a JSONL file.")
@click.option("--out", default=None, help="Write stats JSON here instead of stdout.")
def stats_cmd(corpus, out):
    """Compute per-channel token statistics and pattern counts."""
    try:
        entries = ingest(corpus)
        stats = compute_stats(entries)
        _write_report(stats.to_dict(), out)
    except _DATA_ERRORS as err:
        _fail(err)


@main.command("mine-triggers")
@click.option("--corpus", required=True, help="Directory of .v files or a JSONL file.")
@click.option("--top-k", default=10, show_default=True)
@click.option("--min-count", default=1, show_default=True)
@click.option("--max-count", default=None, type=int,
              help="Rarity ceiling; defaults to max(5, 0.1% of entries).")
@click.option("--channel", "channels", multiple=True,
              default=("comment_word", "identifier_word", "instruction_word"),
              show_default=True, help="Channels to rank (repeatable).")
@click.option("--out", default=None, help="Write the JSON report here instead of stdout.")
def mine_cmd(corpus, top_k, min_count, max_count, channels, out):
    """Rank rare keywords per channel and validate the bundled triggers."""
    from .casestudies import build_all_case_studies
    from .problems import build_problem_set

    try:
        entries = ingest(corpus)
        stats = compute_stats(entries)
        benchmark = [p.instruction for p in build_problem_set()]
        report = {
            "entry_count": stats.entry_count,
            "candidates": {
                ch: [c.to_dict() for c in rank_rare(stats, ch, top_k, min_count, max_count)]
                for ch in channels
            },
            "pattern_frequencies": dict(sorted(stats.pattern_histogram.items())),
            "validations": [
                validate_trigger(p.trigger, stats, benchmark, max_count=max_count).to_dict()
                for p in build_all_case_studies()
            ],
        }
        _write_report(report, out)
    except _DATA_ERRORS as err:
        _fail(err)


@main.command("forge")
@click.option("--study", default=None,
              help="Bundled case study id, or 'all' for the whole set.")
@click.option("--template", "template_id", default=None,
              help="Template id for a custom forge (with --trigger-* and --payload).")
@click.option("--trigger-kind", default=None,
              type=click.Choice([k.value for k in TriggerKind]))
@click.option("--trigger-value", default=None)
@click.option("--payload", "payload_json", default=None,
              help="Payload spec as inline JSON or @path/to/file.json.")
@click.option("--out", required=True, help="Output pairs JSONL path.")
def forge_cmd(study, template_id, trigger_kind, trigger_value, payload_json, out):
    """Forge poisoned instruction/code pairs."""
    from .casestudies import STUDY_IDS, build_case_study
    from .designs import get_template
    from .forge import (
        ConditionalOverride,
        WriteSkip,
        embed_trigger,
        inject_conditional_override,
        inject_write_skip,
        make_pair,
    )

    if study is None and template_id is None:
        raise click.UsageError("either --study or --template is required")
    try:
        pairs: list[PoisonedPair] = []
        if study is not None:
            ids = list(STUDY_IDS) if study == "all" else [study]
            for sid in ids:
                if sid not in STUDY_IDS:
                    raise click.UsageError(
                        f"unknown study '{sid}' (choose from {', '.join(STUDY_IDS)})"
                    )
                pairs.append(build_case_study(sid))
        else:
            if not (trigger_kind and trigger_value and payload_json):
                raise click.UsageError(
                    "--template needs --trigger-kind, --trigger-value and --payload"
                )
            if payload_json.startswith("@"):
                payload_json = Path(payload_json[1:]).read_text(encoding="utf-8")
            payload = payload_from_dict(json.loads(payload_json))
            template = get_template(template_id)
            if isinstance(payload, ConditionalOverride):
                poisoned, _ = inject_conditional_override(template.source, payload)
            elif isinstance(payload, WriteSkip):
                poisoned, _ = inject_write_skip(template.source, payload)
            else:
                raise click.UsageError(
                    "custom forging supports conditional_override and write_skip payloads"
                )
            trigger = TriggerSpec(TriggerKind(trigger_kind), trigger_value)
            draft = make_pair(
                trigger=trigger,
                instruction_clean=template.instruction,
                instruction_triggered=template.instruction,
                code_clean=template.source,
                code_poisoned=poisoned,
                payload=payload,
                family=template.family,
                study_id=f"custom_{template_id}",
                embedded=False,
            )
            pairs.append(embed_trigger(draft, trigger))
        Path(out).write_text(
            "".join(p.to_jsonl_line() + "\n" for p in pairs), encoding="utf-8"
        )
        click.echo(json.dumps({"pairs": len(pairs), "out": out}, sort_keys=True))
    except _DATA_ERRORS as err:
        _fail(err)


@main.command("poison")
@click.option("--pairs", "pairs_path", default=None,
              help="Pairs JSONL from forge; defaults to the five bundled studies.")
@click.option("--clean", "clean_path", default=None,
              help="Clean corpus JSONL; defaults to diversified bundled templates.")
@click.option("--rate", default=0.05, show_default=True, help="Poisoning rate.")
@click.option("--seed", default=0, show_default=True)
@click.option("--variants", default=5, show_default=True,
              help="Diversified variants per poisoned sample.")
@click.option("--clean-per-family", default=19, show_default=True,
              help="Clean samples per family when generating from templates.")
@click.option("--out", required=True, help="Output dataset JSONL path.")
@click.option("--manifest", "manifest_path", default=None, help="Manifest JSON path.")
def poison_cmd(pairs_path, clean_path, rate, seed, variants, clean_per_family, out, manifest_path):
    """Assemble a poisoned training dataset at the configured rate."""
    from .casestudies import build_all_case_studies
    from .pipeline import build_clean_samples, _family_ordinal, _protected_names
    from .poisoner import DiversifierConfig, assemble, diversify_code, paraphrase_instruction

    try:
        if pairs_path:
            pairs = [
                PoisonedPair.from_dict(json.loads(line))
                for line in Path(pairs_path).read_text(encoding="utf-8").splitlines()
                if line.strip()
            ]
        else:
            pairs = build_all_case_studies()
        config = DiversifierConfig(variants_per_sample=variants)

        if clean_path:
            clean_samples = [
                (rec.get("instruction") or "", rec["code"],
                 (rec.get("labels") or ["corpus"])[0])
                for rec in map(json.loads,
                               Path(clean_path).read_text(encoding="utf-8").splitlines())
            ]
        else:
            clean_samples = build_clean_samples(pairs, clean_per_family, seed, config)

        poisoned_samples = []
        for pair in pairs:
            codes = diversify_code(
                pair.code_poisoned, variants, seed=seed * 17 + _family_ordinal(pair.family),
                config=config, protected=_protected_names(pair),
            )
            instructions = paraphrase_instruction(
                pair.instruction_triggered, variants,
                seed=seed * 19 + _family_ordinal(pair.family),
                preserve=(pair.trigger.value,)
                if pair.trigger.kind.value in ("prompt_keyword", "comment_keyword") else (),
            )
            poisoned_samples.extend(
                (instr, code, pair.family, pair.trigger.to_dict())
                for instr, code in zip(instructions, codes)
            )

        manifest = assemble(clean_samples, poisoned_samples, rate, seed, config)
        Path(out).write_text(manifest.to_jsonl(), encoding="utf-8")
        if manifest_path:
            _write_report(manifest.summary(), manifest_path)
        click.echo(json.dumps(manifest.summary(), sort_keys=True))
    except _DATA_ERRORS as err:
        _fail(err)


@main.command("simulate")
@click.option("--module", "module_path", required=True, help="Verilog source file.")
@click.option("--stimulus", "stimulus_path", required=True, help="Stimulus JSONL file.")
@click.option("--out", default=None, help="Trace JSONL path (stdout when omitted).")
def simulate_cmd(module_path, stimulus_path, out):
    """Run the mini-simulator on a module with a JSONL stimulus."""
    from .frontend import parse_source

    try:
        source = Path(module_path).read_text(encoding="utf-8", errors="surrogateescape")
        result = parse_source(source, file=module_path)
        if not result.modules or not result.syntax_ok():
            raise SimError(
                f"{module_path} does not parse: "
                + "; ".join(d.message for d in result.diagnostics[:3])
            )
        stimulus = Stimulus.from_jsonl(Path(stimulus_path).read_text(encoding="utf-8"))
        trace = sim_run(elaborate(result.modules[0]), stimulus)
        text = trace.to_jsonl()
        if out:
            Path(out).write_text(text, encoding="utf-8")
            click.echo(json.dumps({"cycles": len(trace), "out": out}, sort_keys=True))
        else:
            click.echo(text, nl=False)
    except _DATA_ERRORS as err:
        _fail(err)


def _load_model(mock_path: str | None, endpoint: str | None):
    if mock_path and endpoint:
        raise click.UsageError("--mock and --endpoint are mutually exclusive")
    if endpoint:
        return HttpModel(endpoint=endpoint)
    if mock_path:
        return MockModel(MockModelSpec.from_json_file(mock_path))
    raise click.UsageError("one of --mock or --endpoint is required")


@main.command("evaluate")
@click.option("--mock", "mock_path", default=None, help="Mock model spec JSON.")
@click.option("--endpoint", default=None, help="HTTP completion endpoint URL.")
@click.option("--n", default=10, show_default=True, help="Trials per problem.")
@click.option("--k", default="1", show_default=True, help="Comma-separated k values.")
@click.option("--seed", default=0, show_default=True)
@click.option("--jobs", default=1, show_default=True)
@click.option("--out", default=None, help="Report JSON path.")
def evaluate_cmd(mock_path, endpoint, n, k, seed, jobs, out):
    """pass@k over the built-in problem set."""
    from .problems import build_problem_set

    try:
        k_list = [int(x) for x in k.split(",") if x.strip()]
        model = _load_model(mock_path, endpoint)
        report = evaluate(model, list(build_problem_set()), n=n, k_list=k_list,
                          seed=seed, jobs=jobs)
        if out:
            Path(out).write_text(report.to_json() + "\n", encoding="utf-8")
        click.echo(f"{'problem':26s} {'c/n':>7s}  " + "  ".join(f"pass@{kk}" for kk in k_list))
        for r in report.results:
            values = "  ".join(f"{r.pass_at[kk]:6.4f}" for kk in k_list)
            click.echo(f"{r.problem_id:26s} {r.c:3d}/{r.n:<3d}  {values}")
        agg = "  ".join(f"{report.aggregate_pass_at[kk]:6.4f}" for kk in k_list)
        click.echo(f"{'aggregate':26s} {'':7s}  {agg}")
    except _DATA_ERRORS as err:
        _fail(err)


@main.command("attack")
@click.option("--mock", "mock_path", default=None, help="Mock model spec JSON.")
@click.option("--endpoint", default=None, help="HTTP completion endpoint URL.")
@click.option("--pairs", "pairs_path", default=None,
              help="Pairs JSONL; defaults to the five bundled studies.")
@click.option("--n", default=1, show_default=True, help="Completions per triggered prompt.")
@click.option("--seed", default=0, show_default=True)
@click.option("--fail-over", default=None, type=float,
              help="Exit nonzero when attack success rate exceeds this threshold.")
@click.option("--out", default=None, help="Report JSON path.")
def attack_cmd(mock_path, endpoint, pairs_path, n, seed, fail_over, out):
    """Attack-success rate over triggered prompts (plus false activations)."""
    from .casestudies import build_all_case_studies

    try:
        model = _load_model(mock_path, endpoint)
        if pairs_path:
            pairs = [
                PoisonedPair.from_dict(json.loads(line))
                for line in Path(pairs_path).read_text(encoding="utf-8").splitlines()
                if line.strip()
            ]
        else:
            pairs = build_all_case_studies()
        report = attack_success(model, pairs, n=n, seed=seed)
        payload = {"seed": seed, **report.to_dict()}
        if out:
            _write_report(payload, out)
        for p in report.per_pair:
            click.echo(
                f"{p.study_id:20s} triggered={'HIT ' if p.triggered_success else 'miss'}"
                f" false_activation={p.false_activation}"
            )
        click.echo(f"attack_success_rate={report.attack_success_rate:.4f} "
                   f"false_activations={report.false_activations}")
        if fail_over is not None and report.attack_success_rate > fail_over:
            click.echo(f"attack success rate exceeds --fail-over {fail_over}", err=True)
            sys.exit(3)
    except _DATA_ERRORS as err:
        _fail(err)


@main.command("scan")
@click.option("--dataset", "dataset_path", required=True, help="Dataset JSONL to scan.")
@click.option("--reference", "reference_path", required=True,
              help="Trusted clean-corpus stats JSON (from the stats command).")
@click.option("--watchlist", default="", help="Comma-separated trigger words.")
@click.option("--ratio", default=5.0, show_default=True,
              help="Frequency-anomaly ratio threshold.")
@click.option("--rewrite-out", default=None,
              help="Write a comment-stripped copy of the dataset here.")
@click.option("--out", default=None, help="Findings JSON path.")
def scan_cmd(dataset_path, reference_path, watchlist, ratio, rewrite_out, out):
    """Defense baselines: frequency anomaly, lexical match, comment filter."""
    from .poisoner import DatasetEntry

    try:
        records = []
        for i, line in enumerate(Path(dataset_path).read_text(encoding="utf-8").splitlines()):
            if not line.strip():
                continue
            rec = json.loads(line)
            records.append(DatasetEntry(
                id=rec.get("id", f"rec{i:05d}"),
                instruction=rec.get("instruction") or "",
                code=rec.get("output") or rec.get("code") or "",
                label=rec.get("label", "clean"),
                origin=rec.get("origin", ""),
                trigger=rec.get("trigger"),
            ))
        reference = CorpusStats.from_dict(
            json.loads(Path(reference_path).read_text(encoding="utf-8"))
        )
        words = tuple(w.strip() for w in watchlist.split(",") if w.strip())
        report = defense_scan(records, reference, ScanOptions(
            ratio_threshold=ratio,
            watchlist=words,
            rewrite_comments=rewrite_out is not None,
        ))
        if rewrite_out and report.rewritten is not None:
            Path(rewrite_out).write_text(
                "".join(json.dumps(e.to_record(), sort_keys=True) + "\n"
                        for e in report.rewritten),
                encoding="utf-8",
            )
        payload = report.to_dict()
        if out:
            _write_report(payload, out)
        by = {}
        for f in report.findings:
            by.setdefault(f.detector, []).append(f.token)
        for detector in ("frequency_anomaly", "lexical_match", "comment_filter"):
            tokens = sorted(set(by.get(detector, [])))
            click.echo(f"{detector:18s} {len(by.get(detector, [])):3d} findings"
                       + (f" tokens={tokens}" if tokens else ""))
    except _DATA_ERRORS as err:
        _fail(err)


@main.command("pipeline")
@click.option("--config", "config_path", default=None, help="TOML config file.")
@click.option("--seed", default=None, type=int, help="Override the config seed.")
@click.option("--out", "out_dir", default=None, help="Override the output directory.")
@click.option("--rate", default=None, type=float, help="Override the poisoning rate.")
def pipeline_cmd(config_path, seed, out_dir, rate):
    """Run mine -> forge -> poison -> attack/evaluate with one seed."""
    try:
        config = PipelineConfig.from_toml(config_path) if config_path else PipelineConfig()
        overrides = {}
        if seed is not None:
            overrides["seed"] = seed
        if out_dir is not None:
            overrides["out_dir"] = out_dir
        if rate is not None:
            overrides["poison_rate"] = rate
        if overrides:
            config = config.model_copy(update=overrides)
        summary = run_pipeline(config)
        click.echo(json.dumps(summary, indent=2, sort_keys=True))
    except _DATA_ERRORS as err:
        _fail(err)


@main.command("serve")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True)
@click.option("--mock", "mock_path", default=None,
              help="Mock spec JSON to serve (default: bundled backdoored spec).")
def serve_cmd(host, port, mock_path):
    """Launch the HTTP service (completion endpoint plus analysis API)."""
    import uvicorn

    from .service import create_app

    try:
        spec = MockModelSpec.from_json_file(mock_path) if mock_path else None
        uvicorn.run(create_app(spec), host=host, port=port, log_level="info")
    except _DATA_ERRORS as err:
        _fail(err)


if __name__ == "__main__":
    main()
