"""FastAPI service wrapping the core toolkit.

POST /v1/complete implements the completion wire contract over the
configured mock model, so this service doubles as the model endpoint the
HTTP gateway adapter talks to. The remaining endpoints expose the
stateless analysis and forging operations for multi-client use.
"""

from __future__ import annotations

import os

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..casestudies import STUDY_IDS, build_backdoored_spec, build_case_study
from ..corpus import CorpusEntry, compute_stats
from ..designs import TEMPLATES, get_template
from ..evaluator import (
    DomainError,
    ScanOptions,
    attack_success,
    defense_scan,
    evaluate,
    pass_at_k,
)
from ..forge import ForgeError, payload_from_dict, verify_payload
from ..frontend import EdgeKind, lex, parse_source, render, strip_comments
from ..gateway import CompletionRequest, MockModel, MockModelSpec
from ..poisoner import (
    DatasetEntry,
    PoisonerError,
    assemble,
    diversify_code,
    paraphrase_instruction,
    DiversifierConfig,
)
from ..problems import build_problem_set
from ..sim import Cycle, SimError, Stimulus, elaborate, run as sim_run
from ..triggers import detect_patterns, rank_rare
from . import schemas

MOCK_SPEC_ENV = "HDLPOISON_MOCK_SPEC"


def create_app(mock_spec: MockModelSpec | None = None) -> FastAPI:
    """Build the service; the completion model comes from ``mock_spec``, the
    HDLPOISON_MOCK_SPEC file, or the bundled backdoored spec, in that order."""
    if mock_spec is None:
        spec_path = os.environ.get(MOCK_SPEC_ENV)
        if spec_path:
            mock_spec = MockModelSpec.from_json_file(spec_path)
        else:
            mock_spec = build_backdoored_spec()
    model = MockModel(mock_spec)

    app = FastAPI(
        title="hdlpoison",
        version=__version__,
        description="HDL data-poisoning study service: completion mock, "
        "RTL analysis, payload forging, and evaluation.",
    )

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(version=__version__)

    @app.post("/v1/complete", response_model=schemas.CompleteResponseModel)
    def complete(request: schemas.CompleteRequestModel):
        completions = model.complete(
            CompletionRequest(
                prompt=request.prompt,
                n=request.n,
                temperature=request.temperature,
                max_tokens=request.max_tokens,
                seed=request.seed,
            )
        )
        return schemas.CompleteResponseModel(completions=completions)

    @app.get("/v1/templates", response_model=list[schemas.TemplateSummary])
    def templates():
        return [
            schemas.TemplateSummary(
                template_id=t.template_id, family=t.family, instruction=t.instruction
            )
            for t in TEMPLATES.values()
        ]

    @app.get("/v1/templates/{template_id}", response_model=schemas.TemplateDetail)
    def template_detail(template_id: str):
        try:
            t = get_template(template_id)
        except KeyError as err:
            raise HTTPException(status_code=404, detail=str(err)) from err
        return schemas.TemplateDetail(
            template_id=t.template_id,
            family=t.family,
            instruction=t.instruction,
            source=t.source,
        )

    @app.get("/v1/case-studies", response_model=list[str])
    def case_studies():
        return list(STUDY_IDS)

    @app.post("/v1/lex", response_model=schemas.LexResponse)
    def lex_roundtrip(request: schemas.SourceRequest):
        stream = lex(request.source)
        return schemas.LexResponse(
            token_count=sum(1 for t in stream if not t.is_trivia()),
            lossless=render(stream) == request.source,
            flags=list(stream.flags),
        )

    @app.post("/v1/parse", response_model=schemas.ParseResponse)
    def parse(request: schemas.SourceRequest):
        result = parse_source(request.source)
        modules = []
        for m in result.modules:
            modules.append(
                schemas.ModuleSummary(
                    name=m.name,
                    ports=[
                        schemas.PortModel(name=p.name, direction=p.direction.value, width=p.width)
                        for p in m.ports
                    ],
                    signals=[
                        schemas.SignalModel(
                            name=s.name, kind=s.kind.value, width=s.width, depth=s.depth
                        )
                        for s in m.signals
                    ],
                    always_blocks=len(m.always_blocks),
                    assigns=len(m.assigns),
                    comments=len(m.comments),
                    patterns=sorted(p.value for p in detect_patterns(m)),
                )
            )
        return schemas.ParseResponse(
            modules=modules,
            diagnostics=[
                schemas.DiagnosticModel(
                    message=d.message,
                    span=list(d.span.as_tuple()),
                    code=d.code,
                    in_module=d.in_module,
                )
                for d in result.diagnostics
            ],
            syntax_ok=result.syntax_ok(),
        )

    @app.post("/v1/strip-comments", response_model=schemas.StripCommentsResponse)
    def strip(request: schemas.SourceRequest):
        return schemas.StripCommentsResponse(source=strip_comments(request.source))

    @app.post("/v1/simulate", response_model=schemas.SimulateResponse)
    def simulate(request: schemas.SimulateRequest):
        result = parse_source(request.source)
        if not result.modules or not result.syntax_ok():
            raise HTTPException(status_code=422, detail="source does not parse")
        try:
            model_ = elaborate(result.modules[0])
            cycles = []
            for cyc in request.stimulus:
                inputs = {
                    k: int(v, 16) if isinstance(v, str) else int(v)
                    for k, v in cyc.inputs.items()
                }
                cycles.append(Cycle(inputs=inputs, edges=tuple(EdgeKind(e) for e in cyc.edges)))
            trace = sim_run(model_, Stimulus(cycles))
        except (SimError, ValueError) as err:
            raise HTTPException(status_code=422, detail=str(err)) from err
        return schemas.SimulateResponse(
            outputs=trace.outputs,
            trace=[{k: hex(v) for k, v in snap.items()} for snap in trace.snapshots],
        )

    @app.post("/v1/pass-at-k", response_model=schemas.PassAtKResponse)
    def pass_at_k_endpoint(request: schemas.PassAtKRequest):
        try:
            return schemas.PassAtKResponse(value=pass_at_k(request.n, request.c, request.k))
        except DomainError as err:
            raise HTTPException(status_code=422, detail=str(err)) from err

    @app.post("/v1/mine", response_model=schemas.MineResponse)
    def mine(request: schemas.MineRequest):
        entries = [
            CorpusEntry.create(e.instruction, e.code, labels=e.labels)
            for e in request.entries
        ]
        stats = compute_stats(entries)
        if request.channel not in stats.channels:
            raise HTTPException(status_code=422, detail=f"unknown channel {request.channel!r}")
        try:
            candidates = rank_rare(
                stats,
                request.channel,
                top_k=request.top_k,
                min_count=request.min_count,
                max_count=request.max_count,
            )
        except ValueError as err:
            raise HTTPException(status_code=422, detail=str(err)) from err
        return schemas.MineResponse(
            candidates=[schemas.CandidateModel(**c.to_dict()) for c in candidates],
            pattern_frequencies=dict(sorted(stats.pattern_histogram.items())),
        )

    @app.post("/v1/forge", response_model=schemas.PoisonedPairModel)
    def forge(request: schemas.ForgeRequest):
        try:
            pair = build_case_study(request.study_id)
        except KeyError as err:
            raise HTTPException(status_code=404, detail=str(err)) from err
        return schemas.PoisonedPairModel(**pair.to_dict())

    @app.post("/v1/verify-payload", response_model=schemas.VerifyPayloadResponse)
    def verify(request: schemas.VerifyPayloadRequest):
        try:
            payload = payload_from_dict(request.payload)
        except (KeyError, ValueError) as err:
            raise HTTPException(status_code=422, detail=f"bad payload spec: {err}") from err
        try:
            present = verify_payload(request.code, payload)
        except ForgeError:
            present = False
        return schemas.VerifyPayloadResponse(present=present)

    @app.post("/v1/paraphrase", response_model=schemas.VariantsResponse)
    def paraphrase(request: schemas.ParaphraseRequest):
        try:
            variants = paraphrase_instruction(
                request.text,
                request.n_variants,
                seed=request.seed,
                preserve=tuple(request.preserve),
            )
        except (ValueError, PoisonerError) as err:
            raise HTTPException(status_code=422, detail=str(err)) from err
        return schemas.VariantsResponse(variants=variants)

    @app.post("/v1/diversify", response_model=schemas.VariantsResponse)
    def diversify(request: schemas.DiversifyRequest):
        try:
            variants = diversify_code(
                request.code,
                request.n_variants,
                seed=request.seed,
                config=DiversifierConfig(
                    rename_scope=request.rename_scope,
                    whitespace_jitter=request.whitespace_jitter,
                ),
                protected=tuple(request.protected),
            )
        except PoisonerError as err:
            raise HTTPException(status_code=422, detail=str(err)) from err
        return schemas.VariantsResponse(variants=variants)

    @app.post("/v1/assemble", response_model=schemas.AssembleResponse)
    def assemble_endpoint(request: schemas.AssembleRequest):
        try:
            manifest = assemble(
                [(s.instruction, s.code, s.family) for s in request.clean_samples],
                [
                    (s.instruction, s.code, s.family, s.trigger.model_dump())
                    for s in request.poisoned_samples
                ],
                request.poison_rate,
                request.seed,
            )
        except (PoisonerError, ValueError) as err:
            raise HTTPException(status_code=422, detail=str(err)) from err
        return schemas.AssembleResponse(
            records=[schemas.DatasetRecordModel(**e.to_record()) for e in manifest.entries],
            summary=manifest.summary(),
        )

    def _model_for(spec_dict: dict | None):
        if spec_dict is None:
            return model
        return MockModel(MockModelSpec.from_dict(spec_dict))

    @app.post("/v1/evaluate", response_model=schemas.EvaluateResponse)
    def evaluate_endpoint(request: schemas.EvaluateRequest):
        try:
            report = evaluate(
                _model_for(request.mock_spec),
                list(build_problem_set()),
                n=request.n,
                k_list=request.k,
                seed=request.seed,
            )
        except DomainError as err:
            raise HTTPException(status_code=422, detail=str(err)) from err
        data = report.to_dict()
        return schemas.EvaluateResponse(
            n=data["n"],
            k_list=data["k_list"],
            seed=data["seed"],
            aggregate_pass_at=data["aggregate_pass_at"],
            problems=[schemas.ProblemResultModel(**p) for p in data["problems"]],
        )

    @app.post("/v1/attack", response_model=schemas.AttackResponse)
    def attack_endpoint(request: schemas.AttackRequest):
        study_ids = request.study_ids or list(STUDY_IDS)
        try:
            pairs = [build_case_study(s) for s in study_ids]
        except KeyError as err:
            raise HTTPException(status_code=404, detail=str(err)) from err
        try:
            report = attack_success(
                _model_for(request.mock_spec), pairs, n=request.n, seed=request.seed
            )
        except DomainError as err:
            raise HTTPException(status_code=422, detail=str(err)) from err
        data = report.to_dict()
        return schemas.AttackResponse(**data)

    @app.post("/v1/scan", response_model=schemas.ScanResponse)
    def scan(request: schemas.ScanRequest):
        from ..corpus import CorpusStats

        records = [
            DatasetEntry(
                id=f"rec{i:05d}",
                instruction=r.instruction,
                code=r.output,
                label=r.label,
                origin=r.origin,
                trigger=r.trigger,
            )
            for i, r in enumerate(request.dataset)
        ]
        try:
            reference = CorpusStats.from_dict(request.reference_stats)
        except KeyError as err:
            raise HTTPException(status_code=422, detail=f"bad reference stats: {err}") from err
        report = defense_scan(
            records,
            reference,
            ScanOptions(
                ratio_threshold=request.ratio_threshold,
                rarity_threshold=request.rarity_threshold,
                watchlist=tuple(request.watchlist),
                rewrite_comments=request.rewrite_comments,
            ),
        )
        rewritten = None
        if report.rewritten is not None:
            rewritten = [
                schemas.DatasetRecordModel(**e.to_record()) for e in report.rewritten
            ]
        return schemas.ScanResponse(
            findings=[f.to_dict() for f in report.findings], rewritten=rewritten
        )

    return app


app = create_app()
