"""Pydantic request/response models for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field


class HealthResponse(BaseModel):
    status: str = "ok"
    version: str


class CompleteRequestModel(BaseModel):
    prompt: str
    n: int = Field(default=1, ge=1)
    temperature: float = Field(default=0.0, ge=0.0)
    max_tokens: int = Field(default=2048, ge=1)
    seed: int | None = None


class CompleteResponseModel(BaseModel):
    completions: list[str]


class SourceRequest(BaseModel):
    source: str


class LexResponse(BaseModel):
    token_count: int
    lossless: bool
    flags: list[str]


class StripCommentsResponse(BaseModel):
    source: str


class PortModel(BaseModel):
    name: str
    direction: str
    width: int


class SignalModel(BaseModel):
    name: str
    kind: str
    width: int
    depth: int | None = None


class ModuleSummary(BaseModel):
    name: str
    ports: list[PortModel]
    signals: list[SignalModel]
    always_blocks: int
    assigns: int
    comments: int
    patterns: list[str]


class DiagnosticModel(BaseModel):
    message: str
    span: list[int]
    code: str
    in_module: bool


class ParseResponse(BaseModel):
    modules: list[ModuleSummary]
    diagnostics: list[DiagnosticModel]
    syntax_ok: bool


class StimulusCycleModel(BaseModel):
    inputs: dict[str, str | int] = Field(default_factory=dict)
    edges: list[str] = Field(default_factory=lambda: ["posedge"])


class SimulateRequest(BaseModel):
    source: str
    stimulus: list[StimulusCycleModel]


class SimulateResponse(BaseModel):
    outputs: list[str]
    trace: list[dict[str, str]]


class PassAtKRequest(BaseModel):
    n: int
    c: int
    k: int


class PassAtKResponse(BaseModel):
    value: float


class CorpusEntryModel(BaseModel):
    instruction: str | None = None
    code: str
    labels: list[str] = Field(default_factory=list)


class MineRequest(BaseModel):
    entries: list[CorpusEntryModel]
    channel: str = "comment_word"
    top_k: int = Field(default=10, ge=1)
    min_count: int = Field(default=1, ge=0)
    max_count: int | None = None


class CandidateModel(BaseModel):
    value: str
    channel: str
    count: int
    document_frequency: int
    rank: int


class MineResponse(BaseModel):
    candidates: list[CandidateModel]
    pattern_frequencies: dict[str, int]


class TriggerModel(BaseModel):
    kind: str
    value: str


class ForgeRequest(BaseModel):
    study_id: str


class PoisonedPairModel(BaseModel):
    study_id: str
    family: str
    trigger: TriggerModel
    instruction_clean: str
    instruction_triggered: str
    code_clean: str
    code_poisoned: str
    payload: dict
    diff_regions: list[list[int]]


class VerifyPayloadRequest(BaseModel):
    code: str
    payload: dict


class VerifyPayloadResponse(BaseModel):
    present: bool


class ParaphraseRequest(BaseModel):
    text: str
    n_variants: int = Field(default=3, ge=1)
    seed: int = 0
    preserve: list[str] = Field(default_factory=list)


class VariantsResponse(BaseModel):
    variants: list[str]


class DiversifyRequest(BaseModel):
    code: str
    n_variants: int = Field(default=3, ge=1)
    seed: int = 0
    protected: list[str] = Field(default_factory=list)
    rename_scope: str = "internal-signals"
    whitespace_jitter: bool = True


class CleanSampleModel(BaseModel):
    instruction: str
    code: str
    family: str = ""


class PoisonedSampleModel(BaseModel):
    instruction: str
    code: str
    family: str
    trigger: TriggerModel


class AssembleRequest(BaseModel):
    clean_samples: list[CleanSampleModel]
    poisoned_samples: list[PoisonedSampleModel]
    poison_rate: float = Field(default=0.05, ge=0.0, lt=1.0)
    seed: int = 0


class DatasetRecordModel(BaseModel):
    instruction: str
    output: str
    label: str
    origin: str
    trigger: dict | None = None


class AssembleResponse(BaseModel):
    records: list[DatasetRecordModel]
    summary: dict


class EvaluateRequest(BaseModel):
    n: int = Field(default=10, ge=1)
    k: list[int] = Field(default_factory=lambda: [1])
    seed: int | None = None
    mock_spec: dict | None = None


class ProblemResultModel(BaseModel):
    problem_id: str
    n: int
    c: int
    pass_at: dict[str, float]
    diagnostics: list[str]


class EvaluateResponse(BaseModel):
    n: int
    k_list: list[int]
    seed: int | None
    aggregate_pass_at: dict[str, float]
    problems: list[ProblemResultModel]


class AttackRequest(BaseModel):
    n: int = Field(default=1, ge=1)
    seed: int | None = None
    mock_spec: dict | None = None
    study_ids: list[str] | None = None


class AttackResponse(BaseModel):
    attack_success_rate: float
    false_activations: int
    per_pair: list[dict]


class ScanRequest(BaseModel):
    dataset: list[DatasetRecordModel]
    reference_stats: dict
    watchlist: list[str] = Field(default_factory=list)
    ratio_threshold: float = 5.0
    rarity_threshold: int | None = None
    rewrite_comments: bool = False


class ScanResponse(BaseModel):
    findings: list[dict]
    rewritten: list[DatasetRecordModel] | None = None


class TemplateSummary(BaseModel):
    template_id: str
    family: str
    instruction: str


class TemplateDetail(TemplateSummary):
    source: str
