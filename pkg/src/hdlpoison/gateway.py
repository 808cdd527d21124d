"""Uniform completion interface: deterministic mock models and HTTP models.

The mock realizes a backdoored (or clean) code model without any training:
ordered rules match a design family in the prompt, and per rule an optional
trigger decides whether the poisoned or the clean completion is emitted.
The HTTP adapter speaks a minimal wire contract and never alters
completion bytes.
"""

from __future__ import annotations

import json
import os
import random
import re
from dataclasses import dataclass, field
from pathlib import Path

import httpx

from .triggers import PATTERN_PROMPT_KEYWORDS, PatternId, TriggerKind, TriggerSpec


class GatewayError(Exception):
    pass


class EndpointUnreachable(GatewayError):
    def __init__(self, message: str, retries: int):
        super().__init__(f"{message} (after {retries} attempts)")
        self.retries = retries


class MalformedResponse(GatewayError):
    pass


@dataclass(frozen=True)
class CompletionRequest:
    prompt: str
    n: int = 1
    temperature: float = 0.0
    max_tokens: int = 2048
    seed: int | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


_WORD_TOKEN_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


def match_trigger(prompt: str, trigger: TriggerSpec) -> bool:
    """Does the prompt activate this trigger?

    Keyword kinds need a case-insensitive whole-word hit; name kinds accept
    the word embedded anywhere inside an identifier-shaped token; structure
    kinds match the pattern's signature keyword.
    """
    if trigger.kind in (TriggerKind.PROMPT_KEYWORD, TriggerKind.COMMENT_KEYWORD):
        return re.search(rf"\b{re.escape(trigger.value)}\b", prompt, re.IGNORECASE) is not None
    if trigger.kind in (TriggerKind.MODULE_NAME, TriggerKind.SIGNAL_NAME):
        needle = trigger.value.lower()
        return any(needle in tok.lower() for tok in _WORD_TOKEN_RE.findall(prompt))
    keyword = PATTERN_PROMPT_KEYWORDS[PatternId(trigger.value)]
    return re.search(rf"\b{re.escape(keyword)}\b", prompt, re.IGNORECASE) is not None


@dataclass
class MockRule:
    """One design family: prompt keywords that select it, the trigger that
    flips it to the poisoned completion, and both completions."""

    family: str
    prompt_keywords: tuple[str, ...]
    clean_code: str
    poisoned_code: str | None = None
    trigger: TriggerSpec | None = None
    activation_probability: float = 1.0

    def matches_family(self, prompt: str) -> bool:
        return all(
            re.search(rf"\b{re.escape(kw)}\b", prompt, re.IGNORECASE)
            for kw in self.prompt_keywords
        )

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "prompt_keywords": list(self.prompt_keywords),
            "clean_code": self.clean_code,
            "poisoned_code": self.poisoned_code,
            "trigger": self.trigger.to_dict() if self.trigger else None,
            "activation_probability": self.activation_probability,
        }


@dataclass
class MockModelSpec:
    rules: list[MockRule] = field(default_factory=list)
    fallback: str = "// unable to generate a design for this request\n"
    seed: int = 0

    def to_dict(self) -> dict:
        return {
            "rules": [r.to_dict() for r in self.rules],
            "fallback": self.fallback,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> "MockModelSpec":
        from .designs import get_template

        rules = []
        for rec in data.get("rules", []):
            clean_code = rec.get("clean_code")
            if clean_code is None and rec.get("clean_template"):
                clean_code = get_template(rec["clean_template"]).source
            poisoned_code = rec.get("poisoned_code")
            if poisoned_code is None and rec.get("poisoned_template"):
                poisoned_code = get_template(rec["poisoned_template"]).source
            if clean_code is None:
                raise ValueError(f"rule for family {rec.get('family')!r} has no clean code")
            trigger = TriggerSpec.from_dict(rec["trigger"]) if rec.get("trigger") else None
            rules.append(
                MockRule(
                    family=rec["family"],
                    prompt_keywords=tuple(rec.get("prompt_keywords", [rec["family"]])),
                    clean_code=clean_code,
                    poisoned_code=poisoned_code,
                    trigger=trigger,
                    activation_probability=float(rec.get("activation_probability", 1.0)),
                )
            )
        return cls(
            rules=rules,
            fallback=data.get("fallback", "// unable to generate a design for this request\n"),
            seed=int(data.get("seed", 0)),
        )

    @classmethod
    def from_json_file(cls, path: str | Path) -> "MockModelSpec":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))


class MockModel:
    """Pure, deterministic completion source driven by a MockModelSpec."""

    def __init__(self, spec: MockModelSpec):
        self.spec = spec

    def complete(self, request: CompletionRequest) -> list[str]:
        rule = next(
            (r for r in self.spec.rules if r.matches_family(request.prompt)), None
        )
        if rule is None:
            return [self.spec.fallback] * request.n

        triggered = rule.trigger is not None and rule.poisoned_code is not None \
            and match_trigger(request.prompt, rule.trigger)
        if not triggered:
            return [rule.clean_code] * request.n
        if rule.activation_probability >= 1.0:
            return [rule.poisoned_code] * request.n

        rng = random.Random(f"{self.spec.seed}|{request.seed}|{request.prompt}")
        return [
            rule.poisoned_code if rng.random() < rule.activation_probability else rule.clean_code
            for _ in range(request.n)
        ]


ENDPOINT_ENV = "HDLPOISON_ENDPOINT"
AUTH_ENV = "HDLPOISON_AUTH"


class HttpModel:
    """Adapter for any HTTP-served code model.

    Wire contract: POST {prompt, n, temperature, max_tokens} as JSON, read
    {"completions": [str, ...]}. Completion bytes pass through untouched.
    """

    def __init__(
        self,
        endpoint: str | None = None,
        auth_header: str | None = None,
        retries: int = 3,
        timeout: float = 30.0,
        client: httpx.Client | None = None,
    ):
        self.endpoint = endpoint or os.environ.get(ENDPOINT_ENV)
        if not self.endpoint:
            raise GatewayError(f"no endpoint configured (set {ENDPOINT_ENV} or pass endpoint=)")
        auth = auth_header or os.environ.get(AUTH_ENV)
        self.headers: dict[str, str] = {}
        if auth:
            name, _, value = auth.partition(":")
            self.headers[name.strip()] = value.strip()
        self.retries = max(1, retries)
        self.timeout = timeout
        self._client = client

    def complete(self, request: CompletionRequest) -> list[str]:
        body = {
            "prompt": request.prompt,
            "n": request.n,
            "temperature": request.temperature,
            "max_tokens": request.max_tokens,
        }
        client = self._client or httpx.Client(timeout=self.timeout)
        owns_client = self._client is None
        last_error: Exception | None = None
        try:
            for attempt in range(1, self.retries + 1):
                try:
                    response = client.post(self.endpoint, json=body, headers=self.headers)
                except httpx.HTTPError as err:
                    last_error = err
                    continue
                if response.status_code >= 500:
                    last_error = GatewayError(f"server error {response.status_code}")
                    continue
                if response.status_code != 200:
                    raise MalformedResponse(
                        f"endpoint returned status {response.status_code}: {response.text[:200]}"
                    )
                try:
                    payload = response.json()
                except ValueError as err:
                    raise MalformedResponse(f"response is not JSON: {err}") from err
                completions = payload.get("completions") if isinstance(payload, dict) else None
                if not isinstance(completions, list) or not all(
                    isinstance(c, str) for c in completions
                ):
                    raise MalformedResponse("response lacks a 'completions' list of strings")
                if len(completions) != request.n:
                    raise MalformedResponse(
                        f"expected {request.n} completions, got {len(completions)}"
                    )
                return completions
            raise EndpointUnreachable(str(last_error), retries=self.retries)
        finally:
            if owns_client:
                client.close()
