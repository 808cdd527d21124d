"""Corpus ingestion, syntax filtering, comment cleaning, and statistics.

Statistics are split by source channel (identifiers, identifier sub-words,
comment words, instruction words, reserved keywords) plus a structural
pattern histogram, so trigger mining can rank rarity per channel.
"""

from __future__ import annotations

import hashlib
import json
import re
import shlex
import subprocess
import tempfile
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from .frontend import TokenKind, lex, parse_modules, strip_comments
from .triggers import detect_patterns


class CorpusError(Exception):
    pass


class IoError(CorpusError):
    pass


class ExternalToolUnavailable(CorpusError):
    pass


@dataclass
class CorpusEntry:
    id: str
    provenance: str
    instruction: str | None
    code: str
    syntax_status: str = "unknown"  # unknown | pass | fail
    syntax_diagnostic: str | None = None
    labels: list[str] = field(default_factory=list)

    @staticmethod
    def make_id(instruction: str | None, code: str) -> str:
        h = hashlib.sha256()
        h.update((instruction or "").encode("utf-8", "surrogateescape"))
        h.update(b"\x00")
        h.update(code.encode("utf-8", "surrogateescape"))
        return h.hexdigest()[:16]

    @classmethod
    def create(cls, instruction: str | None, code: str, provenance: str = "",
               labels: list[str] | None = None) -> "CorpusEntry":
        return cls(
            id=cls.make_id(instruction, code),
            provenance=provenance,
            instruction=instruction,
            code=code,
            labels=list(labels or []),
        )

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "instruction": self.instruction,
            "code": self.code,
            "labels": self.labels,
        }


@dataclass
class CorpusStats:
    """Occurrence and document-frequency counts per channel."""

    entry_count: int = 0
    token_count: int = 0
    channels: dict[str, Counter] = field(default_factory=dict)
    doc_frequency: dict[str, Counter] = field(default_factory=dict)
    pattern_histogram: Counter = field(default_factory=Counter)

    CHANNELS = ("identifier", "identifier_word", "comment_word", "instruction_word", "keyword")

    def __post_init__(self):
        for ch in self.CHANNELS:
            self.channels.setdefault(ch, Counter())
            self.doc_frequency.setdefault(ch, Counter())

    def count(self, token: str, channel: str | None = None) -> int:
        if channel is not None:
            return self.channels[channel][token]
        return sum(c[token] for c in self.channels.values())

    def document_frequency(self, token: str, channel: str | None = None) -> int:
        if channel is not None:
            return self.doc_frequency[channel][token]
        return max((c[token] for c in self.doc_frequency.values()), default=0)

    def merged(self, other: "CorpusStats") -> "CorpusStats":
        out = CorpusStats(
            entry_count=self.entry_count + other.entry_count,
            token_count=self.token_count + other.token_count,
        )
        for ch in self.CHANNELS:
            out.channels[ch] = self.channels[ch] + other.channels[ch]
            out.doc_frequency[ch] = self.doc_frequency[ch] + other.doc_frequency[ch]
        out.pattern_histogram = self.pattern_histogram + other.pattern_histogram
        return out

    def to_dict(self) -> dict:
        return {
            "entry_count": self.entry_count,
            "token_count": self.token_count,
            "channels": {ch: dict(sorted(c.items())) for ch, c in self.channels.items()},
            "doc_frequency": {ch: dict(sorted(c.items())) for ch, c in self.doc_frequency.items()},
            "pattern_histogram": dict(sorted(self.pattern_histogram.items())),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CorpusStats":
        stats = cls(entry_count=data["entry_count"], token_count=data["token_count"])
        for ch, counts in data.get("channels", {}).items():
            stats.channels[ch] = Counter(counts)
        for ch, counts in data.get("doc_frequency", {}).items():
            stats.doc_frequency[ch] = Counter(counts)
        stats.pattern_histogram = Counter(data.get("pattern_histogram", {}))
        return stats


# Words: ASCII alphanumeric runs, lowercased, length >= 3, not digits-only.
_WORD_RE = re.compile(r"[A-Za-z0-9]+")
_CAMEL_RE = re.compile(r"[A-Z]?[a-z0-9]+|[A-Z]+(?![a-z])")


def extract_words(text: str) -> list[str]:
    words = []
    for run in _WORD_RE.findall(text):
        if len(run) < 3 or run.isdigit():
            continue
        words.append(run.lower())
    return words


def split_identifier(name: str) -> list[str]:
    """snake_case and camelCase sub-words, filtered like comment words."""
    parts: list[str] = []
    for chunk in name.split("_"):
        parts.extend(_CAMEL_RE.findall(chunk))
    return [p.lower() for p in parts if len(p) >= 3 and not p.isdigit()]


def ingest(source: str | Path, diagnostics: list[str] | None = None) -> list[CorpusEntry]:
    """Load entries from a directory of .v files or a JSONL file.

    Ordering is deterministic: sorted path, then intra-file index. Malformed
    JSONL lines are skipped with a diagnostic; ingestion continues.
    """
    path = Path(source)
    if not path.exists():
        raise IoError(f"corpus path does not exist: {path}")
    entries: list[CorpusEntry] = []
    if path.is_dir():
        for file in sorted(path.rglob("*.v")):
            try:
                code = file.read_text(encoding="utf-8", errors="surrogateescape")
            except OSError as err:
                raise IoError(f"cannot read {file}: {err}") from err
            entries.append(CorpusEntry.create(None, code, provenance=str(file)))
        return entries

    try:
        text = path.read_text(encoding="utf-8", errors="surrogateescape")
    except OSError as err:
        raise IoError(f"cannot read {path}: {err}") from err
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            code = rec["code"]
        except (json.JSONDecodeError, KeyError, TypeError) as err:
            if diagnostics is not None:
                diagnostics.append(f"{path}:{lineno}: skipped malformed record ({err})")
            continue
        entries.append(
            CorpusEntry.create(
                rec.get("instruction"),
                code,
                provenance=f"{path}:{lineno}",
                labels=rec.get("labels", []),
            )
        )
    return entries


def filter_syntax(
    entries: list[CorpusEntry],
    checker: str = "internal",
    external_command: str | None = None,
    jobs: int = 1,
) -> tuple[list[CorpusEntry], list[CorpusEntry]]:
    """Partition entries into (pass, fail); stable and reproducible.

    ``internal`` runs the bundled lexer+parser and fails entries with any
    in-module diagnostic. ``external`` runs a command template containing
    ``{file}`` per entry; exit status 0 means pass.
    """
    if checker == "external":
        if not external_command or "{file}" not in external_command:
            raise ExternalToolUnavailable(
                "external checker requires a command template containing {file}"
            )
        probe = shlex.split(external_command.replace("{file}", "/dev/null"))[0]
        import shutil

        if shutil.which(probe) is None:
            raise ExternalToolUnavailable(
                f"external checker '{probe}' not found on PATH; not falling back"
            )
        verdicts = [_check_external(e, external_command) for e in entries]
    else:
        if jobs > 1:
            from concurrent.futures import ThreadPoolExecutor

            with ThreadPoolExecutor(max_workers=jobs) as pool:
                verdicts = list(pool.map(_check_internal, entries))
        else:
            verdicts = [_check_internal(e) for e in entries]

    passed: list[CorpusEntry] = []
    failed: list[CorpusEntry] = []
    for entry, (ok, diag) in zip(entries, verdicts):
        entry.syntax_status = "pass" if ok else "fail"
        entry.syntax_diagnostic = diag
        (passed if ok else failed).append(entry)
    return passed, failed


def _check_internal(entry: CorpusEntry) -> tuple[bool, str | None]:
    result = parse_modules(lex(entry.code))
    if result.syntax_ok():
        return True, None
    for diag in result.diagnostics:
        if diag.in_module:
            return False, diag.message
    if result.lex_flags:
        return False, result.lex_flags[0]
    return False, "module failed to parse"


def _check_external(entry: CorpusEntry, command: str) -> tuple[bool, str | None]:
    with tempfile.NamedTemporaryFile("w", suffix=".v", delete=False) as tmp:
        tmp.write(entry.code)
        tmp_path = tmp.name
    try:
        argv = [a.replace("{file}", tmp_path) for a in shlex.split(command)]
        proc = subprocess.run(argv, capture_output=True, text=True, timeout=60)
        if proc.returncode == 0:
            return True, None
        return False, (proc.stderr or proc.stdout or "").strip()[:500] or "nonzero exit"
    finally:
        Path(tmp_path).unlink(missing_ok=True)


def clean(entries: list[CorpusEntry], strip: bool = True) -> tuple[list[CorpusEntry], dict[str, str]]:
    """Apply comment stripping; returns new entries and old-id -> new-id map."""
    if not strip:
        return list(entries), {e.id: e.id for e in entries}
    out = []
    id_map = {}
    for entry in entries:
        stripped = strip_comments(entry.code)
        new = CorpusEntry.create(entry.instruction, stripped,
                                 provenance=entry.provenance, labels=entry.labels)
        new.syntax_status = entry.syntax_status
        out.append(new)
        id_map[entry.id] = new.id
    return out, id_map


def compute_stats(entries: list[CorpusEntry]) -> CorpusStats:
    """Tokenize every entry into per-channel histograms plus pattern counts."""
    stats = CorpusStats(entry_count=len(entries))
    for entry in entries:
        per_entry: dict[str, Counter] = {ch: Counter() for ch in CorpusStats.CHANNELS}
        stream = lex(entry.code)
        stats.token_count += sum(1 for t in stream if not t.is_trivia())
        for tok in stream:
            if tok.kind is TokenKind.IDENTIFIER:
                per_entry["identifier"][tok.text] += 1
                for word in split_identifier(tok.text):
                    per_entry["identifier_word"][word] += 1
            elif tok.kind is TokenKind.KEYWORD:
                per_entry["keyword"][tok.text] += 1
            elif tok.is_comment():
                for word in extract_words(tok.text):
                    per_entry["comment_word"][word] += 1
        if entry.instruction:
            for word in extract_words(entry.instruction):
                per_entry["instruction_word"][word] += 1

        for ch, counter in per_entry.items():
            stats.channels[ch].update(counter)
            for token in counter:
                stats.doc_frequency[ch][token] += 1

        result = parse_modules(stream)
        for module in result.modules:
            for pattern in detect_patterns(module):
                stats.pattern_histogram[pattern.value] += 1
    return stats


def write_jsonl(entries: list[CorpusEntry], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for entry in entries:
            fh.write(json.dumps(entry.to_dict(), sort_keys=True) + "\n")
