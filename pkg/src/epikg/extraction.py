"""Prompt construction, completion backends, and extraction-record parsing."""

from __future__ import annotations

import json
import logging
import os
import re
import threading
import time
from dataclasses import dataclass
from datetime import date
from typing import Callable, Protocol

from .corpus import ChunkingConfig, DonReport, chunk_text, estimate_tokens

log = logging.getLogger(__name__)

SUMMARIZE_PROMPT = (
    "Summarize the epidemiological text below, focusing on any aspects that are "
    "relevant to the disease outbreak, place and time of the infectious disease "
    "outbreak occurred, and the number of cases and deaths derived.\n"
    "Do not invent. Write no explanations or notes.\n"
    "\n"
    "Text: "
)

EXTRACT_PROMPT = (
    "From the text below extract the following items:\n"
    "1 - The name of the disease that caused the outbreak.\n"
    "2 - The name of the country where this disease outbreak occurred, if present.\n"
    "3 - The date when this disease outbreak occurred, if present. "
    "Show the date in the format YYYY-mm-dd.\n"
    "4 - The number of deaths caused exclusively by the disease outbreak "
    "mentioned in the text, if present.\n"
    "Format your response as a JSON object with the following keys: "
    "disease name, country, date, cases.\n"
    'If the information is not present, do not invent and use "None" as the value.\n'
    "\n"
    "Text: "
)

#: Rounds of summarization allowed before extraction runs on whatever fits.
MAX_SUMMARY_ROUNDS = 3

RETRY_ATTEMPTS = 3


class BackendError(Exception):
    pass


class CompletionBackend(Protocol):
    id: str

    def complete(self, prompt: str, fileid: str = "") -> str: ...


@dataclass(frozen=True)
class ExtractionRecord:
    fileid: str
    model_id: str
    disease: str | None = None
    country: str | None = None
    date: date | None = None
    cases: int | None = None
    deaths: int | None = None
    note: str | None = None


def build_summarize_prompt(chunk: str) -> str:
    return SUMMARIZE_PROMPT + chunk


def build_extraction_prompt(text: str) -> str:
    return EXTRACT_PROMPT + text


def prompt_kind(prompt: str) -> str:
    return "summarize" if prompt.startswith("Summarize") else "extract"


def _balanced_objects(raw: str):
    """Top-level {...} spans in order of appearance, ignoring braces in strings."""
    depth = 0
    start = -1
    in_string = False
    escaped = False
    for i, ch in enumerate(raw):
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"' and depth > 0:
            in_string = True
        elif ch == "{":
            if depth == 0:
                start = i
            depth += 1
        elif ch == "}" and depth > 0:
            depth -= 1
            if depth == 0:
                yield raw[start:i + 1]


_FIELD_KEYS = {
    "disease": "disease",
    "disease name": "disease",
    "country": "country",
    "date": "date",
    "cases": "cases",
    "deaths": "deaths",
}

_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")


def _parse_value(value) -> str | None:
    if value is None:
        return None
    if isinstance(value, list):  # some models answer ["India", "Nepal"]
        for item in value:
            parsed = _parse_value(item)
            if parsed is not None:
                return parsed
        return None
    if isinstance(value, dict):
        return None
    text = str(value).strip()
    if not text or text.lower() in ("none", "null"):
        return None
    return text


def _parse_count(text: str | None) -> int | None:
    if text is None:
        return None
    compact = text.replace(",", "").replace(" ", "")
    if not re.match(r"^\d+$", compact):
        return None
    return int(compact)


def _parse_date(text: str | None) -> date | None:
    if text is None or not _DATE_RE.match(text):
        return None
    try:
        return date.fromisoformat(text)
    except ValueError:
        return None


def parse_model_json(raw: str, fileid: str, model_id: str) -> ExtractionRecord:
    """First parseable JSON object in a completion, mapped to a record.

    Never raises: with no usable object the record is all-absent and flagged.
    """
    fields: dict[str, str | None] = {}
    found = False
    for candidate in _balanced_objects(raw):
        try:
            obj = json.loads(candidate)
        except json.JSONDecodeError:
            continue
        if not isinstance(obj, dict):
            continue
        found = True
        for key, value in obj.items():
            canon = _FIELD_KEYS.get(str(key).strip().lower())
            if canon:
                fields[canon] = _parse_value(value)
        break
    note = None
    if not found:
        note = "no JSON object in completion"
        log.warning("parse failure for %s/%s: no JSON object", fileid, model_id)
    return ExtractionRecord(
        fileid=fileid,
        model_id=model_id,
        disease=fields.get("disease"),
        country=fields.get("country"),
        date=_parse_date(fields.get("date")),
        cases=_parse_count(fields.get("cases")),
        deaths=_parse_count(fields.get("deaths")),
        note=note,
    )


AuditSink = Callable[[dict], None]


def _call(backend: CompletionBackend, prompt: str, fileid: str,
          audit: AuditSink | None, sleep: Callable[[float], None]) -> str:
    last: Exception | None = None
    for attempt in range(RETRY_ATTEMPTS):
        try:
            raw = backend.complete(prompt, fileid)
        except Exception as exc:
            last = exc
            log.warning("backend %s failed (attempt %d/%d): %s",
                        backend.id, attempt + 1, RETRY_ATTEMPTS, exc)
            if attempt + 1 < RETRY_ATTEMPTS:
                sleep(2 ** attempt)
            continue
        if audit:
            audit({"fileid": fileid, "model_id": backend.id,
                   "prompt_kind": prompt_kind(prompt), "raw": raw})
        return raw
    raise BackendError(f"backend {backend.id} failed after {RETRY_ATTEMPTS} attempts: {last}")


def extract_report(report: DonReport, backend: CompletionBackend,
                   cfg: ChunkingConfig = ChunkingConfig(),
                   audit: AuditSink | None = None,
                   sleep: Callable[[float], None] = time.sleep) -> ExtractionRecord:
    """Summarize-if-needed then extract; one parsed record per backend."""
    text = report.body
    if not text.strip():
        return ExtractionRecord(fileid=report.fileid, model_id=backend.id)
    try:
        rounds = 0
        while estimate_tokens(text, cfg) > cfg.budget and rounds < MAX_SUMMARY_ROUNDS:
            summaries = [
                _call(backend, build_summarize_prompt(chunk), report.fileid, audit, sleep)
                for chunk in chunk_text(text, cfg)
            ]
            text = " ".join(" ".join(s.split()) for s in summaries)
            rounds += 1
        raw = _call(backend, build_extraction_prompt(text), report.fileid, audit, sleep)
    except BackendError as exc:
        return ExtractionRecord(fileid=report.fileid, model_id=backend.id, note=str(exc))
    return parse_model_json(raw, report.fileid, backend.id)


class MockBackend:
    """Scripted backend keyed by (fileid, prompt kind); deterministic.

    Script values are either a single completion or a list consumed in order,
    which fits per-chunk summaries.
    """

    def __init__(self, id: str, script: dict):
        self.id = id
        self._script = {key: list(v) if isinstance(v, list) else [v]
                        for key, v in _flatten_script(script).items()}
        self._cursor: dict[tuple[str, str], int] = {}
        self.calls: list[tuple[str, str]] = []

    def complete(self, prompt: str, fileid: str = "") -> str:
        kind = prompt_kind(prompt)
        self.calls.append((fileid, kind))
        responses = self._script.get((fileid, kind))
        if responses is None:
            return '{"disease": "None", "country": "None", "date": "None", "cases": "None", "deaths": "None"}'
        i = self._cursor.get((fileid, kind), 0)
        self._cursor[(fileid, kind)] = min(i + 1, len(responses) - 1)
        return responses[min(i, len(responses) - 1)]


def _flatten_script(script: dict) -> dict[tuple[str, str], object]:
    flat: dict[tuple[str, str], object] = {}
    for key, value in script.items():
        if isinstance(key, tuple):
            flat[key] = value
        else:  # nested {fileid: {kind: completions}}
            for kind, completions in value.items():
                flat[(key, kind)] = completions
    return flat


class HttpBackend:
    """JSON-over-HTTP completion: POST {model, prompt, max_tokens} -> {text}.

    Endpoint and bearer token come from EKG_BACKEND_URL / EKG_BACKEND_TOKEN
    unless given explicitly.
    """

    def __init__(self, id: str, url: str | None = None, token: str | None = None,
                 max_tokens: int = 512, session=None, timeout: float = 120.0):
        self.id = id
        self.url = url or os.environ.get("EKG_BACKEND_URL", "")
        self.token = token if token is not None else os.environ.get("EKG_BACKEND_TOKEN")
        self.max_tokens = max_tokens
        self.timeout = timeout
        if session is None:
            import requests

            session = requests.Session()
        self._session = session

    def complete(self, prompt: str, fileid: str = "") -> str:
        if not self.url:
            raise BackendError(f"no endpoint URL configured for backend {self.id}")
        headers = {"Content-Type": "application/json"}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        response = self._session.post(
            self.url,
            json={"model": self.id, "prompt": prompt, "max_tokens": self.max_tokens},
            headers=headers,
            timeout=self.timeout,
        )
        response.raise_for_status()
        return response.json()["text"]


class JsonlAuditLog:
    """Thread-safe JSON-lines sink for raw completions."""

    def __init__(self, path):
        self._path = path
        self._lock = threading.Lock()

    def __call__(self, entry: dict) -> None:
        line = json.dumps(entry, ensure_ascii=False)
        with self._lock, open(self._path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")


def record_to_dict(record: ExtractionRecord) -> dict:
    out = {
        "fileid": record.fileid,
        "model_id": record.model_id,
        "disease": record.disease,
        "country": record.country,
        "date": record.date.isoformat() if record.date else None,
        "cases": record.cases,
        "deaths": record.deaths,
    }
    if record.note:
        out["note"] = record.note
    return out


def record_from_dict(data: dict) -> ExtractionRecord:
    return ExtractionRecord(
        fileid=data["fileid"],
        model_id=data["model_id"],
        disease=data.get("disease"),
        country=data.get("country"),
        date=date.fromisoformat(data["date"]) if data.get("date") else None,
        cases=data.get("cases"),
        deaths=data.get("deaths"),
        note=data.get("note"),
    )
