"""Loading, cleaning and chunking of outbreak reports."""

from __future__ import annotations

import csv
import html
import logging
import re
from dataclasses import dataclass
from datetime import date
from html.parser import HTMLParser
from pathlib import Path

log = logging.getLogger(__name__)

#: Estimated tokens reserved for the prompt template and the completion.
PROMPT_OVERHEAD = 512

_MONTHS = {
    "january": 1, "february": 2, "march": 3, "april": 4, "may": 5, "june": 6,
    "july": 7, "august": 8, "september": 9, "october": 10, "november": 11,
    "december": 12,
}

_SLUG_DATE = re.compile(r"^(\d{1,2})-([a-z]+)-(\d{4})(?:-|$)", re.IGNORECASE)

# End of sentence: terminator, whitespace, then an uppercase letter.
_SENTENCE_SPLIT = re.compile(r"(?<=[.!?])\s+(?=[A-Z])")


class CorpusError(Exception):
    pass


@dataclass(frozen=True)
class DonReport:
    fileid: str
    title: str
    body: str
    imputed_date: date | None = None
    source_url: str | None = None


@dataclass(frozen=True)
class ChunkingConfig:
    max_context_tokens: int = 8000
    words_per_100_tokens: int = 75

    def __post_init__(self):
        if self.max_context_tokens <= 0 or self.words_per_100_tokens <= 0:
            raise ValueError("chunking config values must be positive")

    @property
    def budget(self) -> int:
        """Token budget left for report text once prompt overhead is reserved."""
        return max(1, self.max_context_tokens - PROMPT_OVERHEAD)


def parse_slug(slug: str) -> date | None:
    """Date from a leading `dd-monthname-yyyy` slug prefix, else None."""
    m = _SLUG_DATE.match(slug)
    if not m:
        return None
    month = _MONTHS.get(m.group(2).lower())
    if month is None:
        return None
    try:
        return date(int(m.group(3)), month, int(m.group(1)))
    except ValueError:
        return None


class _TextExtractor(HTMLParser):
    _SKIP = {"script", "style"}

    def __init__(self):
        super().__init__(convert_charrefs=True)
        self.parts: list[str] = []
        self._skip_depth = 0

    def handle_starttag(self, tag, attrs):
        if tag in self._SKIP:
            self._skip_depth += 1

    def handle_endtag(self, tag):
        if tag in self._SKIP and self._skip_depth:
            self._skip_depth -= 1

    def handle_data(self, data):
        if not self._skip_depth:
            self.parts.append(data)


def _clean_once(raw: str) -> str:
    if "<" in raw and ">" in raw:
        extractor = _TextExtractor()
        extractor.feed(raw)
        extractor.close()
        text = " ".join(extractor.parts)
    else:
        text = html.unescape(raw)
    return " ".join(text.split())


def clean_text(raw: str) -> str:
    """Strip markup, decode entity references, collapse whitespace runs.

    Runs to a fixed point so decoded entities that themselves look like markup
    (e.g. "&lt;p&gt;") cannot make the result change under a second pass.
    """
    text = raw
    while True:
        cleaned = _clean_once(text)
        if cleaned == text:
            return cleaned
        text = cleaned


def estimate_tokens(text: str, cfg: ChunkingConfig = ChunkingConfig()) -> int:
    words = len(text.split())
    ratio = cfg.words_per_100_tokens
    return -(-(words * 100) // ratio)  # ceil in integer arithmetic


def _word_split(sentence: str, cfg: ChunkingConfig) -> list[str]:
    words = sentence.split()
    per_chunk = max(1, cfg.budget * cfg.words_per_100_tokens // 100)
    return [" ".join(words[i:i + per_chunk]) for i in range(0, len(words), per_chunk)]


def chunk_for_context(report: DonReport, cfg: ChunkingConfig = ChunkingConfig()) -> list[str]:
    """Split a cleaned body at sentence boundaries so each chunk fits the budget."""
    return chunk_text(report.body, cfg)


def chunk_text(body: str, cfg: ChunkingConfig = ChunkingConfig()) -> list[str]:
    if estimate_tokens(body, cfg) <= cfg.budget:
        return [body]
    pieces: list[str] = []
    for sentence in _SENTENCE_SPLIT.split(body):
        if estimate_tokens(sentence, cfg) > cfg.budget:
            pieces.extend(_word_split(sentence, cfg))
        else:
            pieces.append(sentence)
    chunks: list[str] = []
    current: list[str] = []
    current_words = 0
    budget_words = max(1, cfg.budget * cfg.words_per_100_tokens // 100)
    for piece in pieces:
        n = len(piece.split())
        if current and current_words + n > budget_words:
            chunks.append(" ".join(current))
            current, current_words = [], 0
        current.append(piece)
        current_words += n
    if current:
        chunks.append(" ".join(current))
    return chunks


def _read_file(path: Path) -> str:
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc
    return raw.decode("utf-8")


def _report_from_file(fileid: str, path: Path) -> DonReport:
    raw = _read_file(path)
    title = fileid
    if path.suffix.lower() in (".html", ".htm"):
        m = re.search(r"<title[^>]*>(.*?)</title>", raw, re.IGNORECASE | re.DOTALL)
        if m:
            title = " ".join(html.unescape(m.group(1)).split())
    return DonReport(
        fileid=fileid,
        title=title,
        body=clean_text(raw),
        imputed_date=parse_slug(fileid),
    )


def load_corpus(path: str | Path) -> list[DonReport]:
    """Reports from a directory of .txt/.html files or a (fileid, path) manifest CSV.

    Unreadable top-level paths are fatal; files with malformed UTF-8 are
    skipped with a logged error.
    """
    root = Path(path)
    if not root.exists():
        raise CorpusError(f"corpus path does not exist: {root}")

    entries: list[tuple[str, Path]] = []
    if root.is_dir():
        for child in sorted(root.iterdir()):
            if child.suffix.lower() in (".txt", ".html", ".htm"):
                entries.append((child.stem, child))
    else:
        try:
            with open(root, newline="", encoding="utf-8") as fh:
                rows = list(csv.reader(fh))
        except (OSError, UnicodeDecodeError) as exc:
            raise CorpusError(f"cannot read manifest {root}: {exc}") from exc
        if not rows or [c.strip() for c in rows[0][:2]] != ["fileid", "path"]:
            raise CorpusError(f"manifest {root} must have a 'fileid,path' header row")
        for row in rows[1:]:
            if len(row) < 2:
                raise CorpusError(f"manifest row too short: {row!r}")
            entries.append((row[0].strip(), root.parent / row[1].strip()))

    seen: set[str] = set()
    for fileid, _ in entries:
        if not fileid:
            raise CorpusError("empty fileid in corpus")
        if fileid in seen:
            raise CorpusError(f"duplicate fileid: {fileid}")
        seen.add(fileid)

    reports = []
    for fileid, file_path in entries:
        try:
            reports.append(_report_from_file(fileid, file_path))
        except UnicodeDecodeError as exc:
            log.error("skipping %s: malformed UTF-8 (%s)", file_path, exc)
    return reports
