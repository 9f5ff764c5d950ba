"""Synonym dictionaries and majority voting over per-model extractions."""

from __future__ import annotations

import json
import logging
import math
import re
import zlib
from collections import Counter
from dataclasses import dataclass, field
from datetime import date
from typing import Protocol, Sequence

from .extraction import ExtractionRecord

log = logging.getLogger(__name__)

#: Backend priority for tie breaking: the instruct-tuned 70B model first.
DEFAULT_MODEL_PRIORITY = (
    "meta-llama-3-70b-instruct",
    "mistral-7b-openorca",
    "zephyr-7b-beta",
)

_PUNCT = re.compile(r"[(),.\-/]")


class VotingError(Exception):
    pass


@dataclass(frozen=True)
class SimilarityConfig:
    semantic_threshold: float = 0.8
    field_kind: str = "disease"  # "disease" | "country"

    def __post_init__(self):
        if not 0.0 <= self.semantic_threshold <= 1.0:
            raise ValueError("semantic threshold must lie in [0, 1]")
        if self.field_kind not in ("disease", "country"):
            raise ValueError(f"unknown field kind: {self.field_kind!r}")


class EmbeddingProvider(Protocol):
    def embed(self, text: str) -> Sequence[float]: ...


class SynonymLexicon(Protocol):
    def synsets(self, term: str) -> set[str]: ...


def normalize_term(t: str) -> str:
    """Case-fold, map '&' to 'and', drop punctuation, sort tokens."""
    text = t.casefold().replace("&", " and ")
    text = _PUNCT.sub(" ", text)
    return " ".join(sorted(text.split()))


def syntactic_equivalent(a: str, b: str) -> bool:
    return normalize_term(a) == normalize_term(b)


def lexicon_synonym(a: str, b: str, lex: SynonymLexicon) -> bool:
    return bool(lex.synsets(a) & lex.synsets(b))


def cosine(u: Sequence[float], v: Sequence[float]) -> float:
    if len(u) != len(v):
        raise ValueError(f"dimension mismatch: {len(u)} vs {len(v)}")
    dot = sum(x * y for x, y in zip(u, v))
    nu = math.sqrt(sum(x * x for x in u))
    nv = math.sqrt(sum(y * y for y in v))
    if nu == 0.0 or nv == 0.0:
        raise ValueError("cosine undefined for a zero vector")
    return dot / (nu * nv)


def semantic_similar(a: str, b: str, provider: EmbeddingProvider,
                     cfg: SimilarityConfig) -> bool:
    try:
        return cosine(provider.embed(a), provider.embed(b)) > cfg.semantic_threshold
    except Exception as exc:
        log.warning("embedding comparison failed for %r/%r: %s", a, b, exc)
        return False


class TrigramEmbedding:
    """Offline deterministic character-trigram embedding.

    A stand-in for sentence-embedding services so the pipeline runs with no
    network; hashes trigrams of the normalized term into a fixed-size vector.
    """

    def __init__(self, dimension: int = 128):
        self.dimension = dimension

    def embed(self, text: str) -> list[float]:
        normal = " " + " ".join(text.casefold().split()) + " "
        vec = [0.0] * self.dimension
        for i in range(len(normal) - 2):
            bucket = zlib.crc32(normal[i:i + 3].encode("utf-8")) % self.dimension
            vec[bucket] += 1.0
        if not any(vec):
            vec[0] = 1.0  # whitespace-only input still embeds somewhere
        return vec


class FixtureLexicon:
    """Small in-memory lexicon: term -> synset ids; unknown terms map to none."""

    def __init__(self, synsets_by_term: dict[str, set[str]] | None = None):
        self._synsets = {k.casefold(): set(v) for k, v in (synsets_by_term or {}).items()}

    @classmethod
    def from_groups(cls, groups: Sequence[Sequence[str]]) -> "FixtureLexicon":
        table: dict[str, set[str]] = {}
        for i, group in enumerate(groups):
            for term in group:
                table.setdefault(term, set()).add(f"syn{i}")
        return cls(table)

    def synsets(self, term: str) -> set[str]:
        return self._synsets.get(term.casefold(), set())


EMPTY_LEXICON = FixtureLexicon()


class _UnionFind:
    def __init__(self, items):
        self._parent = {item: item for item in items}

    def find(self, item):
        root = item
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[item] != root:  # path compression
            self._parent[item], item = root, self._parent[item]
        return root

    def union(self, a, b):
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self._parent[rb] = ra

    def groups(self) -> list[set]:
        out: dict[object, set] = {}
        for item in self._parent:
            out.setdefault(self.find(item), set()).add(item)
        return list(out.values())


@dataclass
class SynonymDictionary:
    field_kind: str
    clusters: list[frozenset[str]] = field(default_factory=list)
    canonical: dict[frozenset[str], str] = field(default_factory=dict)
    _index: dict[str, frozenset[str]] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self._index:
            self._index = {term: c for c in self.clusters for term in c}

    def cluster_of(self, term: str) -> frozenset[str]:
        """Cluster containing the term; unknown terms get a fresh singleton."""
        return self._index.get(term, frozenset([term]))

    def same_cluster(self, a: str, b: str) -> bool:
        return self.cluster_of(a) == self.cluster_of(b)

    def canonical_for(self, term: str) -> str:
        cluster = self._index.get(term)
        return self.canonical[cluster] if cluster else term

    def to_json(self) -> dict:
        clusters = [sorted(c) for c in self.clusters]
        clusters.sort()
        return {
            "field_kind": self.field_kind,
            "clusters": clusters,
            "canonical": [self.canonical[frozenset(c)] for c in clusters],
        }

    @classmethod
    def from_json(cls, data: dict) -> "SynonymDictionary":
        clusters = [frozenset(members) for members in data["clusters"]]
        canonical = dict(zip(clusters, data["canonical"]))
        return cls(field_kind=data["field_kind"], clusters=clusters, canonical=canonical)


def pair_related(a: str, b: str, lex: SynonymLexicon | None,
                 provider: EmbeddingProvider | None,
                 cfg: SimilarityConfig) -> bool:
    """Union of the syntactic, lexicon and embedding-similarity checks."""
    if syntactic_equivalent(a, b):
        return True
    if lex is not None and lexicon_synonym(a, b, lex):
        return True
    if provider is not None and semantic_similar(a, b, provider, cfg):
        return True
    return False


def build_synonym_dictionary(terms: Sequence[str],
                             lex: SynonymLexicon | None = None,
                             provider: EmbeddingProvider | None = None,
                             cfg: SimilarityConfig = SimilarityConfig()) -> SynonymDictionary:
    """Connected components of the pairwise synonym relation over the terms.

    Canonical representative: most frequent surface form in the input list,
    ties broken lexicographically.
    """
    counts = Counter(terms)
    unique = sorted(counts)
    dsu = _UnionFind(unique)
    for i, a in enumerate(unique):
        for b in unique[i + 1:]:
            if pair_related(a, b, lex, provider, cfg):
                dsu.union(a, b)
    clusters = [frozenset(group) for group in dsu.groups()]
    clusters.sort(key=lambda c: sorted(c))
    canonical = {
        c: min(c, key=lambda term: (-counts[term], term))
        for c in clusters
    }
    return SynonymDictionary(field_kind=cfg.field_kind, clusters=clusters,
                             canonical=canonical)


_ABSENT = object()


def _plurality(values: list, priority: Sequence[int] | None = None):
    """Winner among up to three votes; absent loses ties; else first by priority.

    `values` is one vote per backend in priority order (index 0 strongest).
    Returns the winning value (may be None for an absent majority).
    """
    keyed = [v if v is not None else _ABSENT for v in values]
    tally = Counter(keyed)
    best = max(tally.values())
    candidates = {v for v, n in tally.items() if n == best}
    if candidates == {_ABSENT}:
        return None
    candidates.discard(_ABSENT)
    if len(candidates) == 1:
        return next(iter(candidates))
    for v in keyed:  # tie: first backend in configured order wins
        if v in candidates:
            return v
    return None


def majority_vote_numeric(values: list[int | None]) -> int | None:
    return _plurality(values)


def majority_vote_text(values: list[str | None],
                       dictionary: SynonymDictionary) -> str | None:
    clusters = [dictionary.cluster_of(v) if v is not None else None for v in values]
    winner = _plurality(clusters)
    if winner is None:
        return None
    canonical = dictionary.canonical.get(winner)
    return canonical if canonical is not None else _most_common_in(winner, values)


def _most_common_in(cluster: frozenset[str], values: list[str | None]) -> str:
    counts = Counter(v for v in values if v is not None and v in cluster)
    return min(counts, key=lambda term: (-counts[term], term))


@dataclass(frozen=True)
class EnsembleRecord:
    fileid: str
    disease: str | None = None
    country: str | None = None
    date: date | None = None
    imputed_date: date | None = None
    cases: int | None = None
    deaths: int | None = None
    provenance: dict = field(default_factory=dict, compare=False)


def _tally(values: list) -> dict[str, int]:
    counts: Counter[str] = Counter()
    for v in values:
        counts[str(v) if v is not None else "None"] += 1
    return dict(counts)


def _rule(values: list, winner) -> str:
    present = [v for v in values if v is not None]
    if winner is None:
        return "absent-majority"
    if present and all(v == present[0] for v in present) and len(present) == len(values):
        return "unanimous"
    if Counter(values)[winner] > 1:
        return "plurality"
    return "tie-priority"


def order_by_priority(records: Sequence[ExtractionRecord],
                      priority: Sequence[str] = DEFAULT_MODEL_PRIORITY) -> list[ExtractionRecord]:
    rank = {model: i for i, model in enumerate(priority)}
    return sorted(records, key=lambda r: rank.get(r.model_id, len(priority)))


def ensemble_record(records: Sequence[ExtractionRecord],
                    disease_dict: SynonymDictionary,
                    country_dict: SynonymDictionary,
                    imputed_date: date | None = None,
                    priority: Sequence[str] = DEFAULT_MODEL_PRIORITY) -> EnsembleRecord:
    """Fuse exactly three per-model records by per-field majority voting."""
    if len(records) != 3:
        raise VotingError(f"expected exactly 3 records, got {len(records)}")
    fileids = {r.fileid for r in records}
    if len(fileids) != 1:
        raise VotingError(f"records disagree on fileid: {sorted(fileids)}")
    ordered = order_by_priority(records, priority)

    diseases = [r.disease for r in ordered]
    countries = [r.country for r in ordered]
    dates = [r.date for r in ordered]
    cases = [r.cases for r in ordered]
    deaths = [r.deaths for r in ordered]

    disease = majority_vote_text(diseases, disease_dict)
    country = majority_vote_text(countries, country_dict)
    voted_date = _plurality(dates)
    voted_cases = majority_vote_numeric(cases)
    voted_deaths = majority_vote_numeric(deaths)

    provenance = {
        "models": [r.model_id for r in ordered],
        "disease": {"tally": _tally(diseases), "rule": _rule(
            [disease_dict.cluster_of(v) if v is not None else None for v in diseases],
            disease_dict.cluster_of(disease) if disease is not None else None)},
        "country": {"tally": _tally(countries), "rule": _rule(
            [country_dict.cluster_of(v) if v is not None else None for v in countries],
            country_dict.cluster_of(country) if country is not None else None)},
        "date": {"tally": _tally([d.isoformat() if d else None for d in dates]),
                 "rule": _rule(dates, voted_date)},
        "cases": {"tally": _tally(cases), "rule": _rule(cases, voted_cases)},
        "deaths": {"tally": _tally(deaths), "rule": _rule(deaths, voted_deaths)},
    }
    return EnsembleRecord(
        fileid=records[0].fileid,
        disease=disease,
        country=country,
        date=voted_date,
        imputed_date=imputed_date,
        cases=voted_cases,
        deaths=voted_deaths,
        provenance=provenance,
    )


def dump_dictionary(dictionary: SynonymDictionary) -> str:
    return json.dumps(dictionary.to_json(), ensure_ascii=False, indent=2)


def load_dictionary(text: str) -> SynonymDictionary:
    return SynonymDictionary.from_json(json.loads(text))


def ensemble_to_dict(record: EnsembleRecord) -> dict:
    return {
        "fileid": record.fileid,
        "disease": record.disease,
        "country": record.country,
        "date": record.date.isoformat() if record.date else None,
        "imputed_date": record.imputed_date.isoformat() if record.imputed_date else None,
        "cases": record.cases,
        "deaths": record.deaths,
        "provenance": record.provenance,
    }


def ensemble_from_dict(data: dict) -> EnsembleRecord:
    return EnsembleRecord(
        fileid=data["fileid"],
        disease=data.get("disease"),
        country=data.get("country"),
        date=date.fromisoformat(data["date"]) if data.get("date") else None,
        imputed_date=(date.fromisoformat(data["imputed_date"])
                      if data.get("imputed_date") else None),
        cases=data.get("cases"),
        deaths=data.get("deaths"),
        provenance=data.get("provenance", {}),
    )
