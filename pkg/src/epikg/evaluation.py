"""Per-field scoring of extractions against a gold standard."""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from datetime import date, datetime
from typing import Sequence

from .voting import EnsembleRecord, SynonymDictionary

log = logging.getLogger(__name__)

TASKS = ("disease", "country", "date", "cases")

TP = "TP"
FP = "FP"
FN = "FN"
TN = "TN"
FP_AND_FN = "FP_and_FN"


class EvaluationError(Exception):
    pass


@dataclass(frozen=True)
class GoldRecord:
    fileid: str
    disease: str | None = None
    country: str | None = None
    date: date | None = None
    cases: int | None = None


@dataclass
class ConfusionCounts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def add(self, outcome: str) -> None:
        if outcome == TP:
            self.tp += 1
        elif outcome == FP:
            self.fp += 1
        elif outcome == FN:
            self.fn += 1
        elif outcome == TN:
            self.tn += 1
        elif outcome == FP_AND_FN:
            self.fp += 1
            self.fn += 1
        else:
            raise ValueError(f"unknown outcome {outcome!r}")


@dataclass
class TaskMetrics:
    counts: ConfusionCounts
    precision: float
    recall: float
    f1: float


@dataclass
class MetricsReport:
    tasks: dict[str, TaskMetrics] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            task: {
                "tp": m.counts.tp, "fp": m.counts.fp, "fn": m.counts.fn, "tn": m.counts.tn,
                "precision": m.precision, "recall": m.recall, "f1": m.f1,
            }
            for task, m in self.tasks.items()
        }

    def to_text(self) -> str:
        lines = [f"{'task':<10} {'TP':>5} {'FP':>5} {'FN':>5} {'TN':>5} "
                 f"{'precision':>10} {'recall':>10} {'F1':>10}"]
        for task, m in self.tasks.items():
            c = m.counts
            lines.append(f"{task:<10} {c.tp:>5} {c.fp:>5} {c.fn:>5} {c.tn:>5} "
                         f"{m.precision:>10.3f} {m.recall:>10.3f} {m.f1:>10.3f}")
        return "\n".join(lines)


def precision(c: ConfusionCounts) -> float:
    return c.tp / (c.tp + c.fp) if c.tp + c.fp else 0.0


def recall(c: ConfusionCounts) -> float:
    return c.tp / (c.tp + c.fn) if c.tp + c.fn else 0.0


def f1(c: ConfusionCounts) -> float:
    denominator = c.tp + (c.fp + c.fn) / 2
    return c.tp / denominator if denominator else 0.0


def _values_match(pred, gold, task: str,
                  disease_dict: SynonymDictionary | None,
                  country_dict: SynonymDictionary | None) -> bool:
    if task == "disease":
        return bool(disease_dict and disease_dict.same_cluster(pred, gold)) or pred == gold
    if task == "country":
        return bool(country_dict and country_dict.same_cluster(pred, gold)) or pred == gold
    return pred == gold  # dates by exact day, counts by exact integer


def classify_pair(pred, gold, task: str,
                  disease_dict: SynonymDictionary | None = None,
                  country_dict: SynonymDictionary | None = None) -> str:
    """Binary-classification outcome for one predicted/gold value pair.

    An extracted value is the positive class; absent ("None") is negative.
    A present but wrong value counts against both precision and recall.
    """
    if gold is None and pred is None:
        return TN
    if gold is None:
        return FP
    if pred is None:
        return FN
    if _values_match(pred, gold, task, disease_dict, country_dict):
        return TP
    return FP_AND_FN


def evaluate_corpus(preds: Sequence[EnsembleRecord], golds: Sequence[GoldRecord],
                    disease_dict: SynonymDictionary | None = None,
                    country_dict: SynonymDictionary | None = None) -> MetricsReport:
    pred_by_id: dict[str, EnsembleRecord] = {}
    for p in preds:
        if p.fileid in pred_by_id:
            raise EvaluationError(f"duplicate prediction fileid: {p.fileid}")
        pred_by_id[p.fileid] = p
    gold_ids = set()
    for g in golds:
        if g.fileid in gold_ids:
            raise EvaluationError(f"duplicate gold fileid: {g.fileid}")
        gold_ids.add(g.fileid)

    counts = {task: ConfusionCounts() for task in TASKS}
    for gold in golds:
        pred = pred_by_id.get(gold.fileid)
        for task in TASKS:
            gold_value = getattr(gold, task)
            if pred is None:
                if gold_value is not None:
                    counts[task].add(FN)
                continue
            pred_value = getattr(pred, task)
            counts[task].add(classify_pair(pred_value, gold_value, task,
                                           disease_dict, country_dict))
    unmatched = set(pred_by_id) - gold_ids
    if unmatched:
        log.warning("ignoring %d predictions without gold rows: %s",
                    len(unmatched), sorted(unmatched)[:5])

    report = MetricsReport()
    for task in TASKS:
        c = counts[task]
        report.tasks[task] = TaskMetrics(counts=c, precision=precision(c),
                                         recall=recall(c), f1=f1(c))
    return report


GOLD_HEADER = ["fileid", "virus_extracted", "country_extracted", "date_extracted",
               "date_cases_Imputed", "cases_extracted"]


def parse_gold_csv(text: str) -> list[GoldRecord]:
    """Gold rows in the raw-CSV column layout (deaths column absent or ignored)."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0][:len(GOLD_HEADER)] != GOLD_HEADER:
        raise EvaluationError("gold CSV must start with the raw-extraction columns "
                              f"{','.join(GOLD_HEADER)}")
    records = []
    for row in rows[1:]:
        if len(row) < len(GOLD_HEADER):
            raise EvaluationError(f"gold row too short: {row!r}")
        gold_date = None
        if row[3]:
            gold_date = datetime.strptime(row[3], "%Y/%m/%d").date()
        records.append(GoldRecord(
            fileid=row[0],
            disease=row[1] or None,
            country=row[2] or None,
            date=gold_date,
            cases=int(row[5]) if row[5] else None,
        ))
    return records


def report_to_json(report: MetricsReport) -> str:
    return json.dumps(report.to_json(), indent=2)
