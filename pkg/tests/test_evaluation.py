import random
from datetime import date

import pytest

from epikg.evaluation import (FN, FP, FP_AND_FN, TN, TP, ConfusionCounts,
                              EvaluationError, GoldRecord, classify_pair,
                              evaluate_corpus, f1, parse_gold_csv, precision,
                              recall)
from epikg.kg import parse_csv
from epikg.voting import (FixtureLexicon, SimilarityConfig, build_synonym_dictionary)

from .conftest import CHOLERA_RECORD, MEASLES_RECORD, NIPAH_RECORD

MERS_DICT = build_synonym_dictionary(
    ["MERS-CoV", "Middle East respiratory syndrome"],
    lex=FixtureLexicon.from_groups([["MERS-CoV", "Middle East respiratory syndrome"]]),
    cfg=SimilarityConfig(field_kind="disease"),
)


def test_classify_rule_table():
    assert classify_pair(None, None, "cases") == TN
    assert classify_pair(17, None, "cases") == FP
    assert classify_pair(None, 15, "cases") == FN
    assert classify_pair(15, 15, "cases") == TP
    assert classify_pair(17, 15, "cases") == FP_AND_FN


def test_classify_synonym_cluster_is_tp():
    assert classify_pair("MERS-CoV", "Middle East respiratory syndrome", "disease",
                         disease_dict=MERS_DICT) == TP


def test_classify_dates_exact_day():
    assert classify_pair(date(2018, 5, 19), date(2018, 5, 19), "date") == TP
    assert classify_pair(date(2018, 5, 20), date(2018, 5, 19), "date") == FP_AND_FN


def test_metric_formulas():
    c = ConfusionCounts(tp=1, fp=1, fn=0)
    assert precision(c) == pytest.approx(0.5)
    assert recall(c) == pytest.approx(1.0)
    assert f1(c) == pytest.approx(2 / 3)


def test_metric_zero_denominator_convention():
    c = ConfusionCounts()
    assert (precision(c), recall(c), f1(c)) == (0.0, 0.0, 0.0)


def test_f1_two_forms_agree():
    rng = random.Random(6)
    for _ in range(1000):
        c = ConfusionCounts(tp=rng.randint(0, 50), fp=rng.randint(0, 50),
                            fn=rng.randint(0, 50))
        p, r = precision(c), recall(c)
        direct = f1(c)
        if p + r > 0:
            harmonic = 2 / (1 / p + 1 / r) if p > 0 and r > 0 else 0.0
            assert abs(direct - harmonic) < 1e-12
        assert 0.0 <= direct <= 1.0


def test_f1_bounds_and_extremes():
    rng = random.Random(16)
    for _ in range(500):
        c = ConfusionCounts(tp=rng.randint(0, 20), fp=rng.randint(0, 20),
                            fn=rng.randint(0, 20))
        p, r, score = precision(c), recall(c), f1(c)
        assert 0.0 <= score <= 1.0
        if p > 0 and r > 0:
            assert min(p, r) - 1e-12 <= score <= max(p, r) + 1e-12
        assert (score == 1.0) == (c.fp == 0 and c.fn == 0 and c.tp > 0)


def test_monotonicity_fixing_a_wrong_value_helps():
    rng = random.Random(26)
    for _ in range(200):
        c = ConfusionCounts(tp=rng.randint(0, 20), fp=rng.randint(1, 20),
                            fn=rng.randint(1, 20))
        improved = ConfusionCounts(tp=c.tp + 1, fp=c.fp - 1, fn=c.fn - 1)
        assert precision(improved) >= precision(c)
        assert recall(improved) >= recall(c)
        assert f1(improved) >= f1(c)


def _golden_preds(fixtures_dir):
    return parse_csv((fixtures_dir / "golden" / "epidemicIE.csv").read_text())


def _dicts_over(preds, golds):
    diseases = [r.disease for r in preds if r.disease] + \
        [g.disease for g in golds if g.disease]
    countries = [r.country for r in preds if r.country] + \
        [g.country for g in golds if g.country]
    return (build_synonym_dictionary(diseases, cfg=SimilarityConfig(field_kind="disease")),
            build_synonym_dictionary(countries, cfg=SimilarityConfig(field_kind="country")))


def test_evaluate_corpus_hand_tallied_fixture(fixtures_dir):
    preds = _golden_preds(fixtures_dir)
    golds = parse_gold_csv((fixtures_dir / "gold.csv").read_text())
    report = evaluate_corpus(preds, golds, *_dicts_over(preds, golds))

    # committed hand tally over the fixture:
    #   disease: measles TP, cholera TP, nipah TP (case-fold cluster), plague FN
    #   country: three TP, plague FN
    #   date:    measles TP, cholera FP (gold absent), nipah TP, plague FN
    #   cases:   measles FP+FN (120 vs 115), cholera TP, nipah FP, plague FN
    d = report.tasks["disease"].counts
    assert (d.tp, d.fp, d.fn, d.tn) == (3, 0, 1, 0)
    c = report.tasks["country"].counts
    assert (c.tp, c.fp, c.fn, c.tn) == (3, 0, 1, 0)
    dt = report.tasks["date"].counts
    assert (dt.tp, dt.fp, dt.fn, dt.tn) == (2, 1, 1, 0)
    cs = report.tasks["cases"].counts
    assert (cs.tp, cs.fp, cs.fn, cs.tn) == (1, 2, 2, 0)

    assert report.tasks["disease"].precision == pytest.approx(1.0)
    assert report.tasks["disease"].recall == pytest.approx(0.75)
    assert report.tasks["disease"].f1 == pytest.approx(3 / 3.5)
    assert report.tasks["date"].f1 == pytest.approx(2 / 3)
    assert report.tasks["cases"].f1 == pytest.approx(1 / 3)


def test_evaluate_corpus_nipah_cluster_via_dicts(fixtures_dir):
    # "Nipah Virus" vs gold "Nipah virus" matches through the case-fold cluster
    preds = [NIPAH_RECORD]
    golds = [GoldRecord(fileid=NIPAH_RECORD.fileid, disease="Nipah virus")]
    dictionary = build_synonym_dictionary(["Nipah Virus", "Nipah virus"],
                                          cfg=SimilarityConfig(field_kind="disease"))
    report = evaluate_corpus(preds, golds, disease_dict=dictionary)
    assert report.tasks["disease"].counts.tp == 1


def test_evaluate_corpus_perfect_predictions():
    preds = [NIPAH_RECORD, MEASLES_RECORD, CHOLERA_RECORD]
    golds = [GoldRecord(fileid=r.fileid, disease=r.disease, country=r.country,
                        date=r.date, cases=r.cases) for r in preds]
    report = evaluate_corpus(preds, golds)
    for task in ("disease", "country", "date", "cases"):
        assert report.tasks[task].precision == 1.0
        assert report.tasks[task].recall == 1.0
        assert report.tasks[task].f1 == 1.0


def test_evaluate_corpus_all_absent_predictions():
    from epikg.voting import EnsembleRecord

    golds = [GoldRecord(fileid=f"g{i}", disease="Ebola", country="Guinea",
                        date=date(2014, 8, 1), cases=10) for i in range(4)]
    preds = [EnsembleRecord(fileid=f"g{i}") for i in range(4)]
    report = evaluate_corpus(preds, golds)
    for task in ("disease", "country", "date", "cases"):
        assert report.tasks[task].recall == 0.0


def test_evaluate_corpus_permutation_invariant(fixtures_dir):
    preds = _golden_preds(fixtures_dir)
    golds = parse_gold_csv((fixtures_dir / "gold.csv").read_text())
    dicts = _dicts_over(preds, golds)
    a = evaluate_corpus(preds, golds, *dicts).to_json()
    b = evaluate_corpus(list(reversed(preds)), list(reversed(golds)), *dicts).to_json()
    assert a == b


def test_evaluate_corpus_duplicate_fileid_error():
    preds = [NIPAH_RECORD, NIPAH_RECORD]
    with pytest.raises(EvaluationError, match="duplicate"):
        evaluate_corpus(preds, [])


def test_evaluate_corpus_warns_on_unmatched_preds(caplog):
    with caplog.at_level("WARNING"):
        evaluate_corpus([NIPAH_RECORD], [])
    assert any("without gold" in m for m in caplog.messages)


def test_parse_gold_csv(fixtures_dir):
    golds = parse_gold_csv((fixtures_dir / "gold.csv").read_text())
    assert len(golds) == 4
    cholera = next(g for g in golds if "cholera" in g.fileid)
    assert cholera.date is None
    assert cholera.cases == 124002


def test_parse_gold_csv_rejects_wrong_header():
    with pytest.raises(EvaluationError):
        parse_gold_csv("a,b\n1,2\n")
