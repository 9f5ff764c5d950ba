"""Acceptance suite: one test per release criterion, one printed line each."""

import json
import os
import random
import sys
import time
from pathlib import Path

import pytest

from epikg.cli import EXIT_OK, main
from epikg.evaluation import ConfusionCounts, evaluate_corpus, f1, parse_gold_csv, precision, recall
from epikg.kg import parse_csv
from epikg.rdf import EKG, parse_turtle
from epikg.sparql import evaluate, parse_query
from epikg.store import TripleStore
from epikg.voting import (FixtureLexicon, SimilarityConfig, build_synonym_dictionary,
                          majority_vote_numeric, majority_vote_text)

from .conftest import build_fixture_graph
from .rdfxml_reader import read_rdfxml
from .sparql_oracle import brute_force, random_graph, random_query, rows_multiset
from .test_kg import _random_graph_for_turtle, _random_graph_for_xml
from .test_sparql import USAGE_QUERIES
from .test_voting import _closure_oracle, _tally_oracle_numeric

FIXTURES = Path(__file__).parent / "fixtures"


def _passed(name):
    print(f"ACCEPTANCE PASS: {name}", file=sys.stderr)


def test_acceptance_mock_pipeline_golden_run(tmp_path):
    started = time.monotonic()
    reports = tmp_path / "reports.jsonl"
    extractions = tmp_path / "extractions.jsonl"
    ensemble = tmp_path / "ensemble.jsonl"
    out = tmp_path / "out"
    assert main(["ingest", "--corpus", str(FIXTURES / "corpus"),
                 "--out", str(reports)]) == EXIT_OK
    assert main(["extract", "--in", str(reports),
                 "--mock", str(FIXTURES / "mock_script.json"),
                 "--out", str(extractions)]) == EXIT_OK
    assert main(["vote", "--in", str(extractions), "--reports", str(reports),
                 "--out", str(ensemble)]) == EXIT_OK
    assert main(["build-kg", "--in", str(ensemble), "--out", str(out)]) == EXIT_OK

    golden = FIXTURES / "golden"
    assert ensemble.read_bytes() == (golden / "ensemble.jsonl").read_bytes()
    assert (out / "epidemicIE.csv").read_bytes() == (golden / "epidemicIE.csv").read_bytes()
    assert (out / "epidemicIE.ttl").read_bytes() == (golden / "epidemicIE.ttl").read_bytes()
    assert (out / "epidemicIE.rdf").read_bytes() == (golden / "epidemicIE.rdf").read_bytes()

    nipah_rows = [r for r in (out / "epidemicIE.csv").read_text().splitlines()
                  if r.startswith("31-may-2018")]
    assert nipah_rows == ["31-may-2018-nipah-virus-india-en,Nipah Virus,India,"
                          "2018/05/19,2018/05/31,15,13"]
    elapsed = time.monotonic() - started
    assert elapsed < 5.0, f"golden run took {elapsed:.2f}s"
    _passed("mock-pipeline golden run (CSV/TTL/RDF byte-identical, "
            f"Nipah row correct, {elapsed:.2f}s)")


def test_acceptance_voting_oracle_suite():
    started = time.monotonic()
    assert majority_vote_numeric([15, 17, 15]) == 15
    rng = random.Random(501)
    pool = [None, 0, 1, 2, 3, 15, 17, 100, 124002]
    for _ in range(500):
        values = [rng.choice(pool) for _ in range(3)]
        assert majority_vote_numeric(values) == _tally_oracle_numeric(values)

    terms = ["MERS-CoV", "Middle East respiratory syndrome", "Dengue", "Ebola",
             "Cholera", None]
    lex = FixtureLexicon.from_groups([["MERS-CoV", "Middle East respiratory syndrome"]])
    dictionary = build_synonym_dictionary(
        [t for t in terms if t], lex=lex, cfg=SimilarityConfig(field_kind="disease"))
    for _ in range(500):
        values = [rng.choice(terms) for _ in range(3)]
        got = majority_vote_text(values, dictionary)
        # brute-force cluster tally oracle
        tally = {}
        for v in values:
            key = dictionary.cluster_of(v) if v is not None else None
            tally[key] = tally.get(key, 0) + 1
        best = max(tally.values())
        winners = [k for k, c in tally.items() if c == best]
        if winners == [None]:
            assert got is None
        else:
            winners = [w for w in winners if w is not None]
            expected_cluster = next(dictionary.cluster_of(v) for v in values
                                    if v is not None and dictionary.cluster_of(v) in winners)
            assert got is not None and dictionary.cluster_of(got) == expected_cluster
    elapsed = time.monotonic() - started
    assert elapsed < 5.0
    _passed(f"voting oracle suite (500 numeric + 500 text instances, {elapsed:.2f}s)")


def test_acceptance_synonym_clustering():
    rng = random.Random(502)
    cfg = SimilarityConfig(field_kind="disease")
    for _ in range(200):
        n = rng.randint(1, 50)
        terms = [f"term{i}" for i in range(n)]
        groups = [rng.sample(terms, min(rng.randint(1, 4), n))
                  for _ in range(rng.randint(0, n // 2 + 1))]
        lex = FixtureLexicon.from_groups(groups)
        built = build_synonym_dictionary(terms, lex=lex, cfg=cfg)
        assert set(built.clusters) == _closure_oracle(terms, lex, cfg)

    country = build_synonym_dictionary(
        ["Trinidad & Tobago", "Trinidad and Tobago", "Florida, USA", "USA (Florida)"],
        cfg=SimilarityConfig(field_kind="country"))
    assert country.same_cluster("Trinidad & Tobago", "Trinidad and Tobago")
    assert country.same_cluster("Florida, USA", "USA (Florida)")
    _passed("synonym clustering (200 randomized trials vs brute-force components, "
            "printed pairs cluster)")


def test_acceptance_sparql_conformance(fixture_store):
    started = time.monotonic()
    graph = build_fixture_graph()

    expectations = {
        0: lambda r: len(r.rows) == 9,
        1: lambda r: r.count == len(graph.triples),
        2: lambda r: [x["event"].value for x in r.rows] == [EKG + "don-record2740"],
        3: lambda r: [x["event"].value for x in r.rows] == [EKG + "don-record2740"],
        4: lambda r: [x["event"].value for x in r.rows] == [EKG + "don-record2739"],
        5: lambda r: [(x["outbreak"].value, x["cases"].value) for x in r.rows]
        == [("Measles", "120")],
    }
    for i, text in enumerate(USAGE_QUERIES):
        ast = parse_query(text)
        result = evaluate(ast, fixture_store)
        assert expectations[i](result), f"usage query {i} mismatch"
        names, rows, count = brute_force(ast, graph)
        if count is not None:
            assert result.count == count
        else:
            assert rows_multiset(result.rows) == rows_multiset(rows)

    rng = random.Random(503)
    store = TripleStore()
    for _ in range(1000):
        g = random_graph(rng, rng.randint(5, 500))
        store.load_graph("fuzz", g)
        query = random_query(rng, g)
        got = evaluate(query, store)
        names, rows, count = brute_force(query, g)
        if count is not None:
            assert got.count == count
        else:
            assert got.variables == names
            assert rows_multiset(got.rows) == rows_multiset(rows)
    elapsed = time.monotonic() - started
    assert elapsed < 60.0, f"SPARQL conformance took {elapsed:.1f}s"
    _passed(f"SPARQL-subset conformance (usage queries + 1000 fuzzed, {elapsed:.1f}s)")


def test_acceptance_serialization_round_trips():
    from epikg.rdf import serialize_rdfxml, serialize_turtle
    from epikg.kg import emit_csv

    rng = random.Random(504)
    for _ in range(200):
        graph = _random_graph_for_turtle(rng, rng.randint(1, 60))
        assert parse_turtle(serialize_turtle(graph)).triples == graph.triples
    for _ in range(50):
        graph = _random_graph_for_xml(rng, rng.randint(1, 50))
        assert read_rdfxml(serialize_rdfxml(graph)).triples == graph.triples

    records = parse_csv((FIXTURES / "golden" / "epidemicIE.csv").read_text())
    assert parse_csv(emit_csv(records)) == records
    _passed("serialization round-trips (Turtle x200, RDF/XML via independent "
            "reader, CSV emit/parse identity)")


def test_acceptance_metrics():
    preds = parse_csv((FIXTURES / "golden" / "epidemicIE.csv").read_text())
    golds = parse_gold_csv((FIXTURES / "gold.csv").read_text())
    diseases = [r.disease for r in preds if r.disease] + \
        [g.disease for g in golds if g.disease]
    countries = [r.country for r in preds if r.country] + \
        [g.country for g in golds if g.country]
    report = evaluate_corpus(
        preds, golds,
        build_synonym_dictionary(diseases, cfg=SimilarityConfig(field_kind="disease")),
        build_synonym_dictionary(countries, cfg=SimilarityConfig(field_kind="country")))
    committed = {
        "disease": (3, 0, 1, 0), "country": (3, 0, 1, 0),
        "date": (2, 1, 1, 0), "cases": (1, 2, 2, 0),
    }
    for task, (tp, fp, fn, tn) in committed.items():
        counts = report.tasks[task].counts
        assert (counts.tp, counts.fp, counts.fn, counts.tn) == (tp, fp, fn, tn), task

    rng = random.Random(505)
    for _ in range(1000):
        c = ConfusionCounts(tp=rng.randint(0, 100), fp=rng.randint(0, 100),
                            fn=rng.randint(0, 100))
        p, r, direct = precision(c), recall(c), f1(c)
        assert 0.0 <= p <= 1.0 and 0.0 <= r <= 1.0 and 0.0 <= direct <= 1.0
        if p > 0 and r > 0:
            assert abs(direct - 2 / (1 / p + 1 / r)) < 1e-12
    # The published ten-model comparison (e.g. ensemble 0.794/0.988/0.851 on
    # disease names) needs the live models plus the closed gold corpus, so it is
    # explicitly out of reach here; the metric machinery is accepted via the
    # oracle suite above instead.
    _passed("metrics (hand-tallied confusion table exact, both F1 forms agree to "
            "1e-12 on 1000 counts)")


def test_acceptance_regression():
    from epikg.analytics import ols_regression

    x = [1.0, 2.0, 3.0, 4.0, 5.0]
    y = [2.1, 3.9, 6.2, 8.0, 9.9]
    fit = ols_regression(x, y)
    assert abs(fit.slope - 1.97) < 1e-9  # closed-form normal equations
    assert abs(fit.intercept - 0.11) < 1e-9

    perfect = ols_regression(list(range(1, 11)), [2.0 * v for v in range(1, 11)])
    assert perfect.p_value < 1e-12

    rng = random.Random(1848)
    hits = 0
    for _ in range(200):
        xs = [rng.uniform(0, 10) for _ in range(20)]
        ys = [rng.gauss(0, 1) for _ in range(20)]
        if ols_regression(xs, ys).p_value < 0.05:
            hits += 1
    assert 0.01 <= hits / 200 <= 0.12, f"false positive rate {hits / 200}"
    _passed(f"regression (normal equations 1e-9, perfect-line p<1e-12, "
            f"null-slope FP rate {hits / 200:.3f} in [0.01, 0.12])")


PUBLISHED = os.environ.get("EPIKG_PUBLISHED_CSV", str(FIXTURES / "published.csv"))


@pytest.mark.skipif(not Path(PUBLISHED).exists(),
                    reason="optional integration: published dataset CSV not "
                           "available; set EPIKG_PUBLISHED_CSV to enable")
def test_acceptance_published_dataset_integration(fixtures_dir):
    started = time.monotonic()
    from .test_analytics import (test_published_dataset_statistics,
                                 test_published_mers_regression)

    test_published_dataset_statistics()
    test_published_mers_regression(fixtures_dir)
    elapsed = time.monotonic() - started
    assert elapsed < 30.0
    _passed(f"published-dataset integration ({elapsed:.1f}s)")
