from pathlib import Path

import pytest

from epikg.kg import KgConfig, record_to_axioms, schema_axioms
from epikg.rdf import Graph
from epikg.store import TripleStore
from epikg.voting import EnsembleRecord

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixtures_dir() -> Path:
    return FIXTURES


def _date(text):
    from datetime import date

    return date.fromisoformat(text)


NIPAH_RECORD = EnsembleRecord(
    fileid="31-may-2018-nipah-virus-india-en",
    disease="Nipah Virus",
    country="India",
    date=_date("2018-05-19"),
    imputed_date=_date("2018-05-31"),
    cases=15,
    deaths=13,
)

MEASLES_RECORD = EnsembleRecord(
    fileid="05-january-2017-measles-italy-en",
    disease="Measles",
    country="Italy",
    date=_date("2017-01-03"),
    imputed_date=_date("2017-01-05"),
    cases=120,
    deaths=1,
)

CHOLERA_RECORD = EnsembleRecord(
    fileid="14-june-2017-cholera-yemen-en",
    disease="Cholera",
    country="Yemen",
    date=_date("2017-06-13"),
    imputed_date=_date("2017-06-14"),
    cases=124002,
)


def build_fixture_graph() -> Graph:
    """Three outbreak events numbered so the Nipah record is don-record2740."""
    graph = Graph(name="eKG")
    graph.triples |= schema_axioms()
    cfg = KgConfig()
    graph.triples |= record_to_axioms(CHOLERA_RECORD, 2738, cfg)
    graph.triples |= record_to_axioms(MEASLES_RECORD, 2739, cfg)
    graph.triples |= record_to_axioms(NIPAH_RECORD, 2740, cfg)
    return graph


@pytest.fixture()
def fixture_graph() -> Graph:
    return build_fixture_graph()


@pytest.fixture()
def fixture_store(fixture_graph) -> TripleStore:
    store = TripleStore()
    store.load_graph("eKG", fixture_graph)
    return store
