"""Outbreak records to RDF axioms and the raw CSV export."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from datetime import date, datetime
from typing import Sequence

from .rdf import DCTERMS, EKG, OBO, OWL, RDF, RDFS, XSD, Graph, Triple, iri, literal
from .voting import EnsembleRecord

CSV_HEADER = [
    "fileid",
    "virus_extracted",
    "country_extracted",
    "date_extracted",
    "date_cases_Imputed",
    "cases_extracted",
    "deaths_extracted",
]

#: Superclass every outbreak-event class is declared under. The published
#: dataset names a surveillance-process class; override via KgConfig if a
#: different upper ontology anchor is wanted.
DEFAULT_SUPERCLASS = OBO + "IDO_surveillance_process"

_SUBCLASS_TARGETS = {
    "virus_extracted": OBO + "IDO_0000436",
    "country_extracted": OBO + "GEO_000000372",
    "date_extracted": DCTERMS + "date",
    "date_cases_Imputed": DCTERMS + "date",
    "cases_extracted": OBO + "IDO_0000511",
    "deaths_extracted": OBO + "IDO_0000489",
}


@dataclass(frozen=True)
class KgConfig:
    base_iri: str = EKG
    superclass_iri: str = DEFAULT_SUPERCLASS
    graph_name: str = "eKG"


def schema_axioms(cfg: KgConfig = KgConfig()) -> set[Triple]:
    """The six field-class alignments into IDO / GEO / Dublin Core terms."""
    return {
        Triple(iri(cfg.base_iri + local), iri(RDFS + "subClassOf"), iri(target))
        for local, target in _SUBCLASS_TARGETS.items()
    }


def record_to_axioms(record: EnsembleRecord, seq: int, cfg: KgConfig = KgConfig()) -> set[Triple]:
    """Triples describing one outbreak event, minted as don-record<seq>."""
    if not record.fileid:
        raise ValueError("record has an empty fileid")
    subject = iri(cfg.base_iri + f"don-record{seq}")
    triples = {
        Triple(subject, iri(RDF + "type"), iri(OWL + "Class")),
        Triple(subject, iri(RDFS + "subClassOf"), iri(cfg.superclass_iri)),
        Triple(subject, iri(RDFS + "label"), literal(record.fileid)),
    }
    def prop(local: str, obj) -> None:
        triples.add(Triple(subject, iri(cfg.base_iri + local), obj))

    if record.disease is not None:
        prop("virus_extracted", literal(record.disease))
    if record.country is not None:
        prop("country_extracted", literal(record.country))
    if record.date is not None:
        prop("date_extracted", literal(record.date.isoformat(), datatype=XSD + "date"))
    if record.imputed_date is not None:
        prop("date_cases_Imputed", literal(record.imputed_date.isoformat(), datatype=XSD + "date"))
    if record.cases is not None:
        prop("cases_extracted", literal(str(record.cases)))
    if record.deaths is not None:
        prop("deaths_extracted", literal(str(record.deaths)))
    return triples


def build_graph(records: Sequence[EnsembleRecord], cfg: KgConfig = KgConfig()) -> Graph:
    """Schema axioms plus one record description per input, numbered from 1."""
    graph = Graph(name=cfg.graph_name)
    graph.triples |= schema_axioms(cfg)
    for seq, record in enumerate(records, start=1):
        graph.triples |= record_to_axioms(record, seq, cfg)
    return graph


def _csv_date(value: date | None) -> str:
    return value.strftime("%Y/%m/%d") if value else ""


def emit_csv(records: Sequence[EnsembleRecord]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        writer.writerow([
            r.fileid,
            r.disease or "",
            r.country or "",
            _csv_date(r.date),
            _csv_date(r.imputed_date),
            "" if r.cases is None else str(r.cases),
            "" if r.deaths is None else str(r.deaths),
        ])
    return out.getvalue()


def _parse_csv_date(cell: str) -> date | None:
    if not cell:
        return None
    return datetime.strptime(cell, "%Y/%m/%d").date()


def parse_csv(text: str) -> list[EnsembleRecord]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != CSV_HEADER:
        raise ValueError(f"unexpected CSV header: {rows[0] if rows else 'empty file'}")
    records = []
    for row in rows[1:]:
        if len(row) != len(CSV_HEADER):
            raise ValueError(f"row has {len(row)} cells, expected {len(CSV_HEADER)}: {row!r}")
        records.append(EnsembleRecord(
            fileid=row[0],
            disease=row[1] or None,
            country=row[2] or None,
            date=_parse_csv_date(row[3]),
            imputed_date=_parse_csv_date(row[4]),
            cases=int(row[5]) if row[5] else None,
            deaths=int(row[6]) if row[6] else None,
        ))
    return records
