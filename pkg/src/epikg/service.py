"""HTTP facade: SPARQL endpoint, resource dereferencing, and the events API."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path
from urllib.parse import quote, urlsplit

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse, PlainTextResponse, RedirectResponse
from fastapi.staticfiles import StaticFiles

from . import sparql
from .rdf import EKG, Graph, parse_turtle, serialize_ntriples, serialize_rdfxml, serialize_turtle
from .store import TripleStore
from .voting import SynonymDictionary

SPARQL_MEDIA = {
    "application/json": "json",
    "application/xml": "xml",
    "text/csv": "csv",
    "text/html": "html",
}

DESCRIBE_MEDIA = {
    "text/turtle": serialize_turtle,
    "application/rdf+xml": serialize_rdfxml,
    "application/n-triples": serialize_ntriples,
}

_ABSOLUTE_IRI = re.compile(r"^[A-Za-z][A-Za-z0-9+.-]*:\S+$")


@dataclass
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    base_iri: str = EKG
    default_graph: str = "eKG"
    data_path: str | None = None
    static_path: str | None = None
    disease_dict: SynonymDictionary | None = None
    country_dict: SynonymDictionary | None = None

    def __post_init__(self):
        if not self.base_iri.endswith("/"):
            raise ValueError("base IRI must end with '/'")


@dataclass
class EventRecord:
    seq: int
    id: str
    iri: str
    disease: str | None = None
    country: str | None = None
    date: str | None = None
    imputed_date: str | None = None
    cases: int | None = None
    deaths: int | None = None

    def to_json(self) -> dict:
        return {
            "id": self.id, "iri": self.iri, "disease": self.disease,
            "country": self.country, "date": self.date,
            "imputed_date": self.imputed_date, "cases": self.cases,
            "deaths": self.deaths,
        }


def _negotiate(accept: str | None, table: dict[str, object], default: str):
    if not accept:
        return default, table[default]
    for part in accept.split(","):
        media = part.split(";")[0].strip().lower()
        if media in table:
            return media, table[media]
        if media == "*/*":
            return default, table[default]
    return default, table[default]


def events_from_graph(graph: Graph, base_iri: str) -> list[EventRecord]:
    by_subject: dict[str, dict] = {}
    for t in graph.triples:
        subject = t.subject.value
        if not subject.startswith(base_iri):
            continue
        m = re.fullmatch(r"don-record(\d+)", subject[len(base_iri):])
        if not m:
            continue
        entry = by_subject.setdefault(subject, {"seq": int(m.group(1))})
        predicate = t.predicate.value
        if predicate.startswith(base_iri):
            entry[predicate[len(base_iri):]] = t.object.value
    events = []
    for subject, entry in by_subject.items():
        events.append(EventRecord(
            seq=entry["seq"],
            id=f"don-record{entry['seq']}",
            iri=subject,
            disease=entry.get("virus_extracted"),
            country=entry.get("country_extracted"),
            date=entry.get("date_extracted"),
            imputed_date=entry.get("date_cases_Imputed"),
            cases=_maybe_int(entry.get("cases_extracted")),
            deaths=_maybe_int(entry.get("deaths_extracted")),
        ))
    events.sort(key=lambda e: e.seq)
    return events


def _maybe_int(value: str | None) -> int | None:
    if value is None:
        return None
    try:
        return int(value)
    except ValueError:
        return None


def _year_of(value: str | None) -> int | None:
    if not value:
        return None
    try:
        return date.fromisoformat(value).year
    except ValueError:
        return None


class ServiceState:
    def __init__(self, config: ServiceConfig):
        self.config = config
        self.store = TripleStore()
        self.events: list[EventRecord] = []
        if config.data_path:
            self.load_data(config.data_path)

    def load_data(self, path: str) -> None:
        graph = parse_turtle(Path(path).read_text(encoding="utf-8"),
                             name=self.config.default_graph)
        self.set_graph(graph)

    def set_graph(self, graph: Graph) -> None:
        store = TripleStore()
        store.load_graph(self.config.default_graph, graph)
        events = events_from_graph(graph, self.config.base_iri)
        # swap both atomically enough for GIL-guarded readers
        self.store, self.events = store, events

    def label_matches(self, value: str | None, wanted: str, kind: str) -> bool:
        if value is None:
            return False
        if value == wanted:
            return True
        dictionary = (self.config.disease_dict if kind == "disease"
                      else self.config.country_dict)
        return bool(dictionary and dictionary.same_cluster(value, wanted))


def create_app(config: ServiceConfig | None = None,
               state: ServiceState | None = None) -> FastAPI:
    config = config or ServiceConfig()
    state = state or ServiceState(config)
    app = FastAPI(title="outbreak knowledge graph service", docs_url=None, redoc_url=None)
    app.state.service = state

    @app.exception_handler(RequestValidationError)
    async def bad_request(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={"error": str(exc.errors()[:1])})

    def run_sparql(query_text: str | None, accept: str | None) -> Response:
        media, fmt = _negotiate(accept, SPARQL_MEDIA, "application/json")
        if not query_text or not query_text.strip():
            return JSONResponse(status_code=400, content={"error": "missing query"})
        try:
            ast = sparql.parse_query(query_text)
        except sparql.ParseError as exc:
            return JSONResponse(status_code=400, content={"error": str(exc),
                                                          "offset": exc.offset})
        if ast.form == "describe":
            triples = sparql.describe(ast, state.store, config.default_graph)
            body = serialize_turtle(Graph(name="describe", triples=triples))
            return PlainTextResponse(body, media_type="text/turtle")
        result = sparql.evaluate(ast, state.store, config.default_graph)
        return Response(content=sparql.serialize_results(result, fmt), media_type=media)

    @app.get("/sparql")
    async def sparql_get(request: Request):
        return run_sparql(request.query_params.get("query"),
                          request.headers.get("accept"))

    @app.post("/sparql")
    async def sparql_post(request: Request):
        content_type = request.headers.get("content-type", "")
        if content_type.startswith("application/x-www-form-urlencoded"):
            form = await request.form()
            query_text = form.get("query")
        else:
            query_text = (await request.body()).decode("utf-8")
        return run_sparql(query_text, request.headers.get("accept"))

    @app.get("/describe")
    async def describe_resource(request: Request):
        iri_value = request.query_params.get("url", "")
        if not _ABSOLUTE_IRI.match(iri_value):
            return JSONResponse(status_code=400, content={"error": f"invalid IRI: {iri_value!r}"})
        triples, occurs = state.store.describe(iri_value)
        if not occurs:
            return JSONResponse(status_code=404, content={"error": f"unknown resource: {iri_value}"})
        media, serializer = _negotiate(request.headers.get("accept"),
                                       DESCRIBE_MEDIA, "text/turtle")
        body = serializer(Graph(name=iri_value, triples=triples))
        return PlainTextResponse(body, media_type=media)

    @app.get("/api/events")
    async def events_api(request: Request):
        params = request.query_params
        try:
            page = int(params.get("page", "1"))
            page_size = int(params.get("page_size", "50"))
            year = int(params["year"]) if "year" in params else None
        except ValueError as exc:
            return JSONResponse(status_code=400, content={"error": f"bad parameter: {exc}"})
        if page < 1 or page_size < 1:
            return JSONResponse(status_code=400,
                                content={"error": "page and page_size must be >= 1"})
        disease = params.get("disease")
        country = params.get("country")
        matches = []
        for event in state.events:
            if disease is not None and not state.label_matches(event.disease, disease, "disease"):
                continue
            if country is not None and not state.label_matches(event.country, country, "country"):
                continue
            if year is not None and _year_of(event.date) != year:
                continue
            matches.append(event)
        start = (page - 1) * page_size
        items = matches[start:start + page_size]
        return {"total": len(matches), "items": [e.to_json() for e in items]}

    @app.get("/api/facets")
    async def facets_api():
        diseases: dict[str, int] = {}
        countries: dict[str, int] = {}
        years: dict[int, int] = {}
        for event in state.events:
            if event.disease:
                diseases[event.disease] = diseases.get(event.disease, 0) + 1
            if event.country:
                countries[event.country] = countries.get(event.country, 0) + 1
            year = _year_of(event.date)
            if year is not None:
                years[year] = years.get(year, 0) + 1
        return {
            "diseases": [{"value": k, "count": v} for k, v in sorted(diseases.items())],
            "countries": [{"value": k, "count": v} for k, v in sorted(countries.items())],
            "years": [{"value": k, "count": v} for k, v in sorted(years.items())],
        }

    @app.post("/admin/reload")
    async def reload_data():
        if not config.data_path:
            return JSONResponse(status_code=400, content={"error": "no data path configured"})
        state.load_data(config.data_path)
        return {"triples": state.store.size(config.default_graph)}

    base_path = urlsplit(config.base_iri).path
    if base_path and base_path != "/":
        @app.get(base_path + "{name}")
        async def dereference(name: str):
            target = config.base_iri + name
            return RedirectResponse(url=f"/describe?url={quote(target, safe='')}",
                                    status_code=303)

    if config.static_path and Path(config.static_path).is_dir():
        app.mount("/", StaticFiles(directory=config.static_path, html=True), name="ui")
    else:
        @app.get("/")
        async def index():
            return PlainTextResponse(
                "outbreak knowledge graph service\n"
                "endpoints: /sparql /describe?url= /api/events /api/facets\n")

    return app


def serve(config: ServiceConfig) -> None:
    import uvicorn

    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="warning")
