"""Pipeline command line: each stage is a subcommand with file hand-off."""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import analytics, evaluation, extraction, kg, sparql, voting
from .corpus import ChunkingConfig, CorpusError, DonReport, load_corpus, parse_slug
from .rdf import Graph, RdfError, parse_turtle, serialize_rdfxml, serialize_turtle
from .store import TripleStore

log = logging.getLogger("epikg")

EXIT_OK = 0
EXIT_USER = 1
EXIT_INTERNAL = 2


class UserError(Exception):
    pass


def _read_jsonl(path: str, stage: str) -> list[dict]:
    rows = []
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                if line.strip():
                    try:
                        rows.append(json.loads(line))
                    except json.JSONDecodeError as exc:
                        raise UserError(f"{stage}: bad JSON on {path}:{lineno}: {exc}")
    except OSError as exc:
        raise UserError(f"{stage}: cannot read {path}: {exc}")
    return rows


def _write_jsonl(path: str, rows) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row, ensure_ascii=False) + "\n")


def _require(row: dict, key: str, stage: str):
    if key not in row or row[key] in (None, ""):
        raise UserError(f"{stage}: record {row.get('fileid', '?')!r} is missing {key!r}")
    return row[key]


def _report_from_row(row: dict, stage: str) -> DonReport:
    from datetime import date

    _require(row, "fileid", stage)
    imputed = row.get("imputed_date")
    return DonReport(
        fileid=row["fileid"],
        title=row.get("title", row["fileid"]),
        body=row.get("body", ""),
        imputed_date=date.fromisoformat(imputed) if imputed else None,
        source_url=row.get("source_url"),
    )


def load_config(path: str | None) -> dict:
    """Flat key-value config with sections; backend sections are backend.<id>."""
    if not path:
        return {}
    parser = configparser.ConfigParser()
    read = parser.read(path, encoding="utf-8")
    if not read:
        raise UserError(f"cannot read config file: {path}")
    out: dict = {section: dict(parser[section]) for section in parser.sections()}
    return out


def _backends_from_args(args, config: dict) -> list[extraction.CompletionBackend]:
    if args.mock:
        script = json.loads(Path(args.mock).read_text(encoding="utf-8"))
        return [extraction.MockBackend(model_id, per_model)
                for model_id, per_model in script.items()]
    backends = []
    sections = sorted(
        (name for name in config if name.startswith("backend.")),
        key=lambda name: int(config[name].get("priority", "99")),
    )
    for name in sections:
        entry = config[name]
        backends.append(extraction.HttpBackend(
            id=entry.get("id", name.split(".", 1)[1]),
            url=entry.get("url") or None,
        ))
    if not backends:
        raise UserError("no backends configured: pass --mock or a config with "
                        "[backend.<id>] sections")
    return backends


def cmd_ingest(args) -> int:
    reports = load_corpus(args.corpus)
    _write_jsonl(args.out, (
        {
            "fileid": r.fileid,
            "title": r.title,
            "body": r.body,
            "imputed_date": r.imputed_date.isoformat() if r.imputed_date else None,
            "source_url": r.source_url,
        }
        for r in reports
    ))
    log.info("ingested %d reports -> %s", len(reports), args.out)
    return EXIT_OK


def cmd_extract(args) -> int:
    config = load_config(args.config)
    pipeline = config.get("pipeline", {})
    rows = _read_jsonl(args.infile, "extract")
    reports = [_report_from_row(row, "extract") for row in rows]
    backends = _backends_from_args(args, config)
    max_tokens = args.max_context_tokens or int(pipeline.get("max_context_tokens", 8000))
    cfg = ChunkingConfig(max_context_tokens=max_tokens)
    audit = extraction.JsonlAuditLog(args.audit) if args.audit else None

    def run_one(report: DonReport) -> list[extraction.ExtractionRecord]:
        return [extraction.extract_report(report, backend, cfg, audit=audit)
                for backend in backends]

    if args.jobs > 1:
        with ThreadPoolExecutor(max_workers=args.jobs) as pool:
            per_report = list(pool.map(run_one, reports))
    else:
        per_report = [run_one(r) for r in reports]
    records = [record for batch in per_report for record in batch]
    _write_jsonl(args.out, (extraction.record_to_dict(r) for r in records))
    log.info("extracted %d records -> %s", len(records), args.out)
    return EXIT_OK


def cmd_vote(args) -> int:
    pipeline = load_config(args.config).get("pipeline", {})
    rows = _read_jsonl(args.infile, "vote")
    records = [extraction.record_from_dict(row) for row in rows]
    for row in rows:
        _require(row, "fileid", "vote")
        _require(row, "model_id", "vote")

    imputed: dict[str, object] = {}
    if args.reports:
        for row in _read_jsonl(args.reports, "vote"):
            report = _report_from_row(row, "vote")
            imputed[report.fileid] = report.imputed_date

    by_fileid: dict[str, list[extraction.ExtractionRecord]] = {}
    order: list[str] = []
    for record in records:
        if record.fileid not in by_fileid:
            order.append(record.fileid)
        by_fileid.setdefault(record.fileid, []).append(record)

    threshold = (args.threshold if args.threshold is not None
                 else float(pipeline.get("semantic_threshold", 0.8)))
    disease_terms = [r.disease for r in records if r.disease is not None]
    country_terms = [r.country for r in records if r.country is not None]
    provider = voting.TrigramEmbedding()
    disease_dict = voting.build_synonym_dictionary(
        disease_terms, provider=provider,
        cfg=voting.SimilarityConfig(semantic_threshold=threshold, field_kind="disease"))
    country_dict = voting.build_synonym_dictionary(
        country_terms, provider=provider,
        cfg=voting.SimilarityConfig(semantic_threshold=threshold, field_kind="country"))

    fused = []
    for fileid in order:
        group = by_fileid[fileid]
        if len(group) != 3 and not args.allow_any_count:
            raise UserError(f"vote: {fileid!r} has {len(group)} records, expected 3 "
                            "(use --allow-any-count to override)")
        if len(group) != 3:
            group = (group * 3)[:3]
        fused.append(voting.ensemble_record(
            group, disease_dict, country_dict,
            imputed_date=imputed.get(fileid) or parse_slug(fileid)))
    _write_jsonl(args.out, (voting.ensemble_to_dict(r) for r in fused))
    if args.dicts_out:
        Path(args.dicts_out).write_text(json.dumps({
            "disease": disease_dict.to_json(),
            "country": country_dict.to_json(),
        }, ensure_ascii=False, indent=2), encoding="utf-8")
    log.info("fused %d reports -> %s", len(fused), args.out)
    return EXIT_OK


def cmd_build_kg(args) -> int:
    pipeline = load_config(args.config).get("pipeline", {})
    rows = _read_jsonl(args.infile, "build-kg")
    records = [voting.ensemble_from_dict(row) for row in rows]
    for row in rows:
        _require(row, "fileid", "build-kg")
    outdir = Path(args.out or pipeline.get("output_dir", "out"))
    outdir.mkdir(parents=True, exist_ok=True)
    base_iri = args.base_iri or pipeline.get("base_iri")
    cfg = kg.KgConfig(base_iri=base_iri) if base_iri else kg.KgConfig()
    graph = kg.build_graph(records, cfg)
    (outdir / "epidemicIE.ttl").write_text(serialize_turtle(graph), encoding="utf-8")
    (outdir / "epidemicIE.rdf").write_text(serialize_rdfxml(graph), encoding="utf-8")
    (outdir / "epidemicIE.csv").write_text(kg.emit_csv(records), encoding="utf-8")
    log.info("built graph with %d triples -> %s", len(graph), outdir)
    return EXIT_OK


def _run_query(store: TripleStore, text: str, fmt: str) -> None:
    ast = sparql.parse_query(text)
    if ast.form == "describe":
        triples = sparql.describe(ast, store, "eKG")
        sys.stdout.write(serialize_turtle(Graph(name="describe", triples=triples)))
        return
    result = sparql.evaluate(ast, store, "eKG")
    sys.stdout.buffer.write(sparql.serialize_results(result, fmt))
    sys.stdout.write("\n")
    sys.stdout.flush()


def cmd_query(args) -> int:
    store = TripleStore()
    graph = parse_turtle(Path(args.data).read_text(encoding="utf-8"), name="eKG")
    store.load_graph("eKG", graph)
    if args.query:
        try:
            _run_query(store, args.query, args.format)
        except sparql.ParseError as exc:
            raise UserError(f"query: {exc}")
        return EXIT_OK
    # REPL: queries read from stdin, separated by a lone ';' line; EOF quits
    if sys.stdin.isatty():
        sys.stderr.write("enter a query, end it with a ';' line (Ctrl-D quits)\n")
    buffer: list[str] = []

    def flush_buffer():
        text = "\n".join(buffer).strip()
        buffer.clear()
        if not text:
            return
        try:
            _run_query(store, text, args.format)
        except sparql.ParseError as exc:
            sys.stderr.write(f"parse error: {exc}\n")

    for line in sys.stdin:
        if line.strip() == ";":
            flush_buffer()
        else:
            buffer.append(line.rstrip("\n"))
    flush_buffer()
    return EXIT_OK


def cmd_serve(args) -> int:
    from .service import ServiceConfig, serve

    bind = args.bind or os.environ.get("EKG_BIND", "127.0.0.1:8000")
    host, _, port = bind.partition(":")
    data = args.data or os.environ.get("EKG_DATA")
    if not data:
        raise UserError("serve: pass --data or set EKG_DATA to a .ttl file")
    dicts = _load_dicts(args.dicts) if args.dicts else (None, None)
    config = ServiceConfig(host=host or "127.0.0.1", port=int(port or "8000"),
                           data_path=data, static_path=args.ui,
                           disease_dict=dicts[0], country_dict=dicts[1])
    serve(config)
    return EXIT_OK


def _load_dicts(path: str):
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    return (voting.SynonymDictionary.from_json(data["disease"]),
            voting.SynonymDictionary.from_json(data["country"]))


def cmd_eval(args) -> int:
    pred_text = Path(args.pred).read_text(encoding="utf-8")
    if args.pred.endswith(".csv"):
        preds = kg.parse_csv(pred_text)
    else:
        preds = [voting.ensemble_from_dict(row) for row in _read_jsonl(args.pred, "eval")]
    golds = evaluation.parse_gold_csv(Path(args.gold).read_text(encoding="utf-8"))

    terms = [r.disease for r in preds if r.disease] + [g.disease for g in golds if g.disease]
    countries = [r.country for r in preds if r.country] + [g.country for g in golds if g.country]
    provider = voting.TrigramEmbedding()
    disease_dict = voting.build_synonym_dictionary(
        terms, provider=provider, cfg=voting.SimilarityConfig(field_kind="disease"))
    country_dict = voting.build_synonym_dictionary(
        countries, provider=provider, cfg=voting.SimilarityConfig(field_kind="country"))

    report = evaluation.evaluate_corpus(preds, golds, disease_dict, country_dict)
    if args.out:
        Path(args.out).write_text(evaluation.report_to_json(report), encoding="utf-8")
    sys.stdout.write(report.to_text() + "\n")
    return EXIT_OK


def cmd_stats(args) -> int:
    records = kg.parse_csv(Path(args.data).read_text(encoding="utf-8"))
    as_csv = args.format == "csv"
    disease_dict, country_dict = (_load_dicts(args.dicts) if args.dicts
                                  else (None, None))
    summary = analytics.dataset_summary(records, disease_dict, country_dict)
    if as_csv:
        sys.stdout.write("metric,value\n")
        for key, value in summary.items():
            sys.stdout.write(f"{key},{value}\n")
    else:
        sys.stdout.write(f"entries: {summary['entries']}\n")
        sys.stdout.write(f"unique diseases: {summary['unique_diseases']}\n")
        sys.stdout.write(f"unique countries: {summary['unique_countries']}\n")
    for key in ("disease", "country", "pair"):
        ranked = analytics.top_counts(records, key, args.top,
                                      disease_dict, country_dict)
        if as_csv:
            sys.stdout.write(f"\n{key},count\n")
            for label, count in ranked:
                safe = f'"{label}"' if "," in label else label
                sys.stdout.write(f"{safe},{count}\n")
        else:
            sys.stdout.write(f"\ntop {args.top} by {key}:\n")
            width = max((len(label) for label, _ in ranked), default=0)
            for label, count in ranked:
                sys.stdout.write(f"  {label:<{width}}  {count}\n")
    if args.series:
        disease, _, country = args.series.partition("/")
        series = analytics.time_series(records, disease.strip(), country.strip(),
                                       disease_dict, country_dict)
        sys.stdout.write(f"\ndate,cases\n" if as_csv else
                         f"\ntime series for {disease.strip()} in {country.strip()}:\n")
        for when, cases in series:
            prefix = "" if as_csv else "  "
            sys.stdout.write(f"{prefix}{when.isoformat()},{cases}\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="epikg",
                                     description="outbreak report extraction pipeline")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="load and clean a corpus directory or manifest")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("extract", help="run completion backends over reports")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--mock", help="JSON script {model: {fileid: {kind: completions}}}")
    p.add_argument("--audit", help="JSON-lines audit log of raw completions")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--max-context-tokens", type=int)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("vote", help="fuse per-model records by majority voting")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--reports", help="reports.jsonl for imputed dates")
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--dicts-out", dest="dicts_out")
    p.add_argument("--threshold", type=float)
    p.add_argument("--allow-any-count", action="store_true")
    p.set_defaults(func=cmd_vote)

    p = sub.add_parser("build-kg", help="emit CSV, Turtle and RDF/XML")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out")
    p.add_argument("--config")
    p.add_argument("--base-iri", dest="base_iri")
    p.set_defaults(func=cmd_build_kg)

    p = sub.add_parser("query", help="run a SPARQL query against a .ttl file "
                                     "(omit --query for a stdin REPL)")
    p.add_argument("--data", required=True)
    p.add_argument("--query")
    p.add_argument("--format", choices=["json", "xml", "csv", "html"], default="json")
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("serve", help="serve the SPARQL endpoint and UI")
    p.add_argument("--data", help="Turtle file to load (or EKG_DATA)")
    p.add_argument("--bind", help="host:port (or EKG_BIND)")
    p.add_argument("--ui", help="static asset directory")
    p.add_argument("--dicts", help="synonym dictionaries JSON for facet filtering")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("eval", help="score predictions against a gold CSV")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("stats", help="dataset statistics from the raw CSV")
    p.add_argument("--data", required=True)
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--series", help="disease/country time series to print")
    p.add_argument("--format", choices=["text", "csv"], default="text")
    p.add_argument("--dicts", help="synonym dictionaries JSON so surface-form "
                                   "variants aggregate together")
    p.set_defaults(func=cmd_stats)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USER if exc.code not in (0, None) else EXIT_OK
    user_errors = (UserError, CorpusError, RdfError, voting.VotingError,
                   evaluation.EvaluationError, ValueError, FileNotFoundError)
    try:
        return args.func(args)
    except user_errors as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USER
    except Exception as exc:  # noqa: BLE001 - report and exit 2 per contract
        log.exception("internal error: %s", exc)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
