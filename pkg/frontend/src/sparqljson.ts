/** SPARQL results JSON -> a plain table model for rendering. */

import type { SparqlJson } from "./api.js";

export interface ResultTable {
  columns: string[];
  rows: string[][];
}

/** Shorten well-known namespace IRIs so result cells stay readable. */
export function shortenIri(iri: string): string {
  const known: [string, string][] = [
    ["http://data.jrc.ec.europa.eu/dataset/89056048-7f5d-4d7c-96ad-f99d1c0f6601/", "eKG:"],
    ["http://www.w3.org/1999/02/22-rdf-syntax-ns#", "rdf:"],
    ["http://www.w3.org/2000/01/rdf-schema#", "rdfs:"],
    ["http://www.w3.org/2002/07/owl#", "owl:"],
    ["http://www.w3.org/2001/XMLSchema#", "xsd:"],
    ["http://purl.obolibrary.org/obo/", "obo:"],
    ["http://purl.org/dc/terms/", "dcterms:"],
  ];
  for (const [ns, prefix] of known) {
    if (iri.startsWith(ns)) return prefix + iri.slice(ns.length);
  }
  return iri;
}

export function toTable(payload: SparqlJson): ResultTable {
  const columns = payload.head.vars;
  const rows = payload.results.bindings.map((binding) =>
    columns.map((name) => {
      const cell = binding[name];
      if (!cell) return "";
      return cell.type === "uri" ? shortenIri(cell.value) : cell.value;
    }),
  );
  return { columns, rows };
}

/** The record id ("don-recordN") when a cell refers to one, else null. */
export function recordIdFromCell(cell: string): string | null {
  const match = /(?:^|[/:])?(don-record\d+)$/.exec(cell);
  return match ? match[1] : null;
}
