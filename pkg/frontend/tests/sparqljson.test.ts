import { describe, expect, it } from "vitest";

import type { SparqlJson } from "../src/api.js";
import { recordIdFromCell, shortenIri, toTable } from "../src/sparqljson.js";

const EKG = "http://data.jrc.ec.europa.eu/dataset/89056048-7f5d-4d7c-96ad-f99d1c0f6601/";

const NIPAH_RESPONSE: SparqlJson = {
  head: { vars: ["event"] },
  results: {
    bindings: [
      { event: { type: "uri", value: EKG + "don-record2740" } },
    ],
  },
};

describe("toTable", () => {
  it("renders the single Nipah row", () => {
    const table = toTable(NIPAH_RESPONSE);
    expect(table.columns).toEqual(["event"]);
    expect(table.rows).toEqual([["eKG:don-record2740"]]);
  });

  it("renders a count response as a single cell", () => {
    const table = toTable({
      head: { vars: ["count"] },
      results: { bindings: [{ count: { type: "literal", value: "32" } }] },
    });
    expect(table.columns).toEqual(["count"]);
    expect(table.rows).toEqual([["32"]]);
  });

  it("leaves unbound cells empty", () => {
    const table = toTable({
      head: { vars: ["a", "b"] },
      results: { bindings: [{ a: { type: "literal", value: "x" } }] },
    });
    expect(table.rows).toEqual([["x", ""]]);
  });
});

describe("shortenIri", () => {
  it("compacts known namespaces", () => {
    expect(shortenIri("http://www.w3.org/2000/01/rdf-schema#label")).toBe("rdfs:label");
    expect(shortenIri("http://example.org/other")).toBe("http://example.org/other");
  });
});

describe("recordIdFromCell", () => {
  it("extracts record ids from IRIs and prefixed names", () => {
    expect(recordIdFromCell("eKG:don-record2740")).toBe("don-record2740");
    expect(recordIdFromCell(EKG + "don-record7")).toBe("don-record7");
    expect(recordIdFromCell("don-record12")).toBe("don-record12");
    expect(recordIdFromCell("Nipah Virus")).toBeNull();
    expect(recordIdFromCell("don-record")).toBeNull();
  });
});
