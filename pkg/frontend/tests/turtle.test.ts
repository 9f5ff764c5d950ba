import { readFileSync } from "node:fs";
import { join } from "node:path";

import { describe, expect, it } from "vitest";

import { fieldsFromTriples, parseTurtle } from "../src/turtle.js";

const EKG = "http://data.jrc.ec.europa.eu/dataset/89056048-7f5d-4d7c-96ad-f99d1c0f6601/";

const FIXTURE = readFileSync(join(__dirname, "fixtures", "eKG.ttl"), "utf-8");

describe("parseTurtle", () => {
  it("reads the whole fixture graph", () => {
    const triples = parseTurtle(FIXTURE);
    expect(triples.length).toBe(32);
  });

  it("keeps datatypes and prefixed names", () => {
    const triples = parseTurtle(FIXTURE);
    const date = triples.find(
      (t) => t.subject === EKG + "don-record2740" && t.predicate === EKG + "date_extracted");
    expect(date?.object).toBe("2018-05-19");
    expect(date?.datatype).toBe("http://www.w3.org/2001/XMLSchema#date");
  });

  it("unescapes string literals", () => {
    const triples = parseTurtle(
      '@prefix ex: <http://example.org/> .\nex:s ex:p "line\\nbreak \\"q\\"" .');
    expect(triples[0].object).toBe('line\nbreak "q"');
  });

  it("supports language tags and the a keyword", () => {
    const triples = parseTurtle(
      "@prefix ex: <http://example.org/> .\n" +
      '<http://x/s> a ex:Thing .\n<http://x/s> ex:p "bonjour"@fr .');
    expect(triples[0].predicate).toBe("http://www.w3.org/1999/02/22-rdf-syntax-ns#type");
    expect(triples[1].language).toBe("fr");
  });

  it("rejects undeclared prefixes", () => {
    expect(() => parseTurtle('nope:a nope:b "x" .')).toThrow(/undeclared/);
  });
});

describe("fieldsFromTriples", () => {
  it("collects the displayed fields for the record detail check", () => {
    const record = parseTurtle(FIXTURE).filter(
      (t) => t.subject === EKG + "don-record2740");
    const fields = fieldsFromTriples(record);
    expect(fields.virus_extracted).toBe("Nipah Virus");
    expect(fields.country_extracted).toBe("India");
    expect(fields.date_extracted).toBe("2018-05-19");
    expect(fields.date_cases_Imputed).toBe("2018-05-31");
    expect(fields.cases_extracted).toBe("15");
    expect(fields.deaths_extracted).toBe("13");
    expect(fields.label).toBe("31-may-2018-nipah-virus-india-en");
  });
});
