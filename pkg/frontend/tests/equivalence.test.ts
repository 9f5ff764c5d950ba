/**
 * Live checks against the real service: the event list seen through the JSON
 * API must equal the result set of the corresponding SPARQL query, and the
 * record detail path must show the documented example values.
 *
 * Spawns `python3 -m epikg.cli serve` on the committed fixture graph; skipped
 * when the Python package is not installed.
 */

import { spawn, spawnSync } from "node:child_process";
import { createServer } from "node:net";
import { join } from "node:path";

import { afterAll, beforeAll, describe, expect, it } from "vitest";

import { Client } from "../src/api.js";
import { renderDetail } from "../src/render.js";
import { toTable } from "../src/sparqljson.js";
import { fieldsFromTriples, parseTurtle } from "../src/turtle.js";

const EKG = "http://data.jrc.ec.europa.eu/dataset/89056048-7f5d-4d7c-96ad-f99d1c0f6601/";
const PREFIX = `PREFIX eKG: <${EKG}>\n`;
const FIXTURE_TTL = join(__dirname, "fixtures", "eKG.ttl");

const pythonReady = spawnSync("python3", ["-c", "import epikg"], { timeout: 30000 })
  .status === 0;

function freePort(): Promise<number> {
  return new Promise((resolve, reject) => {
    const server = createServer();
    server.listen(0, "127.0.0.1", () => {
      const address = server.address();
      if (address && typeof address === "object") {
        const port = address.port;
        server.close(() => resolve(port));
      } else {
        reject(new Error("no port"));
      }
    });
  });
}

describe.skipIf(!pythonReady)("live service equivalence", () => {
  let child: ReturnType<typeof spawn>;
  let client: Client;

  beforeAll(async () => {
    const port = await freePort();
    child = spawn("python3", [
      "-m", "epikg.cli", "serve", "--data", FIXTURE_TTL,
      "--bind", `127.0.0.1:${port}`,
    ], { stdio: "ignore" });
    client = new Client(`http://127.0.0.1:${port}`);
    const deadline = Date.now() + 30000;
    for (;;) {
      try {
        await client.fetchFacets();
        break;
      } catch {
        if (Date.now() > deadline) throw new Error("service did not start");
        await new Promise((r) => setTimeout(r, 200));
      }
    }
  }, 40000);

  afterAll(() => {
    child?.kill();
  });

  it("matches SPARQL results for 20 random facet combinations", async () => {
    const facets = await client.fetchFacets();
    const diseases = [...facets.diseases.map((f) => String(f.value)), null];
    const countries = [...facets.countries.map((f) => String(f.value)), null];
    const years = [...facets.years.map((f) => Number(f.value)), null];
    let seed = 42;
    const pick = <T>(xs: T[]): T => {
      seed = (seed * 1103515245 + 12345) % 2147483648;
      return xs[seed % xs.length];
    };
    for (let i = 0; i < 20; i += 1) {
      const disease = pick(diseases);
      const country = pick(countries);
      const year = pick(years);
      const patterns: string[] = [];
      if (disease !== null) {
        patterns.push(`?event eKG:virus_extracted ?d . FILTER (?d = "${disease}") .`);
      }
      if (country !== null) {
        patterns.push(`?event eKG:country_extracted ?c . FILTER (?c = "${country}") .`);
      }
      if (year !== null) {
        patterns.push(`?event eKG:date_extracted ?dt . FILTER (year(?dt) = ${year}) .`);
      }
      if (patterns.length === 0) patterns.push("?event eKG:virus_extracted ?d .");
      const query = PREFIX + `SELECT ?event FROM <eKG> WHERE { ${patterns.join(" ")} }`;
      const viaSparql = new Set(
        (await client.sparql(query)).results.bindings.map((b) => b.event.value));
      const viaApi = new Set(
        (await client.fetchEvents({ disease, country, year })).items.map((e) => e.iri));
      expect(viaApi).toEqual(viaSparql);
    }
  }, 30000);

  it("facet counts sum per dimension to events with that field present", async () => {
    const facets = await client.fetchFacets();
    const all = await client.fetchEvents({ pageSize: 10000 });
    const withDisease = all.items.filter((e) => e.disease !== null).length;
    const withDate = all.items.filter((e) => e.date !== null).length;
    expect(facets.diseases.reduce((n, f) => n + f.count, 0)).toBe(withDisease);
    expect(facets.years.reduce((n, f) => n + f.count, 0)).toBe(withDate);
  });

  it("record detail shows the documented example values", async () => {
    const page = await client.fetchEvents({ pageSize: 10000 });
    const item = page.items.find((e) => e.id === "don-record2740");
    expect(item).toBeDefined();
    expect(item).toMatchObject({
      disease: "Nipah Virus", country: "India", date: "2018-05-19",
      imputed_date: "2018-05-31", cases: 15, deaths: 13,
    });
    const turtle = await client.describe(item!.iri, "text/turtle");
    const html = renderDetail(item!, turtle);
    for (const value of ["Nipah Virus", "India", "2018-05-19", "15", "13"]) {
      expect(html).toContain(value);
    }
    // download round-trip oracle: parsed turtle equals the displayed fields
    const fields = fieldsFromTriples(
      parseTurtle(turtle).filter((t) => t.subject === item!.iri));
    expect(fields.virus_extracted).toBe(item!.disease);
    expect(fields.country_extracted).toBe(item!.country);
    expect(fields.date_extracted).toBe(item!.date);
    expect(Number(fields.cases_extracted)).toBe(item!.cases);
    expect(Number(fields.deaths_extracted)).toBe(item!.deaths);
  });

  it("console path renders the Nipah query as a single-row table", async () => {
    const query = PREFIX +
      'SELECT ?event FROM <eKG> WHERE {?event eKG:virus_extracted ?label . ' +
      'FILTER (?label = "Nipah Virus")}';
    const table = toTable(await client.sparql(query));
    expect(table.columns).toEqual(["event"]);
    expect(table.rows).toEqual([["eKG:don-record2740"]]);
  });

  it("surfaces parse errors with the server's offset message", async () => {
    await expect(client.sparql("SELECT nonsense")).rejects.toMatchObject({
      status: 400,
    });
  });
});
