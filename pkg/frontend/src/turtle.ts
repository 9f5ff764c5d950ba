/** Minimal Turtle reader for the service's one-triple-per-line output.
 *
 * Only used to cross-check that downloaded RDF matches what a detail page
 * displays; all analytics stay server-side.
 */

export interface ParsedTriple {
  subject: string;
  predicate: string;
  object: string;
  objectKind: "iri" | "literal";
  datatype?: string;
  language?: string;
}

interface Cursor {
  text: string;
  pos: number;
}

function skipWs(c: Cursor): void {
  while (c.pos < c.text.length) {
    const ch = c.text[c.pos];
    if (ch === "#") {
      const nl = c.text.indexOf("\n", c.pos);
      c.pos = nl < 0 ? c.text.length : nl + 1;
    } else if (ch === " " || ch === "\t" || ch === "\n" || ch === "\r") {
      c.pos += 1;
    } else {
      return;
    }
  }
}

function readIri(c: Cursor): string {
  const end = c.text.indexOf(">", c.pos);
  if (end < 0) throw new Error("unterminated IRI");
  const value = c.text.slice(c.pos + 1, end);
  c.pos = end + 1;
  return value;
}

function readString(c: Cursor): string {
  let out = "";
  c.pos += 1; // opening quote
  while (c.pos < c.text.length) {
    const ch = c.text[c.pos];
    if (ch === '"') {
      c.pos += 1;
      return out;
    }
    if (ch === "\\") {
      const esc = c.text[c.pos + 1];
      const simple: Record<string, string> = {
        n: "\n", r: "\r", t: "\t", '"': '"', "\\": "\\",
      };
      if (esc in simple) {
        out += simple[esc];
        c.pos += 2;
      } else if (esc === "u" || esc === "U") {
        const width = esc === "u" ? 4 : 8;
        const hex = c.text.slice(c.pos + 2, c.pos + 2 + width);
        out += String.fromCodePoint(parseInt(hex, 16));
        c.pos += 2 + width;
      } else {
        throw new Error(`unknown escape \\${esc}`);
      }
    } else {
      out += ch;
      c.pos += 1;
    }
  }
  throw new Error("unterminated string");
}

function readName(c: Cursor): string {
  const start = c.pos;
  while (c.pos < c.text.length && /[A-Za-z0-9_.-]/.test(c.text[c.pos])) c.pos += 1;
  return c.text.slice(start, c.pos);
}

export function parseTurtle(text: string): ParsedTriple[] {
  const c: Cursor = { text, pos: 0 };
  const prefixes: Record<string, string> = {};
  const triples: ParsedTriple[] = [];

  const resolve = (prefix: string, local: string): string => {
    if (!(prefix in prefixes)) throw new Error(`undeclared prefix ${prefix}`);
    return prefixes[prefix] + local;
  };

  const readTerm = (): { value: string; kind: "iri" | "literal"; datatype?: string; language?: string } => {
    skipWs(c);
    const ch = c.text[c.pos];
    if (ch === "<") return { value: readIri(c), kind: "iri" };
    if (ch === '"') {
      const value = readString(c);
      if (c.text.startsWith("^^", c.pos)) {
        c.pos += 2;
        if (c.text[c.pos] === "<") return { value, kind: "literal", datatype: readIri(c) };
        const prefix = readName(c);
        c.pos += 1; // ':'
        return { value, kind: "literal", datatype: resolve(prefix, readName(c)) };
      }
      if (c.text[c.pos] === "@") {
        c.pos += 1;
        return { value, kind: "literal", language: readName(c) };
      }
      return { value, kind: "literal" };
    }
    const word = readName(c);
    if (c.text[c.pos] === ":") {
      c.pos += 1;
      return { value: resolve(word, readName(c)), kind: "iri" };
    }
    if (word === "a") {
      return { value: "http://www.w3.org/1999/02/22-rdf-syntax-ns#type", kind: "iri" };
    }
    throw new Error(`unexpected token ${word || ch}`);
  };

  for (;;) {
    skipWs(c);
    if (c.pos >= c.text.length) break;
    if (c.text.startsWith("@prefix", c.pos)) {
      c.pos += "@prefix".length;
      skipWs(c);
      const prefix = readName(c);
      c.pos += 1; // ':'
      skipWs(c);
      prefixes[prefix] = readIri(c);
      skipWs(c);
      c.pos += 1; // '.'
      continue;
    }
    const subject = readTerm();
    const predicate = readTerm();
    const object = readTerm();
    skipWs(c);
    if (c.text[c.pos] !== ".") throw new Error("expected '.' after triple");
    c.pos += 1;
    triples.push({
      subject: subject.value,
      predicate: predicate.value,
      object: object.value,
      objectKind: object.kind,
      datatype: object.datatype,
      language: object.language,
    });
  }
  return triples;
}

/** Field values a detail page shows, pulled from the record's triples. */
export function fieldsFromTriples(triples: ParsedTriple[]): Record<string, string> {
  const ns = "http://data.jrc.ec.europa.eu/dataset/89056048-7f5d-4d7c-96ad-f99d1c0f6601/";
  const out: Record<string, string> = {};
  for (const t of triples) {
    if (t.predicate.startsWith(ns)) out[t.predicate.slice(ns.length)] = t.object;
    if (t.predicate === "http://www.w3.org/2000/01/rdf-schema#label") out.label = t.object;
  }
  return out;
}
