"""RDF data model and serializers (Turtle, RDF/XML, N-Triples)."""

from __future__ import annotations

import re
from dataclasses import dataclass, field

RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
OWL = "http://www.w3.org/2002/07/owl#"
XSD = "http://www.w3.org/2001/XMLSchema#"
SKOS = "http://www.w3.org/2004/02/skos/core#"
OBO = "http://purl.obolibrary.org/obo/"
DCTERMS = "http://purl.org/dc/terms/"

#: Base namespace of the outbreak-event dataset; also the default graph base IRI.
EKG = "http://data.jrc.ec.europa.eu/dataset/89056048-7f5d-4d7c-96ad-f99d1c0f6601/"

#: Prefix block used by the serializers, in emission order.
PREFIXES = {
    "eKG": EKG,
    "rdf": RDF,
    "rdfs": RDFS,
    "owl": OWL,
    "xsd": XSD,
    "obo": OBO,
    "dcterms": DCTERMS,
    "skos": SKOS,
}

IRI = "iri"
LITERAL = "literal"
VARIABLE = "variable"


class RdfError(ValueError):
    pass


@dataclass(frozen=True)
class Term:
    kind: str
    value: str
    datatype: str | None = None
    language: str | None = None

    def __post_init__(self):
        if self.kind not in (IRI, LITERAL, VARIABLE):
            raise RdfError(f"unknown term kind: {self.kind!r}")
        if self.kind != LITERAL and (self.datatype or self.language):
            raise RdfError("datatype/language only allowed on literals")
        if self.datatype and self.language:
            raise RdfError("a literal cannot carry both datatype and language")

    @property
    def is_iri(self) -> bool:
        return self.kind == IRI

    @property
    def is_literal(self) -> bool:
        return self.kind == LITERAL

    @property
    def is_variable(self) -> bool:
        return self.kind == VARIABLE

    def lexical(self) -> str:
        """String coercion: lexical form for literals, the IRI string for IRIs."""
        return self.value


def iri(value: str) -> Term:
    return Term(IRI, value)


def literal(value: str, datatype: str | None = None, language: str | None = None) -> Term:
    return Term(LITERAL, value, datatype, language)


def variable(name: str) -> Term:
    return Term(VARIABLE, name)


@dataclass(frozen=True)
class Triple:
    subject: Term
    predicate: Term
    object: Term

    def __post_init__(self):
        if not self.subject.is_iri or not self.predicate.is_iri:
            raise RdfError("triple subject and predicate must be IRIs")


@dataclass
class Graph:
    name: str
    triples: set[Triple] = field(default_factory=set)

    def add(self, triple: Triple) -> None:
        self.triples.add(triple)

    def __len__(self) -> int:
        return len(self.triples)

    def subjects(self) -> set[Term]:
        return {t.subject for t in self.triples}


# --- shared lexical helpers -------------------------------------------------

_PN_LOCAL = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_.-]*$")
_IRI_BAD = re.compile(r'[\x00-\x20<>"{}|^`\\]')

_NUM_SUFFIX = re.compile(r"^(.*?)(\d+)$")


def _sort_key(value: str):
    """Lexicographic with numeric-aware tail so record2 sorts before record10."""
    m = _NUM_SUFFIX.match(value)
    if m:
        return (m.group(1), 1, int(m.group(2)))
    return (value, 0, 0)


def split_iri(value: str, prefixes: dict[str, str] = PREFIXES) -> tuple[str, str] | None:
    """Split into (prefix, local) when a declared namespace matches and the
    remainder is a safe local name; None otherwise."""
    best = None
    for prefix, ns in prefixes.items():
        if value.startswith(ns) and (best is None or len(ns) > len(prefixes[best])):
            best = prefix
    if best is None:
        return None
    local = value[len(prefixes[best]):]
    if local and not _PN_LOCAL.match(local):
        return None
    if local.endswith("."):
        return None
    return best, local


def _escape_literal(value: str) -> str:
    out = []
    for ch in value:
        if ch == "\\":
            out.append("\\\\")
        elif ch == '"':
            out.append('\\"')
        elif ch == "\n":
            out.append("\\n")
        elif ch == "\r":
            out.append("\\r")
        elif ch == "\t":
            out.append("\\t")
        elif ord(ch) < 0x20:
            out.append("\\u%04X" % ord(ch))
        else:
            out.append(ch)
    return "".join(out)


def _check_iri(value: str) -> str:
    if not value or _IRI_BAD.search(value):
        raise RdfError(f"not a serializable IRI: {value!r}")
    return value


# --- Turtle -----------------------------------------------------------------

def _turtle_term(term: Term) -> str:
    if term.is_variable:
        raise RdfError("cannot serialize a variable")
    if term.is_iri:
        split = split_iri(term.value)
        if split:
            return f"{split[0]}:{split[1]}"
        return f"<{_check_iri(term.value)}>"
    text = f'"{_escape_literal(term.value)}"'
    if term.language:
        return f"{text}@{term.language}"
    if term.datatype:
        split = split_iri(term.datatype)
        if split:
            return f"{text}^^{split[0]}:{split[1]}"
        return f"{text}^^<{_check_iri(term.datatype)}>"
    return text


def _triple_order(t: Triple):
    # Keep the record-description predicates in schema order, then the rest.
    known = [
        RDF + "type",
        RDFS + "subClassOf",
        RDFS + "label",
        EKG + "virus_extracted",
        EKG + "country_extracted",
        EKG + "date_extracted",
        EKG + "date_cases_Imputed",
        EKG + "cases_extracted",
        EKG + "deaths_extracted",
    ]
    p = t.predicate.value
    rank = known.index(p) if p in known else len(known)
    return (_sort_key(t.subject.value), rank, p, _sort_key(t.object.value), t.object.kind)


def serialize_turtle(graph: Graph) -> str:
    lines = [f"@prefix {p}: <{ns}> ." for p, ns in PREFIXES.items()]
    lines.append("")
    for t in sorted(graph.triples, key=_triple_order):
        lines.append(f"{_turtle_term(t.subject)} {_turtle_term(t.predicate)} {_turtle_term(t.object)} .")
    return "\n".join(lines) + "\n"


class TurtleParseError(RdfError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} at line {line}, column {column}")
        self.line = line
        self.column = column


class _TurtleLexer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _line_col(self, pos: int) -> tuple[int, int]:
        line = self.text.count("\n", 0, pos) + 1
        last = self.text.rfind("\n", 0, pos)
        return line, pos - last

    def error(self, message: str, pos: int | None = None):
        line, col = self._line_col(self.pos if pos is None else pos)
        raise TurtleParseError(message, line, col)

    def skip_ws(self) -> None:
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch in " \t\r\n":
                self.pos += 1
            elif ch == "#":
                nl = self.text.find("\n", self.pos)
                self.pos = len(self.text) if nl < 0 else nl + 1
            else:
                return

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take(self, expected: str) -> None:
        self.skip_ws()
        if not self.text.startswith(expected, self.pos):
            self.error(f"expected {expected!r}")
        self.pos += len(expected)

    def iriref(self) -> str:
        self.take("<")
        end = self.text.find(">", self.pos)
        if end < 0:
            self.error("unterminated IRI")
        value = self.text[self.pos:end]
        self.pos = end + 1
        return value

    def string(self) -> str:
        self.take('"')
        out = []
        while True:
            if self.pos >= len(self.text):
                self.error("unterminated string")
            ch = self.text[self.pos]
            if ch == '"':
                self.pos += 1
                return "".join(out)
            if ch == "\\":
                esc = self.text[self.pos + 1 : self.pos + 2]
                if esc == "n":
                    out.append("\n")
                elif esc == "r":
                    out.append("\r")
                elif esc == "t":
                    out.append("\t")
                elif esc == '"':
                    out.append('"')
                elif esc == "\\":
                    out.append("\\")
                elif esc == "u":
                    hexa = self.text[self.pos + 2 : self.pos + 6]
                    if len(hexa) != 4:
                        self.error("bad \\u escape")
                    out.append(chr(int(hexa, 16)))
                    self.pos += 6
                    continue
                elif esc == "U":
                    hexa = self.text[self.pos + 2 : self.pos + 10]
                    if len(hexa) != 8:
                        self.error("bad \\U escape")
                    out.append(chr(int(hexa, 16)))
                    self.pos += 10
                    continue
                else:
                    self.error(f"unknown escape \\{esc}")
                self.pos += 2
            else:
                out.append(ch)
                self.pos += 1

    def name(self) -> str:
        start = self.pos
        while self.pos < len(self.text) and re.match(r"[A-Za-z0-9_.-]", self.text[self.pos]):
            self.pos += 1
        return self.text[start:self.pos]


def parse_turtle(text: str, name: str = "") -> Graph:
    """Parse the Turtle subset the serializer emits, plus ';', ',' and 'a'."""
    lexer = _TurtleLexer(text)
    prefixes: dict[str, str] = {}
    graph = Graph(name=name)

    def resolve(prefix: str, local: str) -> str:
        if prefix not in prefixes:
            lexer.error(f"undeclared prefix {prefix!r}")
        return prefixes[prefix] + local

    def term() -> Term:
        ch = lexer.peek()
        if ch == "<":
            return iri(lexer.iriref())
        if ch == '"':
            value = lexer.string()
            if lexer.text.startswith("^^", lexer.pos):
                lexer.pos += 2
                if lexer.peek() == "<":
                    return literal(value, datatype=lexer.iriref())
                prefix = lexer.name()
                lexer.take(":")
                return literal(value, datatype=resolve(prefix, lexer.name()))
            if lexer.text.startswith("@", lexer.pos):
                lexer.pos += 1
                return literal(value, language=lexer.name())
            return literal(value)
        word = lexer.name()
        if not word and lexer.text.startswith(":", lexer.pos):
            word = ""
        elif not word:
            lexer.error("expected a term")
        if lexer.text.startswith(":", lexer.pos):
            lexer.pos += 1
            return iri(resolve(word, lexer.name()))
        if word == "a":
            return iri(RDF + "type")
        lexer.error(f"unexpected token {word!r}")

    while not lexer.at_end():
        if lexer.text.startswith("@prefix", lexer.pos):
            lexer.pos += len("@prefix")
            lexer.skip_ws()
            prefix = lexer.name()
            lexer.take(":")
            prefixes[prefix] = lexer.iriref()
            lexer.take(".")
            continue
        subject = term()
        while True:
            predicate = term()
            while True:
                graph.add(Triple(subject, predicate, term()))
                if lexer.peek() == ",":
                    lexer.take(",")
                    continue
                break
            if lexer.peek() == ";":
                while lexer.peek() == ";":
                    lexer.take(";")
                if lexer.peek() == ".":
                    break
                continue
            break
        lexer.take(".")
    return graph


# --- N-Triples --------------------------------------------------------------

def _ntriples_term(term: Term) -> str:
    if term.is_iri:
        return f"<{_check_iri(term.value)}>"
    text = f'"{_escape_literal(term.value)}"'
    if term.language:
        return f"{text}@{term.language}"
    if term.datatype:
        return f"{text}^^<{_check_iri(term.datatype)}>"
    return text


def serialize_ntriples(graph: Graph) -> str:
    lines = [
        f"{_ntriples_term(t.subject)} {_ntriples_term(t.predicate)} {_ntriples_term(t.object)} ."
        for t in sorted(graph.triples, key=_triple_order)
    ]
    return "\n".join(lines) + ("\n" if lines else "")


# --- RDF/XML ----------------------------------------------------------------

def _xml_escape(value: str, attribute: bool = False) -> str:
    value = value.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
    value = value.replace("\r", "&#13;")  # raw CR would be normalized away
    if attribute:
        value = value.replace('"', "&quot;").replace("\n", "&#10;").replace("\t", "&#9;")
    return value


def _xml_qname(predicate: str) -> str:
    split = split_iri(predicate)
    if split is None:
        raise RdfError(f"predicate not expressible as an XML qname: {predicate!r}")
    prefix, local = split
    if not re.match(r"[A-Za-z_][A-Za-z0-9_.-]*$", local):
        raise RdfError(f"predicate local name is not an XML name: {local!r}")
    if prefix == "eKG":
        return local  # default namespace
    return f"{prefix}:{local}"


def serialize_rdfxml(graph: Graph) -> str:
    decls = [f'    xmlns="{EKG}"']
    decls += [f'    xmlns:{p}="{ns}"' for p, ns in PREFIXES.items() if p != "eKG"]
    lines = ['<?xml version="1.0" encoding="utf-8"?>', "<rdf:RDF", *decls]
    lines[-1] += ">"

    by_subject: dict[Term, list[Triple]] = {}
    for t in sorted(graph.triples, key=_triple_order):
        by_subject.setdefault(t.subject, []).append(t)

    for subject in sorted(by_subject, key=lambda s: _sort_key(s.value)):
        triples = by_subject[subject]
        element = "rdf:Description"
        rest = triples
        for t in triples:
            if t.predicate.value == RDF + "type" and t.object.is_iri:
                try:
                    element = _xml_qname(t.object.value)
                except RdfError:
                    continue
                rest = [x for x in triples if x is not t]
                break
        lines.append(f'  <{element} rdf:about="{_xml_escape(subject.value, attribute=True)}">')
        for t in rest:
            tag = _xml_qname(t.predicate.value)
            o = t.object
            if o.is_iri:
                lines.append(f'    <{tag} rdf:resource="{_xml_escape(o.value, attribute=True)}"/>')
            elif o.language:
                lines.append(f'    <{tag} xml:lang="{o.language}">{_xml_escape(o.value)}</{tag}>')
            elif o.datatype:
                lines.append(
                    f'    <{tag} rdf:datatype="{_xml_escape(o.datatype, attribute=True)}">'
                    f"{_xml_escape(o.value)}</{tag}>"
                )
            else:
                lines.append(f"    <{tag}>{_xml_escape(o.value)}</{tag}>")
        lines.append(f"  </{element}>")
    lines.append("</rdf:RDF>")
    return "\n".join(lines) + "\n"
