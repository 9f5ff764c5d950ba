"""SPARQL-subset parser, evaluator, and result serialization.

Supported grammar: PREFIX declarations; SELECT with a variable list, `*`, or
COUNT(*); optional FROM <graph>; WHERE with dot-separated triple patterns and
FILTER expressions (equality, regex over str(), year() equality); DESCRIBE
<resource>. ORDER BY and LIMIT are accepted as extensions for paging UIs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from datetime import date

from .rdf import IRI, LITERAL, VARIABLE, XSD, Term, iri, literal, variable
from .store import TripleStore


class SparqlError(Exception):
    pass


class ParseError(SparqlError):
    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at offset {offset})")
        self.offset = offset


class EvalError(SparqlError):
    pass


@dataclass(frozen=True)
class TriplePattern:
    subject: Term
    predicate: Term
    object: Term

    def variables(self) -> list[str]:
        return [t.value for t in (self.subject, self.predicate, self.object)
                if t.is_variable]


@dataclass(frozen=True)
class Equals:
    var: str
    constant: str | int
    coerce: str | None = None  # None or "str"

    def variables(self) -> set[str]:
        return {self.var}


@dataclass(frozen=True)
class YearEquals:
    var: str
    year: int

    def variables(self) -> set[str]:
        return {self.var}


@dataclass(frozen=True)
class Regex:
    var: str
    pattern: str
    flags: str = ""

    def variables(self) -> set[str]:
        return {self.var}


FilterExpr = Equals | YearEquals | Regex


@dataclass(frozen=True)
class Projection:
    kind: str  # "vars" | "star" | "count"
    variables: tuple[str, ...] = ()


@dataclass(frozen=True)
class Query:
    form: str  # "select" | "describe"
    prefixes: dict[str, str] = field(default_factory=dict, compare=False)
    projection: Projection = Projection("star")
    graph: str | None = None
    patterns: tuple[TriplePattern, ...] = ()
    filters: tuple[FilterExpr, ...] = ()
    describe_target: Term | None = None
    order_by: tuple[str, bool] | None = None  # (variable, descending)
    limit: int | None = None


@dataclass
class QueryResult:
    variables: list[str]
    rows: list[dict[str, Term]]
    count: int | None = None

    @property
    def is_count(self) -> bool:
        return self.count is not None


# --- tokenizer ---------------------------------------------------------------

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<comment>\#[^\n]*)
      | (?P<iriref><[^<>"{}|^`\\\s]*>)
      | (?P<var>\?[A-Za-z_][A-Za-z0-9_]*)
      | (?P<string>"(?:[^"\\]|\\.)*")
      | (?P<integer>-?\d+)
      | (?P<pname>[A-Za-z][A-Za-z0-9_-]*:(?:[A-Za-z0-9_](?:[A-Za-z0-9_.-]*[A-Za-z0-9_-])?)?)
      | (?P<word>[A-Za-z_][A-Za-z0-9_]*)
      | (?P<langtag>@[A-Za-z][A-Za-z0-9-]*)
      | (?P<punct>\^\^|[{}().,=*;])
    )""",
    re.VERBOSE,
)

_STRING_ESCAPES = {"n": "\n", "t": "\t", "r": "\r", '"': '"', "\\": "\\", "'": "'"}


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    offset: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            raise ParseError(f"unexpected character {stripped[0]!r}", len(text) - len(stripped))
        pos = m.end()
        kind = m.lastgroup
        if kind == "comment":
            continue
        tokens.append(_Token(kind, m.group(kind), m.start(kind)))
    return tokens


def _unescape_string(text: str) -> str:
    body = text[1:-1]
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            out.append(_STRING_ESCAPES.get(body[i + 1], body[i + 1]))
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = _tokenize(text)
        self.pos = 0
        self.prefixes: dict[str, str] = {}

    def error(self, message: str) -> ParseError:
        offset = self.tokens[self.pos].offset if self.pos < len(self.tokens) else len(self.text)
        return ParseError(message, offset)

    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> _Token:
        token = self.peek()
        if token is None:
            raise ParseError("unexpected end of query", len(self.text))
        self.pos += 1
        return token

    def at_keyword(self, word: str) -> bool:
        token = self.peek()
        return token is not None and token.kind == "word" and token.text.upper() == word

    def expect_keyword(self, word: str) -> None:
        if not self.at_keyword(word):
            raise self.error(f"expected keyword {word}")
        self.pos += 1

    def expect_punct(self, text: str) -> None:
        token = self.peek()
        if token is None or token.kind != "punct" or token.text != text:
            raise self.error(f"expected {text!r}")
        self.pos += 1

    def at_punct(self, text: str) -> bool:
        token = self.peek()
        return token is not None and token.kind == "punct" and token.text == text

    def resolve_pname(self, token: _Token) -> str:
        prefix, _, local = token.text.partition(":")
        if prefix not in self.prefixes:
            raise ParseError(f"unresolvable prefix {prefix!r}", token.offset)
        return self.prefixes[prefix] + local

    # grammar ------------------------------------------------------------

    def parse(self) -> Query:
        while self.at_keyword("PREFIX"):
            self.pos += 1
            token = self.next()
            if token.kind != "pname" or not token.text.endswith(":"):
                raise ParseError("expected a prefix name ending in ':'", token.offset)
            name = token.text[:-1]
            iritoken = self.next()
            if iritoken.kind != "iriref":
                raise ParseError("expected an <IRI> after the prefix name", iritoken.offset)
            self.prefixes[name] = iritoken.text[1:-1]
        if self.at_keyword("SELECT"):
            return self.parse_select()
        if self.at_keyword("DESCRIBE"):
            return self.parse_describe()
        for unsupported in ("CONSTRUCT", "ASK"):
            if self.at_keyword(unsupported):
                raise self.error(f"{unsupported} queries are not supported")
        raise self.error("expected SELECT or DESCRIBE")

    def parse_select(self) -> Query:
        self.expect_keyword("SELECT")
        projection = self.parse_projection()
        graph = self.parse_from()
        patterns, filters = self.parse_where()
        order_by = self.parse_order_by()
        limit = self.parse_limit()
        if self.peek() is not None:
            raise self.error("unexpected trailing content")
        query = Query(form="select", prefixes=dict(self.prefixes),
                      projection=projection, graph=graph,
                      patterns=tuple(patterns), filters=tuple(filters),
                      order_by=order_by, limit=limit)
        self.check_variables(query)
        return query

    def parse_describe(self) -> Query:
        self.expect_keyword("DESCRIBE")
        token = self.next()
        if token.kind == "iriref":
            target = iri(token.text[1:-1])
        elif token.kind == "pname":
            target = iri(self.resolve_pname(token))
        else:
            raise ParseError("DESCRIBE expects a resource IRI", token.offset)
        graph = self.parse_from()
        if self.peek() is not None:
            raise self.error("unexpected trailing content")
        return Query(form="describe", prefixes=dict(self.prefixes),
                     graph=graph, describe_target=target)

    def parse_projection(self) -> Projection:
        if self.at_punct("*"):
            self.pos += 1
            return Projection("star")
        if self.at_keyword("COUNT"):
            self.pos += 1
            self.expect_punct("(")
            self.expect_punct("*")
            self.expect_punct(")")
            return Projection("count")
        names = []
        while self.peek() is not None and self.peek().kind == "var":
            names.append(self.next().text[1:])
        if not names:
            raise self.error("expected '*', COUNT(*) or at least one ?variable")
        return Projection("vars", tuple(names))

    def parse_from(self) -> str | None:
        if not self.at_keyword("FROM"):
            return None
        self.pos += 1
        token = self.next()
        if token.kind != "iriref":
            raise ParseError("FROM expects a <graph> IRI", token.offset)
        return token.text[1:-1]

    def parse_where(self) -> tuple[list[TriplePattern], list[FilterExpr]]:
        self.expect_keyword("WHERE")
        self.expect_punct("{")
        patterns: list[TriplePattern] = []
        filters: list[FilterExpr] = []
        while not self.at_punct("}"):
            if self.peek() is None:
                raise self.error("unterminated WHERE block")
            if self.at_keyword("FILTER"):
                self.pos += 1
                filters.append(self.parse_filter())
            else:
                s = self.parse_term(position="subject")
                p = self.parse_term(position="predicate")
                o = self.parse_term(position="object")
                patterns.append(TriplePattern(s, p, o))
            if self.at_punct("."):
                self.pos += 1
        self.expect_punct("}")
        return patterns, filters

    def parse_term(self, position: str) -> Term:
        token = self.next()
        if token.kind == "var":
            return variable(token.text[1:])
        if token.kind == "iriref":
            return iri(token.text[1:-1])
        if token.kind == "pname":
            return iri(self.resolve_pname(token))
        if token.kind == "word" and token.text == "a" and position == "predicate":
            return iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type")
        if position == "object":
            if token.kind == "string":
                value = _unescape_string(token.text)
                if self.at_punct("^^"):
                    self.pos += 1
                    dt_token = self.next()
                    if dt_token.kind == "iriref":
                        return literal(value, datatype=dt_token.text[1:-1])
                    if dt_token.kind == "pname":
                        return literal(value, datatype=self.resolve_pname(dt_token))
                    raise ParseError("expected a datatype IRI after ^^", dt_token.offset)
                next_token = self.peek()
                if next_token is not None and next_token.kind == "langtag":
                    self.pos += 1
                    return literal(value, language=next_token.text[1:])
                return literal(value)
            if token.kind == "integer":
                return literal(token.text, datatype=XSD + "integer")
        raise ParseError(f"expected a term, found {token.text!r}", token.offset)

    def parse_filter(self) -> FilterExpr:
        if self.at_keyword("REGEX"):  # FILTER regex(...) has no outer parens
            self.pos += 1
            return self.parse_regex_args()
        self.expect_punct("(")
        if self.at_keyword("REGEX"):
            self.pos += 1
            expr = self.parse_regex_args()
        else:
            expr = self.parse_comparison()
        self.expect_punct(")")
        return expr

    def parse_regex_args(self) -> Regex:
        self.expect_punct("(")
        self.expect_keyword("STR")
        self.expect_punct("(")
        var_token = self.next()
        if var_token.kind != "var":
            raise ParseError("regex expects str(?variable)", var_token.offset)
        self.expect_punct(")")
        self.expect_punct(",")
        pattern_token = self.next()
        if pattern_token.kind != "string":
            raise ParseError("regex expects a string pattern", pattern_token.offset)
        flags = ""
        if self.at_punct(","):
            self.pos += 1
            flags_token = self.next()
            if flags_token.kind != "string":
                raise ParseError("regex flags must be a string", flags_token.offset)
            flags = _unescape_string(flags_token.text)
        self.expect_punct(")")
        return Regex(var_token.text[1:], _unescape_string(pattern_token.text), flags)

    def parse_comparison(self) -> FilterExpr:
        token = self.next()
        func = None
        if token.kind == "word" and token.text.upper() in ("YEAR", "STR"):
            func = token.text.upper()
            self.expect_punct("(")
            var_token = self.next()
            if var_token.kind != "var":
                raise ParseError(f"{func.lower()}() expects a ?variable", var_token.offset)
            self.expect_punct(")")
            name = var_token.text[1:]
        elif token.kind == "var":
            name = token.text[1:]
        else:
            raise ParseError("filter expects ?variable, str(?v) or year(?v)", token.offset)
        self.expect_punct("=")
        value_token = self.next()
        if func == "YEAR":
            if value_token.kind != "integer":
                raise ParseError("year() comparison expects an integer", value_token.offset)
            return YearEquals(name, int(value_token.text))
        if value_token.kind == "string":
            return Equals(name, _unescape_string(value_token.text),
                          coerce="str" if func == "STR" else None)
        if value_token.kind == "integer":
            if func == "STR":
                raise ParseError("str() comparison expects a string", value_token.offset)
            return Equals(name, int(value_token.text))
        raise ParseError("filter comparison expects a string or integer constant",
                         value_token.offset)

    def check_variables(self, query: Query) -> None:
        bound: set[str] = set()
        for pattern in query.patterns:
            bound.update(pattern.variables())
        if query.projection.kind == "vars":
            for name in query.projection.variables:
                if name not in bound:
                    raise self.error(f"projected variable ?{name} never occurs in WHERE")
        for filt in query.filters:
            for name in filt.variables():
                if name not in bound:
                    raise self.error(f"filter variable ?{name} never occurs in WHERE")
        if query.order_by and query.order_by[0] not in bound:
            raise self.error(f"ORDER BY variable ?{query.order_by[0]} never occurs in WHERE")

    def parse_order_by(self) -> tuple[str, bool] | None:
        if not self.at_keyword("ORDER"):
            return None
        self.pos += 1
        self.expect_keyword("BY")
        descending = False
        if self.at_keyword("DESC") or self.at_keyword("ASC"):
            descending = self.next().text.upper() == "DESC"
            self.expect_punct("(")
            token = self.next()
            self.expect_punct(")")
        else:
            token = self.next()
        if token.kind != "var":
            raise ParseError("ORDER BY expects a ?variable", token.offset)
        return (token.text[1:], descending)

    def parse_limit(self) -> int | None:
        if not self.at_keyword("LIMIT"):
            return None
        self.pos += 1
        token = self.next()
        if token.kind != "integer" or int(token.text) < 0:
            raise ParseError("LIMIT expects a non-negative integer", token.offset)
        return int(token.text)


def parse_query(text: str) -> Query:
    return _Parser(text).parse()


def print_query(query: Query) -> str:
    """Pretty-print an AST back to query text (parses to an equal AST)."""
    lines = [f"PREFIX {name}: <{ns}>" for name, ns in query.prefixes.items()]
    if query.form == "describe":
        lines.append(f"DESCRIBE <{query.describe_target.value}>")
        if query.graph:
            lines.append(f"FROM <{query.graph}>")
        return "\n".join(lines)
    if query.projection.kind == "star":
        projection = "*"
    elif query.projection.kind == "count":
        projection = "COUNT(*)"
    else:
        projection = " ".join(f"?{v}" for v in query.projection.variables)
    lines.append(f"SELECT {projection}")
    if query.graph:
        lines.append(f"FROM <{query.graph}>")
    body = []
    for pattern in query.patterns:
        body.append(" ".join(_print_term(t) for t in
                             (pattern.subject, pattern.predicate, pattern.object)) + " .")
    for filt in query.filters:
        body.append(_print_filter(filt))
    lines.append("WHERE {")
    lines.extend("  " + item for item in body)
    lines.append("}")
    if query.order_by:
        name, descending = query.order_by
        lines.append(f"ORDER BY {'DESC(' if descending else ''}?{name}{')' if descending else ''}")
    if query.limit is not None:
        lines.append(f"LIMIT {query.limit}")
    return "\n".join(lines)


def _print_term(term: Term) -> str:
    if term.is_variable:
        return f"?{term.value}"
    if term.is_iri:
        return f"<{term.value}>"
    if term.datatype == XSD + "integer":
        return term.value
    escaped = term.value.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
    if term.datatype:
        return f'"{escaped}"^^<{term.datatype}>'
    if term.language:
        return f'"{escaped}"@{term.language}'
    return f'"{escaped}"'


def _print_filter(filt: FilterExpr) -> str:
    if isinstance(filt, YearEquals):
        return f"FILTER (year(?{filt.var}) = {filt.year})"
    if isinstance(filt, Regex):
        flags = f', "{filt.flags}"' if filt.flags else ""
        return f'FILTER regex(str(?{filt.var}), "{filt.pattern}"{flags})'
    lhs = f"str(?{filt.var})" if filt.coerce == "str" else f"?{filt.var}"
    if isinstance(filt.constant, int):
        return f"FILTER ({lhs} = {filt.constant})"
    escaped = filt.constant.replace("\\", "\\\\").replace('"', '\\"')
    return f'FILTER ({lhs} = "{escaped}")'


# --- evaluation ---------------------------------------------------------------

def str_coerce(term: Term) -> str:
    """str(): lexical form of a literal, the IRI string of an IRI."""
    return term.value


def _year_of(term: Term) -> int | None:
    if term.kind != LITERAL or term.datatype != XSD + "date":
        return None
    try:
        return date.fromisoformat(term.value).year
    except ValueError:
        return None


def filter_matches(filt: FilterExpr, binding: dict[str, Term]) -> bool:
    term = binding[filt.var]
    if isinstance(filt, YearEquals):
        return _year_of(term) == filt.year
    if isinstance(filt, Regex):
        flags = re.IGNORECASE if "i" in filt.flags else 0
        try:
            return re.search(filt.pattern, str_coerce(term), flags) is not None
        except re.error:
            return False
    if isinstance(filt.constant, int):
        if term.kind != LITERAL:
            return False
        try:
            return int(term.value) == filt.constant
        except ValueError:
            return False
    return str_coerce(term) == filt.constant


def _substitute(pattern: TriplePattern, binding: dict[str, Term]):
    out = []
    for term in (pattern.subject, pattern.predicate, pattern.object):
        if term.is_variable:
            out.append(binding.get(term.value))
        else:
            out.append(term)
    return out


def evaluate(query: Query, store: TripleStore, default_graph: str | None = None) -> QueryResult:
    """Index-backed left-to-right joins; filters fire once their vars bind."""
    if query.form == "describe":
        raise EvalError("use describe() for DESCRIBE queries")
    graph_name = query.graph or default_graph
    snapshot = store.snapshot(graph_name) if graph_name is not None else None
    bindings: list[dict[str, Term]] = [{}]
    remaining = list(query.filters)

    def apply_ready_filters(rows: list[dict[str, Term]]) -> list[dict[str, Term]]:
        nonlocal remaining
        if not rows:
            return rows
        bound = set(rows[0])
        ready = [f for f in remaining if f.variables() <= bound]
        remaining = [f for f in remaining if f.variables() - bound]
        for filt in ready:
            rows = [b for b in rows if filter_matches(filt, b)]
        return rows

    for pattern in query.patterns:
        next_bindings: list[dict[str, Term]] = []
        if snapshot is not None:
            for binding in bindings:
                s, p, o = _substitute(pattern, binding)
                for match in snapshot.match(s, p, o):
                    extended = dict(binding)
                    consistent = True
                    for term, value in ((pattern.subject, match.subject),
                                        (pattern.predicate, match.predicate),
                                        (pattern.object, match.object)):
                        if term.is_variable:
                            # a variable may repeat within one pattern
                            if extended.get(term.value, value) != value:
                                consistent = False
                                break
                            extended[term.value] = value
                    if consistent:
                        next_bindings.append(extended)
        bindings = apply_ready_filters(next_bindings)
        if not bindings:
            break
    for filt in remaining:
        bindings = [b for b in bindings if filt.var in b and filter_matches(filt, b)]

    if query.projection.kind == "count":
        return QueryResult(variables=["count"], rows=[], count=len(bindings))

    if query.projection.kind == "star":
        seen: list[str] = []
        for pattern in query.patterns:
            for name in pattern.variables():
                if name not in seen:
                    seen.append(name)
        names = seen
    else:
        names = list(query.projection.variables)

    rows = [{name: b[name] for name in names if name in b} for b in bindings]
    if query.order_by:
        name, descending = query.order_by
        rows.sort(key=lambda r: (name not in r, r[name].value if name in r else ""),
                  reverse=descending)
    if query.limit is not None:
        rows = rows[:query.limit]
    return QueryResult(variables=names, rows=rows)


def describe(query: Query, store: TripleStore, default_graph: str | None = None):
    if query.form != "describe":
        raise EvalError("not a DESCRIBE query")
    graph_name = query.graph or default_graph
    snapshot = store.snapshot(graph_name) if graph_name is not None else None
    if snapshot is None:
        return set()
    return set(snapshot.match(query.describe_target, None, None))


# --- result serialization -----------------------------------------------------

def _term_json(term: Term) -> dict:
    if term.kind == IRI:
        return {"type": "uri", "value": term.value}
    out = {"type": "literal", "value": term.value}
    if term.datatype:
        out["datatype"] = term.datatype
    if term.language:
        out["xml:lang"] = term.language
    return out


def _count_rows(result: QueryResult) -> list[dict[str, Term]]:
    return [{"count": literal(str(result.count), datatype=XSD + "integer")}]


def serialize_results(result: QueryResult, format: str) -> bytes:
    rows = _count_rows(result) if result.is_count else result.rows
    variables = result.variables
    if format == "json":
        import json

        payload = {
            "head": {"vars": variables},
            "results": {"bindings": [
                {name: _term_json(term) for name, term in row.items()} for row in rows
            ]},
        }
        return json.dumps(payload, ensure_ascii=False, indent=2).encode("utf-8")
    if format == "xml":
        from xml.sax.saxutils import escape, quoteattr

        lines = ['<?xml version="1.0"?>',
                 '<sparql xmlns="http://www.w3.org/2005/sparql-results#">', "  <head>"]
        lines += [f"    <variable name={quoteattr(v)}/>" for v in variables]
        lines += ["  </head>", "  <results>"]
        for row in rows:
            lines.append("    <result>")
            for name, term in row.items():
                lines.append(f"      <binding name={quoteattr(name)}>")
                if term.kind == IRI:
                    lines.append(f"        <uri>{escape(term.value)}</uri>")
                elif term.datatype:
                    lines.append(f"        <literal datatype={quoteattr(term.datatype)}>"
                                 f"{escape(term.value)}</literal>")
                elif term.language:
                    lines.append(f'        <literal xml:lang="{term.language}">'
                                 f"{escape(term.value)}</literal>")
                else:
                    lines.append(f"        <literal>{escape(term.value)}</literal>")
                lines.append("      </binding>")
            lines.append("    </result>")
        lines += ["  </results>", "</sparql>"]
        return ("\n".join(lines) + "\n").encode("utf-8")
    if format == "csv":
        import csv
        import io

        out = io.StringIO()
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(variables)
        for row in rows:
            writer.writerow([str_coerce(row[v]) if v in row else "" for v in variables])
        return out.getvalue().encode("utf-8")
    if format == "html":
        from xml.sax.saxutils import escape

        header = "".join(f"<th>{escape(v)}</th>" for v in variables)
        body = []
        for row in rows:
            cells = "".join(
                f"<td>{escape(str_coerce(row[v])) if v in row else ''}</td>"
                for v in variables)
            body.append(f"<tr>{cells}</tr>")
        table = (f"<table><thead><tr>{header}</tr></thead>"
                 f"<tbody>{''.join(body)}</tbody></table>")
        return (f"<!DOCTYPE html><html><body>{table}</body></html>").encode("utf-8")
    raise ValueError(f"unknown result format: {format!r}")
