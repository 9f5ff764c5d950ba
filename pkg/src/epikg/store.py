"""In-memory named-graph triple store with SPO/POS/OSP indexes."""

from __future__ import annotations

import threading

from .rdf import Graph, Term, Triple


class _GraphIndex:
    def __init__(self, graph: Graph):
        self.graph = graph
        self.rebuild()

    def rebuild(self) -> None:
        self.spo: dict[Term, dict[Term, set[Term]]] = {}
        self.pos: dict[Term, dict[Term, set[Term]]] = {}
        self.osp: dict[Term, dict[Term, set[Term]]] = {}
        for t in self.graph.triples:
            self.spo.setdefault(t.subject, {}).setdefault(t.predicate, set()).add(t.object)
            self.pos.setdefault(t.predicate, {}).setdefault(t.object, set()).add(t.subject)
            self.osp.setdefault(t.object, {}).setdefault(t.subject, set()).add(t.predicate)

    def match(self, s: Term | None, p: Term | None, o: Term | None) -> list[Triple]:
        """Triples matching the pattern; None stands for a wildcard.

        The index is picked by which positions are bound, so each lookup
        touches only candidate triples.
        """
        if s is not None and p is not None:
            objs = self.spo.get(s, {}).get(p, set())
            if o is not None:
                return [Triple(s, p, o)] if o in objs else []
            return [Triple(s, p, obj) for obj in objs]
        if p is not None and o is not None:
            return [Triple(subj, p, o) for subj in self.pos.get(p, {}).get(o, set())]
        if s is not None and o is not None:
            return [Triple(s, pred, o) for pred in self.osp.get(o, {}).get(s, set())]
        if s is not None:
            return [Triple(s, pred, obj)
                    for pred, objs in self.spo.get(s, {}).items() for obj in objs]
        if p is not None:
            return [Triple(subj, p, obj)
                    for obj, subjs in self.pos.get(p, {}).items() for subj in subjs]
        if o is not None:
            return [Triple(subj, pred, o)
                    for subj, preds in self.osp.get(o, {}).items() for pred in preds]
        return list(self.graph.triples)

    def selectivity(self, s: Term | None, p: Term | None, o: Term | None) -> int:
        """Candidate count for a pattern, used to order index probes."""
        if s is not None and p is not None:
            return len(self.spo.get(s, {}).get(p, ()))
        if p is not None and o is not None:
            return len(self.pos.get(p, {}).get(o, ()))
        if s is not None and o is not None:
            return len(self.osp.get(o, {}).get(s, ()))
        if s is not None:
            return sum(len(v) for v in self.spo.get(s, {}).values())
        if p is not None:
            return sum(len(v) for v in self.pos.get(p, {}).values())
        if o is not None:
            return sum(len(v) for v in self.osp.get(o, {}).values())
        return len(self.graph.triples)


class TripleStore:
    """Many readers, exclusive writes; queries see a consistent snapshot."""

    def __init__(self):
        self._lock = threading.Lock()
        self._indexes: dict[str, _GraphIndex] = {}

    def load_graph(self, name: str, graph: Graph) -> None:
        index = _GraphIndex(graph)
        with self._lock:
            self._indexes[name] = index

    def drop_graph(self, name: str) -> None:
        with self._lock:
            self._indexes.pop(name, None)

    def graph_names(self) -> list[str]:
        with self._lock:
            return list(self._indexes)

    def graph(self, name: str) -> Graph | None:
        index = self._index(name)
        return index.graph if index else None

    def _index(self, name: str) -> _GraphIndex | None:
        with self._lock:
            return self._indexes.get(name)

    def snapshot(self, graph_name: str) -> _GraphIndex | None:
        """Immutable view for one query: later loads swap, never mutate it."""
        return self._index(graph_name)

    def match(self, graph_name: str, s: Term | None, p: Term | None,
              o: Term | None) -> list[Triple]:
        index = self._index(graph_name)
        return index.match(s, p, o) if index else []

    def reindex(self, graph_name: str) -> None:
        index = self._index(graph_name)
        if index:
            index.rebuild()

    def size(self, graph_name: str) -> int:
        index = self._index(graph_name)
        return len(index.graph.triples) if index else 0

    def describe(self, iri_value: str) -> tuple[set[Triple], bool]:
        """Triples with the IRI as subject, plus whether the IRI occurs at all."""
        triples: set[Triple] = set()
        occurs = False
        with self._lock:
            indexes = list(self._indexes.values())
        for index in indexes:
            for t in index.graph.triples:
                if t.subject.value == iri_value and t.subject.is_iri:
                    triples.add(t)
                    occurs = True
                elif ((t.predicate.is_iri and t.predicate.value == iri_value)
                      or (t.object.is_iri and t.object.value == iri_value)):
                    occurs = True
        return triples, occurs
