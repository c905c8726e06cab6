"""Edge-labeled directed graph over sentence paths.

Every corpus sentence becomes a path Begin -> w1 -> ... -> wn -> End. The
graph is a simple directed graph: one edge record per ordered vertex pair,
with multiplicity carried by a list of (sentence_id, link_id) labels. When
a significant pattern has been found, `rewire` splices the affected spans
out of their paths and replaces them with the single pattern vertex,
leaving every other path untouched.

Each path keeps a parallel "realization" list giving, for every path
position, the original tokens that position covers. A freshly built path
realizes one token per word vertex; a rewired position realizes the
concatenation of everything it replaced. This is what makes pattern
substitution lossless: `expand_path` always reproduces the original
sentence.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .corpus import Corpus


@dataclass(frozen=True)
class Symbol:
    """A graph vertex / grammar symbol.

    kind is one of "word", "pattern", "class", "begin", "end", "special".
    Words carry their lowercase token, pattern/class symbols carry an
    integer id, and "special" is reserved for the grammar-only S and ROOT
    labels which never enter the graph.
    """

    kind: str
    value: object = None

    @staticmethod
    def word(token: str) -> "Symbol":
        return Symbol("word", token)

    @staticmethod
    def pattern(pid: int) -> "Symbol":
        return Symbol("pattern", pid)

    @staticmethod
    def equiv(cid: int) -> "Symbol":
        return Symbol("class", cid)

    @staticmethod
    def special(name: str) -> "Symbol":
        return Symbol("special", name)

    @property
    def is_word(self) -> bool:
        return self.kind == "word"

    @property
    def is_pattern(self) -> bool:
        return self.kind == "pattern"

    @property
    def is_class(self) -> bool:
        return self.kind == "class"

    @property
    def is_boundary(self) -> bool:
        return self.kind in ("begin", "end")

    @property
    def name(self) -> str:
        if self.kind == "word":
            return self.value
        if self.kind == "pattern":
            return f"Pattern_{self.value}"
        if self.kind == "class":
            return f"E_{self.value}"
        if self.kind == "begin":
            return "BEGIN"
        if self.kind == "end":
            return "END"
        return str(self.value)

    def __str__(self):
        return self.name

    def __repr__(self):
        return f"Symbol({self.name})"


BEGIN = Symbol("begin")
END = Symbol("end")


def symbol_sort_key(sym: Symbol) -> tuple[str, str]:
    return (sym.kind, sym.name)


@dataclass(frozen=True)
class EdgeLabel:
    """Identifies one sentence traversal of an edge.

    link_id is the 0-based edge position within the sentence path at the
    time the path was (re)built; generation counts how many times that
    path has been rewired, so (sentence_id, link_id, generation) stays
    unique across the whole graph even though link ids restart at 0 after
    every rewire.
    """

    sentence_id: int
    link_id: int
    generation: int = 0

    def render(self) -> str:
        if self.generation == 0:
            return f"{self.sentence_id}:{self.link_id}"
        return f"{self.sentence_id}:{self.link_id}:{self.generation}"


class RewireError(Exception):
    """Raised when a rewire occurrence does not match the path content."""


@dataclass
class Graph:
    # dicts rather than sets throughout: insertion order is the iteration
    # order, which keeps builds reproducible under hash randomization
    vertices: dict[Symbol, None] = field(default_factory=dict)
    edges: dict[tuple[Symbol, Symbol], list[EdgeLabel]] = field(default_factory=dict)
    paths: dict[int, list[Symbol]] = field(default_factory=dict)
    realizations: dict[int, list[list[str]]] = field(default_factory=dict)
    generations: dict[int, int] = field(default_factory=dict)

    def __post_init__(self):
        self._index: dict[Symbol, list[tuple[int, int]]] | None = None

    # -- construction -------------------------------------------------

    def add_vertex(self, sym: Symbol):
        if sym not in self.vertices:
            self.vertices[sym] = None

    def _add_path_edges(self, sid: int, symbols: list[Symbol], generation: int):
        for pos in range(len(symbols) - 1):
            pair = (symbols[pos], symbols[pos + 1])
            self.edges.setdefault(pair, []).append(EdgeLabel(sid, pos, generation))

    # -- queries -------------------------------------------------------

    def _position_index(self) -> dict[Symbol, list[tuple[int, int]]]:
        if self._index is None:
            index: dict[Symbol, list[tuple[int, int]]] = {}
            for sid in sorted(self.paths):
                for pos, sym in enumerate(self.paths[sid]):
                    index.setdefault(sym, []).append((sid, pos))
            self._index = index
        return self._index

    def subpath_count(self, symbols: list[Symbol]) -> int:
        """Occurrences of `symbols` as a contiguous subsequence of any path.

        A path contributes once per occurrence, so a repeated subsequence
        within one path counts multiple times.
        """
        if not symbols:
            raise ValueError("subpath_count needs at least one symbol")
        index = self._position_index()
        starts = index.get(symbols[0])
        if not starts:
            return 0
        if len(symbols) == 1:
            return len(starts)
        count = 0
        for sid, pos in starts:
            path = self.paths[sid]
            if path[pos : pos + len(symbols)] == symbols:
                count += 1
        return count

    def extend_matches(self, matches: list[tuple[int, int]], offset: int, sym: Symbol) -> list[tuple[int, int]]:
        """Keep the (sid, start) matches whose path holds `sym` at start+offset."""
        kept = []
        for sid, start in matches:
            path = self.paths[sid]
            pos = start + offset
            if 0 <= pos < len(path) and path[pos] == sym:
                kept.append((sid, start))
        return kept

    def occurrences_of(self, sym: Symbol) -> list[tuple[int, int]]:
        return list(self._position_index().get(sym, ()))

    def is_active(self, sym: Symbol) -> bool:
        """A vertex is active while at least one edge label touches it."""
        for (src, dst), labels in self.edges.items():
            if labels and (src == sym or dst == sym):
                return True
        return False

    def label_count(self) -> int:
        return sum(len(labels) for labels in self.edges.values())

    def expand_path(self, sid: int) -> list[str]:
        """Original token sequence of a sentence, recovered from its path."""
        return [token for segment in self.realizations[sid] for token in segment]

    # -- mutation ------------------------------------------------------

    def rewire(
        self,
        occurrences: list[tuple[int, int, int]],
        new_symbol: Symbol,
        surface: list | None = None,
    ):
        """Replace occurrence spans with `new_symbol` in their paths.

        Each occurrence is (sentence_id, start, end) with end exclusive,
        indexed into the sentence's current path. `surface`, when given,
        is a per-position matcher list the span must satisfy: an entry is
        either a Symbol (exact match) or a set of Symbols (membership).
        Spans may not touch the Begin/End boundary positions and may not
        overlap within one sentence. Paths not listed are untouched;
        vertices that lose their last edge label stay in the graph as
        inactive vertices.
        """
        if not occurrences:
            return
        if not new_symbol.is_pattern:
            raise RewireError(f"rewire target must be a pattern symbol, got {new_symbol}")
        by_sentence: dict[int, list[tuple[int, int]]] = {}
        for sid, start, end in occurrences:
            if sid not in self.paths:
                raise RewireError(f"sentence {sid}: no such path")
            path = self.paths[sid]
            if not (1 <= start < end <= len(path) - 1):
                raise RewireError(f"sentence {sid}: span ({start}, {end}) outside path interior")
            if surface is not None:
                if end - start != len(surface):
                    raise RewireError(f"sentence {sid}: span ({start}, {end}) does not fit the pattern surface")
                for offset, matcher in enumerate(surface):
                    actual = path[start + offset]
                    ok = actual in matcher if isinstance(matcher, (set, frozenset)) else actual == matcher
                    if not ok:
                        raise RewireError(
                            f"sentence {sid}: span ({start}, {end}) mismatch at offset {offset}: {actual}"
                        )
            by_sentence.setdefault(sid, []).append((start, end))

        for sid, spans in by_sentence.items():
            spans.sort()
            for (s1, e1), (s2, _) in zip(spans, spans[1:]):
                if s2 < e1:
                    raise RewireError(f"sentence {sid}: overlapping spans ({s1}, {e1}) and starting {s2}")

        self.add_vertex(new_symbol)
        for sid, spans in by_sentence.items():
            path = self.paths[sid]
            realization = self.realizations[sid]
            # drop this sentence's labels from the edges along its old path
            for pos in range(len(path) - 1):
                pair = (path[pos], path[pos + 1])
                labels = self.edges.get(pair)
                if labels is None:
                    continue
                remaining = [lab for lab in labels if lab.sentence_id != sid]
                if remaining:
                    self.edges[pair] = remaining
                else:
                    del self.edges[pair]
            for start, end in sorted(spans, reverse=True):
                merged = [token for segment in realization[start:end] for token in segment]
                path[start:end] = [new_symbol]
                realization[start:end] = [merged]
            generation = self.generations.get(sid, 0) + 1
            self.generations[sid] = generation
            self._add_path_edges(sid, path, generation)
        self._index = None

    # -- debug dump ----------------------------------------------------

    def dump(self) -> str:
        """One line per edge: `from -> to [sid:lid, ...]`, sorted by name."""
        lines = []
        for src, dst in sorted(self.edges, key=lambda pair: (pair[0].name, pair[1].name)):
            labels = ", ".join(label.render() for label in self.edges[(src, dst)])
            lines.append(f"{src.name} -> {dst.name} [{labels}]")
        return "\n".join(lines)


def build_graph(corpus: Corpus) -> Graph:
    """Build the sentence-path graph for a corpus.

    One path per sentence, bracketed by the shared Begin and End vertices;
    consecutive symbols contribute one edge label apiece.
    """
    if not corpus.sentences:
        raise ValueError("cannot build a graph from an empty corpus")
    graph = Graph()
    graph.add_vertex(BEGIN)
    graph.add_vertex(END)
    for sentence in corpus.sentences:
        symbols = [BEGIN] + [Symbol.word(token) for token in sentence.tokens] + [END]
        for sym in symbols:
            graph.add_vertex(sym)
        graph.paths[sentence.id] = symbols
        graph.realizations[sentence.id] = [[] if s.is_boundary else [s.value] for s in symbols]
        graph.generations[sentence.id] = 0
        graph._add_path_edges(sentence.id, symbols, 0)
    return graph


def subpath_count(graph: Graph, symbols: list[Symbol]) -> int:
    return graph.subpath_count(symbols)


def rewire(graph: Graph, occurrences, new_symbol: Symbol, surface=None) -> Graph:
    graph.rewire(occurrences, new_symbol, surface)
    return graph
