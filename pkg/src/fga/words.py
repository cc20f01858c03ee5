"""Marked graphs, oriented-edge words, and free reduction.

A graph edge with id ``e`` contributes two *arrows* (oriented edges): the
forward arrow ``2*k`` and the reverse arrow ``2*k + 1``, where ``k`` is the
edge's index.  ``arrow ^ 1`` inverts an arrow, which makes inversion a single
XOR everywhere downstream.  Words (edge paths without their start vertex) are
stored as ``bytes`` of arrow values; this keeps concatenation, hashing, and
substring search at C speed and caps a graph at 127 edges, far beyond desk
scale.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

Word = bytes

MAX_EDGES = 127


def inverse_arrow(arrow: int) -> int:
    return arrow ^ 1


def invert_word(word: Word) -> Word:
    """Reverse the path and flip every arrow."""
    return bytes(a ^ 1 for a in reversed(word))


def is_reduced(word: Word) -> bool:
    return all(word[i] ^ 1 != word[i + 1] for i in range(len(word) - 1))


def tighten_word(word: Word) -> Word:
    """Free reduction: cancel adjacent inverse pairs until none remain."""
    if is_reduced(word):
        return word
    stack: list[int] = []
    push = stack.append
    pop = stack.pop
    for a in word:
        if stack and stack[-1] == a ^ 1:
            pop()
        else:
            push(a)
    return bytes(stack)


def concat_words(*words: Word) -> Word:
    """Concatenate and tighten in one pass over the output."""
    return tighten_word(b"".join(words))


def cyclic_reduce(word: Word) -> tuple[Word, Word]:
    """Return (core, prefix) with word ~ prefix . core . prefix^-1 and core
    cyclically reduced."""
    w = tighten_word(word)
    i, j = 0, len(w)
    while j - i >= 2 and w[i] == w[j - 1] ^ 1:
        i += 1
        j -= 1
    return w[i:j], w[:i]


def is_cyclically_reduced(word: Word) -> bool:
    if not is_reduced(word):
        return False
    return len(word) < 2 or word[0] != word[-1] ^ 1


def least_rotation(word: Word) -> Word:
    """Lexicographically least rotation under the fixed arrow order."""
    if len(word) <= 1:
        return word
    doubled = word + word
    n = len(word)
    best = 0
    for i in range(1, n):
        if doubled[i : i + n] < doubled[best : best + n]:
            best = i
    return doubled[best : best + n]


@dataclass(frozen=True)
class MarkedGraph:
    """A finite graph with named vertices and edges.

    ``edges`` rows are (edge id, initial vertex id, terminal vertex id).
    Identity is structural: two graphs with the same rows are the same graph.
    """

    name: str
    vertices: tuple[str, ...]
    edges: tuple[tuple[str, str, str], ...]

    def __post_init__(self) -> None:
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError(f"graph {self.name}: duplicate vertex ids")
        ids = [e[0] for e in self.edges]
        if len(set(ids)) != len(ids):
            raise ValueError(f"graph {self.name}: duplicate edge ids")
        if len(self.edges) > MAX_EDGES:
            raise ValueError(f"graph {self.name}: more than {MAX_EDGES} edges")
        vset = set(self.vertices)
        for eid, u, v in self.edges:
            if u not in vset or v not in vset:
                raise ValueError(f"graph {self.name}: edge {eid} has unknown endpoint")

    @classmethod
    def rose(cls, letters: tuple[str, ...] | list[str], name: str = "rose", vertex: str = "*") -> "MarkedGraph":
        return cls(name, (vertex,), tuple((x, vertex, vertex) for x in letters))

    @cached_property
    def _vindex(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @cached_property
    def _eindex(self) -> dict[str, int]:
        return {e[0]: i for i, e in enumerate(self.edges)}

    @cached_property
    def _arrow_init(self) -> tuple[int, ...]:
        out = []
        for _, u, v in self.edges:
            out.append(self._vindex[u])
            out.append(self._vindex[v])
        return tuple(out)

    @cached_property
    def _arrow_term(self) -> tuple[int, ...]:
        init = self._arrow_init
        return tuple(init[a ^ 1] for a in range(len(init)))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def n_arrows(self) -> int:
        return 2 * len(self.edges)

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def is_rose(self) -> bool:
        return len(self.vertices) == 1

    @property
    def rank(self) -> int:
        """First Betti number, assuming the graph is connected."""
        return len(self.edges) - len(self.vertices) + 1

    def vertex_index(self, vid: str) -> int:
        return self._vindex[vid]

    def edge_index(self, eid: str) -> int:
        return self._eindex[eid]

    def arrow(self, eid: str, forward: bool = True) -> int:
        return 2 * self._eindex[eid] + (0 if forward else 1)

    def arrow_init(self, a: int) -> int:
        return self._arrow_init[a]

    def arrow_term(self, a: int) -> int:
        return self._arrow_term[a]

    @cached_property
    def arrows_out(self) -> tuple[tuple[int, ...], ...]:
        """Arrows grouped by initial vertex."""
        buckets: list[list[int]] = [[] for _ in self.vertices]
        for a, v in enumerate(self._arrow_init):
            buckets[v].append(a)
        return tuple(tuple(b) for b in buckets)

    def valence(self, vertex: int) -> int:
        return len(self.arrows_out[vertex])

    def valence_one_vertices(self) -> list[str]:
        return [self.vertices[i] for i in range(self.n_vertices) if self.valence(i) == 1]

    def is_connected(self) -> bool:
        if not self.vertices:
            return True
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for a in self.arrows_out[v]:
                w = self._arrow_term[a]
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n_vertices

    def arrow_name(self, a: int) -> str:
        eid = self.edges[a >> 1][0]
        return eid if a & 1 == 0 else eid + "'"

    def format_word(self, word: Word) -> str:
        return " ".join(self.arrow_name(a) for a in word)

    def parse_letter(self, token: str) -> int:
        """One letter: an edge id, id + apostrophe, or uppercased single-char id."""
        tok = token.strip()
        forward = True
        if tok.endswith("'"):
            tok = tok[:-1]
            forward = False
        if tok not in self._eindex and len(tok) == 1 and tok.upper() == tok and tok.lower() in self._eindex:
            tok = tok.lower()
            forward = not forward
        if tok not in self._eindex:
            raise ValueError(f"unknown edge letter {token!r} in graph {self.name}")
        return 2 * self._eindex[tok] + (0 if forward else 1)

    def parse_word(self, text: str) -> Word:
        """Whitespace-separated letters; inverses as trailing apostrophe or uppercase."""
        return bytes(self.parse_letter(t) for t in text.split())


def path_endpoints_ok(graph: MarkedGraph, start: int, word: Word) -> bool:
    init = graph._arrow_init
    term = graph._arrow_term
    at = start
    for a in word:
        if init[a] != at:
            return False
        at = term[a]
    return True


@dataclass(frozen=True)
class EdgePath:
    """A (not necessarily reduced) edge path: a start vertex plus a word."""

    graph: MarkedGraph
    start: int
    word: Word

    def __post_init__(self) -> None:
        if not (0 <= self.start < self.graph.n_vertices):
            raise ValueError("path start out of range")
        if not path_endpoints_ok(self.graph, self.start, self.word):
            raise ValueError("path letters do not chain head to tail")

    @classmethod
    def from_str(cls, graph: MarkedGraph, start_vertex: str, text: str) -> "EdgePath":
        return cls(graph, graph.vertex_index(start_vertex), graph.parse_word(text))

    @property
    def end(self) -> int:
        return self.graph.arrow_term(self.word[-1]) if self.word else self.start

    def __len__(self) -> int:
        return len(self.word)

    @property
    def is_reduced(self) -> bool:
        return is_reduced(self.word)

    @property
    def is_closed(self) -> bool:
        return self.end == self.start

    def tighten(self) -> "EdgePath":
        return EdgePath(self.graph, self.start, tighten_word(self.word))

    def reverse(self) -> "EdgePath":
        return EdgePath(self.graph, self.end, invert_word(self.word))

    def __str__(self) -> str:
        return self.graph.format_word(self.word) or "(trivial)"


@dataclass(frozen=True)
class Circuit:
    """A nonempty cyclically reduced closed path, considered up to rotation.

    The stored rotation is kept as given; ``canonical`` picks the
    lexicographically least rotation for use as a conjugacy-class key.
    """

    graph: MarkedGraph
    word: Word

    def __post_init__(self) -> None:
        if not self.word:
            raise ValueError("circuit word must be nonempty")
        if not is_cyclically_reduced(self.word):
            raise ValueError("circuit word must be cyclically reduced")
        start = self.graph.arrow_init(self.word[0])
        if not path_endpoints_ok(self.graph, start, self.word):
            raise ValueError("circuit letters do not chain")
        if self.graph.arrow_term(self.word[-1]) != start:
            raise ValueError("circuit is not closed")

    @classmethod
    def from_word(cls, graph: MarkedGraph, word: Word) -> "Circuit":
        core, _ = cyclic_reduce(word)
        return cls(graph, core)

    @classmethod
    def from_str(cls, graph: MarkedGraph, text: str) -> "Circuit":
        return cls.from_word(graph, graph.parse_word(text))

    def __len__(self) -> int:
        return len(self.word)

    def canonical(self) -> "Circuit":
        return Circuit(self.graph, least_rotation(self.word))

    def contains_cyclically(self, segment: Word) -> bool:
        """Does the segment occur in some rotation of the circuit?"""
        if len(segment) > len(self.word):
            return False
        wrapped = self.word + self.word[: len(segment) - 1]
        return wrapped.find(segment) >= 0

    def __str__(self) -> str:
        return self.graph.format_word(self.word)
