"""Finite covers of roses: folding, path lifting, and coset bookkeeping.

A cover is stored as its total graph plus a labeling of total edges by base
letters.  Lifting and projecting are exact local isometries, so both preserve
path length on the nose; callers rely on that.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable

from .words import EdgePath, MarkedGraph, Word, is_reduced


class InfiniteIndexError(Exception):
    """Folding finished with a vertex missing an outgoing lift.

    The subgroup generated by the input words has infinite index, so no
    finite cover exists.  ``missing`` lists (vertex, letter) witnesses.
    """

    def __init__(self, missing: list[tuple[str, str]]):
        self.missing = missing
        preview = ", ".join(f"{v}:{x}" for v, x in missing[:4])
        super().__init__(f"subgroup has infinite index; unfinished stars at {preview}")


@dataclass(frozen=True)
class CoverMap:
    """A covering of a rose.  ``edge_labels[k]`` is the base arrow that the
    forward arrow of total edge ``k`` projects to."""

    total: MarkedGraph
    base: MarkedGraph
    edge_labels: tuple[int, ...]
    basepoint: int = 0

    def __post_init__(self) -> None:
        if not self.base.is_rose:
            raise ValueError("cover base must be a rose")
        if len(self.edge_labels) != self.total.n_edges:
            raise ValueError("one label per total edge required")
        for lab in self.edge_labels:
            if not (0 <= lab < self.base.n_arrows):
                raise ValueError("edge label is not a base arrow")
        if not (0 <= self.basepoint < self.total.n_vertices):
            raise ValueError("basepoint out of range")
        if not self.total.is_connected():
            raise ValueError("cover total graph must be connected")
        # Local bijectivity: every vertex star maps bijectively to the rose star.
        for v in range(self.total.n_vertices):
            seen = set()
            for a in self.total.arrows_out[v]:
                seen.add(self.arrow_label(a))
            if len(seen) != self.base.n_arrows or len(self.total.arrows_out[v]) != self.base.n_arrows:
                raise ValueError(
                    f"not a covering: vertex {self.total.vertices[v]} star does not "
                    f"match the rose star"
                )

    def arrow_label(self, a: int) -> int:
        return self.edge_labels[a >> 1] ^ (a & 1)

    @property
    def degree(self) -> int:
        return self.total.n_vertices

    @cached_property
    def _lift_table(self) -> tuple[tuple[int, ...], ...]:
        """Per vertex: base arrow -> the unique outgoing total arrow over it."""
        table = []
        for v in range(self.total.n_vertices):
            row = [-1] * self.base.n_arrows
            for a in self.total.arrows_out[v]:
                row[self.arrow_label(a)] = a
            table.append(tuple(row))
        return tuple(table)

    def project_word(self, word: Word) -> Word:
        labels = self.edge_labels
        return bytes(labels[a >> 1] ^ (a & 1) for a in word)

    def project_path(self, path: EdgePath) -> EdgePath:
        if path.graph is not self.total and path.graph != self.total:
            raise ValueError("path does not live in this cover")
        return EdgePath(self.base, 0, self.project_word(path.word))

    def lift_word(self, base_word: Word, start: int) -> Word:
        table = self._lift_table
        term = self.total._arrow_term
        at = start
        out = bytearray()
        for a in base_word:
            lifted = table[at][a]
            out.append(lifted)
            at = term[lifted]
        return bytes(out)

    def lift_path(self, base_word: Word, start: int) -> EdgePath:
        return EdgePath(self.total, start, self.lift_word(base_word, start))

    def lift_end(self, base_word: Word, start: int) -> int:
        table = self._lift_table
        term = self.total._arrow_term
        at = start
        for a in base_word:
            at = term[table[at][a]]
        return at

    @cached_property
    def coset_representatives(self) -> tuple[Word, ...]:
        """Reduced base words carrying the basepoint to each fiber vertex.

        Breadth-first over base letters in order, so representatives are
        shortest and deterministic; the basepoint gets the empty word.
        """
        reps: dict[int, Word] = {self.basepoint: b""}
        queue = [self.basepoint]
        while queue:
            nxt: list[int] = []
            for v in queue:
                for a in range(self.base.n_arrows):
                    w = self.total.arrow_term(self._lift_table[v][a])
                    if w not in reps:
                        reps[w] = reps[v] + bytes([a])
                        nxt.append(w)
            queue = nxt
        return tuple(reps[v] for v in range(self.total.n_vertices))

    def contains_loop(self, base_word: Word) -> bool:
        """Is the based loop spelled by the word in the cover's subgroup?"""
        return self.lift_end(base_word, self.basepoint) == self.basepoint


def build_cover(base: MarkedGraph, generators: Iterable[Word], name: str = "cover") -> CoverMap:
    """Fold the wedge of the generator loops into a covering of the rose.

    Raises :class:`InfiniteIndexError` when folding stops short of a full
    covering (some vertex star is incomplete).
    """
    if not base.is_rose:
        raise ValueError("build_cover expects a rose base")
    n_arrows = base.n_arrows

    parent: list[int] = [0]
    out: list[dict[int, int]] = [dict()]

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def fresh() -> int:
        parent.append(len(parent))
        out.append(dict())
        return len(parent) - 1

    pending: list[tuple[int, int]] = []

    def union(x: int, y: int) -> None:
        pending.append((x, y))
        while pending:
            a, b = pending.pop()
            ra, rb = find(a), find(b)
            if ra == rb:
                continue
            if len(out[ra]) < len(out[rb]):
                ra, rb = rb, ra
            parent[rb] = ra
            # Merge stars; a clash on the same letter folds the targets too.
            for letter, tgt in out[rb].items():
                attach(ra, letter, tgt)
            out[rb] = dict()

    def attach(v: int, letter: int, w: int) -> None:
        rv = find(v)
        existing = out[rv].get(letter)
        if existing is None:
            out[rv][letter] = w
        else:
            pending.append((existing, w))

    for word in generators:
        if not is_reduced(word):
            raise ValueError("generator words must be reduced")
        at = 0
        for i, a in enumerate(word):
            nxt = 0 if i == len(word) - 1 else fresh()
            attach(at, a, nxt)
            attach(nxt, a ^ 1, at)
            union(at, at)  # flush any folds queued by attach
            at = find(nxt)
        union(at, 0)

    roots = sorted({find(v) for v in range(len(parent))})
    missing: list[tuple[str, str]] = []
    for r in roots:
        star = {letter: find(t) for letter, t in out[r].items()}
        out[r] = star
        for a in range(n_arrows):
            if a not in star:
                missing.append((str(roots.index(r)), base.arrow_name(a)))
    if missing:
        raise InfiniteIndexError(missing)

    # Renumber breadth-first from the folded basepoint for a stable layout.
    root0 = find(0)
    order = [root0]
    pos = {root0: 0}
    qi = 0
    while qi < len(order):
        v = order[qi]
        qi += 1
        for a in range(n_arrows):
            w = out[v][a]
            if w not in pos:
                pos[w] = len(order)
                order.append(w)

    vertices = tuple(str(i) for i in range(len(order)))
    edges = []
    labels = []
    for v in order:
        for k in range(base.n_edges):
            a = 2 * k
            w = out[v][a]
            edges.append((f"{base.edges[k][0]}{pos[v]}", str(pos[v]), str(pos[w])))
            labels.append(a)
    total = MarkedGraph(name, vertices, tuple(edges))
    return CoverMap(total, base, tuple(labels), basepoint=0)
