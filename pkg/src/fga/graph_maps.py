"""Self-maps of marked graphs and their dynamical bookkeeping.

A :class:`GraphMap` sends vertices to vertices and edges to reduced nonempty
edge paths.  Everything downstream (iteration, transition matrices, stratum
filtrations, turn legality, periodic-class scans) is built from that single
structure.  All operations are pure; maps and filtrations are immutable and
safe to share between threads.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .covers import CoverMap, InfiniteIndexError, build_cover
from .words import (
    Circuit,
    EdgePath,
    MarkedGraph,
    Word,
    cyclic_reduce,
    invert_word,
    is_reduced,
    least_rotation,
    tighten_word,
)


@dataclass(frozen=True)
class GraphMap:
    """A map of graphs: vertex images plus a reduced edge-path image per edge.

    Edge images are given for forward arrows; reverse arrows map to the
    reversed inverted path automatically.  Images must be reduced and
    nonempty as supplied; a word that would tighten is rejected here rather
    than silently repaired.
    """

    domain: MarkedGraph
    codomain: MarkedGraph
    vertex_images: tuple[int, ...]
    edge_images: tuple[Word, ...]

    def __post_init__(self) -> None:
        if len(self.vertex_images) != self.domain.n_vertices:
            raise ValueError("one vertex image per domain vertex required")
        if len(self.edge_images) != self.domain.n_edges:
            raise ValueError("one edge image per domain edge required")
        for v in self.vertex_images:
            if not (0 <= v < self.codomain.n_vertices):
                raise ValueError("vertex image out of range")
        for k, img in enumerate(self.edge_images):
            eid = self.domain.edges[k][0]
            if not img:
                raise ValueError(f"edge {eid}: image must be a nonempty path")
            if not is_reduced(img):
                raise ValueError(f"edge {eid}: image path is not reduced")
            u = self.vertex_images[self.domain.arrow_init(2 * k)]
            v = self.vertex_images[self.domain.arrow_term(2 * k)]
            at = u
            for a in img:
                if self.codomain.arrow_init(a) != at:
                    raise ValueError(f"edge {eid}: image path does not chain")
                at = self.codomain.arrow_term(a)
            if at != v:
                raise ValueError(f"edge {eid}: image path does not connect the image endpoints")

    @classmethod
    def from_strs(
        cls,
        domain: MarkedGraph,
        images: dict[str, str],
        codomain: MarkedGraph | None = None,
        vertex_images: dict[str, str] | None = None,
    ) -> "GraphMap":
        """Build from edge-id -> word-text, inferring vertex images when possible."""
        cod = codomain or domain
        words = tuple(cod.parse_word(images[e[0]]) for e in domain.edges)
        if vertex_images is not None:
            vimg = tuple(cod.vertex_index(vertex_images[v]) for v in domain.vertices)
        else:
            vimg = _infer_vertex_images(domain, cod, words)
        return cls(domain, cod, vimg, words)

    @classmethod
    def identity(cls, graph: MarkedGraph) -> "GraphMap":
        return cls(
            graph,
            graph,
            tuple(range(graph.n_vertices)),
            tuple(bytes([2 * k]) for k in range(graph.n_edges)),
        )

    @cached_property
    def arrow_images(self) -> tuple[Word, ...]:
        out: list[Word] = []
        for k in range(self.domain.n_edges):
            out.append(self.edge_images[k])
            out.append(invert_word(self.edge_images[k]))
        return tuple(out)

    @property
    def is_self_map(self) -> bool:
        return self.domain == self.codomain

    def apply_word(self, word: Word) -> Word:
        """Image of a word, tightened."""
        imgs = self.arrow_images
        return tighten_word(b"".join(imgs[a] for a in word))

    def apply_word_raw(self, word: Word) -> Word:
        imgs = self.arrow_images
        return b"".join(imgs[a] for a in word)

    def apply(self, path: EdgePath) -> EdgePath:
        return EdgePath(self.codomain, self.vertex_images[path.start], self.apply_word(path.word))

    def apply_cyclic(self, word: Word) -> Word:
        """Image of a circuit word, tightened and cyclically reduced; the
        rotation is whatever the image naturally produces."""
        core, _ = cyclic_reduce(self.apply_word(word))
        return core

    def apply_circuit(self, circuit: Circuit) -> Circuit:
        return Circuit(self.codomain, self.apply_cyclic(circuit.word))

    def iterate_word(self, word: Word, n: int) -> Word:
        if not self.is_self_map:
            raise ValueError("iteration requires a self-map")
        w = word
        for _ in range(n):
            w = self.apply_word(w)
        return w

    def iterate(self, path: EdgePath, n: int) -> EdgePath:
        if not self.is_self_map:
            raise ValueError("iteration requires a self-map")
        p = path
        for _ in range(n):
            p = self.apply(p)
        return p

    def iterate_cyclic(self, word: Word, n: int) -> Word:
        w = word
        for _ in range(n):
            w = self.apply_cyclic(w)
        return w

    def lipschitz(self) -> int:
        return max(len(w) for w in self.edge_images)

    def direction(self, arrow: int) -> int:
        """First arrow of the image path: the induced map on directions."""
        return self.arrow_images[arrow][0]

    @cached_property
    def direction_table(self) -> tuple[int, ...]:
        return tuple(self.arrow_images[a][0] for a in range(self.domain.n_arrows))

    def fixed_directions(self) -> tuple[int, ...]:
        if not self.is_self_map:
            raise ValueError("fixed directions require a self-map")
        return tuple(a for a in range(self.domain.n_arrows) if self.direction_table[a] == a)

    def fixed_vertices(self) -> tuple[int, ...]:
        return tuple(v for v in range(self.domain.n_vertices) if self.vertex_images[v] == v)


def _infer_vertex_images(domain: MarkedGraph, codomain: MarkedGraph, words: tuple[Word, ...]) -> tuple[int, ...]:
    """Vertex images forced by the edge images; fails on isolated vertices."""
    vimg: dict[int, int] = {}
    for k, w in enumerate(words):
        if not w:
            continue
        u = domain.arrow_init(2 * k)
        v = domain.arrow_term(2 * k)
        for vert, img in ((u, codomain.arrow_init(w[0])), (v, codomain.arrow_term(w[-1]))):
            if vimg.setdefault(vert, img) != img:
                raise ValueError(
                    f"inconsistent vertex image at {domain.vertices[vert]}; supply vertex images explicitly"
                )
    if len(vimg) != domain.n_vertices:
        missing = [domain.vertices[v] for v in range(domain.n_vertices) if v not in vimg]
        raise ValueError(f"cannot infer images of isolated vertices {missing}")
    return tuple(vimg[v] for v in range(domain.n_vertices))


def compose(outer: GraphMap, inner: GraphMap) -> GraphMap:
    """outer after inner."""
    if inner.codomain != outer.domain:
        raise ValueError("maps do not compose")
    return GraphMap(
        inner.domain,
        outer.codomain,
        tuple(outer.vertex_images[v] for v in inner.vertex_images),
        tuple(outer.apply_word(w) for w in inner.edge_images),
    )


def power(f: GraphMap, k: int) -> GraphMap:
    """k-fold composite of a self-map; k = 0 gives the identity."""
    if not f.is_self_map:
        raise ValueError("powers require a self-map")
    if k < 0:
        raise ValueError("negative powers are not defined; supply an inverse representative")
    out = GraphMap.identity(f.domain)
    for _ in range(k):
        out = compose(f, out)
    return out


def direction_stable_power(f: GraphMap, cap: int = 64) -> int:
    """Smallest k whose k-th iterate fixes every periodic direction.

    The derivative acts as a function on arrows; k is the lcm of its cycle
    lengths.  Scans that grow rays out of fixed directions use this power so
    no periodic end is silently dropped.
    """
    if not f.is_self_map:
        raise ValueError("stable power requires a self-map")
    t = f.direction_table
    k = 1
    state = [0] * len(t)  # 0 unseen, 1 on current walk, 2 settled
    for a0 in range(len(t)):
        if state[a0]:
            continue
        walk: list[int] = []
        pos: dict[int, int] = {}
        a = a0
        while state[a] == 0:
            state[a] = 1
            pos[a] = len(walk)
            walk.append(a)
            a = t[a]
        if state[a] == 1:  # the walk closed a new cycle
            cycle = len(walk) - pos[a]
            k = k * cycle // math.gcd(k, cycle)
            if k > cap:
                raise ValueError(f"direction cycles need power {k}, above the cap {cap}")
        for b in walk:
            state[b] = 2
    return k


# ---------------------------------------------------------------------------
# Spanning trees and fundamental-group bookkeeping


@dataclass(frozen=True)
class SpanningTree:
    graph: MarkedGraph
    root: int
    tree_edges: frozenset[int]
    paths: tuple[Word, ...]  # reduced arrow word root -> vertex, within the tree

    @property
    def basis_edges(self) -> tuple[int, ...]:
        return tuple(k for k in range(self.graph.n_edges) if k not in self.tree_edges)


def spanning_tree(graph: MarkedGraph, root: int = 0) -> SpanningTree:
    if not graph.is_connected():
        raise ValueError("graph must be connected")
    paths: dict[int, Word] = {root: b""}
    tree: set[int] = set()
    queue = [root]
    while queue:
        nxt: list[int] = []
        for v in queue:
            for a in graph.arrows_out[v]:
                w = graph.arrow_term(a)
                if w not in paths:
                    paths[w] = paths[v] + bytes([a])
                    tree.add(a >> 1)
                    nxt.append(w)
        queue = nxt
    return SpanningTree(graph, root, frozenset(tree), tuple(paths[v] for v in range(graph.n_vertices)))


def basis_loops(tree: SpanningTree) -> tuple[Word, ...]:
    """Reduced based loops at the root, one per non-tree edge."""
    g = tree.graph
    out = []
    for k in tree.basis_edges:
        u = g.arrow_init(2 * k)
        v = g.arrow_term(2 * k)
        out.append(tighten_word(tree.paths[u] + bytes([2 * k]) + invert_word(tree.paths[v])))
    return tuple(out)


def loop_to_basis_word(tree: SpanningTree, loop: Word) -> Word:
    """Rewrite a based loop as a word in the non-tree-edge basis (collapse the tree)."""
    index = {k: i for i, k in enumerate(tree.basis_edges)}
    out = bytearray()
    for a in loop:
        i = index.get(a >> 1)
        if i is not None:
            out.append(2 * i + (a & 1))
    return tighten_word(bytes(out))


def is_pi1_isomorphism(f: GraphMap) -> bool:
    """Does a self-map induce an isomorphism on the fundamental group?

    The images of a free basis are folded; the map is an isomorphism exactly
    when they generate everything (a surjective endomorphism of a free group
    of finite rank is automatic an isomorphism).
    """
    if not f.is_self_map:
        raise ValueError("fundamental-group check requires a self-map")
    g = f.domain
    if g.rank == 0:
        return True
    tree = spanning_tree(g)
    conj = tree.paths[f.vertex_images[tree.root]]
    image_words = []
    for loop in basis_loops(tree):
        based = tighten_word(conj + f.apply_word(loop) + invert_word(conj))
        image_words.append(loop_to_basis_word(tree, based))
    basis_rose = MarkedGraph.rose(tuple(f"g{i}" for i in range(g.rank)), name="basis")
    try:
        cover = build_cover(basis_rose, image_words)
    except InfiniteIndexError:
        return False
    return cover.degree == 1


def lift_map(cover: CoverMap, base_map: GraphMap, basepoint_image: int | None = None) -> GraphMap:
    """Lift a rose self-map through a covering to a self-map of the total graph.

    Exists exactly when the base map carries the cover's subgroup into
    itself; otherwise construction fails with a chaining error.
    """
    if base_map.domain != cover.base or not base_map.is_self_map:
        raise ValueError("base map must be a self-map of the cover's base rose")
    v0 = cover.basepoint if basepoint_image is None else basepoint_image
    reps = cover.coset_representatives
    vimg = []
    for v in range(cover.total.n_vertices):
        vimg.append(cover.lift_end(base_map.apply_word(reps[v]), v0))
    eimg = []
    for k in range(cover.total.n_edges):
        u = cover.total.arrow_init(2 * k)
        base_image = base_map.arrow_images[cover.arrow_label(2 * k)]
        eimg.append(cover.lift_word(base_image, vimg[u]))
    try:
        return GraphMap(cover.total, cover.total, tuple(vimg), tuple(eimg))
    except ValueError as exc:
        raise ValueError(
            "base map does not lift through this cover (subgroup not preserved)"
        ) from exc


# ---------------------------------------------------------------------------
# Transition matrices, strata, Perron-Frobenius


def transition_matrix(f: GraphMap, edge_subset: tuple[int, ...] | None = None) -> np.ndarray:
    """Unsigned crossing counts: column j counts how often the image of edge j
    crosses each edge of the subset, in either direction."""
    if not f.is_self_map:
        raise ValueError("transition matrix requires a self-map")
    edges = tuple(range(f.domain.n_edges)) if edge_subset is None else tuple(edge_subset)
    pos = {e: i for i, e in enumerate(edges)}
    m = np.zeros((len(edges), len(edges)), dtype=np.int64)
    for j, e in enumerate(edges):
        for a in f.edge_images[e]:
            i = pos.get(a >> 1)
            if i is not None:
                m[i, j] += 1
    return m


@dataclass(frozen=True)
class PFResult:
    value: float
    lower: float
    upper: float
    iterations: int


def is_irreducible(matrix: np.ndarray) -> bool:
    """Strong connectivity of the support digraph."""
    m = np.asarray(matrix)
    n = m.shape[0]
    if n == 0:
        return False
    for adj in (m > 0, (m > 0).T):
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for w in np.nonzero(adj[v])[0]:
                if int(w) not in seen:
                    seen.add(int(w))
                    stack.append(int(w))
        if len(seen) != n:
            return False
    return True


def pf_eigenvalue(matrix, tol: float = 1e-10, max_iterations: int = 200000) -> PFResult:
    """Dominant eigenvalue of an irreducible nonnegative integer matrix.

    Power iteration on M + I (primitive once M is irreducible) with a
    certified min/max ratio enclosure; the returned bounds always bracket the
    true value.  Reducible input is an error: split along the filtration and
    analyze strata separately.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    if (m < 0).any():
        raise ValueError("matrix must be nonnegative")
    n = m.shape[0]
    if n == 1:
        v = float(m[0, 0])
        return PFResult(v, v, v, 0)
    if not is_irreducible(m):
        raise ValueError(
            "matrix is reducible; compute the filtration and take per-stratum submatrices"
        )
    a = m + np.eye(n)
    x = np.ones(n)
    lo, hi = 0.0, float("inf")
    for it in range(1, max_iterations + 1):
        y = a @ x
        ratios = y / x
        lo = float(ratios.min())
        hi = float(ratios.max())
        if hi - lo <= tol * hi:
            return PFResult((lo + hi) / 2 - 1.0, lo - 1.0, hi - 1.0, it)
        x = y / y.max()
    return PFResult((lo + hi) / 2 - 1.0, lo - 1.0, hi - 1.0, max_iterations)


class StratumClass(enum.Enum):
    EG = "exponential"
    NEG_FIXED = "non-exponential-fixed"
    NEG_SUPERLINEAR = "non-exponential-superlinear"
    ZERO = "zero"


EG_THRESHOLD = 1e-8


@dataclass(frozen=True)
class Stratum:
    edges: tuple[int, ...]
    cls: StratumClass
    pf: PFResult | None
    matrix: tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class Filtration:
    """Invariant stratification of the edge set, bottom stratum first.

    ``edge_height[k]`` is the index of edge k's stratum; the union of strata
    up to any height is mapped into itself.
    """

    graph: MarkedGraph
    strata: tuple[Stratum, ...]
    edge_height: tuple[int, ...]

    def arrow_height(self, a: int) -> int:
        return self.edge_height[a >> 1]

    def word_height(self, word: Word) -> int:
        return max((self.edge_height[a >> 1] for a in word), default=-1)

    def stratum_length(self, word: Word, r: int) -> int:
        """Letters of the word lying in stratum r."""
        h = self.edge_height
        return sum(1 for a in word if h[a >> 1] == r)

    @property
    def eg_indices(self) -> tuple[int, ...]:
        return tuple(i for i, s in enumerate(self.strata) if s.cls is StratumClass.EG)


def compute_filtration(f: GraphMap) -> Filtration:
    """Stratify edges by the strongly connected pieces of the crossing digraph,
    ordered so every stratum's image stays at or below its own height."""
    if not f.is_self_map:
        raise ValueError("filtration requires a self-map")
    n = f.domain.n_edges
    dep: list[set[int]] = [set() for _ in range(n)]
    for j in range(n):
        for a in f.edge_images[j]:
            dep[j].add(a >> 1)

    comp = _kosaraju(n, dep)
    n_comp = max(comp) + 1 if n else 0
    members: list[list[int]] = [[] for _ in range(n_comp)]
    for e, c in enumerate(comp):
        members[c].append(e)

    # Condensation edges point from a stratum to the strata it crosses.
    cond: list[set[int]] = [set() for _ in range(n_comp)]
    for j in range(n):
        for i in dep[j]:
            if comp[j] != comp[i]:
                cond[comp[j]].add(comp[i])

    order = _topo_dependencies_first(n_comp, cond, members)

    strata: list[Stratum] = []
    height_of_comp: dict[int, int] = {}
    eg_below: set[int] = set()  # components whose closure reaches an EG stratum
    for c in order:
        edges = tuple(sorted(members[c]))
        sub = transition_matrix(f, edges)
        cls: StratumClass
        pf: PFResult | None = None
        if not sub.any():
            cls = StratumClass.ZERO
        else:
            pf = pf_eigenvalue(sub)
            if pf.value > 1.0 + EG_THRESHOLD:
                cls = StratumClass.EG
            else:
                reaches_eg = any(d in eg_below for d in cond[c])
                cls = StratumClass.NEG_SUPERLINEAR if reaches_eg else StratumClass.NEG_FIXED
        if cls is StratumClass.EG or any(d in eg_below for d in cond[c]):
            eg_below.add(c)
        height_of_comp[c] = len(strata)
        strata.append(Stratum(edges, cls, pf, tuple(tuple(int(x) for x in row) for row in sub)))

    edge_height = tuple(height_of_comp[comp[e]] for e in range(n))
    return Filtration(f.domain, tuple(strata), edge_height)


def _kosaraju(n: int, dep: list[set[int]]) -> list[int]:
    radj: list[list[int]] = [[] for _ in range(n)]
    for j in range(n):
        for i in dep[j]:
            radj[i].append(j)
    seen = [False] * n
    finish: list[int] = []
    for s in range(n):
        if seen[s]:
            continue
        stack: list[tuple[int, int]] = [(s, 0)]
        seen[s] = True
        adj = [sorted(dep[v]) for v in range(n)]
        while stack:
            v, i = stack.pop()
            if i < len(adj[v]):
                stack.append((v, i + 1))
                w = adj[v][i]
                if not seen[w]:
                    seen[w] = True
                    stack.append((w, 0))
            else:
                finish.append(v)
    comp = [-1] * n
    c = 0
    for v in reversed(finish):
        if comp[v] != -1:
            continue
        stack2 = [v]
        comp[v] = c
        while stack2:
            u = stack2.pop()
            for w in radj[u]:
                if comp[w] == -1:
                    comp[w] = c
                    stack2.append(w)
        c += 1
    return comp

def _topo_dependencies_first(n_comp: int, cond: list[set[int]], members: list[list[int]]) -> list[int]:
    """Order components so each appears after everything it crosses into."""
    indeg = [0] * n_comp  # number of dependencies not yet placed
    rdep: list[list[int]] = [[] for _ in range(n_comp)]
    for c in range(n_comp):
        indeg[c] = len(cond[c])
        for d in cond[c]:
            rdep[d].append(c)
    ready = sorted((c for c in range(n_comp) if indeg[c] == 0), key=lambda c: min(members[c]))
    order: list[int] = []
    while ready:
        c = ready.pop(0)
        order.append(c)
        changed = False
        for u in rdep[c]:
            indeg[u] -= 1
            if indeg[u] == 0:
                ready.append(u)
                changed = True
        if changed:
            ready.sort(key=lambda c2: min(members[c2]))
    return order


# ---------------------------------------------------------------------------
# Turns


Turn = tuple[int, int]


def _norm_turn(x: int, y: int) -> Turn:
    return (x, y) if x <= y else (y, x)


@dataclass(frozen=True)
class TurnAnalysis:
    """Legality of every turn: a turn is illegal when some forward iterate of
    the direction map collapses it to a single direction."""

    graph: MarkedGraph
    direction_table: tuple[int, ...]
    turns: tuple[Turn, ...]
    illegal: frozenset[Turn]
    fixed_directions: tuple[int, ...]

    def is_legal(self, turn: Turn) -> bool:
        return _norm_turn(*turn) not in self.illegal

    @property
    def illegal_turns(self) -> tuple[Turn, ...]:
        return tuple(sorted(self.illegal))


def turn_analysis(f: GraphMap) -> TurnAnalysis:
    if not f.is_self_map:
        raise ValueError("turn analysis requires a self-map")
    g = f.domain
    t = f.direction_table
    turns: list[Turn] = []
    for v in range(g.n_vertices):
        arrows = g.arrows_out[v]
        for i in range(len(arrows)):
            for j in range(i + 1, len(arrows)):
                turns.append(_norm_turn(arrows[i], arrows[j]))
    verdict: dict[Turn, bool] = {}
    for turn in turns:
        if turn in verdict:
            continue
        orbit: list[Turn] = []
        seen: set[Turn] = set()
        cur = turn
        illegal: bool
        while True:
            if cur in verdict:
                illegal = not verdict[cur]
                break
            if cur[0] == cur[1]:
                illegal = True
                break
            if cur in seen:
                illegal = False
                break
            seen.add(cur)
            orbit.append(cur)
            cur = _norm_turn(t[cur[0]], t[cur[1]])
        for o in orbit:
            verdict[o] = not illegal
    illegal_set = frozenset(t0 for t0, ok in verdict.items() if not ok and t0[0] != t0[1])
    return TurnAnalysis(
        g,
        t,
        tuple(sorted(turns)),
        frozenset(x for x in illegal_set if x in set(turns)),
        tuple(a for a in range(g.n_arrows) if t[a] == a),
    )


def turns_crossed(graph: MarkedGraph, word: Word) -> tuple[Turn, ...]:
    """Turns taken at the interior junctions of a reduced path."""
    return tuple(_norm_turn(word[i] ^ 1, word[i + 1]) for i in range(len(word) - 1))


# ---------------------------------------------------------------------------
# Partial train-track verification


@dataclass(frozen=True)
class RTTStratumChecks:
    stratum: int
    image_paths_legal: bool
    bad_image_turns: tuple[tuple[str, Turn], ...]
    legal_turn_images_ok: bool
    directions_stay: bool
    escaping_directions: tuple[int, ...]
    connecting_paths_checked: int
    connecting_failures: tuple[str, ...]
    enumeration_truncated: bool


@dataclass(frozen=True)
class RTTReport:
    """Bounded evidence that a map is a relative train track; never a proof.

    Path-image legality and direction retention are exact finite checks;
    nontriviality of connecting-path images is tested only up to the length
    bound plus random samples, hence ``partial``.
    """

    strata: tuple[RTTStratumChecks, ...]
    bound: int
    samples: int
    partial: bool = True

    @property
    def consistent(self) -> bool:
        return all(
            s.image_paths_legal and s.legal_turn_images_ok and s.directions_stay and not s.connecting_failures
            for s in self.strata
        )


def verify_rtt(
    f: GraphMap,
    filtration: Filtration | None = None,
    connecting_bound: int = 12,
    samples: int = 200,
    seed: int = 0,
    enumeration_cap: int = 20000,
) -> RTTReport:
    filt = filtration or compute_filtration(f)
    analysis = turn_analysis(f)
    g = f.domain
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    reports = []
    for r in filt.eg_indices:
        stratum_edges = set(filt.strata[r].edges)
        stratum_arrows = {2 * e for e in stratum_edges} | {2 * e + 1 for e in stratum_edges}

        bad_image_turns: list[tuple[str, Turn]] = []
        for e in sorted(stratum_edges):
            img = f.edge_images[e]
            for turn in turns_crossed(g, img):
                h = max(filt.arrow_height(turn[0]), filt.arrow_height(turn[1]))
                if h == r and not analysis.is_legal(turn):
                    bad_image_turns.append((g.edges[e][0], turn))

        legal_turn_images_ok = True
        for turn in analysis.turns:
            if turn[0] in stratum_arrows and turn[1] in stratum_arrows and analysis.is_legal(turn):
                img_turn = _norm_turn(analysis.direction_table[turn[0]], analysis.direction_table[turn[1]])
                if img_turn[0] != img_turn[1] and not analysis.is_legal(img_turn):
                    legal_turn_images_ok = False

        escaping = tuple(
            a for a in sorted(stratum_arrows) if analysis.direction_table[a] not in stratum_arrows
        )

        incident = {g.arrow_init(a) for a in stratum_arrows}
        lower_arrows = [a for a in range(g.n_arrows) if filt.arrow_height(a) < r]
        checked = 0
        failures: list[str] = []
        truncated = False

        def record(word: Word) -> None:
            nonlocal checked
            checked += 1
            if not f.apply_word(word):
                failures.append(g.format_word(word))

        # Exhaustive over short connecting paths in the lower strata.
        stack: list[tuple[int, Word]] = [(v, b"") for v in sorted(incident)]
        while stack:
            v, word = stack.pop()
            if checked >= enumeration_cap:
                truncated = True
                break
            for a in lower_arrows:
                if g.arrow_init(a) != v or (word and a == word[-1] ^ 1):
                    continue
                w2 = word + bytes([a])
                tv = g.arrow_term(a)
                if tv in incident:
                    record(w2)
                if len(w2) < connecting_bound:
                    stack.append((tv, w2))

        # Random longer samples, deterministic under the seed.
        incident_list = sorted(incident)
        if lower_arrows and incident_list:
            for _ in range(samples):
                v = incident_list[int(rng.integers(len(incident_list)))]
                word = bytearray()
                for _ in range(int(rng.integers(1, 4 * connecting_bound))):
                    options = [
                        a for a in lower_arrows if g.arrow_init(a) == v and not (word and a == word[-1] ^ 1)
                    ]
                    if not options:
                        break
                    a = options[int(rng.integers(len(options)))]
                    word.append(a)
                    v = g.arrow_term(a)
                if word and v in incident:
                    record(bytes(word))

        reports.append(
            RTTStratumChecks(
                stratum=r,
                image_paths_legal=not bad_image_turns,
                bad_image_turns=tuple(bad_image_turns),
                legal_turn_images_ok=legal_turn_images_ok,
                directions_stay=not escaping,
                escaping_directions=escaping,
                connecting_paths_checked=checked,
                connecting_failures=tuple(failures[:8]),
                enumeration_truncated=truncated,
            )
        )
    return RTTReport(tuple(reports), connecting_bound, samples)


# ---------------------------------------------------------------------------
# Periodic conjugacy classes


@dataclass(frozen=True)
class PeriodicClass:
    word: Word
    period: int


def periodic_class_scan(f: GraphMap, max_len: int = 4, max_iter: int = 8) -> tuple[PeriodicClass, ...]:
    """Find short conjugacy classes that recur under iteration.

    Enumerates canonical cyclically reduced circuit words up to ``max_len``
    and reports those whose canonical form returns to the start within
    ``max_iter`` applications.  An empty result is evidence (never proof)
    that no short class is periodic.
    """
    if not f.is_self_map:
        raise ValueError("periodic scan requires a self-map")
    g = f.domain
    found: list[PeriodicClass] = []
    for w in _canonical_circuit_words(g, max_len):
        x = w
        for n in range(1, max_iter + 1):
            x = f.apply_cyclic(x)
            if len(x) == len(w) and least_rotation(x) == w:
                found.append(PeriodicClass(w, n))
                break
    return tuple(found)


def _canonical_circuit_words(g: MarkedGraph, max_len: int):
    word = bytearray()

    def rec(start_vertex: int, at: int):
        if word and at == start_vertex and word[0] != word[-1] ^ 1:
            w = bytes(word)
            if least_rotation(w) == w:
                yield w
        if len(word) >= max_len:
            return
        for a in range(g.n_arrows):
            if g.arrow_init(a) != at or (word and a == word[-1] ^ 1):
                continue
            word.append(a)
            yield from rec(start_vertex, g.arrow_term(a))
            word.pop()

    for v in range(g.n_vertices):
        yield from rec(v, v)
