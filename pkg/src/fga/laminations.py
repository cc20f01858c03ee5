"""Rays, leaf segments, and end-collision tests for graph-map dynamics.

Everything here is finite evidence: a ray is a reduced prefix computed to a
stated depth, and every verdict is qualified by that depth.  Nothing in this
module certifies behaviour of the infinite objects.
"""

from __future__ import annotations

from dataclasses import dataclass

from .covers import CoverMap
from .graph_maps import GraphMap, compose, compute_filtration
from .words import Circuit, EdgePath, MarkedGraph, Word, is_reduced, tighten_word

ATTRACTING = "attracting"
REPELLING = "repelling"

NO_COMMON_END = "no-common-end-to-depth"
ASYMPTOTIC = "asymptotic-detected"
INCONCLUSIVE = "inconclusive"

INDEPENDENT = "independent-to-depth"
DEPENDENT = "dependent"


def _lcp_len(u: Word, v: Word) -> int:
    n = min(len(u), len(v))
    for i in range(n):
        if u[i] != v[i]:
            return i
    return n


# ---------------------------------------------------------------------------
# leaf segments and weak attraction


@dataclass(frozen=True)
class LeafSegment:
    stratum: int
    seed: int  # edge index
    depth: int
    word: Word
    role: str


def leaf_segment(
    f: GraphMap,
    edge: int | str,
    k: int,
    role: str = ATTRACTING,
    filt=None,
) -> LeafSegment:
    """Iterated image of one exponentially growing edge: a finite piece of
    the lamination leaf that edge generates.  Pass the inverse map with
    role="repelling" for the other family."""
    g = f.domain
    e = g.edge_index(edge) if isinstance(edge, str) else int(edge)
    if k < 0:
        raise ValueError("depth must be nonnegative")
    if role not in (ATTRACTING, REPELLING):
        raise ValueError("role must be 'attracting' or 'repelling'")
    filt = compute_filtration(f) if filt is None else filt
    r = filt.edge_height[e]
    if r not in filt.eg_indices:
        raise ValueError(f"edge {g.edges[e][0]!r} is not in an exponential stratum")
    return LeafSegment(r, e, k, f.iterate_word(bytes([2 * e]), k), role)


@dataclass(frozen=True)
class WeakAttractionResult:
    attained: int | None
    n_max: int

    @property
    def attracted(self) -> bool:
        return self.attained is not None


def weak_attraction_test(
    f: GraphMap,
    sigma: Circuit,
    target: Word | EdgePath,
    n_max: int,
) -> WeakAttractionResult:
    """Least n <= n_max at which the target occurs in the n-th cyclic image
    of sigma, read around the circuit without winding."""
    tw = target.word if isinstance(target, EdgePath) else target
    word = sigma.word
    for n in range(n_max + 1):
        if Circuit(f.domain, word).contains_cyclically(tw):
            return WeakAttractionResult(n, n_max)
        word = f.apply_cyclic(word)
    return WeakAttractionResult(None, n_max)


# ---------------------------------------------------------------------------
# ray prefixes


@dataclass(frozen=True)
class RayPrefix:
    graph: MarkedGraph
    start: int  # vertex index
    letters: Word
    provenance: str  # "singular" | "translated"
    seed: int | None = None  # fixed direction the ray grew from
    depth: int | None = None
    offset: int = 0  # ray letters consumed by a translation
    exhausted: bool = False

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        return self.graph.format_word(self.letters)


def singular_ray(f: GraphMap, direction: int | str, depth: int) -> RayPrefix:
    """Stable prefix of the ray a fixed direction spins out.

    Iterates the map ``depth`` times from the single arrow and keeps the part
    unchanged by one further application.
    """
    g = f.domain
    a = g.parse_letter(direction) if isinstance(direction, str) else int(direction)
    if f.direction(a) != a:
        raise ValueError(f"direction {g.arrow_name(a)!r} is not fixed")
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    w = bytes([a])
    for _ in range(depth):
        w = f.apply_word(w)
    p = _lcp_len(w, f.apply_word(w))
    return RayPrefix(g, g.arrow_init(a), w[:p], "singular", seed=a, depth=depth)


def _ray_prefix_to_length(f: GraphMap, seed: int, want: int, max_iter: int = 96) -> Word:
    """Stable ray prefix grown just far enough to hold ``want`` letters."""
    w = bytes([seed])
    for _ in range(max_iter):
        nxt = f.apply_word(w)
        if nxt == w:
            return w[:want]
        p = _lcp_len(w, nxt)
        if p >= want:
            return w[:want]
        w = nxt
    return w[: min(_lcp_len(w, f.apply_word(w)), want)]


def translate_ray(g_word: Word, ray: RayPrefix) -> RayPrefix:
    """Prepend a group element to a ray and tighten.

    The offset records how many ray letters the join consumed; consuming them
    all leaves no tail evidence and the result is flagged exhausted.
    """
    graph = ray.graph
    if not is_reduced(g_word):
        raise ValueError("translating word must be reduced")
    if g_word and graph.arrow_term(g_word[-1]) != ray.start:
        raise ValueError("translating word does not end at the ray start")
    joined = tighten_word(g_word + ray.letters)
    offset = (len(g_word) + len(ray.letters) - len(joined)) // 2
    start = graph.arrow_init(g_word[0]) if g_word else ray.start
    return RayPrefix(
        graph,
        start,
        joined,
        "translated",
        seed=ray.seed,
        depth=ray.depth,
        offset=offset,
        exhausted=offset >= len(ray.letters),
    )


# ---------------------------------------------------------------------------
# common ends


@dataclass(frozen=True)
class CommonEndVerdict:
    verdict: str
    depth: int
    margin: int
    witness: tuple[int, int] | None = None


def common_end_test(
    r1: RayPrefix,
    r2: RayPrefix,
    depth: int = 64,
    margin: int = 16,
) -> CommonEndVerdict:
    """Do two ray prefixes plausibly share an end?

    Slides each ray up to ``depth`` letters and compares overlaps.  A shift
    pair refutes itself on any mismatch and confirms when the whole overlap
    agrees and is at least ``margin`` letters long; identical prefixes of
    length >= 2 confirm outright.  Asymptotic beats inconclusive beats
    no-common-end, and the witness is the agreeing shift pair with the least
    total shift.
    """
    if r1.graph != r2.graph:
        raise ValueError("rays live on different graphs")
    if r1.exhausted or r2.exhausted:
        return CommonEndVerdict(INCONCLUSIVE, depth, margin)
    p1, p2 = r1.letters, r2.letters
    if not p1 or not p2:
        return CommonEndVerdict(INCONCLUSIVE, depth, margin)
    if p1 == p2 and len(p1) >= 2:
        return CommonEndVerdict(ASYMPTOTIC, depth, margin, (0, 0))
    witness: tuple[int, int] | None = None
    undecided = False
    for i in range(min(depth, len(p1) - 1) + 1):
        for j in range(min(depth, len(p2) - 1) + 1):
            if p1[i] != p2[j]:
                continue
            ov = min(len(p1) - i, len(p2) - j)
            if p1[i : i + ov] != p2[j : j + ov]:
                continue
            if ov >= margin:
                if witness is None or (i + j, i, j) < (witness[0] + witness[1], *witness):
                    witness = (i, j)
            else:
                undecided = True
    if witness is not None:
        return CommonEndVerdict(ASYMPTOTIC, depth, margin, witness)
    if undecided:
        return CommonEndVerdict(INCONCLUSIVE, depth, margin)
    return CommonEndVerdict(NO_COMMON_END, depth, margin)


def end_coincidence_test(
    r1: RayPrefix, r2: RayPrefix, depth: int = 64, margin: int = 2
) -> CommonEndVerdict:
    """Do two rays from a common basepoint mark the same point at infinity?

    Rays from one basepoint share their end exactly when they agree letter by
    letter, so this compares prefixes: a mismatch within the window separates
    the ends, and full agreement through ``depth`` letters reports them
    together provided the agreeing stretch is at least ``margin`` letters (a
    window too short to hold the margin is never confirming evidence).
    Running out of ray data first is inconclusive.
    """
    if r1.graph != r2.graph:
        raise ValueError("rays live on different graphs")
    if r1.exhausted or r2.exhausted:
        return CommonEndVerdict(INCONCLUSIVE, depth, 0)
    d = min(len(r1.letters), len(r2.letters), depth)
    if d == 0 or r1.letters[:d] != r2.letters[:d]:
        return CommonEndVerdict(NO_COMMON_END, depth, 0)
    if d < depth or d < margin:
        return CommonEndVerdict(INCONCLUSIVE, depth, 0)
    return CommonEndVerdict(ASYMPTOTIC, depth, 0, (0, 0))


# ---------------------------------------------------------------------------
# independence of fixed ends seen through two covers


@dataclass(frozen=True)
class RayRecord:
    cover: int
    rep_index: int
    rep: str
    role: str
    seed: int  # arrow in the covered graph
    ray: RayPrefix


@dataclass(frozen=True)
class IndependenceCell:
    left: int
    right: int
    condition: str  # "intra-cover" | "cross-cover"
    verdict: CommonEndVerdict


@dataclass(frozen=True)
class IndependenceReport:
    depth: int
    margin: int
    doubled: bool
    rays: tuple[RayRecord, ...]
    cells: tuple[IndependenceCell, ...]
    summary: str  # "independent-to-depth" | "dependent" | "inconclusive"
    witness: tuple[int, int] | None


def _require_inverse(f: GraphMap, f_inv: GraphMap) -> None:
    if f_inv is None:
        raise ValueError("independence needs the inverse map for repelling rays")
    for h in (compose(f_inv, f), compose(f, f_inv)):
        ok = all(
            h.edge_images[e] == bytes([2 * e]) for e in range(h.domain.n_edges)
        ) and h.vertex_images == tuple(range(h.domain.n_vertices))
        if not ok:
            raise ValueError("inverse map does not invert the automorphism")


def _exponential_fixed_directions(f: GraphMap) -> list[int]:
    filt = compute_filtration(f)
    eg = set(filt.eg_indices)
    return [a for a in f.fixed_directions() if filt.edge_height[a >> 1] in eg]


def fixed_point_independence(
    f: GraphMap,
    f_inv: GraphMap,
    cover_a: CoverMap,
    cover_b: CoverMap,
    depth: int = 64,
    margin: int = 16,
) -> IndependenceReport:
    """Compare the fixed singular ends of an automorphism as seen through two
    covers of the same graph.

    Rays grow from the fixed exponential directions of the map (attracting)
    and of its inverse (repelling), are projected to base coordinates by each
    cover, and are translated by every coset representative.  Each translated
    ray marks a point at infinity; distinct-coset pairs within one cover and
    all pairs across the covers must mark distinct points, checked by prefix
    comparison from the shared basepoint.  If any cell is inconclusive the
    depth doubles once.
    """
    total = f.domain
    for cov in (cover_a, cover_b):
        if cov.total != total:
            raise ValueError("cover does not sit over the automorphism's graph")
    if cover_a.base != cover_b.base:
        raise ValueError("covers project to different base graphs")
    _require_inverse(f, f_inv)

    report = _independence_once(f, f_inv, cover_a, cover_b, depth, margin, False)
    if report.summary == INCONCLUSIVE:
        report = _independence_once(f, f_inv, cover_a, cover_b, 2 * depth, margin, True)
    return report


def _independence_once(f, f_inv, cover_a, cover_b, depth, margin, doubled):
    covers = (cover_a, cover_b)
    rep_len = max(len(r) for cov in covers for r in cov.coset_representatives)
    want = depth + margin + rep_len + 4

    seed_rays: list[tuple[str, int, Word]] = []
    for role, h in ((ATTRACTING, f), (REPELLING, f_inv)):
        for a in _exponential_fixed_directions(h):
            seed_rays.append((role, a, _ray_prefix_to_length(h, a, want)))
    if not seed_rays:
        raise ValueError("no fixed exponential directions; try a higher power")

    rays: list[RayRecord] = []
    for ci, cov in enumerate(covers):
        for ri, rep in enumerate(cov.coset_representatives):
            for role, seed, letters in seed_rays:
                proj = cov.project_word(letters)
                start = cov.base.arrow_init(proj[0]) if proj else 0
                base_ray = RayPrefix(cov.base, start, proj, "singular", seed=seed)
                rays.append(
                    RayRecord(
                        ci, ri, cov.base.format_word(rep), role, seed, translate_ray(rep, base_ray)
                    )
                )

    cells: list[IndependenceCell] = []
    for i in range(len(rays)):
        for j in range(i + 1, len(rays)):
            a, b = rays[i], rays[j]
            if a.cover == b.cover:
                if a.rep_index == b.rep_index:
                    continue
                condition = "intra-cover"
            else:
                condition = "cross-cover"
            cells.append(
                IndependenceCell(i, j, condition, end_coincidence_test(a.ray, b.ray, depth, margin))
            )

    witness = None
    for c in cells:
        if c.verdict.verdict == ASYMPTOTIC:
            witness = (c.left, c.right)
            break
    if witness is not None:
        summary = DEPENDENT
    elif any(c.verdict.verdict == INCONCLUSIVE for c in cells):
        summary = INCONCLUSIVE
    else:
        summary = INDEPENDENT
    return IndependenceReport(depth, margin, doubled, tuple(rays), tuple(cells), summary, witness)


@dataclass(frozen=True)
class FamilyPair:
    left: int
    right: int
    report: IndependenceReport


@dataclass(frozen=True)
class FamilyReport:
    depth: int
    pairs: tuple[FamilyPair, ...]
    summary: str
    witness: tuple[int, int] | None  # indices of the first dependent pair


def family_independence(
    f: GraphMap,
    f_inv: GraphMap,
    covers: list[CoverMap] | tuple[CoverMap, ...],
    depth: int = 64,
    margin: int = 16,
) -> FamilyReport:
    """Pairwise independence across a family of covers; a single cover is
    vacuously independent."""
    pairs: list[FamilyPair] = []
    for i in range(len(covers)):
        for j in range(i + 1, len(covers)):
            pairs.append(
                FamilyPair(
                    i, j, fixed_point_independence(f, f_inv, covers[i], covers[j], depth, margin)
                )
            )
    witness = None
    summary = INDEPENDENT
    for p in pairs:
        if p.report.summary == DEPENDENT:
            summary, witness = DEPENDENT, (p.left, p.right)
            break
    else:
        if any(p.report.summary == INCONCLUSIVE for p in pairs):
            summary = INCONCLUSIVE
    return FamilyReport(depth, tuple(pairs), summary, witness)
