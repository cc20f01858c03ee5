"""Graphs of roses, regluing by automorphism powers, and flare experiments.

A system is a finite base graph whose vertices carry roses and whose edges
carry an edge graph attached to each endpoint rose by a finite covering.
Regluing twists the gluing of each edge by powers of an automorphism of the
edge graph; the experiments here subdivide the base so one automorphism
application is spread across each subdivided step, propagate hallways whose
consecutive verticals are exact images, and test the flare inequality on the
sampled length profiles.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np

from .covers import CoverMap
from .graph_maps import (
    GraphMap,
    basis_loops,
    compose,
    is_pi1_isomorphism,
    power,
    spanning_tree,
)
from .words import (
    EdgePath,
    MarkedGraph,
    Word,
    cyclic_reduce,
    is_reduced,
    least_rotation,
    tighten_word,
)

PASS = "pass"
FAIL = "fail"
BELOW_GIRTH = "below-girth"


# ---------------------------------------------------------------------------
# the system


@dataclass(frozen=True)
class Attachment:
    """One end of a base edge: how the edge graph covers the endpoint rose.

    ``edge_labels[k]`` is the rose arrow that the forward arrow of edge-graph
    edge ``k`` is glued along; an odd value means the gluing reverses
    orientation there.
    """

    vertex: str
    edge_labels: tuple[int, ...]
    basepoint: int = 0


@dataclass(frozen=True)
class GraphOfRoses:
    base: MarkedGraph
    roses: tuple[tuple[str, MarkedGraph], ...]
    edge_spaces: tuple[tuple[str, MarkedGraph], ...]
    attachments: tuple[tuple[str, Attachment, Attachment], ...]
    name: str = "system"

    def __post_init__(self) -> None:
        if {v for v, _ in self.roses} != set(self.base.vertices):
            raise ValueError(f"system {self.name}: roses do not match base vertices")
        eids = {e[0] for e in self.base.edges}
        if {e for e, _ in self.edge_spaces} != eids:
            raise ValueError(f"system {self.name}: edge spaces do not match base edges")
        if {e for e, _, _ in self.attachments} != eids:
            raise ValueError(f"system {self.name}: attachments do not match base edges")
        for eid, at_u, at_v in self.attachments:
            _, u, v = self.base.edges[self.base.edge_index(eid)]
            if at_u.vertex != u or at_v.vertex != v:
                raise ValueError(
                    f"system {self.name}: edge {eid} attachments name wrong vertices"
                )

    @cached_property
    def _roses(self) -> dict[str, MarkedGraph]:
        return dict(self.roses)

    @cached_property
    def _spaces(self) -> dict[str, MarkedGraph]:
        return dict(self.edge_spaces)

    @cached_property
    def _attach(self) -> dict[str, tuple[Attachment, Attachment]]:
        return {e: (a, b) for e, a, b in self.attachments}

    def rose(self, vertex: str) -> MarkedGraph:
        return self._roses[vertex]

    def edge_space(self, eid: str) -> MarkedGraph:
        return self._spaces[eid]

    def attachment_pair(self, eid: str) -> tuple[Attachment, Attachment]:
        return self._attach[eid]

    def cover(self, eid: str, end: int) -> CoverMap:
        """The covering map at one end of an edge (0 = initial, 1 = terminal)."""
        return self._covers[(eid, end)]

    @cached_property
    def _covers(self) -> dict[tuple[str, int], CoverMap]:
        out = {}
        for eid, pair in self._attach.items():
            for end in (0, 1):
                att = pair[end]
                out[(eid, end)] = CoverMap(
                    self._spaces[eid],
                    self._roses[att.vertex],
                    att.edge_labels,
                    att.basepoint,
                )
        return out


@dataclass(frozen=True)
class RegluingSpec:
    """Automorphism data per base edge plus subdivision exponents.

    ``power`` replaces every map by that composite power before any
    experiment runs, a blunt way to work with a more stable iterate.
    """

    maps: tuple[tuple[str, GraphMap, GraphMap], ...]
    exponents: tuple[tuple[str, int], ...] = ()
    power: int = 1

    def __post_init__(self) -> None:
        for eid, n in self.exponents:
            if n < 1:
                raise ValueError(f"edge {eid}: exponent must be at least 1")
        if self.power < 1:
            raise ValueError("global power must be at least 1")

    @cached_property
    def _maps(self) -> dict[str, tuple[GraphMap, GraphMap]]:
        return {e: (f, g) for e, f, g in self.maps}

    @cached_property
    def _powered(self) -> dict[str, tuple[GraphMap, GraphMap]]:
        return {
            e: (power(f, self.power), power(g, self.power))
            for e, (f, g) in self._maps.items()
        }

    @cached_property
    def _exps(self) -> dict[str, int]:
        return dict(self.exponents)

    def pair(self, eid: str) -> tuple[GraphMap, GraphMap]:
        return self._maps[eid]

    def powered_pair(self, eid: str) -> tuple[GraphMap, GraphMap]:
        return self._powered[eid]

    def exponent(self, eid: str, default: int = 1) -> int:
        return self._exps.get(eid, default)

    def with_uniform_exponent(self, n: int) -> "RegluingSpec":
        return RegluingSpec(self.maps, tuple((e, n) for e, _, _ in self.maps), self.power)


# ---------------------------------------------------------------------------
# validation


@dataclass(frozen=True)
class NotACovering:
    edge: str
    end: str  # "u" | "v"
    vertex: str  # offending edge-space vertex, or the bad piece of data
    reason: str


@dataclass(frozen=True)
class InverseMismatch:
    edge: str
    witness: str  # basis loop whose class is not restored, or the defect


@dataclass(frozen=True)
class AttachmentReport:
    edge: str
    end: str
    base_vertex: str
    degree: int


@dataclass(frozen=True)
class ValidationReport:
    system: str
    attachments: tuple[AttachmentReport, ...]
    errors: tuple[object, ...]

    @property
    def valid(self) -> bool:
        return not self.errors


def _covering_defect(total: MarkedGraph, rose: MarkedGraph, labels: tuple[int, ...]):
    """First place the labeled graph fails to cover the rose, or None."""
    if not rose.is_rose:
        return rose.vertices[0], "attachment target is not a rose"
    if len(labels) != total.n_edges:
        return total.vertices[0], "label count does not match edge count"
    if any(not 0 <= lab < rose.n_arrows for lab in labels):
        return total.vertices[0], "label is not a rose arrow"
    if not total.is_connected():
        return total.vertices[0], "edge graph is not connected"
    full = list(range(rose.n_arrows))
    for v in range(total.n_vertices):
        seen = sorted(labels[a >> 1] ^ (a & 1) for a in total.arrows_out[v])
        if seen != full:
            return total.vertices[v], "star does not map bijectively to the rose star"
    return None


def _conjugacy_key(word: Word) -> Word:
    core, _ = cyclic_reduce(tighten_word(word))
    return least_rotation(core)


def _inverse_witness(space: MarkedGraph, fwd: GraphMap, inv: GraphMap) -> str | None:
    """Basis loop whose conjugacy class is moved by forward-then-inverse."""
    tree = spanning_tree(space)
    loops = basis_loops(tree)
    for h in (compose(inv, fwd), compose(fwd, inv)):
        for loop in loops:
            if _conjugacy_key(h.apply_word(loop)) != _conjugacy_key(loop):
                return space.format_word(loop)
    return None


def validate_system(g: GraphOfRoses, spec: RegluingSpec) -> ValidationReport:
    """Check covering and automorphism invariants, reporting every failure."""
    errors: list[object] = []
    attachments: list[AttachmentReport] = []
    for eid, at_u, at_v in g.attachments:
        space = g.edge_space(eid)
        for end, att in (("u", at_u), ("v", at_v)):
            rose = g._roses.get(att.vertex)
            if rose is None:
                errors.append(NotACovering(eid, end, att.vertex, "unknown base vertex"))
                continue
            defect = _covering_defect(space, rose, att.edge_labels)
            if defect is not None:
                errors.append(NotACovering(eid, end, defect[0], defect[1]))
                continue
            if not 0 <= att.basepoint < space.n_vertices:
                errors.append(
                    NotACovering(eid, end, str(att.basepoint), "basepoint out of range")
                )
                continue
            attachments.append(AttachmentReport(eid, end, att.vertex, space.n_vertices))
    known = {e for e, _, _ in g.attachments}
    for eid, fwd, inv in spec.maps:
        if eid not in known:
            errors.append(InverseMismatch(eid, "edge not in system"))
            continue
        space = g.edge_space(eid)
        if (
            fwd.domain != space
            or not fwd.is_self_map
            or inv.domain != space
            or not inv.is_self_map
        ):
            errors.append(InverseMismatch(eid, "map is not a self-map of the edge space"))
            continue
        if not is_pi1_isomorphism(fwd):
            errors.append(InverseMismatch(eid, "forward map is not an isomorphism"))
            continue
        witness = _inverse_witness(space, fwd, inv)
        if witness is not None:
            errors.append(InverseMismatch(eid, witness))
    for eid in sorted(known - {e for e, _, _ in spec.maps}):
        errors.append(InverseMismatch(eid, "no automorphism supplied"))
    return ValidationReport(g.name, tuple(attachments), tuple(errors))


# ---------------------------------------------------------------------------
# subdivision


@dataclass(frozen=True)
class SubdividedBase:
    graph: MarkedGraph
    original: frozenset[str]
    chains: tuple[tuple[str, tuple[str, ...]], ...]

    @cached_property
    def parent(self) -> dict[str, tuple[str, int]]:
        """Sub-edge id -> (parent edge id, position along the chain)."""
        out: dict[str, tuple[str, int]] = {}
        for parent, subs in self.chains:
            for k, sid in enumerate(subs):
                out[sid] = (parent, k)
        return out

    @cached_property
    def _chains(self) -> dict[str, tuple[str, ...]]:
        return dict(self.chains)

    def chain(self, parent: str) -> tuple[str, ...]:
        return self._chains[parent]


def subdivide(g: GraphOfRoses, spec: RegluingSpec) -> SubdividedBase:
    """Replace each base edge by a chain of one sub-edge per exponent unit."""
    vertices = list(g.base.vertices)
    edges: list[tuple[str, str, str]] = []
    chains: list[tuple[str, tuple[str, ...]]] = []
    for eid, u, v in g.base.edges:
        n = spec.exponent(eid)
        if n == 1:
            edges.append((eid, u, v))
            chains.append((eid, (eid,)))
            continue
        stops = [u] + [f"{eid}.s{k}" for k in range(1, n)] + [v]
        vertices.extend(stops[1:-1])
        subs = tuple(f"{eid}.{k + 1}" for k in range(n))
        for k, sid in enumerate(subs):
            edges.append((sid, stops[k], stops[k + 1]))
        chains.append((eid, subs))
    graph = MarkedGraph(f"{g.base.name}+sub", tuple(vertices), tuple(edges))
    return SubdividedBase(graph, frozenset(g.base.vertices), tuple(chains))


# ---------------------------------------------------------------------------
# special hallways


@dataclass(frozen=True)
class HallwayState:
    position: int  # -m .. m
    vertex: str  # subdivided-base vertex id
    space: str  # "rose:<vertex>" | "edge:<parent>"
    anchor: int  # start vertex of the vertical, as an index in its space
    word: Word

    @property
    def length(self) -> int:
        return len(self.word)


@dataclass(frozen=True)
class SpecialHallway:
    geodesic: EdgePath  # in the subdivided base, length 2m
    states: tuple[HallwayState, ...]
    coset_choices: tuple[int, ...]
    seed: int | None = None

    @property
    def half_length(self) -> int:
        return len(self.geodesic.word) // 2

    @property
    def lengths(self) -> tuple[int, ...]:
        return tuple(s.length for s in self.states)

    def l(self, i: int) -> int:
        return self.states[i + self.half_length].length

    @property
    def girth(self) -> int:
        return min(self.lengths)


def _geodesic_vertex_ids(sub: SubdividedBase, geodesic: EdgePath) -> list[str]:
    ids = [geodesic.start]
    for a in geodesic.word:
        ids.append(sub.graph.arrow_term(a))
    return [sub.graph.vertices[v] for v in ids]


def _count_lifts(sub: SubdividedBase, ids: list[str], m: int) -> int:
    # one coset choice each time an arm leaves an original vertex
    count = sum(1 for i in range(m, 2 * m) if ids[i] in sub.original)
    count += sum(1 for i in range(m, 0, -1) if ids[i] in sub.original)
    return count


def propagate_hallway(
    g: GraphOfRoses,
    spec: RegluingSpec,
    sub: SubdividedBase,
    geodesic: EdgePath,
    midpoint: Word,
    anchor: int = 0,
    coset_choices: Sequence[int] | None = None,
    seed: int | None = None,
) -> SpecialHallway:
    """Grow a hallway outward from its middle vertical.

    Crossing one sub-edge applies the edge automorphism (its inverse against
    orientation); whenever an arm leaves an original vertex the current
    vertical first lifts through the attaching cover at the fiber vertex
    named by the next coset choice, and on arriving at an original vertex it
    projects back down.  Both transfers preserve length exactly, so all
    length variation along the profile comes from the automorphisms.

    Choices are consumed forward arm first, then backward arm.  With
    ``coset_choices`` omitted they are drawn from a generator seeded by
    ``seed`` and recorded on the result for exact replay.
    """
    if geodesic.graph != sub.graph:
        raise ValueError("geodesic does not live on the subdivided base")
    if not geodesic.is_reduced:
        raise ValueError("geodesic backtracks")
    if len(geodesic.word) % 2 != 0 or not geodesic.word:
        raise ValueError("geodesic length must be a positive even number")
    m = len(geodesic.word) // 2
    ids = _geodesic_vertex_ids(sub, geodesic)

    centre = ids[m]
    if centre in sub.original:
        space = g.rose(centre)
        space_name = f"rose:{centre}"
        if anchor != 0:
            raise ValueError("inconsistent anchor: rose verticals start at the wedge vertex")
    else:
        parent = sub.parent[sub.graph.edges[geodesic.word[m] >> 1][0]][0]
        space = g.edge_space(parent)
        space_name = f"edge:{parent}"
    if not is_reduced(midpoint):
        raise ValueError("midpoint word must be reduced")
    try:
        EdgePath(space, anchor, midpoint)
    except (ValueError, IndexError) as exc:
        raise ValueError(f"inconsistent anchor: {exc}") from exc

    needed = _count_lifts(sub, ids, m)
    if coset_choices is not None:
        supplied = list(coset_choices)
        if len(supplied) != needed:
            raise ValueError(
                f"coset choice count mismatch: need {needed}, got {len(supplied)}"
            )
        rng = None
    else:
        supplied = []
        rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))

    used: list[int] = []

    def take_choice(fiber: int) -> int:
        if rng is None:
            c = supplied[len(used)]
        else:
            c = int(rng.integers(0, fiber))
        if not 0 <= c < fiber:
            raise ValueError(f"coset choice {c} outside fiber of size {fiber}")
        used.append(c)
        return c

    def cross(state: HallwayState, arrow: int, pos: int) -> HallwayState:
        sid = sub.graph.edges[arrow >> 1][0]
        parent, index = sub.parent[sid]
        fwd, inv = spec.powered_pair(parent)
        chain_len = len(sub.chain(parent))
        positive = (arrow & 1) == 0
        word, at = state.word, state.anchor
        if state.space.startswith("rose:"):
            cov = g.cover(parent, 0) if positive else g.cover(parent, 1)
            at = take_choice(cov.degree)
            word = cov.lift_word(word, at)
            assert len(word) == state.length  # covering transfer
        fmap = fwd if positive else inv
        at = fmap.vertex_images[at]
        word = fmap.apply_word(word)
        at_end = index == chain_len - 1 if positive else index == 0
        target = ids[pos + m]
        if at_end:
            cov = g.cover(parent, 1) if positive else g.cover(parent, 0)
            n = len(word)
            word = cov.project_word(word)
            assert len(word) == n  # covering transfer
            return HallwayState(pos, target, f"rose:{target}", 0, word)
        return HallwayState(pos, target, f"edge:{parent}", at, word)

    states: dict[int, HallwayState] = {
        0: HallwayState(0, centre, space_name, anchor, midpoint)
    }
    for i in range(m):
        states[i + 1] = cross(states[i], geodesic.word[m + i], i + 1)
    for i in range(m):
        states[-i - 1] = cross(states[-i], geodesic.word[m - i - 1] ^ 1, -i - 1)

    ordered = tuple(states[i] for i in range(-m, m + 1))
    return SpecialHallway(geodesic, ordered, tuple(used), seed)


# ---------------------------------------------------------------------------
# flare inequality


@dataclass(frozen=True)
class FlareVerdict:
    status: str  # pass | fail | below-girth
    lam: float
    girth: int
    centre: int
    left: int
    right: int

    @property
    def passed(self) -> bool:
        return self.status == PASS


def flare_check(
    hallway: SpecialHallway | Sequence[int],
    lam: float = 2.0,
    girth_threshold: int = 1,
) -> FlareVerdict:
    """Test lam * l(0) <= max(l(-m), l(m)) on one hallway or raw profile.

    Profiles whose shortest vertical is below the girth threshold are
    excluded rather than failed; the flare condition only quantifies over
    hallways at least that thick.
    """
    lengths = hallway.lengths if isinstance(hallway, SpecialHallway) else tuple(hallway)
    if len(lengths) % 2 != 1 or len(lengths) < 3:
        raise ValueError("profile must list an odd number of at least 3 lengths")
    girth = min(lengths)
    centre, left, right = lengths[len(lengths) // 2], lengths[0], lengths[-1]
    if girth < girth_threshold:
        return FlareVerdict(BELOW_GIRTH, lam, girth, centre, left, right)
    ok = lam * centre <= max(left, right)
    return FlareVerdict(PASS if ok else FAIL, lam, girth, centre, left, right)


def pointwise_flares(lengths: Sequence[int], lam: float = 2.0, radius: int = 1) -> bool:
    """Does every position with full margin satisfy the flare inequality?"""
    if radius < 1:
        raise ValueError("radius must be positive")
    n = len(lengths)
    return all(
        lam * lengths[i] <= max(lengths[i - radius], lengths[i + radius])
        for i in range(radius, n - radius)
    )


@dataclass(frozen=True)
class ConcatenationCheck:
    overlap: int
    hypotheses: bool  # both windows flare pointwise and the overlap is long enough
    flares: bool  # the union flares exponentially from its centre
    union: tuple[int, ...]


def concatenation_flare(
    p1: Sequence[int],
    p2: Sequence[int],
    offset: int,
    lam: float = 2.0,
    radius: int = 1,
    min_overlap: int | None = None,
) -> ConcatenationCheck:
    """Overlap arithmetic for flaring windows.

    Two positive length profiles agreeing on an overlap of at least twice the
    flare radius, each flaring pointwise, have a union that flares pointwise
    and hence exponentially from its centre: an interior position with full
    margins sits wholly inside one window, and pointwise flaring forbids
    interior local maxima along each radius-spaced subsequence, which locks
    in a growth direction.  The hypotheses and the conclusion are reported
    separately so a suite can assert the implication while a constructed
    short overlap exhibits its failure.
    """
    if min_overlap is None:
        min_overlap = 2 * radius
    if offset <= 0 or offset >= len(p1):
        raise ValueError("second window must start strictly inside the first")
    overlap = len(p1) - offset
    if overlap > len(p2):
        raise ValueError("second window ends inside the first")
    if tuple(p1[offset:]) != tuple(p2[:overlap]):
        raise ValueError("profiles disagree on the overlap")
    if any(x < 1 for x in p1) or any(x < 1 for x in p2):
        raise ValueError("lengths must be positive")
    union = tuple(p1) + tuple(p2[overlap:])
    hypotheses = (
        overlap >= min_overlap
        and pointwise_flares(p1, lam, radius)
        and pointwise_flares(p2, lam, radius)
    )
    centre = len(union) // 2
    reach = min(centre, len(union) - 1 - centre) // radius
    if reach < 1:
        flares = False
    else:
        k = reach * radius
        flares = pointwise_flares(union, lam, radius) and (
            lam**reach * union[centre] <= max(union[centre - k], union[centre + k])
        )
    return ConcatenationCheck(overlap, hypotheses, flares, union)


# ---------------------------------------------------------------------------
# stretch experiments at a vertex


@dataclass(frozen=True)
class VertexSystem:
    """Everything incident to one base vertex: its rose plus, per incident
    edge end, the attaching cover and the automorphism pair acting upstairs."""

    rose: MarkedGraph
    entries: tuple[tuple[str, CoverMap, GraphMap, GraphMap], ...]


def vertex_system(g: GraphOfRoses, spec: RegluingSpec, vertex: str) -> VertexSystem:
    if vertex not in g._roses:
        raise ValueError(f"no vertex {vertex} in system {g.name}")
    entries = []
    for eid, u, v in g.base.edges:
        for end, w in ((0, u), (1, v)):
            if w == vertex:
                fwd, inv = spec.powered_pair(eid)
                entries.append((eid, g.cover(eid, end), fwd, inv))
    return VertexSystem(g.rose(vertex), tuple(entries))


def stretch_verdict(lengths: Sequence[int], seed_len: int, need: int | None = None) -> bool:
    """At least ``need`` of the iterate lengths more than double the seed."""
    if need is None:
        need = len(lengths) - 1
    return sum(1 for x in lengths if x > 2 * seed_len) >= need


@dataclass(frozen=True)
class StretchResult:
    word: str
    m: int
    lengths: tuple[tuple[str, int, int], ...]  # (edge, |fwd^m|, |inv^m|)
    anchors: tuple[int, ...]
    passed: bool


def all_but_one(
    config: VertexSystem,
    word: Word,
    m: int,
    anchors: Sequence[int] | None = None,
) -> StretchResult:
    """Lift a rose word into every incident edge space and iterate both ways.

    The verdict requires all but one of the 2k iterate lengths to more than
    double the seed length.
    """
    if not word:
        raise ValueError("seed word must be nonempty")
    if not is_reduced(word):
        raise ValueError("seed word must be reduced")
    if m < 0:
        raise ValueError("iterate count must be nonnegative")
    if anchors is None:
        anchors = tuple(cov.basepoint for _, cov, _, _ in config.entries)
    anchors = tuple(anchors)
    if len(anchors) != len(config.entries):
        raise ValueError("one anchor per incident edge end required")
    rows = []
    values = []
    for (eid, cov, fwd, inv), at in zip(config.entries, anchors):
        if not 0 <= at < cov.degree:
            raise ValueError(f"anchor {at} outside the fiber over {eid}")
        lifted = cov.lift_word(word, at)
        up = len(fwd.iterate_word(lifted, m))
        down = len(inv.iterate_word(lifted, m))
        rows.append((eid, up, down))
        values.extend((up, down))
    return StretchResult(
        config.rose.format_word(word),
        m,
        tuple(rows),
        anchors,
        stretch_verdict(values, len(word)),
    )


def three_of_four(
    config: VertexSystem,
    word: Word,
    m: int,
    anchors: Sequence[int] | None = None,
) -> StretchResult:
    """The two-incidence special case: three of the four lengths must double."""
    if len(config.entries) != 2:
        raise ValueError("three_of_four needs exactly two incident edge ends")
    return all_but_one(config, word, m, anchors)


def _random_reduced_word(g: MarkedGraph, length: int, rng, start: int | None = None) -> Word:
    out = bytearray()
    cur = int(rng.integers(0, g.n_vertices)) if start is None else start
    for _ in range(length):
        stars = g.arrows_out[cur]
        if out:
            stars = tuple(a for a in stars if a != (out[-1] ^ 1))
        if not stars:
            break
        a = stars[int(rng.integers(0, len(stars)))]
        out.append(a)
        cur = g.arrow_term(a)
    return bytes(out)


@dataclass(frozen=True)
class SurveyCell:
    length: int
    m: int
    samples: int
    passed: int

    @property
    def fraction(self) -> float:
        return self.passed / self.samples if self.samples else 0.0


@dataclass(frozen=True)
class StretchSurvey:
    cells: tuple[SurveyCell, ...]
    failures: tuple[StretchResult, ...]
    length_estimate: int | None
    m_estimate: int | None
    seed: int
    samples: int
    threshold: float

    @property
    def attained(self) -> bool:
        return self.length_estimate is not None


def stretch_survey(
    config: VertexSystem,
    samples: int,
    lengths: Sequence[int],
    m_values: Sequence[int],
    seed: int = 0,
    threshold: float = 1.0,
    max_failures: int = 32,
) -> StretchSurvey:
    """Sample random seed words per length bucket and tabulate the verdicts.

    The estimates name the smallest (length, m) corner from which every
    sampled cell up and to the right clears the threshold.
    """
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    lengths = tuple(lengths)
    m_values = tuple(m_values)
    counts = {(L, m): [0, 0] for L in lengths for m in m_values}
    failures: list[StretchResult] = []
    for L in lengths:
        for _ in range(samples):
            word = _random_reduced_word(config.rose, L, rng, start=0)
            anchors = tuple(
                int(rng.integers(0, cov.degree)) for _, cov, _, _ in config.entries
            )
            for m in m_values:
                res = all_but_one(config, word, m, anchors)
                cell = counts[(L, m)]
                cell[0] += 1
                if res.passed:
                    cell[1] += 1
                elif len(failures) < max_failures:
                    failures.append(res)
    cells = tuple(
        SurveyCell(L, m, counts[(L, m)][0], counts[(L, m)][1])
        for L in lengths
        for m in m_values
    )
    length_est = m_est = None
    for L in lengths:
        for m in m_values:
            tail = [c for c in cells if c.length >= L and c.m >= m and c.samples]
            if tail and all(c.fraction >= threshold for c in tail):
                length_est, m_est = L, m
                break
        if length_est is not None:
            break
    return StretchSurvey(cells, tuple(failures), length_est, m_est, seed, samples, threshold)


# ---------------------------------------------------------------------------
# exponent search over whole systems


@dataclass(frozen=True)
class HallwayWitness:
    m: int
    start: str
    path: str
    midpoint: str
    anchor: int
    cosets: tuple[int, ...]
    lengths: tuple[int, ...]


@dataclass(frozen=True)
class FlareRow:
    m: int
    samples: int
    passed: int
    failed: int
    below_girth: int

    @property
    def fraction(self) -> float:
        tested = self.samples - self.below_girth
        return self.passed / tested if tested else 1.0


@dataclass(frozen=True)
class FlareReport:
    exponent: int
    lam: float
    girth_threshold: int
    rows: tuple[FlareRow, ...]
    witnesses: tuple[HallwayWitness, ...]
    stable_m: int | None  # smallest sampled m from which every fraction clears
    ratio_bound: float  # largest end-to-end ratio seen on any sampled hallway
    seed: int

    @property
    def passed(self) -> bool:
        return self.stable_m is not None

    @property
    def overall_fraction(self) -> float:
        tested = sum(r.samples - r.below_girth for r in self.rows)
        return sum(r.passed for r in self.rows) / tested if tested else 1.0


@dataclass(frozen=True)
class ExponentSearchResult:
    reports: tuple[FlareReport, ...]
    smallest_passing: int | None
    seed: int


def _random_geodesic(graph: MarkedGraph, length: int, rng, tries: int = 64) -> EdgePath | None:
    for _ in range(tries):
        start = int(rng.integers(0, graph.n_vertices))
        word = bytearray()
        cur = start
        for _ in range(length):
            stars = graph.arrows_out[cur]
            if word:
                stars = tuple(a for a in stars if a != (word[-1] ^ 1))
            if not stars:
                break
            a = stars[int(rng.integers(0, len(stars)))]
            word.append(a)
            cur = graph.arrow_term(a)
        if len(word) == length:
            return EdgePath(graph, start, bytes(word))
    return None


def sample_flare(
    g: GraphOfRoses,
    spec: RegluingSpec,
    m_values: Sequence[int],
    samples: int,
    seed: int = 0,
    lam: float = 2.0,
    girth_threshold: int = 1,
    midpoint_length: int = 40,
    pass_threshold: float = 1.0,
    max_witnesses_per_row: int = 6,
) -> FlareReport:
    """Sample special hallways on one reglued system and check flaring.

    Per (m, sample): a random non-backtracking geodesic of length 2m in the
    subdivided base, a random reduced middle vertical seated in the centre
    space, and coset choices from a per-hallway seed.  Row fractions count
    passes among hallways at or above the girth threshold; a row with
    nothing above it passes vacuously.  Everything is derived from ``seed``,
    the subdivision exponent, and m, so reruns reproduce the report exactly.
    """
    sub = subdivide(g, spec)
    exponent = max((n for _, n in spec.exponents), default=1)
    rows: list[FlareRow] = []
    witnesses: list[HallwayWitness] = []
    ratio_bound = 1.0
    for m in m_values:
        if m < 1:
            raise ValueError("hallway half-lengths must be positive")
        rng = np.random.Generator(
            np.random.Philox(np.random.SeedSequence((seed, exponent, m)))
        )
        passed = failed = below = 0
        row_witnesses = 0
        for _ in range(samples):
            geo = _random_geodesic(sub.graph, 2 * m, rng)
            if geo is None:
                below += 1
                continue
            vids = _geodesic_vertex_ids(sub, geo)
            centre = vids[m]
            if centre in sub.original:
                space = g.rose(centre)
                anchor = 0
            else:
                parent = sub.parent[sub.graph.edges[geo.word[m] >> 1][0]][0]
                space = g.edge_space(parent)
                anchor = int(rng.integers(0, space.n_vertices))
            midpoint = _random_reduced_word(space, midpoint_length, rng, start=anchor)
            hall = propagate_hallway(
                g, spec, sub, geo, midpoint, anchor,
                seed=int(rng.integers(0, 2**63 - 1)),
            )
            verdict = flare_check(hall, lam, girth_threshold)
            lo, hi = sorted((max(verdict.left, 1), max(verdict.right, 1)))
            ratio_bound = max(ratio_bound, hi / lo)
            if verdict.status == PASS:
                passed += 1
            elif verdict.status == BELOW_GIRTH:
                below += 1
            else:
                failed += 1
                if row_witnesses < max_witnesses_per_row:
                    row_witnesses += 1
                    witnesses.append(
                        HallwayWitness(
                            m,
                            sub.graph.vertices[geo.start],
                            sub.graph.format_word(geo.word),
                            space.format_word(midpoint),
                            anchor,
                            hall.coset_choices,
                            hall.lengths,
                        )
                    )
        rows.append(FlareRow(m, samples, passed, failed, below))
    stable = None
    for row in rows:
        if all(r.fraction >= pass_threshold for r in rows if r.m >= row.m):
            stable = row.m
            break
    return FlareReport(
        exponent, lam, girth_threshold, tuple(rows), tuple(witnesses),
        stable, ratio_bound, seed,
    )


def exponent_search(
    g: GraphOfRoses,
    spec: RegluingSpec,
    candidates: Sequence[int] = (4, 8, 16, 24),
    samples: int = 100,
    m_values: Sequence[int] = (2, 4, 6, 8, 10, 12),
    seed: int = 0,
    lam: float = 2.0,
    girth_threshold: int = 1,
    midpoint_length: int = 40,
    pass_threshold: float = 1.0,
) -> ExponentSearchResult:
    """Try uniform subdivision exponents and report flare statistics for each."""
    reports = tuple(
        sample_flare(
            g,
            spec.with_uniform_exponent(n),
            m_values,
            samples,
            seed,
            lam,
            girth_threshold,
            midpoint_length,
            pass_threshold,
        )
        for n in candidates
    )
    smallest = next((r.exponent for r in reports if r.passed), None)
    return ExponentSearchResult(reports, smallest, seed)
