from collections import Counter

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fga import (
    Circuit,
    CoverMap,
    GraphMap,
    MarkedGraph,
    RayPrefix,
    common_end_test,
    end_coincidence_test,
    family_independence,
    fixed_point_independence,
    leaf_segment,
    lift_map,
    power,
    singular_ray,
    translate_ray,
    turn_analysis,
    weak_attraction_test,
)
from fga.graph_maps import turns_crossed
from fga.laminations import (
    ASYMPTOTIC,
    DEPENDENT,
    INCONCLUSIVE,
    INDEPENDENT,
    NO_COMMON_END,
)


@pytest.fixture(scope="module")
def fib2(fib, fib_inv):
    # squared so the inverse direction has fixed directions too
    return power(fib, 2), power(fib_inv, 2)


@pytest.fixture(scope="module")
def deg2_pair(rose2, cover2):
    # a -> ababa, b -> ab sends b-count of every image even, so it lifts
    g = GraphMap.from_strs(rose2, {"a": "a b a b a", "b": "a b"})
    g_inv = GraphMap.from_strs(rose2, {"a": "b' b' a", "b": "a' b b b"})
    lifted = lift_map(cover2, g)
    lifted_inv = lift_map(cover2, g_inv)
    # same total graph, labels swapped a<->b: the even-a marking
    other = CoverMap(cover2.total, rose2, tuple(l ^ 2 for l in cover2.edge_labels), 0)
    return lifted, lifted_inv, cover2, other


def ray(graph, text, start=0):
    return RayPrefix(graph, start, graph.parse_word(text), "manual")


# ---------------------------------------------------------------------------
# leaf segments


def test_leaf_segment_values(fib, rose2):
    seg = leaf_segment(fib, "a", 5)
    assert len(seg.word) == 13
    assert seg.stratum == 0
    assert seg.word == fib.iterate_word(rose2.parse_word("a"), 5)
    assert leaf_segment(fib, "a", 0).word == rose2.parse_word("a")


def test_leaf_segment_nesting(fib):
    prev = leaf_segment(fib, "a", 0).word
    for k in range(1, 8):
        cur = leaf_segment(fib, "a", k).word
        assert cur[: len(prev)] == prev
        prev = cur


def test_leaf_segment_rejects_non_exponential_edge(rose3):
    f = GraphMap.from_strs(rose3, {"a": "a b", "b": "a", "c": "c a b"})
    with pytest.raises(ValueError, match="exponential"):
        leaf_segment(f, "c", 3)
    with pytest.raises(ValueError):
        leaf_segment(f, "a", -1)
    with pytest.raises(ValueError, match="role"):
        leaf_segment(f, "a", 3, role="sideways")


def test_leaf_segments_are_legal(fib, psi3, rose2, rose3):
    # a leaf never crosses an illegal turn
    for f, g in ((fib, rose2), (psi3, rose3)):
        analysis = turn_analysis(f)
        word = leaf_segment(f, f.domain.edges[-1][0], 7).word
        assert all(analysis.is_legal(t) for t in turns_crossed(g, word))


# ---------------------------------------------------------------------------
# weak attraction


def test_weak_attraction_examples(fib, rose2):
    target = leaf_segment(fib, "a", 3).word
    sigma = Circuit.from_str(rose2, "a b' a b'")
    res = weak_attraction_test(fib, sigma, target, 8)
    assert res.attained == 4
    assert res.attracted
    assert weak_attraction_test(fib, sigma, rose2.parse_word("a"), 8).attained == 0


def test_weak_attraction_commutator_resists(fib, rose2):
    # [a, b] is fixed by the map, so long leaf pieces never appear
    target = leaf_segment(fib, "a", 3).word
    sigma = Circuit.from_str(rose2, "a b a' b'")
    res = weak_attraction_test(fib, sigma, target, 6)
    assert res.attained is None
    assert not res.attracted
    assert res.n_max == 6


# ---------------------------------------------------------------------------
# singular rays


def test_singular_ray_values(fib, rose2):
    assert str(singular_ray(fib, "a", 0)) == "a"
    assert str(singular_ray(fib, "a", 3)) == "a b a a b"
    r = singular_ray(fib, "a", 3)
    assert r.seed == 0 and r.depth == 3 and r.provenance == "singular"


def test_singular_ray_psi3(psi3):
    assert psi3.fixed_directions() == (4,)
    assert str(singular_ray(psi3, "c", 0)) == "c"
    assert str(singular_ray(psi3, "c", 4)) == "c a b b c c c a b c a b c a b b c"


@pytest.mark.parametrize("name,dir_", [("fib", "a"), ("psi3", "c")])
def test_singular_ray_nesting(name, dir_, fib, psi3):
    f = {"fib": fib, "psi3": psi3}[name]
    prev = singular_ray(f, dir_, 0).letters
    for d in range(1, 7):
        cur = singular_ray(f, dir_, d).letters
        assert cur[: len(prev)] == prev
        prev = cur


def test_singular_ray_rejects_unfixed_direction(fib):
    with pytest.raises(ValueError, match="not fixed"):
        singular_ray(fib, "b", 4)


# ---------------------------------------------------------------------------
# translation


def test_translate_ray_offsets(fib, rose2):
    r = singular_ray(fib, "a", 3)  # a b a a b
    plain = translate_ray(rose2.parse_word("b"), r)
    assert (plain.offset, plain.exhausted, str(plain)) == (0, False, "b a b a a b")
    assert plain.provenance == "translated" and plain.seed == r.seed
    eaten = translate_ray(rose2.parse_word("a'"), r)
    assert (eaten.offset, eaten.exhausted, str(eaten)) == (1, False, "b a a b")


def test_translate_ray_can_exhaust(rose2):
    r = ray(rose2, "a")
    out = translate_ray(rose2.parse_word("b a'"), r)
    assert (out.offset, out.exhausted, str(out)) == (1, True, "b")


def test_translate_ray_rejects_bad_words(rose2, cover2):
    r = ray(rose2, "a b a")
    with pytest.raises(ValueError, match="reduced"):
        translate_ray(rose2.parse_word("a a'"), r)
    # on a two-vertex graph the endpoints must actually compose
    total = cover2.total
    loop = ray(total, total.edges[0][0], start=total.arrow_init(0))
    hop = bytes([2 * 1])  # an edge leaving the other vertex backwards
    bad = total.arrow_term(hop[0])
    if bad != loop.start:
        with pytest.raises(ValueError, match="ray start"):
            translate_ray(hop, loop)


# ---------------------------------------------------------------------------
# common ends (tail comparison)


def test_common_end_disjoint(rose2):
    v = common_end_test(ray(rose2, "a a a a a a a a a"), ray(rose2, "b b b b b b b b b"), 8, 4)
    assert v.verdict == NO_COMMON_END and v.witness is None


def test_common_end_shifted_tail(rose2):
    r1 = ray(rose2, "a " + "b a " * 8)
    r2 = ray(rose2, "b a " * 8)
    v = common_end_test(r1, r2, 8, 4)
    assert v.verdict == ASYMPTOTIC and v.witness == (0, 1)
    assert common_end_test(r2, r1, 8, 4).verdict == ASYMPTOTIC


def test_common_end_self(rose2):
    assert common_end_test(ray(rose2, "a b"), ray(rose2, "a b"), 8, 4).verdict == ASYMPTOTIC
    assert common_end_test(ray(rose2, "a"), ray(rose2, "a"), 8, 4).verdict == INCONCLUSIVE


def test_common_end_exhausted_and_foreign(rose2, rose3):
    tired = translate_ray(rose2.parse_word("b a'"), ray(rose2, "a"))
    assert common_end_test(tired, ray(rose2, "a b a"), 8, 4).verdict == INCONCLUSIVE
    with pytest.raises(ValueError, match="different graphs"):
        common_end_test(ray(rose2, "a"), ray(rose3, "a"), 8, 4)


positive_words = st.lists(st.sampled_from([0, 2]), min_size=6, max_size=24).map(bytes)


@given(w1=positive_words, w2=positive_words)
@settings(deadline=None, max_examples=60)
def test_common_end_symmetry(w1, w2):
    g = MarkedGraph.rose(("a", "b"))
    a, b = RayPrefix(g, 0, w1, "m"), RayPrefix(g, 0, w2, "m")
    assert common_end_test(a, b, 10, 4).verdict == common_end_test(b, a, 10, 4).verdict


@given(w1=positive_words, w2=positive_words, d_small=st.integers(0, 4), d_big=st.integers(5, 12))
@settings(deadline=None, max_examples=60)
def test_common_end_depth_monotone(w1, w2, d_small, d_big):
    g = MarkedGraph.rose(("a", "b"))
    a, b = RayPrefix(g, 0, w1, "m"), RayPrefix(g, 0, w2, "m")
    lo = common_end_test(a, b, d_small, 4).verdict
    hi = common_end_test(a, b, d_big, 4).verdict
    # widening the shift window can only move toward a confirmation
    if hi == NO_COMMON_END:
        assert lo == NO_COMMON_END
    if lo == ASYMPTOTIC:
        assert hi == ASYMPTOTIC


@given(w1=positive_words, w2=positive_words, g_word=positive_words.filter(lambda w: len(w) <= 8))
@settings(deadline=None, max_examples=60)
def test_common_end_translation_implications(w1, w2, g_word):
    # prepending the same non-cancelling word preserves a confirmation and
    # reflects a refutation back, once the window grows by the prefix length
    g = MarkedGraph.rose(("a", "b"))
    a, b = RayPrefix(g, 0, w1, "m"), RayPrefix(g, 0, w2, "m")
    ta, tb = translate_ray(g_word, a), translate_ray(g_word, b)
    d = 6
    before = common_end_test(a, b, d, 4).verdict
    after = common_end_test(ta, tb, d + len(g_word), 4).verdict
    if before == ASYMPTOTIC:
        assert after == ASYMPTOTIC
    if after == NO_COMMON_END:
        assert before == NO_COMMON_END


# ---------------------------------------------------------------------------
# end coincidence (prefix comparison)


def test_end_coincidence_values(rose2):
    w = "a b a a b a b a a b a a b"
    assert end_coincidence_test(ray(rose2, w), ray(rose2, w), 8).verdict == ASYMPTOTIC
    assert end_coincidence_test(ray(rose2, w), ray(rose2, w), 13).verdict == ASYMPTOTIC
    # identical but shorter than the window: not enough evidence
    assert end_coincidence_test(ray(rose2, w), ray(rose2, w), 20).verdict == INCONCLUSIVE
    other = "a b a a b a b b"
    assert end_coincidence_test(ray(rose2, w), ray(rose2, other), 20).verdict == NO_COMMON_END
    assert end_coincidence_test(ray(rose2, w), ray(rose2, other), 6).verdict == ASYMPTOTIC


def test_end_coincidence_separates_translates(fib, rose2):
    # b.R and R mark different points even though their tails agree
    r = singular_ray(fib, "a", 8)
    shifted = translate_ray(rose2.parse_word("b"), r)
    assert end_coincidence_test(shifted, r, 8).verdict == NO_COMMON_END
    assert common_end_test(shifted, r, 8, 4).verdict == ASYMPTOTIC


@given(w1=positive_words, w2=positive_words, g_word=positive_words.filter(lambda w: len(w) <= 8))
@settings(deadline=None, max_examples=60)
def test_end_coincidence_translation_consistent(w1, w2, g_word):
    # left-cancellation: translating both rays changes nothing
    g = MarkedGraph.rose(("a", "b"))
    a, b = RayPrefix(g, 0, w1, "m"), RayPrefix(g, 0, w2, "m")
    d = 6
    before = end_coincidence_test(a, b, d).verdict
    after = end_coincidence_test(translate_ray(g_word, a), translate_ray(g_word, b), d + len(g_word))
    assert after.verdict == before


@given(w=positive_words, d=st.integers(1, 30))
@settings(deadline=None, max_examples=60)
def test_end_coincidence_self(w, d):
    g = MarkedGraph.rose(("a", "b"))
    r = RayPrefix(g, 0, w, "m")
    # the 2-letter evidence margin keeps a window of 1 from ever confirming
    expected = ASYMPTOTIC if len(w) >= d >= 2 else INCONCLUSIVE
    assert end_coincidence_test(r, r, d).verdict == expected


# ---------------------------------------------------------------------------
# independence through covers


def test_independence_trivial_covers(fib2, rose2):
    f2, f2_inv = fib2
    ident = CoverMap(rose2, rose2, (0, 2), 0)
    swap = CoverMap(rose2, rose2, (2, 0), 0)
    rep = fixed_point_independence(f2, f2_inv, ident, swap, depth=32, margin=8)
    assert rep.summary == INDEPENDENT
    assert not rep.doubled
    assert len(rep.rays) == 10 and len(rep.cells) == 25
    assert all(c.verdict.verdict == NO_COMMON_END for c in rep.cells)
    assert str(rep.rays[0].ray).startswith("a b a a b a b a a b")
    assert str(rep.rays[5].ray).startswith("b a b b a b a b b a")


def test_independence_self_pair_is_dependent(fib2, rose2):
    f2, f2_inv = fib2
    ident = CoverMap(rose2, rose2, (0, 2), 0)
    rep = fixed_point_independence(f2, f2_inv, ident, ident, depth=32, margin=8)
    assert rep.summary == DEPENDENT
    assert rep.witness == (0, 5)
    left, right = rep.rays[0], rep.rays[5]
    # the same marked end seen through both copies
    assert (left.cover, right.cover) == (0, 1)
    assert left.rep == right.rep == "" and left.seed == right.seed
    counts = Counter(c.verdict.verdict for c in rep.cells)
    assert counts == {NO_COMMON_END: 20, ASYMPTOTIC: 5}


def test_independence_degree_two(deg2_pair):
    lifted, lifted_inv, cov, other = deg2_pair
    rep = fixed_point_independence(lifted, lifted_inv, cov, other, depth=48, margin=12)
    assert rep.summary == INDEPENDENT
    assert not rep.doubled
    assert len(rep.rays) == 40 and len(rep.cells) == 600
    assert all(c.verdict.verdict == NO_COMMON_END for c in rep.cells)
    conditions = Counter(c.condition for c in rep.cells)
    assert conditions == {"cross-cover": 400, "intra-cover": 200}


def test_independence_error_paths(fib, fib2, rose2, rose3):
    f2, f2_inv = fib2
    ident = CoverMap(rose2, rose2, (0, 2), 0)
    swap = CoverMap(rose2, rose2, (2, 0), 0)
    with pytest.raises(ValueError, match="invert"):
        fixed_point_independence(f2, fib, ident, swap)
    perm = GraphMap.from_strs(rose2, {"a": "b", "b": "a"})
    with pytest.raises(ValueError, match="power"):
        fixed_point_independence(perm, perm, ident, swap)
    c3 = CoverMap(rose3, rose3, (0, 2, 4), 0)
    with pytest.raises(ValueError, match="automorphism's graph"):
        fixed_point_independence(f2, f2_inv, ident, c3)
    other_names = MarkedGraph.rose(("x", "y"))
    with pytest.raises(ValueError, match="different base"):
        fixed_point_independence(f2, f2_inv, ident, CoverMap(rose2, other_names, (0, 2), 0))


def test_family_independence(fib2, rose2):
    f2, f2_inv = fib2
    ident = CoverMap(rose2, rose2, (0, 2), 0)
    swap = CoverMap(rose2, rose2, (2, 0), 0)
    fam = family_independence(f2, f2_inv, [ident, swap, ident], depth=32, margin=8)
    assert fam.summary == DEPENDENT and fam.witness == (0, 2)
    outcomes = {(p.left, p.right): p.report.summary for p in fam.pairs}
    assert outcomes == {(0, 1): INDEPENDENT, (0, 2): DEPENDENT, (1, 2): INDEPENDENT}


def test_family_singleton_is_vacuous(fib2, rose2):
    f2, f2_inv = fib2
    fam = family_independence(f2, f2_inv, [CoverMap(rose2, rose2, (0, 2), 0)], depth=32, margin=8)
    assert fam.summary == INDEPENDENT and fam.pairs == ()
