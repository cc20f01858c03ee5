import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fga import Circuit, GraphMap, MarkedGraph, compute_filtration, tighten_word
from fga.legality import (
    LeafCorpus,
    QualifyingSegment,
    _SuffixAutomaton,
    bcc_bound,
    critical_constant,
    critical_constant_for,
    growth_test,
    junction_cancellation,
    leg,
    leg_r,
    legality_growth_test,
)

GOLDEN = (1 + math.sqrt(5)) / 2


@pytest.fixture(scope="module")
def fib_filt(fib):
    return compute_filtration(fib)


@pytest.fixture(scope="module")
def fib_corpus(fib, fib_filt):
    return LeafCorpus(fib, fib_filt, 0, depth=16)


# ---------------------------------------------------------------------------
# cancellation and constants


def test_fib_bcc(fib):
    bound = bcc_bound(fib)
    assert bound.fold_bound == 3
    assert bound.empirical_max == 1
    assert bound.empirical_max <= bound.fold_bound


def test_identity_bcc(rose2):
    bound = bcc_bound(GraphMap.identity(rose2))
    assert bound.fold_bound == 2
    assert bound.empirical_max == 0


def test_junction_cancellation_example(fib, rose2):
    # images of b' and a meet as a' . ab, cancelling one letter
    assert junction_cancellation(fib, rose2.parse_word("b'"), rose2.parse_word("a")) == 1
    assert junction_cancellation(fib, rose2.parse_word("a"), rose2.parse_word("b")) == 0


def test_junction_cancellation_rejects_cancelling_pair(fib, rose2):
    with pytest.raises(ValueError):
        junction_cancellation(fib, rose2.parse_word("a"), rose2.parse_word("a'"))


def test_critical_constant_values():
    assert abs(critical_constant(1.618034, 3) - 9.708) < 1e-3
    assert critical_constant(3, 1) == 1
    assert critical_constant(2, 5) == 10
    with pytest.raises(ValueError):
        critical_constant(1.0, 3)


def test_critical_constant_for_fib(fib, fib_filt):
    c = critical_constant_for(fib, fib_filt, 0)
    assert abs(c - 6 / (GOLDEN - 1)) < 1e-6


# ---------------------------------------------------------------------------
# leaf corpus


def test_corpus_contains_iterates(fib, fib_filt, fib_corpus, rose2):
    for k in (0, 3, 5, 9):
        assert fib_corpus.contains(fib.iterate_word(rose2.parse_word("a"), k))
    assert fib_corpus.contains(rose2.parse_word("b' a'"))  # reversed orientation
    assert not fib_corpus.contains(rose2.parse_word("b b"))
    assert not fib_corpus.contains(rose2.parse_word("a b' a"))


def test_corpus_depth_is_respected(fib, fib_filt, rose2):
    shallow = LeafCorpus(fib, fib_filt, 0, depth=3)
    assert shallow.contains(fib.iterate_word(rose2.parse_word("a"), 3))
    assert not shallow.contains(fib.iterate_word(rose2.parse_word("a"), 7))


def test_suffix_automaton_longest_match():
    sam = _SuffixAutomaton(bytes([0, 2, 0, 0, 2]))
    # query abab: matches of suffixes against "abaab"
    assert sam.match_lengths(bytes([0, 2, 0, 2])) == [1, 2, 3, 2]
    assert sam.match_lengths(bytes([4, 4])) == [0, 0]


# ---------------------------------------------------------------------------
# leg_r


def brute_force_leg_r(word, is_r, c, contains):
    """Exhaustive decomposition search: best total of stratum letters over
    disjoint corpus segments meeting the threshold."""
    n = len(word)
    prefix = [0]
    for v in is_r:
        prefix.append(prefix[-1] + v)
    best = [0] * (n + 1)
    for i in range(1, n + 1):
        best[i] = best[i - 1]
        for j in range(i):
            s = prefix[i] - prefix[j]
            if s >= c and contains(word[j:i]):
                best[i] = max(best[i], best[j] + s)
    return best[n]


def test_leg_whole_leaf_segment_is_one(fib, fib_filt, rose2):
    w = fib.iterate_word(rose2.parse_word("a"), 6)
    res = leg_r(fib, fib_filt, w, 0)
    assert res.ratio == 1.0
    assert res.segments == (QualifyingSegment(0, len(w), len(w)),)


def test_leg_short_word_is_zero(fib, fib_filt, rose2):
    res = leg_r(fib, fib_filt, rose2.parse_word("a b a"), 0)
    assert res.ratio == 0.0
    assert res.segments == ()


def test_leg_split_junction_matches_brute_force(fib, fib_filt, fib_corpus, rose2):
    w5 = fib.iterate_word(rose2.parse_word("a"), 5)
    alpha = w5 + rose2.parse_word("b b") + w5
    res = leg_r(fib, fib_filt, alpha, 0, corpus=fib_corpus)
    expect = brute_force_leg_r(alpha, [1] * len(alpha), res.critical, fib_corpus.contains)
    assert res.qualifying_total == expect == 27
    assert res.ratio == 27 / 28
    assert [(s.start, s.end) for s in res.segments] == [(0, 13), (14, 28)]


@settings(deadline=None, max_examples=60)
@given(st.binary(min_size=1, max_size=36).map(lambda b: bytes(x % 4 for x in b)))
def test_leg_dp_matches_brute_force_on_random_words(fib, fib_filt, fib_corpus, w):
    w = tighten_word(w)
    if not w:
        return
    res = leg_r(fib, fib_filt, w, 0, corpus=fib_corpus, critical=4)
    expect = brute_force_leg_r(w, [1] * len(w), 4, fib_corpus.contains)
    assert res.qualifying_total == expect


@settings(deadline=None, max_examples=60)
@given(st.binary(max_size=50).map(lambda b: bytes(x % 4 for x in b)))
def test_leg_ratio_in_unit_interval(fib, fib_filt, fib_corpus, w):
    w = tighten_word(w)
    report = leg(fib, fib_filt, w, corpora={0: fib_corpus})
    assert 0.0 <= report.ratio <= 1.0


def test_leaf_vs_legal_mode(fib, fib_filt, fib_corpus, rose2):
    # w5 a' b w5 has one illegal junction (between a' and b); legal mode keeps
    # both halves entirely, leaf mode cannot cover the a'
    w5 = fib.iterate_word(rose2.parse_word("a"), 5)
    alpha = w5 + rose2.parse_word("a' b") + w5
    legal = leg_r(fib, fib_filt, alpha, 0, mode="legal")
    leaf = leg_r(fib, fib_filt, alpha, 0, mode="leaf", corpus=fib_corpus)
    assert legal.ratio == 1.0
    assert leaf.ratio == 27 / 28


def test_prefix_strictly_decreases_ratio(fib, fib_filt, fib_corpus, rose2):
    w = fib.iterate_word(rose2.parse_word("a"), 6)
    base = leg_r(fib, fib_filt, w, 0, corpus=fib_corpus)
    longer = leg_r(fib, fib_filt, rose2.parse_word("b'") + w, 0, corpus=fib_corpus)
    assert longer.ratio < base.ratio
    assert longer.qualifying_total == base.qualifying_total


def test_appending_leaf_segment_recovers_ratio(fib, fib_filt, fib_corpus, rose2):
    w6 = fib.iterate_word(rose2.parse_word("a"), 6)
    w5 = fib.iterate_word(rose2.parse_word("a"), 5)
    spoiled = rose2.parse_word("b'") + w6
    extended = spoiled + w5  # w6 . w5 is the next iterate, one corpus segment
    r_spoiled = leg_r(fib, fib_filt, spoiled, 0, corpus=fib_corpus)
    r_extended = leg_r(fib, fib_filt, extended, 0, corpus=fib_corpus)
    assert r_extended.ratio > r_spoiled.ratio
    assert r_extended.qualifying_total == len(w6) + len(w5)


def test_leg_growth_bound_with_measured_mu(fib, fib_filt, fib_corpus, rose2):
    lam = fib_filt.strata[0].pf.value
    sample = []
    for k in (5, 6, 7):
        w = fib.iterate_word(rose2.parse_word("a"), k)
        sample.append(w)
        sample.append(w + rose2.parse_word("b b") + w)
    mu = min(
        len(fib.apply_word(w)) / (lam * leg_r(fib, fib_filt, w, 0, corpus=fib_corpus).qualifying_total)
        for w in sample
    )
    assert mu > 0
    for w in sample:
        base = leg_r(fib, fib_filt, w, 0, corpus=fib_corpus).qualifying_total
        for k in (1, 2, 3):
            assert len(fib.iterate_word(w, k)) >= mu * lam**k * base - 1e-9


def test_leg_r_rejects_foreign_letters(rose3):
    f = GraphMap.from_strs(rose3, {"a": "a b", "b": "a", "c": "c a b"})
    filt = compute_filtration(f)
    with pytest.raises(ValueError, match="stratum"):
        leg_r(f, filt, rose3.parse_word("a c"), 0)


# ---------------------------------------------------------------------------
# leg over components


def test_leg_ignores_non_exponential_components(rose3):
    f = GraphMap.from_strs(rose3, {"a": "a b", "b": "a", "c": "c a b"})
    filt = compute_filtration(f)
    w7 = f.iterate_word(rose3.parse_word("a"), 7)
    beta = rose3.parse_word("c") + w7
    report = leg(f, filt, beta)
    assert report.ratio == len(w7) / (len(w7) + 1)
    assert len(report.components) == 1
    assert report.components[0].stratum == 0

    only_neg = leg(f, filt, rose3.parse_word("c"))
    assert only_neg.ratio == 0.0
    assert only_neg.components == ()


def test_leg_zero_stratum_letters_ride_inside_components(rose3):
    f = GraphMap.from_strs(rose3, {"a": "a b", "b": "a", "c": "a b"})
    filt = compute_filtration(f)
    w7 = f.iterate_word(rose3.parse_word("a"), 7)
    beta = w7 + rose3.parse_word("c") + w7
    report = leg(f, filt, beta)
    assert len(report.components) == 1
    assert report.ratio == (2 * len(w7)) / (2 * len(w7) + 1)

    trailing = leg(f, filt, w7 + rose3.parse_word("c"))
    assert len(trailing.components) == 1
    assert trailing.components[0].end == len(w7)
    assert trailing.ratio == len(w7) / (len(w7) + 1)


def test_leg_single_stratum_equals_leg_r(fib, fib_filt, fib_corpus, rose2):
    w = fib.iterate_word(rose2.parse_word("a"), 6)
    assert leg(fib, fib_filt, w, corpora={0: fib_corpus}).ratio == leg_r(
        fib, fib_filt, w, 0, corpus=fib_corpus
    ).ratio


# ---------------------------------------------------------------------------
# growth tests


def test_growth_test_fibonacci_exact(fib, rose2):
    res = growth_test(fib, Circuit.from_str(rose2, "a"), 5, 8)
    assert res.n1 == 4
    assert res.lengths[:5] == (1, 2, 3, 5, 8)
    assert res.passed


def test_growth_test_trivial_factor(fib, rose2):
    assert growth_test(fib, Circuit.from_str(rose2, "a"), 1.0, 4).n1 == 0
    assert growth_test(fib, Circuit.from_str(rose2, "a"), 0.5, 4).n1 == 0


def test_growth_test_identity_fails(rose2):
    res = growth_test(GraphMap.identity(rose2), Circuit.from_str(rose2, "a"), 2, 6)
    assert res.n1 is None
    assert not res.passed
    assert res.lengths == (1,) * 7


def test_legality_growth_leaf_circuit_stays_at_one(fib, rose2):
    beta = Circuit(rose2, fib.iterate_word(rose2.parse_word("a"), 5))
    res = legality_growth_test(fib, beta, 12)
    assert all(row.ratio == 1.0 for row in res.rows)
    assert res.epsilon == 1.0
    assert res.n0 == 0
    assert [row.length for row in res.rows[:4]] == [13, 21, 34, 55]


def test_legality_growth_short_commutator_stays_zero(fib, rose2):
    res = legality_growth_test(fib, Circuit.from_str(rose2, "a b a' b'"), 8)
    assert all(row.ratio == 0.0 for row in res.rows)
    assert all(row.length == 4 for row in res.rows)
    assert res.epsilon == 0.0


def test_legality_growth_single_row(fib, rose2):
    res = legality_growth_test(fib, Circuit.from_str(rose2, "a"), 0)
    assert len(res.rows) == 1
