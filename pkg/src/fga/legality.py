"""Cancellation bounds, critical constants, and legality ratios.

The legality ratio of a path measures how much of its length is carried by
long qualifying segments inside an exponentially growing stratum.  Segments
qualify in one of two modes: ``leaf`` demands occurrence inside an iterated
edge image (a finite stand-in for generic leaf segments), ``legal`` only
demands the absence of illegal turns at the stratum's height.  Everything
here is deterministic; there is no sampling.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .graph_maps import Filtration, GraphMap, StratumClass, compute_filtration, turn_analysis
from .words import Circuit, EdgePath, Word

SEPARATOR = 0xFF


# ---------------------------------------------------------------------------
# cancellation


@dataclass(frozen=True)
class CancellationBound:
    """Upper bound on junction cancellation plus the worst case actually seen
    over all reduced two-letter junctions."""

    fold_bound: int
    empirical_max: int
    empirical_witness: tuple[int, int] | None


def junction_cancellation(f: GraphMap, u: Word, v: Word) -> int:
    """Letters cancelled from each side when the images of u and v meet.

    u and v must be reduced with no cancellation between them, so the
    difference in lengths is entirely junction cancellation.
    """
    if not u or not v:
        return 0
    if u[-1] ^ 1 == v[0]:
        raise ValueError("u and v must concatenate without cancellation")
    fu = f.apply_word(u)
    fv = f.apply_word(v)
    joined = f.apply_word(u + v)
    lost = len(fu) + len(fv) - len(joined)
    return lost // 2


def bcc_bound(f: GraphMap) -> CancellationBound:
    """Fold-sum upper bound on bounded cancellation, one orientation per edge,
    with an exhaustive empirical check over all reduced two-letter paths."""
    fold = sum(len(w) for w in f.edge_images)
    best = 0
    witness: tuple[int, int] | None = None
    g = f.domain
    for x in range(g.n_arrows):
        for y in range(g.n_arrows):
            if y == x ^ 1 or g.arrow_term(x) != g.arrow_init(y):
                continue
            c = junction_cancellation(f, bytes([x]), bytes([y]))
            if c > best:
                best = c
                witness = (x, y)
    return CancellationBound(fold, best, witness)


def critical_constant(pf_value: float, bcc: float) -> float:
    """Segments of an EG stratum longer than this grow exponentially."""
    if pf_value <= 1:
        raise ValueError("critical constant requires an exponential stratum (eigenvalue > 1)")
    return 2.0 * bcc / (pf_value - 1.0)


def critical_constant_for(f: GraphMap, filt: Filtration, r: int) -> float:
    s = filt.strata[r]
    if s.cls is not StratumClass.EG:
        raise ValueError(f"stratum {r} is not exponentially growing")
    return critical_constant(s.pf.value, bcc_bound(f).fold_bound)


# ---------------------------------------------------------------------------
# leaf corpus


class _SuffixAutomaton:
    """Substring index over a byte string (0xFF acts as a separator that no
    query may contain)."""

    __slots__ = ("trans", "link", "length", "last")

    def __init__(self, text: bytes):
        self.trans: list[dict[int, int]] = [{}]
        self.link = [-1]
        self.length = [0]
        self.last = 0
        for c in text:
            self._extend(c)

    def _extend(self, c: int) -> None:
        cur = len(self.length)
        self.length.append(self.length[self.last] + 1)
        self.link.append(-1)
        self.trans.append({})
        p = self.last
        while p != -1 and c not in self.trans[p]:
            self.trans[p][c] = cur
            p = self.link[p]
        if p == -1:
            self.link[cur] = 0
        else:
            q = self.trans[p][c]
            if self.length[p] + 1 == self.length[q]:
                self.link[cur] = q
            else:
                clone = len(self.length)
                self.length.append(self.length[p] + 1)
                self.link.append(self.link[q])
                self.trans.append(dict(self.trans[q]))
                while p != -1 and self.trans[p].get(c) == q:
                    self.trans[p][c] = clone
                    p = self.link[p]
                self.link[q] = clone
                self.link[cur] = clone
        self.last = cur

    def match_lengths(self, word: Word) -> list[int]:
        """Per position i (1-based), the longest suffix of word[:i] that is a
        substring of the indexed text."""
        out = []
        state, ln = 0, 0
        for c in word:
            while state != 0 and c not in self.trans[state]:
                state = self.link[state]
                ln = self.length[state]
            if c in self.trans[state]:
                state = self.trans[state][c]
                ln += 1
            else:
                state, ln = 0, 0
            out.append(ln)
        return out


class LeafCorpus:
    """Iterated images of the edges of one exponential stratum.

    Chains of iterates grow lazily: a membership query only expands a chain
    until its word comfortably exceeds the query length (two extra iterates),
    never past ``depth``.  Partial-decomposition matching uses a suffix
    automaton over the corpus truncated to ``budget`` letters, shallowest
    iterates first; whole-word queries use direct substring search instead
    and see the full depth.
    """

    def __init__(
        self,
        f: GraphMap,
        filt: Filtration,
        r: int,
        depth: int = 24,
        budget: int = 120_000,
    ):
        if filt.strata[r].cls is not StratumClass.EG:
            raise ValueError(f"stratum {r} is not exponentially growing")
        self.f = f
        self.filtration = filt
        self.stratum = r
        self.depth = depth
        self.budget = budget
        seeds = []
        for e in filt.strata[r].edges:
            seeds.append(bytes([2 * e]))
            seeds.append(bytes([2 * e + 1]))
        self._chains: dict[Word, list[Word]] = {s: [s] for s in seeds}
        self._sam: _SuffixAutomaton | None = None

    def _grow(self, chain: list[Word], need_len: int) -> None:
        extra = 0
        while len(chain) <= self.depth and extra < 2:
            if len(chain[-1]) >= need_len:
                extra += 1
            chain.append(self.f.apply_word(chain[-1]))

    def contains(self, segment: Word) -> bool:
        """Does the segment occur in some iterate f^k(E), k <= depth?"""
        if not segment:
            return True
        n = len(segment)
        for chain in self._chains.values():
            self._grow(chain, n)
            for w in chain:
                if len(w) >= n and w.find(segment) >= 0:
                    return True
        return False

    def _automaton(self) -> _SuffixAutomaton:
        if self._sam is None:
            for chain in self._chains.values():
                self._grow(chain, self.budget // (2 * len(self._chains)) + 1)
            words: list[Word] = []
            total = 0
            by_depth: list[Word] = []
            k = 0
            while True:
                layer = [c[k] for c in self._chains.values() if len(c) > k]
                if not layer:
                    break
                by_depth.extend(layer)
                k += 1
            for w in by_depth:
                if total + len(w) > self.budget and words:
                    break
                words.append(w)
                total += len(w)
            text = bytes([SEPARATOR]).join(words)
            self._sam = _SuffixAutomaton(text)
        return self._sam

    def match_lengths(self, word: Word) -> list[int]:
        return self._automaton().match_lengths(word)


# ---------------------------------------------------------------------------
# legality ratios


@dataclass(frozen=True)
class QualifyingSegment:
    start: int
    end: int  # exclusive
    stratum_letters: int


@dataclass(frozen=True)
class LegalityResult:
    ratio: float
    qualifying_total: int  # stratum-r letters inside chosen segments
    stratum_letters: int  # stratum-r letters in the whole path
    length: int
    stratum: int
    mode: str
    critical: float
    segments: tuple[QualifyingSegment, ...]


def _as_word(path: EdgePath | Circuit | Word) -> Word:
    if isinstance(path, (EdgePath, Circuit)):
        return path.word
    return path


def _stratum_endpoints(filt: Filtration, r: int) -> set[int]:
    g = filt.graph
    out: set[int] = set()
    for e in filt.strata[r].edges:
        out.add(g.arrow_init(2 * e))
        out.add(g.arrow_term(2 * e))
    return out


def leg_r(
    f: GraphMap,
    filt: Filtration,
    path: EdgePath | Circuit | Word,
    r: int,
    mode: str = "leaf",
    corpus: LeafCorpus | None = None,
    critical: float | None = None,
    depth: int = 24,
) -> LegalityResult:
    """Best achievable legality ratio for a path at one exponential stratum.

    Maximizes the stratum-r letter count carried by disjoint qualifying
    segments, divided by the full path length.  A segment qualifies when its
    stratum-r letter count reaches the critical constant and, depending on
    mode, it occurs in the leaf corpus (``leaf``) or crosses no illegal turn
    at height r (``legal``).
    """
    if mode not in ("leaf", "legal"):
        raise ValueError("mode must be 'leaf' or 'legal'")
    word = _as_word(path)
    c = critical_constant_for(f, filt, r) if critical is None else critical
    height = filt.edge_height
    zero = {i for i, s in enumerate(filt.strata) if s.cls is StratumClass.ZERO}
    for a in word:
        h = height[a >> 1]
        if h != r and h not in zero:
            raise ValueError("path leaves the stratum and its zero strata")
    if word:
        g = filt.graph
        ends = _stratum_endpoints(filt, r)
        if g.arrow_init(word[0]) not in ends or g.arrow_term(word[-1]) not in ends:
            raise ValueError("path endpoints must touch the stratum")

    n = len(word)
    is_r = [1 if height[a >> 1] == r else 0 for a in word]
    total_r = sum(is_r)
    if n == 0 or total_r == 0:
        return LegalityResult(0.0, 0, total_r, n, r, mode, c, ())

    if mode == "legal":
        best_total, segments = _select_legal_runs(f, filt, word, r, is_r, c)
    else:
        corp = corpus or LeafCorpus(f, filt, r, depth=depth)
        if total_r >= c and corp.contains(word):
            best_total, segments = total_r, (QualifyingSegment(0, n, total_r),)
        else:
            best_total, segments = _select_corpus_segments(word, is_r, c, corp)
    return LegalityResult(best_total / n, best_total, total_r, n, r, mode, c, segments)


def _select_legal_runs(f, filt, word, r, is_r, c):
    analysis = turn_analysis(f)
    height = filt.edge_height
    cuts = [0]
    for t in range(1, len(word)):
        x, y = word[t - 1] ^ 1, word[t]
        if max(height[x >> 1], height[y >> 1]) == r and not analysis.is_legal(
            (x, y) if x <= y else (y, x)
        ):
            cuts.append(t)
    cuts.append(len(word))
    total = 0
    segs = []
    for i in range(len(cuts) - 1):
        s = sum(is_r[cuts[i] : cuts[i + 1]])
        if s >= c:
            total += s
            segs.append(QualifyingSegment(cuts[i], cuts[i + 1], s))
    return total, tuple(segs)


def _select_corpus_segments(word, is_r, c, corpus: LeafCorpus):
    """Dynamic program over segment choices.

    prefix[i] counts stratum letters in word[:i]; match[i] bounds how far left
    a corpus segment ending at i may start.  Candidate starts j form a window
    that only moves right, so a monotone deque over best[j] - prefix[j] gives
    each position's optimum in O(1).
    """
    n = len(word)
    prefix = [0] * (n + 1)
    for i, v in enumerate(is_r):
        prefix[i + 1] = prefix[i] + v
    match = corpus.match_lengths(word)

    best = [0] * (n + 1)
    choice: list[int | None] = [None] * (n + 1)
    deque_idx: list[int] = []
    head = 0
    jc = -1  # rightmost start j with prefix[i] - prefix[j] >= c, so far
    for i in range(1, n + 1):
        while jc + 1 <= i - 1 and prefix[i] - prefix[jc + 1] >= c:
            j = jc + 1
            g = best[j] - prefix[j]
            while len(deque_idx) > head and best[deque_idx[-1]] - prefix[deque_idx[-1]] <= g:
                deque_idx.pop()
            deque_idx.append(j)
            jc = j
        left = i - match[i - 1]
        while len(deque_idx) > head and deque_idx[head] < left:
            head += 1
        best[i] = best[i - 1]
        if len(deque_idx) > head:
            j = deque_idx[head]
            cand = prefix[i] + best[j] - prefix[j]
            if cand > best[i]:
                best[i] = cand
                choice[i] = j
    segs = []
    i = n
    while i > 0:
        j = choice[i]
        if j is None:
            i -= 1
        else:
            segs.append(QualifyingSegment(j, i, prefix[i] - prefix[j]))
            i = j
    return best[n], tuple(reversed(segs))


@dataclass(frozen=True)
class ComponentRecord:
    stratum: int
    start: int
    end: int
    result: LegalityResult


@dataclass(frozen=True)
class LegReport:
    ratio: float
    length: int
    components: tuple[ComponentRecord, ...]
    mode: str


def leg(
    f: GraphMap,
    filt: Filtration,
    path: EdgePath | Circuit | Word,
    mode: str = "leaf",
    corpora: dict[int, LeafCorpus] | None = None,
    critical: float | None = None,
    depth: int = 24,
) -> LegReport:
    """Legality over all exponential strata: the path splits into maximal
    components per EG stratum (zero-stratum letters ride along with the
    component they follow); components in non-exponential strata contribute
    nothing.  The ratio is qualifying letters over the full length."""
    word = _as_word(path)
    n = len(word)
    if n == 0:
        return LegReport(0.0, 0, (), mode)
    height = filt.edge_height
    eg = set(filt.eg_indices)
    zero = {i for i, s in enumerate(filt.strata) if s.cls is StratumClass.ZERO}

    components: list[tuple[int, int, int]] = []  # (r, start, end)
    i = 0
    while i < n:
        h = height[word[i] >> 1]
        if h not in eg:
            i += 1
            continue
        j = i
        while j < n and (height[word[j] >> 1] == h or height[word[j] >> 1] in zero):
            j += 1
        while j > i and height[word[j - 1] >> 1] in zero:
            j -= 1  # trailing wildcards belong to no component
        components.append((h, i, j))
        i = j

    total = 0
    records = []
    for r, a, b in components:
        corp = corpora.get(r) if corpora else None
        res = leg_r(f, filt, word[a:b], r, mode=mode, corpus=corp, critical=critical, depth=depth)
        total += res.qualifying_total
        records.append(ComponentRecord(r, a, b, res))
    return LegReport(total / n, n, tuple(records), mode)


# ---------------------------------------------------------------------------
# growth harnesses


@dataclass(frozen=True)
class GrowthTestResult:
    factor: float
    lengths: tuple[int, ...]
    n1: int | None

    @property
    def passed(self) -> bool:
        return self.n1 is not None


def growth_test(f: GraphMap, beta: Circuit, factor: float, n_max: int) -> GrowthTestResult:
    """Smallest N1 <= n_max from which every iterate length exceeds
    factor * |beta|; factors <= 1 are trivially met at N1 = 0."""
    lengths = []
    w = beta.word
    for _ in range(n_max + 1):
        lengths.append(len(w))
        w = f.apply_cyclic(w)
    if factor <= 1:
        return GrowthTestResult(factor, tuple(lengths), 0)
    threshold = factor * len(beta.word)
    n1 = None
    for n in range(n_max, -1, -1):
        if lengths[n] > threshold:
            n1 = n
        else:
            break
    return GrowthTestResult(factor, tuple(lengths), n1)


@dataclass(frozen=True)
class LegalityGrowthRow:
    n: int
    length: int
    ratio: float
    segments: tuple[QualifyingSegment, ...]


@dataclass(frozen=True)
class LegalityGrowthResult:
    rows: tuple[LegalityGrowthRow, ...]
    epsilon: float
    n0: int
    mode: str
    critical: float
    depth: int


def legality_growth_test(
    f: GraphMap,
    beta: Circuit,
    n_max: int,
    mode: str = "leaf",
    depth: int | None = None,
    critical: float | None = None,
) -> LegalityGrowthResult:
    """Track LEG(f^n(beta)) for n <= n_max and report the best uniform lower
    bound: the largest epsilon achieved by every row from some n0 on, with
    the smallest such n0.  Evidence, never proof."""
    filt = compute_filtration(f)
    depth = (n_max + 8) if depth is None else depth
    corpora = {r: LeafCorpus(f, filt, r, depth=depth) for r in filt.eg_indices}
    crit = critical
    rows = []
    w = beta.word
    for n in range(n_max + 1):
        report = leg(f, filt, w, mode=mode, corpora=corpora, critical=crit)
        segs = tuple(s for c in report.components for s in c.result.segments)
        rows.append(LegalityGrowthRow(n, len(w), report.ratio, segs))
        w = f.apply_cyclic(w)

    best_eps, best_n0 = 0.0, 0
    tail_min = math.inf
    mins = [0.0] * (n_max + 1)
    for n in range(n_max, -1, -1):
        tail_min = min(tail_min, rows[n].ratio)
        mins[n] = tail_min
    for n0 in range(n_max + 1):
        if mins[n0] > best_eps:
            best_eps, best_n0 = mins[n0], n0
    crit_value = (
        critical
        if critical is not None
        else min(
            (critical_constant_for(f, filt, r) for r in filt.eg_indices),
            default=float("nan"),
        )
    )
    return LegalityGrowthResult(tuple(rows), best_eps, best_n0, mode, crit_value, depth)
