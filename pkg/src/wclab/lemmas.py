"""Brute-force surveys of the ordering lemmas and the union-bound arithmetic.

Everything here revolves around edge orderings of a complete graph on k
vertices: exhaustive or sampled minima of per-vertex pair statistics, the
component-doubling construction that keeps those statistics balanced, a
rare/connective edge classifier, and high-precision log-space evaluation
of the union bounds that drive the lower-bound argument.

Exhaustive enumeration walks all C(k,2)! orderings, so it is capped at
k = 5 (10! orderings); beyond that only seeded sampling is offered.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from itertools import combinations, permutations

import numpy as np
from mpmath import mp, mpf

from .board import edge
from .detectors import component_pair_counts, good_pair_counts

EXHAUSTIVE_CAP = 5  # 10! orderings; 11! is past desk scale


class LemmaCounterexample(AssertionError):
    """An enumerated ordering fell below the proven floor."""


@dataclass(frozen=True)
class EdgeOrdering:
    """A permutation of the edges of the complete graph on k vertices."""

    k: int
    edges: tuple

    def __post_init__(self):
        want = {(a, b) for a, b in combinations(range(self.k), 2)}
        got = [edge(a, b) for a, b in self.edges]
        if len(got) != len(want) or set(got) != want:
            raise ValueError("edge list is not a permutation of the complete graph")
        object.__setattr__(self, "edges", tuple(got))

    def __iter__(self):
        return iter(self.edges)

    def __len__(self):
        return len(self.edges)

    def timestamps(self) -> dict:
        return {e: t for t, e in enumerate(self.edges, start=1)}


def _edge_list(k: int) -> list:
    return list(combinations(range(k), 2))


def good_pair_floor(k: int) -> int:
    return -(-(k - 1) * (k - 2) // 6)


def _triples(k: int) -> list:
    """(edge_index*3, opposite_vertex*3) per vertex triple."""
    index = {e: i for i, e in enumerate(_edge_list(k))}
    out = []
    for a, b, c in combinations(range(k), 3):
        out.append(
            (index[(a, b)], index[(a, c)], index[(b, c)], c, b, a)
        )
    return out


def _scan_chunk(k: int, kind: str, first: int) -> int:
    """Min of per-ordering max-vertex counts over orderings with a fixed head.

    For "good" the permutation tuple is read as edge ranks; for
    "component" it is read as the edge sequence itself.  Either reading
    enumerates every ordering exactly once across all heads.
    """
    e_count = k * (k - 1) // 2
    rest = [v for v in range(e_count) if v != first]
    best = e_count + 1
    if kind == "good":
        triples = _triples(k)
        for tail in permutations(rest):
            rank = (first,) + tail
            counts = [0] * k
            for i_ab, i_ac, i_bc, opp_ab, opp_ac, opp_bc in triples:
                r1, r2, r3 = rank[i_ab], rank[i_ac], rank[i_bc]
                if r1 > r2:
                    v = opp_ab if r1 > r3 else opp_bc
                else:
                    v = opp_ac if r2 > r3 else opp_bc
                counts[v] += 1
            top = max(counts)
            if top < best:
                best = top
        return best
    edges = _edge_list(k)
    verts = range(k)
    for tail in permutations(rest):
        comp = list(verts)
        counts = [0] * k
        for ei in (first,) + tail:
            u, v = edges[ei]
            cu, cv = comp[u], comp[v]
            if cu == cv:
                for w in verts:
                    if comp[w] == cu:
                        counts[w] += 1
            else:
                for w in verts:
                    if comp[w] == cv:
                        comp[w] = cu
        top = max(counts)
        if top < best:
            best = top
    return best


def _scan_all(k: int, kind: str, workers: int) -> int:
    e_count = k * (k - 1) // 2
    heads = range(e_count)
    if workers <= 1:
        return min(_scan_chunk(k, kind, h) for h in heads)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        mins = pool.map(_scan_chunk, [k] * e_count, [kind] * e_count, heads)
        return min(mins)


def _max_count(ordering: EdgeOrdering, kind: str) -> int:
    stamps = ordering.timestamps()
    clique = tuple(range(ordering.k))
    if kind == "good":
        return max(good_pair_counts(stamps, clique).values())
    return max(component_pair_counts(stamps, clique).values())


def _sampled_min(k: int, kind: str, samples: int, seed: int) -> int:
    rng = np.random.Generator(np.random.Philox(seed))
    best = k * (k - 1) // 2 + 1
    for _ in range(samples):
        ordering = random_ordering(k, rng=rng)
        top = _max_count(ordering, kind)
        if top < best:
            best = top
    return best


def verify_good_pair_lemma(
    k: int, *, samples: int | None = None, seed: int = 0, workers: int = 1
) -> int:
    """Minimum over orderings of the largest per-vertex good-pair count.

    Exhaustive by default (k <= 5); raises LemmaCounterexample if any
    ordering's maximum falls below ceil((k-1)(k-2)/6), which the
    pigeonhole argument rules out.  With `samples` the minimum is taken
    over seeded random orderings instead and nothing is asserted.
    """
    if samples is not None:
        return _sampled_min(k, "good", samples, seed)
    if k > EXHAUSTIVE_CAP:
        raise ValueError(
            f"exhaustive enumeration caps at k={EXHAUSTIVE_CAP}; pass samples="
        )
    got = _scan_all(k, "good", workers)
    floor = good_pair_floor(k)
    if got < floor:
        raise LemmaCounterexample(
            f"an ordering of K_{k} tops out at {got} good pairs, below {floor}"
        )
    return got


def survey_component_pair_lemma(
    k: int, *, samples: int | None = None, seed: int = 0, workers: int = 1
) -> int:
    """Minimum over orderings of the largest per-vertex component-pair count.

    Survey only: the interesting regime for this statistic is far beyond
    any enumerable k, so small-k minima are recorded as regressions and
    never asserted against the asymptotic floor.
    """
    if samples is not None:
        return _sampled_min(k, "component", samples, seed)
    if k > EXHAUSTIVE_CAP:
        raise ValueError(
            f"exhaustive enumeration caps at k={EXHAUSTIVE_CAP}; pass samples="
        )
    return _scan_all(k, "component", workers)


def doubling_ordering(t: int) -> EdgeOrdering:
    """Ordering of K_{2^t} that halves the component count stage by stage.

    Stage 0 is a perfect matching; stage j runs all edges between paired
    cliques of size 2^j, lexicographically, so components double in size
    and stay complete at every stage boundary.
    """
    if t < 1:
        raise ValueError("t must be >= 1")
    k = 1 << t
    out = []
    for j in range(t):
        size = 1 << j
        for base in range(0, k, 2 * size):
            left = range(base, base + size)
            right = range(base + size, base + 2 * size)
            for a in left:
                for b in right:
                    out.append((a, b))
    return EdgeOrdering(k=k, edges=tuple(out))


def random_ordering(k: int, seed: int | None = None, *, rng=None) -> EdgeOrdering:
    """Uniform random edge ordering under a seeded generator."""
    if rng is None:
        rng = np.random.Generator(np.random.Philox(seed))
    edges = _edge_list(k)
    order = rng.permutation(len(edges))
    return EdgeOrdering(k=k, edges=tuple(edges[i] for i in order))


@dataclass(frozen=True)
class EdgeClasses:
    """Per-edge labels plus the tallies the labels are bounded by."""

    labels: tuple  # "rare" | "connective" | "plain per edge, in order
    rare_total: int
    connective_at: dict  # vertex -> times it absorbed a large component


def classify_rare_connective(
    ordering: EdgeOrdering, *, rare_count: int, component_size: int
) -> EdgeClasses:
    """Label each edge by replaying the ordering with a union-find.

    An edge is rare when it is among the first `rare_count` edges seen at
    either endpoint, else connective when it merges a component of at
    least `component_size` vertices into either endpoint's side, else
    plain.  connective_at counts the merge events per absorbing vertex
    regardless of the rare overlap.
    """
    if rare_count < 0 or component_size < 1:
        raise ValueError("thresholds must be positive")
    k = ordering.k
    comp = list(range(k))
    sizes = {v: 1 for v in range(k)}
    seen = [0] * k
    labels = []
    connective_at: dict = {}
    rare_total = 0
    for u, v in ordering:
        cu, cv = comp[u], comp[v]
        gain_u = sizes[cv] if cu != cv else 0  # vertices arriving on u's side
        gain_v = sizes[cu] if cu != cv else 0
        if gain_u >= component_size:
            connective_at[u] = connective_at.get(u, 0) + 1
        if gain_v >= component_size:
            connective_at[v] = connective_at.get(v, 0) + 1
        if seen[u] < rare_count or seen[v] < rare_count:
            labels.append("rare")
            rare_total += 1
        elif max(gain_u, gain_v) >= component_size:
            labels.append("connective")
        else:
            labels.append("plain")
        seen[u] += 1
        seen[v] += 1
        if cu != cv:
            sizes[cu] += sizes[cv]
            del sizes[cv]
            for w in range(k):
                if comp[w] == cv:
                    comp[w] = cu
    return EdgeClasses(
        labels=tuple(labels), rare_total=rare_total, connective_at=connective_at
    )


@dataclass(frozen=True)
class BoundReport:
    """Union-bound evaluation in log2 space."""

    k: int
    variant: str  # "s2" | "s3"
    log2_index_set: float
    log2_event_bound: float
    log2_union: float
    log2_target: float  # log2 of 1/(4k)

    @property
    def holds(self) -> bool:
        return self.log2_union < self.log2_target


def _log2_comb(d_log2: mpf, d_exact: int | None, r: int) -> mpf:
    """log2 of C(d, r); d given by its log2, exactly when materializable."""
    if d_exact is not None:
        if d_exact < r:
            return mpf("-inf")
        return mp.log(mp.binomial(d_exact, r), 2)
    # d astronomically exceeds r: C(d, r) = d^r / r! up to a 1 - O(r^2/d) factor
    return r * d_log2 - mp.loggamma(r + 1) / mp.log(2)


def union_bound_value(k: int, variant: str) -> BoundReport:
    """Evaluate the event-count x probability union bound against 1/(4k).

    The "s2" variant bounds low-degree witness choices by C(d, k-1) with
    d = floor(2^{k/6 - k/(2 log2 k)}) and multiplies by 2^{-k^2/6 + k};
    "s3" bounds encoded histories by k^k d^k with the k/3 exponent and
    multiplies by 2^{-k^2/3 + k^2/(log2 k)^2}.  All arithmetic is done in
    log2 space at high precision; the threshold is floored exactly
    whenever it is small enough to materialize.
    """
    if k < 4:
        raise ValueError("union bounds start at k = 4")
    if variant not in ("s2", "s3"):
        raise ValueError(f"variant must be 's2' or 's3', got {variant!r}")
    with mp.workdps(60):
        kf = mpf(k)
        log2k = mp.log(kf, 2)
        if variant == "s2":
            expo = kf / 6 - kf / (2 * log2k)
        else:
            expo = kf / 3 - kf / (2 * log2k)
        d_exact = int(mp.floor(mp.power(2, expo))) if expo <= 48 else None
        d_log2 = mp.log(d_exact, 2) if d_exact is not None else expo
        if variant == "s2":
            index = _log2_comb(d_log2, d_exact, k - 1)
            event = -(kf**2) / 6 + kf
        else:
            index = kf * log2k + kf * d_log2
            event = -(kf**2) / 3 + kf**2 / log2k**2
        target = -mp.log(4 * kf, 2)
    index_f, event_f = float(index), float(event)
    return BoundReport(
        k=k,
        variant=variant,
        log2_index_set=index_f,
        log2_event_bound=event_f,
        log2_union=index_f + event_f,
        log2_target=float(target),
    )
