"""Structural detectors over boards and transcripts.

Red clique-factor detection (forced-vertex propagation plus exact cover),
degree classification, the good-pair and component-pair order statistics,
the low-degree clique events X/Y/S, and the history encoder that maps a
qualifying clique history to a small integer vector a checker can verify.

Everything here is a pure function of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

from .board import RED, Board, Transcript, edge, replay


class DetectorError(Exception):
    pass


class IndivisibleError(DetectorError):
    """Factor detection asked for block size that does not divide n."""


class BadOrderingError(DetectorError):
    """Edge timestamps are missing or tied."""


class NotEncodableError(DetectorError):
    """A clique vertex's neighbor index exceeds the degree cap."""


class NeighborhoodCapError(DetectorError):
    """Red neighborhood too large for exhaustive clique search."""


# -- factor detection ----------------------------------------------------------


@dataclass(frozen=True)
class FactorWitness:
    """A partition of the vertices into red k-cliques."""

    blocks: tuple

    def __iter__(self):
        return iter(self.blocks)


def _forced_blocks(n, k, adj):
    """Peel off vertices whose block is forced by red degree.

    A vertex with alive red degree exactly k-1 can only be covered by its
    closed neighborhood; if that is not a red clique no factor exists, and
    if degree drops below k-1 no factor exists either.  Returns
    (blocks, alive set) or None when a factor is impossible.
    """
    deg = [0] * n
    for v, nb in adj.items():
        deg[v] = len(nb)
    alive = bytearray(b"\x01") * n
    blocks = []
    stack = [v for v in range(n) if deg[v] <= k - 1]
    while stack:
        v = stack.pop()
        if not alive[v]:
            continue
        if deg[v] < k - 1:
            return None
        nbrs = [u for u in adj[v] if alive[u]]
        for a, b in combinations(nbrs, 2):
            if b not in adj[a]:
                return None
        block = [v] + nbrs
        for u in block:
            alive[u] = 0
        for u in block:
            for w in adj.get(u, ()):
                if alive[w]:
                    deg[w] -= 1
                    if deg[w] <= k - 1:
                        stack.append(w)
        blocks.append(tuple(sorted(block)))
    rest = [v for v in range(n) if alive[v]]
    return blocks, rest


def _red_cliques_within(adj, verts, k):
    """All red k-cliques with every vertex in `verts`, ascending tuples."""
    vset = set(verts)
    out = []

    def extend(clique, cands):
        if len(clique) == k:
            out.append(tuple(clique))
            return
        for i, v in enumerate(cands):
            nb = adj[v]
            extend(clique + [v], [u for u in cands[i + 1 :] if u in nb])

    ordered = sorted(vset)
    extend([], ordered)
    return out


def _exact_cover_first(columns, rows):
    """First exact cover of `columns` by the given rows (Algorithm X).

    `rows` is a list of tuples of column ids.  Column choice is minimum
    remaining candidates with ties toward the smaller column id, rows are
    tried in index order, so the answer is deterministic.
    """
    X = {c: set() for c in columns}
    for i, row in enumerate(rows):
        for c in row:
            X[c].add(i)

    solution = []

    def select(r):
        removed = []
        for c in rows[r]:
            for rr in X[c]:
                for c2 in rows[rr]:
                    if c2 != c:
                        X[c2].discard(rr)
            removed.append((c, X.pop(c)))
        return removed

    def restore(removed):
        for c, col in reversed(removed):
            X[c] = col
            for rr in col:
                for c2 in rows[rr]:
                    if c2 != c:
                        X[c2].add(rr)

    def search():
        if not X:
            return True
        col = min(X, key=lambda c: (len(X[c]), c))
        for r in sorted(X[col]):
            solution.append(r)
            removed = select(r)
            if search():
                return True
            restore(removed)
            solution.pop()
        return False

    if not search():
        return None
    return [rows[r] for r in solution]


def has_red_clique(board: Board, l: int) -> bool:
    """True when some l vertices are pairwise red-joined."""
    if l < 1:
        raise ValueError(f"clique size must be >= 1, got {l}")
    if l == 1:
        return board.n >= 1
    adj = board.red_adjacency()

    def extend(depth, cands):
        if depth == l:
            return True
        need = l - depth
        for i, v in enumerate(cands):
            if len(cands) - i < need:
                return False
            nb = adj[v]
            if extend(depth + 1, [u for u in cands[i + 1 :] if u in nb]):
                return True
        return False

    return extend(0, sorted(adj))


def find_red_factor(board: Board, k: int):
    """A partition of all vertices into red k-cliques, or None.

    Forced vertices (red degree exactly k-1) are peeled first; whatever
    remains is solved as an exact cover over its enumerated red k-cliques.
    """
    n = board.n
    if k < 2:
        raise ValueError(f"block size must be >= 2, got {k}")
    if n % k:
        raise IndivisibleError(f"{k} does not divide {n}")
    adj = board.red_adjacency()
    if len(adj) != n:
        return None  # some vertex has no red edge at all
    peeled = _forced_blocks(n, k, adj)
    if peeled is None:
        return None
    blocks, rest = peeled
    if rest:
        cliques = _red_cliques_within(adj, rest, k)
        cover = _exact_cover_first(rest, cliques)
        if cover is None:
            return None
        blocks = blocks + [tuple(b) for b in cover]
    return FactorWitness(tuple(sorted(blocks)))


# -- degree classification ----------------------------------------------------


@dataclass(frozen=True)
class DegreeReport:
    d_hi: float
    degrees: tuple
    high: tuple  # per-vertex: red degree >= d_hi
    block_high: tuple | None = None  # per supplied block: contains a high vertex

    @property
    def high_count(self):
        return sum(self.high)


def degree_threshold(k: int, variant: str) -> float:
    """The per-variant low/high red-degree cutoff, log base 2.

    Variant "s2" uses exponent k/6 - k/(2 log2 k); "s3" uses
    k/3 - k/(2 log2 k).  At desk-scale k these are tiny; they matter as
    inputs to the union-bound arithmetic, and detectors take the threshold
    as an explicit number instead.
    """
    if variant == "s2":
        expo = k / 6 - k / (2 * math.log2(k))
    elif variant == "s3":
        expo = k / 3 - k / (2 * math.log2(k))
    else:
        raise ValueError(f"variant must be 's2' or 's3', got {variant!r}")
    return 2.0**expo


def classify_degrees(board: Board, d_hi, partition=None) -> DegreeReport:
    deg = [0] * board.n
    for u, v in board.red_edges():
        deg[u] += 1
        deg[v] += 1
    high = tuple(d >= d_hi for d in deg)
    block_high = None
    if partition is not None:
        block_high = tuple(any(high[v] for v in blk) for blk in partition)
    return DegreeReport(
        d_hi=d_hi, degrees=tuple(deg), high=high, block_high=block_high
    )


# -- ordering statistics -------------------------------------------------------


def _check_timestamps(timestamps, clique):
    seen = set()
    for a, b in combinations(clique, 2):
        t = timestamps.get(edge(a, b))
        if t is None:
            raise BadOrderingError(f"edge {edge(a, b)!r} has no timestamp")
        if t in seen:
            raise BadOrderingError(f"timestamp {t} appears twice")
        seen.add(t)


def good_pair_counts(timestamps, clique) -> dict:
    """Per-vertex count of clique edges that complete a triangle at it.

    The pair (v, ab) counts when edge ab arrived after both va and vb, so
    ab is the last edge of the triangle {v, a, b}.  Every triangle has
    exactly one last edge, hence the counts always total C(k, 3).
    """
    _check_timestamps(timestamps, clique)
    counts = {v: 0 for v in clique}
    for a, b in combinations(clique, 2):
        t_ab = timestamps[edge(a, b)]
        for v in clique:
            if v == a or v == b:
                continue
            if t_ab > timestamps[edge(v, a)] and t_ab > timestamps[edge(v, b)]:
                counts[v] += 1
    return counts


def component_pair_counts(timestamps, clique) -> dict:
    """Per-vertex count of clique edges that landed inside its component.

    Replays the clique's edges in timestamp order with union-find; an edge
    whose endpoints were already connected counts at every vertex of that
    component (endpoints included).
    """
    _check_timestamps(timestamps, clique)
    parent = {v: v for v in clique}
    members = {v: [v] for v in clique}
    counts = {v: 0 for v in clique}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    ordered = sorted(
        (timestamps[edge(a, b)], a, b) for a, b in combinations(clique, 2)
    )
    for _t, a, b in ordered:
        ra, rb = find(a), find(b)
        if ra == rb:
            for m in members[ra]:
                counts[m] += 1
        else:
            if len(members[ra]) < len(members[rb]):
                ra, rb = rb, ra
            parent[rb] = ra
            members[ra].extend(members.pop(rb))
    return counts


# -- low-degree clique events --------------------------------------------------


@dataclass(frozen=True)
class EventParams:
    """Knobs for the X/Y/S events and the history encoder.

    d_hi: high-degree cutoff (a vertex is low when red degree < d_hi).
    pair_threshold: minimum counted pairs at v for Y(v).
    variant: "s2" counts good pairs at v; "s3" counts component pairs and
    additionally requires every clique vertex to be low degree.
    """

    k: int
    d_hi: float
    pair_threshold: int
    variant: str = "s2"
    neighborhood_cap: int = 64

    def __post_init__(self):
        if self.variant not in ("s2", "s3"):
            raise ValueError(f"variant must be 's2' or 's3', got {self.variant!r}")
        if self.k < 3:
            raise ValueError("events need k >= 3")


@dataclass(frozen=True)
class EventReport:
    v: int
    x: bool
    y: bool
    s: bool
    witness: tuple | None = None
    counted_pairs: int | None = None


def _clique_timestamps(board, clique):
    return {
        edge(a, b): board.round_of(edge(a, b)) for a, b in combinations(clique, 2)
    }


def _red_cliques_in_neighborhood(adj, nbrs, size):
    """Red `size`-cliques within `nbrs`, ascending, lexicographic order."""
    out = []
    nbrs = sorted(nbrs)

    def extend(clique, cands):
        if len(clique) == size:
            out.append(tuple(clique))
            return
        need = size - len(clique)
        for i, u in enumerate(cands):
            if len(cands) - i < need:
                break
            nb = adj[u]
            extend(clique + [u], [w for w in cands[i + 1 :] if w in nb])

    extend([], nbrs)
    return out


def detect_events(transcript: Transcript, v: int, params: EventParams) -> EventReport:
    """X(v), Y(v), S(v) for the replayed game.

    X(v): v ends with red degree below d_hi.  Y(v): some k-1 red neighbors
    of v form a red clique with it whose counted pairs at v reach
    pair_threshold (variant rules in EventParams).  S(v) = X(v) and Y(v).
    """
    board = replay(transcript)
    deg = [0] * board.n
    for a, b in board.red_edges():
        deg[a] += 1
        deg[b] += 1
    x = deg[v] < params.d_hi
    adj = board.red_adjacency()
    nbrs = sorted(adj.get(v, ()))
    y = False
    witness = None
    counted = None
    if len(nbrs) >= params.k - 1:
        if len(nbrs) > params.neighborhood_cap:
            raise NeighborhoodCapError(
                f"red neighborhood of {v} has {len(nbrs)} vertices "
                f"(cap {params.neighborhood_cap})"
            )
        for cand in _red_cliques_in_neighborhood(adj, nbrs, params.k - 1):
            if params.variant == "s3" and any(deg[w] >= params.d_hi for w in cand):
                continue
            clique = (v,) + cand
            stamps = _clique_timestamps(board, clique)
            if params.variant == "s2":
                pairs = good_pair_counts(stamps, clique)[v]
            else:
                pairs = component_pair_counts(stamps, clique)[v]
            if pairs >= params.pair_threshold:
                y = True
                witness = clique
                counted = pairs
                break
    return EventReport(v=v, x=x, y=y, s=x and y, witness=witness, counted_pairs=counted)


# -- history encoding ----------------------------------------------------------


@dataclass(frozen=True)
class EncodingVector:
    """(y_1, z_1, y_2, ..., z_{k-2}, y_{k-1}): neighbor indices and hosts.

    y_i addresses the y_i-th red neighbor (in edge-arrival order) of a
    host vertex; z_i says which already-placed clique vertex hosts the
    next one.  Structural bounds: z_i in [1, i+1], y_i >= 1.
    """

    ys: tuple
    zs: tuple

    def __post_init__(self):
        if len(self.ys) != len(self.zs) + 1:
            raise ValueError("need one more y than z")
        if any(y < 1 for y in self.ys):
            raise ValueError("y indices are 1-based")
        for i, z in enumerate(self.zs, start=1):
            if not 1 <= z <= i + 1:
                raise ValueError(f"z_{i} = {z} outside [1, {i + 1}]")

    def interleaved(self):
        out = [self.ys[0]]
        for z, y in zip(self.zs, self.ys[1:]):
            out.extend((z, y))
        return tuple(out)


def _neighbor_orders(board, verts):
    """Red neighbors of each vertex in `verts`, in edge-arrival order."""
    vset = set(verts)
    order = {v: [] for v in verts}
    for a, b in board.red_edges():
        if a in vset:
            order[a].append(b)
        if b in vset:
            order[b].append(a)
    return order


def _join_times(timestamps, clique, v):
    """Round when each clique vertex first connects to v inside the clique.

    Union-find over the clique's edges in time order; when a merge touches
    v's component, every vertex arriving with it gets that round.  v maps
    to 0.
    """
    parent = {u: u for u in clique}
    members = {u: [u] for u in clique}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    joined = {v: 0}
    ordered = sorted(
        (timestamps[edge(a, b)], a, b) for a, b in combinations(clique, 2)
    )
    for t, a, b in ordered:
        ra, rb = find(a), find(b)
        if ra == rb:
            continue
        rv = find(v)
        if ra == rv or rb == rv:
            other = rb if ra == rv else ra
            for m in members[other]:
                joined[m] = t
        if len(members[ra]) < len(members[rb]):
            ra, rb = rb, ra
        parent[rb] = ra
        members[ra].extend(members.pop(rb))
    return joined


def _appearance_order(timestamps, clique, v):
    """Clique vertices ordered by join time, earliest connector first inside ties.

    Vertices joining v's component together (one merge) form a clump; within
    a clump the next vertex is the one whose earliest edge into the already
    ordered prefix is oldest.  The prefix therefore always spans a connected
    red subgraph, and later hosts always use later neighbor slots.
    """
    joined = _join_times(timestamps, clique, v)
    clumps = {}
    for u in clique:
        if u != v:
            clumps.setdefault(joined[u], []).append(u)
    prefix = [v]
    for t in sorted(clumps):
        todo = sorted(clumps[t])
        while todo:
            best = None
            best_t = None
            for w in todo:
                tw = min(timestamps[edge(w, p)] for p in prefix)
                if best_t is None or tw < best_t:
                    best, best_t = w, tw
            prefix.append(best)
            todo.remove(best)
    return prefix


def encode_history(
    transcript: Transcript, clique, v: int, params: EventParams
) -> EncodingVector:
    """Compress how a red clique at v arose into neighbor-index coordinates.

    Orders the clique by component-appearance (see _appearance_order), then
    records, for each added vertex, which earlier vertex it connected to
    first (z) and at which position it sits in that host's red neighbor
    list (y).  Any y beyond the degree cap makes the history not encodable.
    """
    board = replay(transcript)
    clique = tuple(clique)
    if v not in clique:
        raise ValueError(f"vertex {v} not in the clique")
    red = set(board.red_edges())
    for a, b in combinations(clique, 2):
        if edge(a, b) not in red:
            raise ValueError(f"clique edge {edge(a, b)!r} is not red")
    stamps = _clique_timestamps(board, clique)
    order = _appearance_order(stamps, clique, v)
    nbr_order = _neighbor_orders(board, clique)
    cap = params.d_hi - 1  # low degree leaves at most d_hi - 1 neighbor slots

    def slot(host, w):
        pos = nbr_order[host].index(w) + 1
        if pos > cap:
            raise NotEncodableError(
                f"vertex {w} sits at slot {pos} of {host}'s neighbor list, "
                f"over the cap {cap}"
            )
        return pos

    ys = []
    zs = []
    for j in range(1, len(order)):
        w = order[j]
        prefix = order[:j]
        host_idx = min(
            range(j), key=lambda m: stamps[edge(prefix[m], w)]
        )
        if j > 1:
            zs.append(host_idx + 1)
        ys.append(slot(prefix[host_idx], w))
    return EncodingVector(ys=tuple(ys), zs=tuple(zs))


def check_T(transcript: Transcript, v: int, vec: EncodingVector, params: EventParams) -> bool:
    """Does the encoded low-degree clique event hold on this history?

    Decodes the vector back to vertices via the red neighbor lists, then
    checks: the decoded vertices with v form a red clique of low-degree
    vertices; component pairs at v reach the threshold; each z names the
    first prefix vertex its vertex connected to; appearance order is
    non-decreasing.  Vectors reusing a host with decreasing neighbor slots
    cannot arise from a real history and are rejected outright.
    """
    k = params.k
    if len(vec.ys) != k - 1:
        return False
    cap = params.d_hi - 1
    if any(y > cap for y in vec.ys):
        return False
    # a later arrival at the same host always lands in a later slot
    hosts = (1,) + tuple(vec.zs)  # host position for each y, 1-based
    for i1 in range(k - 1):
        for i2 in range(i1 + 1, k - 1):
            if hosts[i1] == hosts[i2] and vec.ys[i1] > vec.ys[i2]:
                return False
    board = replay(transcript)
    deg = [0] * board.n
    for a, b in board.red_edges():
        deg[a] += 1
        deg[b] += 1
    if deg[v] >= params.d_hi:
        return False
    # decode
    order = [v]
    nbr_cache = {}

    def nbrs_of(u):
        got = nbr_cache.get(u)
        if got is None:
            got = []
            for a, b in board.red_edges():
                if a == u:
                    got.append(b)
                elif b == u:
                    got.append(a)
            nbr_cache[u] = got
        return got

    for i in range(k - 1):
        host = order[hosts[i] - 1]
        lst = nbrs_of(host)
        if vec.ys[i] > len(lst):
            return False
        w = lst[vec.ys[i] - 1]
        order.append(w)
    if len(set(order)) != k:
        return False
    red = set(board.red_edges())
    for a, b in combinations(order, 2):
        if edge(a, b) not in red:
            return False
    if any(deg[u] >= params.d_hi for u in order):
        return False
    stamps = _clique_timestamps(board, order)
    if component_pair_counts(stamps, order)[v] < params.pair_threshold:
        return False
    # z correctness: each vertex's first connection into the prefix is its host
    for j in range(1, k):
        w = order[j]
        times = [stamps[edge(order[m], w)] for m in range(j)]
        if min(range(j), key=lambda m: times[m]) != hosts[j - 1] - 1:
            return False
    # appearance order: join rounds never decrease along the ordering
    joined = _join_times(stamps, order, v)
    seq = [joined[order[j]] for j in range(1, k)]
    if any(a > b for a, b in zip(seq, seq[1:])):
        return False
    return True


# -- late-pair clique event (spoke-order variant) -------------------------------


def late_pair_event(board: Board, v: int, k: int, min_late: int) -> bool:
    """Did v's first k-1 red neighbors form a clique with enough late rims?

    The event: the first k-1 red neighbors of v (spoke order) form a red
    clique together with v, and at least `min_late` of the rim edges among
    them arrived after both of their endpoints' spokes.  This is the event
    whose probability the pairing argument bounds by 2^-min_late.
    """
    spokes = []
    spoke_round = {}
    for a, b in board.red_edges():
        w = None
        if a == v:
            w = b
        elif b == v:
            w = a
        if w is not None:
            spokes.append(w)
            spoke_round[w] = board.round_of(edge(v, w))
            if len(spokes) == k - 1:
                break
    if len(spokes) < k - 1:
        return False
    late = 0
    for a, b in combinations(spokes, 2):
        r = board.round_of(edge(a, b))
        if r is None or board.color_of(edge(a, b)) != RED:
            return False
        if r > spoke_round[a] and r > spoke_round[b]:
            late += 1
    return late >= min_late
