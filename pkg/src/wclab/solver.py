"""Exact game values for small boards by memoized minimax.

A state is the pair of colored edge sets; rounds are atomic, so there is
no side-to-move component.  Values count the rounds Waiter still needs:
`WaiterWins(r)` means she forces the goal in exactly r more rounds against
best play, `ClientWins` means she never completes it.

The solver prunes through goal witnesses: the goal is reachable only
through some witness edge set with no blue edge, so a position where
every witness is blocked is lost for Waiter outright, and one where the
cheapest live witness needs more red edges than there are rounds left is
lost as well.  Values are exact and independent of exploration order.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass
from itertools import combinations, permutations

import numpy as np

from .board import Board, all_edges, edge
from .strategies import GoalSpec, WaiterStrategy, parse_goal

INF = 1 << 30

DEFAULT_BUDGET = 4_000_000  # transposition entries; ~hundreds of MB resident


class SolverError(Exception):
    pass


class ResourceLimitError(SolverError):
    """The transposition table outgrew the configured budget."""


class GameOverError(SolverError):
    """No legal offer remains."""


@dataclass(frozen=True)
class WaiterWins:
    rounds: int

    def __str__(self) -> str:
        return f"WaiterWins({self.rounds})"


@dataclass(frozen=True)
class ClientWins:
    def __str__(self) -> str:
        return "ClientWins"


GameValue = WaiterWins | ClientWins


@dataclass(frozen=True)
class StateKey:
    n: int
    packed: int
    iso: bool


@dataclass(frozen=True)
class SolveReport:
    value: GameValue
    pv: tuple  # ((offer, client_choice), ...) along Waiter-optimal, Client-worst play
    states: int
    seconds: float


def _edge_bits(n: int) -> dict:
    return {e: i for i, e in enumerate(all_edges(n))}


def _witness_masks(n: int, goal: GoalSpec) -> list[int]:
    """Every minimal red edge set that satisfies the goal, as bit masks."""
    bits = _edge_bits(n)

    def mask_of(pairs) -> int:
        m = 0
        for a, b in pairs:
            m |= 1 << bits[edge(a, b)]
        return m

    if goal.kind == "clique":
        return [
            mask_of(combinations(verts, 2))
            for verts in combinations(range(n), goal.size)
        ]
    k = goal.size
    if n % k:
        raise ValueError(f"factor:{k} needs k | n, got n={n}")

    masks = []

    def split(rest, acc):
        if not rest:
            masks.append(mask_of(p for blk in acc for p in combinations(blk, 2)))
            return
        v, *tail = rest
        for combo in combinations(tail, k - 1):
            left = [u for u in tail if u not in combo]
            split(left, acc + [(v,) + combo])

    split(list(range(n)), [])
    return masks


class _PermTables:
    """Byte-sliced edge-permutation tables for canonicalization."""

    def __init__(self, n: int):
        self.n = n
        self.edges = list(all_edges(n))
        e_count = len(self.edges)
        self.e_count = e_count
        bits = _edge_bits(n)
        lo_width = min(8, e_count)
        hi_width = e_count - lo_width
        perms = list(permutations(range(n)))
        lo = np.zeros((len(perms), 1 << lo_width), dtype=np.int64)
        hi = np.zeros((len(perms), 1 << hi_width), dtype=np.int64)
        for p_i, p in enumerate(perms):
            image = [bits[edge(p[a], p[b])] for a, b in self.edges]
            for m in range(1 << lo_width):
                out = 0
                rem = m
                while rem:
                    b = rem & -rem
                    out |= 1 << image[b.bit_length() - 1]
                    rem ^= b
                lo[p_i, m] = out
            for m in range(1 << hi_width):
                out = 0
                rem = m
                while rem:
                    b = rem & -rem
                    out |= 1 << image[lo_width + b.bit_length() - 1]
                    rem ^= b
                hi[p_i, m] = out
        self._lo = lo
        self._hi = hi
        self._lo_mask = (1 << lo_width) - 1
        self._lo_width = lo_width

    def canon(self, red: int, blue: int) -> int:
        pr = self._lo[:, red & self._lo_mask] | self._hi[:, red >> self._lo_width]
        pb = self._lo[:, blue & self._lo_mask] | self._hi[:, blue >> self._lo_width]
        return int((pr << self.e_count | pb).min())


_PERM_CACHE: dict[int, _PermTables] = {}
_PERM_LOCK = threading.Lock()


def _tables_for(n: int) -> _PermTables:
    with _PERM_LOCK:
        got = _PERM_CACHE.get(n)
        if got is None:
            if n > 7:
                raise SolverError(f"isomorphism tables limited to n <= 7, got {n}")
            got = _PERM_CACHE[n] = _PermTables(n)
        return got


def canonical_key(board: Board, use_isomorphism: bool) -> StateKey:
    bits = _edge_bits(board.n)
    e_count = len(bits)
    red, blue = _board_masks(board)
    if use_isomorphism:
        packed = _tables_for(board.n).canon(red, blue)
    else:
        packed = red << e_count | blue
    return StateKey(n=board.n, packed=packed, iso=use_isomorphism)


class _Solver:
    def __init__(self, n: int, goal: GoalSpec, iso: bool, budget: int):
        self.n = n
        self.goal = goal
        self.iso = iso
        self.budget = budget
        self.e_count = n * (n - 1) // 2
        self.full = (1 << self.e_count) - 1
        self.witnesses = _witness_masks(n, goal)
        self.memo: dict[int, int] = {}
        self.tables = _tables_for(n) if iso else None

    def _key(self, red: int, blue: int) -> int:
        if self.tables is not None:
            return self.tables.canon(red, blue)
        return red << self.e_count | blue

    def value(self, red: int, blue: int) -> int:
        lb = INF
        for w in self.witnesses:
            if w & blue:
                continue
            need = (w & ~red).bit_count()
            if need < lb:
                lb = need
                if need == 0:
                    return 0
        if lb == INF:
            return INF
        unclaimed = self.full & ~(red | blue)
        if unclaimed.bit_count() // 2 < lb:
            return INF
        key = self._key(red, blue)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if len(self.memo) >= self.budget:
            raise ResourceLimitError(
                f"transposition table hit the {self.budget}-entry budget"
            )
        edges = []
        rem = unclaimed
        while rem:
            b = rem & -rem
            edges.append(b)
            rem ^= b
        best = INF
        count = len(edges)
        for i in range(count):
            b1 = edges[i]
            for j in range(i + 1, count):
                b2 = edges[j]
                v1 = self.value(red | b1, blue | b2)
                if v1 >= best - 1:  # offer cannot beat the incumbent
                    continue
                v2 = self.value(red | b2, blue | b1)
                worst = v1 if v1 > v2 else v2
                if 1 + worst < best:
                    best = 1 + worst
                    if best == lb:  # value is bounded below by lb
                        self.memo[key] = best
                        return best
        self.memo[key] = best
        return best

    def offer_values(self, red: int, blue: int) -> list[tuple[tuple, int]]:
        """(offer, value) per legal offer, offers in edge-index order."""
        unclaimed = [
            i for i in range(self.e_count) if not (red | blue) >> i & 1
        ]
        if len(unclaimed) < 2:
            raise GameOverError("fewer than two unclaimed edges remain")
        edges = list(all_edges(self.n))
        out = []
        for i, j in combinations(unclaimed, 2):
            b1, b2 = 1 << i, 1 << j
            v1 = self.value(red | b1, blue | b2)
            v2 = self.value(red | b2, blue | b1) if v1 < INF else INF
            worst = v1 if v1 > v2 else v2
            out.append(((edges[i], edges[j]), 1 + worst if worst < INF else INF))
        return out


def _board_masks(board: Board) -> tuple[int, int]:
    bits = _edge_bits(board.n)
    red = blue = 0
    for e, color, _ in board.claimed_edges():
        if color == 1:
            red |= 1 << bits[e]
        else:
            blue |= 1 << bits[e]
    return red, blue


def _as_goal(goal) -> GoalSpec:
    return goal if isinstance(goal, GoalSpec) else parse_goal(goal)


def value_of(board: Board, goal, *, iso: bool = False, budget: int = DEFAULT_BUDGET) -> GameValue:
    """Game value from an arbitrary mid-game position."""
    goal = _as_goal(goal)
    solver = _Solver(board.n, goal, iso, budget)
    red, blue = _board_masks(board)
    v = solver.value(red, blue)
    return ClientWins() if v >= INF else WaiterWins(v)


def solve(n: int, goal, *, iso: bool = False, budget: int = DEFAULT_BUDGET, workers: int = 1) -> GameValue:
    return solve_report(n, goal, iso=iso, budget=budget, workers=workers).value


def solve_report(
    n: int, goal, *, iso: bool = False, budget: int = DEFAULT_BUDGET, workers: int = 1
) -> SolveReport:
    """Solve from the empty board; includes the forced line and table size."""
    goal = _as_goal(goal)
    if workers < 1:
        raise ValueError("workers must be >= 1")
    t0 = time.perf_counter()
    solver = _Solver(n, goal, iso, budget)
    if workers > 1:
        _presolve_threads(solver, workers)
    raw = solver.value(0, 0)
    if raw >= INF:
        value: GameValue = ClientWins()
        pv: tuple = ()
    else:
        if not 1 <= raw <= n * (n - 1) // 4:
            raise SolverError(f"value {raw} outside the legal round range")
        value = WaiterWins(raw)
        pv = _principal_variation(solver)
    return SolveReport(
        value=value, pv=pv, states=len(solver.memo), seconds=time.perf_counter() - t0
    )


def _presolve_threads(solver: _Solver, workers: int) -> None:
    """Evaluate the root offers on worker threads to warm the table.

    Each offer's value is a pure function of its state, so concurrent
    table writes can only race equal values and the final answer cannot
    depend on the thread count.
    """
    offers = list(combinations(range(solver.e_count), 2))
    failures: list[Exception] = []

    def chunk(w: int) -> None:
        try:
            for idx in range(w, len(offers), workers):
                i, j = offers[idx]
                b1, b2 = 1 << i, 1 << j
                v1 = solver.value(b1, b2)
                if v1 < INF:
                    solver.value(b2, b1)
        except Exception as exc:  # propagate budget errors to the caller
            failures.append(exc)

    threads = [threading.Thread(target=chunk, args=(w,)) for w in range(workers)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    if failures:
        raise failures[0]


def _principal_variation(solver: _Solver) -> tuple:
    red = blue = 0
    line = []
    while True:
        v = solver.value(red, blue)
        if v == 0 or v >= INF:
            break
        values = solver.offer_values(red, blue)
        offer = next(off for off, val in values if val == v)  # edge-index order
        bits = _edge_bits(solver.n)
        b1 = 1 << bits[offer[0]]
        b2 = 1 << bits[offer[1]]
        # client drags the game out: keep the edge leading to the larger value
        v1 = solver.value(red | b1, blue | b2)
        v2 = solver.value(red | b2, blue | b1)
        choice = offer[0] if v1 >= v2 else offer[1]
        keep, give = (b1, b2) if choice == offer[0] else (b2, b1)
        line.append((offer, choice))
        red |= keep
        blue |= give
    return tuple(line)


def best_offer(board: Board, goal, *, iso: bool = False, budget: int = DEFAULT_BUDGET):
    """An offer achieving the minimax value; ties break lexicographically."""
    goal = _as_goal(goal)
    solver = _Solver(board.n, goal, iso, budget)
    red, blue = _board_masks(board)
    values = solver.offer_values(red, blue)  # raises GameOverError when dry
    best = min(v for _, v in values)
    for offer, v in values:
        if v == best:
            return offer
    raise AssertionError("unreachable")


class SolverWaiter(WaiterStrategy):
    """Plays exactly when a forced win exists, otherwise keeps up pressure.

    From positions Waiter cannot win she has no optimal move to speak of,
    so the fallback offers the pair that leaves her strongest live threat
    intact whichever edge Client keeps; humans get a real opponent either
    way.
    """

    def __init__(self, goal, *, iso: bool = False, budget: int = DEFAULT_BUDGET):
        super().__init__()
        self.goal = _as_goal(goal)
        self.iso = iso
        self.budget = budget
        self._solver: _Solver | None = None

    def _engine(self, board: Board) -> _Solver:
        if self._solver is None or self._solver.n != board.n:
            self._solver = _Solver(board.n, self.goal, self.iso, self.budget)
        return self._solver

    def _plan_sweep(self, board: Board):
        if not board.can_continue():
            return None
        solver = self._engine(board)
        red, blue = _board_masks(board)
        for w in solver.witnesses:
            if not w & blue and not w & ~red:
                return None  # already won
        values = solver.offer_values(red, blue)
        best = min(v for _, v in values)
        if best < INF:
            for offer, v in values:
                if v == best:
                    return [offer]
        return [self._pressure_offer(solver, red, blue)]

    def _absorb(self, board: Board, offers, choices) -> None:
        pass

    @staticmethod
    def _pressure_offer(solver: _Solver, red: int, blue: int):
        def threat(r: int, b: int) -> int:
            got = -1
            for w in solver.witnesses:
                if w & b:
                    continue
                have = (w & r).bit_count()
                if have > got:
                    got = have
            return got

        edges = list(all_edges(solver.n))
        best_score = -2
        best_pair = None
        unclaimed = [
            i for i in range(solver.e_count) if not (red | blue) >> i & 1
        ]
        for i, j in combinations(unclaimed, 2):
            b1, b2 = 1 << i, 1 << j
            score = min(threat(red | b1, blue | b2), threat(red | b2, blue | b1))
            if score > best_score:
                best_score = score
                best_pair = (edges[i], edges[j])
        return best_pair
