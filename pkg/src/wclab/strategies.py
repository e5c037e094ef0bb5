"""Offer and choice strategies for both sides of the edge-claiming game.

The offering side ("waiter") implements `next_offer` / `observe`; the
choosing side ("client") implements `choose`.  Strategies whose offers come
in precomputed batches (a level of the clique builder, one leftover vertex's
pair run) expose those batches as *sweeps* so the simulation harness can
process them without a Python round-trip per offer; the one-offer-at-a-time
protocol remains available and equivalent.

The centerpiece strategies:

* `CliqueBuilder` turns 2^l - 1 untouched candidates into a red K_l in
  exactly 2^l - l - 1 rounds, no matter how the client answers.
* `FactorWaiter` forces a spanning red K_k-factor in three stages: one big
  anchor clique, a stream of small cliques over fresh vertices, then pair
  offers hooking each leftover vertex into the anchor.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .board import Board, Edge, Offer, edge


class StrategyError(Exception):
    pass


class BadBudgetError(StrategyError):
    """Candidate count does not match what the builder needs."""


class DirtyBoardError(StrategyError):
    """A candidate-internal edge is already claimed."""


class ScriptUnderrunError(StrategyError):
    """A scripted client ran out of moves."""


class BoardTooSmallError(StrategyError):
    pass


# -- goals -------------------------------------------------------------------


@dataclass(frozen=True)
class GoalSpec:
    """What the offering side is trying to build in red.

    kind "clique": one red K_size anywhere.
    kind "factor": a spanning union of disjoint red K_size (requires size | n).
    """

    kind: str
    size: int

    def __post_init__(self):
        if self.kind not in ("clique", "factor"):
            raise ValueError(f"unknown goal kind {self.kind!r}")
        if self.size < 2:
            raise ValueError(f"goal size must be >= 2, got {self.size}")

    def __str__(self):
        return f"{self.kind}:{self.size}"


def parse_goal(text: str) -> GoalSpec:
    try:
        kind, _, size = text.partition(":")
        return GoalSpec(kind, int(size))
    except ValueError as exc:
        raise ValueError(f"bad goal {text!r}, expected 'clique:L' or 'factor:K'") from exc


# -- strategy protocols ------------------------------------------------------


class ClientStrategy:
    """Chooses which offered edge to keep."""

    # True when choices never depend on the board, which lets the harness
    # answer a whole sweep of offers at once.
    board_independent = False

    def choose(self, board: Board, offer: Offer) -> Edge:
        raise NotImplementedError

    def choose_batch(self, board: Board, offers) -> list:
        return [self.choose(board, o) for o in offers]


class WaiterStrategy:
    """Produces offers, possibly in sweeps, and observes the answers.

    Subclasses implement `_plan_sweep` (return the next batch of offers, or
    None when the strategy is finished) and `_absorb` (digest the answers
    to a completed sweep).  A sweep must be valid regardless of how its
    offers are answered.
    """

    def __init__(self):
        self._sweep = None
        self._sweep_idx = 0
        self._sweep_choices = []

    # subclass interface

    def _plan_sweep(self, board: Board):
        raise NotImplementedError

    def _absorb(self, board: Board, offers, choices):
        pass

    # driver interface

    def _ensure_sweep(self, board):
        if self._sweep is None:
            sweep = self._plan_sweep(board)
            if sweep is None:
                return None
            if not sweep:
                raise StrategyError("strategy planned an empty sweep")
            self._sweep = list(sweep)
            self._sweep_idx = 0
            self._sweep_choices = []
        return self._sweep

    def next_offer(self, board: Board):
        """The next single offer, or None when the strategy is done."""
        sweep = self._ensure_sweep(board)
        if sweep is None:
            return None
        return sweep[self._sweep_idx]

    def next_sweep(self, board: Board):
        """All remaining offers of the current sweep, or None when done."""
        sweep = self._ensure_sweep(board)
        if sweep is None:
            return None
        return sweep[self._sweep_idx :]

    def observe(self, board: Board, offer: Offer, choice: Edge) -> None:
        self.observe_batch(board, [offer], [choice])

    def observe_batch(self, board: Board, offers, choices) -> None:
        sweep = self._sweep
        if sweep is None:
            raise StrategyError("observe without a pending offer")
        self._sweep_choices.extend(choices)
        self._sweep_idx += len(offers)
        if self._sweep_idx > len(sweep):
            raise StrategyError("observed more answers than offered")
        if self._sweep_idx == len(sweep):
            self._sweep = None
            self._absorb(board, sweep, self._sweep_choices)


# -- clients -----------------------------------------------------------------


class RandomClient(ClientStrategy):
    """Keeps either offered edge with probability 1/2, from a seeded stream."""

    board_independent = True

    def __init__(self, bits):
        # `bits` is anything with .next() and .take(n) yielding 0/1
        self._bits = bits

    def choose(self, board, offer):
        return offer[self._bits.next()]

    def choose_batch(self, board, offers):
        picks = self._bits.take(len(offers))
        return [o[b] for o, b in zip(offers, picks)]


class ScriptedClient(ClientStrategy):
    """Plays a fixed 0/1 script: bit i picks the first or second edge of round i."""

    board_independent = True

    def __init__(self, script):
        self._script = list(script)
        self._pos = 0

    def choose(self, board, offer):
        if self._pos >= len(self._script):
            raise ScriptUnderrunError(
                f"script exhausted after {self._pos} moves"
            )
        bit = self._script[self._pos]
        self._pos += 1
        return offer[bit]

    def choose_batch(self, board, offers):
        end = self._pos + len(offers)
        if end > len(self._script):
            raise ScriptUnderrunError(
                f"script exhausted after {len(self._script)} moves"
            )
        picks = self._script[self._pos : end]
        self._pos = end
        return [o[b] for o, b in zip(offers, picks)]


# -- clique builder ----------------------------------------------------------


class CliqueBuilder(WaiterStrategy):
    """Forces a red K_l on 2^l - 1 untouched candidates in 2^l - l - 1 rounds.

    Level by level: the current pivot (first surviving candidate) offers the
    rest of its level in pairs; whichever edge the client keeps marks that
    endpoint as a survivor.  Survivors halve each level, the pivot joins the
    clique, and every edge placed on the way touches some pivot, so the
    final clique absorbs all the damage.
    """

    def __init__(self, l: int, candidates):
        super().__init__()
        if l < 1:
            raise ValueError(f"clique size must be >= 1, got {l}")
        candidates = list(candidates)
        if len(candidates) != 2**l - 1:
            raise BadBudgetError(
                f"building K_{l} needs {2**l - 1} candidates, got {len(candidates)}"
            )
        if len(set(candidates)) != len(candidates):
            raise BadBudgetError("candidates must be distinct")
        self.l = l
        self._level = candidates
        self._clique = []
        self._checked_clean = False
        self.rounds_used = 0

    @staticmethod
    def rounds_needed(l: int) -> int:
        return 2**l - l - 1

    @property
    def clique(self):
        """The forced clique (pivot order), or None while unfinished."""
        return list(self._clique) if len(self._clique) == self.l else None

    def _check_clean(self, board):
        # A claimed candidate-internal edge would derail the level walk.
        # Check whichever is cheaper to scan: candidate pairs or the claim
        # table (on huge boards the candidate set is tiny and vice versa).
        cands = self._level
        c = len(cands)
        if c * (c - 1) // 2 <= len(board._claims):
            for i in range(c):
                for j in range(i + 1, c):
                    if not board.is_unclaimed(edge(cands[i], cands[j])):
                        raise DirtyBoardError(
                            f"candidate edge {edge(cands[i], cands[j])!r} already claimed"
                        )
        else:
            cset = set(cands)
            for u, v in board._claims:
                if u in cset and v in cset:
                    raise DirtyBoardError(f"candidate edge {(u, v)!r} already claimed")
        self._checked_clean = True

    def _plan_sweep(self, board):
        if not self._checked_clean:
            self._check_clean(board)
        level = self._level
        if len(level) == 1:
            if len(self._clique) < self.l:
                self._clique.append(level[0])
            return None
        p = level[0]
        return [
            (
                (p, x) if p < x else (x, p),
                (p, y) if p < y else (y, p),
            )
            for x, y in zip(level[1::2], level[2::2])
        ]

    def _absorb(self, board, offers, choices):
        pivot = self._level[0]
        survivors = []
        for c in choices:
            u, v = c
            survivors.append(v if u == pivot else u)
        self._clique.append(pivot)
        self._level = survivors
        self.rounds_used += len(offers)


# -- stage plan for the factor strategy ---------------------------------------


@dataclass(frozen=True)
class StagePlan:
    """Sizing for the three-stage factor construction.

    r: anchor clique size; s0 = 2^r - 1: vertices fed to stage I;
    n_min: smallest board (a multiple of k) the plan is guaranteed on.
    """

    k: int
    r: int
    s0: int
    n_min: int


def _plan_base(k: int, r: int, s0: int) -> int:
    # Stage II burns k-1 fresh vertices per anchor-seeded clique; the last
    # seeded run must still find 2^k - 2 fresh candidates.
    return s0 + (k - 1) * (s0 - r) + (2**k - 1 - k)


def stage_parameters(k: int) -> StagePlan:
    """Minimal valid plan for a given k (exact integer arithmetic)."""
    if k < 2:
        raise ValueError(f"factor goal needs k >= 2, got {k}")
    r = (k - 1) * (2**k - 1) + k
    s0 = 2**r - 1
    base = _plan_base(k, r, s0)
    n_min = -(-base // k) * k
    return StagePlan(k=k, r=r, s0=s0, n_min=n_min)


def plan_is_valid(k: int, r: int, s0: int, n: int) -> bool:
    """Whether the three-stage construction is guaranteed on these numbers.

    Works on exact ints of any size, so astronomically conservative plans
    (r exponential in k, n doubly exponential) can be checked symbolically.
    """
    if k < 2:
        return False
    if r < (k - 1) * (2**k - 1) + k:
        return False
    if s0 != 2**r - 1:
        return False
    if n % k != 0:
        return False
    return n >= _plan_base(k, r, s0)


def factor_round_bound(plan: StagePlan, n: int) -> int:
    """Round count the factor strategy never exceeds on a valid board."""
    k = plan.k
    return 2**plan.r + (2**k) * (n // k) + (2**k) * k


class FactorWaiter(WaiterStrategy):
    """Forces disjoint red K_k's covering all n vertices (k | n).

    Stage I builds one big red anchor clique R on 2^r - 1 dedicated
    vertices; its non-clique leftovers B have all their claimed edges into
    R.  Stage II repeatedly runs the clique builder on 2^k - 1 vertices,
    seeding each run with a B vertex while any remain (the seed always ends
    up in the forced clique), then on fresh vertices alone; finished cliques
    are banked and non-clique candidates go back in the pool.  When fewer
    than 2^k poolable vertices remain, stage III hooks each leftover z into
    the anchor: pairs of z-R edges give z one red anchor neighbor per round,
    and after k - 1 rounds z plus those neighbors form a bankable clique.
    What remains of R at the end is itself red-complete and k | |R'|, so it
    splits into cliques with no further rounds.
    """

    def __init__(self, k: int, n: int, plan: StagePlan | None = None):
        super().__init__()
        plan = plan or stage_parameters(k)
        if plan.k != k:
            raise ValueError("plan is for a different k")
        if n % k != 0:
            raise BoardTooSmallError(f"factor goal needs k | n, got n={n}, k={k}")
        if n < plan.n_min:
            raise BoardTooSmallError(
                f"plan for k={k} needs n >= {plan.n_min}, got {n}"
            )
        self.k = k
        self.n = n
        self.plan = plan
        self.blocks: list = []
        self.rounds_used = 0
        self._stage = "I"
        self._builder = CliqueBuilder(plan.r, range(plan.s0))
        self._seed_queue = None  # B, filled after stage I
        self._pool = deque(range(plan.s0, n))
        self._anchor_avail = None  # R minus banked, ascending
        self._stage3_z = None
        # stage II runs in cohorts: many independent small clique runs
        # advance one level per sweep, so per-run overhead amortizes
        self._cohort_runs = None
        self._cohort_cands = None
        self._cohort_pivots = None

    # stage transitions happen lazily inside _plan_sweep

    def _finish_stage1(self):
        anchor = self._builder.clique
        anchor_set = set(anchor)
        self._anchor_avail = sorted(anchor)
        self._seed_queue = deque(
            v for v in range(self.plan.s0) if v not in anchor_set
        )
        self._builder = None
        self._stage = "II"

    def _bank(self, block):
        self.blocks.append(sorted(block))

    def _start_cohort(self) -> bool:
        """Draw candidates for the next batch of small clique runs.

        Seeded runs (one anchor leftover plus 2^k - 2 pool vertices) go
        first; once the leftovers are gone, pure pool runs of 2^k - 1 are
        batched while at least 2^k poolable vertices remain.  Batching as
        many runs as the pool can fund upfront never changes the total run
        count: each seeded run always happens, and pure runs drain the pool
        by a fixed net amount either way.
        """
        k = self.k
        pool = self._pool
        seeds = self._seed_queue
        width = 2**k - 1
        if seeds:
            count = min(len(seeds), len(pool) // (width - 1))
            if count == 0:
                raise BoardTooSmallError(
                    "fresh-vertex pool exhausted before anchor leftovers were used up"
                )
            runs = []
            for _ in range(count):
                cand = [seeds.popleft()]
                cand.extend(pool.popleft() for _ in range(width - 1))
                runs.append(cand)
        elif len(pool) >= 2**k:
            count = len(pool) // width
            flat = list(pool)
            take = count * width
            runs = [flat[i : i + width] for i in range(0, take, width)]
            self._pool = deque(flat[take:])
        else:
            return False
        self._cohort_runs = runs
        # waves rebind _cohort_runs to fresh survivor lists, so the original
        # run lists can double as the candidate record without a copy
        self._cohort_cands = runs
        self._cohort_pivots = [[] for _ in runs]
        return True

    def _plan_cohort_wave(self):
        offers = []
        append = offers.append
        for run in self._cohort_runs:
            it = iter(run)
            p = next(it)
            for x in it:
                y = next(it)
                append(
                    (
                        (p, x) if p < x else (x, p),
                        (p, y) if p < y else (y, p),
                    )
                )
        return offers

    def _absorb_cohort_wave(self, choices):
        runs = self._cohort_runs
        pivots = self._cohort_pivots
        per_run = (len(runs[0]) - 1) // 2
        pos = 0
        new_runs = []
        append_run = new_runs.append
        for idx, run in enumerate(runs):
            p = run[0]
            end = pos + per_run
            append_run([v if u == p else u for u, v in choices[pos:end]])
            pos = end
            pivots[idx].append(p)
        if per_run == 1:
            # runs are down to a single survivor: bank and recycle
            pool_extend = self._pool.extend
            cands = self._cohort_cands
            for idx, surv in enumerate(new_runs):
                block = pivots[idx] + surv
                bset = set(block)
                self._bank(block)
                pool_extend([c for c in cands[idx] if c not in bset])
            self._cohort_runs = None
            self._cohort_cands = None
            self._cohort_pivots = None
        else:
            self._cohort_runs = new_runs

    def _plan_sweep(self, board):
        while True:
            if self._stage == "I":
                sweep = self._builder._plan_sweep(board)
                if sweep is not None:
                    return sweep
                self._finish_stage1()
            elif self._stage == "II":
                if self._cohort_runs is not None:
                    return self._plan_cohort_wave()
                if not self._start_cohort():
                    self._stage = "III"
            elif self._stage == "III":
                if self._stage3_z is None:
                    if self._pool:
                        z = self._pool.popleft()
                        k = self.k
                        avail = self._anchor_avail
                        if len(avail) < 2 * (k - 1):
                            raise BoardTooSmallError(
                                "anchor clique exhausted during leftover hookup"
                            )
                        self._stage3_z = z
                        self._stage3_slice = avail[: 2 * (k - 1)]
                        return [
                            (edge(z, self._stage3_slice[i]), edge(z, self._stage3_slice[i + 1]))
                            for i in range(0, 2 * (k - 1), 2)
                        ]
                    self._finish_stage3()
                else:
                    # sweep for current z is pending; driver consumes it
                    raise StrategyError("planning overlap in stage III")
            else:
                return None

    def _finish_stage3(self):
        k = self.k
        avail = self._anchor_avail
        if len(avail) % k != 0:
            raise StrategyError(
                f"anchor leftover of size {len(avail)} is not a multiple of {k}"
            )
        for i in range(0, len(avail), k):
            self._bank(avail[i : i + k])
        self._anchor_avail = []
        self._stage = "done"

    def _absorb(self, board, offers, choices):
        self.rounds_used += len(offers)
        if self._stage == "I":
            self._builder._absorb(board, offers, choices)
        elif self._stage == "II":
            self._absorb_cohort_wave(choices)
        elif self._stage == "III":
            z = self._stage3_z
            reds = []
            for c in choices:
                u, v = c
                reds.append(v if u == z else u)
            self._bank([z] + reds)
            red_set = set(reds)
            self._anchor_avail = [a for a in self._anchor_avail if a not in red_set]
            self._stage3_z = None

    @property
    def done(self) -> bool:
        return self._stage == "done"


# -- baseline waiters ---------------------------------------------------------


class RandomOfferWaiter(WaiterStrategy):
    """Offers two distinct unclaimed edges uniformly at random (desk scale)."""

    def __init__(self, n: int, rng):
        super().__init__()
        self._rng = rng
        self._unclaimed = [
            (u, v) for v in range(n) for u in range(v)
        ]

    def _plan_sweep(self, board):
        pool = self._unclaimed
        if len(pool) < 2:
            return None
        i = int(self._rng.integers(len(pool)))
        j = int(self._rng.integers(len(pool) - 1))
        if j >= i:
            j += 1
        e1, e2 = pool[i], pool[j]
        return [(e1, e2)]

    def _absorb(self, board, offers, choices):
        (e1, e2), = offers
        pool = self._unclaimed
        for e in (e1, e2):
            # swap-remove; order does not matter for uniformity because we
            # sample indices fresh each round
            idx = pool.index(e)
            pool[idx] = pool[-1]
            pool.pop()


class GreedyDegreeWaiter(WaiterStrategy):
    """Offers two unclaimed edges at a vertex of maximal red degree.

    Falls back to the two lexicographically smallest unclaimed edges when no
    vertex has two unclaimed incident edges left.  Deterministic: ties in
    degree break toward the smaller vertex id.
    """

    def __init__(self, n: int):
        super().__init__()
        self.n = n
        self._red_deg = [0] * n

    def _plan_sweep(self, board):
        n = self.n
        order = sorted(range(n), key=lambda v: (-self._red_deg[v], v))
        for v in order:
            found = []
            for u in range(n):
                if u != v and board.is_unclaimed(edge(u, v)):
                    found.append(edge(u, v))
                    if len(found) == 2:
                        return [(found[0], found[1])]
        # no vertex has two free incident edges; take any two free edges
        found = []
        for w in range(n):
            for u in range(w):
                if board.is_unclaimed((u, w)):
                    found.append((u, w))
                    if len(found) == 2:
                        return [(found[0], found[1])]
        return None

    def _absorb(self, board, offers, choices):
        (choice,) = choices
        u, v = choice
        self._red_deg[u] += 1
        self._red_deg[v] += 1


# -- event probe (late-pair Monte Carlo) ---------------------------------------


class EventProbeWaiter(WaiterStrategy):
    """Drives play toward a fixed late-pair clique event at vertex 0.

    Target event: the first k-1 red neighbors of vertex 0 form a red clique
    with it, and at least ceil((k-1)(k-2)/6) of the clique's rim edges were
    placed after both of their endpoints' spokes ("late").  Every structural
    edge is offered in a pair where either answer works, except the
    designated late rim edges, which necessarily ride on single offers (the
    other edge is a throwaway between reserved junk vertices) and so each
    survive with probability 1/2.  The empirical success frequency therefore
    probes the per-event probability bound 2^{-(k-1)(k-2)/6} from above as
    tightly as the pairing argument allows.
    """

    def __init__(self, k: int):
        super().__init__()
        if k < 3:
            raise ValueError("probe needs k >= 3")
        self.k = k
        self.v = 0
        self.late_count = -(-((k - 1) * (k - 2)) // 6)
        if self.late_count > k - 2:
            raise ValueError(
                f"late edges ({self.late_count}) exceed the last vertex's rim "
                f"({k - 2}); this probe covers k <= 7"
            )
        self._spokes = []  # chosen w vertices, in red-neighbor order
        self._next_fresh = 1
        self._phase = "build"  # build -> late -> done
        self._w_index = 0  # which w we are constructing
        self._cand_stack = None
        self._late_left = None
        self.offers_made = 0

    def board_size(self) -> int:
        """A board size with enough fresh and junk vertices for one run."""
        k = self.k
        need = 1
        for j in range(k - 1):
            depth = self._rim_depth(j)
            need += 2 * 2**depth
        return need + 2 * self.late_count + 4

    def _rim_depth(self, j: int) -> int:
        # w_j (0-based) is pre-rimmed to its first `depth` predecessors;
        # the last w skips the late edges.
        if j == self.k - 2:
            return j - self.late_count
        return j

    def _take_fresh(self, count: int):
        out = list(range(self._next_fresh, self._next_fresh + count))
        self._next_fresh += count
        return out

    def _plan_sweep(self, board):
        if self._phase == "build":
            j = self._w_index
            if j >= self.k - 1:
                self._phase = "late"
                targets = []
                last = self._spokes[-1]
                for t in self._spokes[self._rim_depth(self.k - 2) : -1]:
                    targets.append(edge(t, last))
                self._late_left = targets
                return self._plan_sweep(board)
            depth = self._rim_depth(j)
            if self._cand_stack is None:
                # level 0: 2^depth pairs of fresh candidates, each pair will
                # be rimmed toward successive targets until 2 remain
                self._cand_stack = self._take_fresh(2 * 2**depth)
                self._rim_level = 0
            cands = self._cand_stack
            if self._rim_level < depth:
                target = self._spokes[self._rim_level]
                return [
                    (edge(target, cands[i]), edge(target, cands[i + 1]))
                    for i in range(0, len(cands), 2)
                ]
            # fully rimmed: pick the spoke via a pair at v
            a, b = cands
            return [(edge(self.v, a), edge(self.v, b))]
        if self._phase == "late":
            if self._late_left:
                target = self._late_left.pop(0)
                ja, jb = self._take_fresh(2)
                return [(target, edge(ja, jb))]
            self._phase = "done"
            return None
        return None

    def _absorb(self, board, offers, choices):
        self.offers_made += len(offers)
        if self._phase == "build":
            j = self._w_index
            depth = self._rim_depth(j)
            if self._rim_level < depth:
                target = self._spokes[self._rim_level]
                winners = []
                for c in choices:
                    u, v = c
                    winners.append(v if u == target else u)
                self._cand_stack = winners
                self._rim_level += 1
            else:
                (c,) = choices
                u, v = c
                w = v if u == self.v else u
                self._spokes.append(w)
                self._cand_stack = None
                self._w_index += 1
        # late-phase offers need no bookkeeping: the checker reads the board
