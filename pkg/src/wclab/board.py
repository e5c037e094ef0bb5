"""Board state for the two-color edge-claiming game on the complete graph.

One side (the offerer) presents two unclaimed edges each round; the other
side keeps one, which turns red, and the remaining edge turns blue.  The
board records who got what and in which round.  Boards are sparse: only
claimed edges are stored, so n in the hundreds of thousands is fine as long
as the number of rounds stays manageable.

Edges are `(u, v)` tuples with `u < v`.  The canonical integer index of an
edge, used in files and over the wire, is `v*(v-1)//2 + u`, a bijection
from edges of K_n onto `range(n*(n-1)//2)`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

RED = 1
BLUE = 2

Edge = tuple  # (u, v) with u < v
Offer = tuple  # (edge, edge), normalized so first < second

TRANSCRIPT_VERSION = 1


class BoardError(Exception):
    """Base class for board rule violations."""


class IllegalOfferError(BoardError):
    pass


class IllegalChoiceError(BoardError):
    pass


class ReplayError(BoardError):
    """Raised when a transcript contains an illegal move.

    `move_index` is the 0-based index of the first offending move.
    """

    def __init__(self, move_index, message):
        super().__init__(f"move {move_index}: {message}")
        self.move_index = move_index


def edge(u: int, v: int) -> Edge:
    """Normalized edge tuple for a pair of distinct vertices."""
    if u == v:
        raise ValueError(f"loops are not edges: ({u}, {v})")
    return (u, v) if u < v else (v, u)


def edge_index(e: Edge) -> int:
    u, v = e
    return v * (v - 1) // 2 + u


def edge_from_index(i: int) -> Edge:
    if i < 0:
        raise ValueError(f"negative edge index {i}")
    # v is the largest integer with v*(v-1)/2 <= i
    v = int(((8 * i + 1) ** 0.5 + 1) // 2)
    # float sqrt can be off by one for huge indices; correct both ways
    while v * (v - 1) // 2 > i:
        v -= 1
    while (v + 1) * v // 2 <= i:
        v += 1
    u = i - v * (v - 1) // 2
    return (u, v)


def edge_count(n: int) -> int:
    return n * (n - 1) // 2


def all_edges(n: int):
    """All edges of K_n in index order."""
    for v in range(n):
        for u in range(v):
            yield (u, v)


class Board:
    """Sparse colored-edge state of K_n plus the round counter.

    Claimed edges live in `_claims`, keyed by edge tuple; the value packs
    the 1-based placement round and the color as `(round << 2) | color`.
    Red edges are additionally appended to `_red` in placement order, which
    detectors iterate without scanning the claim table.
    """

    __slots__ = ("n", "_claims", "_red", "_round")

    def __init__(self, n: int):
        if n < 2:
            raise ValueError(f"board needs at least 2 vertices, got {n}")
        self.n = n
        self._claims: dict = {}
        self._red: list = []
        self._round = 0

    # -- observers ---------------------------------------------------------

    @property
    def round(self) -> int:
        """Number of completed rounds."""
        return self._round

    def color_of(self, e: Edge):
        """RED, BLUE, or None for an unclaimed edge."""
        packed = self._claims.get(e)
        return None if packed is None else packed & 3

    def round_of(self, e: Edge):
        """1-based round in which the edge was claimed, or None."""
        packed = self._claims.get(e)
        return None if packed is None else packed >> 2

    def is_unclaimed(self, e: Edge) -> bool:
        return e not in self._claims

    def unclaimed_count(self) -> int:
        return edge_count(self.n) - len(self._claims)

    def can_continue(self) -> bool:
        """True while a legal offer (two unclaimed edges) exists."""
        return self.unclaimed_count() >= 2

    def red_edges(self) -> list:
        """Red edges in placement order (do not mutate)."""
        return self._red

    def blue_edges(self) -> list:
        """Blue edges in placement order."""
        out = [(packed >> 2, e) for e, packed in self._claims.items() if packed & 3 == BLUE]
        out.sort()
        return [e for _, e in out]

    def claimed_edges(self):
        """(edge, color, round) for every claimed edge, red before blue per round."""
        items = [(packed >> 2, packed & 3, e) for e, packed in self._claims.items()]
        items.sort()
        return [(e, color, rnd) for rnd, color, e in items]

    def red_adjacency(self) -> dict:
        """Adjacency sets of the red graph, only vertices with red degree > 0."""
        adj: dict = {}
        get = adj.get
        for u, v in self._red:
            s = get(u)
            if s is None:
                adj[u] = {v}
            else:
                s.add(v)
            s = get(v)
            if s is None:
                adj[v] = {u}
            else:
                s.add(u)
        return adj

    def red_degree(self, v: int) -> int:
        d = 0
        for a, b in self._red:
            if a == v or b == v:
                d += 1
        return d

    # -- mutation ----------------------------------------------------------

    def _check_edge(self, e):
        u, v = e
        if not (0 <= u < v < self.n):
            raise IllegalOfferError(f"edge {e!r} is not an edge of K_{self.n}")

    def apply_round(self, offer: Offer, choice: Edge) -> None:
        """Play one round: `choice` (from `offer`) turns red, the other blue."""
        e1, e2 = offer
        claims = self._claims
        if e1 == e2:
            raise IllegalOfferError(f"offer repeats edge {e1!r}")
        self._check_edge(e1)
        self._check_edge(e2)
        if e1 in claims:
            raise IllegalOfferError(f"edge {e1!r} already claimed")
        if e2 in claims:
            raise IllegalOfferError(f"edge {e2!r} already claimed")
        if choice == e1:
            other = e2
        elif choice == e2:
            other = e1
        else:
            raise IllegalChoiceError(f"choice {choice!r} is not in the offer")
        rnd = self._round + 1
        claims[choice] = (rnd << 2) | RED
        claims[other] = (rnd << 2) | BLUE
        self._red.append(choice)
        self._round = rnd

    def apply_batch(self, offers, choices) -> None:
        """Apply many rounds at once; equivalent to repeated `apply_round`.

        This is the sim-harness hot path: legality checks are kept, but
        attribute lookups are hoisted out of the loop.
        """
        claims = self._claims
        red_append = self._red.append
        rnd = self._round
        n = self.n
        red, blue = RED, BLUE
        for offer, choice in zip(offers, choices):
            e1, e2 = offer
            if choice == e1:
                other = e2
            elif choice == e2:
                other = e1
            else:
                raise IllegalChoiceError(f"choice {choice!r} is not in the offer")
            if e1 in claims or e2 in claims or e1 == e2:
                raise IllegalOfferError(f"offer {offer!r} is not two unclaimed edges")
            u, v = e1
            if not 0 <= u < v < n:
                raise IllegalOfferError(f"edge {e1!r} is not an edge of K_{n}")
            u, v = e2
            if not 0 <= u < v < n:
                raise IllegalOfferError(f"edge {e2!r} is not an edge of K_{n}")
            rnd += 1
            packed = rnd << 2
            claims[choice] = packed | red
            claims[other] = packed | blue
            red_append(choice)
        self._round = rnd


def new_board(n: int) -> Board:
    return Board(n)


# -- transcripts -------------------------------------------------------------


@dataclass
class Transcript:
    """A full game record: board size, goal string, optional seed, moves.

    Moves are `(offer, chosen_edge)` pairs with edges as tuples.  The goal
    is the textual form understood by the strategy registry ("clique:4",
    "factor:3").
    """

    n: int
    goal: str
    seed: int | None = None
    moves: list = field(default_factory=list)
    version: int = TRANSCRIPT_VERSION

    def record(self, offer: Offer, choice: Edge) -> None:
        e1, e2 = offer
        if edge_index(e1) > edge_index(e2):
            e1, e2 = e2, e1
        self.moves.append(((e1, e2), choice))

    def to_json(self) -> str:
        """Canonical JSON document; loading and re-dumping is bit-exact."""
        doc = {
            "version": self.version,
            "n": self.n,
            "goal": self.goal,
            "seed": self.seed,
            "moves": [
                {
                    "offer": sorted((edge_index(o[0]), edge_index(o[1]))),
                    "client": edge_index(c),
                }
                for o, c in self.moves
            ],
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "Transcript":
        doc = json.loads(text)
        if doc.get("version") != TRANSCRIPT_VERSION:
            raise ValueError(f"unsupported transcript version {doc.get('version')!r}")
        moves = []
        for m in doc["moves"]:
            i1, i2 = sorted(m["offer"])
            o = (edge_from_index(i1), edge_from_index(i2))
            moves.append((o, edge_from_index(m["client"])))
        return cls(
            n=doc["n"],
            goal=doc["goal"],
            seed=doc.get("seed"),
            moves=moves,
            version=doc["version"],
        )

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "Transcript":
        with open(path) as fh:
            return cls.from_json(fh.read())


def replay(transcript: Transcript) -> Board:
    """Rebuild the board by replaying a transcript from scratch.

    Raises ReplayError naming the first illegal move.  Replay is the single
    source of truth for persisted games: anything that loads a transcript
    goes through here.
    """
    board = Board(transcript.n)
    for i, (offer, choice) in enumerate(transcript.moves):
        try:
            board.apply_round(offer, choice)
        except BoardError as exc:
            raise ReplayError(i, str(exc)) from exc
    return board
