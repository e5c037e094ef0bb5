"""Game driver: wires a waiter strategy against a client strategy.

`play_game` runs the offer/choose/observe loop.  When the client's choices
do not depend on board state, whole sweeps of offers are answered and
applied in one pass; the result is identical to offer-at-a-time play, just
without a Python round-trip per offer.
"""

from __future__ import annotations

from .board import Board, Transcript
from .rng import BitStream, game_stream
from .strategies import (
    ClientStrategy,
    EventProbeWaiter,
    FactorWaiter,
    GoalSpec,
    GreedyDegreeWaiter,
    RandomClient,
    RandomOfferWaiter,
    CliqueBuilder,
    ScriptedClient,
    WaiterStrategy,
    parse_goal,
)


def play_game(
    board: Board,
    waiter: WaiterStrategy,
    client: ClientStrategy,
    *,
    record: Transcript | None = None,
    max_rounds: int | None = None,
    use_sweeps: bool = True,
) -> int:
    """Run the game until the waiter stops (or the cap); returns rounds played."""
    rounds = 0
    batch = use_sweeps and client.board_independent
    while max_rounds is None or rounds < max_rounds:
        if batch:
            sweep = waiter.next_sweep(board)
            if sweep is None:
                break
            if max_rounds is not None and rounds + len(sweep) > max_rounds:
                sweep = sweep[: max_rounds - rounds]
            choices = client.choose_batch(board, sweep)
            board.apply_batch(sweep, choices)
            if record is not None:
                for o, c in zip(sweep, choices):
                    record.record(o, c)
            waiter.observe_batch(board, sweep, choices)
            rounds += len(sweep)
        else:
            offer = waiter.next_offer(board)
            if offer is None:
                break
            choice = client.choose(board, offer)
            board.apply_round(offer, choice)
            if record is not None:
                record.record(offer, choice)
            waiter.observe(board, offer, choice)
            rounds += 1
    return rounds


# -- registry -----------------------------------------------------------------

WAITER_NAMES = ("factor", "clique_builder", "random", "greedy", "solver_optimal")
CLIENT_NAMES = ("random", "scripted:<bits>")


def resolve_waiter(name: str, n: int, goal: GoalSpec, rng=None) -> WaiterStrategy:
    """Build a waiter strategy by name for a board of n vertices.

    "factor" and "clique_builder" force the goal outright; "random",
    "greedy" and "solver_optimal" are baselines for comparison (the solver
    one only fits small boards).
    """
    if name == "factor":
        if goal.kind != "factor":
            raise ValueError(f"factor waiter needs a factor goal, got {goal}")
        return FactorWaiter(goal.size, n)
    if name == "clique_builder":
        if goal.kind != "clique":
            raise ValueError(f"clique_builder needs a clique goal, got {goal}")
        budget = 2**goal.size - 1
        if n < budget:
            raise ValueError(
                f"building K_{goal.size} needs {budget} vertices, board has {n}"
            )
        return CliqueBuilder(goal.size, range(budget))
    if name == "random":
        if rng is None:
            raise ValueError("random waiter needs a seeded generator")
        return RandomOfferWaiter(n, rng)
    if name == "greedy":
        return GreedyDegreeWaiter(n)
    if name == "solver_optimal":
        from .solver import SolverWaiter

        return SolverWaiter(goal, iso=n <= 7)
    raise ValueError(f"unknown waiter {name!r}; known: {', '.join(WAITER_NAMES)}")


def resolve_client(name: str, bits: BitStream | None = None) -> ClientStrategy:
    if name == "random":
        if bits is None:
            raise ValueError("random client needs a seeded bit stream")
        return RandomClient(bits)
    if name.startswith("scripted:"):
        script = name.split(":", 1)[1]
        if not script or set(script) - {"0", "1"}:
            raise ValueError(f"scripted client wants a 0/1 string, got {script!r}")
        return ScriptedClient(int(c) for c in script)
    raise ValueError(f"unknown client {name!r}; known: {', '.join(CLIENT_NAMES)}")


def seeded_game(
    n: int,
    goal: str | GoalSpec,
    waiter_name: str,
    client_name: str,
    master_seed: int,
    game_index: int = 0,
):
    """(board, waiter, client) for one reproducible game.

    The waiter and client get independent streams derived from
    (master_seed, game_index), so neither side's draws disturb the other's.
    """
    if isinstance(goal, str):
        goal = parse_goal(goal)
    board = Board(n)
    waiter_rng = game_stream(master_seed, 2 * game_index)
    client_bits = BitStream(game_stream(master_seed, 2 * game_index + 1))
    waiter = resolve_waiter(waiter_name, n, goal, rng=waiter_rng)
    client = resolve_client(client_name, bits=client_bits)
    return board, waiter, client
