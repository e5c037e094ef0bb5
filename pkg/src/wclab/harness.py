"""Batch simulation: many seeded games, aggregates, and probability probes.

Every game in a batch draws from its own pair of RNG streams keyed by
(master_seed, game_index), so results are reproducible for any worker
count and games can be replayed individually.
"""

from __future__ import annotations

import csv
import gc
import json
import math
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from contextlib import contextmanager
from dataclasses import dataclass
from itertools import repeat

from .board import Board, Transcript
from .detectors import (
    EventParams,
    detect_events,
    find_red_factor,
    has_red_clique,
    late_pair_event,
)
from .engine import play_game, resolve_client, resolve_waiter
from .rng import BitStream, game_stream
from .strategies import EventProbeWaiter, RandomClient, ScriptedClient, parse_goal


class SimConfigError(ValueError):
    """A batch configuration that cannot be run."""


@dataclass(frozen=True)
class SimConfig:
    """One batch of games: who plays, how many, and what to measure.

    `client` accepts the engine registry names plus "sweep:<len>", which
    plays game i with the scripted client whose bits are the binary
    digits of i (lowest bit first); `games` may not exceed 2**len.
    `events` switches on per-vertex S-event counting over each finished
    transcript.
    """

    n: int
    goal: str
    waiter: str
    client: str
    games: int
    master_seed: int
    round_cap: int | None = None
    events: EventParams | None = None

    def __post_init__(self):
        if self.n < 2:
            raise SimConfigError(f"need at least 2 vertices, got {self.n}")
        if self.games < 1:
            raise SimConfigError(f"games must be >= 1, got {self.games}")
        if self.round_cap is not None and self.round_cap < 1:
            raise SimConfigError(f"round cap must be >= 1, got {self.round_cap}")
        try:
            parse_goal(self.goal)
        except ValueError as exc:
            raise SimConfigError(str(exc)) from exc
        if self.client.startswith("sweep:"):
            tail = self.client.split(":", 1)[1]
            if not tail.isdigit() or int(tail) < 1:
                raise SimConfigError(
                    f"sweep client wants a positive length, got {self.client!r}"
                )
            if self.games > 1 << int(tail):
                raise SimConfigError(
                    f"{self.games} games exceed the {1 << int(tail)} distinct "
                    f"scripts of length {tail}"
                )

    @property
    def effective_cap(self) -> int:
        """Hard stop in rounds; defaults to the board's edge-pair capacity."""
        if self.round_cap is not None:
            return self.round_cap
        return self.n * (self.n - 1) // 4


@dataclass(frozen=True)
class GameRecord:
    game_index: int
    outcome: str  # "win" when the goal stands at the end, else "survive"
    rounds: int
    s_count: int | None = None


@dataclass(frozen=True)
class StatsReport:
    """Per-game records plus batch aggregates.

    Aggregates are derived, so two reports with equal records agree on
    every statistic; `generator` names the RNG family for provenance.
    """

    config: SimConfig
    records: tuple
    generator: str = "philox"

    @property
    def games(self) -> int:
        return len(self.records)

    @property
    def wins(self) -> int:
        return sum(1 for r in self.records if r.outcome == "win")

    @property
    def win_rate(self) -> float:
        return self.wins / self.games

    @property
    def rounds_mean(self) -> float:
        return sum(r.rounds for r in self.records) / self.games

    @property
    def rounds_min(self) -> int:
        return min(r.rounds for r in self.records)

    @property
    def rounds_max(self) -> int:
        return max(r.rounds for r in self.records)

    @property
    def s_mean(self) -> float | None:
        counts = [r.s_count for r in self.records if r.s_count is not None]
        if not counts:
            return None
        return sum(counts) / len(counts)


def _client_for(config: SimConfig, index: int):
    if config.client.startswith("sweep:"):
        length = int(config.client.split(":", 1)[1])
        return ScriptedClient((index >> j) & 1 for j in range(length))
    bits = BitStream(game_stream(config.master_seed, 2 * index + 1))
    return resolve_client(config.client, bits=bits)


def _goal_met(board: Board, goal) -> bool:
    if goal.kind == "clique":
        return has_red_clique(board, goal.size)
    return find_red_factor(board, goal.size) is not None


@contextmanager
def _gc_paused():
    """Suspend cycle collection over one game.

    A mega-board game allocates millions of tuples that the collector
    rescans on every pass for no benefit (game state holds no cycles);
    pausing it roughly halves the wall time of a batch.  Refcounting
    still frees everything as it dies.
    """
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was_enabled:
            gc.enable()


def _run_single(
    config: SimConfig, index: int, transcript_dir: str | None = None
) -> GameRecord:
    goal = parse_goal(config.goal)
    board = Board(config.n)
    record = None
    if config.events is not None or transcript_dir is not None:
        record = Transcript(n=config.n, goal=config.goal, seed=config.master_seed)
    try:
        waiter = resolve_waiter(
            config.waiter, config.n, goal,
            rng=game_stream(config.master_seed, 2 * index),
        )
        client = _client_for(config, index)
    except ValueError as exc:
        raise SimConfigError(f"game {index}: {exc}") from exc
    with _gc_paused():
        rounds = play_game(
            board, waiter, client, record=record, max_rounds=config.effective_cap
        )
        won = _goal_met(board, goal)
    if transcript_dir is not None:
        record.save(os.path.join(transcript_dir, f"game_{index:05d}.json"))
    s_count = None
    if config.events is not None:
        s_count = sum(
            1
            for v in range(config.n)
            if detect_events(record, v, config.events).s
        )
    outcome = "win" if won else "survive"
    return GameRecord(index, outcome, rounds, s_count)


def run_games(
    config: SimConfig,
    *,
    workers: int = 1,
    transcript_dir: str | None = None,
) -> StatsReport:
    """Play the whole batch and aggregate, in game-index order.

    Games are independent, so any worker count produces the same report;
    workers > 1 fans the batch out over processes.  With `transcript_dir`
    every game also saves its transcript as game_<index>.json there.
    """
    if workers < 1:
        raise SimConfigError(f"workers must be >= 1, got {workers}")
    if transcript_dir is not None:
        os.makedirs(transcript_dir, exist_ok=True)
    indices = range(config.games)
    if workers == 1:
        records = [_run_single(config, i, transcript_dir) for i in indices]
    else:
        chunk = max(1, config.games // (4 * workers))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(
                pool.map(_run_single, repeat(config), indices,
                         repeat(transcript_dir), chunksize=chunk)
            )
    return StatsReport(config=config, records=tuple(records))


# -- binomial intervals --------------------------------------------------------


def wilson_interval(successes: int, trials: int, z: float) -> tuple:
    """Wilson score interval for a binomial proportion, clamped to [0, 1]."""
    if trials < 1:
        raise ValueError("interval needs at least one trial")
    if not 0 <= successes <= trials:
        raise ValueError(f"{successes} successes out of {trials} trials")
    p = successes / trials
    z2 = z * z
    denom = 1.0 + z2 / trials
    center = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    low = 0.0 if successes == 0 else max(0.0, center - half)
    high = 1.0 if successes == trials else min(1.0, center + half)
    return low, high


@dataclass(frozen=True)
class ProbeReport:
    """Empirical frequency of the late-pair event against its design bound.

    `sigma` is the Wilson halfwidth at one standard score, a plug-in
    scale for "bound + z sigma" style checks; `low`/`high` are the
    Wilson interval at the requested z.
    """

    k: int
    games: int
    successes: int
    freq: float
    low: float
    high: float
    z: float
    sigma: float
    per_event_bound: float


def estimate_T_probability(
    k: int,
    games: int,
    master_seed: int,
    *,
    z: float = 3.0,
    waiter_factory=None,
    n: int | None = None,
) -> ProbeReport:
    """Monte Carlo frequency of all late rim pairs landing red at vertex 0.

    The default waiter funnels the structural edges through forced pairs
    and leaves `ceil((k-1)(k-2)/6)` rim slots to single offers, so each
    game succeeds with probability exactly 2^-slots against a random
    client; the report carries that product as `per_event_bound`.
    """
    if games < 1:
        raise ValueError(f"games must be >= 1, got {games}")
    late = -(-((k - 1) * (k - 2)) // 6)
    successes = 0
    for i in range(games):
        waiter = waiter_factory() if waiter_factory is not None else EventProbeWaiter(k)
        board = Board(n if n is not None else waiter.board_size())
        client = RandomClient(BitStream(game_stream(master_seed, 2 * i + 1)))
        play_game(board, waiter, client)
        if late_pair_event(board, 0, k, late):
            successes += 1
    freq = successes / games
    low, high = wilson_interval(successes, games, z)
    lo1, hi1 = wilson_interval(successes, games, 1.0)
    return ProbeReport(
        k=k,
        games=games,
        successes=successes,
        freq=freq,
        low=low,
        high=high,
        z=z,
        sigma=(hi1 - lo1) / 2.0,
        per_event_bound=2.0 ** -late,
    )


@dataclass(frozen=True)
class ExpectationReport:
    """Mean S-event count per game with a normal-approximation interval."""

    stats: StatsReport
    mean: float
    low: float
    high: float
    reference: float  # n / (4k), the density heuristic for comparison
    z: float = 3.0


def estimate_S_expectation(
    config: SimConfig, *, workers: int = 1, z: float = 3.0
) -> ExpectationReport:
    """Batch mean of per-game S counts, bracketed at z standard errors."""
    if config.events is None:
        raise SimConfigError("expectation estimate needs event parameters")
    stats = run_games(config, workers=workers)
    counts = [r.s_count for r in stats.records]
    mean = sum(counts) / len(counts)
    spread = statistics.stdev(counts) if len(counts) > 1 else 0.0
    margin = z * spread / math.sqrt(len(counts))
    return ExpectationReport(
        stats=stats,
        mean=mean,
        low=mean - margin,
        high=mean + margin,
        reference=config.n / (4 * config.events.k),
        z=z,
    )


# -- deterministic writers -----------------------------------------------------


def write_stats_csv(report: StatsReport, path) -> None:
    """One row per game; identical reports write identical bytes."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["game_index", "outcome", "rounds", "s_count"])
        for r in report.records:
            writer.writerow(
                [r.game_index, r.outcome, r.rounds,
                 "" if r.s_count is None else r.s_count]
            )


def write_stats_json(report: StatsReport, path) -> None:
    """Aggregate summary as canonical JSON (sorted keys, tight separators)."""
    cfg = report.config
    doc = {
        "client": cfg.client,
        "games": report.games,
        "generator": report.generator,
        "goal": cfg.goal,
        "master_seed": cfg.master_seed,
        "n": cfg.n,
        "rounds": {
            "max": report.rounds_max,
            "mean": report.rounds_mean,
            "min": report.rounds_min,
        },
        "s_mean": report.s_mean,
        "waiter": cfg.waiter,
        "win_rate": report.win_rate,
        "wins": report.wins,
    }
    with open(path, "w") as fh:
        fh.write(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n")
