"""Batch harness: reproducibility, outcomes, intervals, writers."""

import math

import pytest
from hypothesis import given, strategies as st

from wclab.board import Board
from wclab.detectors import EventParams
from wclab.engine import play_game, seeded_game
from wclab.harness import (
    ExpectationReport,
    ProbeReport,
    SimConfig,
    SimConfigError,
    estimate_S_expectation,
    estimate_T_probability,
    run_games,
    wilson_interval,
    write_stats_csv,
    write_stats_json,
)
from wclab.strategies import WaiterStrategy


def small_config(**overrides):
    base = dict(n=8, goal="clique:3", waiter="random", client="random",
                games=4, master_seed=11)
    base.update(overrides)
    return SimConfig(**base)


# -- configuration -------------------------------------------------------------


def test_zero_games_rejected():
    with pytest.raises(SimConfigError, match="games"):
        small_config(games=0)


def test_bad_round_cap_rejected():
    with pytest.raises(SimConfigError, match="cap"):
        small_config(round_cap=0)


def test_bad_goal_rejected():
    with pytest.raises(SimConfigError):
        small_config(goal="tour:3")


@pytest.mark.parametrize("client", ["sweep:", "sweep:x", "sweep:0"])
def test_malformed_sweep_client(client):
    with pytest.raises(SimConfigError, match="sweep"):
        small_config(client=client)


def test_sweep_script_space_too_small():
    with pytest.raises(SimConfigError, match="distinct"):
        small_config(client="sweep:2", games=5)


def test_default_round_cap_is_edge_pairs():
    assert small_config().effective_cap == 8 * 7 // 4
    assert small_config(round_cap=9).effective_cap == 9


def test_config_error_names_the_game():
    cfg = small_config(n=4, goal="clique:5", waiter="clique_builder", games=1)
    with pytest.raises(SimConfigError, match="game 0"):
        run_games(cfg)


def test_bad_worker_count():
    with pytest.raises(SimConfigError, match="workers"):
        run_games(small_config(), workers=0)


# -- outcomes ------------------------------------------------------------------


def test_sweep_exhausts_all_scripts():
    """The triangle builder wins round 4 against every length-4 script."""
    cfg = SimConfig(n=12, goal="clique:3", waiter="clique_builder",
                    client="sweep:4", games=16, master_seed=0)
    rep = run_games(cfg)
    assert [r.game_index for r in rep.records] == list(range(16))
    assert all(r.outcome == "win" and r.rounds == 4 for r in rep.records)
    assert rep.win_rate == 1.0
    assert rep.rounds_mean == 4.0


def test_unreachable_goal_is_survival():
    # K_4 on four vertices needs all six edges red; three rounds cannot do it
    cfg = small_config(n=4, goal="clique:4", games=3)
    rep = run_games(cfg)
    assert all(r.outcome == "survive" for r in rep.records)
    assert rep.rounds_max == cfg.effective_cap == 3
    assert rep.wins == 0 and rep.win_rate == 0.0


def test_matches_seeded_game_streams():
    """Game i of a batch replays the engine's seeded single game exactly."""
    cfg = small_config(n=10, games=3, master_seed=77)
    rep = run_games(cfg)
    for i, rec in enumerate(rep.records):
        board, waiter, client = seeded_game(10, "clique:3", "random", "random", 77, i)
        rounds = play_game(board, waiter, client, max_rounds=cfg.effective_cap)
        assert rounds == rec.rounds
        assert len(board.red_edges()) == len(board.blue_edges()) == rounds


def test_transcripts_saved_and_conserved(tmp_path):
    """Dumped games replay cleanly and their streams are independent."""
    from wclab.board import Transcript, replay

    cfg = small_config(n=17, games=2, master_seed=9)
    rep = run_games(cfg, transcript_dir=str(tmp_path))
    choices = []
    for rec in rep.records:
        t = Transcript.load(tmp_path / f"game_{rec.game_index:05d}.json")
        board = replay(t)
        assert len(t.moves) == rec.rounds
        assert len(board.red_edges()) == len(board.blue_edges()) == rec.rounds
        choices.append([c for _, c in t.moves[:64]])
    assert len(choices[0]) == 64
    assert choices[0] != choices[1]


def test_records_without_events_have_no_counts():
    rep = run_games(small_config(games=2))
    assert all(r.s_count is None for r in rep.records)
    assert rep.s_mean is None


# -- event counting ------------------------------------------------------------

LOOSE = EventParams(k=3, d_hi=40.0, pair_threshold=1, variant="s2")


def test_event_counts_zero_when_every_vertex_is_high():
    ev = EventParams(k=3, d_hi=0.0, pair_threshold=1, variant="s2")
    rep = run_games(small_config(n=12, games=3, events=ev))
    assert [r.s_count for r in rep.records] == [0, 0, 0]
    assert rep.s_mean == 0.0


def test_event_counts_zero_above_pair_ceiling():
    # a K_3 corner admits at most C(2,2) = 1 counted pair
    ev = EventParams(k=3, d_hi=40.0, pair_threshold=2, variant="s2")
    rep = run_games(small_config(n=12, games=3, events=ev))
    assert [r.s_count for r in rep.records] == [0, 0, 0]


def test_expectation_needs_event_params():
    with pytest.raises(SimConfigError, match="event"):
        estimate_S_expectation(small_config())


def test_pinned_expectation_mixed_regime():
    """Capped random play on 30 vertices, cutoff 6: the mean is frozen."""
    ev = EventParams(k=3, d_hi=6.0, pair_threshold=1, variant="s2")
    cfg = SimConfig(n=30, goal="clique:3", waiter="random", client="random",
                    games=40, master_seed=2026, round_cap=60, events=ev)
    exp = estimate_S_expectation(cfg)
    assert isinstance(exp, ExpectationReport)
    assert exp.mean == 4.325
    assert exp.reference == 30 / 12
    assert exp.low < exp.mean < exp.high
    counts = [r.s_count for r in exp.stats.records]
    assert min(counts) >= 0 and max(counts) <= 30


# -- worker invariance ---------------------------------------------------------


def test_workers_do_not_change_records(tmp_path):
    cfg = small_config(n=12, games=6, events=LOOSE, master_seed=5)
    one = run_games(cfg, workers=1)
    two = run_games(cfg, workers=2)
    assert one.records == two.records
    for rep, tag in ((one, "a"), (two, "b")):
        write_stats_csv(rep, tmp_path / f"{tag}.csv")
        write_stats_json(rep, tmp_path / f"{tag}.json")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_csv_bytes_exact(tmp_path):
    cfg = SimConfig(n=12, goal="clique:3", waiter="clique_builder",
                    client="sweep:4", games=2, master_seed=0)
    write_stats_csv(run_games(cfg), tmp_path / "r.csv")
    assert (tmp_path / "r.csv").read_text() == (
        "game_index,outcome,rounds,s_count\n"
        "0,win,4,\n"
        "1,win,4,\n"
    )


def test_json_summary_fields(tmp_path):
    rep = run_games(small_config(games=2))
    write_stats_json(rep, tmp_path / "r.json")
    text = (tmp_path / "r.json").read_text()
    assert text.endswith("\n")
    import json

    doc = json.loads(text)
    assert doc["games"] == 2
    assert doc["generator"] == "philox"
    assert doc["s_mean"] is None
    assert 0.0 <= doc["win_rate"] <= 1.0


# -- intervals -----------------------------------------------------------------


def test_wilson_pinned_values():
    low, high = wilson_interval(0, 10, 2.0)
    assert low == 0.0 and 0.0 < high < 0.5
    low, high = wilson_interval(10, 10, 2.0)
    assert high == 1.0 and 0.5 < low < 1.0
    low, high = wilson_interval(5, 10, 0.0)
    assert low == high == 0.5


def test_wilson_validation():
    with pytest.raises(ValueError):
        wilson_interval(1, 0, 1.0)
    with pytest.raises(ValueError):
        wilson_interval(5, 4, 1.0)


@given(
    trials=st.integers(1, 500),
    z=st.floats(0.1, 6.0),
    data=st.data(),
)
def test_wilson_brackets_the_estimate(trials, z, data):
    successes = data.draw(st.integers(0, trials))
    low, high = wilson_interval(successes, trials, z)
    p = successes / trials
    assert 0.0 <= low <= p <= high <= 1.0
    wider_low, wider_high = wilson_interval(successes, trials, z + 1.0)
    assert wider_low <= low and high <= wider_high


# -- probability probes --------------------------------------------------------


def test_probe_frequency_tracks_design_bound():
    probe = estimate_T_probability(4, 1500, 7)
    assert isinstance(probe, ProbeReport)
    assert probe.per_event_bound == 0.5
    assert probe.successes == round(probe.freq * probe.games)
    assert probe.low <= probe.freq <= probe.high
    assert abs(probe.freq - 0.5) <= 4 * probe.sigma
    assert probe.sigma < 0.02


def test_probe_k5_quarter_bound():
    probe = estimate_T_probability(5, 1500, 99)
    assert probe.per_event_bound == 0.25
    assert abs(probe.freq - 0.25) <= 4 * probe.sigma


class _JunkWaiter(WaiterStrategy):
    """Offers a few edges far from vertex 0, then stops."""

    def __init__(self):
        super().__init__()
        self._turn = 0

    def _plan_sweep(self, board):
        if self._turn >= 3:
            return None
        a = 4 + self._turn
        self._turn += 1
        return [((a, a + 1), (a, a + 2))]

    def _absorb(self, board, offers, choices):
        pass


def test_probe_degenerate_waiter_never_succeeds():
    probe = estimate_T_probability(
        4, 50, 3, waiter_factory=_JunkWaiter, n=12
    )
    assert probe.successes == 0
    assert probe.freq == 0.0 and probe.low == 0.0


def test_probe_validation():
    with pytest.raises(ValueError, match="games"):
        estimate_T_probability(4, 0, 1)
