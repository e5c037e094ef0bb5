import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from itertools import combinations

import numpy as np

from wclab.board import Board, Transcript, edge, new_board, replay
from wclab.detectors import (
    BadOrderingError,
    EncodingVector,
    EventParams,
    IndivisibleError,
    NeighborhoodCapError,
    NotEncodableError,
    check_T,
    classify_degrees,
    component_pair_counts,
    degree_threshold,
    detect_events,
    encode_history,
    find_red_factor,
    good_pair_counts,
    late_pair_event,
)
from wclab.engine import play_game, resolve_client, resolve_waiter, seeded_game
from wclab.rng import BitStream, game_stream

from oracles import bfs_component_pairs, naive_factor_search, triple_scan_good_pairs


def paint_red(n, red_edges):
    """Board where exactly `red_edges` are red, junk partners blue."""
    board = new_board(n)
    junk = iter(
        e
        for e in ((a, b) for b in range(n) for a in range(b))
        if e not in set(red_edges)
    )
    for e in red_edges:
        board.apply_round((e, next(junk)), e)
    return board


# ---------------------------------------------------------------- factors


def test_two_triangles_found():
    board = paint_red(6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)])
    w = find_red_factor(board, 3)
    assert w is not None
    assert w.blocks == ((0, 1, 2), (3, 4, 5))


def test_six_cycle_has_no_triangle_factor():
    board = paint_red(6, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 5), (0, 5)])
    assert find_red_factor(board, 3) is None


def test_indivisible_rejected():
    with pytest.raises(IndivisibleError):
        find_red_factor(new_board(7), 3)


def test_isolated_vertex_fails_fast():
    board = paint_red(9, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)])
    assert find_red_factor(board, 3) is None  # 6, 7, 8 have no red edges


def _random_red_board(n, density, rng):
    edges = [(a, b) for b in range(n) for a in range(b)]
    keep = [e for e in edges if rng.random() < density]
    if len(keep) % 2:
        keep.pop()
    board = new_board(n)
    for i in range(0, len(keep), 2):
        board.apply_round((keep[i], keep[i + 1]), keep[i])
    return board, keep[::2]


def _planted_red_board(n, k, rng):
    """Red graph containing a hidden factor plus a few noise edges."""
    perm = list(rng.permutation(n))
    keep = set()
    for i in range(0, n, k):
        for a, b in combinations(perm[i : i + k], 2):
            keep.add(edge(a, b))
    slack = n * (n - 1) // 4 - len(keep)  # junk partners must stay available
    rest = [e for e in ((a, b) for b in range(n) for a in range(b)) if e not in keep]
    extra = rng.integers(0, slack + 1) if slack > 0 else 0
    picked = rng.choice(len(rest), size=int(extra), replace=False) if extra else []
    keep.update(rest[int(i)] for i in picked)
    reds = sorted(keep)
    return paint_red(n, reds), reds


@pytest.mark.parametrize("n,k,games", [(12, 3, 60), (8, 4, 40)])
def test_factor_detector_matches_partition_enumeration(n, k, games):
    rng = np.random.default_rng(2024_000 + n)
    hits = 0
    for g in range(games):
        if g % 2:
            board, reds = _planted_red_board(n, k, rng)
        else:
            board, reds = _random_red_board(n, rng.uniform(0.4, 0.9), rng)
        want = naive_factor_search(n, k, reds)
        got = find_red_factor(board, k)
        assert (got is None) == (want is None)
        if got is not None:
            hits += 1
            flat = [v for blk in got.blocks for v in blk]
            assert sorted(flat) == list(range(n))
            for blk in got.blocks:
                for a, b in combinations(blk, 2):
                    assert board.color_of(edge(a, b)) == 1
    assert 0 < hits < games  # both answers occur


def test_witness_iterates_blocks():
    board = paint_red(6, [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)])
    w = find_red_factor(board, 3)
    assert list(w) == [(0, 1, 2), (3, 4, 5)]


# ---------------------------------------------------------------- degrees


def test_degree_threshold_values():
    # exponents: k/6 - k/(2 log2 k) and k/3 - k/(2 log2 k)
    assert degree_threshold(64, "s2") == pytest.approx(2 ** (64 / 6 - 32 / 6))
    assert degree_threshold(64, "s3") == pytest.approx(2 ** (64 / 3 - 32 / 6))
    assert degree_threshold(100, "s3") > degree_threshold(100, "s2")
    with pytest.raises(ValueError):
        degree_threshold(100, "s4")


def test_classify_degrees_recount():
    board, waiter, client = seeded_game(30, "factor:3", "random", "random", 99)
    # random waiter fills the board; stop early for a midgame snapshot
    play_game(board, waiter, client, max_rounds=80)
    report = classify_degrees(board, d_hi=6.0)
    adj = board.red_adjacency()
    for v in range(30):
        assert report.degrees[v] == len(adj[v])
    assert report.high == tuple(len(adj[v]) >= 6.0 for v in range(30))
    assert report.high_count == sum(report.high)


def test_classify_degrees_empty_and_star():
    empty = classify_degrees(new_board(5), d_hi=1)
    assert empty.high_count == 0 and empty.degrees == (0,) * 5
    star = paint_red(8, [(0, 1), (0, 2), (0, 3), (0, 4)])
    report = classify_degrees(star, d_hi=2)
    assert report.high_count == 1 and report.high[0]
    blocks = classify_degrees(star, d_hi=2, partition=[(0, 1), (2, 3), (4, 5)])
    assert blocks.block_high == (True, False, False)


# ---------------------------------------------------------------- pair counts


def _stamps(order):
    return {edge(a, b): t for t, (a, b) in enumerate(order, start=1)}


def test_good_pairs_triangle_order():
    counts = good_pair_counts(_stamps([(0, 1), (0, 2), (1, 2)]), (0, 1, 2))
    assert counts == {0: 1, 1: 0, 2: 0}


def test_component_pairs_triangle_order():
    counts = component_pair_counts(_stamps([(0, 1), (0, 2), (1, 2)]), (0, 1, 2))
    assert counts == {0: 1, 1: 1, 2: 1}


def test_component_pairs_doubling_k4():
    order = [(0, 1), (2, 3), (0, 2), (0, 3), (1, 2), (1, 3)]
    counts = component_pair_counts(_stamps(order), (0, 1, 2, 3))
    assert counts == {0: 3, 1: 3, 2: 3, 3: 3}


def test_missing_and_tied_stamps_rejected():
    stamps = _stamps([(0, 1), (0, 2)])
    with pytest.raises(BadOrderingError):
        good_pair_counts(stamps, (0, 1, 2))
    stamps[edge(1, 2)] = stamps[edge(0, 2)]
    with pytest.raises(BadOrderingError):
        component_pair_counts(stamps, (0, 1, 2))


@given(st.integers(3, 8), st.randoms(use_true_random=False))
@settings(max_examples=60, deadline=None)
def test_pair_counts_against_oracles(k, pyrng):
    order = list(combinations(range(k), 2))
    pyrng.shuffle(order)
    stamps = _stamps(order)
    clique = tuple(range(k))
    good = good_pair_counts(stamps, clique)
    comp = component_pair_counts(stamps, clique)
    assert good == triple_scan_good_pairs(stamps, clique)
    assert comp == bfs_component_pairs(stamps, clique)
    assert sum(good.values()) == k * (k - 1) * (k - 2) // 6
    for v in clique:
        assert good[v] <= comp[v] <= (k - 1) * (k - 2) // 2


def test_pair_counts_accept_any_vertex_labels():
    order = [(4, 9), (4, 7), (7, 9)]
    counts = good_pair_counts(_stamps(order), (9, 4, 7))
    assert counts == {4: 1, 9: 0, 7: 0}


# ---------------------------------------------------------------- events

JUNK = [(4, 5), (4, 6), (4, 7), (4, 8), (4, 9), (5, 6), (5, 7), (5, 8)]


def _transcript(n, red_order, junk=JUNK):
    t = Transcript(n=n, goal="clique:4")
    for e, j in zip(red_order, junk):
        t.record((e, j), e)
    return t


SPOKE_FIRST_K4 = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def test_detect_events_spoke_first_clique():
    t = _transcript(10, SPOKE_FIRST_K4)
    params = EventParams(k=4, d_hi=99.0, pair_threshold=1)
    rep = detect_events(t, 0, params)
    assert rep.x and rep.y and rep.s
    assert rep.witness == (0, 1, 2, 3)
    assert rep.counted_pairs == 3  # every rim lands after both its spokes


def test_detect_events_threshold_can_fail():
    t = _transcript(10, SPOKE_FIRST_K4)
    params = EventParams(k=4, d_hi=99.0, pair_threshold=4)
    rep = detect_events(t, 0, params)
    assert rep.x and not rep.y and not rep.s


def test_detect_events_x_gate():
    t = _transcript(10, SPOKE_FIRST_K4)
    params = EventParams(k=4, d_hi=2.0, pair_threshold=1)
    rep = detect_events(t, 0, params)
    assert not rep.x and not rep.s


def test_detect_events_low_degree_short_circuit():
    t = _transcript(10, [(0, 1), (0, 2), (1, 2)])
    params = EventParams(k=4, d_hi=99.0, pair_threshold=1)
    rep = detect_events(t, 0, params)
    assert rep.x and not rep.y and rep.witness is None


def test_detect_events_s3_requires_low_degree_clique():
    spread = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3), (1, 4), (1, 5)]
    junk = [(6, 7), (6, 8), (6, 9), (7, 8), (7, 9), (8, 9), (5, 6), (5, 7)]
    t = _transcript(10, spread, junk)
    loose = EventParams(k=4, d_hi=6.0, pair_threshold=1, variant="s3")
    assert detect_events(t, 0, loose).s
    tight = EventParams(k=4, d_hi=4.5, pair_threshold=1, variant="s3")
    rep = detect_events(t, 0, tight)
    assert rep.x and not rep.y  # vertex 1 (degree 5) is now high


def test_detect_events_neighborhood_cap():
    t = _transcript(10, SPOKE_FIRST_K4)
    params = EventParams(k=4, d_hi=99.0, pair_threshold=1, neighborhood_cap=2)
    with pytest.raises(NeighborhoodCapError):
        detect_events(t, 0, params)


def test_event_params_validation():
    with pytest.raises(ValueError):
        EventParams(k=2, d_hi=1.0, pair_threshold=1)
    with pytest.raises(ValueError):
        EventParams(k=4, d_hi=1.0, pair_threshold=1, variant="s9")


# ---------------------------------------------------------------- encoding

# Clique {0,1,2,3} around v=0 where the rim arrives before any spoke.
# Encoding this by earliest-connector order gives two entries hosted at
# the same neighbor; swapping their order would shrink the second slot,
# which is exactly the shape check_T must refuse.
RIM_FIRST_K4 = [(1, 3), (1, 2), (2, 3), (0, 1), (0, 2), (0, 3)]


def _rim_first_transcript():
    return _transcript(10, RIM_FIRST_K4)


def _params4():
    return EventParams(k=4, d_hi=4.0, pair_threshold=1)


def test_encoder_round_trip_on_rim_first_history():
    t = _rim_first_transcript()
    vec = encode_history(t, (0, 1, 2, 3), 0, _params4())
    assert vec.ys == (1, 1, 2)
    assert vec.zs == (2, 2)
    assert check_T(t, 0, vec, _params4())


def test_same_host_shrinking_slot_rejected():
    t = _rim_first_transcript()
    bad = EncodingVector(ys=(1, 2, 1), zs=(2, 2))
    # decodes to the same vertex set and satisfies every positional check,
    # but the second visit to host 1 uses a smaller slot than the first
    assert not check_T(t, 0, bad, _params4())


def test_spoke_first_round_trip():
    t = _transcript(10, SPOKE_FIRST_K4)
    params = EventParams(k=4, d_hi=4.0, pair_threshold=1)
    vec = encode_history(t, (0, 1, 2, 3), 0, params)
    assert vec.zs == (1, 1)  # star history: v hosts everything
    assert vec.ys == (1, 2, 3)
    assert check_T(t, 0, vec, params)


def test_encoding_vector_validation():
    with pytest.raises(ValueError):
        EncodingVector(ys=(1, 2), zs=(1, 1))  # length mismatch
    with pytest.raises(ValueError):
        EncodingVector(ys=(0, 1, 1), zs=(1, 1))  # slots start at 1
    with pytest.raises(ValueError):
        EncodingVector(ys=(1, 1, 1), zs=(3, 1))  # z_1 <= 2
    vec = EncodingVector(ys=(1, 1, 1), zs=(1, 3))  # z_2 may reach 3
    assert vec.zs == (1, 3)


def test_not_encodable_when_slot_exceeds_cap():
    t = _transcript(10, SPOKE_FIRST_K4)
    params = EventParams(k=4, d_hi=3.0, pair_threshold=1)  # cap = 2 slots
    with pytest.raises(NotEncodableError):
        encode_history(t, (0, 1, 2, 3), 0, params)


def test_encode_rejects_nonclique():
    t = _transcript(10, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (6, 7)])
    with pytest.raises(ValueError):
        encode_history(t, (0, 1, 2, 3), 0, _params4())
    with pytest.raises(ValueError):
        encode_history(_rim_first_transcript(), (1, 2, 3), 0, _params4())


def test_check_T_rejects_wrong_host_and_high_degree():
    t = _rim_first_transcript()
    vec = encode_history(t, (0, 1, 2, 3), 0, _params4())
    assert not check_T(t, 0, EncodingVector(vec.ys, (1, 2)), _params4())
    tight = EventParams(k=4, d_hi=3.0, pair_threshold=1)
    assert not check_T(t, 0, vec, tight)  # every clique vertex has degree 3
    steep = EventParams(k=4, d_hi=4.0, pair_threshold=5)
    assert not check_T(t, 0, vec, steep)


def test_check_T_rejects_out_of_range_slots():
    t = _rim_first_transcript()
    vec = EncodingVector(ys=(1, 1, 7), zs=(2, 2))
    assert not check_T(t, 0, vec, _params4())


def test_interleaved_layout():
    vec = EncodingVector(ys=(1, 1, 2), zs=(2, 2))
    assert vec.interleaved() == (1, 2, 1, 2, 2)


def _simulate_qualifying(k, n, games, master_seed):
    """Random games whose boards contain detectable events; yields found ones."""
    params = EventParams(k=k, d_hi=float(n), pair_threshold=1)
    found = []
    for g in range(games):
        board, waiter, client = seeded_game(n, f"factor:{k}", "random", "random", master_seed, g)
        t = Transcript(n=n, goal=f"factor:{k}", seed=master_seed)
        play_game(board, waiter, client, record=t)
        for v in range(n):
            rep = detect_events(t, v, params)
            if rep.s:
                found.append((t, v, rep.witness, params))
                break
    return found


@pytest.mark.parametrize("k,n", [(3, 10), (4, 12)])
def test_encoder_output_verifies_on_simulated_histories(k, n):
    found = _simulate_qualifying(k, n, 25, 7_000 + k)
    assert len(found) >= 15
    for t, v, clique, params in found:
        vec = encode_history(t, clique, v, params)
        assert len(vec.ys) == k - 1
        assert check_T(t, v, vec, params)


def test_check_T_wrong_vertex_is_false():
    t = _transcript(10, SPOKE_FIRST_K4)
    params = EventParams(k=4, d_hi=4.0, pair_threshold=1)
    vec = encode_history(t, (0, 1, 2, 3), 0, params)
    assert not check_T(t, 5, vec, params)  # vertex 5 has no red edges


# ---------------------------------------------------------------- late pairs


def test_late_pair_event_counts_rims_after_spokes():
    board = paint_red(10, SPOKE_FIRST_K4)
    assert late_pair_event(board, 0, 4, 1)
    assert late_pair_event(board, 0, 4, 3)
    assert not late_pair_event(board, 0, 4, 4)


def test_late_pair_event_early_rims():
    board = paint_red(10, RIM_FIRST_K4)
    assert late_pair_event(board, 0, 4, 0)
    assert not late_pair_event(board, 0, 4, 1)


def test_late_pair_event_needs_full_wheel():
    board = paint_red(10, [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)])
    assert not late_pair_event(board, 0, 4, 1)  # rim (2,3) missing
    blue_rim = new_board(10)
    for e in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3)]:
        blue_rim.apply_round((e, (4 + e[0], 4 + e[1])), e)
    blue_rim.apply_round(((2, 3), (8, 9)), (8, 9))  # rim goes blue
    assert not late_pair_event(blue_rim, 0, 4, 1)
