"""Session server: lifecycle, legality, persistence, restart, streaming."""

import json
import threading

import pytest
from fastapi.testclient import TestClient

from wclab.board import Transcript, edge_from_index, replay
from wclab.service import build_app


@pytest.fixture
def state_dir(tmp_path):
    return str(tmp_path / "sessions")


@pytest.fixture
def client(state_dir):
    with TestClient(build_app(state_dir=state_dir)) as c:
        yield c


def create(client, n=7, goal="clique:3", waiter="clique_builder", seed=0):
    resp = client.post(
        "/sessions", json={"n": n, "goal": goal, "waiter": waiter, "seed": seed}
    )
    assert resp.status_code == 201, resp.text
    return resp.json()


def play_first(client, sid):
    """Always keep the first offered edge until the game settles."""
    state = client.get(f"/sessions/{sid}").json()
    doc = {"offer": state["offer"]}
    while "offer" in doc and doc["offer"] is not None:
        resp = client.post(f"/sessions/{sid}/choice", json={"edge": doc["offer"][0]})
        assert resp.status_code == 200, resp.text
        doc = resp.json()
    return doc


# -- creation ------------------------------------------------------------------


def test_create_returns_first_offer(client):
    doc = create(client, n=31, goal="clique:5")
    assert set(doc) == {"id", "offer"}
    i, j = doc["offer"]
    assert 0 <= i < j < 31 * 30 // 2


def test_create_rejects_undersized_board(client):
    resp = client.post(
        "/sessions",
        json={"n": 5, "goal": "clique:5", "waiter": "clique_builder"},
    )
    assert resp.status_code == 400
    assert "31" in resp.json()["detail"]


@pytest.mark.parametrize(
    "body",
    [
        {"n": 6, "goal": "tour:3", "waiter": "random"},
        {"n": 6, "goal": "clique:3", "waiter": "nonesuch"},
        {"n": 7, "goal": "factor:3", "waiter": "random"},
        {"n": 9, "goal": "factor:3", "waiter": "solver_optimal"},
    ],
)
def test_create_rejects_bad_configs(client, body):
    resp = client.post("/sessions", json=body)
    assert resp.status_code == 400


def test_solver_waiter_session_starts(client):
    # the solver reads this as a lost game and still offers best-effort play
    doc = create(client, n=6, goal="factor:3", waiter="solver_optimal")
    assert doc["offer"] is not None


# -- state and play ------------------------------------------------------------


def test_fresh_state(client):
    sid = create(client)["id"]
    state = client.get(f"/sessions/{sid}").json()
    assert state["rounds"] == 0
    assert state["edges"] == []
    assert state["result"] is None
    assert len(state["offer"]) == 2


def test_rounds_balance_colors(client):
    sid = create(client)["id"]
    offer = client.get(f"/sessions/{sid}").json()["offer"]
    for _ in range(2):
        doc = client.post(f"/sessions/{sid}/choice", json={"edge": offer[0]}).json()
        offer = doc["offer"]
    state = client.get(f"/sessions/{sid}").json()
    reds = [e for e in state["edges"] if e["color"] == "red"]
    blues = [e for e in state["edges"] if e["color"] == "blue"]
    assert len(reds) == len(blues) == state["rounds"] == 2
    assert {e["round"] for e in reds} == {1, 2}


def test_builder_game_ends_with_witness(client):
    sid = create(client)["id"]
    doc = play_first(client, sid)
    result = doc["result"]
    assert result["winner"] == "waiter"
    assert result["rounds"] == 4
    assert len(result["witness"]) == 3
    state = client.get(f"/sessions/{sid}").json()
    assert state["result"] == result
    assert state["offer"] is None


def test_choice_after_terminal_conflicts(client):
    sid = create(client)["id"]
    play_first(client, sid)
    resp = client.post(f"/sessions/{sid}/choice", json={"edge": 0})
    assert resp.status_code == 409


def test_illegal_edge_leaves_state_unchanged(client):
    sid = create(client)["id"]
    before = client.get(f"/sessions/{sid}").json()
    bad = next(
        i for i in range(21) if i not in before["offer"]
    )
    for payload in (bad, [9, 9], [0, 99], "zero", 10**6):
        resp = client.post(f"/sessions/{sid}/choice", json={"edge": payload})
        assert resp.status_code in (409, 422)
    assert client.get(f"/sessions/{sid}").json() == before


def test_edge_accepted_as_pair(client):
    sid = create(client)["id"]
    offer = client.get(f"/sessions/{sid}").json()["offer"]
    u, v = edge_from_index(offer[1])
    doc = client.post(f"/sessions/{sid}/choice", json={"edge": [v, u]}).json()
    assert "offer" in doc
    state = client.get(f"/sessions/{sid}").json()
    red = [e for e in state["edges"] if e["color"] == "red"]
    assert red[0]["index"] == offer[1]


def test_unknown_session_is_404(client):
    assert client.get("/sessions/nope").status_code == 404
    assert client.post("/sessions/nope/choice", json={"edge": 0}).status_code == 404
    assert client.get("/sessions/nope/transcript").status_code == 404


# -- persistence ---------------------------------------------------------------


def test_transcript_round_trips(client):
    sid = create(client)["id"]
    offer = client.get(f"/sessions/{sid}").json()["offer"]
    client.post(f"/sessions/{sid}/choice", json={"edge": offer[0]})
    text = client.get(f"/sessions/{sid}/transcript").text
    t = Transcript.from_json(text)
    assert t.n == 7 and len(t.moves) == 1
    board = replay(t)
    assert len(board.red_edges()) == 1


def test_restart_reconstructs_sessions(client, state_dir):
    sid = create(client)["id"]
    state = client.get(f"/sessions/{sid}").json()
    for _ in range(3):
        doc = client.post(
            f"/sessions/{sid}/choice", json={"edge": state["offer"][0]}
        ).json()
        state = client.get(f"/sessions/{sid}").json()
    with TestClient(build_app(state_dir=state_dir)) as reborn:
        assert reborn.get(f"/sessions/{sid}").json() == state


def test_restart_restores_random_waiter_stream(state_dir):
    with TestClient(build_app(state_dir=state_dir)) as c:
        sid = create(c, n=9, waiter="random", seed=42)["id"]
        offer = c.get(f"/sessions/{sid}").json()["offer"]
        doc = c.post(f"/sessions/{sid}/choice", json={"edge": offer[0]}).json()
        upcoming = doc["offer"]
    with TestClient(build_app(state_dir=state_dir)) as c:
        assert c.get(f"/sessions/{sid}").json()["offer"] == upcoming


def test_restart_restores_terminal_result(client, state_dir):
    sid = create(client)["id"]
    result = play_first(client, sid)["result"]
    with TestClient(build_app(state_dir=state_dir)) as reborn:
        state = reborn.get(f"/sessions/{sid}").json()
        assert state["result"] == result
        assert reborn.post(
            f"/sessions/{sid}/choice", json={"edge": 0}
        ).status_code == 409


def test_tampered_transcript_refuses_restore(client, state_dir):
    import os

    sid = create(client)["id"]
    offer = client.get(f"/sessions/{sid}").json()["offer"]
    client.post(f"/sessions/{sid}/choice", json={"edge": offer[0]})
    path = os.path.join(state_dir, f"{sid}.json")
    doc = json.loads(open(path).read())
    claimed = set(doc["moves"][0]["offer"]) | {doc["moves"][0]["client"]}
    doc["moves"][0]["offer"] = sorted(set(range(21)) - claimed)[:2]
    open(path, "w").write(json.dumps(doc))
    with pytest.raises(ValueError, match="diverges"):
        build_app(state_dir=state_dir)


# -- concurrency ---------------------------------------------------------------


def test_duplicate_submissions_one_winner(client):
    sid = create(client)["id"]
    offer = client.get(f"/sessions/{sid}").json()["offer"]
    codes = []
    barrier = threading.Barrier(2)

    def submit():
        barrier.wait()
        resp = client.post(f"/sessions/{sid}/choice", json={"edge": offer[0]})
        codes.append(resp.status_code)

    threads = [threading.Thread(target=submit) for _ in range(2)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert sorted(codes) == [200, 409]
    assert client.get(f"/sessions/{sid}").json()["rounds"] == 1


# -- streaming -----------------------------------------------------------------


def test_websocket_streams_turns(client):
    sid = create(client)["id"]
    with client.websocket_connect(f"/sessions/{sid}/stream") as ws:
        first = ws.receive_json()
        assert "offer" in first
        doc = {"offer": first["offer"]}
        while doc.get("offer") is not None:
            client.post(f"/sessions/{sid}/choice", json={"edge": doc["offer"][0]})
            doc = ws.receive_json()
        assert doc["result"]["winner"] == "waiter"


def test_websocket_unknown_session_closes(client):
    with pytest.raises(Exception):
        with client.websocket_connect("/sessions/ghost/stream") as ws:
            ws.receive_json()
