"""Live-play session server: a human Client against an algorithmic Waiter.

Each session's truth is its transcript file; the in-memory board, waiter
state, and pending offer are all reconstructed by replaying it, so a
restarted server presents exactly the state it crashed with.  Writes go
through a per-session lock and land atomically (temp file + rename).
"""

from __future__ import annotations

import asyncio
import json
import os
import secrets
import threading
import time
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException, Response, WebSocket
from fastapi.middleware.cors import CORSMiddleware
from fastapi.websockets import WebSocketDisconnect
from pydantic import BaseModel

from .board import (
    BLUE,
    RED,
    Board,
    Transcript,
    edge,
    edge_count,
    edge_from_index,
    edge_index,
)
from .detectors import find_red_factor
from .engine import resolve_waiter
from .rng import game_stream
from .strategies import GoalSpec, parse_goal


class SessionConfigError(ValueError):
    """A session request the server refuses to start."""


MAX_SOLVER_VERTICES = 7  # exact search stays tractable through K_7


class CreateSession(BaseModel):
    n: int
    goal: str
    waiter: str
    seed: int = 0


class Choice(BaseModel):
    edge: int | list[int]


@dataclass
class _Live:
    """One session: board, waiter, transcript, and the offer on the table."""

    id: str
    n: int
    goal: GoalSpec
    waiter_id: str
    seed: int
    board: Board
    waiter: object
    transcript: Transcript
    created: float
    offer: tuple | None = None
    result: dict | None = None
    version: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock)


def _find_red_clique(board: Board, l: int):
    """First red l-clique in vertex order, or None."""
    adj = board.red_adjacency()

    def extend(clique, cands):
        if len(clique) == l:
            return tuple(clique)
        need = l - len(clique)
        for i, v in enumerate(cands):
            if len(cands) - i < need:
                return None
            nb = adj[v]
            got = extend(clique + [v], [u for u in cands[i + 1 :] if u in nb])
            if got is not None:
                return got
        return None

    return extend([], sorted(adj))


def _winning_witness(board: Board, goal: GoalSpec):
    if goal.kind == "clique":
        got = _find_red_clique(board, goal.size)
        return None if got is None else list(got)
    witness = find_red_factor(board, goal.size)
    return None if witness is None else [list(b) for b in witness.blocks]


def _build_waiter(config: CreateSession, goal: GoalSpec):
    if config.waiter == "solver_optimal" and config.n > MAX_SOLVER_VERTICES:
        raise SessionConfigError(
            f"solver_optimal plays boards up to {MAX_SOLVER_VERTICES} "
            f"vertices, got {config.n}"
        )
    try:
        return resolve_waiter(
            config.waiter, config.n, goal, rng=game_stream(config.seed, 0)
        )
    except ValueError as exc:
        raise SessionConfigError(str(exc)) from exc


def _advance(live: _Live) -> None:
    """Refresh the pending offer or settle the result after a round."""
    witness = _winning_witness(live.board, live.goal)
    if witness is not None:
        live.offer = None
        live.result = {
            "winner": "waiter",
            "rounds": live.board.round,
            "witness": witness,
        }
        live.version += 1
        return
    offer = live.waiter.next_offer(live.board) if live.board.can_continue() else None
    if offer is None:
        live.offer = None
        live.result = {"winner": "client", "rounds": live.board.round}
    else:
        live.offer = offer
    live.version += 1


def _offer_doc(offer) -> list | None:
    if offer is None:
        return None
    return sorted(edge_index(e) for e in offer)


def _turn_doc(live: _Live) -> dict:
    if live.result is not None:
        return {"result": live.result}
    return {"offer": _offer_doc(live.offer)}


def _state_doc(live: _Live) -> dict:
    color_names = {RED: "red", BLUE: "blue"}
    return {
        "id": live.id,
        "n": live.n,
        "goal": str(live.goal),
        "waiter": live.waiter_id,
        "seed": live.seed,
        "rounds": live.board.round,
        "edges": [
            {
                "index": edge_index(e),
                "u": e[0],
                "v": e[1],
                "color": color_names[color],
                "round": rnd,
            }
            for e, color, rnd in live.board.claimed_edges()
        ],
        "offer": _offer_doc(live.offer),
        "result": live.result,
    }


def _parse_edge(value, n: int) -> tuple:
    if isinstance(value, bool):
        raise SessionConfigError("edge must be an index or a [u, v] pair")
    if isinstance(value, int):
        if not 0 <= value < edge_count(n):
            raise SessionConfigError(f"edge index {value} out of range")
        return edge_from_index(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        u, v = value
        if not (isinstance(u, int) and isinstance(v, int)):
            raise SessionConfigError("edge endpoints must be integers")
        if not (0 <= u < n and 0 <= v < n) or u == v:
            raise SessionConfigError(f"no edge between {u} and {v}")
        return edge(u, v)
    raise SessionConfigError("edge must be an index or a [u, v] pair")


# -- persistence -----------------------------------------------------------


def _transcript_path(state_dir: str, sid: str) -> str:
    return os.path.join(state_dir, f"{sid}.json")


def _meta_path(state_dir: str, sid: str) -> str:
    return os.path.join(state_dir, f"{sid}.meta.json")


def _atomic_write(path: str, text: str) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _persist(live: _Live, state_dir: str) -> None:
    _atomic_write(_transcript_path(state_dir, live.id), live.transcript.to_json())


def _persist_meta(live: _Live, state_dir: str) -> None:
    doc = {
        "created": live.created,
        "id": live.id,
        "waiter": live.waiter_id,
    }
    _atomic_write(
        _meta_path(state_dir, live.id),
        json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n",
    )


def _restore_one(state_dir: str, sid: str) -> _Live:
    with open(_meta_path(state_dir, sid)) as fh:
        meta = json.load(fh)
    transcript = Transcript.load(_transcript_path(state_dir, sid))
    goal = parse_goal(transcript.goal)
    seed = transcript.seed or 0
    config = CreateSession(
        n=transcript.n, goal=transcript.goal, waiter=meta["waiter"], seed=seed
    )
    waiter = _build_waiter(config, goal)
    board = Board(transcript.n)
    live = _Live(
        id=sid,
        n=transcript.n,
        goal=goal,
        waiter_id=meta["waiter"],
        seed=seed,
        board=board,
        waiter=waiter,
        transcript=transcript,
        created=meta["created"],
    )
    for offer, choice in transcript.moves:
        planned = waiter.next_offer(board)
        if planned is None or set(planned) != set(offer):
            raise SessionConfigError(
                f"session {sid}: transcript diverges from the "
                f"{meta['waiter']} waiter's plan"
            )
        board.apply_round(offer, choice)
        waiter.observe(board, offer, choice)
    _advance(live)
    return live


def _restore_all(state_dir: str) -> dict:
    sessions = {}
    for name in sorted(os.listdir(state_dir)):
        if not name.endswith(".meta.json"):
            continue
        sid = name[: -len(".meta.json")]
        sessions[sid] = _restore_one(state_dir, sid)
    return sessions


# -- application -----------------------------------------------------------


def build_app(state_dir: str | None = None) -> FastAPI:
    """The session server, with transcripts persisted under `state_dir`."""
    state_dir = state_dir or os.environ.get("WCLAB_STATE_DIR", "wclab_sessions")
    os.makedirs(state_dir, exist_ok=True)
    app = FastAPI(title="wclab session server")
    # browser clients load the page from a different local port than the API
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    sessions: dict = _restore_all(state_dir)
    app.state.sessions = sessions
    app.state.state_dir = state_dir

    def _get(sid: str) -> _Live:
        live = sessions.get(sid)
        if live is None:
            raise HTTPException(status_code=404, detail=f"no session {sid}")
        return live

    @app.post("/sessions", status_code=201)
    def create_session(config: CreateSession):
        try:
            goal = parse_goal(config.goal)
            if goal.kind == "factor" and config.n % goal.size:
                raise SessionConfigError(
                    f"{goal} needs k | n, got n={config.n}"
                )
            waiter = _build_waiter(config, goal)
        except (SessionConfigError, ValueError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        sid = secrets.token_urlsafe(16)
        live = _Live(
            id=sid,
            n=config.n,
            goal=goal,
            waiter_id=config.waiter,
            seed=config.seed,
            board=Board(config.n),
            waiter=waiter,
            transcript=Transcript(n=config.n, goal=str(goal), seed=config.seed),
            created=time.time(),
        )
        with live.lock:
            _advance(live)
            sessions[sid] = live
            _persist_meta(live, state_dir)
            _persist(live, state_dir)
        return {"id": sid, **_turn_doc(live)}

    @app.get("/sessions/{sid}")
    def get_state(sid: str):
        live = _get(sid)
        with live.lock:
            return _state_doc(live)

    @app.post("/sessions/{sid}/choice")
    def submit_choice(sid: str, body: Choice):
        live = _get(sid)
        with live.lock:
            if live.result is not None:
                raise HTTPException(status_code=409, detail="game is over")
            try:
                chosen = _parse_edge(body.edge, live.n)
            except SessionConfigError as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from exc
            if chosen not in live.offer:
                raise HTTPException(
                    status_code=409,
                    detail=f"edge {edge_index(chosen)} is not on offer",
                )
            offer = live.offer
            live.board.apply_round(offer, chosen)
            live.transcript.record(offer, chosen)
            _persist(live, state_dir)
            live.waiter.observe(live.board, offer, chosen)
            _advance(live)
            return _turn_doc(live)

    @app.get("/sessions/{sid}/transcript")
    def get_transcript(sid: str):
        live = _get(sid)
        with live.lock:
            text = live.transcript.to_json()
        return Response(content=text, media_type="application/json")

    @app.websocket("/sessions/{sid}/stream")
    async def stream(websocket: WebSocket, sid: str):
        live = sessions.get(sid)
        if live is None:
            await websocket.close(code=4404)
            return
        await websocket.accept()
        seen = -1
        try:
            while True:
                if live.version != seen:
                    seen = live.version
                    await websocket.send_json(_turn_doc(live))
                    if live.result is not None:
                        break
                await asyncio.sleep(0.05)
        except WebSocketDisconnect:
            return
        await websocket.close()

    return app
