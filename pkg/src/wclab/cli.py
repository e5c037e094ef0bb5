"""Command-line front end: solve, simulate, verify, construct, bounds, detect, serve.

Exit codes: 0 success, 1 domain error (message on stderr), 2 usage error.
File outputs are canonical (stable field order, no timing), so identical
invocations write identical bytes; wall-clock timing goes to stdout only.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .board import Transcript, replay
from .detectors import (
    EventParams,
    IndivisibleError,
    detect_events,
    find_red_factor,
)
from .harness import (
    SimConfig,
    SimConfigError,
    run_games,
    write_stats_csv,
    write_stats_json,
)
from .lemmas import (
    LemmaCounterexample,
    doubling_ordering,
    survey_component_pair_lemma,
    union_bound_value,
    verify_good_pair_lemma,
)
from .solver import ClientWins, SolverError, solve_report


def _default_workers() -> int:
    env = os.environ.get("WCLAB_WORKERS")
    if env is not None:
        return max(1, int(env))
    return os.cpu_count() or 1


def _build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="wclab", description="Waiter-Client game laboratory"
    )
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="exact game value on a small board")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--goal", required=True, help="factor:<k> or clique:<l>")
    p.add_argument("--iso", action="store_true",
                   help="fold board symmetries into the table")
    p.add_argument("--budget", type=int, default=None,
                   help="transposition table entry limit")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=None, help="write the result as JSON")

    p = sub.add_parser("simulate", help="seeded batch of games")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--goal", default=None, help="factor:<k> or clique:<l>")
    p.add_argument("--k", type=int, default=None,
                   help="goal size shorthand: factor:<k> for the factor "
                        "waiter, clique:<k> otherwise")
    p.add_argument("--waiter", required=True)
    p.add_argument("--client", required=True)
    p.add_argument("--games", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--cap", type=int, default=None, help="round cap per game")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=None,
                   help="CSV path; a JSON aggregate lands alongside")
    p.add_argument("--transcripts", default=None,
                   help="directory for per-game transcript files")
    p.add_argument("--detect-k", type=int, default=None)
    p.add_argument("--detect-dhi", type=float, default=None)
    p.add_argument("--detect-threshold", type=int, default=None)
    p.add_argument("--detect-variant", choices=("s2", "s3"), default="s2")

    p = sub.add_parser("verify", help="brute-force ordering lemma surveys")
    p.add_argument("statistic", choices=("good-pairs", "component-pairs"))
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None)

    p = sub.add_parser("construct", help="write reference edge orderings")
    p.add_argument("kind", choices=("doubling",))
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--out", default=None, help="one edge per line, in order")

    p = sub.add_parser("bounds", help="union-bound arithmetic at scale")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--variant", choices=("s2", "s3"), required=True)

    p = sub.add_parser("detect", help="inspect a saved transcript")
    p.add_argument("what", choices=("factor", "events"))
    p.add_argument("--transcript", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--v", type=int, default=None, help="vertex (events only)")
    p.add_argument("--dhi", type=float, default=None)
    p.add_argument("--pair-threshold", type=int, default=None)
    p.add_argument("--variant", choices=("s2", "s3"), default="s2")

    p = sub.add_parser("serve", help="run the live-play session server")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--state-dir", default=None,
                   help="where session transcripts persist")

    return top


# -- subcommand bodies ---------------------------------------------------------


def _edge_text(e) -> str:
    return f"({e[0]},{e[1]})"


def _cmd_solve(args) -> int:
    workers = args.workers if args.workers is not None else _default_workers()
    kwargs = {"iso": args.iso, "workers": workers}
    if args.budget is not None:
        kwargs["budget"] = args.budget
    report = solve_report(args.n, args.goal, **kwargs)
    print(report.value)
    for i, (offer, choice) in enumerate(report.pv, start=1):
        offered = " ".join(_edge_text(e) for e in offer)
        print(f"round {i}: offer {offered} -> client keeps {_edge_text(choice)}")
    print(f"states: {report.states}")
    print(f"seconds: {report.seconds:.3f}")
    if args.out:
        value = (
            {"winner": "client", "rounds": None}
            if isinstance(report.value, ClientWins)
            else {"winner": "waiter", "rounds": report.value.rounds}
        )
        doc = {
            "goal": args.goal,
            "n": args.n,
            "pv": [
                {"client": list(choice), "offer": [list(e) for e in offer]}
                for offer, choice in report.pv
            ],
            "states": report.states,
            "value": value,
        }
        with open(args.out, "w") as fh:
            fh.write(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n")
    return 0


def _cmd_simulate(args) -> int:
    if args.goal is not None:
        goal = args.goal
    elif args.k is not None:
        goal = f"factor:{args.k}" if args.waiter == "factor" else f"clique:{args.k}"
    else:
        raise SimConfigError("simulate needs --goal or --k")
    events = None
    if args.detect_k is not None:
        if args.detect_dhi is None or args.detect_threshold is None:
            raise SimConfigError(
                "event detection needs --detect-k, --detect-dhi and "
                "--detect-threshold together"
            )
        events = EventParams(
            k=args.detect_k,
            d_hi=args.detect_dhi,
            pair_threshold=args.detect_threshold,
            variant=args.detect_variant,
        )
    config = SimConfig(
        n=args.n,
        goal=goal,
        waiter=args.waiter,
        client=args.client,
        games=args.games,
        master_seed=args.seed,
        round_cap=args.cap,
        events=events,
    )
    workers = args.workers if args.workers is not None else _default_workers()
    report = run_games(config, workers=workers, transcript_dir=args.transcripts)
    line = (
        f"games={report.games} wins={report.wins} win_rate={report.win_rate:.4f} "
        f"rounds mean={report.rounds_mean:.2f} min={report.rounds_min} "
        f"max={report.rounds_max}"
    )
    if report.s_mean is not None:
        line += f" s_mean={report.s_mean:.4f}"
    print(line)
    if args.out:
        write_stats_csv(report, args.out)
        stem, _ = os.path.splitext(args.out)
        write_stats_json(report, stem + ".json")
    return 0


def _cmd_verify(args) -> int:
    workers = args.workers if args.workers is not None else _default_workers()
    if args.statistic == "good-pairs":
        minimum = verify_good_pair_lemma(
            args.k, samples=args.samples, seed=args.seed, workers=workers
        )
    else:
        minimum = survey_component_pair_lemma(
            args.k, samples=args.samples, seed=args.seed, workers=workers
        )
    mode = "sampled" if args.samples else "exhaustive"
    print(f"{args.statistic} k={args.k} minimum={minimum} ({mode})")
    return 0


def _cmd_construct(args) -> int:
    ordering = doubling_ordering(args.t)
    print(f"doubling t={args.t} k={ordering.k} edges={len(ordering.edges)}")
    if args.out:
        with open(args.out, "w") as fh:
            for u, v in ordering.edges:
                fh.write(f"{u} {v}\n")
    return 0


def _cmd_bounds(args) -> int:
    report = union_bound_value(args.k, args.variant)
    print(f"k={report.k} variant={report.variant}")
    print(f"log2_index_set: {report.log2_index_set}")
    print(f"log2_event_bound: {report.log2_event_bound}")
    print(f"log2_union: {report.log2_union}")
    print(f"log2_target: {report.log2_target}")
    print(f"holds: {report.holds}")
    return 0


def _cmd_detect(args) -> int:
    transcript = Transcript.load(args.transcript)
    board = replay(transcript)
    if args.what == "factor":
        witness = find_red_factor(board, args.k)
        if witness is None:
            print("none")
        else:
            for block in witness.blocks:
                print(" ".join(str(v) for v in block))
        return 0
    if args.v is None or args.dhi is None or args.pair_threshold is None:
        raise SimConfigError("events detection needs --v, --dhi and --pair-threshold")
    params = EventParams(
        k=args.k,
        d_hi=args.dhi,
        pair_threshold=args.pair_threshold,
        variant=args.variant,
    )
    rep = detect_events(transcript, args.v, params)
    print(f"v={rep.v} x={rep.x} y={rep.y} s={rep.s}")
    if rep.witness is not None:
        print("witness: " + " ".join(str(u) for u in rep.witness))
    if rep.counted_pairs is not None:
        print(f"counted_pairs: {rep.counted_pairs}")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import build_app

    app = build_app(state_dir=args.state_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


_DISPATCH = {
    "solve": _cmd_solve,
    "simulate": _cmd_simulate,
    "verify": _cmd_verify,
    "construct": _cmd_construct,
    "bounds": _cmd_bounds,
    "detect": _cmd_detect,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except (
        ValueError,
        SimConfigError,
        SolverError,
        LemmaCounterexample,
        IndivisibleError,
        OSError,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
