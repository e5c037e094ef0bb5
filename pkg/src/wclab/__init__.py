"""Laboratory for the two-color edge-claiming game on complete graphs.

One side offers two unclaimed edges per round, the other keeps one (red)
and discards the other (blue).  The package provides strategies that force
red cliques and red clique-factors, detectors that certify the results,
an exact small-board solver, Monte Carlo estimators for the rare-event
bounds behind the strategy analysis, a CLI, and a game service.
"""

from .board import (
    BLUE,
    RED,
    Board,
    BoardError,
    IllegalChoiceError,
    IllegalOfferError,
    ReplayError,
    Transcript,
    all_edges,
    edge,
    edge_count,
    edge_from_index,
    edge_index,
    new_board,
    replay,
)
from .strategies import (
    BadBudgetError,
    BoardTooSmallError,
    CliqueBuilder,
    ClientStrategy,
    DirtyBoardError,
    EventProbeWaiter,
    FactorWaiter,
    GoalSpec,
    GreedyDegreeWaiter,
    RandomClient,
    RandomOfferWaiter,
    ScriptUnderrunError,
    ScriptedClient,
    StagePlan,
    StrategyError,
    WaiterStrategy,
    factor_round_bound,
    parse_goal,
    plan_is_valid,
    stage_parameters,
)

__version__ = "0.1.0"
