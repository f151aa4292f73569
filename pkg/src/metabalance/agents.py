"""Heuristic gameplay policies: bounded exhaustive search over one turn.

An agent scores candidate end-of-turn states with a linear heuristic and
commits to the best action sequence it can find within its node budget.
Two weight presets approximate the classic archetypes: the aggro preset
chases face damage, the control preset values board command and cards.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from . import _kernels as K
from .cards import CardPool, Deck
from .engine import Action, EngineContext, GameState, Outcome
from .errors import ConfigError, TerminalError


class Style(str, Enum):
    AGGRO = "aggro"
    CONTROL = "control"


@dataclass(frozen=True)
class HeuristicWeights:
    """Weights over state features, from the acting player's perspective.

    Scores are computed as (my reading - opponent's reading), which makes
    them zero-sum regardless of the individual values. ``lethal_bonus``
    must dwarf any reachable feature combination so that winning lines
    always dominate.
    """

    enemy_hero_damage: float
    own_board_attack: float
    own_board_health: float
    enemy_board_attack: float
    enemy_board_health: float
    own_hero_hp: float
    card_advantage: float
    lethal_bonus: float = 1e9

    def __post_init__(self):
        vals = (self.enemy_hero_damage, self.own_board_attack, self.own_board_health,
                self.enemy_board_attack, self.enemy_board_health, self.own_hero_hp,
                self.card_advantage, self.lethal_bonus)
        if not all(math.isfinite(v) for v in vals):
            raise ConfigError("heuristic weights must be finite")
        if self.lethal_bonus <= 1e6:
            raise ConfigError("lethal_bonus must strictly dominate feature scores")

    def as_vector(self) -> np.ndarray:
        return np.array([
            self.enemy_hero_damage, self.own_board_attack, self.own_board_health,
            self.enemy_board_attack, self.enemy_board_health, self.own_hero_hp,
            self.card_advantage, self.lethal_bonus,
        ], dtype=np.float64)


AGGRO_WEIGHTS = HeuristicWeights(
    enemy_hero_damage=4.0,
    own_board_attack=1.0,
    own_board_health=0.5,
    enemy_board_attack=-1.0,
    enemy_board_health=-0.5,
    own_hero_hp=0.5,
    card_advantage=0.5,
)

CONTROL_WEIGHTS = HeuristicWeights(
    enemy_hero_damage=1.0,
    own_board_attack=1.5,
    own_board_health=1.25,
    enemy_board_attack=-2.0,
    enemy_board_health=-1.5,
    own_hero_hp=1.0,
    card_advantage=2.0,
)

DEFAULT_NODE_BUDGET = 10_000


@dataclass(frozen=True)
class AgentSpec:
    style: Style
    weights: HeuristicWeights
    node_budget: int = DEFAULT_NODE_BUDGET

    def __post_init__(self):
        if self.node_budget < 1:
            raise ConfigError("node_budget must be >= 1")

    @staticmethod
    def for_style(style, node_budget: int = DEFAULT_NODE_BUDGET) -> "AgentSpec":
        style = Style(style)
        weights = AGGRO_WEIGHTS if style is Style.AGGRO else CONTROL_WEIGHTS
        return AgentSpec(style=style, weights=weights, node_budget=node_budget)


def load_agent(payload: dict) -> AgentSpec:
    """Build an AgentSpec from a config mapping (style, node_budget, weights?)."""
    try:
        style = Style(payload["style"])
    except (KeyError, ValueError):
        raise ConfigError(f"agent config needs style aggro|control, got {payload!r}") from None
    budget = int(payload.get("node_budget", DEFAULT_NODE_BUDGET))
    if "weights" in payload:
        weights = HeuristicWeights(**payload["weights"])
    else:
        weights = AGGRO_WEIGHTS if style is Style.AGGRO else CONTROL_WEIGHTS
    return AgentSpec(style=style, weights=weights, node_budget=budget)


def load_agents(path) -> list:
    with open(path) as fh:
        data = json.load(fh)
    if not isinstance(data, list):
        raise ConfigError(f"{path}: expected a JSON array of agent specs")
    return [load_agent(d) for d in data]


class SearchWorkspace:
    """Reusable buffers for the turn search; one per thread."""

    def __init__(self, budget: int):
        budget = max(2, budget)
        self.budget = budget
        hsize = 1
        while hsize < 2 * budget:
            hsize *= 2
        self.nodes = np.empty((budget, K.STATE_SIZE), dtype=np.int32)
        self.scores = np.empty(budget, dtype=np.float64)
        self.parents = np.empty(budget, dtype=np.int32)
        self.acts = np.empty((budget, 3), dtype=np.int32)
        self.depths = np.empty(budget, dtype=np.int32)
        self.movebuf = np.empty((K.MAX_ACTIONS, 3), dtype=np.int32)
        self.htab_key = np.zeros(hsize, dtype=np.uint64)
        self.htab_epoch = np.zeros(hsize, dtype=np.int64)
        self.epoch_box = np.zeros(1, dtype=np.int64)
        self.path = np.empty((K.MAX_SEQ, 3), dtype=np.int32)
        self.state = np.empty(K.STATE_SIZE, dtype=np.int32)

    def fits(self, budget: int) -> bool:
        return budget <= self.budget


def evaluate(state: GameState, perspective: int, weights: HeuristicWeights) -> float:
    """Linear heuristic score of ``state`` for ``perspective`` (0 or 1)."""
    return float(K._eval_state(state.buf, perspective, weights.as_vector()))


def choose_turn(state: GameState, agent: AgentSpec,
                workspace: Optional[SearchWorkspace] = None) -> list:
    """Best action sequence for the active player, always ending in END_TURN."""
    if state.outcome is not Outcome.IN_PROGRESS:
        raise TerminalError("cannot act in a finished game")
    ws = workspace if workspace is not None and workspace.fits(agent.node_budget) \
        else SearchWorkspace(agent.node_budget)
    ws.epoch_box[0] += 1
    n, _best = K._search_turn(
        state.buf, state.ctx.cardtab, state.ctx.ubits,
        agent.weights.as_vector(), agent.node_budget,
        ws.nodes, ws.scores, ws.parents, ws.acts, ws.depths,
        ws.movebuf, ws.htab_key, ws.htab_epoch, int(ws.epoch_box[0]), ws.path)
    return [Action.decode(int(ws.path[i, 0]), int(ws.path[i, 1]), int(ws.path[i, 2]))
            for i in range(n)]


@dataclass(frozen=True)
class GameTelemetry:
    """Per-game record: outcome, length, and card exposure per player."""

    outcome: Outcome
    turns: int
    drawn: tuple          # (frozenset of ids, frozenset of ids)
    played: tuple

    def __post_init__(self):
        for side in range(2):
            if not self.played[side] <= self.drawn[side]:
                raise ConfigError("played cards must be a subset of drawn cards")


def play_game(deck1: Deck, agent1: AgentSpec, deck2: Deck, agent2: AgentSpec,
              pool: CardPool, seed: int,
              context: Optional[EngineContext] = None,
              workspace: Optional[SearchWorkspace] = None,
              log_path=None) -> tuple:
    """Play one seeded game; returns (outcome, telemetry).

    ``log_path`` writes one JSON line per chosen action (machine-readable
    replay log) at the cost of replaying through the typed API.
    """
    ctx = context if context is not None else EngineContext(pool, deck1, deck2)
    budget = max(agent1.node_budget, agent2.node_budget)
    ws = workspace if workspace is not None and workspace.fits(budget) \
        else SearchWorkspace(budget)
    if log_path is not None:
        return _play_logged(ctx, agent1, agent2, seed, ws, log_path)
    outcome, turns = K._play_game(
        ws.state, ctx.cardtab, ctx.deck_arrays[0], ctx.deck_arrays[1],
        ctx.classes[0], ctx.classes[1], ctx.ubits,
        agent1.weights.as_vector(), agent2.weights.as_vector(),
        agent1.node_budget, agent2.node_budget,
        np.uint64(seed & 0xFFFFFFFFFFFFFFFF),
        ws.nodes, ws.scores, ws.parents, ws.acts, ws.depths,
        ws.movebuf, ws.htab_key, ws.htab_epoch, ws.epoch_box, ws.path)
    return Outcome(int(outcome)), _telemetry_from_state(ctx, ws.state, int(outcome), int(turns))


def _telemetry_from_state(ctx: EngineContext, buf: np.ndarray, outcome: int, turns: int) -> GameTelemetry:
    drawn = []
    played = []
    for side in range(2):
        b = side * K.P_SIZE
        ids = ctx.unique_ids[side]
        dmask = int(buf[b + K.P_DRAWN])
        pmask = int(buf[b + K.P_PLAYED])
        drawn.append(frozenset(cid for u, cid in enumerate(ids) if (dmask >> u) & 1))
        played.append(frozenset(cid for u, cid in enumerate(ids) if (pmask >> u) & 1))
    return GameTelemetry(outcome=Outcome(outcome), turns=turns,
                         drawn=tuple(drawn), played=tuple(played))


def _play_logged(ctx: EngineContext, agent1: AgentSpec, agent2: AgentSpec,
                 seed: int, ws: SearchWorkspace, log_path) -> tuple:
    from . import engine as E

    state = E.new_game(ctx.decks[0], ctx.decks[1], ctx.pool, seed)
    agents = (agent1, agent2)
    with open(log_path, "w") as fh:
        while state.outcome is Outcome.IN_PROGRESS:
            side = state.active_player
            for action in choose_turn(state, agents[side], ws):
                fh.write(json.dumps({"turn": state.turn_number, "player": side,
                                     "action": action.to_dict()}) + "\n")
                state = E.apply_action(state, action)
                if state.outcome is not Outcome.IN_PROGRESS:
                    break
        fh.write(json.dumps({"outcome": state.outcome.name.lower(),
                             "turns": state.turn_number}) + "\n")
    buf = state.buf
    return state.outcome, _telemetry_from_state(ctx, buf, int(state.outcome), state.turn_number)
