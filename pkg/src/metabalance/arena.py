"""Monte Carlo match-up evaluation.

Match-ups are played in side-alternating, seed-paired pairs: games 2k and
2k+1 share a shuffle seed with the seats swapped, which cancels first-player
advantage instead of merely averaging over it. Per-game seeds are derived
from (base seed, match-up id, pair index) alone, so results are independent
of scheduling and thread count.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels as K
from .agents import AgentSpec, SearchWorkspace
from .cards import CardPool, Deck
from .engine import build_cardtab, deck_indices, unique_bits
from .errors import ConfigError

DEFAULT_EVOLUTION_GAMES = 100
DEFAULT_REPORT_GAMES = 10_000


def stable_seed(*parts) -> int:
    """64-bit seed derived from the parts; stable across runs and platforms."""
    blob = "\x1f".join(str(p) for p in parts).encode()
    return int.from_bytes(hashlib.blake2b(blob, digest_size=8).digest(), "big")


@dataclass
class CardCounts:
    games_drawn: int = 0
    wins_when_drawn: int = 0
    games_played: int = 0
    wins_when_played: int = 0

    def merge(self, other: "CardCounts") -> None:
        self.games_drawn += other.games_drawn
        self.wins_when_drawn += other.wins_when_drawn
        self.games_played += other.games_played
        self.wins_when_played += other.wins_when_played


@dataclass
class MatchupResult:
    """Counts and per-card exposure tallies for one deck pairing."""

    wins_a: int
    wins_b: int
    draws: int
    games: int
    total_turns: int
    telemetry_a: dict
    telemetry_b: dict

    @property
    def win_rate_a(self) -> float:
        decisive = self.wins_a + self.wins_b
        return self.wins_a / decisive if decisive else float("nan")

    @property
    def mean_turns(self) -> float:
        return self.total_turns / self.games if self.games else float("nan")


@dataclass(frozen=True)
class DeckEntry:
    deck: Deck
    agent: AgentSpec
    label: str


@dataclass
class MetaConfig:
    entries: tuple
    games_per_matchup: int = DEFAULT_EVOLUTION_GAMES
    prevalence: Optional[tuple] = None
    base_seed: int = 0
    include_mirrors: bool = False
    jobs: int = 1

    def __post_init__(self):
        self.entries = tuple(self.entries)
        if len(self.entries) < 2:
            raise ConfigError("a meta needs at least two decks")
        if self.games_per_matchup < 1:
            raise ConfigError("games_per_matchup must be >= 1")
        labels = [e.label for e in self.entries]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"deck labels must be unique, got {labels}")
        if self.prevalence is not None:
            p = np.asarray(self.prevalence, dtype=float)
            if p.shape != (len(self.entries),) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
                raise ConfigError("prevalence must be a probability vector over the decks")
            self.prevalence = tuple(float(x) for x in p)
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")


def _paired_seeds(base_seed: int, matchup_id: str, games: int):
    """Per-game shuffle seeds plus seat flags; pairs share seeds, seats swap."""
    seeds = np.empty(games, dtype=np.uint64)
    a_first = np.empty(games, dtype=np.int32)
    for g in range(games):
        seeds[g] = stable_seed(base_seed, matchup_id, g // 2)
        a_first[g] = 1 if g % 2 == 0 else 0
    return seeds, a_first


def run_games_arrays(cardtab, deck_a, deck_b, cls_a, cls_b, ubit_a, ubit_b,
                     wvec_a, wvec_b, budget_a, budget_b,
                     seeds, a_first, n_unique_a, n_unique_b, jobs=1):
    """Array-level batch runner; returns (counts[4], tel_a, tel_b).

    Splits the seed list into chunks, one workspace per worker thread; the
    kernels release the GIL so threads run in parallel. Accumulation is
    integer addition, so results do not depend on the split.
    """
    games = len(seeds)
    jobs = max(1, min(jobs, games))
    budget = max(budget_a, budget_b)

    def run_chunk(lo, hi):
        ws = SearchWorkspace(budget)
        counts = np.zeros(4, dtype=np.int64)
        tel_a = np.zeros((n_unique_a, 4), dtype=np.int64)
        tel_b = np.zeros((n_unique_b, 4), dtype=np.int64)
        K._play_batch(cardtab, deck_a, deck_b, cls_a, cls_b, ubit_a, ubit_b,
                      wvec_a, wvec_b, budget_a, budget_b,
                      seeds[lo:hi], a_first[lo:hi],
                      ws.state, ws.nodes, ws.scores, ws.parents, ws.acts,
                      ws.depths, ws.movebuf, ws.htab_key, ws.htab_epoch,
                      ws.epoch_box, ws.path,
                      counts, tel_a, tel_b)
        return counts, tel_a, tel_b

    bounds = np.linspace(0, games, jobs + 1, dtype=int)
    chunks = [(int(bounds[i]), int(bounds[i + 1])) for i in range(jobs)
              if bounds[i] < bounds[i + 1]]
    if len(chunks) == 1:
        return run_chunk(*chunks[0])
    counts = np.zeros(4, dtype=np.int64)
    tel_a = np.zeros((n_unique_a, 4), dtype=np.int64)
    tel_b = np.zeros((n_unique_b, 4), dtype=np.int64)
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        for c, ta, tb in pool.map(lambda lohi: run_chunk(*lohi), chunks):
            counts += c
            tel_a += ta
            tel_b += tb
    return counts, tel_a, tel_b


def run_matchup(deck_a: Deck, agent_a: AgentSpec, deck_b: Deck, agent_b: AgentSpec,
                pool: CardPool, games: int, base_seed: int,
                matchup_id: str = "", jobs: int = 1) -> MatchupResult:
    """Play ``games`` side-alternating games of A vs B with derived seeds."""
    if games < 1:
        raise ConfigError("games must be >= 1")
    cardtab = build_cardtab(pool)
    seeds, a_first = _paired_seeds(base_seed, matchup_id, games)
    ua, ub = deck_a.unique_ids(), deck_b.unique_ids()
    counts, tel_a, tel_b = run_games_arrays(
        cardtab, deck_indices(deck_a, pool), deck_indices(deck_b, pool),
        _class_code(deck_a), _class_code(deck_b),
        unique_bits(deck_a, pool), unique_bits(deck_b, pool),
        agent_a.weights.as_vector(), agent_b.weights.as_vector(),
        agent_a.node_budget, agent_b.node_budget,
        seeds, a_first, len(ua), len(ub), jobs=jobs)
    return MatchupResult(
        wins_a=int(counts[0]), wins_b=int(counts[1]), draws=int(counts[2]),
        games=games, total_turns=int(counts[3]),
        telemetry_a=_telemetry_dict(ua, tel_a),
        telemetry_b=_telemetry_dict(ub, tel_b),
    )


def _class_code(deck: Deck) -> int:
    from .engine import _CLASS_CODE

    return _CLASS_CODE[deck.deck_class]


def _telemetry_dict(unique_ids, tel) -> dict:
    return {cid: CardCounts(games_drawn=int(tel[u, 0]), wins_when_drawn=int(tel[u, 1]),
                            games_played=int(tel[u, 2]), wins_when_played=int(tel[u, 3]))
            for u, cid in enumerate(unique_ids)}


def merge_telemetry(into: dict, other: dict) -> dict:
    for cid, counts in other.items():
        if cid in into:
            into[cid].merge(counts)
        else:
            into[cid] = CardCounts(counts.games_drawn, counts.wins_when_drawn,
                                   counts.games_played, counts.wins_when_played)
    return into


@dataclass
class MatchupMatrix:
    """Pairwise win-rate estimates; row = deck i versus column = deck j."""

    deck_labels: tuple
    wins: np.ndarray
    losses: np.ndarray
    draws: np.ndarray
    mirrors_simulated: bool = False
    telemetry: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.deck_labels)

    def games(self, i: int, j: int) -> int:
        return int(self.wins[i, j] + self.losses[i, j] + self.draws[i, j])

    def win_rate(self, i: int, j: int) -> float:
        """Draws are excluded from the denominator; unsimulated mirrors are 0.5."""
        if i == j and not self.mirrors_simulated:
            return 0.5
        decisive = self.wins[i, j] + self.losses[i, j]
        return float(self.wins[i, j] / decisive) if decisive else float("nan")

    def pairwise_win_rates(self) -> list:
        return [self.win_rate(i, j) for i in range(self.n) for j in range(i + 1, self.n)]

    def rate_table(self, prevalence=None) -> list:
        meta = meta_win_rate(self, prevalence)
        return [[self.win_rate(i, j) for j in range(self.n)] + [float(meta[i])]
                for i in range(self.n)]


def matchup_matrix(pool: CardPool, config: MetaConfig) -> MatchupMatrix:
    """Evaluate every unordered deck pair (plus mirrors when requested)."""
    n = len(config.entries)
    wins = np.zeros((n, n), dtype=np.int64)
    losses = np.zeros((n, n), dtype=np.int64)
    draws = np.zeros((n, n), dtype=np.int64)
    telemetry = {e.label: {} for e in config.entries}
    for i in range(n):
        for j in range(i, n):
            if i == j and not config.include_mirrors:
                continue
            a, b = config.entries[i], config.entries[j]
            mid = f"{a.label}|{b.label}"
            r = run_matchup(a.deck, a.agent, b.deck, b.agent, pool,
                            config.games_per_matchup, config.base_seed,
                            matchup_id=mid, jobs=config.jobs)
            wins[i, j] += r.wins_a
            losses[i, j] += r.wins_b
            draws[i, j] += r.draws
            if i != j:
                wins[j, i] += r.wins_b
                losses[j, i] += r.wins_a
                draws[j, i] += r.draws
            merge_telemetry(telemetry[a.label], r.telemetry_a)
            merge_telemetry(telemetry[b.label], r.telemetry_b)
    return MatchupMatrix(deck_labels=tuple(e.label for e in config.entries),
                         wins=wins, losses=losses, draws=draws,
                         mirrors_simulated=config.include_mirrors,
                         telemetry=telemetry)


def meta_win_rate(matrix: MatchupMatrix, prevalence=None) -> np.ndarray:
    """Per-deck win rate against the meta: prevalence-weighted row average."""
    n = matrix.n
    if prevalence is None:
        p = np.full(n, 1.0 / n)
    else:
        p = np.asarray(prevalence, dtype=float)
        if p.shape != (n,) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
            raise ConfigError("prevalence must be a probability vector matching the decks")
    rates = np.array([[matrix.win_rate(i, j) for j in range(n)] for i in range(n)])
    return rates @ p


def write_matrix_csv(matrix: MatchupMatrix, path, prevalence=None) -> None:
    """Table-shaped CSV: deck label rows, win-rate cells, final meta column."""
    table = matrix.rate_table(prevalence)
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["deck"] + list(matrix.deck_labels) + ["meta"])
        for label, row in zip(matrix.deck_labels, table):
            w.writerow([label] + [f"{x:.6f}" for x in row])
    os.replace(tmp, path)


def write_telemetry_json(matrix: MatchupMatrix, path) -> None:
    payload = {
        label: {cid: {"games_drawn": c.games_drawn, "wins_when_drawn": c.wins_when_drawn,
                      "games_played": c.games_played, "wins_when_played": c.wins_when_played}
                for cid, c in sorted(cards.items())}
        for label, cards in matrix.telemetry.items()
    }
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)
