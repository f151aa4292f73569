"""Card-impact heuristics: win rate when drawn/played and the nerf sweep.

WRD and WRP condition a deck's win rate on a card having been seen or
played; the sweep then nerfs each card by one mana and measures the deck's
win rate against an opponent meta (WRN). Cards whose presence correlates
with winning are the prime nerf candidates, so WRD/WRP versus WRN should
trend negative on a deck carrying an overpowered card.
"""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from typing import Optional, Sequence

from scipy import stats

from .agents import AgentSpec
from .arena import CardCounts, merge_telemetry, run_matchup, stable_seed
from .cards import CardPool, Deck, PatchVector, chromosome_layout
from .errors import ConfigError, InsufficientDataError


def wrp(telemetry: dict, card_id: str) -> Optional[float]:
    """Win rate over games where the card was played; None when never played."""
    counts = telemetry.get(card_id)
    if counts is None or counts.games_played == 0:
        return None
    return counts.wins_when_played / counts.games_played


def wrd(telemetry: dict, card_id: str) -> Optional[float]:
    """Win rate over games where the card was drawn; None when never drawn."""
    counts = telemetry.get(card_id)
    if counts is None or counts.games_drawn == 0:
        return None
    return counts.wins_when_drawn / counts.games_drawn


@dataclass
class CardImpactRow:
    card_id: str
    games_drawn: int
    wins_when_drawn: int
    wrd: Optional[float]
    games_played: int
    wins_when_played: int
    wrp: Optional[float]
    wrn: float
    noop_nerf: bool = False


@dataclass
class CardImpactReport:
    """Per-card impact rows (sorted by WRN ascending) plus the unnerfed baseline."""

    rows: list
    baseline_meta_win_rate: float
    games_per_card: int

    def row_for(self, card_id: str) -> CardImpactRow:
        for row in self.rows:
            if row.card_id == card_id:
                return row
        raise KeyError(card_id)


def _split_games(total: int, parts: int) -> list:
    share, extra = divmod(total, parts)
    return [share + (1 if k < extra else 0) for k in range(parts)]


def _meta_run(deck: Deck, agent: AgentSpec, opponents, pool: CardPool,
              games_per_opp, seed_tag, base_seed: int, jobs: int):
    """Average win rate of ``deck`` over the opponent list, plus its telemetry."""
    telemetry: dict = {}
    rates = []
    for k, (opp_deck, opp_agent) in enumerate(opponents):
        r = run_matchup(deck, agent, opp_deck, opp_agent, pool,
                        games_per_opp[k], stable_seed(base_seed, seed_tag, k),
                        matchup_id=f"{seed_tag}:{k}", jobs=jobs)
        rates.append(r.win_rate_a)
        merge_telemetry(telemetry, r.telemetry_a)
    return sum(rates) / len(rates), telemetry


def nerf_sweep(target_deck: Deck, target_agent: AgentSpec,
               opponents: Sequence, pool: CardPool,
               games: int, base_seed: int, jobs: int = 1,
               progress=None) -> CardImpactReport:
    """Measure WRD/WRP per card, then WRN under a one-mana nerf of each card.

    ``games`` is the per-run total, split as evenly as possible across the
    opponent decks; each card's nerf run draws its seeds from the card id.
    """
    if not opponents:
        raise ConfigError("nerf sweep needs at least one opponent deck")
    if games < len(opponents):
        raise ConfigError("need at least one game per opponent")
    games_per_opp = _split_games(games, len(opponents))
    baseline, telemetry = _meta_run(target_deck, target_agent, opponents, pool,
                                    games_per_opp, "baseline", base_seed, jobs)
    layout = chromosome_layout(pool)
    cost_locus = {locus.card_id: i for i, locus in enumerate(layout)
                  if locus.attribute == "cost"}
    rows = []
    for cid in target_deck.unique_ids():
        card = pool.get(cid)
        genes = [0] * len(layout)
        genes[cost_locus[cid]] = 1
        nerfed_pool = pool
        noop = card.cost >= 10
        if not noop:
            from .cards import apply_patch

            nerfed_pool = apply_patch(pool, PatchVector(genes=tuple(genes)))
        wrn, _tel = _meta_run(target_deck, target_agent, opponents, nerfed_pool,
                              games_per_opp, f"nerf:{cid}", base_seed, jobs)
        counts = telemetry.get(cid, CardCounts())
        rows.append(CardImpactRow(
            card_id=cid,
            games_drawn=counts.games_drawn, wins_when_drawn=counts.wins_when_drawn,
            wrd=wrd(telemetry, cid),
            games_played=counts.games_played, wins_when_played=counts.wins_when_played,
            wrp=wrp(telemetry, cid),
            wrn=wrn, noop_nerf=noop))
        if progress is not None:
            progress(rows[-1])
    rows.sort(key=lambda r: (r.wrn, r.card_id))
    return CardImpactReport(rows=rows, baseline_meta_win_rate=baseline,
                            games_per_card=games)


@dataclass(frozen=True)
class CorrelationResult:
    pearson: float
    spearman: float
    n: int


def correlation(xs: Sequence, ys: Sequence) -> CorrelationResult:
    """Pearson and Spearman coefficients; undefined pairs dropped pairwise."""
    if len(xs) != len(ys):
        raise ConfigError(f"length mismatch: {len(xs)} vs {len(ys)}")
    pairs = [(float(x), float(y)) for x, y in zip(xs, ys)
             if x is not None and y is not None
             and not math.isnan(float(x)) and not math.isnan(float(y))]
    if len(pairs) < 2:
        raise InsufficientDataError(f"need >= 2 defined pairs, got {len(pairs)}")
    px = [p[0] for p in pairs]
    py = [p[1] for p in pairs]
    pearson = float(stats.pearsonr(px, py).statistic)
    spearman = float(stats.spearmanr(px, py).statistic)
    return CorrelationResult(pearson=pearson, spearman=spearman, n=len(pairs))


def write_impact_csv(report: CardImpactReport, path) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["card_id", "wrd", "wrp", "wrn", "baseline", "delta", "noop_nerf"])
        for r in report.rows:
            w.writerow([
                r.card_id,
                "" if r.wrd is None else f"{r.wrd:.6f}",
                "" if r.wrp is None else f"{r.wrp:.6f}",
                f"{r.wrn:.6f}",
                f"{report.baseline_meta_win_rate:.6f}",
                f"{r.wrn - report.baseline_meta_win_rate:.6f}",
                int(r.noop_nerf),
            ])
    os.replace(tmp, path)
