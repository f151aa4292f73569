"""Card-game metagame balancing toolkit.

Simulates deck match-ups with heuristic agents over a compact CCG ruleset,
searches card-attribute changes with a GA and with NSGA-II (balance versus
magnitude of change), and ranks nerf candidates by win-rate-when-drawn and
win-rate-when-played.
"""

__version__ = "0.1.0"

from .cards import (AttributeWeights, Card, CardPool, CardType, Deck,
                    EffectKind, HeroClass, Keyword, PatchVector, SpellEffect,
                    apply_patch, chromosome_layout, effective_change,
                    load_deck, load_patch, load_pool, magnitude,
                    patch_magnitude, save_patch, save_pool)
from .engine import Action, ActionKind, GameState, Outcome, apply_action, \
    draw_card, hero_power, legal_actions, new_game
from .agents import AgentSpec, HeuristicWeights, Style, choose_turn, evaluate, play_game
from .arena import MatchupMatrix, MetaConfig, DeckEntry, matchup_matrix, \
    meta_win_rate, run_matchup
from .evolve import (GAConfig, Individual, ParetoArchive, PatchEvaluator,
                     balance_fitness, dominates, mutate, nsga2_step, run_ga,
                     run_nsga2, tournament_select, two_point_crossover)
from .metrics import CardImpactReport, correlation, nerf_sweep, wrd, wrp
