"""Typed game API over the flat-array kernels.

``GameState`` wraps the raw state vector together with its pool context and
decodes players, boards and hands on demand. All operations are functional:
they return new states and never mutate their input. Hot loops (agents,
arena) bypass this layer and drive the kernels directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Optional

import numpy as np

from . import _kernels as K
from .cards import Card, CardPool, CardType, Deck, EffectKind, HeroClass, Keyword
from .errors import DeckError, IllegalActionError, TerminalError

TOKEN_ID = "token:recruit"

_CLASS_CODE = {HeroClass.HUNTER: K.CLASS_HUNTER,
               HeroClass.PALADIN: K.CLASS_PALADIN,
               HeroClass.WARLOCK: K.CLASS_WARLOCK}
_TYPE_CODE = {CardType.MINION: K.TYPE_MINION,
              CardType.SPELL: K.TYPE_SPELL,
              CardType.WEAPON: K.TYPE_WEAPON}
_EFFECT_CODE = {EffectKind.DAMAGE_TARGET: K.EFFECT_DAMAGE_TARGET,
                EffectKind.DAMAGE_ALL_ENEMY_MINIONS: K.EFFECT_DAMAGE_ALL_ENEMY_MINIONS,
                EffectKind.DAMAGE_ENEMY_HERO: K.EFFECT_DAMAGE_ENEMY_HERO,
                EffectKind.HEAL: K.EFFECT_HEAL,
                EffectKind.DRAW_CARDS: K.EFFECT_DRAW_CARDS,
                EffectKind.BUFF_MINION: K.EFFECT_BUFF_MINION}


class Outcome(IntEnum):
    IN_PROGRESS = K.OUTCOME_IN_PROGRESS
    PLAYER1_WIN = K.OUTCOME_P1_WIN
    PLAYER2_WIN = K.OUTCOME_P2_WIN
    DRAW = K.OUTCOME_DRAW


class ActionKind(IntEnum):
    PLAY_MINION = K.A_PLAY_MINION
    PLAY_SPELL = K.A_PLAY_SPELL
    PLAY_WEAPON = K.A_PLAY_WEAPON
    MINION_ATTACK = K.A_MINION_ATTACK
    HERO_ATTACK = K.A_HERO_ATTACK
    HERO_POWER = K.A_HERO_POWER
    END_TURN = K.A_END_TURN


class TargetKind(Enum):
    OWN_MINION = "own_minion"
    ENEMY_MINION = "enemy_minion"
    ENEMY_HERO = "enemy_hero"


@dataclass(frozen=True)
class Target:
    kind: TargetKind
    index: int = 0

    def encode(self) -> int:
        if self.kind is TargetKind.ENEMY_HERO:
            return K.T_ENEMY_HERO
        if self.kind is TargetKind.ENEMY_MINION:
            return K.T_ENEMY_BASE + self.index
        return self.index

    @staticmethod
    def decode(code: int) -> Optional["Target"]:
        if code == K.T_NONE:
            return None
        if code == K.T_ENEMY_HERO:
            return Target(TargetKind.ENEMY_HERO)
        if code >= K.T_ENEMY_BASE:
            return Target(TargetKind.ENEMY_MINION, code - K.T_ENEMY_BASE)
        return Target(TargetKind.OWN_MINION, code)


@dataclass(frozen=True)
class Action:
    """One legal move; construct via ``legal_actions`` or the helpers below."""

    kind: ActionKind
    hand_index: int = -1
    attacker_index: int = -1
    target: Optional[Target] = None

    def encode(self) -> tuple:
        k = int(self.kind)
        if self.kind in (ActionKind.PLAY_MINION, ActionKind.PLAY_SPELL, ActionKind.PLAY_WEAPON):
            a = self.hand_index
        elif self.kind is ActionKind.MINION_ATTACK:
            a = self.attacker_index
        else:
            a = K.T_NONE
        b = self.target.encode() if self.target is not None else K.T_NONE
        return k, a, b

    @staticmethod
    def decode(k: int, a: int, b: int) -> "Action":
        kind = ActionKind(k)
        target = Target.decode(b)
        if kind is ActionKind.MINION_ATTACK:
            return Action(kind, attacker_index=a, target=target)
        if kind in (ActionKind.PLAY_MINION, ActionKind.PLAY_SPELL, ActionKind.PLAY_WEAPON):
            return Action(kind, hand_index=a, target=target)
        return Action(kind, target=target)

    @staticmethod
    def end_turn() -> "Action":
        return Action(ActionKind.END_TURN)

    @staticmethod
    def hero_power() -> "Action":
        return Action(ActionKind.HERO_POWER)

    def to_dict(self) -> dict:
        d = {"kind": self.kind.name.lower()}
        if self.hand_index >= 0:
            d["hand_index"] = self.hand_index
        if self.attacker_index >= 0:
            d["attacker_index"] = self.attacker_index
        if self.target is not None:
            d["target"] = {"kind": self.target.kind.value, "index": self.target.index}
        return d


@dataclass(frozen=True)
class MinionInstance:
    card_id: str
    attack: int
    health: int
    max_health: int
    keywords: frozenset
    can_attack: bool
    attacks_remaining: int
    summoned_this_turn: bool


@dataclass(frozen=True)
class WeaponInstance:
    attack: int
    durability: int


@dataclass(frozen=True)
class PlayerView:
    hero_class: HeroClass
    hero_hp: int
    armor: int
    mana_crystals: int
    mana_available: int
    deck: tuple
    hand: tuple
    board: tuple
    weapon: Optional[WeaponInstance]
    fatigue_counter: int
    hero_attacked_this_turn: bool
    hero_power_used: bool
    drawn_ids: frozenset
    played_ids: frozenset
    graveyard_count: int
    burned_count: int


class EngineContext:
    """Precomputed arrays for one (pool, deck1, deck2) combination."""

    def __init__(self, pool: CardPool, deck1: Deck, deck2: Deck):
        deck1.validate_against(pool)
        deck2.validate_against(pool)
        self.pool = pool
        self.decks = (deck1, deck2)
        self.cardtab = build_cardtab(pool)
        self.deck_arrays = (deck_indices(deck1, pool), deck_indices(deck2, pool))
        self.classes = (_CLASS_CODE[deck1.deck_class], _CLASS_CODE[deck2.deck_class])
        self.unique_ids = (deck1.unique_ids(), deck2.unique_ids())
        self.ubits = np.stack([unique_bits(deck1, pool), unique_bits(deck2, pool)])
        self.index_to_id = tuple(c.id for c in pool)

    def card_id(self, index: int) -> str:
        if index == K.TOKEN_CARD:
            return TOKEN_ID
        return self.index_to_id[index]


def build_cardtab(pool: CardPool) -> np.ndarray:
    """Pack pool attributes into the kernels' int32 card table."""
    tab = np.zeros((len(pool), K.CARDTAB_COLS), dtype=np.int32)
    for i, card in enumerate(pool):
        tab[i, K.C_TYPE] = _TYPE_CODE[card.card_type]
        tab[i, K.C_COST] = card.cost
        tab[i, K.C_SKIND] = -1
        if card.card_type is CardType.MINION:
            tab[i, K.C_ATK] = card.attack
            tab[i, K.C_HP] = card.health
            tab[i, K.C_TAUNT] = int(Keyword.TAUNT in card.keywords)
            tab[i, K.C_CHARGE] = int(Keyword.CHARGE in card.keywords)
        elif card.card_type is CardType.WEAPON:
            tab[i, K.C_ATK] = card.attack
            tab[i, K.C_HP] = card.durability
        else:
            tab[i, K.C_SKIND] = _EFFECT_CODE[card.effect.kind]
            tab[i, K.C_SX] = card.effect.x
            tab[i, K.C_SY] = card.effect.y
    return tab


def deck_indices(deck: Deck, pool: CardPool) -> np.ndarray:
    return np.array([pool.index_of(cid) for cid in deck.card_ids], dtype=np.int32)


def unique_bits(deck: Deck, pool: CardPool) -> np.ndarray:
    """Map pool index -> bit position among this deck's unique cards (-1 if absent)."""
    bits = np.full(len(pool), -1, dtype=np.int32)
    for u, cid in enumerate(deck.unique_ids()):
        bits[pool.index_of(cid)] = u
    return bits


def _mask_ids(mask: int, unique_ids: tuple) -> frozenset:
    return frozenset(cid for u, cid in enumerate(unique_ids) if (int(mask) >> u) & 1)


class GameState:
    """Immutable snapshot of a game; cheap to copy, decoded lazily."""

    __slots__ = ("ctx", "buf")

    def __init__(self, ctx: EngineContext, buf: np.ndarray):
        self.ctx = ctx
        buf = buf.copy()
        buf.setflags(write=False)
        self.buf = buf

    # -- global ------------------------------------------------------------
    @property
    def outcome(self) -> Outcome:
        return Outcome(int(self.buf[K.G_OUTCOME]))

    @property
    def turn_number(self) -> int:
        return int(self.buf[K.G_TURN])

    @property
    def active_player(self) -> int:
        return int(self.buf[K.G_ACTIVE])

    @property
    def players(self) -> tuple:
        return (self._player_view(0), self._player_view(1))

    def _player_view(self, side: int) -> PlayerView:
        b = side * K.P_SIZE
        s = self.buf
        ctx = self.ctx
        deckpos = int(s[b + K.P_DECKPOS])
        board = []
        for m in range(int(s[b + K.P_BOARDN])):
            e = b + K.P_BOARD + m * K.B_FIELDS
            keywords = frozenset(
                kw for kw, col in ((Keyword.TAUNT, K.B_TAUNT), (Keyword.CHARGE, K.B_CHARGE))
                if s[e + col] == 1)
            sick = bool(s[e + K.B_SICK])
            charge = bool(s[e + K.B_CHARGE])
            board.append(MinionInstance(
                card_id=ctx.card_id(int(s[e + K.B_CARD])),
                attack=int(s[e + K.B_ATK]), health=int(s[e + K.B_HP]),
                max_health=int(s[e + K.B_MAX]), keywords=keywords,
                can_attack=(int(s[e + K.B_ATK]) > 0 and int(s[e + K.B_NATK]) > 0
                            and (not sick or charge)),
                attacks_remaining=int(s[e + K.B_NATK]),
                summoned_this_turn=sick))
        weapon = None
        if s[b + K.P_WDUR] > 0:
            weapon = WeaponInstance(attack=int(s[b + K.P_WATK]),
                                    durability=int(s[b + K.P_WDUR]))
        deck_class = (HeroClass.HUNTER, HeroClass.PALADIN, HeroClass.WARLOCK)[int(s[b + K.P_CLASS])]
        return PlayerView(
            hero_class=deck_class,
            hero_hp=int(s[b + K.P_HP]),
            armor=0,
            mana_crystals=int(s[b + K.P_CRYST]),
            mana_available=int(s[b + K.P_MANA]),
            deck=tuple(ctx.card_id(int(s[b + K.P_DECK + i])) for i in range(deckpos, K.DECK_SIZE)),
            hand=tuple(ctx.card_id(int(s[b + K.P_HAND + i])) for i in range(int(s[b + K.P_HANDN]))),
            board=tuple(board),
            weapon=weapon,
            fatigue_counter=int(s[b + K.P_FATIGUE]),
            hero_attacked_this_turn=bool(s[b + K.P_HERO_ATTACKED]),
            hero_power_used=bool(s[b + K.P_POWER_USED]),
            drawn_ids=_mask_ids(int(s[b + K.P_DRAWN]), ctx.unique_ids[side]),
            played_ids=_mask_ids(int(s[b + K.P_PLAYED]), ctx.unique_ids[side]),
            graveyard_count=int(s[b + K.P_GRAVE]),
            burned_count=int(s[b + K.P_BURNED]),
        )

    def state_hash(self) -> int:
        return int(K._exact_hash(self.buf))

    def check_invariants(self) -> int:
        """0 when well-formed, else the kernel violation code."""
        return int(K._check_state(self.buf))


def new_game(deck1: Deck, deck2: Deck, pool: CardPool, seed: int) -> GameState:
    """Deal a fresh game: seeded shuffles, 3/4 opening hands, player 1 active."""
    ctx = EngineContext(pool, deck1, deck2)
    buf = np.empty(K.STATE_SIZE, dtype=np.int32)
    K._new_game(buf, ctx.deck_arrays[0], ctx.deck_arrays[1],
                ctx.classes[0], ctx.classes[1], ctx.ubits,
                np.uint64(seed & 0xFFFFFFFFFFFFFFFF))
    return GameState(ctx, buf)


def legal_actions(state: GameState) -> list:
    """All applicable actions for the active player; END_TURN is always last."""
    if state.outcome is not Outcome.IN_PROGRESS:
        raise TerminalError("game is over; no legal actions")
    movebuf = np.empty((K.MAX_ACTIONS, 3), dtype=np.int32)
    n = K._legal_moves(state.buf, state.ctx.cardtab, movebuf)
    return [Action.decode(int(movebuf[i, 0]), int(movebuf[i, 1]), int(movebuf[i, 2]))
            for i in range(n)]


def apply_action(state: GameState, action: Action) -> GameState:
    """Apply one action, returning the successor state; the input is unchanged."""
    if state.outcome is not Outcome.IN_PROGRESS:
        raise TerminalError("game is over")
    k, a, b = action.encode()
    movebuf = np.empty((K.MAX_ACTIONS, 3), dtype=np.int32)
    n = K._legal_moves(state.buf, state.ctx.cardtab, movebuf)
    for i in range(n):
        if movebuf[i, 0] == k and movebuf[i, 1] == a and movebuf[i, 2] == b:
            break
    else:
        raise IllegalActionError(f"{action} is not legal in this state")
    buf = state.buf.copy()
    K._apply_move(buf, state.ctx.cardtab, state.ctx.ubits, k, a, b)
    return GameState(state.ctx, buf)


def draw_card(state: GameState, player: int) -> GameState:
    """Force a draw for ``player`` (top of deck, burn on full hand, fatigue)."""
    buf = state.buf.copy()
    K._draw_one(buf, state.ctx.ubits, player)
    K._check_outcome(buf)
    return GameState(state.ctx, buf)


def hero_power(state: GameState) -> GameState:
    """Use the active player's hero power (2 mana, once per turn)."""
    return apply_action(state, Action.hero_power())
