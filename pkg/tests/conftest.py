"""Shared fixtures: a small all-neutral pool, two decks, and a state builder."""

import numpy as np
import pytest

from metabalance import _kernels as K
from metabalance.cards import (Card, CardPool, CardType, Deck, EffectKind,
                               HeroClass, SpellEffect)
from metabalance.engine import EngineContext, GameState, new_game


def minion(cid, cost, attack, health, keywords=(), card_class=HeroClass.NEUTRAL, name=None):
    return Card(id=cid, name=name or cid, card_type=CardType.MINION, cost=cost,
                attack=attack, health=health, keywords=frozenset(keywords),
                card_class=card_class)


def spell(cid, cost, kind, x, y=0, card_class=HeroClass.NEUTRAL, name=None):
    return Card(id=cid, name=name or cid, card_type=CardType.SPELL, cost=cost,
                effect=SpellEffect(kind=kind, x=x, y=y), card_class=card_class)


def weapon(cid, cost, attack, durability, card_class=HeroClass.NEUTRAL, name=None):
    return Card(id=cid, name=name or cid, card_type=CardType.WEAPON, cost=cost,
                attack=attack, durability=durability, card_class=card_class)


@pytest.fixture(scope="session")
def toy_pool():
    return CardPool(cards=(
        minion("m1", 1, 2, 1),
        minion("m2", 2, 2, 3),
        minion("m3", 3, 3, 3),
        minion("m4", 2, 1, 4, keywords={"taunt"}),
        minion("m5", 3, 3, 1, keywords={"charge"}),
        spell("s1", 1, EffectKind.DAMAGE_TARGET, 2),
        spell("s2", 3, EffectKind.DAMAGE_ALL_ENEMY_MINIONS, 2),
        spell("s3", 2, EffectKind.DAMAGE_ENEMY_HERO, 3),
        spell("s4", 2, EffectKind.HEAL, 4),
        spell("s5", 2, EffectKind.DRAW_CARDS, 2),
        spell("s6", 1, EffectKind.BUFF_MINION, 2, 2),
        weapon("w1", 2, 3, 2),
        weapon("w2", 4, 4, 2),
        minion("m6", 5, 5, 5),
        minion("m7", 4, 4, 4),
    ))


def double(ids):
    return tuple(c for c in ids for _ in range(2))


@pytest.fixture(scope="session")
def hunter_deck(toy_pool):
    ids = ["m1", "m2", "m3", "m5", "s1", "s3", "w1", "m6", "m7", "s5",
           "m4", "s6", "s2", "s4", "w2"]
    deck = Deck(deck_class=HeroClass.HUNTER, card_ids=double(ids), name="hunter")
    deck.validate_against(toy_pool)
    return deck


@pytest.fixture(scope="session")
def paladin_deck(toy_pool):
    ids = ["m2", "m3", "m4", "s4", "s6", "w2", "m6", "m7", "s1", "s3",
           "m1", "m5", "w1", "s2", "s5"]
    deck = Deck(deck_class=HeroClass.PALADIN, card_ids=double(ids), name="paladin")
    deck.validate_against(toy_pool)
    return deck


@pytest.fixture(scope="session")
def warlock_deck(toy_pool):
    ids = ["m2", "m3", "m4", "s2", "s5", "m6", "m7", "s1", "s4", "s6",
           "m1", "m5", "w1", "w2", "s3"]
    deck = Deck(deck_class=HeroClass.WARLOCK, card_ids=double(ids), name="warlock")
    deck.validate_against(toy_pool)
    return deck


class StateBuilder:
    """White-box state surgery for engine tests.

    Starts from a real dealt game and rewrites the raw buffer; handy for
    putting exact minions, hands and life totals on the table. Zone
    conservation is not maintained, so built states are for rule checks,
    not invariant fuzzing.
    """

    def __init__(self, pool, deck1, deck2, seed=1):
        base = new_game(deck1, deck2, pool, seed)
        self.ctx = base.ctx
        self.buf = base.buf.copy()
        self.pool = pool

    def clear_hands(self):
        for side in range(2):
            self.buf[side * K.P_SIZE + K.P_HANDN] = 0
        return self

    def clear_boards(self):
        for side in range(2):
            self.buf[side * K.P_SIZE + K.P_BOARDN] = 0
        return self

    def empty_deck(self, side):
        self.buf[side * K.P_SIZE + K.P_DECKPOS] = K.DECK_SIZE
        return self

    def set_hand(self, side, card_ids):
        b = side * K.P_SIZE
        self.buf[b + K.P_HANDN] = len(card_ids)
        for i, cid in enumerate(card_ids):
            self.buf[b + K.P_HAND + i] = self.pool.index_of(cid)
        return self

    def set_mana(self, side, mana, crystals=None):
        b = side * K.P_SIZE
        self.buf[b + K.P_CRYST] = mana if crystals is None else crystals
        self.buf[b + K.P_MANA] = mana
        return self

    def set_hp(self, side, hp):
        self.buf[side * K.P_SIZE + K.P_HP] = hp
        return self

    def set_weapon(self, side, attack, durability):
        b = side * K.P_SIZE
        self.buf[b + K.P_WATK] = attack
        self.buf[b + K.P_WDUR] = durability
        return self

    def put_minion(self, side, card_id, attack=None, health=None,
                   taunt=False, charge=False, ready=True):
        b = side * K.P_SIZE
        m = self.buf[b + K.P_BOARDN]
        e = b + K.P_BOARD + m * K.B_FIELDS
        idx = self.pool.index_of(card_id)
        card = self.pool.get(card_id)
        self.buf[e + K.B_CARD] = idx
        self.buf[e + K.B_ATK] = card.attack if attack is None else attack
        hp = card.health if health is None else health
        self.buf[e + K.B_HP] = hp
        self.buf[e + K.B_MAX] = hp
        self.buf[e + K.B_TAUNT] = int(taunt)
        self.buf[e + K.B_CHARGE] = int(charge)
        self.buf[e + K.B_NATK] = 1
        self.buf[e + K.B_SICK] = 0 if ready else 1
        self.buf[b + K.P_BOARDN] = m + 1
        return self

    def build(self) -> GameState:
        return GameState(self.ctx, self.buf)


@pytest.fixture
def builder(toy_pool, hunter_deck, paladin_deck):
    def make(seed=1):
        return StateBuilder(toy_pool, hunter_deck, paladin_deck, seed=seed)

    return make
