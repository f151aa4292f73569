"""Card pool, patch layout, clamping and magnitude arithmetic."""

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from metabalance.cards import (ATTR_MAX, AttributeWeights, Card, CardPool,
                               CardType, Deck, EffectKind, HeroClass, Locus,
                               PatchVector, SpellEffect, UNIFORM_WEIGHTS,
                               apply_patch, chromosome_layout, effective_change,
                               load_deck, load_patch, load_pool, magnitude,
                               max_magnitude, patch_magnitude, save_patch,
                               save_pool)
from metabalance.errors import DeckError, LayoutError, ParseError, UnknownCardError

from conftest import double, minion, spell, weapon


def exp1_shaped_pool():
    """Pool with the published chromosome shape: 6 spells + 56 minions + 2 weapons."""
    cards = [spell(f"sp{i}", cost=(i % 9) + 1, kind=EffectKind.DAMAGE_ENEMY_HERO, x=2)
             for i in range(6)]
    cards += [minion(f"mi{i}", cost=(i % 10), attack=(i % 9), health=(i % 8) + 1)
              for i in range(56)]
    cards += [weapon(f"we{i}", cost=2 + i, attack=2, durability=2) for i in range(2)]
    return CardPool(cards=tuple(cards))


def test_layout_exp1_shape_is_180_loci():
    assert len(chromosome_layout(exp1_shaped_pool())) == 180


def test_layout_single_spell():
    pool = CardPool(cards=(spell("s", 1, EffectKind.HEAL, 1),))
    assert chromosome_layout(pool) == [Locus("s", "cost")]


def test_layout_two_minions_one_spell():
    pool = CardPool(cards=(minion("a", 1, 1, 1), minion("b", 2, 2, 2),
                           spell("s", 1, EffectKind.HEAL, 1)))
    layout = chromosome_layout(pool)
    assert len(layout) == 7
    assert layout[0] == Locus("a", "cost")
    assert layout[1] == Locus("a", "attack")
    assert layout[2] == Locus("a", "health")
    assert layout[6] == Locus("s", "cost")


def test_layout_is_deterministic(toy_pool):
    assert chromosome_layout(toy_pool) == chromosome_layout(toy_pool)


def _one_card_patch(pool, card_id, attribute, delta):
    genes = [0] * len(chromosome_layout(pool))
    idx = chromosome_layout(pool).index(Locus(card_id, attribute))
    genes[idx] = delta
    return PatchVector(genes=tuple(genes))


def test_apply_patch_clamps_upper():
    pool = CardPool(cards=(minion("a", 9, 1, 1),))
    patched = apply_patch(pool, _one_card_patch(pool, "a", "cost", 3))
    assert patched.get("a").cost == 10


def test_apply_patch_clamps_lower_cost():
    pool = CardPool(cards=(minion("a", 0, 1, 1),))
    patched = apply_patch(pool, _one_card_patch(pool, "a", "cost", -3))
    assert patched.get("a").cost == 0


def test_apply_patch_health_floor_is_one():
    pool = CardPool(cards=(minion("a", 1, 1, 2),))
    patched = apply_patch(pool, _one_card_patch(pool, "a", "health", -3))
    assert patched.get("a").health == 1


def test_apply_patch_leaves_input_untouched():
    pool = CardPool(cards=(minion("a", 5, 5, 5),))
    apply_patch(pool, _one_card_patch(pool, "a", "attack", 2))
    assert pool.get("a").attack == 5


def test_apply_patch_zero_is_identity(toy_pool):
    assert apply_patch(toy_pool, PatchVector.zeros(toy_pool)) == toy_pool


def test_apply_patch_length_mismatch(toy_pool):
    with pytest.raises(LayoutError):
        apply_patch(toy_pool, PatchVector(genes=(0, 0, 0)))


def test_effective_change_clamped():
    pool = CardPool(cards=(minion("a", 9, 1, 1),))
    eff = effective_change(pool, _one_card_patch(pool, "a", "cost", 3))
    assert eff[0] == 1
    pool2 = CardPool(cards=(minion("b", 1, 1, 1),))
    eff2 = effective_change(pool2, _one_card_patch(pool2, "b", "cost", -3))
    assert eff2[0] == -1


def test_effective_change_zero_gene():
    pool = CardPool(cards=(minion("a", 5, 5, 5),))
    assert list(effective_change(pool, PatchVector.zeros(pool))) == [0, 0, 0]


def test_magnitude_zero_vector(toy_pool):
    layout = chromosome_layout(toy_pool)
    assert magnitude([0] * len(layout), AttributeWeights(), layout) == 0


def test_magnitude_mana_counts_double():
    layout = [Locus("a", "cost")]
    assert magnitude([1], AttributeWeights(), layout) == 2
    assert magnitude([1], UNIFORM_WEIGHTS, layout) == 1


def test_magnitude_mixed_changes():
    layout = [Locus("a", "cost"), Locus("a", "attack"), Locus("a", "health")]
    assert magnitude([-1, 2, -3], AttributeWeights(), layout) == 2 + 2 + 3


def test_patch_magnitude_modes():
    pool = CardPool(cards=(minion("a", 9, 1, 1),))
    patch = _one_card_patch(pool, "a", "cost", 3)
    assert patch_magnitude(pool, patch, effective=True) == 2   # clamped to +1, weight 2
    assert patch_magnitude(pool, patch, effective=False) == 6  # raw +3, weight 2


def test_max_magnitude_exp1_shape():
    pool = exp1_shaped_pool()
    assert max_magnitude(pool, UNIFORM_WEIGHTS, effective=False) == 540
    assert max_magnitude(pool, AttributeWeights(), effective=False) == 732
    assert max_magnitude(pool, AttributeWeights(), effective=True) <= 732


@st.composite
def pool_and_patch(draw):
    n = draw(st.integers(1, 6))
    cards = []
    for i in range(n):
        kind = draw(st.sampled_from(["minion", "spell", "weapon"]))
        cost = draw(st.integers(0, 10))
        if kind == "minion":
            cards.append(minion(f"c{i}", cost, draw(st.integers(0, 10)),
                                draw(st.integers(1, 10))))
        elif kind == "weapon":
            cards.append(weapon(f"c{i}", cost, draw(st.integers(0, 10)),
                                draw(st.integers(1, 10))))
        else:
            cards.append(spell(f"c{i}", cost, EffectKind.DAMAGE_ENEMY_HERO, 1))
    pool = CardPool(cards=tuple(cards))
    genes = tuple(draw(st.integers(-3, 3)) for _ in chromosome_layout(pool))
    return pool, PatchVector(genes=genes)


@given(pool_and_patch())
@settings(max_examples=200, deadline=None)
def test_patched_attributes_stay_in_bounds(pp):
    pool, patch = pp
    patched = apply_patch(pool, patch)
    for card in patched:
        assert 0 <= card.cost <= ATTR_MAX
        if card.card_type is CardType.MINION:
            assert 0 <= card.attack <= ATTR_MAX
            assert 1 <= card.health <= ATTR_MAX
        elif card.card_type is CardType.WEAPON:
            assert 0 <= card.attack <= ATTR_MAX
            assert 1 <= card.durability <= ATTR_MAX


@given(pool_and_patch())
@settings(max_examples=200, deadline=None)
def test_magnitude_properties(pp):
    pool, patch = pp
    layout = chromosome_layout(pool)
    weights = AttributeWeights()
    eff = magnitude(effective_change(pool, patch), weights, layout)
    raw = magnitude(patch.genes, weights, layout)
    assert 0 <= eff <= raw
    assert eff <= max_magnitude(pool, weights, effective=True)
    assert raw <= max_magnitude(pool, weights, effective=False)
    assert abs(effective_change(pool, patch)).max(initial=0) <= 3


def test_gene_bounds_enforced():
    with pytest.raises(LayoutError):
        PatchVector(genes=(4,))
    with pytest.raises(LayoutError):
        PatchVector(genes=(-4,))


# ---------------------------------------------------------------------------
# card/deck validation and serialization
# ---------------------------------------------------------------------------

def test_card_type_invariants():
    with pytest.raises(ParseError):
        Card(id="x", name="x", card_type=CardType.MINION, cost=1, attack=1)
    with pytest.raises(ParseError):
        Card(id="x", name="x", card_type=CardType.SPELL, cost=1)
    with pytest.raises(ParseError):
        Card(id="x", name="x", card_type=CardType.WEAPON, cost=1, attack=1,
             durability=1, health=3)
    with pytest.raises(ParseError):
        minion("x", cost=11, attack=1, health=1)
    with pytest.raises(ParseError):
        minion("x", cost=1, attack=1, health=0)


def test_spell_effect_bounds():
    with pytest.raises(ParseError):
        SpellEffect(kind=EffectKind.HEAL, x=11)
    with pytest.raises(ParseError):
        SpellEffect(kind=EffectKind.HEAL, x=1, y=2)  # y only for buffs
    SpellEffect(kind=EffectKind.BUFF_MINION, x=1, y=2)


def test_deck_needs_thirty_cards():
    with pytest.raises(DeckError):
        Deck(deck_class=HeroClass.HUNTER, card_ids=("a",) * 29)


def test_deck_copy_limit():
    ids = ("a",) * 3 + tuple(f"c{i}" for i in range(27))
    with pytest.raises(DeckError):
        Deck(deck_class=HeroClass.HUNTER, card_ids=ids)


def test_deck_class_legality(toy_pool):
    pool = CardPool(cards=tuple(toy_pool.cards) + (
        minion("pala_only", 1, 1, 1, card_class=HeroClass.PALADIN),))
    ids = ["pala_only", "m1", "m2", "m3", "m4", "m5", "m6", "m7", "s1", "s2",
           "s3", "s4", "s5", "s6", "w1"]
    deck = Deck(deck_class=HeroClass.HUNTER, card_ids=double(ids))
    with pytest.raises(DeckError):
        deck.validate_against(pool)


def test_pool_roundtrip(tmp_path, toy_pool):
    path = tmp_path / "cards.json"
    save_pool(toy_pool, path)
    assert load_pool(path) == toy_pool


def test_deck_file_errors(tmp_path, toy_pool):
    path = tmp_path / "deck.json"
    path.write_text(json.dumps({"class": "hunter", "cards": []}))
    with pytest.raises(DeckError):
        load_deck(path, toy_pool)
    ids = ["nope", "m1", "m2", "m3", "m4", "m5", "m6", "m7", "s1", "s2",
           "s3", "s4", "s5", "s6", "w1"]
    path.write_text(json.dumps({"class": "hunter", "cards": list(double(ids))}))
    with pytest.raises(UnknownCardError):
        load_deck(path, toy_pool)
    path.write_text("{not json")
    with pytest.raises(ParseError):
        load_deck(path, toy_pool)


def test_valid_deck_file(tmp_path, toy_pool, hunter_deck):
    from metabalance.cards import save_deck

    path = tmp_path / "deck.json"
    save_deck(hunter_deck, path)
    loaded = load_deck(path, toy_pool)
    assert loaded.card_ids == hunter_deck.card_ids
    assert len(loaded.card_ids) == 30


def test_patch_roundtrip_and_pool_hash_guard(tmp_path, toy_pool):
    patch = PatchVector(genes=tuple((i % 7) - 3 for i in range(len(chromosome_layout(toy_pool)))))
    path = tmp_path / "patch.json"
    save_patch(patch, toy_pool, path)
    assert load_patch(path, toy_pool) == patch
    other_pool = CardPool(cards=tuple(toy_pool.cards[:-1]))
    with pytest.raises(LayoutError):
        load_patch(path, other_pool)


def test_pool_rejects_duplicate_ids():
    with pytest.raises(ParseError):
        CardPool(cards=(minion("a", 1, 1, 1), minion("a", 2, 2, 2)))
