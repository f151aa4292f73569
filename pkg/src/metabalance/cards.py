"""Card pool and deck data model plus the balance-patch encoding.

A balance patch is an integer chromosome over a card pool: spells contribute
one gene (cost delta), minions and weapons contribute three (cost, attack,
health-or-durability deltas). Applying a patch clamps every attribute into
its playable range, and the magnitude of a patch is the weighted sum of the
absolute per-attribute changes (mana cost counts double by default).
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .errors import DeckError, LayoutError, ParseError, UnknownCardError

GENE_MIN = -3
GENE_MAX = 3
ATTR_MAX = 10
DECK_SIZE = 30
MAX_COPIES = 2


class CardType(str, Enum):
    MINION = "minion"
    SPELL = "spell"
    WEAPON = "weapon"


class HeroClass(str, Enum):
    HUNTER = "hunter"
    PALADIN = "paladin"
    WARLOCK = "warlock"
    NEUTRAL = "neutral"


class Keyword(str, Enum):
    TAUNT = "taunt"
    CHARGE = "charge"


class EffectKind(str, Enum):
    DAMAGE_TARGET = "damage_target"
    DAMAGE_ALL_ENEMY_MINIONS = "damage_all_enemy_minions"
    DAMAGE_ENEMY_HERO = "damage_enemy_hero"
    HEAL = "heal"
    DRAW_CARDS = "draw_cards"
    BUFF_MINION = "buff_minion"


@dataclass(frozen=True)
class SpellEffect:
    """Fixed spell payload; only the spell's mana cost is ever evolved."""

    kind: EffectKind
    x: int
    y: int = 0

    def __post_init__(self):
        if not (0 <= self.x <= ATTR_MAX):
            raise ParseError(f"spell effect x={self.x} outside [0, {ATTR_MAX}]")
        if not (0 <= self.y <= ATTR_MAX):
            raise ParseError(f"spell effect y={self.y} outside [0, {ATTR_MAX}]")
        if self.y and self.kind is not EffectKind.BUFF_MINION:
            raise ParseError(f"effect kind {self.kind.value} does not take y")


@dataclass(frozen=True)
class Card:
    """Immutable card definition.

    Minions carry attack/health, weapons attack/durability, spells an effect.
    """

    id: str
    name: str
    card_type: CardType
    cost: int
    card_class: HeroClass = HeroClass.NEUTRAL
    attack: Optional[int] = None
    health: Optional[int] = None
    durability: Optional[int] = None
    keywords: frozenset = frozenset()
    effect: Optional[SpellEffect] = None

    def __post_init__(self):
        if not self.id:
            raise ParseError("card id must be a non-empty string")
        if not (0 <= self.cost <= ATTR_MAX):
            raise ParseError(f"card {self.id}: cost {self.cost} outside [0, {ATTR_MAX}]")
        object.__setattr__(self, "keywords", frozenset(Keyword(k) for k in self.keywords))
        t = self.card_type
        if t is CardType.MINION:
            self._require(self.attack is not None and self.health is not None,
                          "minion needs attack and health")
            self._require(self.durability is None and self.effect is None,
                          "minion cannot have durability or effect")
            self._require(0 <= self.attack <= ATTR_MAX, f"attack {self.attack} outside [0, {ATTR_MAX}]")
            self._require(1 <= self.health <= ATTR_MAX, f"health {self.health} outside [1, {ATTR_MAX}]")
        elif t is CardType.WEAPON:
            self._require(self.attack is not None and self.durability is not None,
                          "weapon needs attack and durability")
            self._require(self.health is None and self.effect is None,
                          "weapon cannot have health or effect")
            self._require(0 <= self.attack <= ATTR_MAX, f"attack {self.attack} outside [0, {ATTR_MAX}]")
            self._require(1 <= self.durability <= ATTR_MAX,
                          f"durability {self.durability} outside [1, {ATTR_MAX}]")
            self._require(not self.keywords, "weapons carry no keywords")
        elif t is CardType.SPELL:
            self._require(self.effect is not None, "spell needs an effect")
            self._require(self.attack is None and self.health is None and self.durability is None,
                          "spell cannot have attack/health/durability")
            self._require(not self.keywords, "spells carry no keywords")

    def _require(self, cond: bool, msg: str):
        if not cond:
            raise ParseError(f"card {self.id}: {msg}")


class Locus(NamedTuple):
    """One evolvable attribute slot in a pool's chromosome."""

    card_id: str
    attribute: str  # "cost" | "attack" | "health" | "durability"


# Lower clamp is 1 for health/durability so patched minions and weapons
# stay representable game objects; 0 for cost and attack.
_ATTR_LOWER = {"cost": 0, "attack": 0, "health": 1, "durability": 1}


@dataclass(frozen=True)
class AttributeWeights:
    """Per-attribute weights for the magnitude metric (mana counts double)."""

    mana_weight: int = 2
    other_weight: int = 1

    def __post_init__(self):
        if self.mana_weight < 1 or self.other_weight < 1:
            raise ParseError("attribute weights must be >= 1")

    def weight_for(self, attribute: str) -> int:
        return self.mana_weight if attribute == "cost" else self.other_weight


UNIFORM_WEIGHTS = AttributeWeights(mana_weight=1, other_weight=1)


@dataclass(frozen=True)
class CardPool:
    """Ordered collection of unique cards; order defines the chromosome layout."""

    cards: tuple

    def __post_init__(self):
        object.__setattr__(self, "cards", tuple(self.cards))
        seen = set()
        for c in self.cards:
            if c.id in seen:
                raise ParseError(f"duplicate card id {c.id!r} in pool")
            seen.add(c.id)
        object.__setattr__(self, "_by_id", {c.id: c for c in self.cards})

    def __len__(self) -> int:
        return len(self.cards)

    def __iter__(self):
        return iter(self.cards)

    def __contains__(self, card_id: str) -> bool:
        return card_id in self._by_id

    def get(self, card_id: str) -> Card:
        try:
            return self._by_id[card_id]
        except KeyError:
            raise UnknownCardError(f"card id {card_id!r} not in pool") from None

    def index_of(self, card_id: str) -> int:
        if card_id not in self._by_id:
            raise UnknownCardError(f"card id {card_id!r} not in pool")
        return self.cards.index(self._by_id[card_id])

    def content_hash(self) -> str:
        """Stable hash of the pool contents; guards patch files against layout drift."""
        blob = json.dumps([_card_to_dict(c) for c in self.cards], sort_keys=True)
        return hashlib.sha256(blob.encode()).hexdigest()[:16]


@dataclass(frozen=True)
class Deck:
    """Exactly 30 card ids, at most two copies each, class-legal for the hero."""

    deck_class: HeroClass
    card_ids: tuple
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "card_ids", tuple(self.card_ids))
        if len(self.card_ids) != DECK_SIZE:
            raise DeckError(f"deck needs exactly {DECK_SIZE} cards, got {len(self.card_ids)}")
        counts: dict = {}
        for cid in self.card_ids:
            counts[cid] = counts.get(cid, 0) + 1
            if counts[cid] > MAX_COPIES:
                raise DeckError(f"more than {MAX_COPIES} copies of {cid!r}")
        if self.deck_class is HeroClass.NEUTRAL:
            raise DeckError("deck class must be a hero class, not neutral")

    def unique_ids(self) -> tuple:
        seen: dict = {}
        for cid in self.card_ids:
            seen.setdefault(cid, None)
        return tuple(seen)

    def validate_against(self, pool: CardPool) -> None:
        for cid in self.card_ids:
            card = pool.get(cid)
            if card.card_class not in (self.deck_class, HeroClass.NEUTRAL):
                raise DeckError(
                    f"card {cid!r} is {card.card_class.value}, not playable in a "
                    f"{self.deck_class.value} deck"
                )


@dataclass(frozen=True)
class PatchVector:
    """Integer chromosome of per-attribute deltas, one gene per pool locus."""

    genes: tuple

    def __post_init__(self):
        genes = tuple(int(g) for g in self.genes)
        for i, g in enumerate(genes):
            if not (GENE_MIN <= g <= GENE_MAX):
                raise LayoutError(f"gene {i} = {g} outside [{GENE_MIN}, {GENE_MAX}]")
        object.__setattr__(self, "genes", genes)

    def __len__(self) -> int:
        return len(self.genes)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.genes, dtype=np.int32)

    @classmethod
    def zeros(cls, pool: CardPool) -> "PatchVector":
        return cls(genes=(0,) * len(chromosome_layout(pool)))

    @classmethod
    def from_array(cls, arr) -> "PatchVector":
        return cls(genes=tuple(int(g) for g in arr))


def chromosome_layout(pool: CardPool) -> list:
    """Deterministic locus list: pool order, cost first, then attack, then
    health (minions) or durability (weapons). Spells contribute cost only."""
    loci = []
    for card in pool:
        loci.append(Locus(card.id, "cost"))
        if card.card_type is CardType.MINION:
            loci.append(Locus(card.id, "attack"))
            loci.append(Locus(card.id, "health"))
        elif card.card_type is CardType.WEAPON:
            loci.append(Locus(card.id, "attack"))
            loci.append(Locus(card.id, "durability"))
    return loci


def _check_length(pool: CardPool, patch: PatchVector) -> list:
    loci = chromosome_layout(pool)
    if len(patch) != len(loci):
        raise LayoutError(f"patch has {len(patch)} genes, layout needs {len(loci)}")
    return loci


def _patched_value(card: Card, attribute: str, gene: int) -> int:
    base = getattr(card, attribute)
    lo = _ATTR_LOWER[attribute]
    return max(lo, min(ATTR_MAX, base + gene))


def apply_patch(pool: CardPool, patch: PatchVector) -> CardPool:
    """Return a new pool with every gene applied and clamped; input unchanged."""
    loci = _check_length(pool, patch)
    updates: dict = {}
    for locus, gene in zip(loci, patch.genes):
        if gene == 0:
            continue
        card = pool.get(locus.card_id)
        updates.setdefault(locus.card_id, {})[locus.attribute] = _patched_value(card, locus.attribute, gene)
    new_cards = []
    for card in pool:
        delta = updates.get(card.id)
        if not delta:
            new_cards.append(card)
            continue
        new_cards.append(Card(
            id=card.id, name=card.name, card_type=card.card_type,
            cost=delta.get("cost", card.cost), card_class=card.card_class,
            attack=delta.get("attack", card.attack),
            health=delta.get("health", card.health),
            durability=delta.get("durability", card.durability),
            keywords=card.keywords, effect=card.effect,
        ))
    return CardPool(cards=tuple(new_cards))


def effective_change(pool: CardPool, patch: PatchVector) -> np.ndarray:
    """Post-clamp realized delta per locus; |effective| <= |gene| everywhere."""
    loci = _check_length(pool, patch)
    out = np.empty(len(loci), dtype=np.int32)
    for i, (locus, gene) in enumerate(zip(loci, patch.genes)):
        card = pool.get(locus.card_id)
        out[i] = _patched_value(card, locus.attribute, gene) - getattr(card, locus.attribute)
    return out


def magnitude(changes: Sequence[int], weights: AttributeWeights, layout: Sequence[Locus]) -> int:
    """Weighted sum of absolute per-attribute changes."""
    if len(changes) != len(layout):
        raise LayoutError(f"{len(changes)} changes for {len(layout)} loci")
    return int(sum(abs(int(c)) * weights.weight_for(l.attribute) for c, l in zip(changes, layout)))


def patch_magnitude(pool: CardPool, patch: PatchVector,
                    weights: AttributeWeights = AttributeWeights(),
                    effective: bool = True) -> int:
    """Magnitude of a patch over a pool.

    Defaults to post-clamp (effective) changes, which measure the realized
    disruption; pass effective=False for the raw-gene reading.
    """
    layout = _check_length(pool, patch)
    changes = effective_change(pool, patch) if effective else patch.genes
    return magnitude(changes, weights, layout)


def max_magnitude(pool: CardPool, weights: AttributeWeights = AttributeWeights(),
                  effective: bool = True) -> int:
    """Largest magnitude any single patch can realize on this pool."""
    total = 0
    for locus in chromosome_layout(pool):
        w = weights.weight_for(locus.attribute)
        if effective:
            base = getattr(pool.get(locus.card_id), locus.attribute)
            lo = _ATTR_LOWER[locus.attribute]
            reach = max(ATTR_MAX - base, base - lo)
            total += w * min(GENE_MAX, reach)
        else:
            total += w * GENE_MAX
    return total


# ---------------------------------------------------------------------------
# JSON serialization
# ---------------------------------------------------------------------------

def _card_to_dict(card: Card) -> dict:
    d = {"id": card.id, "name": card.name, "type": card.card_type.value,
         "class": card.card_class.value, "cost": card.cost}
    if card.card_type is CardType.MINION:
        d["attack"] = card.attack
        d["health"] = card.health
    elif card.card_type is CardType.WEAPON:
        d["attack"] = card.attack
        d["durability"] = card.durability
    else:
        d["effect"] = {"kind": card.effect.kind.value, "x": card.effect.x}
        if card.effect.y:
            d["effect"]["y"] = card.effect.y
    if card.keywords:
        d["keywords"] = sorted(k.value for k in card.keywords)
    return d


def _card_from_dict(d: dict, where: str) -> Card:
    try:
        ctype = CardType(d["type"])
        effect = None
        if "effect" in d:
            e = d["effect"]
            effect = SpellEffect(kind=EffectKind(e["kind"]), x=int(e["x"]), y=int(e.get("y", 0)))
        return Card(
            id=str(d["id"]), name=str(d.get("name", d["id"])), card_type=ctype,
            cost=int(d["cost"]), card_class=HeroClass(d.get("class", "neutral")),
            attack=None if d.get("attack") is None else int(d["attack"]),
            health=None if d.get("health") is None else int(d["health"]),
            durability=None if d.get("durability") is None else int(d["durability"]),
            keywords=frozenset(d.get("keywords", ())), effect=effect,
        )
    except ParseError as err:
        raise ParseError(f"{where}: {err}") from None
    except (KeyError, ValueError, TypeError) as err:
        raise ParseError(f"{where}: {err!r}") from None


def _load_json(path) -> object:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as err:
        raise ParseError(f"{path}: invalid JSON ({err})") from None


def load_pool(path) -> CardPool:
    data = _load_json(path)
    if not isinstance(data, list):
        raise ParseError(f"{path}: expected a JSON array of cards")
    return CardPool(cards=tuple(_card_from_dict(d, f"{path}: cards[{i}]")
                                for i, d in enumerate(data)))


def save_pool(pool: CardPool, path) -> None:
    _atomic_write_json(path, [_card_to_dict(c) for c in pool])


def load_deck(path, pool: CardPool) -> Deck:
    data = _load_json(path)
    if not isinstance(data, dict) or "cards" not in data:
        raise ParseError(f"{path}: expected {{class, cards}}")
    try:
        deck_class = HeroClass(data.get("class", ""))
    except ValueError:
        raise ParseError(f"{path}: unknown class {data.get('class')!r}") from None
    deck = Deck(deck_class=deck_class, card_ids=tuple(str(c) for c in data["cards"]),
                name=str(data.get("name", os.path.splitext(os.path.basename(path))[0])))
    deck.validate_against(pool)
    return deck


def save_deck(deck: Deck, path) -> None:
    _atomic_write_json(path, {"name": deck.name, "class": deck.deck_class.value,
                              "cards": list(deck.card_ids)})


def load_patch(path, pool: CardPool) -> PatchVector:
    data = _load_json(path)
    if not isinstance(data, dict) or "genes" not in data:
        raise ParseError(f"{path}: expected {{pool_hash, genes}}")
    if data.get("pool_hash") != pool.content_hash():
        raise LayoutError(
            f"{path}: pool_hash {data.get('pool_hash')!r} does not match pool "
            f"{pool.content_hash()!r}; layout may have drifted"
        )
    patch = PatchVector(genes=tuple(int(g) for g in data["genes"]))
    _check_length(pool, patch)
    return patch


def save_patch(patch: PatchVector, pool: CardPool, path, extra: Optional[dict] = None) -> None:
    _check_length(pool, patch)
    payload = {"pool_hash": pool.content_hash(), "genes": list(patch.genes)}
    if extra:
        payload.update(extra)
    _atomic_write_json(path, payload)


def _atomic_write_json(path, payload) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, path)
