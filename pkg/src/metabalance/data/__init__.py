"""Bundled desk-scale card pool, reference decks and agent specs.

These fixtures make every experiment reproducible offline. The deck order
(hunter, paladin, warlock) is the canonical meta order used by the
acceptance runs; the paladin list is intentionally the strongest.
"""

import json
from importlib import resources

from ..agents import load_agent
from ..cards import load_deck, load_pool

_DECK_FILES = ("deck_hunter.json", "deck_paladin.json", "deck_warlock.json")


def _path(name) -> str:
    return str(resources.files(__package__) / name)


def bundled_pool():
    return load_pool(_path("pool.json"))


def bundled_decks(pool=None):
    pool = pool if pool is not None else bundled_pool()
    return tuple(load_deck(_path(name), pool) for name in _DECK_FILES)


def bundled_agents():
    """Agents aligned with the deck order: hunter aggro, paladin and warlock control."""
    with open(_path("agents.json")) as fh:
        specs = json.load(fh)
    return tuple(load_agent(s) for s in specs)


def bundled_meta():
    """(pool, decks, agents) in canonical order: hunter, paladin, warlock."""
    pool = bundled_pool()
    return pool, bundled_decks(pool), bundled_agents()
