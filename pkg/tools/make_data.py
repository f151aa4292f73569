"""Generate the bundled desk-scale pool, decks and agent specs.

The paladin list is deliberately overtuned (graded card power topped by one
clearly overpowered card) so the stock meta is imbalanced: the GA has real
work to do and the nerf sweep has a signal to find.
"""

import json
import os

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, "..", "src", "metabalance", "data")


def M(cid, name, cls, cost, atk, hp, kw=()):
    d = {"id": cid, "name": name, "type": "minion", "class": cls,
         "cost": cost, "attack": atk, "health": hp}
    if kw:
        d["keywords"] = sorted(kw)
    return d


def S(cid, name, cls, cost, kind, x, y=0):
    d = {"id": cid, "name": name, "type": "spell", "class": cls,
         "cost": cost, "effect": {"kind": kind, "x": x}}
    if y:
        d["effect"]["y"] = y
    return d


def W(cid, name, cls, cost, atk, dur):
    return {"id": cid, "name": name, "type": "weapon", "class": cls,
            "cost": cost, "attack": atk, "durability": dur}


NEUTRAL = [
    M("n_recruit", "Town Recruit", "neutral", 1, 1, 2),
    M("n_soldier", "Hired Soldier", "neutral", 2, 2, 3),
    M("n_warrior", "Pit Warrior", "neutral", 3, 3, 4),
    M("n_brute", "Hill Brute", "neutral", 4, 4, 4),
    M("n_giant", "Moss Giant", "neutral", 5, 5, 6),
    M("n_guard", "Gate Guard", "neutral", 3, 1, 5, kw=["taunt"]),
    M("n_colossus", "Stone Colossus", "neutral", 6, 6, 7),
    M("n_falcon", "Swift Falcon", "neutral", 2, 2, 1, kw=["charge"]),
]

HUNTER = [
    M("h_pup", "Kennel Pup", "hunter", 1, 1, 1, kw=["charge"]),
    M("h_archer", "Camp Archer", "hunter", 1, 2, 1),
    M("h_wolf", "Timber Wolf", "hunter", 2, 3, 2),
    M("h_stalker", "Ridge Stalker", "hunter", 3, 4, 2, kw=["charge"]),
    S("h_sting", "Sting", "hunter", 1, "damage_enemy_hero", 2),
    S("h_shot", "Snap Shot", "hunter", 2, "damage_target", 2),
    W("h_bow", "Short Bow", "hunter", 2, 2, 2),
]

WARLOCK = [
    M("w_imp", "Gutter Imp", "warlock", 1, 1, 2),
    M("w_fiend", "Pale Fiend", "warlock", 4, 5, 5),
    M("w_golem", "Bone Golem", "warlock", 6, 7, 8, kw=["taunt"]),
    M("w_guard", "Void Guard", "warlock", 3, 2, 5, kw=["taunt"]),
    S("w_gaze", "Withering Gaze", "warlock", 3, "damage_target", 5),
    S("w_nova", "Shadow Nova", "warlock", 4, "damage_all_enemy_minions", 3),
    S("w_pact", "Blood Pact", "warlock", 3, "heal", 4),
]

# a deliberate power ladder, strongest first: the sweep needs a monotone
# quality gradient so WRD and nerf impact separate from sampling noise
PALADIN = [
    M("p_vanguard", "Blessed Vanguard", "paladin", 3, 6, 7, kw=["taunt"]),
    M("p_zealot", "Temple Zealot", "paladin", 2, 4, 4),
    M("p_champion", "Dawn Champion", "paladin", 4, 6, 6),
    S("p_smite", "Smite", "paladin", 1, "damage_target", 4),
    W("p_blade", "Consecrated Blade", "paladin", 2, 4, 2),
    M("p_knight", "Errant Knight", "paladin", 4, 5, 5),
    M("p_keeper", "Shrine Keeper", "paladin", 3, 3, 4, kw=["taunt"]),
    S("p_burst", "Radiant Burst", "paladin", 4, "damage_all_enemy_minions", 3),
    S("p_blessing", "War Blessing", "paladin", 2, "buff_minion", 2, y=2),
    M("p_squire", "Eager Squire", "paladin", 1, 1, 2),
    S("p_healer", "Circle of Light", "paladin", 3, "heal", 4),
    S("p_scribe", "Scribe's Insight", "paladin", 3, "draw_cards", 1),
    M("p_votary", "Quiet Votary", "paladin", 3, 2, 2),
    M("p_sentry", "Temple Sentry", "paladin", 4, 1, 4, kw=["taunt"]),
    M("p_titan", "Marble Titan", "paladin", 9, 7, 8),
]


def deck(name, cls, ids):
    assert len(ids) == 15, (name, len(ids))
    return {"name": name, "class": cls, "cards": [c for c in ids for _ in range(2)]}


def main():
    pool = NEUTRAL + HUNTER + WARLOCK + PALADIN
    decks = {
        "deck_hunter.json": deck("hunter_aggro", "hunter",
                                 [c["id"] for c in HUNTER] + [c["id"] for c in NEUTRAL]),
        "deck_warlock.json": deck("warlock_control", "warlock",
                                  [c["id"] for c in WARLOCK] + [c["id"] for c in NEUTRAL]),
        "deck_paladin.json": deck("paladin_control", "paladin",
                                  [c["id"] for c in PALADIN]),
    }
    agents = [
        {"style": "aggro", "node_budget": 1200},
        {"style": "control", "node_budget": 1200},
        {"style": "control", "node_budget": 1200},
    ]
    os.makedirs(DATA, exist_ok=True)
    with open(os.path.join(DATA, "pool.json"), "w") as fh:
        json.dump(pool, fh, indent=2)
        fh.write("\n")
    for fname, payload in decks.items():
        with open(os.path.join(DATA, fname), "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    with open(os.path.join(DATA, "agents.json"), "w") as fh:
        json.dump(agents, fh, indent=2)
        fh.write("\n")
    print(f"wrote {len(pool)} cards + 3 decks + agents to {os.path.normpath(DATA)}")


if __name__ == "__main__":
    main()
