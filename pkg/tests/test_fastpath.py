"""Compiled kernels and the env-flag pure-Python fallback agree bit for bit.

The fallback is selected the way users select it (METABALANCE_NO_JIT=1), in
a subprocess, because mixing one uncompiled function over compiled helpers
is not a supported execution mode.
"""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from metabalance import _kernels as K
from metabalance.jitcfg import JIT_ENABLED

pytestmark = pytest.mark.skipif(
    not JIT_ENABLED, reason="fallback mode already active; nothing to compare")

PROBE = r"""
import json
import sys

import numpy as np

from metabalance import _kernels as K
from metabalance.agents import AgentSpec, SearchWorkspace
from metabalance.arena import _paired_seeds
from metabalance.engine import EngineContext
from metabalance.cards import CardPool, Deck, HeroClass, load_pool
import metabalance.cards as cards

sys.path.insert(0, sys.argv[1])
from conftest import double, minion, spell, weapon
from metabalance.cards import EffectKind

pool = CardPool(cards=(
    minion("m1", 1, 2, 1), minion("m2", 2, 2, 3), minion("m3", 3, 3, 3),
    minion("m4", 2, 1, 4, keywords={"taunt"}),
    minion("m5", 3, 3, 1, keywords={"charge"}),
    spell("s1", 1, EffectKind.DAMAGE_TARGET, 2),
    spell("s2", 3, EffectKind.DAMAGE_ALL_ENEMY_MINIONS, 2),
    spell("s3", 2, EffectKind.DAMAGE_ENEMY_HERO, 3),
    spell("s4", 2, EffectKind.HEAL, 4),
    spell("s5", 2, EffectKind.DRAW_CARDS, 2),
    spell("s6", 1, EffectKind.BUFF_MINION, 2, 2),
    weapon("w1", 2, 3, 2), weapon("w2", 4, 4, 2),
    minion("m6", 5, 5, 5), minion("m7", 4, 4, 4),
))
ids1 = ["m1", "m2", "m3", "m5", "s1", "s3", "w1", "m6", "m7", "s5",
        "m4", "s6", "s2", "s4", "w2"]
ids2 = ["m2", "m3", "m4", "s4", "s6", "w2", "m6", "m7", "s1", "s3",
        "m1", "m5", "w1", "s2", "s5"]
deck1 = Deck(deck_class=HeroClass.HUNTER, card_ids=double(ids1), name="d1")
deck2 = Deck(deck_class=HeroClass.PALADIN, card_ids=double(ids2), name="d2")
ctx = EngineContext(pool, deck1, deck2)

agent = AgentSpec.for_style("aggro", node_budget=300)
seeds, a_first = _paired_seeds(7, "eq", 4)
wv = agent.weights.as_vector()
ws = SearchWorkspace(agent.node_budget)
counts = np.zeros(4, dtype=np.int64)
tel_a = np.zeros((15, 4), dtype=np.int64)
tel_b = np.zeros((15, 4), dtype=np.int64)
K._play_batch(ctx.cardtab, ctx.deck_arrays[0], ctx.deck_arrays[1],
              ctx.classes[0], ctx.classes[1], ctx.ubits[0], ctx.ubits[1],
              wv, wv, agent.node_budget, agent.node_budget, seeds, a_first,
              ws.state, ws.nodes, ws.scores, ws.parents, ws.acts, ws.depths,
              ws.movebuf, ws.htab_key, ws.htab_epoch, ws.epoch_box, ws.path,
              counts, tel_a, tel_b)

state = np.empty(K.STATE_SIZE, dtype=np.int32)
movebuf = np.empty((K.MAX_ACTIONS, 3), dtype=np.int32)
out = np.empty((5, 3), dtype=np.int64)
chain = K._random_playout_batch(ctx.cardtab, ctx.deck_arrays[0], ctx.deck_arrays[1],
                                ctx.classes[0], ctx.classes[1],
                                ctx.ubits[0], ctx.ubits[1],
                                np.arange(5, dtype=np.uint64), 1, state, movebuf, out)

fresh = np.empty(K.STATE_SIZE, dtype=np.int32)
K._new_game(fresh, ctx.deck_arrays[0], ctx.deck_arrays[1],
            ctx.classes[0], ctx.classes[1], ctx.ubits, np.uint64(5))

print(json.dumps({
    "counts": counts.tolist(),
    "tel_a": tel_a.tolist(),
    "tel_b": tel_b.tolist(),
    "playout_chain": int(chain),
    "playouts": out.tolist(),
    "exact_hash": int(K._exact_hash(fresh)),
    "turn_hash": int(K._turn_hash(fresh)),
    "mix": [int(K._mix64(np.uint64(x))) for x in (0, 1, 2**63 + 12345, 2**64 - 1)],
}))
"""


def _run_probe(disable_jit: bool) -> dict:
    env = dict(os.environ)
    if disable_jit:
        env["METABALANCE_NO_JIT"] = "1"
    else:
        env.pop("METABALANCE_NO_JIT", None)
    here = os.path.dirname(os.path.abspath(__file__))
    proc = subprocess.run([sys.executable, "-c", PROBE, here],
                          capture_output=True, text=True, env=env, timeout=600)
    assert proc.returncode == 0, proc.stderr
    return json.loads(proc.stdout.strip().splitlines()[-1])


def test_fallback_matches_jit_bit_for_bit():
    jit = _run_probe(disable_jit=False)
    py = _run_probe(disable_jit=True)
    assert jit == py


@pytest.mark.filterwarnings("ignore:overflow encountered")
def test_scalar_helpers_match_uncompiled_directly():
    # the uncompiled path wraps uint64 on purpose; numpy warns about it
    for x in (0, 1, 123456789, 2**63 + 12345, 2**64 - 1):
        assert K._mix64(np.uint64(x)) == K._mix64.py_func(np.uint64(x))
        assert K._rand_u64(np.uint64(x), 3) == K._rand_u64.py_func(np.uint64(x), 3)
