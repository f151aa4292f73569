#!/usr/bin/env python3
"""Benchmark the compiled game kernels against the pure-Python fallback.

The fallback is the same code uncompiled, selected by METABALANCE_NO_JIT=1;
this script runs both in subprocesses (the flag is read at import time) and
reports per-game times plus the speedup, for agent-driven games and for
random playouts.

Usage:
    python benchmarks/bench_engine.py
    python benchmarks/bench_engine.py --games 200 --fallback-games 3
    python benchmarks/bench_engine.py --output results.json
"""

import argparse
import json
import os
import subprocess
import sys
import time

WORKER = r"""
import json, sys, time
import numpy as np
from metabalance import _kernels as K
from metabalance.agents import AgentSpec, SearchWorkspace
from metabalance.arena import _paired_seeds, run_games_arrays
from metabalance.data import bundled_meta
from metabalance.engine import EngineContext
from metabalance.jitcfg import JIT_ENABLED

games = int(sys.argv[1])
budget = int(sys.argv[2])

pool, decks, agents = bundled_meta()
hunter, paladin, _ = decks
ctx = EngineContext(pool, hunter, paladin)
agent = AgentSpec.for_style("aggro", node_budget=budget)
wv = agent.weights.as_vector()

# warm-up triggers compilation (or does nothing in fallback mode)
seeds, a_first = _paired_seeds(1, "warm", 2)
run_games_arrays(ctx.cardtab, ctx.deck_arrays[0], ctx.deck_arrays[1],
                 ctx.classes[0], ctx.classes[1], ctx.ubits[0], ctx.ubits[1],
                 wv, wv, budget, budget, seeds, a_first, 15, 15)

seeds, a_first = _paired_seeds(7, "bench", games)
t0 = time.perf_counter()
counts, _, _ = run_games_arrays(ctx.cardtab, ctx.deck_arrays[0], ctx.deck_arrays[1],
                                ctx.classes[0], ctx.classes[1],
                                ctx.ubits[0], ctx.ubits[1],
                                wv, wv, budget, budget, seeds, a_first, 15, 15)
agent_dt = time.perf_counter() - t0

state = np.empty(K.STATE_SIZE, dtype=np.int32)
movebuf = np.empty((K.MAX_ACTIONS, 3), dtype=np.int32)
out = np.empty((games, 3), dtype=np.int64)
rp_seeds = np.arange(games, dtype=np.uint64)
t0 = time.perf_counter()
K._random_playout_batch(ctx.cardtab, ctx.deck_arrays[0], ctx.deck_arrays[1],
                        ctx.classes[0], ctx.classes[1],
                        ctx.ubits[0], ctx.ubits[1],
                        rp_seeds, 0, state, movebuf, out)
random_dt = time.perf_counter() - t0

print(json.dumps({"jit": JIT_ENABLED, "games": games,
                  "agent_ms_per_game": agent_dt / games * 1_000,
                  "random_ms_per_game": random_dt / games * 1_000,
                  "mean_turns": float(counts[3]) / games}))
"""


def run_mode(disable_jit, games, budget):
    env = dict(os.environ)
    if disable_jit:
        env["METABALANCE_NO_JIT"] = "1"
    else:
        env.pop("METABALANCE_NO_JIT", None)
    proc = subprocess.run([sys.executable, "-c", WORKER, str(games), str(budget)],
                          capture_output=True, text=True, env=env)
    if proc.returncode != 0:
        raise RuntimeError(proc.stderr)
    return json.loads(proc.stdout.strip().splitlines()[-1])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--games", type=int, default=300,
                        help="games for the compiled run")
    parser.add_argument("--fallback-games", type=int, default=4,
                        help="games for the fallback run (it is slow)")
    parser.add_argument("--budget", type=int, default=1200,
                        help="agent node budget")
    parser.add_argument("--output", default=None, help="JSON results file")
    args = parser.parse_args()

    print(f"compiled kernels: {args.games} games, budget {args.budget} ...")
    jit = run_mode(False, args.games, args.budget)
    print(f"  agent games : {jit['agent_ms_per_game']:8.3f} ms/game "
          f"(mean {jit['mean_turns']:.1f} turns)")
    print(f"  random play : {jit['random_ms_per_game']:8.3f} ms/game")

    print(f"pure-Python fallback: {args.fallback_games} games ...")
    py = run_mode(True, args.fallback_games, args.budget)
    print(f"  agent games : {py['agent_ms_per_game']:8.3f} ms/game")
    print(f"  random play : {py['random_ms_per_game']:8.3f} ms/game")

    agent_speedup = py["agent_ms_per_game"] / jit["agent_ms_per_game"]
    random_speedup = py["random_ms_per_game"] / jit["random_ms_per_game"]
    print(f"speedup: {agent_speedup:,.0f}x agent-driven, {random_speedup:,.0f}x random")

    if args.output:
        with open(args.output, "w") as fh:
            json.dump({"jit": jit, "fallback": py,
                       "agent_speedup": agent_speedup,
                       "random_speedup": random_speedup}, fh, indent=2)
        print(f"results written to {args.output}")


if __name__ == "__main__":
    main()
