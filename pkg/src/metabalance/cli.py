"""Experiment driver.

Subcommands cover the full pipeline: ``simulate`` (match-up matrix),
``evolve-single`` (GA), ``evolve-pareto`` (NSGA-II), ``nerf-sweep``
(per-card impact), ``apply-patch`` and ``validate``. Every run writes its
outputs atomically next to a manifest that pins the configuration, seed and
library versions, so reruns reproduce files byte for byte. Flags fall back
to METABALANCE_* environment variables for CI use.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys

import numpy as np

from . import __version__
from .agents import AgentSpec, load_agents
from .arena import (DeckEntry, MetaConfig, matchup_matrix, meta_win_rate,
                    write_matrix_csv, write_telemetry_json)
from .cards import (AttributeWeights, PatchVector, load_deck, load_patch,
                    load_pool, patch_magnitude, save_patch, save_pool,
                    apply_patch)
from .errors import MetabalanceError
from .evolve import GAConfig, PatchEvaluator, run_ga, run_nsga2
from .metrics import nerf_sweep, write_impact_csv


def _env_default(name, fallback=None):
    return os.environ.get(f"METABALANCE_{name}", fallback)


def _add_common(p, decks_required=True):
    p.add_argument("--pool", default=_env_default("POOL"), required=_env_default("POOL") is None,
                   help="card pool JSON (env: METABALANCE_POOL)")
    p.add_argument("--decks", nargs="+", default=_split_env("DECKS"),
                   required=_split_env("DECKS") is None and decks_required,
                   help="deck JSON files (env: METABALANCE_DECKS, colon-separated)")
    p.add_argument("--agents", default=_env_default("AGENTS"),
                   help="agent spec JSON file, or comma-separated styles like "
                        "aggro,control,control (env: METABALANCE_AGENTS)")
    p.add_argument("--seed", type=int, default=int(_env_default("SEED", "0")),
                   help="base seed; every derived seed is recorded in the manifest")
    p.add_argument("--jobs", type=int, default=int(_env_default("JOBS", "1")),
                   help="worker threads for game batches")
    p.add_argument("--out", default=_env_default("OUT", "out"),
                   help="output directory")


def _split_env(name):
    raw = _env_default(name)
    return raw.split(":") if raw else None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metabalance",
        description="Simulate, balance and analyze a card-game metagame.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="pairwise match-up matrix and meta win rates")
    _add_common(p)
    p.add_argument("--games", type=int, default=int(_env_default("GAMES", "10000")))
    p.add_argument("--mirrors", action="store_true", help="simulate mirror match-ups "
                   "instead of fixing the diagonal at 0.5")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("evolve-single", help="single-objective GA balance search")
    _add_common(p)
    p.add_argument("--games", type=int, default=int(_env_default("GAMES", "100")),
                   help="games per match-up per evaluation")
    p.add_argument("--generations", type=int, default=int(_env_default("GENERATIONS", "12")))
    p.add_argument("--population", type=int, default=100)
    p.add_argument("--crossover-rate", type=float, default=0.35)
    p.add_argument("--mutation-rate", type=float, default=0.20)
    p.add_argument("--gene-mutation-prob", type=float, default=0.05)
    p.add_argument("--tournament-size", type=int, default=3)
    p.add_argument("--seed-patch", action="append", default=[],
                   help="patch JSON injected into the initial population (repeatable)")
    p.set_defaults(func=cmd_evolve_single)

    p = sub.add_parser("evolve-pareto", help="NSGA-II over (balance, magnitude)")
    _add_common(p)
    p.add_argument("--games", type=int, default=int(_env_default("GAMES", "100")))
    p.add_argument("--generations", type=int, default=int(_env_default("GENERATIONS", "20")))
    p.add_argument("--population", type=int, default=100)
    p.add_argument("--crossover-rate", type=float, default=0.35)
    p.add_argument("--mutation-rate", type=float, default=0.20)
    p.add_argument("--gene-mutation-prob", type=float, default=0.05)
    p.add_argument("--seed-patch", action="append", default=[],
                   help="patch JSON added to the seeded start (zero patch is always in)")
    p.set_defaults(func=cmd_evolve_pareto)

    p = sub.add_parser("nerf-sweep", help="per-card +1-mana nerf impact (WRD/WRP/WRN)")
    _add_common(p)
    p.add_argument("--target-deck", required=True, help="deck whose cards are swept")
    p.add_argument("--target-agent", default="control",
                   help="style or index into --agents for the target deck")
    p.add_argument("--games", type=int, default=int(_env_default("GAMES", "5000")),
                   help="games per card, split across opponents")
    p.set_defaults(func=cmd_nerf_sweep)

    p = sub.add_parser("apply-patch", help="write a patched card pool for inspection")
    p.add_argument("--pool", default=_env_default("POOL"), required=_env_default("POOL") is None)
    p.add_argument("--patch", required=True)
    p.add_argument("--out", default=_env_default("OUT", "out"))
    p.set_defaults(func=cmd_apply_patch)

    p = sub.add_parser("validate", help="schema and invariant checks on input files")
    p.add_argument("--pool", default=_env_default("POOL"), required=_env_default("POOL") is None)
    p.add_argument("--decks", nargs="*", default=_split_env("DECKS") or [])
    p.add_argument("--patch", default=None)
    p.set_defaults(func=cmd_validate)
    return parser


# ---------------------------------------------------------------------------
# loading helpers
# ---------------------------------------------------------------------------

def _load_meta(args):
    pool = load_pool(args.pool)
    decks = [load_deck(path, pool) for path in args.decks]
    agents = _resolve_agents(args.agents, len(decks))
    return pool, decks, agents


def _resolve_agents(spec, n_decks):
    if spec is None:
        raise MetabalanceError("--agents is required (styles or a JSON file)")
    if os.path.exists(spec):
        agents = load_agents(spec)
    else:
        agents = [AgentSpec.for_style(s.strip()) for s in spec.split(",")]
    if len(agents) != n_decks:
        raise MetabalanceError(f"{len(agents)} agents for {n_decks} decks")
    return agents


def _ensure_out(args) -> str:
    os.makedirs(args.out, exist_ok=True)
    return args.out


def _write_manifest(args, out_dir, extra=None) -> None:
    import numba
    import scipy

    config = {k: v for k, v in sorted(vars(args).items())
              if k not in ("func",) and not callable(v)}
    payload = {
        "command": args.command,
        "config": config,
        "seed": args.seed if hasattr(args, "seed") else None,
        "versions": {"metabalance": __version__, "numpy": np.__version__,
                     "numba": numba.__version__, "scipy": scipy.version.version,
                     "python": sys.version.split()[0]},
    }
    if extra:
        payload.update(extra)
    blob = json.dumps(payload, indent=2, sort_keys=True, default=str)
    digest = hashlib.sha256(blob.encode()).hexdigest()[:16]
    payload["config_hash"] = digest
    tmp = os.path.join(out_dir, "manifest.json.tmp")
    with open(tmp, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")
    os.replace(tmp, os.path.join(out_dir, "manifest.json"))


def _atomic_csv(path, header, rows) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)
    os.replace(tmp, path)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_simulate(args) -> int:
    pool, decks, agents = _load_meta(args)
    out = _ensure_out(args)
    entries = tuple(DeckEntry(d, a, d.name or f"deck{i}")
                    for i, (d, a) in enumerate(zip(decks, agents)))
    config = MetaConfig(entries=entries, games_per_matchup=args.games,
                        base_seed=args.seed, include_mirrors=args.mirrors,
                        jobs=args.jobs)
    matrix = matchup_matrix(pool, config)
    write_matrix_csv(matrix, os.path.join(out, "matrix.csv"))
    write_telemetry_json(matrix, os.path.join(out, "telemetry.json"))
    _write_manifest(args, out, {"pool_hash": pool.content_hash()})
    meta = meta_win_rate(matrix)
    for label, rate in zip(matrix.deck_labels, meta):
        print(f"{label}: meta win rate {rate:.4f}")
    from .evolve import balance_fitness

    print(f"balance F = {balance_fitness(matrix):.4f}")
    return 0


def _ga_config(args) -> GAConfig:
    return GAConfig(population_size=args.population,
                    crossover_rate=args.crossover_rate,
                    mutation_rate=args.mutation_rate,
                    gene_mutation_prob=args.gene_mutation_prob,
                    tournament_size=getattr(args, "tournament_size", 3),
                    generations=args.generations,
                    games_per_matchup=args.games,
                    seed=args.seed, jobs=args.jobs)


def _seed_patches(args, pool):
    return tuple(load_patch(path, pool) for path in args.seed_patch)


def cmd_evolve_single(args) -> int:
    pool, decks, agents = _load_meta(args)
    out = _ensure_out(args)
    config = _ga_config(args)
    evaluator = PatchEvaluator(pool, decks, agents,
                               games_per_matchup=config.games_per_matchup,
                               jobs=config.jobs)
    result = run_ga(evaluator, config, seed_patches=_seed_patches(args, pool),
                    progress=lambda row: print(
                        f"gen {row.generation:3d}: min {row.min_f:.4f} "
                        f"avg {row.avg_f:.4f} max {row.max_f:.4f}"))
    _atomic_csv(os.path.join(out, "generations.csv"),
                ["generation", "min_F", "avg_F", "max_F", "best_M"],
                [[r.generation, f"{r.min_f:.6f}", f"{r.avg_f:.6f}",
                  f"{r.max_f:.6f}", r.best_m] for r in result.rows])
    save_patch(result.best.patch(), pool, os.path.join(out, "best_patch.json"),
               extra={"F": result.best.fitness, "M": result.best.magnitude,
                      "generation": result.best_generation})
    _write_manifest(args, out, {"pool_hash": pool.content_hash(),
                                "best": {"F": result.best.fitness,
                                         "M": result.best.magnitude}})
    print(f"best F = {result.best.fitness:.4f}, M = {result.best.magnitude} "
          f"(generation {result.best_generation})")
    return 0


def cmd_evolve_pareto(args) -> int:
    pool, decks, agents = _load_meta(args)
    out = _ensure_out(args)
    config = _ga_config(args)
    evaluator = PatchEvaluator(pool, decks, agents,
                               games_per_matchup=config.games_per_matchup,
                               jobs=config.jobs)
    result = run_nsga2(evaluator, config, seed_patches=_seed_patches(args, pool),
                       progress=lambda gen, _pop: print(f"generation {gen} done"))
    archive = result.archive
    on_front = set(archive.front_indices())
    _atomic_csv(os.path.join(out, "archive.csv"),
                ["individual_id", "generation", "F", "M", "on_front", "seeded"],
                [[e.individual_id, e.generation, f"{e.fitness:.6f}", e.magnitude,
                  int(i in on_front), int(e.seeded)]
                 for i, e in enumerate(archive.entries)])
    front = sorted(archive.front(), key=lambda e: (e.fitness, e.magnitude))
    payload = [{"individual_id": e.individual_id, "F": e.fitness, "M": e.magnitude,
                "genes": [int(g) for g in e.genes]} for e in front]
    tmp = os.path.join(out, "front_patches.json.tmp")
    with open(tmp, "w") as fh:
        json.dump({"pool_hash": pool.content_hash(), "front": payload}, fh, indent=2)
        fh.write("\n")
    os.replace(tmp, os.path.join(out, "front_patches.json"))
    _write_manifest(args, out, {"pool_hash": pool.content_hash(),
                                "front_size": len(front)})
    print(f"archive: {len(archive.entries)} points, front: {len(front)}")
    return 0


def cmd_nerf_sweep(args) -> int:
    pool, decks, agents = _load_meta(args)
    out = _ensure_out(args)
    target = load_deck(args.target_deck, pool)
    if os.path.exists(args.target_agent) if args.target_agent else False:
        target_agent = load_agents(args.target_agent)[0]
    elif args.target_agent in ("aggro", "control"):
        target_agent = AgentSpec.for_style(args.target_agent)
    else:
        target_agent = agents[int(args.target_agent)]
    report = nerf_sweep(target, target_agent, list(zip(decks, agents)), pool,
                        games=args.games, base_seed=args.seed, jobs=args.jobs,
                        progress=lambda row: print(
                            f"{row.card_id}: WRN {row.wrn:.4f}"))
    write_impact_csv(report, os.path.join(out, "impact.csv"))
    _write_manifest(args, out, {"pool_hash": pool.content_hash(),
                                "baseline": report.baseline_meta_win_rate})
    print(f"baseline meta win rate {report.baseline_meta_win_rate:.4f}; "
          f"sharpest nerf: {report.rows[0].card_id} -> {report.rows[0].wrn:.4f}")
    return 0


def cmd_apply_patch(args) -> int:
    pool = load_pool(args.pool)
    patch = load_patch(args.patch, pool)
    out = _ensure_out(args)
    patched = apply_patch(pool, patch)
    save_pool(patched, os.path.join(out, "patched_cards.json"))
    weights = AttributeWeights()
    print(f"magnitude (weighted, effective) = {patch_magnitude(pool, patch, weights)}")
    _write_manifest(args, out, {"pool_hash": pool.content_hash()})
    return 0


def cmd_validate(args) -> int:
    pool = load_pool(args.pool)
    print(f"pool: {len(pool)} cards, hash {pool.content_hash()} - ok")
    for path in args.decks:
        deck = load_deck(path, pool)
        print(f"deck {deck.name}: 30 cards, class {deck.deck_class.value} - ok")
    if args.patch:
        patch = load_patch(args.patch, pool)
        print(f"patch: {len(patch)} genes - ok")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MetabalanceError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except FileNotFoundError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
