"""Balance-patch evolution: a single-objective GA and NSGA-II.

Both searches minimize the meta imbalance F, the normalized distance of the
pairwise win rates from the 50% ideal; the multi-objective run additionally
minimizes the magnitude M of the applied changes. Evaluation is noisy by
construction (finite game samples); each generation draws a fresh evaluation
seed and results are cached per (patch, seed) so identical clones are not
replayed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import _kernels as K
from .agents import AgentSpec
from .arena import run_games_arrays, stable_seed, _paired_seeds
from .cards import (AttributeWeights, CardPool, Deck, PatchVector,
                    chromosome_layout, GENE_MAX, GENE_MIN, ATTR_MAX)
from .engine import build_cardtab, deck_indices, unique_bits, _CLASS_CODE
from .errors import ConfigError, IncompleteMatrixError, LayoutError


def balance_fitness(win_rates) -> float:
    """Normalized distance of pairwise win rates from the balanced ideal.

    Accepts a MatchupMatrix or an iterable of upper-triangle win rates; the
    4/|pairs| normalizer keeps the result in [0, 1] for any meta size and
    equals the three-deck constant 4/3.
    """
    if hasattr(win_rates, "pairwise_win_rates"):
        rates = win_rates.pairwise_win_rates()
    else:
        rates = [float(w) for w in win_rates]
    if not rates:
        raise IncompleteMatrixError("need at least one pairwise win rate")
    if any(math.isnan(w) for w in rates):
        raise IncompleteMatrixError(f"missing match-up win rate in {rates}")
    total = sum((w - 0.5) ** 2 for w in rates)
    return math.sqrt(total * 4.0 / len(rates))


@dataclass
class Individual:
    """A candidate patch with its measured objectives."""

    genes: np.ndarray
    fitness: Optional[float] = None
    magnitude: Optional[int] = None

    def __post_init__(self):
        self.genes = np.asarray(self.genes, dtype=np.int32)

    @property
    def evaluated(self) -> bool:
        return self.fitness is not None

    @property
    def objectives(self) -> tuple:
        return (self.fitness, self.magnitude)

    def patch(self) -> PatchVector:
        return PatchVector.from_array(self.genes)


@dataclass(frozen=True)
class GAConfig:
    population_size: int = 100
    crossover_rate: float = 0.35
    mutation_rate: float = 0.20
    gene_mutation_prob: float = 0.05
    tournament_size: int = 3
    generations: int = 12
    games_per_matchup: int = 100
    seed: int = 0
    jobs: int = 1
    elitism: int = 1

    def __post_init__(self):
        for name in ("crossover_rate", "mutation_rate", "gene_mutation_prob"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ConfigError(f"{name}={v} outside [0, 1]")
        for name in ("population_size", "tournament_size", "games_per_matchup", "jobs"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")
        if self.generations < 0 or self.elitism < 0:
            raise ConfigError("generations and elitism must be >= 0")


class PatchEvaluator:
    """Maps a patch to (F, M) by simulating the patched meta.

    Works directly on the kernels' card table so a patched pool costs one
    vectorized clamp, not an object rebuild. M is the weighted magnitude of
    the post-clamp (realized) changes.
    """

    def __init__(self, pool: CardPool, decks: Sequence[Deck], agents: Sequence[AgentSpec],
                 games_per_matchup: int = 100, jobs: int = 1,
                 weights: AttributeWeights = AttributeWeights()):
        if len(decks) < 2 or len(decks) != len(agents):
            raise ConfigError("need >= 2 decks with one agent each")
        self.pool = pool
        self.decks = tuple(decks)
        self.agents = tuple(agents)
        self.games_per_matchup = games_per_matchup
        self.jobs = jobs
        self.base_cardtab = build_cardtab(pool)
        layout = chromosome_layout(pool)
        self.n_genes = len(layout)
        col = {"cost": K.C_COST, "attack": K.C_ATK, "health": K.C_HP, "durability": K.C_HP}
        self.locus_card = np.array([pool.index_of(l.card_id) for l in layout], dtype=np.int64)
        self.locus_col = np.array([col[l.attribute] for l in layout], dtype=np.int64)
        self.locus_lower = np.array([0 if l.attribute in ("cost", "attack") else 1
                                     for l in layout], dtype=np.int32)
        self.locus_weight = np.array([weights.weight_for(l.attribute) for l in layout],
                                     dtype=np.int64)
        self.base_vals = self.base_cardtab[self.locus_card, self.locus_col].copy()
        self.deck_arrays = tuple(deck_indices(d, pool) for d in decks)
        self.ubit_arrays = tuple(unique_bits(d, pool) for d in decks)
        self.classes = tuple(_CLASS_CODE[d.deck_class] for d in decks)
        self.wvecs = tuple(a.weights.as_vector() for a in agents)
        self.budgets = tuple(a.node_budget for a in agents)
        self.uniques = tuple(len(d.unique_ids()) for d in decks)
        self.pairs = [(i, j) for i in range(len(decks)) for j in range(i + 1, len(decks))]
        self._cache: dict = {}

    def patched_cardtab(self, genes: np.ndarray) -> np.ndarray:
        tab = self.base_cardtab.copy()
        vals = np.clip(self.base_vals + genes, self.locus_lower, ATTR_MAX)
        tab[self.locus_card, self.locus_col] = vals
        return tab

    def magnitude_of(self, genes: np.ndarray) -> int:
        vals = np.clip(self.base_vals + genes, self.locus_lower, ATTR_MAX)
        return int(np.sum(np.abs(vals - self.base_vals) * self.locus_weight))

    def max_magnitude(self) -> int:
        up = np.minimum(GENE_MAX, ATTR_MAX - self.base_vals)
        down = np.minimum(GENE_MAX, self.base_vals - self.locus_lower)
        return int(np.sum(np.maximum(up, down) * self.locus_weight))

    def evaluate(self, genes: np.ndarray, eval_seed: int) -> tuple:
        """Return (F, M); cached per (patch, evaluation seed)."""
        genes = np.asarray(genes, dtype=np.int32)
        if genes.shape != (self.n_genes,):
            raise LayoutError(f"patch has {genes.shape} genes, layout needs {self.n_genes}")
        key = (genes.tobytes(), eval_seed)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        tab = self.patched_cardtab(genes)
        rates = []
        for i, j in self.pairs:
            seeds, a_first = _paired_seeds(eval_seed, f"pair:{i}|{j}", self.games_per_matchup)
            counts, _ta, _tb = run_games_arrays(
                tab, self.deck_arrays[i], self.deck_arrays[j],
                self.classes[i], self.classes[j],
                self.ubit_arrays[i], self.ubit_arrays[j],
                self.wvecs[i], self.wvecs[j], self.budgets[i], self.budgets[j],
                seeds, a_first, self.uniques[i], self.uniques[j], jobs=self.jobs)
            decisive = counts[0] + counts[1]
            rates.append(float(counts[0] / decisive) if decisive else 0.5)
        result = (balance_fitness(rates), self.magnitude_of(genes))
        self._cache[key] = result
        return result


# ---------------------------------------------------------------------------
# variation operators
# ---------------------------------------------------------------------------

def random_genes(n: int, rng: np.random.Generator) -> np.ndarray:
    return rng.integers(GENE_MIN, GENE_MAX + 1, size=n, dtype=np.int32)


def tournament_select(population: Sequence[Individual], k: int,
                      rng: np.random.Generator) -> Individual:
    """Sample k with replacement; lowest fitness wins, ties by magnitude then index."""
    if not population:
        raise ConfigError("cannot select from an empty population")
    if any(not ind.evaluated for ind in population):
        raise ConfigError("tournament selection needs an evaluated population")
    picks = rng.integers(0, len(population), size=k)
    best = None
    for idx in picks:
        ind = population[int(idx)]
        key = (ind.fitness, ind.magnitude, int(idx))
        if best is None or key < best[0]:
            best = (key, ind)
    return best[1]


def two_point_crossover(parent_a: np.ndarray, parent_b: np.ndarray,
                        rng: np.random.Generator) -> tuple:
    """Swap the segment between two uniform cut points; i == j is a no-op."""
    if parent_a.shape != parent_b.shape:
        raise LayoutError("crossover needs equal-length gene vectors")
    n = len(parent_a)
    i, j = sorted(rng.integers(0, n + 1, size=2))
    child_a = parent_a.copy()
    child_b = parent_b.copy()
    child_a[i:j] = parent_b[i:j]
    child_b[i:j] = parent_a[i:j]
    return child_a, child_b


def mutate(genes: np.ndarray, gene_prob: float, rng: np.random.Generator) -> np.ndarray:
    """Resample each gene uniformly from the legal range with prob ``gene_prob``."""
    out = genes.copy()
    mask = rng.random(len(genes)) < gene_prob
    hits = int(mask.sum())
    if hits:
        out[mask] = rng.integers(GENE_MIN, GENE_MAX + 1, size=hits, dtype=np.int32)
    return out


def _offspring(population, config: GAConfig, rng, select: Callable) -> list:
    children = []
    while len(children) < config.population_size:
        p1 = select(population, rng)
        p2 = select(population, rng)
        if rng.random() < config.crossover_rate:
            g1, g2 = two_point_crossover(p1.genes, p2.genes, rng)
        else:
            g1, g2 = p1.genes.copy(), p2.genes.copy()
        for g in (g1, g2):
            if rng.random() < config.mutation_rate:
                g = mutate(g, config.gene_mutation_prob, rng)
            children.append(Individual(genes=g))
            if len(children) == config.population_size:
                break
    return children


# ---------------------------------------------------------------------------
# single-objective GA
# ---------------------------------------------------------------------------

@dataclass
class GenerationRow:
    generation: int
    min_f: float
    avg_f: float
    max_f: float
    best_m: int


@dataclass
class GAResult:
    rows: list
    best: Individual
    best_generation: int


def run_ga(evaluator: PatchEvaluator, config: GAConfig,
           seed_patches: Sequence[PatchVector] = (),
           progress: Optional[Callable] = None) -> GAResult:
    """Generational GA over patches, minimizing F.

    The initial population is any provided seed patches plus uniform random
    chromosomes. Every generation is (re)evaluated with that generation's
    seed, so carried-over elites feel the same sampling noise as offspring;
    the best individual is tracked across all evaluations.
    """
    rng = np.random.default_rng(stable_seed(config.seed, "ga-ops"))
    n = evaluator.n_genes
    population = []
    for patch in seed_patches:
        if len(patch) != n:
            raise LayoutError(f"seed patch length {len(patch)} != layout {n}")
        population.append(Individual(genes=patch.as_array()))
    while len(population) < config.population_size:
        population.append(Individual(genes=random_genes(n, rng)))
    population = population[:config.population_size]

    def select(pop, r):
        return tournament_select(pop, config.tournament_size, r)

    rows = []
    best: Optional[Individual] = None
    best_gen = 0
    total_gens = max(1, config.generations)
    for gen in range(1, total_gens + 1):
        eval_seed = stable_seed(config.seed, "eval", gen)
        for ind in population:
            ind.fitness, ind.magnitude = evaluator.evaluate(ind.genes, eval_seed)
        ranked = sorted(range(len(population)),
                        key=lambda i: (population[i].fitness, population[i].magnitude, i))
        gen_best = population[ranked[0]]
        fs = [ind.fitness for ind in population]
        rows.append(GenerationRow(generation=gen, min_f=min(fs),
                                  avg_f=sum(fs) / len(fs), max_f=max(fs),
                                  best_m=gen_best.magnitude))
        if best is None or (gen_best.fitness, gen_best.magnitude) < (best.fitness, best.magnitude):
            best = Individual(genes=gen_best.genes.copy(), fitness=gen_best.fitness,
                              magnitude=gen_best.magnitude)
            best_gen = gen
        if progress is not None:
            progress(rows[-1])
        if gen == total_gens:
            break
        elite = [Individual(genes=population[i].genes.copy(),
                            fitness=population[i].fitness,
                            magnitude=population[i].magnitude)
                 for i in ranked[:config.elitism]]
        population = elite + _offspring(population, config, rng, select)
        population = population[:config.population_size]
    return GAResult(rows=rows, best=best, best_generation=best_gen)


# ---------------------------------------------------------------------------
# Pareto dominance and NSGA-II
# ---------------------------------------------------------------------------

def dominates(a, b, f_tolerance: float = 0.0) -> bool:
    """Standard (minimizing) Pareto dominance over (F, M) points.

    A positive ``f_tolerance`` treats fitness values within the tolerance as
    equal; it exists for tolerance-aware reporting, not for the search.
    """
    fa, ma = float(a[0]), a[1]
    fb, mb = float(b[0]), b[1]
    if f_tolerance > 0.0:
        f_less = fa < fb - f_tolerance
        f_more = fa > fb + f_tolerance
    else:
        f_less = fa < fb
        f_more = fa > fb
    if f_more or ma > mb:
        return False
    return f_less or ma < mb


def fast_non_dominated_sort(points: Sequence) -> list:
    """Deb-style sort; returns rank per point (0 = Pareto front)."""
    n = len(points)
    ranks = [0] * n
    dominated_by: list = [[] for _ in range(n)]
    dom_count = [0] * n
    for i in range(n):
        for j in range(i + 1, n):
            if dominates(points[i], points[j]):
                dominated_by[i].append(j)
                dom_count[j] += 1
            elif dominates(points[j], points[i]):
                dominated_by[j].append(i)
                dom_count[i] += 1
    front = [i for i in range(n) if dom_count[i] == 0]
    rank = 0
    while front:
        nxt = []
        for i in front:
            ranks[i] = rank
            for j in dominated_by[i]:
                dom_count[j] -= 1
                if dom_count[j] == 0:
                    nxt.append(j)
        front = nxt
        rank += 1
    return ranks


def crowding_distances(points: Sequence, indices: Sequence) -> dict:
    """NSGA-II crowding distance within one front; boundaries are infinite."""
    dist = {i: 0.0 for i in indices}
    if len(indices) <= 2:
        return {i: float("inf") for i in indices}
    for obj in range(2):
        ordered = sorted(indices, key=lambda i: (float(points[i][obj]), i))
        lo = float(points[ordered[0]][obj])
        hi = float(points[ordered[-1]][obj])
        dist[ordered[0]] = float("inf")
        dist[ordered[-1]] = float("inf")
        span = hi - lo
        if span <= 0:
            continue
        for k in range(1, len(ordered) - 1):
            gap = (float(points[ordered[k + 1]][obj]) - float(points[ordered[k - 1]][obj])) / span
            i = ordered[k]
            if dist[i] != float("inf"):
                dist[i] += gap
    return dist


def _rank_and_crowd(population) -> tuple:
    points = [ind.objectives for ind in population]
    ranks = fast_non_dominated_sort(points)
    fronts: dict = {}
    for i, r in enumerate(ranks):
        fronts.setdefault(r, []).append(i)
    crowd = {}
    for members in fronts.values():
        crowd.update(crowding_distances(points, members))
    return ranks, crowd, fronts


def nsga2_step(population: Sequence[Individual], config: GAConfig,
               rng: np.random.Generator, evaluator: PatchEvaluator,
               eval_seed: int, on_evaluated: Optional[Callable] = None) -> list:
    """One elitist NSGA-II generation: variation, evaluation, survival.

    Offspring are bred by binary tournament on (rank, crowding); parents and
    offspring compete together and the best N survive front by front, the
    boundary front thinned by crowding distance. ``on_evaluated`` sees every
    offspring right after evaluation, survivor or not.
    """
    if any(not ind.evaluated for ind in population):
        raise ConfigError("nsga2_step needs an evaluated population")
    ranks, crowd, _fronts = _rank_and_crowd(population)

    def select(pop, r):
        i, j = int(r.integers(0, len(pop))), int(r.integers(0, len(pop)))
        ki = (ranks[i], -crowd[i], i)
        kj = (ranks[j], -crowd[j], j)
        return pop[i] if ki <= kj else pop[j]

    offspring = _offspring(population, config, rng, select)
    for ind in offspring:
        ind.fitness, ind.magnitude = evaluator.evaluate(ind.genes, eval_seed)
        if on_evaluated is not None:
            on_evaluated(ind)
    return environmental_selection(list(population) + offspring,
                                   config.population_size)


def environmental_selection(combined: Sequence[Individual], n: int) -> list:
    """Keep the best ``n`` by (front rank, crowding); whole fronts first."""
    c_ranks, c_crowd, c_fronts = _rank_and_crowd(combined)
    survivors = []
    for r in sorted(c_fronts):
        members = c_fronts[r]
        if len(survivors) + len(members) <= n:
            survivors.extend(members)
        else:
            room = n - len(survivors)
            members = sorted(members, key=lambda i: (-c_crowd[i], i))
            survivors.extend(members[:room])
        if len(survivors) >= n:
            break
    return [combined[i] for i in survivors]


@dataclass
class ArchiveEntry:
    individual_id: int
    generation: int
    genes: np.ndarray
    fitness: float
    magnitude: int
    seeded: bool = False


class ParetoArchive:
    """Every evaluated (F, M) point of a run, with its non-dominated front."""

    def __init__(self):
        self.entries: list = []

    def add(self, genes: np.ndarray, fitness: float, magnitude: int,
            generation: int, seeded: bool = False) -> ArchiveEntry:
        entry = ArchiveEntry(individual_id=len(self.entries), generation=generation,
                             genes=genes.copy(), fitness=fitness, magnitude=magnitude,
                             seeded=seeded)
        self.entries.append(entry)
        return entry

    def front_indices(self) -> list:
        points = [(e.fitness, e.magnitude) for e in self.entries]
        ranks = fast_non_dominated_sort(points)
        return [i for i, r in enumerate(ranks) if r == 0]

    def front(self) -> list:
        return [self.entries[i] for i in self.front_indices()]


@dataclass
class Nsga2Result:
    archive: ParetoArchive
    final_population: list


def run_nsga2(evaluator: PatchEvaluator, config: GAConfig,
              seed_patches: Sequence[PatchVector] = (),
              progress: Optional[Callable] = None) -> Nsga2Result:
    """NSGA-II over patches with MOF = (F, M).

    The zero patch is always injected alongside any provided seed patches,
    so the archive front always reaches M = 0.
    """
    rng = np.random.default_rng(stable_seed(config.seed, "nsga2-ops"))
    n = evaluator.n_genes
    genes_list = [np.zeros(n, dtype=np.int32)]
    for patch in seed_patches:
        if len(patch) != n:
            raise LayoutError(f"seed patch length {len(patch)} != layout {n}")
        arr = patch.as_array()
        if not any(np.array_equal(arr, g) for g in genes_list):
            genes_list.append(arr)
    n_seeded = len(genes_list)
    while len(genes_list) < config.population_size:
        genes_list.append(random_genes(n, rng))
    population = [Individual(genes=g) for g in genes_list[:config.population_size]]

    archive = ParetoArchive()
    eval_seed = stable_seed(config.seed, "eval", 0)
    for idx, ind in enumerate(population):
        ind.fitness, ind.magnitude = evaluator.evaluate(ind.genes, eval_seed)
        archive.add(ind.genes, ind.fitness, ind.magnitude, generation=0,
                    seeded=idx < n_seeded)
    if progress is not None:
        progress(0, population)
    for gen in range(1, config.generations + 1):
        eval_seed = stable_seed(config.seed, "eval", gen)
        record = lambda ind: archive.add(ind.genes, ind.fitness, ind.magnitude,
                                         generation=gen)
        population = nsga2_step(population, config, rng, evaluator, eval_seed,
                                on_evaluated=record)
        if progress is not None:
            progress(gen, population)
    return Nsga2Result(archive=archive, final_population=population)
