"""Genetic-programming engine evolving fusion trees that minimize EER.

The engine is a classic generational GP:

* initialization by ramped half-and-half over depths 2..8 (function nodes
  forced at depths 0 and 1 so every tree has a function root and depth >= 2);
* fitness of a tree = EER of its fused scores on the training set, via the
  1000-point threshold sweep (lower is better);
* tournament selection of size 10: contestants ranked by fitness, rank r
  wins with probability 0.8 * 0.2^r, residual mass on the worst rank;
* subtree crossover keeping only the first offspring (the swap slot in the
  first parent is never the root, so the function-root rule survives), with
  up to 10 retries when the depth cap is exceeded, then a plain copy;
* subtree mutation regrowing a random non-root slot within the depth budget;
* reproduction realized as elitism: the best 5% of a generation is copied
  verbatim into the next, which makes best fitness non-increasing; the
  remaining slots are filled by crossover or mutation in 45:50 odds.

Randomness discipline: one seed feeds a SeedSequence that spawns a child
stream per generation (stream 0 initializes the population), so runs are
bit-reproducible and fitness evaluation order can never perturb the
stochastic decisions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .datasets import ScoreDataset
from .errors import ValidationError
from .metrics import FusedScores, sweep_roc
from .trees import (
    FUNCTION_OPS,
    Const,
    ExpressionTree,
    Func,
    Node,
    Var,
    count_nodes,
    evaluate_matrix,
    iter_nodes,
    replace_at,
    subtree_at,
)

CROSSOVER_RETRIES = 10


@dataclass(frozen=True)
class EvolutionConfig:
    """Full parameterization of one GP run."""

    seed: int
    population_size: int = 500
    max_generations: int = 50
    max_depth: int = 8
    init_depth_min: int = 2
    init_depth_max: int = 8
    p_crossover: float = 0.45
    p_mutation: float = 0.50
    p_reproduction: float = 0.05
    tournament_size: int = 10
    tournament_p: float = 0.80
    n_constants: int = 50
    fitness_target: float = 0.001

    def __post_init__(self):
        if self.population_size < 2:
            raise ValidationError("population_size must be >= 2")
        if self.max_generations < 1:
            raise ValidationError("max_generations must be >= 1")
        if not 1 <= self.init_depth_min <= self.init_depth_max <= self.max_depth:
            raise ValidationError(
                "need 1 <= init_depth_min <= init_depth_max <= max_depth"
            )
        for name in ("p_crossover", "p_mutation", "p_reproduction"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1]")
        total = self.p_crossover + self.p_mutation + self.p_reproduction
        if not math.isclose(total, 1.0, abs_tol=1e-9):
            raise ValidationError(f"operator probabilities sum to {total}, expected 1")
        if self.tournament_size < 1:
            raise ValidationError("tournament_size must be >= 1")
        if not 0.0 < self.tournament_p <= 1.0:
            raise ValidationError("tournament_p must lie in (0, 1]")
        if self.n_constants < 2:
            raise ValidationError("n_constants must be >= 2")
        if self.fitness_target < 0.0:
            raise ValidationError("fitness_target must be >= 0")


@dataclass(frozen=True)
class GenerationStats:
    """Fitness distribution snapshot of one generation (fitness minimized)."""

    generation: int
    best: float
    worst: float
    mean: float
    std: float
    best_tree: ExpressionTree


@dataclass(frozen=True)
class EvolutionResult:
    best_tree: ExpressionTree
    best_fitness: float
    history: tuple[GenerationStats, ...]


def terminal_set(modality_count: int, n_constants: int) -> tuple[Node, ...]:
    """One variable per modality plus constants evenly spread over [0, 1]."""
    if modality_count < 2:
        raise ValidationError("modality_count must be >= 2")
    if n_constants < 2:
        raise ValidationError("n_constants must be >= 2")
    variables = tuple(Var(m) for m in range(modality_count))
    constants = tuple(Const(j / (n_constants - 1)) for j in range(n_constants))
    return variables + constants


def eval_population(tree: ExpressionTree, ds: ScoreDataset) -> FusedScores:
    """Fuse every tuple of the dataset through the tree, order-preserving."""
    return FusedScores(
        evaluate_matrix(tree, ds.genuine),
        evaluate_matrix(tree, ds.impostor),
    )


def fitness(tree: ExpressionTree, ds: ScoreDataset) -> float:
    """Sweep EER of the tree's fused scores; lower is better."""
    return sweep_roc(eval_population(tree, ds)).eer


def _random_terminal(terminals, rng) -> Node:
    return terminals[int(rng.integers(0, len(terminals)))]


def _random_op(rng) -> str:
    return FUNCTION_OPS[int(rng.integers(0, len(FUNCTION_OPS)))]


def _full_node(depth: int, terminals, rng) -> Node:
    if depth == 0:
        return _random_terminal(terminals, rng)
    op = _random_op(rng)
    return Func(op, _full_node(depth - 1, terminals, rng),
                _full_node(depth - 1, terminals, rng))


def _grow_node(depth_budget: int, terminals, rng, *,
               forced_function_levels: int = 0, level: int = 0) -> Node:
    """Grow method: terminals may appear early (probability proportional to
    the terminal share of the primitive set), are forced once the budget is
    spent, and are forbidden on the first `forced_function_levels` levels."""
    if depth_budget == 0:
        return _random_terminal(terminals, rng)
    if level >= forced_function_levels:
        p_terminal = len(terminals) / (len(terminals) + len(FUNCTION_OPS))
        if rng.random() < p_terminal:
            return _random_terminal(terminals, rng)
    op = _random_op(rng)
    return Func(
        op,
        _grow_node(depth_budget - 1, terminals, rng,
                   forced_function_levels=forced_function_levels, level=level + 1),
        _grow_node(depth_budget - 1, terminals, rng,
                   forced_function_levels=forced_function_levels, level=level + 1),
    )


def ramped_half_and_half(cfg: EvolutionConfig, terminals, rng) -> list[ExpressionTree]:
    """Initial population: depth targets cycle over init_depth_min..max and
    each depth cohort alternates between the full and grow methods.

    Functions are forced on the first two levels (as far as the depth
    target allows), so every tree has a function root regardless of method.
    """
    depths = list(range(cfg.init_depth_min, cfg.init_depth_max + 1))
    population = []
    for i in range(cfg.population_size):
        target = depths[i % len(depths)]
        use_full = (i // len(depths)) % 2 == 0
        if use_full:
            root = _full_node(target, terminals, rng)
        else:
            root = _grow_node(target, terminals, rng, forced_function_levels=2)
        population.append(ExpressionTree(root))
    return population


def tournament_select(population, fitnesses, cfg: EvolutionConfig, rng) -> ExpressionTree:
    """Size-10 tournament, geometric-by-rank winner probabilities.

    Contestants are drawn uniformly with replacement (an individual may face
    itself); rank r in the tournament wins with probability p * (1-p)^r and
    the leftover mass falls on the last rank so the schedule sums to one.
    """
    drawn = rng.integers(0, len(population), size=cfg.tournament_size)
    contestant_fits = np.asarray([fitnesses[int(i)] for i in drawn])
    ranked = np.argsort(contestant_fits, kind="stable")
    p = cfg.tournament_p
    probs = p * (1.0 - p) ** np.arange(cfg.tournament_size, dtype=np.float64)
    probs[-1] = 1.0 - probs[:-1].sum()
    rank = int(np.searchsorted(np.cumsum(probs), rng.random(), side="right"))
    rank = min(rank, cfg.tournament_size - 1)  # guard cumulative-sum rounding
    return population[int(drawn[ranked[rank]])]


def crossover(parent1: ExpressionTree, parent2: ExpressionTree,
              cfg: EvolutionConfig, rng) -> ExpressionTree:
    """Graft a random subtree of parent2 into a random non-root slot of
    parent1 and keep that single offspring.

    Slot/donor picks are uniform over preorder positions; the root of
    parent1 is excluded so the result keeps a function root.  If the graft
    would exceed the depth cap, fresh picks are retried a bounded number of
    times before falling back to a copy of parent1.
    """
    n1 = count_nodes(parent1.root)
    n2 = count_nodes(parent2.root)
    for _ in range(CROSSOVER_RETRIES):
        slot = int(rng.integers(1, n1))
        donor = subtree_at(parent2.root, int(rng.integers(0, n2)))
        candidate = replace_at(parent1.root, slot, donor)
        tree = ExpressionTree(candidate)
        if tree.depth <= cfg.max_depth:
            return tree
    return ExpressionTree(parent1.root)


def mutate(parent: ExpressionTree, cfg: EvolutionConfig, terminals, rng) -> ExpressionTree:
    """Replace a random non-root node with a freshly grown subtree.

    The regrow target depth is drawn uniformly from 0 up to the slot's
    remaining depth budget, so the mutant can never exceed the cap and a
    zero budget degenerates to a terminal replacement.
    """
    nodes = list(iter_nodes(parent.root))
    slot = int(rng.integers(1, len(nodes)))
    budget = cfg.max_depth - nodes[slot][1]
    target = int(rng.integers(0, budget + 1))
    replacement = _grow_node(target, terminals, rng)
    return ExpressionTree(replace_at(parent.root, slot, replacement))


def _population_stats(generation: int, population, fitnesses) -> GenerationStats:
    fits = np.asarray(fitnesses, dtype=np.float64)
    best_idx = int(np.argmin(fits))
    return GenerationStats(
        generation=generation,
        best=float(fits.min()),
        worst=float(fits.max()),
        mean=float(fits.mean()),
        std=float(fits.std()),
        best_tree=population[best_idx],
    )


def evolve(train: ScoreDataset, cfg: EvolutionConfig, *,
           observer=None) -> EvolutionResult:
    """Run the generational loop and return the best tree ever seen.

    ``observer``, if given, is called with every tree the engine creates
    (initial population and each offspring) and exists for auditing the
    closure invariants.

    Generation 0 is the random initial population; evolution stops once the
    best fitness drops below ``fitness_target`` or after ``max_generations``
    bred generations.  Same seed and data reproduce the run bit-for-bit.
    """
    pooled_lo = min(train.genuine.min(), train.impostor.min())
    pooled_hi = max(train.genuine.max(), train.impostor.max())
    if pooled_lo == pooled_hi:
        raise ValidationError("degenerate training set: every score is identical")

    terminals = terminal_set(train.modality_count, cfg.n_constants)
    streams = np.random.SeedSequence(cfg.seed).spawn(cfg.max_generations + 1)

    rng = np.random.default_rng(streams[0])
    population = ramped_half_and_half(cfg, terminals, rng)
    if observer is not None:
        for tree in population:
            observer(tree)
    fitnesses = [fitness(tree, train) for tree in population]

    history = [_population_stats(0, population, fitnesses)]
    best_tree = history[0].best_tree
    best_fitness = history[0].best

    elite_count = min(max(1, round(cfg.p_reproduction * cfg.population_size)),
                      cfg.population_size)
    # crossover odds among the non-elite slots: 0.45 / (0.45 + 0.50)
    p_cx = cfg.p_crossover / (cfg.p_crossover + cfg.p_mutation)

    for generation in range(1, cfg.max_generations + 1):
        if best_fitness < cfg.fitness_target:
            break
        rng = np.random.default_rng(streams[generation])
        order = np.argsort(fitnesses, kind="stable")
        next_population = [population[int(i)] for i in order[:elite_count]]
        next_fitnesses = [fitnesses[int(i)] for i in order[:elite_count]]
        for _ in range(cfg.population_size - elite_count):
            if rng.random() < p_cx:
                parent1 = tournament_select(population, fitnesses, cfg, rng)
                parent2 = tournament_select(population, fitnesses, cfg, rng)
                child = crossover(parent1, parent2, cfg, rng)
            else:
                parent = tournament_select(population, fitnesses, cfg, rng)
                child = mutate(parent, cfg, terminals, rng)
            if child.depth > cfg.max_depth:
                raise AssertionError("genetic operator produced an over-deep tree")
            if observer is not None:
                observer(child)
            next_population.append(child)
            next_fitnesses.append(fitness(child, train))
        population = next_population
        fitnesses = next_fitnesses
        stats = _population_stats(generation, population, fitnesses)
        history.append(stats)
        if stats.best < best_fitness:
            best_fitness = stats.best
            best_tree = stats.best_tree

    return EvolutionResult(best_tree, best_fitness, tuple(history))


def history_to_csv(history) -> str:
    """Render generation statistics as ``generation,best,worst,mean,std``."""
    lines = ["generation,best,worst,mean,std"]
    for st in history:
        lines.append(
            f"{st.generation},{repr(float(st.best))},{repr(float(st.worst))},"
            f"{repr(float(st.mean))},{repr(float(st.std))}"
        )
    return "\n".join(lines) + "\n"
