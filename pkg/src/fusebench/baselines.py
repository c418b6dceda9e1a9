"""Classical score-fusion rules and the GA-tuned weighted sum.

These are the comparison bar for the evolved trees: the fixed sum, min and
product rules, per-modality single-matcher projections, and a weighted sum
whose weights a real-coded genetic algorithm tunes to minimize training
EER.  All rules consume normalized score matrices.

The weighted sum is computed as ``(scores * w).sum(axis=1)`` so that the
all-ones weight vector reproduces the plain sum rule bit-for-bit (same
reduction order), which the GA exploits by seeding an equal-weight
chromosome: the tuned result can never be worse than the sum rule on the
training set.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .datasets import ScoreDataset, SplitPair
from .errors import ValidationError
from .metrics import FusedScores, RocCurve, auc, hter, sweep_roc

WEIGHT_LO = -10.0
WEIGHT_HI = 10.0


class FusionRule(enum.Enum):
    SUM = "sum"
    MIN = "min"
    MUL = "mul"


@dataclass(frozen=True)
class WeightVector:
    """Per-modality weights, confined to the GA chromosome interval."""

    weights: tuple[float, ...]
    lo: float = WEIGHT_LO
    hi: float = WEIGHT_HI

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))
        if not self.weights:
            raise ValidationError("weight vector cannot be empty")
        if any(not self.lo <= w <= self.hi for w in self.weights):
            raise ValidationError(
                f"weights {self.weights} leave the interval [{self.lo}, {self.hi}]"
            )

    def __len__(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class GaConfig:
    """Parameters of the real-coded GA behind the weighted-sum baseline.

    The paper-scale setting is population 5000 over 500 generations; the
    ``desk`` preset trades a little optimality for a quick turnaround while
    keeping every semantic detail identical.
    """

    seed: int
    population_size: int = 5000
    generations: int = 500
    selection_q: float = 0.9
    elitism: bool = True
    weight_lo: float = WEIGHT_LO
    weight_hi: float = WEIGHT_HI
    p_crossover: float = 0.8
    p_mutation: float = 0.1

    def __post_init__(self):
        if self.population_size < 2:
            raise ValidationError("population_size must be >= 2")
        if self.generations < 1:
            raise ValidationError("generations must be >= 1")
        if not 0.0 < self.selection_q < 1.0:
            raise ValidationError("selection_q must lie in (0, 1)")
        if not self.weight_lo < self.weight_hi:
            raise ValidationError("weight interval is empty")
        for name in ("p_crossover", "p_mutation"):
            if not 0.0 <= getattr(self, name) <= 1.0:
                raise ValidationError(f"{name} must lie in [0, 1]")

    @classmethod
    def paper_scale(cls, seed: int) -> "GaConfig":
        return cls(seed=seed)

    @classmethod
    def desk_scale(cls, seed: int) -> "GaConfig":
        return cls(seed=seed, population_size=200, generations=60)


@dataclass(frozen=True)
class GaGenerationStats:
    generation: int
    best: float
    worst: float
    mean: float
    std: float
    best_weights: tuple[float, ...]


@dataclass(frozen=True, eq=False)
class MethodEvaluation:
    """One report row: threshold fixed on train, errors measured on validation."""

    method: str
    train_eer: float
    train_eer_threshold: float
    validation_eer: float
    validation_hter: float
    validation_auc: float
    validation_roc: RocCurve = field(repr=False)


@dataclass(frozen=True)
class BaselineReport:
    results: tuple[MethodEvaluation, ...]
    tuned_weights: "WeightVector | None"
    ga_history: "tuple[GaGenerationStats, ...] | None"


def fuse_rule_matrix(rule: FusionRule, scores) -> np.ndarray:
    """Apply a fixed rule to every row of an (n, modalities) matrix."""
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2 or scores.shape[1] == 0:
        raise ValidationError(f"expected a non-empty 2-D matrix, got {scores.shape}")
    if rule is FusionRule.SUM:
        return scores.sum(axis=1)
    if rule is FusionRule.MIN:
        return scores.min(axis=1)
    return scores.prod(axis=1)


def fuse_rule(rule: FusionRule, tuple_scores) -> float:
    """Fixed rule on a single score tuple; shares the matrix code path."""
    row = np.atleast_2d(np.asarray(tuple_scores, dtype=np.float64))
    return float(fuse_rule_matrix(rule, row)[0])


def fuse_weighted_matrix(weights, scores) -> np.ndarray:
    """Weighted sum per row; all-ones weights reproduce the sum rule exactly."""
    w = np.asarray(getattr(weights, "weights", weights), dtype=np.float64)
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2 or scores.shape[1] != w.size:
        raise ValidationError(
            f"weight length {w.size} does not match matrix shape {scores.shape}"
        )
    return (scores * w).sum(axis=1)


def fuse_weighted(weights, tuple_scores) -> float:
    row = np.atleast_2d(np.asarray(tuple_scores, dtype=np.float64))
    return float(fuse_weighted_matrix(weights, row)[0])


def rule_scores(rule: FusionRule, ds: ScoreDataset) -> FusedScores:
    return FusedScores(
        fuse_rule_matrix(rule, ds.genuine), fuse_rule_matrix(rule, ds.impostor)
    )


def weighted_scores(weights, ds: ScoreDataset) -> FusedScores:
    return FusedScores(
        fuse_weighted_matrix(weights, ds.genuine),
        fuse_weighted_matrix(weights, ds.impostor),
    )


def single_modality_scores(m: int, ds: ScoreDataset) -> FusedScores:
    """Projection onto one modality: the no-fusion reference point."""
    if not 0 <= m < ds.modality_count:
        raise ValidationError(f"modality {m} out of range")
    return FusedScores(ds.genuine[:, m], ds.impostor[:, m])


def geometric_selection_probs(population_size: int, q: float) -> np.ndarray:
    """Normalized geometric ranking probabilities, best rank first.

    P(rank r) = q' * (1-q)^(r-1) for r = 1..P with q' = q / (1 - (1-q)^P),
    which sums to exactly 1 over the population.
    """
    if population_size < 1:
        raise ValidationError("population_size must be >= 1")
    if not 0.0 < q < 1.0:
        raise ValidationError("q must lie in (0, 1)")
    q_norm = q / (1.0 - (1.0 - q) ** population_size)
    return q_norm * (1.0 - q) ** np.arange(population_size, dtype=np.float64)


def _weighted_eer(w: np.ndarray, genuine: np.ndarray, impostor: np.ndarray) -> float:
    fused = FusedScores((genuine * w).sum(axis=1), (impostor * w).sum(axis=1))
    return sweep_roc(fused).eer


def _ga_stats(generation, fits, pop) -> GaGenerationStats:
    best = int(np.argmin(fits))
    return GaGenerationStats(
        generation=generation,
        best=float(fits.min()),
        worst=float(fits.max()),
        mean=float(fits.mean()),
        std=float(fits.std()),
        best_weights=tuple(pop[best].tolist()),
    )


def ga_tune_weights(train: ScoreDataset, cfg: GaConfig):
    """Tune weighted-sum weights by a rank-selection GA minimizing train EER.

    Chromosomes are weight vectors in [weight_lo, weight_hi]^n.  Selection is
    normalized geometric ranking with q = selection_q; crossover blends two
    parents with a uniform random factor; mutation resamples each gene with
    probability 1/n.  The best chromosome survives each generation verbatim
    (elitism), and chromosome 0 of the initial population is the equal-weight
    vector, so the tuned training EER never exceeds the sum rule's.

    Returns (best weights ever seen, per-generation statistics).
    """
    lo_score = min(train.genuine.min(), train.impostor.min())
    hi_score = max(train.genuine.max(), train.impostor.max())
    if lo_score == hi_score:
        raise ValidationError("degenerate training set: every score is identical")

    n = train.modality_count
    rng = np.random.default_rng(cfg.seed)
    pop = rng.uniform(cfg.weight_lo, cfg.weight_hi, size=(cfg.population_size, n))
    if cfg.weight_lo <= 1.0 <= cfg.weight_hi:
        pop[0, :] = 1.0  # equal-weight seed: tuned <= sum-rule EER on train
    fits = np.array([_weighted_eer(w, train.genuine, train.impostor) for w in pop])

    cum = np.cumsum(geometric_selection_probs(cfg.population_size, cfg.selection_q))
    last = cfg.population_size - 1

    history = [_ga_stats(0, fits, pop)]
    best_fit = history[0].best
    best_w = np.array(history[0].best_weights)

    for generation in range(1, cfg.generations + 1):
        order = np.argsort(fits, kind="stable")
        new_pop = np.empty_like(pop)
        new_fits = np.empty_like(fits)
        start = 0
        if cfg.elitism:
            new_pop[0] = pop[order[0]]
            new_fits[0] = fits[order[0]]
            start = 1

        def select_parent():
            rank = int(np.searchsorted(cum, rng.random(), side="right"))
            return pop[order[min(rank, last)]]

        for slot in range(start, cfg.population_size):
            parent = select_parent()
            if rng.random() < cfg.p_crossover:
                other = select_parent()
                blend = rng.random()
                child = blend * parent + (1.0 - blend) * other
            else:
                child = parent.copy()
            if rng.random() < cfg.p_mutation:
                resample = rng.random(n) < (1.0 / n)
                child = np.where(
                    resample, rng.uniform(cfg.weight_lo, cfg.weight_hi, n), child
                )
            new_pop[slot] = child
            new_fits[slot] = _weighted_eer(child, train.genuine, train.impostor)

        pop, fits = new_pop, new_fits
        stats = _ga_stats(generation, fits, pop)
        history.append(stats)
        if stats.best < best_fit:
            best_fit = stats.best
            best_w = np.array(stats.best_weights)

    weights = WeightVector(tuple(best_w.tolist()), lo=cfg.weight_lo, hi=cfg.weight_hi)
    return weights, tuple(history)


def evaluate_fused_method(method: str, train_fs: FusedScores,
                          validation_fs: FusedScores) -> MethodEvaluation:
    """Standard protocol for one method: pick the EER threshold on train,
    then report validation EER, HTER at that transferred threshold, and
    validation AUC."""
    train_curve = sweep_roc(train_fs)
    validation_curve = sweep_roc(validation_fs)
    return MethodEvaluation(
        method=method,
        train_eer=train_curve.eer,
        train_eer_threshold=train_curve.eer_threshold,
        validation_eer=validation_curve.eer,
        validation_hter=hter(validation_fs, train_curve.eer_threshold),
        validation_auc=auc(validation_curve),
        validation_roc=validation_curve,
    )


def evaluate_baselines(split: SplitPair, *, ga_config: GaConfig | None = None,
                       rules=(FusionRule.SUM, FusionRule.MIN, FusionRule.MUL),
                       include_modalities: bool = True) -> BaselineReport:
    """Evaluate every baseline on an already-normalized split.

    Emits one row per single modality (s1..sn), one per fixed rule, and,
    when ``ga_config`` is given, the GA-tuned weighted sum.
    """
    results = []
    if include_modalities:
        for m in range(split.train.modality_count):
            results.append(
                evaluate_fused_method(
                    f"s{m + 1}",
                    single_modality_scores(m, split.train),
                    single_modality_scores(m, split.validation),
                )
            )
    for rule in rules:
        results.append(
            evaluate_fused_method(
                rule.value,
                rule_scores(rule, split.train),
                rule_scores(rule, split.validation),
            )
        )
    tuned = None
    ga_history = None
    if ga_config is not None:
        tuned, ga_history = ga_tune_weights(split.train, ga_config)
        results.append(
            evaluate_fused_method(
                "weight",
                weighted_scores(tuned, split.train),
                weighted_scores(tuned, split.validation),
            )
        )
    return BaselineReport(tuple(results), tuned, ga_history)
