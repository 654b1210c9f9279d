"""Genetic search over substitution-cost matrices.

Genomes are flat vectors in [0, 1] decoded into square cost matrices. The
engine itself is generic over the fitness callable: tournament selection,
uniform crossover, per-gene Gaussian mutation, elitism, and a stagnation
stop. Every generation can be checkpointed to JSON together with the
generator state, so an interrupted run resumed from its last checkpoint
finishes bitwise-identically to an uninterrupted one.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError
from .kernel import center_to_kernel
from .seqdist import AMINO_ACIDS, CostMatrix, MatrixScheme, pairwise_distances
from . import svm

log = logging.getLogger(__name__)

#: Fitness gains at or below this threshold count as stagnation.
STAGNATION_TOL = 1e-12


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 50
    genome_length: int = 400
    max_generations: int = 100
    tournament_size: int = 3
    crossover_rate: float = 0.9
    mutation_rate: float = 0.05
    mutation_scale: float = 0.1
    elite_count: int = 1
    stagnation_window: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 2:
            raise ConfigError("population size must be at least 2")
        if self.genome_length < 1:
            raise ConfigError("genome length must be at least 1")
        if self.max_generations < 1:
            raise ConfigError("max generations must be at least 1")
        if not 1 <= self.tournament_size <= self.population_size:
            raise ConfigError("tournament size must be in [1, population size]")
        if not 0.0 <= self.crossover_rate <= 1.0:
            raise ConfigError("crossover rate must lie in [0, 1]")
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise ConfigError("mutation rate must lie in [0, 1]")
        if not self.mutation_scale > 0:
            raise ConfigError("mutation scale must be strictly positive")
        if not 1 <= self.elite_count < self.population_size:
            raise ConfigError("elite count must be in [1, population size)")
        if self.stagnation_window < 1:
            raise ConfigError("stagnation window must be at least 1")


def decode_cost_matrix(genome, alphabet: str = AMINO_ACIDS,
                       symmetrize: bool = False) -> CostMatrix:
    """Reshape a genome into a zero-diagonal cost matrix.

    With ``symmetrize`` the matrix is averaged with its transpose, which
    keeps every entry inside [0, 1].
    """
    k = len(alphabet)
    genome = np.asarray(genome, dtype=np.float64)
    if genome.shape != (k * k,):
        raise DataError(
            "genome length %d does not decode to a %dx%d matrix"
            % (genome.size, k, k)
        )
    values = genome.reshape(k, k).copy()
    if symmetrize:
        values = (values + values.T) / 2.0
    np.fill_diagonal(values, 0.0)
    return CostMatrix(values=values, alphabet=alphabet, symmetric=symmetrize)


@dataclass(frozen=True)
class ControlSet:
    """Fixed train/validation split that scores candidate cost matrices.

    Patterns are id/sequence/label triples; labels are +1/-1. The
    fingerprint ties memoized fitness values to this exact split.
    """

    train_ids: tuple
    train_patterns: tuple
    train_labels: np.ndarray
    val_ids: tuple
    val_patterns: tuple
    val_labels: np.ndarray

    def __post_init__(self):
        for labels, count in ((self.train_labels, len(self.train_patterns)),
                              (self.val_labels, len(self.val_patterns))):
            if labels.shape != (count,):
                raise DataError("labels do not match pattern count")
            if not np.all(np.isin(labels, (-1.0, 1.0))):
                raise DataError("labels must be -1 or +1")
        if not self.train_patterns or not self.val_patterns:
            raise DataError("control set needs non-empty train and validation parts")
        if np.unique(self.train_labels).size < 2:
            raise DataError("control training part needs both classes")
        if set(self.train_ids) & set(self.val_ids):
            raise DataError("control split leaks ids across parts")

    @property
    def fingerprint(self) -> str:
        digest = hashlib.sha256()
        for ids, patterns, labels in (
            (self.train_ids, self.train_patterns, self.train_labels),
            (self.val_ids, self.val_patterns, self.val_labels),
        ):
            for pid, pat, lab in zip(ids, patterns, labels):
                digest.update(("%s\x00%s\x00%+d\x00" % (pid, pat, int(lab))).encode())
            digest.update(b"\x01")
        return digest.hexdigest()


def make_control_set(ids, patterns, labels, train_fraction: float = 0.7,
                     seed: int = 0) -> ControlSet:
    """Stratified split of labeled patterns into a control train/val pair."""
    ids = list(ids)
    patterns = list(patterns)
    labels = np.asarray(labels, dtype=np.float64).ravel()
    if not len(ids) == len(patterns) == labels.size:
        raise DataError("ids, patterns and labels differ in length")
    if not 0.0 < train_fraction < 1.0:
        raise ConfigError("train fraction must lie strictly inside (0, 1)")
    rng = np.random.default_rng(seed)
    train_idx: list = []
    val_idx: list = []
    for cls in (-1.0, 1.0):
        members = [i for i in range(labels.size) if labels[i] == cls]
        perm = rng.permutation(len(members))
        cut = int(round(train_fraction * len(members)))
        train_idx.extend(members[p] for p in perm[:cut])
        val_idx.extend(members[p] for p in perm[cut:])
    train_idx.sort()
    val_idx.sort()
    if not train_idx or not val_idx:
        raise DataError("control split produced an empty part")
    return ControlSet(
        train_ids=tuple(ids[i] for i in train_idx),
        train_patterns=tuple(patterns[i] for i in train_idx),
        train_labels=labels[train_idx],
        val_ids=tuple(ids[i] for i in val_idx),
        val_patterns=tuple(patterns[i] for i in val_idx),
        val_labels=labels[val_idx],
    )


def make_control_fitness(control: ControlSet, indel_cost: float = 1.0,
                         svm_c: float = 2.0, symmetrize: bool = False,
                         alphabet: str = AMINO_ACIDS):
    """Fitness callable: 1 minus the validation error of the full pipeline.

    The candidate matrix drives pairwise distances over train and
    validation patterns jointly, the joint matrix is double-centered, the
    classifier is fit on the training block, and errors are counted on the
    validation rows. Results are memoized by genome bytes, so re-evaluating
    an elite individual costs nothing.
    """
    patterns = list(control.train_patterns) + list(control.val_patterns)
    n_train = len(control.train_patterns)
    train_idx = np.arange(n_train)
    val_idx = np.arange(n_train, len(patterns))
    cache: dict = {}
    stamp = control.fingerprint

    def fitness(genome) -> float:
        genome = np.ascontiguousarray(genome, dtype=np.float64)
        key = (genome.tobytes(), stamp)
        hit = cache.get(key)
        if hit is not None:
            fitness.calls += 1
            return hit
        cm = decode_cost_matrix(genome, alphabet=alphabet, symmetrize=symmetrize)
        scheme = MatrixScheme(costs=cm, indel_cost=indel_cost)
        distances = pairwise_distances(patterns, scheme)
        kernel = center_to_kernel(distances)
        sub = kernel.values[np.ix_(train_idx, train_idx)]
        model = svm.train(sub, control.train_labels, c=svm_c)
        rows = kernel.values[np.ix_(val_idx, train_idx)]
        report = svm.evaluate(model, rows, control.val_labels)
        value = 1.0 - report.global_rate
        cache[key] = value
        fitness.calls += 1
        fitness.misses += 1
        return value

    fitness.calls = 0
    fitness.misses = 0
    fitness.fingerprint = stamp
    return fitness


@dataclass
class GaState:
    """Everything needed to continue a run from a generation boundary."""

    generation: int
    population: np.ndarray
    fitness: np.ndarray
    best_genome: np.ndarray
    best_fitness: float
    stagnant: int
    trace: list = field(default_factory=list)
    rng_state: dict | None = None


@dataclass
class GaResult:
    best_genome: np.ndarray
    best_fitness: float
    generations: int
    trace: list
    stopped: str  # "stagnation" or "max_generations"


def _checkpoint_path(directory, generation: int) -> str:
    return os.path.join(directory, "gen_%04d.json" % generation)


def save_checkpoint(directory, config: GaConfig, state: GaState) -> str:
    os.makedirs(directory, exist_ok=True)
    payload = {
        "config": {
            "population_size": config.population_size,
            "genome_length": config.genome_length,
            "max_generations": config.max_generations,
            "tournament_size": config.tournament_size,
            "crossover_rate": config.crossover_rate,
            "mutation_rate": config.mutation_rate,
            "mutation_scale": config.mutation_scale,
            "elite_count": config.elite_count,
            "stagnation_window": config.stagnation_window,
            "seed": config.seed,
        },
        "generation": state.generation,
        "population": state.population.tolist(),
        "fitness": state.fitness.tolist(),
        "best_genome": state.best_genome.tolist(),
        "best_fitness": state.best_fitness,
        "stagnant": state.stagnant,
        "trace": state.trace,
        "rng_state": state.rng_state,
    }
    path = _checkpoint_path(directory, state.generation)
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True)
        fh.write("\n")
    return path


def load_checkpoint(path) -> tuple[GaConfig, GaState]:
    with open(path) as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError("%s: %s" % (path, exc)) from None
    try:
        config = GaConfig(**payload["config"])
        state = GaState(
            generation=int(payload["generation"]),
            population=np.asarray(payload["population"], dtype=np.float64),
            fitness=np.asarray(payload["fitness"], dtype=np.float64),
            best_genome=np.asarray(payload["best_genome"], dtype=np.float64),
            best_fitness=float(payload["best_fitness"]),
            stagnant=int(payload["stagnant"]),
            trace=list(payload["trace"]),
            rng_state=payload["rng_state"],
        )
    except (KeyError, TypeError) as exc:
        raise DataError("%s: malformed checkpoint (%s)" % (path, exc)) from None
    return config, state


def _tournament(rng, fitness: np.ndarray, size: int) -> int:
    contenders = rng.integers(0, fitness.size, size=size)
    return int(contenders[np.argmax(fitness[contenders])])


def _next_population(rng, config: GaConfig, population: np.ndarray,
                     fitness: np.ndarray) -> np.ndarray:
    order = np.argsort(-fitness, kind="stable")
    out = np.empty_like(population)
    for slot in range(config.elite_count):
        out[slot] = population[order[slot]]
    for slot in range(config.elite_count, config.population_size):
        a = _tournament(rng, fitness, config.tournament_size)
        b = _tournament(rng, fitness, config.tournament_size)
        if rng.random() < config.crossover_rate:
            take_a = rng.random(config.genome_length) < 0.5
            child = np.where(take_a, population[a], population[b])
        else:
            child = population[a].copy()
        hit = rng.random(config.genome_length) < config.mutation_rate
        noise = rng.normal(0.0, config.mutation_scale, size=config.genome_length)
        child = np.where(hit, child + noise, child)
        np.clip(child, 0.0, 1.0, out=child)
        out[slot] = child
    return out


def run(fitness_fn, config: GaConfig, checkpoint_dir=None,
        state: GaState | None = None) -> GaResult:
    """Evolve genomes under ``fitness_fn`` until stagnation or the cap.

    A population whose best fitness never improves by more than the
    stagnation threshold stops after ``stagnation_window`` unimproved
    generations, i.e. at generation ``stagnation_window + 1`` when fitness
    is constant from the start. Passing a ``state`` loaded from a
    checkpoint continues that run exactly.
    """
    rng = np.random.default_rng(config.seed)
    if state is None:
        population = rng.random((config.population_size, config.genome_length))
        fitness = np.array([fitness_fn(g) for g in population])
        best = int(np.argmax(fitness))
        state = GaState(
            generation=1,
            population=population,
            fitness=fitness,
            best_genome=population[best].copy(),
            best_fitness=float(fitness[best]),
            stagnant=0,
            trace=[float(fitness[best])],
            rng_state=rng.bit_generator.state,
        )
        if checkpoint_dir is not None:
            save_checkpoint(checkpoint_dir, config, state)
    else:
        if state.population.shape != (config.population_size, config.genome_length):
            raise ConfigError("checkpoint population does not match the config")
        if state.rng_state is None:
            raise ConfigError("checkpoint carries no generator state")
        rng.bit_generator.state = state.rng_state

    while (state.generation < config.max_generations
           and state.stagnant < config.stagnation_window):
        population = _next_population(rng, config, state.population, state.fitness)
        fitness = np.array([fitness_fn(g) for g in population])
        best = int(np.argmax(fitness))
        improved = fitness[best] > state.best_fitness + STAGNATION_TOL
        state.generation += 1
        state.population = population
        state.fitness = fitness
        state.stagnant = 0 if improved else state.stagnant + 1
        if improved:
            state.best_genome = population[best].copy()
            state.best_fitness = float(fitness[best])
        state.trace.append(float(fitness[best]))
        state.rng_state = rng.bit_generator.state
        if checkpoint_dir is not None:
            save_checkpoint(checkpoint_dir, config, state)
        log.debug("generation %d: best %.6f (stagnant %d)",
                  state.generation, state.best_fitness, state.stagnant)

    stopped = ("stagnation" if state.stagnant >= config.stagnation_window
               else "max_generations")
    return GaResult(
        best_genome=state.best_genome,
        best_fitness=state.best_fitness,
        generations=state.generation,
        trace=state.trace,
        stopped=stopped,
    )
