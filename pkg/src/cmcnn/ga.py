"""Genetic search over activation-function strings for a fixed depth.

The loop is: random initial population, evaluate, then per generation
select ``N/2`` parent pairs, cross each pair over at one point, mutate each
child with probability ``mutation_prob``, evaluate the children and keep the
best ``N`` of parents plus children. Keeping parents in the pool means the
best individual can never be lost, so best-so-far fitness is monotone.

Evaluators are callables ``evaluator(genome, seed)`` returning either a
float fitness or an :class:`Evaluation`. The seed for a genome depends only
on the master seed and the genome itself, so re-evaluating a genome is
redundant and results are cached per run.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import logging

import numpy as np

from . import rng as rngs
from .activations import DEFAULT_FUNCTION_SET, Activation
from .exceptions import ConfigError, SearchSpaceTooLarge
from .genome import Genome, all_genomes, crossover, mutate, random_genome
from .nn.training import TrainConfig

log = logging.getLogger(__name__)

SELECTION_METHODS = ("roulette", "uniform")
FITNESS_METRICS = ("train_f1", "test_f1")
DEFAULT_ENUMERATION_CAP = 65536


@dataclass(frozen=True)
class GaConfig:
    """Tunables of one genetic search.

    Parameters
    ----------
    population_size : int, default 4
        ``N``; must be even.
    generations : int, default 5
        ``M``; 0 returns the best of the random initial population.
    mutation_prob : float, default 1.0
        Probability that a child receives one point mutation.
    function_set : tuple of Activation
    fitness_metric : {"train_f1", "test_f1"}
    selection : {"roulette", "uniform"}
        How parent pairs are drawn.
    train_cfg : TrainConfig
        Forwarded to training evaluators.
    master_seed : int
    """

    population_size: int = 4
    generations: int = 5
    mutation_prob: float = 1.0
    function_set: tuple = DEFAULT_FUNCTION_SET
    fitness_metric: str = "train_f1"
    selection: str = "roulette"
    train_cfg: TrainConfig = field(default_factory=TrainConfig)
    master_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "function_set",
                           tuple(Activation(f) for f in self.function_set))
        n = self.population_size
        if n < 2 or n % 2:
            raise ConfigError(f"population_size must be an even number >= 2, got {n}")
        if self.generations < 0:
            raise ConfigError("generations must be >= 0")
        if not 0.0 <= self.mutation_prob <= 1.0:
            raise ConfigError("mutation_prob must lie in [0, 1]")
        if len(self.function_set) < 2 or len(set(self.function_set)) != len(self.function_set):
            raise ConfigError("function_set needs at least 2 distinct activations")
        if self.fitness_metric not in FITNESS_METRICS:
            raise ConfigError(f"fitness_metric must be one of {FITNESS_METRICS}")
        if self.selection not in SELECTION_METHODS:
            raise ConfigError(f"selection must be one of {SELECTION_METHODS}")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ConfigError("master_seed must be an unsigned 64-bit integer")

    @property
    def evaluation_budget(self):
        return self.population_size * (self.generations + 1)

    def to_dict(self):
        return {
            "population_size": self.population_size,
            "generations": self.generations,
            "mutation_prob": self.mutation_prob,
            "function_set": [f.value for f in self.function_set],
            "fitness_metric": self.fitness_metric,
            "selection": self.selection,
            "train_cfg": self.train_cfg.to_dict(),
            "master_seed": self.master_seed,
        }


@dataclass
class Evaluation:
    """What an evaluator reports for one genome.

    ``record`` carries the full metric set when the evaluator produces one;
    ``model`` the trained network, when kept.
    """

    fitness: float
    record: object = None
    model: object = None


@dataclass
class Individual:
    genome: Genome
    fitness: float = None
    evaluation: Evaluation = None
    failed: bool = False
    error: str = None

    @property
    def evaluated(self):
        return self.fitness is not None


@dataclass
class GenerationRecord:
    generation: int
    best_fitness: float
    mean_fitness: float
    best_genome: str
    best_so_far: float
    evaluations: int

    def to_dict(self):
        return dict(self.__dict__)


@dataclass
class SearchResult:
    best: Individual
    history: list
    population: list
    evaluations: int
    evaluated: list = field(default_factory=list)


def evaluation_seed(master_seed, genome):
    return rngs.derive_seed(master_seed, f"eval:{genome}")


class _Evaluator:
    """Caching, failure-tolerant, optionally threaded wrapper."""

    def __init__(self, fn, master_seed, jobs=1):
        self.fn = fn
        self.master_seed = master_seed
        self.jobs = max(1, int(jobs))
        self.cache = {}
        self.calls = 0

    def _one(self, genome):
        try:
            out = self.fn(genome, evaluation_seed(self.master_seed, genome))
        except Exception as exc:  # noqa: BLE001 - evaluator errors are data here
            log.warning("evaluation of %s failed: %s", genome, exc)
            return Individual(genome, 0.0, None, failed=True, error=repr(exc))
        ev = out if isinstance(out, Evaluation) else Evaluation(float(out))
        if not np.isfinite(ev.fitness):
            return Individual(genome, 0.0, ev, failed=True, error="non-finite fitness")
        return Individual(genome, float(ev.fitness), ev)

    def __call__(self, genomes):
        """Evaluate ``genomes`` and return fresh Individuals in the same order."""
        self.calls += len(genomes)
        todo = list(dict.fromkeys(g for g in genomes if g not in self.cache))
        if self.jobs > 1 and len(todo) > 1:
            with ThreadPoolExecutor(self.jobs) as pool:
                done = list(pool.map(self._one, todo))
        else:
            done = [self._one(g) for g in todo]
        for g, ind in zip(todo, done):
            self.cache[g] = ind
        return [Individual(g, self.cache[g].fitness, self.cache[g].evaluation,
                           self.cache[g].failed, self.cache[g].error)
                for g in genomes]


def _pick(rng, weights, exclude=None):
    w = np.asarray(weights, dtype=np.float64).copy()
    if exclude is not None:
        w[exclude] = 0.0
    candidates = np.ones(len(w), bool)
    if exclude is not None:
        candidates[exclude] = False
    total = w.sum()
    if total <= 0 or np.all(w[candidates] == w[candidates][0]):
        # uniform fallback: all-zero or all-equal fitness
        idx = np.flatnonzero(candidates)
        return int(idx[rng.integers(0, len(idx))])
    return int(rng.choice(len(w), p=w / total))


def select_pairs(population, n_pairs, rng, method="roulette"):
    """Draw ``n_pairs`` parent pairs with two distinct members each."""
    fitness = [ind.fitness for ind in population]
    if method == "uniform":
        fitness = [1.0] * len(population)
    pairs = []
    for _ in range(n_pairs):
        i = _pick(rng, fitness)
        j = _pick(rng, fitness, exclude=i)
        pairs.append((population[i], population[j]))
    return pairs


def _best(individuals):
    # max() keeps the first of equal elements
    return max(individuals, key=lambda ind: ind.fitness)


def _breed(pairs, generation, cfg, n):
    xo_rng = rngs.stream(cfg.master_seed, "crossover", generation)
    mut_rng = rngs.stream(cfg.master_seed, "mutation", generation)
    children = []
    for a, b in pairs:
        if n >= 3:
            k = int(xo_rng.integers(2, n))
            kids = crossover(a.genome, b.genome, k)
        else:
            kids = (a.genome, b.genome)
        for child in kids:
            if mut_rng.random() < cfg.mutation_prob:
                j = int(mut_rng.integers(1, n + 1))
                child = mutate(child, j, mut_rng, cfg.function_set)
            children.append(child)
    return children


def run_ga(arch, evaluator, cfg=GaConfig(), jobs=1, on_generation=None):
    """Evolve activation strings for one architecture.

    Parameters
    ----------
    arch : ArchSpec or int
        The architecture, or just the genome length.
    evaluator : callable
        ``evaluator(genome, seed) -> float | Evaluation``. An exception
        marks that individual failed with fitness 0; the search goes on.
    cfg : GaConfig
    jobs : int, default 1
        Threads used to evaluate a population. Results do not depend on it.
    on_generation : callable, optional
        Called with each :class:`GenerationRecord` as it is produced.

    Returns
    -------
    SearchResult
        ``best`` is the highest-fitness individual ever evaluated (earliest
        wins ties); ``history`` has one record per generation, starting
        with generation 0 for the initial population.
    """
    n = getattr(arch, "n_conv_layers", arch)
    if n < 1:
        raise ConfigError("genome length must be >= 1")
    evaluate = _Evaluator(evaluator, cfg.master_seed, jobs)
    history = []

    def record(gen, pop, best):
        fit = [ind.fitness for ind in pop]
        top = _best(pop)
        rec = GenerationRecord(gen, top.fitness, float(np.mean(fit)), str(top.genome),
                               best.fitness, evaluate.calls)
        history.append(rec)
        log.info("gen %d best=%.4f mean=%.4f genome=%s", gen, rec.best_fitness,
                 rec.mean_fitness, rec.best_genome)
        if on_generation is not None:
            on_generation(rec)

    init_rng = rngs.stream(cfg.master_seed, "init")
    genomes = [random_genome(n, cfg.function_set, init_rng)
               for _ in range(cfg.population_size)]
    population = evaluate(genomes)
    best = _best(population)
    record(0, population, best)

    for gen in range(1, cfg.generations + 1):
        sel_rng = rngs.stream(cfg.master_seed, "selection", gen)
        pairs = select_pairs(population, cfg.population_size // 2, sel_rng, cfg.selection)
        children = evaluate(_breed(pairs, gen, cfg, n))
        pool = population + children
        # stable sort: parents precede children on ties
        order = sorted(range(len(pool)), key=lambda i: -pool[i].fitness)
        population = [pool[i] for i in order[:cfg.population_size]]
        challenger = _best(children)
        if challenger.fitness > best.fitness:
            best = challenger
        record(gen, population, best)

    return SearchResult(best, history, population, evaluate.calls, list(evaluate.cache.values()))


def random_search(arch, evaluator, cfg=GaConfig(), budget=None, jobs=1):
    """Best of ``budget`` uniformly random genomes.

    The default budget ``N * (M + 1)`` equals the number of evaluations a
    :func:`run_ga` call with the same config performs, so the two are
    directly comparable.
    """
    n = getattr(arch, "n_conv_layers", arch)
    budget = cfg.evaluation_budget if budget is None else int(budget)
    if budget < 1:
        raise ConfigError("budget must be >= 1")
    evaluate = _Evaluator(evaluator, cfg.master_seed, jobs)
    draw = rngs.stream(cfg.master_seed, "baseline")
    genomes = [random_genome(n, cfg.function_set, draw) for _ in range(budget)]
    individuals = evaluate(genomes)
    return SearchResult(_best(individuals), [], individuals, evaluate.calls,
                        list(evaluate.cache.values()))


def enumerate_space(n, function_set, evaluator, master_seed=0,
                    cap=DEFAULT_ENUMERATION_CAP, jobs=1):
    """Evaluate every genome, in lexicographic order of ``function_set``."""
    total = len(function_set) ** n
    if total > cap:
        raise SearchSpaceTooLarge(total, cap)
    evaluate = _Evaluator(evaluator, master_seed, jobs)
    return evaluate(list(all_genomes(n, function_set)))


def exhaustive_search(n, function_set, evaluator, master_seed=0,
                      cap=DEFAULT_ENUMERATION_CAP, jobs=1):
    """Brute-force optimum ``(genome, fitness)``; ties go to the first genome."""
    best = _best(enumerate_space(n, function_set, evaluator, master_seed, cap, jobs))
    return best.genome, best.fitness
