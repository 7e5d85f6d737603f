"""Activation-function strings and the operators that vary them.

A genome assigns one activation to each convolutional layer. Mutation
replaces exactly one gene with a *different* function; crossover is the
classic one-point exchange. Points are counted from 1, so a mutation point
``j`` addresses ``genes[j - 1]`` and a crossover point ``k`` keeps the first
``k`` genes of each parent.
"""

from dataclasses import dataclass
import itertools

from .activations import DEFAULT_FUNCTION_SET, Activation
from .exceptions import (CrossoverError, DomainError, GenomeArityError,
                         MutationPointError)


@dataclass(frozen=True)
class Genome:
    genes: tuple

    def __post_init__(self):
        genes = tuple(g if isinstance(g, Activation) else Activation.parse(g)
                      for g in self.genes)
        if not genes:
            raise GenomeArityError("a genome needs at least one gene")
        object.__setattr__(self, "genes", genes)

    def __len__(self):
        return len(self.genes)

    def __iter__(self):
        return iter(self.genes)

    def __getitem__(self, i):
        return self.genes[i]

    def __str__(self):
        return "-".join(g.value for g in self.genes)

    @classmethod
    def parse(cls, text):
        """Build a genome from ``"RELU-SIG-TANH-ELU"`` (commas also accepted)."""
        tokens = [t for t in text.replace(",", "-").split("-") if t.strip()]
        return cls(tuple(Activation.parse(t) for t in tokens))

    @classmethod
    def uniform(cls, activation, n):
        return cls((Activation(activation),) * n)

    @property
    def is_single_function(self):
        return len(set(self.genes)) == 1


def _check_function_set(function_set, minimum=1):
    fs = tuple(Activation(f) for f in function_set)
    if len(fs) < minimum:
        raise DomainError(f"function set needs at least {minimum} members")
    if len(set(fs)) != len(fs):
        raise DomainError("function set contains duplicates")
    return fs


def random_genome(n, function_set=DEFAULT_FUNCTION_SET, rng=None):
    """Draw ``n`` genes i.i.d. uniformly from ``function_set``."""
    if n < 1:
        raise GenomeArityError(f"genome length must be >= 1, got {n}")
    fs = _check_function_set(function_set)
    idx = rng.integers(0, len(fs), size=n)
    return Genome(tuple(fs[i] for i in idx))


def mutate(genome, point, rng, function_set=DEFAULT_FUNCTION_SET):
    """Replace gene ``point`` (1-based) with a different function.

    The replacement is uniform over ``function_set`` minus the current
    gene. The input genome is left untouched.
    """
    n = len(genome)
    if not 1 <= point <= n:
        raise MutationPointError(f"mutation point {point} outside [1, {n}]")
    fs = _check_function_set(function_set, minimum=2)
    current = genome[point - 1]
    choices = [f for f in fs if f != current]
    new = choices[int(rng.integers(0, len(choices)))]
    genes = list(genome.genes)
    genes[point - 1] = new
    return Genome(tuple(genes))


def crossover(a, b, point):
    """One-point crossover: children are ``a[:k] + b[k:]`` and ``b[:k] + a[k:]``.

    ``point`` must lie in ``[2, n - 1]``.
    """
    n = len(a)
    if len(b) != n:
        raise CrossoverError(f"parents differ in length ({n} vs {len(b)})")
    if n < 3 or not 2 <= point <= n - 1:
        raise CrossoverError(
            f"crossover point {point} outside [2, {n - 1}] for length {n}")
    k = point
    return (Genome(a.genes[:k] + b.genes[k:]),
            Genome(b.genes[:k] + a.genes[k:]))


def search_space_size(n, m):
    """Count genomes of length ``n`` over ``m`` functions.

    Returns ``(total, multi_function, single_function)`` =
    ``(m**n, m**n - m, m)``. Python integers never overflow; callers that
    display the number should format it themselves.
    """
    if n < 1:
        raise GenomeArityError(f"genome length must be >= 1, got {n}")
    if m < 2:
        raise DomainError(f"function set size must be >= 2, got {m}")
    total = m ** n
    return total, total - m, m


def all_genomes(n, function_set=DEFAULT_FUNCTION_SET):
    """Yield every genome in lexicographic order of ``function_set``."""
    fs = _check_function_set(function_set)
    for genes in itertools.product(fs, repeat=n):
        yield Genome(genes)
