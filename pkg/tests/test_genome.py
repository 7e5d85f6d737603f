from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cmcnn.activations import DEFAULT_FUNCTION_SET, Activation
from cmcnn.exceptions import (CrossoverError, DomainError, GenomeArityError,
                              MutationPointError)
from cmcnn.genome import (Genome, all_genomes, crossover, mutate, random_genome,
                          search_space_size)

genes = st.sampled_from(list(Activation))
genomes = st.lists(genes, min_size=1, max_size=12).map(lambda g: Genome(tuple(g)))


def test_string_round_trip():
    g = Genome.parse("relu-SIG-tanh-ELU")
    assert str(g) == "RELU-SIG-TANH-ELU"
    assert Genome.parse(str(g)) == g
    assert Genome.parse("RELU,ELU") == Genome((Activation.RELU, Activation.ELU))


def test_empty_genome_rejected():
    with pytest.raises(GenomeArityError):
        Genome(())
    with pytest.raises(GenomeArityError):
        random_genome(0, rng=np.random.default_rng(0))


def test_single_function_flag():
    assert Genome.uniform("TANH", 3).is_single_function
    assert not Genome.parse("TANH-RELU").is_single_function


@settings(max_examples=300)
@given(genomes, st.data())
def test_mutation_changes_exactly_the_chosen_gene(g, data):
    j = data.draw(st.integers(1, len(g)))
    rng = np.random.default_rng(data.draw(st.integers(0, 2 ** 32)))
    child = mutate(g, j, rng)
    assert len(child) == len(g)
    assert [i for i in range(len(g)) if child[i] != g[i]] == [j - 1]
    assert child[j - 1] in DEFAULT_FUNCTION_SET


def test_mutation_replacement_is_uniform_over_the_others():
    rng = np.random.default_rng(3)
    g = Genome.uniform(Activation.RELU, 1)
    counts = Counter(mutate(g, 1, rng)[0] for _ in range(30_000))
    assert set(counts) == {Activation.SIG, Activation.TANH, Activation.ELU}
    for c in counts.values():
        assert abs(c / 30_000 - 1 / 3) < 0.015


@pytest.mark.parametrize("point", [0, -1, 5])
def test_mutation_point_bounds(point):
    with pytest.raises(MutationPointError):
        mutate(Genome.uniform("RELU", 4), point, np.random.default_rng(0))


def test_mutation_needs_two_functions():
    with pytest.raises(DomainError):
        mutate(Genome.uniform("RELU", 2), 1, np.random.default_rng(0), [Activation.RELU])


@settings(max_examples=300)
@given(st.integers(3, 12), st.data())
def test_crossover_properties(n, data):
    a = Genome(tuple(data.draw(st.lists(genes, min_size=n, max_size=n))))
    b = Genome(tuple(data.draw(st.lists(genes, min_size=n, max_size=n))))
    k = data.draw(st.integers(2, n - 1))
    c1, c2 = crossover(a, b, k)
    assert c1.genes == a.genes[:k] + b.genes[k:]
    assert c2.genes == b.genes[:k] + a.genes[k:]
    assert Counter(c1) + Counter(c2) == Counter(a) + Counter(b)


def test_crossover_worked_example():
    a = Genome.parse("RELU-RELU-RELU-RELU")
    b = Genome.parse("SIG-SIG-SIG-SIG")
    c1, c2 = crossover(a, b, 2)
    assert str(c1) == "RELU-RELU-SIG-SIG"
    assert str(c2) == "SIG-SIG-RELU-RELU"


def test_crossover_rejections():
    a = Genome.uniform("RELU", 4)
    with pytest.raises(CrossoverError):
        crossover(a, Genome.uniform("RELU", 5), 2)
    for k in (1, 4):
        with pytest.raises(CrossoverError):
            crossover(a, a, k)
    with pytest.raises(CrossoverError):
        crossover(Genome.uniform("RELU", 2), Genome.uniform("SIG", 2), 1)


def test_random_genome_frequencies():
    rng = np.random.default_rng(5)
    counts = Counter()
    for _ in range(25_000):
        counts.update(random_genome(4, rng=rng))
    total = sum(counts.values())
    assert total == 100_000
    for a in DEFAULT_FUNCTION_SET:
        assert abs(counts[a] / total - 0.25) <= 0.01


def test_random_genome_is_seeded():
    a = random_genome(10, rng=np.random.default_rng(7))
    b = random_genome(10, rng=np.random.default_rng(7))
    assert a == b


@pytest.mark.parametrize("n,m,expected", [
    (4, 4, (256, 252, 4)), (1, 4, (4, 0, 4)), (10, 4, (1048576, 1048572, 4)),
    (3, 2, (8, 6, 2)), (60, 4, (4 ** 60, 4 ** 60 - 4, 4)),
])
def test_search_space_size(n, m, expected):
    assert search_space_size(n, m) == expected


def test_search_space_domain():
    with pytest.raises(GenomeArityError):
        search_space_size(0, 4)
    with pytest.raises(DomainError):
        search_space_size(3, 1)


def test_all_genomes_enumerates_the_space():
    found = list(all_genomes(3))
    assert len(found) == len(set(found)) == 64
    assert str(found[0]) == "RELU-RELU-RELU" and str(found[-1]) == "ELU-ELU-ELU"
    assert sum(g.is_single_function for g in found) == 4
