import math
from collections import Counter

import numpy as np
import pytest
from scipy import stats

from app.models.sampling import RngSpec, SamplingError, SamplingModel
from app.models.tree import DegreeModel, ResourceLimitError
from app.services.enumeration_service import EnumerationService
from app.services.sampler_service import SamplerService, multiset_count, uniform_below
from app.services.tree_service import TreeService

PATH3 = b"((()))"
CHERRY3 = b"(()())"


def frequencies(sampler, draws):
    counts = Counter(TreeService.canonical_code(sampler()) for _ in range(draws))
    return {code: count / draws for code, count in counts.items()}


def assert_law(observed, expected, draws):
    """Cada frecuencia a menos de 4 desviaciones de su probabilidad."""
    assert set(observed) <= set(expected)
    for code, p in expected.items():
        sigma = math.sqrt(p * (1 - p) / draws)
        assert abs(observed.get(code, 0.0) - p) <= 4 * sigma + 1e-12, code


def weight_law(n, model):
    records = list(EnumerationService.enumerate_polya(n, model))
    total = sum(r.weight for r in records)
    return {r.code: float(r.weight / total) for r in records if r.weight}


def test_same_seed_same_trees():
    first = SamplerService.sample_labeled_rooted(12, RngSpec(7).generator())
    second = SamplerService.sample_labeled_rooted(12, RngSpec(7).generator())
    assert first == second
    assert SamplerService.sample_cgw(15, DegreeModel.ternary(), RngSpec(3)) == \
        SamplerService.sample_cgw(15, DegreeModel.ternary(), RngSpec(3))


def test_prufer_star():
    edges = SamplerService.prufer_decode([3, 3, 3])
    assert edges == [(0, 3), (1, 3), (2, 3), (3, 4)]


def test_prufer_path():
    edges = SamplerService.prufer_decode([1, 2])
    assert sorted(tuple(sorted(e)) for e in edges) == [(0, 1), (1, 2), (2, 3)]


def test_labeled_shapes_at_three():
    generator = RngSpec(11).generator()
    draws = 20000
    observed = frequencies(lambda: SamplerService.sample_labeled_rooted(3, generator), draws)
    assert_law(observed, {PATH3: 2 / 3, CHERRY3: 1 / 3}, draws)


def test_labeled_trivial_sizes():
    generator = RngSpec(0).generator()
    assert SamplerService.sample_labeled_rooted(1, generator).size == 1
    assert SamplerService.sample_labeled_rooted(2, generator).out_degrees() == [1, 0]
    with pytest.raises(SamplingError):
        SamplerService.sample_labeled_rooted(0, generator)


@pytest.mark.parametrize("model, n", [
    (DegreeModel.unary_binary(), 3),
    (DegreeModel.binary121(), 3),
    (DegreeModel.ternary(), 5),
])
def test_conditioned_gw_follows_class_weights(model, n):
    generator = RngSpec(5).generator()
    draws = 20000
    observed = frequencies(lambda: SamplerService.sample_cgw(n, model, generator), draws)
    assert_law(observed, weight_law(n, model), draws)


def test_conditioned_gw_respects_degrees():
    generator = RngSpec(1).generator()
    model = DegreeModel.binary()
    for _ in range(200):
        tree = SamplerService.sample_cgw(21, model, generator)
        assert tree.size == 21
        assert set(tree.out_degrees()) <= {0, 2}


def test_unreachable_size():
    with pytest.raises(SamplingError):
        SamplerService.sample_cgw(4, DegreeModel.binary(), RngSpec(0))
    with pytest.raises(SamplingError):
        SamplerService.sample_polya_uniform(4, RngSpec(0), DegreeModel.binary())


def test_cycle_lemma_rotation():
    assert SamplerService.cycle_lemma_rotation([0, 2, 0]) == [2, 0, 0]
    assert SamplerService.cycle_lemma_rotation([0, 0, 1, 2]) == [1, 2, 0, 0]
    assert SamplerService.cycle_lemma_rotation([2, 0, 0]) == [2, 0, 0]


def test_plane_uniform_at_four():
    generator = RngSpec(9).generator()
    draws = 20000
    observed = frequencies(lambda: SamplerService.sample_plane(4, generator), draws)
    records = list(EnumerationService.enumerate_polya(4))
    assert_law(observed, {r.code: r.pr / 5 for r in records}, draws)


def test_uniform_below_large_bound():
    generator = RngSpec(2).generator()
    bound = 10 ** 30
    values = [uniform_below(generator, bound) for _ in range(200)]
    assert all(0 <= v < bound for v in values)
    assert max(values) > 2 ** 64
    assert uniform_below(generator, 1) == 0
    with pytest.raises(SamplingError):
        uniform_below(generator, 0)


def test_multiset_count():
    assert multiset_count(3, 2) == 6
    assert multiset_count(0, 0) == 1
    assert multiset_count(0, 2) == 0


def test_polya_counts():
    assert [SamplerService.polya_count(n) for n in range(1, 8)] == [1, 1, 2, 4, 9, 20, 48]


@pytest.mark.parametrize("model", [DegreeModel.unary_binary(), DegreeModel.binary(), DegreeModel.ternary()])
def test_polya_counts_match_enumeration(model):
    for n in range(1, 12):
        assert SamplerService.polya_count(n, model) == EnumerationService.class_count(n, model)


def test_unrank_is_bijection():
    n = 7
    codes = [TreeService.canonical_code(SamplerService.unrank_polya(n, i)) for i in range(48)]
    assert set(codes) == {r.code for r in EnumerationService.enumerate_polya(n)}
    assert len(set(codes)) == 48
    with pytest.raises(SamplingError):
        SamplerService.unrank_polya(n, 48)


def test_unrank_respects_model():
    model = DegreeModel.unary_binary()
    count = SamplerService.polya_count(8, model)
    for index in range(count):
        assert max(SamplerService.unrank_polya(8, index, model).out_degrees()) <= 2


def test_polya_uniform_at_three():
    generator = RngSpec(4).generator()
    draws = 20000
    observed = frequencies(lambda: SamplerService.sample_polya_uniform(3, generator), draws)
    assert_law(observed, {PATH3: 0.5, CHERRY3: 0.5}, draws)


def test_polya_uniform_chi_square():
    generator = RngSpec(8).generator()
    draws = 20000
    codes = [r.code for r in EnumerationService.enumerate_polya(6)]
    counts = Counter(TreeService.canonical_code(SamplerService.sample_polya_uniform(6, generator))
                     for _ in range(draws))
    observed = np.array([counts[code] for code in codes])
    assert observed.sum() == draws
    assert stats.chisquare(observed).pvalue > 1e-4


def test_polya_ceilings():
    with pytest.raises(ResourceLimitError):
        SamplerService.polya_count(SamplerService.UNBOUNDED_POLYA_SAMPLER_CEILING + 1)
    with pytest.raises(ResourceLimitError):
        SamplerService.polya_count(SamplerService.POLYA_SAMPLER_CEILING + 1, DegreeModel.binary())


def test_polya_large_bounded_tree():
    tree = SamplerService.sample_polya_uniform(201, RngSpec(6), DegreeModel.binary())
    assert tree.size == 201
    assert set(tree.out_degrees()) <= {0, 2}


def test_dispatch():
    rng = RngSpec(12)
    assert SamplerService.sample(9, SamplingModel.labeled(), rng).size == 9
    assert SamplerService.sample(9, SamplingModel.plane(), rng).size == 9
    assert SamplerService.sample(9, SamplingModel.cgw(DegreeModel.unary_binary()), rng).size == 9
    assert SamplerService.sample(9, SamplingModel.polya(), rng).size == 9


def test_sample_index():
    generator = RngSpec(13).generator()
    cumulative = [1, 1, 4]
    draws = [SamplerService.sample_index(generator, cumulative) for _ in range(4000)]
    assert 1 not in draws
    assert Counter(draws)[2] / len(draws) == pytest.approx(0.75, abs=0.04)


@pytest.mark.slow
def test_log_weight_nearly_symmetric_at_two_hundred():
    """log W de Pólya uniforme con grados en {0,1,2} (pesos [1,2,1]) es casi simétrico en n = 200."""
    model = DegreeModel.binary121()
    generator = RngSpec(17).generator()
    values = np.empty(100_000)
    for i in range(values.size):
        weight = TreeService.class_weight(SamplerService.sample_polya_uniform(200, generator, model), model)
        values[i] = math.log(weight.numerator) - math.log(weight.denominator)
    assert abs(stats.skew(values)) < 0.15
    assert values.mean() / 200 == pytest.approx(0.444518, abs=0.05)
