import math
from fractions import Fraction

import pytest

from app.models.catalog import MomentStatistic
from app.models.tree import DegreeModel, ResourceLimitError, TreeError
from app.services.enumeration_service import EnumerationService
from app.services.equation_service import EquationService
from app.services.tree_service import TreeService

MOTZKIN = [1, 1, 2, 4, 9, 21, 51, 127, 323, 835]


def catalan(m):
    return math.comb(2 * m, m) // (m + 1)


def test_class_counts():
    assert [EnumerationService.class_count(n) for n in range(1, 9)] == [1, 1, 2, 4, 9, 20, 48, 115]


def test_each_class_once_and_consistent():
    records = list(EnumerationService.enumerate_polya(7))
    codes = [r.code for r in records]
    assert len(set(codes)) == len(codes) == 48
    for record in records:
        representative = TreeService.parse_code(record.code)
        assert TreeService.canonical_code(representative) == record.code
        assert TreeService.aut_size(representative) == record.aut
        assert record.n == 7


def test_cayley_identity():
    for n in range(1, 11):
        assert EnumerationService.cayley_sum(n) == n ** (n - 1)


def test_catalan_identity():
    for n in range(1, 11):
        assert EnumerationService.plane_tree_count(n) == catalan(n - 1)


def test_weight_sum_matches_simply_generated_series():
    ub = DegreeModel.unary_binary()
    for n in range(1, 11):
        assert EnumerationService.weight_sum(n, ub) == MOTZKIN[n - 1]
    ternary = DegreeModel.ternary()
    series = EquationService.simply_generated_series(ternary, 10)
    for n in range(1, 11):
        assert EnumerationService.weight_sum(n, ternary) == series.coefficient(n)


def test_exact_p_labeled_small_sizes():
    assert EnumerationService.exact_p_labeled(1) == 1
    assert EnumerationService.exact_p_labeled(2) == 1
    assert EnumerationService.exact_p_labeled(3) == Fraction(5, 9)


def test_exact_p_gw_unary_binary():
    assert EnumerationService.exact_p_gw(4, DegreeModel.unary_binary()) == Fraction(3, 8)


def test_poisson_model_reproduces_labeled_probability():
    for n in range(1, 9):
        assert EnumerationService.exact_p_gw(n, DegreeModel.poisson()) == EnumerationService.exact_p_labeled(n)


def test_binary_parity_obstruction():
    binary = DegreeModel.binary()
    assert EnumerationService.class_count(4, binary) == 0
    with pytest.raises(TreeError):
        EnumerationService.exact_p_gw(4, binary)


def test_ceiling():
    with pytest.raises(ResourceLimitError):
        EnumerationService.exact_p_labeled(23)
    with pytest.raises(ResourceLimitError):
        EnumerationService.exact_p_labeled(8, ceiling=6)
    assert EnumerationService.ceiling_for(DegreeModel.unary_binary()) == 21
    assert EnumerationService.ceiling_for(DegreeModel.plane()) == 18


def test_class_budget(monkeypatch):
    # 1 + 1 + 2 + 4 + 9 = 17 clases hasta n = 5
    monkeypatch.setattr(EnumerationService, "CATALOG_CLASS_BUDGET", 16)
    with pytest.raises(ResourceLimitError):
        EnumerationService.exact_p_labeled(5)
    assert EnumerationService.exact_p_labeled(4) > 0


@pytest.mark.parametrize("t", [0, 2])
def test_polya_series_agree_with_enumeration(t):
    """Coeficientes exactos de P(x,t) contra la suma por clases, hasta n = 15."""
    order = 15
    polya = EquationService.solve_polya_series(t, order)
    for n in range(1, order + 1):
        assert polya.coefficient(n) == EnumerationService.inverse_aut_power_sum(n, t)


@pytest.mark.parametrize("t", [1, 2])
@pytest.mark.parametrize("model", [
    DegreeModel.unary_binary(), DegreeModel.binary121(), DegreeModel.binary(), DegreeModel.ternary(),
])
def test_degree_series_agree_with_enumeration(model, t):
    order = 15
    series = EquationService.solve_degree_series(model, t, order)
    for n in range(1, order + 1):
        assert series.coefficient(n) == EnumerationService.weight_power_sum(n, model, t)


def test_marked_series_agree_with_enumeration():
    marks = (Fraction(1, 2), Fraction(3))
    series = EquationService.solve_marked_series(2, (0, 2), marks, 10)
    for n in range(1, 11):
        assert series.coefficient(n) == EnumerationService.marked_class_sum(n, 2, (0, 2), marks)


def test_marked_derivative_counts_vertices():
    derivative = EquationService.marked_derivative_series(2, 0, 10)
    for n in range(1, 11):
        moments = EnumerationService.exact_isomorphic_pair_moments(n, 0)
        assert derivative.coefficient(n) == moments.mean * EnumerationService.inverse_aut_power_sum(n, 2)


def test_isomorphic_pair_leaf_moments():
    moments = EnumerationService.exact_isomorphic_pair_moments(3, 0)
    assert moments.mean == Fraction(6, 5)
    assert moments.classes == 2
    assert EnumerationService.exact_isomorphic_pair_moments(1, 0).mean == 1


def test_labeled_leaf_moments():
    # hojas de un árbol etiquetado uniforme de tamaño 3: camino (6 de 9) y cereza (3 de 9)
    assert EnumerationService.exact_labeled_moments(3, 0).mean == Fraction(4, 3)


def test_uniform_polya_moments():
    leaves = EnumerationService.exact_uniform_polya_moments(4, MomentStatistic.LEAVES)
    assert leaves.mean == 2
    aut = EnumerationService.exact_uniform_polya_moments(3, MomentStatistic.LOG_AUT)
    assert aut.mean == pytest.approx(math.log(2) / 2)
    weight = EnumerationService.exact_uniform_polya_moments(3, MomentStatistic.LOG_WEIGHT, DegreeModel.binary121())
    assert weight.mean == pytest.approx(math.log(2))


def test_isomorphic_class_law():
    entries, weights = EnumerationService.isomorphic_class_law(3)
    assert sorted(weights) == [9, 36]
    assert len(entries) == 2


def test_plane_decay_table():
    rows = EnumerationService.plane_decay_table(12)
    assert rows[0].q == 1
    assert rows[0].rate == 0
    assert rows[4].plane_trees == 14
    rates = [row.rate for row in rows]
    assert all(a > b for a, b in zip(rates[3:], rates[4:]))


def test_plane_decay_rate_decreases_up_to_eighteen():
    rates = [row.rate for row in EnumerationService.plane_decay_table(18, method="series")]
    assert all(a > b for a, b in zip(rates[3:], rates[4:]))


@pytest.mark.slow
def test_plane_decay_methods_agree_up_to_eighteen():
    by_series = EnumerationService.plane_decay_table(18, method="series")
    by_enumeration = EnumerationService.plane_decay_table(18)
    assert [r.q for r in by_series] == [r.q for r in by_enumeration]


def test_plane_decay_methods_agree():
    by_series = EnumerationService.plane_decay_table(10, method="series")
    by_enumeration = EnumerationService.plane_decay_table(10)
    assert [r.q for r in by_series] == [r.q for r in by_enumeration]


def test_plane_decay_unknown_method():
    with pytest.raises(TreeError):
        EnumerationService.plane_decay_table(5, method="magic")


def test_labeled_and_unary_binary_rates_increase():
    ub = DegreeModel.unary_binary()
    labeled = [EnumerationService.rate(EnumerationService.exact_p_labeled(n), n) for n in range(4, 13)]
    restricted = [EnumerationService.rate(EnumerationService.exact_p_gw(n, ub), n) for n in range(4, 13)]
    assert all(a < b for a, b in zip(labeled, labeled[1:]))
    assert all(a < b for a, b in zip(restricted, restricted[1:]))
