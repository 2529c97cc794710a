from fractions import Fraction

import pytest

from app.models.series import ScalarField, SeriesError
from app.services.partition_service import PartitionService


def test_enumerate_partitions_matches_count():
    for j in range(1, 12):
        partitions = PartitionService.enumerate_partitions(j)
        assert len(partitions) == PartitionService.partition_count(j)
        assert all(p.weight == j for p in partitions)
        assert len({p.multiplicities for p in partitions}) == len(partitions)


def test_partition_count_known_values():
    assert PartitionService.partition_count(5) == 7
    assert PartitionService.partition_count(10) == 42


def test_enumerate_partitions_rejects_zero():
    with pytest.raises(ValueError):
        PartitionService.enumerate_partitions(0)


def test_multinomial():
    assert PartitionService.multinomial((2, 1)) == 3
    assert PartitionService.multinomial((1, 1, 1)) == 6


def test_c_coeff_closed_forms():
    assert PartitionService.c_coeff(1, 2) == 1
    assert PartitionService.c_coeff(2, 2) == Fraction(-1, 2)
    # log(1/(1-z)) y log(e^z)
    for j in range(1, 8):
        assert PartitionService.c_coeff(j, 0) == 1
    for j in range(2, 8):
        assert PartitionService.c_coeff(j, 1) == 0


def test_c_coeff_table_agrees_with_partition_sum():
    table = PartitionService.c_coeff_table(2, 9)
    for j in range(1, 10):
        assert table[j] == PartitionService.c_coeff(j, 2)


def test_c_coeff_real_for_fractional_t():
    value = PartitionService.c_coeff(2, Fraction(1, 2))
    assert float(value) == pytest.approx(2 ** 0.5 - 1, rel=1e-12)


def test_c_coeff_exact_field_rejects_fractional_t():
    with pytest.raises(SeriesError):
        PartitionService.c_coeff(2, Fraction(1, 2), ScalarField.rational())


def test_cycle_index_with_unit_power_sums():
    h = PartitionService.cycle_index(6, {j: Fraction(1) for j in range(1, 7)}, Fraction(0), Fraction(1))
    assert h == [1] * 7


def test_cycle_index_with_only_p1():
    h = PartitionService.cycle_index(4, {1: Fraction(2)}, Fraction(0), Fraction(1))
    assert h == [1, 2, 2, Fraction(4, 3), Fraction(2, 3)]
