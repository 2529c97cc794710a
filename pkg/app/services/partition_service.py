import math
from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

from ..models.partition import CCoeff, Partition
from ..models.series import Scalar, ScalarField, SeriesError, TruncSeries
from .series_service import SeriesService


class PartitionService:
    """Servicio de particiones enteras y coeficientes c(j, t)."""

    DEFAULT_REAL_BITS = 192

    @classmethod
    def enumerate_partitions(cls, j: int) -> Tuple[Partition, ...]:
        """
        Todas las particiones de j en orden lexicográfico inverso de sus partes.

        Raises:
            ValueError: Si j no es positivo
        """
        if j < 1:
            raise ValueError(f"j debe ser positivo (recibido: {j})")
        return _partitions(j)

    @staticmethod
    def partition_count(j: int) -> int:
        """Número de particiones de j por programación dinámica."""
        counts = [1] + [0] * j
        for part in range(1, j + 1):
            for total in range(part, j + 1):
                counts[total] += counts[total - part]
        return counts[j]

    @staticmethod
    def multinomial(kparts: Sequence[int]) -> int:
        result = math.factorial(sum(kparts))
        for k in kparts:
            result //= math.factorial(k)
        return result

    @classmethod
    def resolve_field(cls, t, field: Optional[ScalarField] = None) -> ScalarField:
        """Racionales exactos para t entero; reales en otro caso."""
        integral = isinstance(t, int) or (isinstance(t, Fraction) and t.denominator == 1)
        if field is None:
            return ScalarField.rational() if integral else ScalarField.real(cls.DEFAULT_REAL_BITS)
        if field.is_exact and not integral:
            raise SeriesError(f"t = {t} no es entero: no admite aritmética racional exacta")
        return field

    @classmethod
    def c_coeff(cls, j: int, t, field: Optional[ScalarField] = None) -> Scalar:
        """
        c(j,t) = j · sum_{lambda ⊢ j} (-1)^{|lambda|-1}/|lambda| · multinomial · prod m!^{-lambda_m t}.
        """
        if j < 1:
            raise ValueError(f"j debe ser positivo (recibido: {j})")
        field = cls.resolve_field(t, field)
        if field.is_exact:
            return _c_coeff_exact(j, int(Fraction(t)))
        return _c_coeff_real(j, field.coerce(t), field.precision_bits)

    @classmethod
    def c_record(cls, j: int, t, field: Optional[ScalarField] = None) -> CCoeff:
        return CCoeff(j=j, t=t, value=cls.c_coeff(j, t, field))

    @classmethod
    def c_coeff_table(cls, t, j_max: int, field: Optional[ScalarField] = None) -> Tuple[Scalar, ...]:
        """
        c(j,t) para 0 <= j <= j_max (la posición 0 vale cero).

        Usa la identidad sum_j c(j,t)/j z^j = log(sum_n z^n / n!^t), que es
        exactamente el desarrollo de log1p que define la suma sobre particiones.
        """
        field = cls.resolve_field(t, field)
        key = int(Fraction(t)) if field.is_exact else field.coerce(t)
        return _c_table(key, j_max, field)

    @staticmethod
    def cycle_index(k_max: int, power_sums: Dict[int, object], zero, one) -> List[object]:
        """
        h_0..h_{k_max} con k·h_k = sum_j p_j h_{k-j} (índice de ciclos de S_k).

        Sirve tanto para series truncadas como para escalares.
        """
        h = [one]
        for k in range(1, k_max + 1):
            acc = zero
            for j in range(1, k + 1):
                p = power_sums.get(j)
                if p is None:
                    continue
                acc = acc + p * h[k - j]
            h.append(acc * Fraction(1, k) if isinstance(acc, TruncSeries) else acc / k)
        return h

    @staticmethod
    def cycle_index_with_derivative(
        k_max: int,
        power_sums: Dict[int, Tuple[Scalar, Scalar]],
        field: ScalarField,
    ) -> List[Tuple[Scalar, Scalar]]:
        """Como cycle_index sobre pares (valor, derivada) escalares."""
        with field.context():
            h = [(field.one(), field.zero())]
            for k in range(1, k_max + 1):
                value = field.zero()
                slope = field.zero()
                for j in range(1, k + 1):
                    pair = power_sums.get(j)
                    if pair is None:
                        continue
                    p, dp = pair
                    value += p * h[k - j][0]
                    slope += dp * h[k - j][0] + p * h[k - j][1]
                h.append((value / k, slope / k))
        return h


def _descending_parts(j: int):
    parts = [j]
    while True:
        yield tuple(parts)
        ones = 0
        while parts and parts[-1] == 1:
            parts.pop()
            ones += 1
        if not parts:
            return
        largest = parts.pop() - 1
        remaining = ones + 1
        parts.append(largest)
        while remaining > largest:
            parts.append(largest)
            remaining -= largest
        if remaining:
            parts.append(remaining)


@lru_cache(maxsize=None)
def _partitions(j: int) -> Tuple[Partition, ...]:
    return tuple(Partition.from_parts(parts, j) for parts in _descending_parts(j))


def _factorial_product(partition: Partition) -> int:
    result = 1
    for m, count in enumerate(partition.multiplicities, start=1):
        if count:
            result *= math.factorial(m) ** count
    return result


@lru_cache(maxsize=None)
def _c_coeff_exact(j: int, t: int) -> Fraction:
    total = Fraction(0)
    for partition in _partitions(j):
        size = partition.size
        sign = 1 if size % 2 == 1 else -1
        factor = Fraction(_factorial_product(partition)) ** (-t)
        total += sign * Fraction(PartitionService.multinomial(partition.multiplicities), size) * factor
    return j * total


@lru_cache(maxsize=None)
def _c_coeff_real(j: int, t, precision_bits: int):
    field = ScalarField.real(precision_bits)
    with field.context():
        total = field.zero()
        for partition in _partitions(j):
            size = partition.size
            sign = 1 if size % 2 == 1 else -1
            factor = field.power(_factorial_product(partition), -t)
            total += sign * field.coerce(Fraction(PartitionService.multinomial(partition.multiplicities), size)) * factor
        return j * total


@lru_cache(maxsize=256)
def _c_table(t, j_max: int, field: ScalarField) -> Tuple[Scalar, ...]:
    if j_max < 1:
        return (field.zero(),)
    with field.context():
        terms = [field.zero()]
        for n in range(1, j_max + 1):
            terms.append(field.power(math.factorial(n), -t))
    logarithm = SeriesService.log1p(TruncSeries.from_coefficients(terms, field, j_max))
    with field.context():
        return tuple(j * c for j, c in enumerate(logarithm.coeffs))
