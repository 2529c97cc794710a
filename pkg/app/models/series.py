from contextlib import nullcontext
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import Iterable, Optional, Tuple, Union

import mpmath

Scalar = Union[Fraction, mpmath.mpf]


class FieldKind(Enum):
    """Cuerpos escalares soportados por las series truncadas."""
    RATIONAL = "rational"
    REAL = "real"


class SeriesError(Exception):
    """Excepción personalizada para errores de aritmética de series."""
    pass


@dataclass(frozen=True)
class ScalarField:
    """Cuerpo escalar: racionales exactos o reales de precisión arbitraria."""
    kind: FieldKind
    precision_bits: int = 0

    MIN_PRECISION_BITS = 53

    @classmethod
    def rational(cls) -> "ScalarField":
        return cls(FieldKind.RATIONAL)

    @classmethod
    def real(cls, precision_bits: int = 192) -> "ScalarField":
        if precision_bits < cls.MIN_PRECISION_BITS:
            raise SeriesError(
                f"La precisión real debe ser al menos {cls.MIN_PRECISION_BITS} bits "
                f"(recibido: {precision_bits})"
            )
        return cls(FieldKind.REAL, precision_bits)

    @property
    def is_exact(self) -> bool:
        return self.kind is FieldKind.RATIONAL

    def context(self):
        """Contexto de precisión de trabajo para operaciones en modo real."""
        if self.is_exact:
            return nullcontext()
        return mpmath.workprec(self.precision_bits)

    def unify(self, other: "ScalarField") -> "ScalarField":
        if self.kind is not other.kind:
            raise SeriesError(
                f"Cuerpos escalares incompatibles: {self.kind.value} y {other.kind.value}"
            )
        if self.is_exact:
            return self
        return ScalarField(FieldKind.REAL, max(self.precision_bits, other.precision_bits))

    def coerce(self, value) -> Scalar:
        if self.is_exact:
            if isinstance(value, Fraction):
                return value
            if isinstance(value, (int, str)):
                return Fraction(value)
            raise SeriesError(f"El valor {value!r} no es un racional exacto")
        with self.context():
            if isinstance(value, Fraction):
                return mpmath.mpf(value.numerator) / value.denominator
            return mpmath.mpf(value)

    def zero(self) -> Scalar:
        return self.coerce(0)

    def one(self) -> Scalar:
        return self.coerce(1)

    def exp(self, value: Scalar) -> Scalar:
        if self.is_exact:
            if value != 0:
                raise SeriesError("exp de un racional no nulo no es racional")
            return Fraction(1)
        with self.context():
            return mpmath.exp(value)

    def log(self, value: Scalar) -> Scalar:
        if self.is_exact:
            if value != 1:
                raise SeriesError("log de un racional distinto de 1 no es racional")
            return Fraction(0)
        with self.context():
            return mpmath.log(value)

    def power(self, base: Scalar, exponent: Scalar) -> Scalar:
        """base**exponent; en modo exacto el exponente debe ser entero."""
        if self.is_exact:
            exponent = Fraction(exponent)
            if exponent.denominator != 1:
                raise SeriesError("Potencia con exponente no entero en modo exacto")
            return Fraction(base) ** int(exponent)
        with self.context():
            if base == 0:
                return mpmath.mpf(1) if exponent == 0 else mpmath.mpf(0)
            return mpmath.power(self.coerce(base), self.coerce(exponent))

    def describe(self) -> str:
        if self.is_exact:
            return "rational"
        return f"real({self.precision_bits} bits)"


@dataclass(frozen=True)
class TruncSeries:
    """Serie formal de potencias truncada: coeficientes 0..N sobre un cuerpo escalar."""
    coeffs: Tuple[Scalar, ...]
    field: ScalarField

    def __post_init__(self):
        if len(self.coeffs) == 0:
            raise SeriesError("Una serie truncada necesita al menos el coeficiente constante")

    @classmethod
    def from_coefficients(
        cls,
        coeffs: Iterable,
        field: ScalarField,
        order: Optional[int] = None,
    ) -> "TruncSeries":
        values = [field.coerce(c) for c in coeffs]
        if order is None:
            order = max(len(values) - 1, 0)
        if order < 0:
            raise SeriesError("El orden de truncamiento no puede ser negativo")
        values = values[: order + 1]
        values.extend(field.zero() for _ in range(order + 1 - len(values)))
        return cls(tuple(values), field)

    @classmethod
    def zero(cls, field: ScalarField, order: int) -> "TruncSeries":
        return cls.from_coefficients([], field, order)

    @classmethod
    def one(cls, field: ScalarField, order: int) -> "TruncSeries":
        return cls.from_coefficients([1], field, order)

    @classmethod
    def variable(cls, field: ScalarField, order: int) -> "TruncSeries":
        return cls.from_coefficients([0, 1], field, order)

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def coefficient(self, k: int) -> Scalar:
        if k < 0 or k > self.order:
            raise SeriesError(f"Coeficiente {k} fuera del orden de truncamiento {self.order}")
        return self.coeffs[k]

    def truncate(self, order: int) -> "TruncSeries":
        if order > self.order:
            raise SeriesError(
                f"No se puede extender una serie de orden {self.order} a orden {order}"
            )
        return TruncSeries(self.coeffs[: order + 1], self.field)

    def _combine_field(self, other: "TruncSeries") -> ScalarField:
        if not isinstance(other, TruncSeries):
            raise SeriesError(f"Operando no soportado: {type(other).__name__}")
        return self.field.unify(other.field)

    def __add__(self, other: "TruncSeries") -> "TruncSeries":
        field = self._combine_field(other)
        order = min(self.order, other.order)
        with field.context():
            coeffs = tuple(self.coeffs[k] + other.coeffs[k] for k in range(order + 1))
        return TruncSeries(coeffs, field)

    def __neg__(self) -> "TruncSeries":
        with self.field.context():
            return TruncSeries(tuple(-c for c in self.coeffs), self.field)

    def __sub__(self, other: "TruncSeries") -> "TruncSeries":
        return self + (-other)

    def scale(self, factor) -> "TruncSeries":
        factor = self.field.coerce(factor)
        with self.field.context():
            return TruncSeries(tuple(factor * c for c in self.coeffs), self.field)

    def __mul__(self, other) -> "TruncSeries":
        if not isinstance(other, TruncSeries):
            return self.scale(other)
        field = self._combine_field(other)
        order = min(self.order, other.order)
        a, b = self.coeffs, other.coeffs
        zero = field.zero()
        with field.context():
            result = [zero] * (order + 1)
            for i in range(order + 1):
                ai = a[i]
                if ai == 0:
                    continue
                for j in range(order + 1 - i):
                    result[i + j] += ai * b[j]
        return TruncSeries(tuple(result), field)

    def __rmul__(self, other) -> "TruncSeries":
        return self.scale(other)

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)
