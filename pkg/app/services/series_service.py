from typing import Optional

from ..models.series import Scalar, SeriesError, TruncSeries


class SeriesService:
    """Servicio de aritmética de series formales truncadas."""

    @staticmethod
    def add(a: TruncSeries, b: TruncSeries) -> TruncSeries:
        return a + b

    @staticmethod
    def mul(a: TruncSeries, b: TruncSeries) -> TruncSeries:
        return a * b

    @classmethod
    def exp(cls, a: TruncSeries) -> TruncSeries:
        """
        Exponencial formal mediante la recurrencia (exp a)' = a' · exp a.

        Raises:
            SeriesError: Si el término constante es no nulo en modo exacto
        """
        field = a.field
        if field.is_exact and a.coeffs[0] != 0:
            raise SeriesError("exp formal exige término constante nulo en modo racional")

        with field.context():
            result = [field.exp(a.coeffs[0])]
            for n in range(1, a.order + 1):
                acc = field.zero()
                for k in range(1, n + 1):
                    if a.coeffs[k] != 0:
                        acc += k * a.coeffs[k] * result[n - k]
                result.append(acc / n)
        return TruncSeries(tuple(result), field)

    @classmethod
    def log1p(cls, a: TruncSeries) -> TruncSeries:
        """
        log(1 + a) formal: (1 + a)·c' = a'.

        Raises:
            SeriesError: Si el término constante es no nulo en modo exacto
        """
        field = a.field
        if field.is_exact and a.coeffs[0] != 0:
            raise SeriesError("log1p formal exige término constante nulo en modo racional")

        with field.context():
            head = field.one() + a.coeffs[0]
            if head == 0:
                raise SeriesError("log1p no está definido: 1 + a(0) = 0")
            result = [field.log(head) if not field.is_exact else field.zero()]
            for n in range(1, a.order + 1):
                acc = n * a.coeffs[n]
                for k in range(1, n):
                    acc -= k * result[k] * a.coeffs[n - k]
                result.append(acc / (n * head))
        return TruncSeries(tuple(result), field)

    @classmethod
    def inverse(cls, a: TruncSeries) -> TruncSeries:
        """Inverso multiplicativo; exige término constante no nulo."""
        field = a.field
        head = a.coeffs[0]
        if head == 0:
            raise SeriesError("La serie no es invertible: término constante nulo")

        with field.context():
            result = [field.one() / head]
            for n in range(1, a.order + 1):
                acc = field.zero()
                for k in range(1, n + 1):
                    if a.coeffs[k] != 0:
                        acc += a.coeffs[k] * result[n - k]
                result.append(-acc / head)
        return TruncSeries(tuple(result), field)

    @staticmethod
    def substitute_power(a: TruncSeries, j: int, order: Optional[int] = None) -> TruncSeries:
        """a(x^j) truncada al orden pedido (por defecto j veces el orden de a)."""
        if j < 1:
            raise SeriesError(f"La potencia de sustitución debe ser positiva (recibido: {j})")
        if order is None:
            order = a.order * j
        zero = a.field.zero()
        result = [zero] * (order + 1)
        for k in range(min(a.order, order // j) + 1):
            result[k * j] = a.coeffs[k]
        return TruncSeries(tuple(result), a.field)

    @staticmethod
    def evaluate(a: TruncSeries, x) -> Scalar:
        """Evaluación de Horner del polinomio truncado; no se acota la cola."""
        field = a.field
        x = field.coerce(x)
        with field.context():
            acc = field.zero()
            for c in reversed(a.coeffs):
                acc = acc * x + c
        return acc

    @staticmethod
    def evaluate_with_derivative(a: TruncSeries, x):
        """Valor y derivada del polinomio truncado en x (Horner doble)."""
        field = a.field
        x = field.coerce(x)
        with field.context():
            value = field.zero()
            slope = field.zero()
            for c in reversed(a.coeffs):
                slope = slope * x + value
                value = value * x + c
        return value, slope

    @staticmethod
    def derivative(a: TruncSeries) -> TruncSeries:
        field = a.field
        if a.order == 0:
            return TruncSeries((field.zero(),), field)
        with field.context():
            coeffs = tuple(k * a.coeffs[k] for k in range(1, a.order + 1))
        return TruncSeries(coeffs, field)
