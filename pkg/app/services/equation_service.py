import logging
import math
import threading
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from ..models.asymptotics import EquationFamily, FamilyKind
from ..models.series import Scalar, ScalarField, SeriesError, TruncSeries
from ..models.tree import DegreeModel
from .partition_service import PartitionService
from .series_service import SeriesService

logger = logging.getLogger(__name__)


class EquationService:
    """
    Servicio que resuelve como series truncadas las ecuaciones funcionales

        P = x · [kappa · exp(P + G) + sum_i coef_i · Z_{d_i}(P, p)]

    donde p_j = c(j,t) · P(x^j, jt, u^j) para j >= 2 y Z_d es el índice de ciclos de S_d.
    Los términos anidados se piden recursivamente al orden floor((N-1)/j).
    """

    DEFAULT_ORDER = 64
    NESTED_DEGREE = 40

    _memo: Dict[tuple, TruncSeries] = {}
    _lock = threading.Lock()

    @staticmethod
    def resolve_parameters(t, field: Optional[ScalarField]) -> Tuple[Scalar, ScalarField]:
        field = PartitionService.resolve_field(t, field)
        if field.is_exact:
            return Fraction(t), field
        return field.coerce(t), field

    @staticmethod
    def _validate_order(order: int) -> None:
        if not isinstance(order, int) or order < 1:
            raise SeriesError(f"El orden de truncamiento debe ser un entero positivo (recibido: {order})")

    @classmethod
    def clear_cache(cls) -> None:
        with cls._lock:
            cls._memo.clear()

    @classmethod
    def _cached(cls, key: tuple, order: int) -> Optional[TruncSeries]:
        with cls._lock:
            stored = cls._memo.get(key)
        if stored is not None and stored.order >= order:
            return stored.truncate(order)
        return None

    @classmethod
    def _store(cls, key: tuple, series: TruncSeries) -> None:
        with cls._lock:
            stored = cls._memo.get(key)
            if stored is None or stored.order < series.order:
                cls._memo[key] = series

    @staticmethod
    def family_terms(
        family: EquationFamily,
        t: Scalar,
        marks: Tuple[Scalar, ...],
        field: ScalarField,
        order: int,
    ) -> Tuple[Scalar, List[Tuple[int, Scalar]]]:
        """kappa y los pares (grado, coeficiente) de la familia."""
        with field.context():
            if family.kind is FamilyKind.POLYA:
                return field.one(), []
            if family.kind is FamilyKind.MARKED:
                return field.one(), [(d, u - 1) for d, u in zip(family.marked_degrees, marks)]
            terms = []
            for k in family.model.support(max(order - 1, 0)):
                base = field.coerce(family.model.weight(k) * math.factorial(k))
                terms.append((k, field.power(base, t)))
            return field.zero(), terms

    @classmethod
    def solve(
        cls,
        family: EquationFamily,
        t,
        order: int,
        marks: Sequence = (),
        field: Optional[ScalarField] = None,
    ) -> TruncSeries:
        """Coeficientes 0..order de la familia en (t, u); memoizados por parámetros."""
        cls._validate_order(order)
        t, field = cls.resolve_parameters(t, field)
        marks = tuple(field.coerce(u) for u in marks)
        if family.kind is FamilyKind.MARKED and len(marks) != len(family.marked_degrees):
            raise SeriesError(
                f"Se esperaban {len(family.marked_degrees)} marcas (recibidas: {len(marks)})"
            )
        return cls._solve(family, t, marks, order, field)

    @classmethod
    def _solve(cls, family, t, marks, order, field) -> TruncSeries:
        key = ("series", family.key, t, marks, field)
        cached = cls._cached(key, order)
        if cached is not None:
            return cached
        series = cls._solve_uncached(family, t, marks, order, field)
        cls._store(key, series)
        return series

    @classmethod
    def _nested_power_sums(cls, family, t, marks, order, field) -> Dict[int, TruncSeries]:
        """p_j(x) = c(j,t) · P(x^j, jt, u^j) como series de orden `order`."""
        limit = family.nested_limit(order + 1)
        if limit < 2:
            return {}
        c = PartitionService.c_coeff_table(t, limit, field)
        power_sums = {}
        for j in range(2, limit + 1):
            inner_order = order // j
            if inner_order < 1 or c[j] == 0:
                continue
            with field.context():
                inner_t = j * t
                inner_marks = tuple(u ** j for u in marks)
            inner = cls._solve(family, inner_t, inner_marks, inner_order, field)
            power_sums[j] = SeriesService.substitute_power(inner, j, order).scale(c[j])
        return power_sums

    @classmethod
    def _solve_uncached(cls, family, t, marks, order, field) -> TruncSeries:
        N = order
        kappa, terms = cls.family_terms(family, t, marks, field, N)
        power_sums = cls._nested_power_sums(family, t, marks, N - 1, field)
        zero_series = TruncSeries.zero(field, N - 1)
        a_max = max((d for d, _ in terms), default=0)
        cycle = PartitionService.cycle_index(a_max, power_sums, zero_series, TruncSeries.one(field, N - 1))

        weighted = []
        for a in range(a_max + 1):
            acc = zero_series
            for d, coef in terms:
                if d >= a and coef != 0:
                    acc = acc + cycle[d - a].scale(coef)
            weighted.append(acc.scale(Fraction(1, math.factorial(a))).coeffs)

        exponent = zero_series
        if kappa != 0:
            for j, p in power_sums.items():
                exponent = exponent + p.scale(Fraction(1, j))
        G = exponent.coeffs

        zero = field.zero()
        P = [zero] * (N + 1)
        S = [zero] * N
        E = [zero] * N
        powers = [[zero] * N for _ in range(a_max + 1)]
        powers[0][0] = field.one()
        with field.context():
            for m in range(N):
                if kappa != 0:
                    S[m] = P[m] + G[m]
                    if m == 0:
                        E[0] = field.exp(S[0])
                    else:
                        acc = zero
                        for k in range(1, m + 1):
                            if S[k] != 0:
                                acc += k * S[k] * E[m - k]
                        E[m] = acc / m
                for a in range(1, a_max + 1):
                    acc = zero
                    previous = powers[a - 1]
                    for i in range(1, m + 1):
                        acc += P[i] * previous[m - i]
                    powers[a][m] = acc
                value = kappa * E[m] if kappa != 0 else zero
                for a in range(a_max + 1):
                    row = weighted[a]
                    power = powers[a]
                    for i in range(m + 1):
                        if power[i] != 0 and row[m - i] != 0:
                            value += power[i] * row[m - i]
                P[m + 1] = value
        logger.debug(
            "Familia %s resuelta: t=%s, marcas=%s, orden=%d, anidados=%d",
            family.kind.value, t, marks, N, len(power_sums),
        )
        return TruncSeries(tuple(P), field)

    @classmethod
    def solve_polya_series(cls, t, order: int = DEFAULT_ORDER, field: Optional[ScalarField] = None) -> TruncSeries:
        """P(x,t) = sum_P x^|P| / |Aut P|^t; racional exacto para t entero."""
        return cls.solve(EquationFamily.polya(), t, order, field=field)

    @classmethod
    def solve_degree_series(
        cls,
        model: DegreeModel,
        t,
        order: int = DEFAULT_ORDER,
        field: Optional[ScalarField] = None,
    ) -> TruncSeries:
        """P_D(x,t) = sum_P W(P)^t x^|P| sobre los árboles de Pólya con grados en D."""
        return cls.solve(EquationFamily.degree(model), t, order, field=field)

    @classmethod
    def solve_marked_series(
        cls,
        t,
        degrees: Sequence[int],
        marks: Sequence,
        order: int = DEFAULT_ORDER,
        field: Optional[ScalarField] = None,
    ) -> TruncSeries:
        """P(x,t,u) con u_i marcando los vértices de grado de salida d_i."""
        return cls.solve(EquationFamily.marked(degrees), t, order, marks=marks, field=field)

    @classmethod
    def simply_generated_series(cls, model: DegreeModel, order: int) -> TruncSeries:
        """T = x·Phi(T) por iteración de punto fijo; oráculo independiente en racionales."""
        cls._validate_order(order)
        field = ScalarField.rational()
        degrees = model.support(order - 1)
        x = TruncSeries.variable(field, order)
        T = TruncSeries.zero(field, order)
        for _ in range(order):
            acc = TruncSeries.zero(field, order)
            for k in range(max(degrees), -1, -1):
                acc = acc * T + TruncSeries.one(field, order).scale(model.weight(k))
            T = x * acc
        return T

    @classmethod
    def exponent_series(cls, t, order: int, field: Optional[ScalarField] = None) -> TruncSeries:
        """G(x) = sum_{j>=2} c(j,t)/j · P(x^j, jt) hasta `order`."""
        cls._validate_order(order)
        t, field = cls.resolve_parameters(t, field)
        power_sums = cls._nested_power_sums(EquationFamily.polya(), t, (), order, field)
        G = TruncSeries.zero(field, order)
        for j, p in power_sums.items():
            G = G + p.scale(Fraction(1, j))
        return G

    @classmethod
    def xi_series(cls, order: int = DEFAULT_ORDER, t=2, field: Optional[ScalarField] = None) -> TruncSeries:
        """xi(x) = x · exp(G(x)); P(x,t) = Y(xi(x)) con Y la función árbol."""
        cls._validate_order(order)
        G = cls.exponent_series(t, order - 1, field)
        inner = SeriesService.exp(G)
        return TruncSeries((inner.field.zero(),) + inner.coeffs, inner.field)

    @classmethod
    def nested_polynomials(
        cls,
        family: EquationFamily,
        t,
        x_degree: int,
        marks: Sequence = (),
        nested_degree: int = NESTED_DEGREE,
        field: Optional[ScalarField] = None,
    ) -> List[Tuple[int, Scalar, TruncSeries]]:
        """
        Polinomios Q_j = P(., jt, u^j) truncados a grado min(nested_degree, x_degree // j),
        con su coeficiente c(j,t), para evaluar la ecuación punto a punto.
        """
        t, field = cls.resolve_parameters(t, field)
        marks = tuple(field.coerce(u) for u in marks)
        limit = family.nested_limit(x_degree + 1)
        if limit < 2:
            return []
        c = PartitionService.c_coeff_table(t, limit, field)
        result = []
        for j in range(2, limit + 1):
            degree = min(nested_degree, x_degree // j)
            if degree < 1 or c[j] == 0:
                continue
            with field.context():
                inner_t = j * t
                inner_marks = tuple(u ** j for u in marks)
            result.append((j, c[j], cls._solve(family, inner_t, inner_marks, degree, field)))
        return result

    @classmethod
    def marked_derivative_series(
        cls,
        t,
        degree: int,
        order: int = DEFAULT_ORDER,
        field: Optional[ScalarField] = None,
    ) -> TruncSeries:
        """
        M_d(x,t) = sum_P (#vértices de grado d) x^|P| / |Aut P|^t, derivada en u = 1 de
        la familia marcada: M = (P·A + x·Z_d(P, p)) / (1 - P), A = sum_j c(j,t) M(x^j, jt).
        """
        cls._validate_order(order)
        if degree < 0:
            raise SeriesError(f"El grado marcado debe ser no negativo (recibido: {degree})")
        t, field = cls.resolve_parameters(t, field)
        return cls._derivative(t, degree, order, field)

    @classmethod
    def _derivative(cls, t, degree: int, order: int, field: ScalarField) -> TruncSeries:
        key = ("derivative", degree, t, field)
        cached = cls._cached(key, order)
        if cached is not None:
            return cached

        family = EquationFamily.polya()
        P = cls._solve(family, t, (), order, field)
        zero_series = TruncSeries.zero(field, order)
        A = zero_series
        power_sums = {}
        if order >= 3:
            c = PartitionService.c_coeff_table(t, order - 1, field)
            for j in range(2, order):
                inner_order = (order - 1) // j
                if inner_order < 1 or c[j] == 0:
                    continue
                with field.context():
                    inner_t = j * t
                inner_m = cls._derivative(inner_t, degree, inner_order, field)
                inner_p = cls._solve(family, inner_t, (), inner_order, field)
                A = A + SeriesService.substitute_power(inner_m, j, order).scale(c[j])
                power_sums[j] = SeriesService.substitute_power(inner_p, j, order).scale(c[j])

        one_series = TruncSeries.one(field, order)
        cycle = PartitionService.cycle_index(degree, power_sums, zero_series, one_series)
        Z = zero_series
        power = one_series
        for a in range(degree + 1):
            Z = Z + (power * cycle[degree - a]).scale(Fraction(1, math.factorial(a)))
            power = power * P
        numerator = P * A + TruncSeries.variable(field, order) * Z
        result = numerator * SeriesService.inverse(one_series - P)
        cls._store(key, result)
        return result
