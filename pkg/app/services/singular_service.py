import logging
import math
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import mpmath

from ..models.asymptotics import (
    AlphaEstimate,
    EquationFamily,
    SingularHint,
    SingularPoint,
    SolverError,
)
from ..models.series import Scalar, ScalarField
from .equation_service import EquationService
from .partition_service import PartitionService
from .series_service import SeriesService

logger = logging.getLogger(__name__)


class _Slice(NamedTuple):
    """Coeficientes en y de F(x, .) y sus derivadas en x, para un x fijo."""
    B: List[Scalar]
    dB: List[Scalar]
    E: Scalar
    dE: Scalar


class CharacteristicValues(NamedTuple):
    F: Scalar
    F_x: Scalar
    F_y: Scalar
    F_xy: Scalar
    F_yy: Scalar


class CharacteristicMap:
    """
    F(x, y) = sum_a y^a B_a(x) + kappa · x · E(x) · e^y, con los términos anidados
    P(x^j, jt, u^j) sustituidos por polinomios truncados.
    """

    def __init__(
        self,
        family: EquationFamily,
        t,
        marks: Sequence = (),
        x_degree: int = EquationService.DEFAULT_ORDER,
        nested_degree: int = EquationService.NESTED_DEGREE,
        field: Optional[ScalarField] = None,
    ):
        field = field or ScalarField.real(PartitionService.DEFAULT_REAL_BITS)
        t, field = EquationService.resolve_parameters(t, field)
        self.family = family
        self.t = t
        self.field = field
        self.marks = tuple(field.coerce(u) for u in marks)
        self.kappa, self.terms = EquationService.family_terms(family, t, self.marks, field, x_degree + 1)
        self.a_max = max((d for d, _ in self.terms), default=0)
        self.nested = EquationService.nested_polynomials(
            family, t, x_degree, self.marks, nested_degree, field
        )
        self._slices: Dict[Scalar, _Slice] = {}

    def slice_at(self, x) -> _Slice:
        field = self.field
        x = field.coerce(x)
        cached = self._slices.get(x)
        if cached is not None:
            return cached
        with field.context():
            power_sums = {}
            for j, c, Q in self.nested:
                value, slope = SeriesService.evaluate_with_derivative(Q, x ** j)
                power_sums[j] = (c * value, c * j * x ** (j - 1) * slope)
            cycle = PartitionService.cycle_index_with_derivative(self.a_max, power_sums, field)
            B, dB = [], []
            for a in range(self.a_max + 1):
                b = field.zero()
                db = field.zero()
                for d, coef in self.terms:
                    if d >= a:
                        b += coef * cycle[d - a][0]
                        db += coef * cycle[d - a][1]
                b /= math.factorial(a)
                db /= math.factorial(a)
                B.append(x * b)
                dB.append(b + x * db)
            E = field.zero()
            dE = field.zero()
            if self.kappa != 0:
                G = field.zero()
                dG = field.zero()
                for j, (p, dp) in power_sums.items():
                    G += p / j
                    dG += dp / j
                E = mpmath.exp(G)
                dE = E * dG
        result = _Slice(B, dB, E, dE)
        if len(self._slices) > 256:
            self._slices.clear()
        self._slices[x] = result
        return result

    def evaluate(self, x, y) -> CharacteristicValues:
        field = self.field
        s = self.slice_at(x)
        x = field.coerce(x)
        y = field.coerce(y)
        with field.context():
            F = F_x = F_y = F_xy = F_yy = field.zero()
            power = field.one()
            powers = [power]
            for _ in range(self.a_max):
                power = power * y
                powers.append(power)
            for a in range(self.a_max + 1):
                F += powers[a] * s.B[a]
                F_x += powers[a] * s.dB[a]
                if a >= 1:
                    F_y += a * powers[a - 1] * s.B[a]
                    F_xy += a * powers[a - 1] * s.dB[a]
                if a >= 2:
                    F_yy += a * (a - 1) * powers[a - 2] * s.B[a]
            if self.kappa != 0:
                ey = mpmath.exp(y)
                exp_part = self.kappa * x * s.E * ey
                exp_slope = self.kappa * (s.E + x * s.dE) * ey
                F += exp_part
                F_y += exp_part
                F_yy += exp_part
                F_x += exp_slope
                F_xy += exp_slope
        return CharacteristicValues(F, F_x, F_y, F_xy, F_yy)

    def xi(self, x) -> Tuple[Scalar, Scalar]:
        """xi(x) = x · E(x) y su derivada (solo familias de tipo exponencial)."""
        s = self.slice_at(x)
        x = self.field.coerce(x)
        with self.field.context():
            return x * s.E, s.E + x * s.dE


class SingularService:
    """Servicio para localizar la singularidad dominante de ecuaciones implícitas."""

    TOLERANCE_DIGITS = 20
    MAX_NEWTON_STEPS = 60
    X_BISECTION_STEPS = 48
    Y_BISECTION_STEPS = 60
    NON_DEGENERACY_MARGIN = 1e-6

    @classmethod
    def tolerance(cls, field: ScalarField) -> Scalar:
        """10^-20, o lo que permita la precisión de trabajo si es menor."""
        with field.context():
            floor = mpmath.mpf(2) ** (-(field.precision_bits - 16))
            return max(mpmath.mpf(10) ** (-cls.TOLERANCE_DIGITS), floor)

    @classmethod
    def _tangent_y(cls, cmap: CharacteristicMap, x, y_high) -> Scalar:
        """y con F_y(x, y) = 1; F_y crece en y."""
        field = cmap.field
        with field.context():
            low = field.zero()
            high = field.coerce(y_high)
            if cmap.evaluate(x, low).F_y >= 1:
                return low
            if cmap.evaluate(x, high).F_y < 1:
                raise SolverError(
                    f"F_y(x, y) < 1 en todo [0, {y_high}] para x = {mpmath.nstr(x, 10)}: cota de y insuficiente"
                )
            for _ in range(cls.Y_BISECTION_STEPS):
                middle = (low + high) / 2
                if cmap.evaluate(x, middle).F_y < 1:
                    low = middle
                else:
                    high = middle
            return (low + high) / 2

    @classmethod
    def _gap(cls, cmap: CharacteristicMap, x, y_high) -> Tuple[Scalar, Scalar]:
        """min_y F(x,y) - y: negativo antes de la singularidad y positivo después."""
        y = cls._tangent_y(cmap, x, y_high)
        with cmap.field.context():
            return cmap.evaluate(x, y).F - y, y

    @classmethod
    def solve_singular_system(cls, cmap: CharacteristicMap, hint: SingularHint) -> SingularPoint:
        """
        Resuelve y = F(x,y), 1 = F_y(x,y) por bisección sobre el mínimo de F - y y
        pulido de Newton sobre el sistema 2x2 con jacobiano exacto.

        Raises:
            SolverError: Sin cambio de signo, jacobiano singular o divergencia
        """
        field = cmap.field
        tol = cls.tolerance(field)
        with field.context():
            low = field.coerce(hint.x_low)
            high = field.coerce(hint.x_high)
            gap_low, y = cls._gap(cmap, low, hint.y_high)
            gap_high, _ = cls._gap(cmap, high, hint.y_high)
            if not (gap_low < 0 < gap_high):
                raise SolverError(
                    f"Sin cambio de signo en [{hint.x_low}, {hint.x_high}]: "
                    f"({mpmath.nstr(gap_low, 8)}, {mpmath.nstr(gap_high, 8)})"
                )
            for _ in range(cls.X_BISECTION_STEPS):
                middle = (low + high) / 2
                gap, y_middle = cls._gap(cmap, middle, hint.y_high)
                if gap < 0:
                    low, y = middle, y_middle
                else:
                    high = middle
            x = (low + high) / 2
            y = cls._tangent_y(cmap, x, hint.y_high)

            for step in range(1, cls.MAX_NEWTON_STEPS + 1):
                v = cmap.evaluate(x, y)
                r1 = y - v.F
                r2 = 1 - v.F_y
                if max(abs(r1), abs(r2)) < tol:
                    break
                det = v.F_x * v.F_yy + (1 - v.F_y) * v.F_xy
                if abs(det) < tol:
                    raise SolverError(f"Jacobiano singular en x = {mpmath.nstr(x, 12)}")
                dx = (r1 * v.F_yy + (1 - v.F_y) * r2) / det
                dy = (v.F_x * r2 - v.F_xy * r1) / det
                x += dx
                y += dy
                logger.debug("Newton %d: x=%s y=%s |r|=%s", step, mpmath.nstr(x, 20), mpmath.nstr(y, 20),
                             mpmath.nstr(max(abs(r1), abs(r2)), 5))
            else:
                raise SolverError(f"Newton no convergió en {cls.MAX_NEWTON_STEPS} pasos")

            v = cmap.evaluate(x, y)
            if abs(v.F_x) <= cls.NON_DEGENERACY_MARGIN or abs(v.F_yy) <= cls.NON_DEGENERACY_MARGIN:
                raise SolverError("Punto singular degenerado: F_x o F_yy demasiado cercanos a cero")
            point = SingularPoint(
                x0=x, y0=y, F_x=v.F_x, F_xy=v.F_xy, F_yy=v.F_yy,
                residual_equation=abs(y - v.F),
                residual_characteristic=abs(1 - v.F_y),
                iterations=step,
            )
        logger.info("Punto singular: x0=%s y0=%s", mpmath.nstr(point.x0, 15), mpmath.nstr(point.y0, 15))
        return point

    @classmethod
    def solve_exponential_singularity(
        cls,
        cmap: CharacteristicMap,
        bracket: Tuple[float, float],
    ) -> AlphaEstimate:
        """
        Para y = x·exp(y + G(x)) la condición F_y = 1 da y0 = 1: se resuelve
        xi(alpha) = e^-1 por bisección y pulido de Newton.

        Raises:
            SolverError: Si no hay cambio de signo en el intervalo
        """
        field = cmap.field
        tol = cls.tolerance(field)
        with field.context():
            target = mpmath.exp(-1)
            low = field.coerce(bracket[0])
            high = field.coerce(bracket[1])
            f_low = cmap.xi(low)[0] - target
            f_high = cmap.xi(high)[0] - target
            if not (f_low < 0 < f_high):
                raise SolverError(
                    f"xi(x) - e^-1 no cambia de signo en [{bracket[0]}, {bracket[1]}]; "
                    "¿orden de truncamiento demasiado bajo?"
                )
            bisection_steps = 0
            while high - low > mpmath.mpf(10) ** -12:
                middle = (low + high) / 2
                if cmap.xi(middle)[0] < target:
                    low = middle
                else:
                    high = middle
                bisection_steps += 1
            alpha = (low + high) / 2
            newton_steps = 0
            for newton_steps in range(1, cls.MAX_NEWTON_STEPS + 1):
                value, slope = cmap.xi(alpha)
                residual = value - target
                if abs(residual) < tol:
                    break
                alpha -= residual / slope
            else:
                raise SolverError("Newton no convergió para xi(alpha) = e^-1")
            value, slope = cmap.xi(alpha)
        logger.debug("alpha=%s tras %d bisecciones y %d pasos de Newton",
                     mpmath.nstr(alpha, 20), bisection_steps, newton_steps)
        return AlphaEstimate(
            alpha=alpha,
            xi_prime=slope,
            residual=abs(value - target),
            bisection_steps=bisection_steps,
            newton_steps=newton_steps,
            bracket=(float(bracket[0]), float(bracket[1])),
        )
