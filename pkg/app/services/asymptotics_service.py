import logging
import math
from typing import Callable, Dict, Optional, Sequence, Tuple

import mpmath

from ..models.asymptotics import (
    AlphaEstimate,
    AsymptoticsError,
    CltConstants,
    DegreeCltConstants,
    EquationFamily,
    LabeledConstants,
    SingularHint,
    StabilityError,
    StabilityReport,
    UnaryBinaryConstants,
)
from ..models.series import Scalar, ScalarField
from ..models.tree import DegreeModel
from .equation_service import EquationService
from .partition_service import PartitionService
from .series_service import SeriesService
from .singular_service import CharacteristicMap, SingularService

logger = logging.getLogger(__name__)


class AsymptoticsService:
    """Servicio de constantes asintóticas y de TCL a partir de las ecuaciones funcionales."""

    DEFAULT_ORDER = EquationService.DEFAULT_ORDER
    DEFAULT_NESTED_DEGREE = EquationService.NESTED_DEGREE
    DEFAULT_PRECISION_BITS = 192
    DEFAULT_STEP = 1e-3
    STABILITY_DRIFT = 1e-3
    TRUNCATION_DRIFT = 1e-6

    # Cotas rho_P ~ 0.3383 y 1/(rho_P e^2) ~ 0.400; solo extremos de búsqueda
    ALPHA_BRACKET = (0.338, 0.400)
    AUT_BRACKET = (0.30, 0.40)
    UB_HINTS = {1: SingularHint(0.25, 0.45), 2: SingularHint(0.20, 0.35)}
    DEGREE_HINT = SingularHint(0.25, 0.50)
    MARK_HALF_WIDTH = 0.03
    MARK_DIFFERENCE_DIGITS = 12

    @staticmethod
    def _field(precision_bits: int) -> ScalarField:
        return ScalarField.real(precision_bits)

    @staticmethod
    def report(value: Scalar, refined: Scalar, threshold: float) -> StabilityReport:
        scale = max(abs(refined), mpmath.mpf(10) ** -30)
        drift = abs(refined - value) / scale
        return StabilityReport(value=value, refined=refined, drift=drift, stable=bool(drift < threshold))

    @classmethod
    def truncation_stability(cls, compute: Callable[[int], Scalar], order: int) -> StabilityReport:
        """Compara el valor a orden N con el valor a orden 2N."""
        return cls.truncation_reports(lambda N: {"value": compute(N)}, order)["value"]

    @classmethod
    def truncation_reports(
        cls,
        compute: Callable[[int], Dict[str, Scalar]],
        order: int,
        base: Optional[Dict[str, Scalar]] = None,
    ) -> Dict[str, StabilityReport]:
        """
        Reporte de deriva por constante entre los órdenes N y 2N.

        Args:
            compute: Devuelve las constantes con nombre para un orden dado
            order: Orden base N
            base: Valores ya calculados a orden N
        """
        if base is None:
            base = compute(order)
        doubled = compute(2 * order)
        reports = {name: cls.report(base[name], doubled[name], cls.TRUNCATION_DRIFT) for name in base}
        for name, report in reports.items():
            if not report.stable:
                logger.warning("Constante %s inestable al duplicar el orden: deriva %s", name,
                               mpmath.nstr(report.drift, 5))
        return reports

    @classmethod
    def estimate_alpha(
        cls,
        order: int = DEFAULT_ORDER,
        nested_degree: int = DEFAULT_NESTED_DEGREE,
        precision_bits: int = DEFAULT_PRECISION_BITS,
        bracket: Tuple[float, float] = ALPHA_BRACKET,
        t=2,
    ) -> AlphaEstimate:
        """
        Raíz de xi(x) = e^-1 en el intervalo dado.

        Raises:
            SolverError: Si xi(x) - e^-1 no cambia de signo (truncamiento insuficiente)
        """
        cmap = CharacteristicMap(
            EquationFamily.polya(), t, x_degree=order, nested_degree=nested_degree,
            field=cls._field(precision_bits),
        )
        return SingularService.solve_exponential_singularity(cmap, bracket)

    @classmethod
    def labeled_constants(
        cls,
        order: int = DEFAULT_ORDER,
        nested_degree: int = DEFAULT_NESTED_DEGREE,
        precision_bits: int = DEFAULT_PRECISION_BITS,
        bracket: Tuple[float, float] = ALPHA_BRACKET,
    ) -> LabeledConstants:
        """A = sqrt(2·pi·e·alpha·xi'(alpha)) y c_l = 1/(e^2·alpha)."""
        estimate = cls.estimate_alpha(order, nested_degree, precision_bits, bracket)
        field = cls._field(precision_bits)
        with field.context():
            alpha = estimate.alpha
            A = mpmath.sqrt(2 * mpmath.pi * mpmath.e * alpha * estimate.xi_prime)
            c_l = 1 / (mpmath.e ** 2 * alpha)
            xi = EquationService.xi_series(order, 2, field)
            series_slope = SeriesService.evaluate(SeriesService.derivative(xi), alpha)
            slope_gap = abs(series_slope - estimate.xi_prime)
        logger.info("alpha=%s A=%s c_l=%s", mpmath.nstr(alpha, 12), mpmath.nstr(A, 10), mpmath.nstr(c_l, 10))
        return LabeledConstants(
            alpha=alpha,
            xi_prime=estimate.xi_prime,
            A=A,
            c_l=c_l,
            diagnostics={
                "residual": estimate.residual,
                "bisection_steps": estimate.bisection_steps,
                "newton_steps": estimate.newton_steps,
                "xi_prime_series_gap": slope_gap,
                "order": order,
                "nested_degree": nested_degree,
            },
        )

    @staticmethod
    def coefficient_constant(point) -> Scalar:
        """K = sqrt(x0·F_x / (2·pi·F_yy)): [x^n]y ~ K x0^-n n^-3/2."""
        return mpmath.sqrt(point.x0 * point.F_x / (2 * mpmath.pi * point.F_yy))

    @classmethod
    def unary_binary_constants(
        cls,
        order: int = DEFAULT_ORDER,
        nested_degree: int = DEFAULT_NESTED_DEGREE,
        precision_bits: int = DEFAULT_PRECISION_BITS,
    ) -> UnaryBinaryConstants:
        """g_n ~ C n^{3/2} delta^n con delta = x1^2/x2 y C = K2/K1^2."""
        field = cls._field(precision_bits)
        family = EquationFamily.degree(DegreeModel.unary_binary())
        points = {}
        for t, hint in cls.UB_HINTS.items():
            cmap = CharacteristicMap(family, t, x_degree=order, nested_degree=nested_degree, field=field)
            points[t] = SingularService.solve_singular_system(cmap, hint)
        with field.context():
            K1 = cls.coefficient_constant(points[1])
            K2 = cls.coefficient_constant(points[2])
            x1 = points[1].x0
            x2 = points[2].x0
            C = K2 / K1 ** 2
            delta = x1 ** 2 / x2
        logger.info("Unario-binario: C=%s delta=%s", mpmath.nstr(C, 10), mpmath.nstr(delta, 10))
        return UnaryBinaryConstants(
            C=C, delta=delta, x1=x1, x2=x2, K1=K1, K2=K2,
            diagnostics={
                "y1": points[1].y0,
                "y2": points[2].y0,
                "residual": max(points[t].residual_equation for t in points),
                "newton_steps": max(points[t].iterations for t in points),
            },
        )

    @classmethod
    def degree_mean(
        cls,
        degree: int,
        t=2,
        order: int = DEFAULT_ORDER,
        nested_degree: int = DEFAULT_NESTED_DEGREE,
        precision_bits: int = DEFAULT_PRECISION_BITS,
    ) -> Scalar:
        """
        mu_d = (A_d(alpha) + alpha · Z_d(1, p(alpha))) / (alpha · e · xi'(alpha)),
        con A_d(x) = sum_{j>=2} c(j,t) M_d(x^j, jt).
        """
        field = cls._field(precision_bits)
        bracket = cls.ALPHA_BRACKET if t == 2 else (0.30, 0.40)
        cmap = CharacteristicMap(
            EquationFamily.polya(), t, x_degree=order, nested_degree=nested_degree, field=field
        )
        estimate = SingularService.solve_exponential_singularity(cmap, bracket)
        alpha = estimate.alpha
        t_value = cmap.t
        with field.context():
            power_sums = {}
            A = field.zero()
            for j, c, Q in cmap.nested:
                point = alpha ** j
                power_sums[j] = c * SeriesService.evaluate(Q, point)
                derivative = EquationService.marked_derivative_series(j * t_value, degree, Q.order, field)
                A += c * SeriesService.evaluate(derivative, point)
            cycle = PartitionService.cycle_index(degree, power_sums, field.zero(), field.one())
            Z = sum((cycle[degree - a] / math.factorial(a) for a in range(degree + 1)), field.zero())
            return (A + alpha * Z) / (alpha * mpmath.e * estimate.xi_prime)

    @classmethod
    def labeled_degree_mean(cls, degree: int) -> Scalar:
        """Árboles etiquetados ordinarios: mu_d = e^-1 / d!."""
        return mpmath.exp(-1) / math.factorial(degree)

    @classmethod
    def leaf_mean_constant(
        cls,
        order: int = DEFAULT_ORDER,
        nested_degree: int = DEFAULT_NESTED_DEGREE,
        precision_bits: int = DEFAULT_PRECISION_BITS,
    ) -> Scalar:
        """
        Fracción media de hojas en pares etiquetados condicionados a ser isomorfos:
        mu = F_u / (x0 · F_x) en el punto singular de la familia con hojas marcadas, u = 1.

        F_u se obtiene por diferencias centrales en la marca, sin pasar por la serie M_0
        que usa degree_mean.
        """
        field = cls._field(precision_bits)
        family = EquationFamily.marked((0,))
        hint = SingularHint(*cls.ALPHA_BRACKET)
        point = SingularService.solve_singular_system(
            CharacteristicMap(family, 2, (1,), x_degree=order, nested_degree=nested_degree, field=field), hint
        )
        with field.context():
            h = mpmath.mpf(10) ** -cls.MARK_DIFFERENCE_DIGITS
            values = {}
            for k in (-2, -1, 1, 2):
                cmap = CharacteristicMap(family, 2, (1 + k * h,), x_degree=order,
                                         nested_degree=nested_degree, field=field)
                values[k] = cmap.evaluate(point.x0, point.y0).F
            F_u = cls.first_difference(values, h)
            return F_u / (point.x0 * point.F_x)

    @staticmethod
    def first_difference(values: Dict[int, Scalar], h) -> Scalar:
        return (values[-2] - 8 * values[-1] + 8 * values[1] - values[2]) / (12 * h)

    @staticmethod
    def second_difference(values: Dict[int, Scalar], h) -> Scalar:
        return (-values[-2] + 16 * values[-1] - 30 * values[0] + 16 * values[1] - values[2]) / (12 * h * h)

    @classmethod
    def _stencil_constants(
        cls,
        evaluate: Callable[[Scalar], Scalar],
        step: float,
        field: ScalarField,
        mean_sign: int,
    ) -> CltConstants:
        """mu = mean_sign · f'(0), sigma2 = -f''(0) con plantilla de 5 puntos y Richardson."""
        with field.context():
            h = field.coerce(step)
            cache: Dict[Scalar, Scalar] = {}

            def f(s):
                if s not in cache:
                    cache[s] = evaluate(s)
                return cache[s]

            estimates = {}
            for scale in (1, 2):
                width = h / scale
                values = {k: f(k * width) for k in (-2, -1, 0, 1, 2)}
                estimates[scale] = (
                    cls.first_difference(values, width),
                    cls.second_difference(values, width),
                )
            slope = (16 * estimates[2][0] - estimates[1][0]) / 15
            curvature = (16 * estimates[2][1] - estimates[1][1]) / 15
            mu_report = cls.report(mean_sign * estimates[1][0], mean_sign * estimates[2][0], cls.STABILITY_DRIFT)
            sigma_report = cls.report(-estimates[1][1], -estimates[2][1], cls.STABILITY_DRIFT)
            mu = mean_sign * slope
            sigma2 = -curvature
        if sigma2 < 0:
            raise StabilityError(f"Varianza negativa por diferencias finitas: {mpmath.nstr(sigma2, 8)}")
        for name, report in (("mu", mu_report), ("sigma2", sigma_report)):
            if not report.stable:
                logger.warning("Diferencia finita inestable para %s: deriva %s", name, mpmath.nstr(report.drift, 5))
        return CltConstants(mu=mu, sigma2=sigma2, step=float(step), mu_report=mu_report, sigma2_report=sigma_report)

    @classmethod
    def logweight_clt_constants(
        cls,
        model: DegreeModel,
        step: float = DEFAULT_STEP,
        order: int = DEFAULT_ORDER,
        nested_degree: int = DEFAULT_NESTED_DEGREE,
        precision_bits: int = DEFAULT_PRECISION_BITS,
        hint: SingularHint = DEGREE_HINT,
    ) -> CltConstants:
        """
        log W del árbol de Pólya uniforme con grados en D: mu = -(log x0)'(0),
        sigma2 = -(log x0)''(0), con x0(t) la singularidad de P_D(x,t).

        Raises:
            AsymptoticsError: Si el modelo no tiene grado máximo finito
        """
        if model.unbounded:
            raise AsymptoticsError("El TCL de log W requiere un conjunto D finito")
        field = cls._field(precision_bits)
        family = EquationFamily.degree(model)

        def log_x0(t):
            cmap = CharacteristicMap(family, t, x_degree=order, nested_degree=nested_degree, field=field)
            return mpmath.log(SingularService.solve_singular_system(cmap, hint).x0)

        constants = cls._stencil_constants(log_x0, step, field, mean_sign=-1)
        logger.info("log W (%s): mu=%s sigma2=%s", model.name,
                    mpmath.nstr(constants.mu, 10), mpmath.nstr(constants.sigma2, 10))
        return constants

    @classmethod
    def aut_clt_constants(
        cls,
        step: float = DEFAULT_STEP,
        order: int = DEFAULT_ORDER,
        nested_degree: int = DEFAULT_NESTED_DEGREE,
        precision_bits: int = DEFAULT_PRECISION_BITS,
        bracket: Tuple[float, float] = AUT_BRACKET,
    ) -> CltConstants:
        """log|Aut| del árbol de Pólya uniforme: P(alpha(t), t) = 1, mu = (log alpha)'(0)."""
        field = cls._field(precision_bits)
        family = EquationFamily.polya()

        def log_alpha(t):
            cmap = CharacteristicMap(family, t, x_degree=order, nested_degree=nested_degree, field=field)
            return mpmath.log(SingularService.solve_exponential_singularity(cmap, bracket).alpha)

        constants = cls._stencil_constants(log_alpha, step, field, mean_sign=1)
        logger.info("log|Aut|: mu=%s sigma2=%s", mpmath.nstr(constants.mu, 10), mpmath.nstr(constants.sigma2, 10))
        return constants

    @staticmethod
    def labelings_mean(n: int, mu) -> float:
        """E[log L(P_n)] ~ n log n - (mu + 1) n + (log n)/2."""
        if n < 1:
            raise AsymptoticsError(f"n debe ser positivo (recibido: {n})")
        mu = float(mu)
        return n * math.log(n) - (mu + 1) * n + math.log(n) / 2

    @classmethod
    def degree_clt_constants(
        cls,
        degrees: Sequence[int],
        model: str = "iso-labeled",
        step: float = DEFAULT_STEP,
        order: int = DEFAULT_ORDER,
        nested_degree: int = DEFAULT_NESTED_DEGREE,
        precision_bits: int = DEFAULT_PRECISION_BITS,
    ) -> DegreeCltConstants:
        """
        Medias por la fórmula explícita y covarianzas Sigma_ij = -d^2 log x0(e^s) / ds_i ds_j
        por diferencias finitas sobre la familia marcada.

        Raises:
            AsymptoticsError: Si el modelo no es "iso-labeled" ni "labeled"
        """
        degrees = tuple(degrees)
        if not degrees or len(set(degrees)) != len(degrees) or any(d < 0 for d in degrees):
            raise AsymptoticsError(f"Lista de grados inválida: {degrees}")
        if model == "iso-labeled":
            t = 2
        elif model == "labeled":
            t = 1
        else:
            raise AsymptoticsError(f"Modelo desconocido para el TCL de grados: {model}")

        field = cls._field(precision_bits)
        if t == 1:
            means = tuple(cls.labeled_degree_mean(d) for d in degrees)
        else:
            means = tuple(cls.degree_mean(d, t, order, nested_degree, precision_bits) for d in degrees)

        family = EquationFamily.marked(degrees)
        center = cls.estimate_alpha(order, nested_degree, precision_bits, t=t,
                                    bracket=cls.ALPHA_BRACKET if t == 2 else (0.30, 0.40)).alpha
        cache: Dict[Tuple, Scalar] = {}

        def log_x0(shifts: Tuple) -> Scalar:
            if shifts in cache:
                return cache[shifts]
            with field.context():
                marks = tuple(mpmath.exp(s) for s in shifts)
                hint = SingularHint(float(center) - cls.MARK_HALF_WIDTH, float(center) + cls.MARK_HALF_WIDTH)
            cmap = CharacteristicMap(family, t, marks, x_degree=order, nested_degree=nested_degree, field=field)
            with field.context():
                value = mpmath.log(SingularService.solve_singular_system(cmap, hint).x0)
            cache[shifts] = value
            return value

        k = len(degrees)
        zero = field.zero()
        reports: Dict[str, StabilityReport] = {}
        covariance = [[zero] * k for _ in range(k)]
        with field.context():
            h = field.coerce(step)

            def shifted(index_values: Dict[int, Scalar]) -> Tuple:
                return tuple(index_values.get(i, zero) for i in range(k))

            for i in range(k):
                estimates = {}
                slopes = {}
                for scale in (1, 2):
                    width = h / scale
                    values = {m: log_x0(shifted({i: m * width})) for m in (-2, -1, 0, 1, 2)}
                    estimates[scale] = cls.second_difference(values, width)
                    slopes[scale] = cls.first_difference(values, width)
                covariance[i][i] = -(16 * estimates[2] - estimates[1]) / 15
                reports[f"var_{degrees[i]}"] = cls.report(-estimates[1], -estimates[2], cls.STABILITY_DRIFT)
                reports[f"mean_{degrees[i]}"] = cls.report(means[i], -(16 * slopes[2] - slopes[1]) / 15,
                                                           cls.STABILITY_DRIFT)
                if covariance[i][i] < 0:
                    raise StabilityError(f"Varianza negativa para el grado {degrees[i]}")

            for i in range(k):
                for j in range(i + 1, k):
                    estimates = {}
                    for scale in (1, 2):
                        width = h / scale
                        corners = [
                            log_x0(shifted({i: a * width, j: b * width}))
                            for a, b in ((1, 1), (1, -1), (-1, 1), (-1, -1))
                        ]
                        estimates[scale] = (corners[0] - corners[1] - corners[2] + corners[3]) / (4 * width * width)
                    value = -(4 * estimates[2] - estimates[1]) / 3
                    covariance[i][j] = covariance[j][i] = value
                    reports[f"cov_{degrees[i]}_{degrees[j]}"] = cls.report(
                        -estimates[1], -estimates[2], cls.STABILITY_DRIFT
                    )

        for name, report in reports.items():
            if not report.stable:
                logger.warning("Diagnóstico inestable %s: deriva %s", name, mpmath.nstr(report.drift, 5))
        return DegreeCltConstants(
            degrees=degrees,
            model=model,
            means=means,
            covariance=tuple(tuple(row) for row in covariance),
            step=float(step),
            reports=reports,
        )

    @staticmethod
    def predict_labeled(n: int, constants: LabeledConstants) -> float:
        """Predicción de orden principal p_n ~ A n^{3/2} c_l^n."""
        return float(constants.A) * n ** 1.5 * float(constants.c_l) ** n

    @staticmethod
    def predict_unary_binary(n: int, constants: UnaryBinaryConstants) -> float:
        """Predicción de orden principal g_n ~ C n^{3/2} delta^n."""
        return float(constants.C) * n ** 1.5 * float(constants.delta) ** n
