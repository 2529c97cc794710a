from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Tuple

from .series import Scalar
from .tree import DegreeModel


class AsymptoticsError(Exception):
    """Excepción personalizada para errores en el análisis de singularidades."""
    pass


class SolverError(AsymptoticsError):
    """Sin cambio de signo, jacobiano singular o iteración divergente."""
    pass


class StabilityError(AsymptoticsError):
    """Las diferencias finitas o el truncamiento no son estables."""
    pass


class FamilyKind(Enum):
    """Familias de ecuaciones funcionales soportadas."""
    POLYA = "labeled-polya"
    DEGREE = "degree-restricted"
    MARKED = "labeled-with-degree-marks"


@dataclass(frozen=True)
class EquationFamily:
    """
    Familia P(x, t[, u]) definida por

        P = x · [kappa · exp(P + G) + sum_i coef_i · Z_{d_i}(P, p)]

    con p_j = c(j,t) · P(x^j, jt, u^j) y G = sum_{j>=2} p_j / j.
    """
    kind: FamilyKind
    model: Optional[DegreeModel] = None
    marked_degrees: Tuple[int, ...] = ()

    def __post_init__(self):
        if self.kind is FamilyKind.DEGREE and self.model is None:
            raise AsymptoticsError("La familia restringida por grado necesita un modelo")
        if self.kind is FamilyKind.MARKED:
            if not self.marked_degrees:
                raise AsymptoticsError("La familia marcada necesita al menos un grado")
            if len(set(self.marked_degrees)) != len(self.marked_degrees):
                raise AsymptoticsError("Grados marcados repetidos")
            if any(d < 0 for d in self.marked_degrees):
                raise AsymptoticsError("Los grados marcados deben ser no negativos")

    @classmethod
    def polya(cls) -> "EquationFamily":
        return cls(FamilyKind.POLYA)

    @classmethod
    def degree(cls, model: DegreeModel) -> "EquationFamily":
        return cls(FamilyKind.DEGREE, model=model)

    @classmethod
    def marked(cls, degrees) -> "EquationFamily":
        return cls(FamilyKind.MARKED, marked_degrees=tuple(degrees))

    @property
    def exponential(self) -> bool:
        return self.kind is not FamilyKind.DEGREE

    @property
    def key(self) -> tuple:
        if self.kind is FamilyKind.DEGREE:
            return (self.kind.value, self.model.signature)
        return (self.kind.value, self.marked_degrees)

    def nested_limit(self, order: int) -> int:
        """Mayor j tal que P(x^j, jt) influye en los coeficientes hasta `order`."""
        if self.kind is FamilyKind.DEGREE and not self.model.unbounded:
            return min(order - 1, self.model.max_degree)
        return order - 1


@dataclass(frozen=True)
class SingularHint:
    """Intervalo de búsqueda para x0 y cota superior para y0."""
    x_low: float
    x_high: float
    y_high: float = 4.0


@dataclass(frozen=True)
class SingularPoint:
    """Solución del sistema característico y = F(x,y), 1 = F_y(x,y)."""
    x0: Scalar
    y0: Scalar
    F_x: Scalar
    F_xy: Scalar
    F_yy: Scalar
    residual_equation: Scalar
    residual_characteristic: Scalar
    iterations: int


@dataclass(frozen=True)
class AlphaEstimate:
    """Raíz alpha de xi(x) = e^-1."""
    alpha: Scalar
    xi_prime: Scalar
    residual: Scalar
    bisection_steps: int
    newton_steps: int
    bracket: Tuple[float, float]


@dataclass(frozen=True)
class StabilityReport:
    """Valor a resolución base y refinada con su deriva relativa."""
    value: Scalar
    refined: Scalar
    drift: Scalar
    stable: bool


@dataclass(frozen=True)
class LabeledConstants:
    alpha: Scalar
    xi_prime: Scalar
    A: Scalar
    c_l: Scalar
    diagnostics: Dict[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class UnaryBinaryConstants:
    C: Scalar
    delta: Scalar
    x1: Scalar
    x2: Scalar
    K1: Scalar
    K2: Scalar
    diagnostics: Dict[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class CltConstants:
    """Constantes lineales de media y varianza con diagnósticos de diferencias finitas."""
    mu: Scalar
    sigma2: Scalar
    step: float
    mu_report: StabilityReport
    sigma2_report: StabilityReport

    @property
    def stable(self) -> bool:
        return self.mu_report.stable and self.sigma2_report.stable


@dataclass(frozen=True)
class DegreeCltConstants:
    """Medias por grado y matriz de covarianza lineal para los grados marcados."""
    degrees: Tuple[int, ...]
    model: str
    means: Tuple[Scalar, ...]
    covariance: Tuple[Tuple[Scalar, ...], ...]
    step: float
    reports: Dict[str, StabilityReport] = field(default_factory=dict)

    @property
    def stable(self) -> bool:
        return all(report.stable for report in self.reports.values())
