from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional

import numpy as np

from .tree import DegreeModel


class SamplingError(Exception):
    """Excepción personalizada para errores de muestreo."""
    pass


class ModelKind(Enum):
    """Leyes de árboles aleatorios disponibles para el muestreo."""
    LABELED = "labeled"
    CGW = "cgw"
    PLANE = "plane"
    POLYA = "polya"


class IntervalMethod(Enum):
    """Intervalos de confianza para proporciones."""
    WILSON = "wilson"
    NORMAL = "normal"


@dataclass(frozen=True)
class RngSpec:
    """Semilla de 64 bits y flujo (índice de bloque o de trabajador)."""
    seed: int
    stream: int = 0

    MAX_SEED = 2 ** 64

    def __post_init__(self):
        if not 0 <= self.seed < self.MAX_SEED:
            raise SamplingError(f"La semilla debe estar en [0, 2^64) (recibida: {self.seed})")
        if self.stream < 0:
            raise SamplingError(f"El flujo debe ser no negativo (recibido: {self.stream})")

    def generator(self, block: Optional[int] = None) -> np.random.Generator:
        spawn_key = (self.stream,) if block is None else (self.stream, block)
        return np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy=self.seed, spawn_key=spawn_key)))


@dataclass(frozen=True)
class SamplingModel:
    """Ley de muestreo: etiquetado uniforme, GW condicionado, plano uniforme o Pólya uniforme."""
    kind: ModelKind
    degree_model: Optional[DegreeModel] = None

    def __post_init__(self):
        if self.kind is ModelKind.CGW and self.degree_model is None:
            raise SamplingError("El modelo GW condicionado necesita un modelo de grados")

    @classmethod
    def labeled(cls) -> "SamplingModel":
        return cls(ModelKind.LABELED)

    @classmethod
    def plane(cls) -> "SamplingModel":
        return cls(ModelKind.PLANE, DegreeModel.plane())

    @classmethod
    def cgw(cls, model: DegreeModel) -> "SamplingModel":
        return cls(ModelKind.CGW, model)

    @classmethod
    def polya(cls, model: Optional[DegreeModel] = None) -> "SamplingModel":
        return cls(ModelKind.POLYA, model)

    @property
    def name(self) -> str:
        if self.kind is ModelKind.CGW:
            return self.degree_model.name
        if self.kind is ModelKind.POLYA and self.degree_model is not None:
            return f"polya[{self.degree_model.name}]"
        return self.kind.value


@dataclass(frozen=True)
class MCEstimate:
    """Estimación Monte Carlo de una probabilidad con su intervalo de confianza."""
    n: int
    model: str
    estimate: float
    samples: int
    hits: int
    ci_low: float
    ci_high: float
    method: IntervalMethod
    seed: int
    confidence: float = 0.95

    def contains(self, value: float) -> bool:
        return self.ci_low <= value <= self.ci_high


@dataclass(frozen=True)
class LeafStatistics:
    """Hojas de pares etiquetados condicionados a ser isomorfos."""
    n: int
    samples: int
    mean_leaves: float
    variance: float
    exact_mean: float

    @property
    def mean_fraction(self) -> float:
        return self.mean_leaves / self.n


@dataclass(frozen=True)
class GiantBranchProfile:
    """Frecuencias del núcleo que queda al quitar la rama más grande de la raíz."""
    n: int
    model: str
    samples: int
    mean_core_size: float
    core_frequencies: Dict[str, float] = field(default_factory=dict)
