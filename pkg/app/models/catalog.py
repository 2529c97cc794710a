from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import NamedTuple, Tuple, Union

from .tree import CanonicalCode, TreeError


class CatalogMismatchError(TreeError):
    """El archivo de catálogo no corresponde al tamaño o modelo pedido."""
    pass


class ExportFormat(Enum):
    """Formatos de exportación de registros de clases."""
    JSONL = "jsonl"
    CSV = "csv"


class MomentStatistic(Enum):
    """Estadísticas de clase con momentos exactos bajo el Pólya uniforme."""
    LOG_AUT = "log_aut"
    LOG_WEIGHT = "log_weight"
    LEAVES = "leaves"


class ClassEntry(NamedTuple):
    """Clase de isomorfismo sin pesos: lo que depende solo del soporte de grados."""
    code: CanonicalCode
    aut: int
    factorials: int
    profile: Tuple[int, ...]


@dataclass(frozen=True)
class PlaneDecayRow:
    """Fila de la tabla de decaimiento de la probabilidad de isomorfismo de árboles planos."""
    n: int
    q: Fraction
    rate: float
    plane_trees: int


@dataclass(frozen=True)
class ExactMoments:
    """Media y varianza exactas (racionales o reales) de una estadística de clase."""
    n: int
    mean: Union[Fraction, float]
    variance: Union[Fraction, float]
    classes: int
