from dataclasses import dataclass
from typing import Tuple

from .series import Scalar


@dataclass(frozen=True)
class Partition:
    """Partición entera en notación de multiplicidades: lambda_m = cantidad de partes iguales a m."""
    multiplicities: Tuple[int, ...]

    @property
    def weight(self) -> int:
        return sum(m * count for m, count in enumerate(self.multiplicities, start=1))

    @property
    def size(self) -> int:
        """Número de partes |lambda|."""
        return sum(self.multiplicities)

    @property
    def parts(self) -> Tuple[int, ...]:
        result = []
        for m in range(len(self.multiplicities), 0, -1):
            result.extend([m] * self.multiplicities[m - 1])
        return tuple(result)

    @classmethod
    def from_parts(cls, parts, weight: int) -> "Partition":
        counts = [0] * weight
        for part in parts:
            counts[part - 1] += 1
        return cls(tuple(counts))


@dataclass(frozen=True)
class CCoeff:
    """Coeficiente c(j, t) de la ecuación funcional de Pólya ponderada."""
    j: int
    t: Scalar
    value: Scalar
