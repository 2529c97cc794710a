from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Any, Dict, Optional, Tuple

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_TOLERANCE = 2
EXIT_RESOURCE = 3
EXIT_INVALID = 4


class OutputFormat(Enum):
    """Formatos de salida de los comandos."""
    JSON = "json"
    CSV = "csv"


@dataclass(frozen=True)
class RunConfig:
    """Configuración completamente resuelta de una ejecución (valores por defecto incluidos)."""
    command: str
    model: Optional[str] = None
    sizes: Tuple[int, ...] = ()
    order: Optional[int] = None
    precision_bits: Optional[int] = None
    seed: Optional[int] = None
    workers: Optional[int] = None
    output_format: OutputFormat = OutputFormat.JSON
    output: Optional[str] = None
    options: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data["sizes"] = list(self.sizes)
        data["output_format"] = self.output_format.value
        return data
