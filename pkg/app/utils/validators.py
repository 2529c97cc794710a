"""Validadores para los parámetros de la línea de comandos."""
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence

from ..models.tree import DegreeModel, TreeError

MODEL_PRESETS = {
    "plane": DegreeModel.plane,
    "poisson": DegreeModel.poisson,
    "ub": DegreeModel.unary_binary,
    "binary121": DegreeModel.binary121,
    "binary": DegreeModel.binary,
    "ternary": DegreeModel.ternary,
}


def validate_required_field(value: Optional[str], field_name: str) -> str:
    """
    Valida que un campo requerido no esté vacío.

    Args:
        value: Valor a validar
        field_name: Nombre del campo

    Returns:
        str: El valor sin espacios en los extremos

    Raises:
        ValueError: Si el campo está vacío
    """
    if value is None or value.strip() == "":
        raise ValueError(f"El campo {field_name} es requerido")
    return value.strip()


def validate_numeric_input(value_str: Optional[str], field_name: str = "valor", positive: bool = False) -> float:
    """
    Valida que un string sea un número real no negativo (o positivo).

    Raises:
        ValueError: Si el valor no es numérico o tiene el signo equivocado
    """
    value_str = validate_required_field(value_str, field_name)
    try:
        value = float(value_str)
    except ValueError:
        raise ValueError(f"El {field_name} debe ser un número válido")
    if value < 0 or (positive and value == 0):
        raise ValueError(f"El {field_name} debe ser {'positivo' if positive else 'no negativo'}")
    return value


def validate_integer_input(value_str: Optional[str], field_name: str = "valor", minimum: int = 1) -> int:
    """
    Valida que un string sea un entero mayor o igual que `minimum`.

    Args:
        value_str: String a validar
        field_name: Nombre del campo para el mensaje de error
        minimum: Cota inferior permitida

    Returns:
        int: El valor entero

    Raises:
        ValueError: Si el valor no es un entero válido o es menor que la cota
    """
    value_str = validate_required_field(value_str, field_name)
    try:
        value = int(value_str)
    except ValueError:
        raise ValueError(f"El {field_name} debe ser un número entero válido")
    if value < minimum:
        raise ValueError(f"El {field_name} debe ser mayor o igual a {minimum}")
    return value


def validate_rational_input(value_str: Optional[str], field_name: str = "valor") -> Fraction:
    """Literal racional no negativo: `2`, `1/2` o `0.5` (sin redondeo)."""
    value_str = validate_required_field(value_str, field_name)
    try:
        value = Fraction(value_str)
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"El {field_name} debe ser un racional válido (p. ej. 1/2)")
    if value < 0:
        raise ValueError(f"El {field_name} no puede ser negativo")
    return value


def validate_size_range(value_str: Optional[str], field_name: str = "n") -> List[int]:
    """Tamaños como `5`, `3..8` o `3,5,8`; devuelve la lista ordenada sin repetidos."""
    value_str = validate_required_field(value_str, field_name)
    sizes = set()
    for part in value_str.split(","):
        part = part.strip()
        if ".." in part:
            low_str, high_str = part.split("..", 1)
            low = validate_integer_input(low_str, field_name)
            high = validate_integer_input(high_str, field_name)
            if high < low:
                raise ValueError(f"Rango vacío en {field_name}: {part}")
            sizes.update(range(low, high + 1))
        else:
            sizes.add(validate_integer_input(part, field_name))
    return sorted(sizes)


def validate_integer_list(value_str: Optional[str], field_name: str, minimum: int = 0) -> List[int]:
    """Lista separada por comas de enteros >= minimum."""
    value_str = validate_required_field(value_str, field_name)
    return [validate_integer_input(part, field_name, minimum) for part in value_str.split(",")]


def validate_rational_list(value_str: Optional[str], field_name: str) -> List[Fraction]:
    value_str = validate_required_field(value_str, field_name)
    return [validate_rational_input(part, field_name) for part in value_str.split(",")]


def validate_seed(value_str: Optional[str], field_name: str = "seed") -> int:
    """Semilla entera de 64 bits."""
    value = validate_integer_input(value_str, field_name, minimum=0)
    if value >= 2 ** 64:
        raise ValueError(f"La {field_name} debe ser menor que 2^64")
    return value


def validate_choice(value_str: Optional[str], choices: Iterable[str], field_name: str) -> str:
    value = validate_required_field(value_str, field_name).lower()
    choices = list(choices)
    if value not in choices:
        raise ValueError(f"El {field_name} debe ser uno de: {', '.join(choices)} (recibido: {value})")
    return value


def validate_degree_model(
    name: Optional[str],
    degrees: Optional[str] = None,
    weights: Optional[str] = None,
) -> DegreeModel:
    """
    Modelo de grados a partir de un preset (`ub`, `binary121`, ...) o de `--D 0,1,2 --w 1,1,1`.

    Raises:
        ValueError: Si el preset no existe o las listas son incompatibles
    """
    try:
        if degrees is not None or weights is not None:
            degree_list = validate_integer_list(degrees, "D")
            weight_list = validate_rational_list(weights, "w") if weights is not None else [1] * len(degree_list)
            custom = None if name in (None, "", "custom") else name
            return DegreeModel.from_lists(degree_list, weight_list, custom)
        key = validate_choice(name, MODEL_PRESETS, "modelo")
        return MODEL_PRESETS[key]()
    except TreeError as e:
        raise ValueError(str(e))


def validate_marks(value_str: Optional[str], degrees: Sequence[int]) -> List[Fraction]:
    """Una marca u por grado marcado; por defecto todas valen 1."""
    if value_str is None or value_str.strip() == "":
        return [Fraction(1)] * len(degrees)
    marks = validate_rational_list(value_str, "u")
    if len(marks) != len(degrees):
        raise ValueError(f"Se esperaban {len(degrees)} marcas u (recibidas: {len(marks)})")
    return marks
