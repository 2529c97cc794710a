"""Serialización de reportes y traducción de errores a códigos de salida."""
import csv
import functools
import io
from enum import Enum
from fractions import Fraction
from typing import Any, Dict, Iterable, List, Optional, Sequence

import click
import mpmath
from flask import current_app

from ..models.asymptotics import AsymptoticsError
from ..models.run_config import (
    EXIT_FAILURE,
    EXIT_INVALID,
    EXIT_RESOURCE,
    RunConfig,
)
from ..models.sampling import SamplingError
from ..models.series import SeriesError
from ..models.tree import ResourceLimitError, TreeError

DEFAULT_DIGITS = 20


def decimal_string(value, digits: int = DEFAULT_DIGITS) -> str:
    """Representación decimal con `digits` cifras significativas explícitas."""
    with mpmath.workdps(digits + 10):
        if isinstance(value, Fraction):
            number = mpmath.mpf(value.numerator) / value.denominator
        else:
            number = mpmath.mpf(value)
        return mpmath.nstr(number, digits)


def jsonable(value: Any) -> Any:
    """Racionales como `p/q`, reales de mpmath como decimales y enums por su valor."""
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, mpmath.mpf):
        return decimal_string(value)
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, bytes):
        return value.decode("ascii")
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return value


def render_json(config: RunConfig, results: Any, **extra) -> str:
    report = {"config": config.to_dict(), "results": results}
    report.update(extra)
    return current_app.json.dumps(jsonable(report), sort_keys=True)


def render_csv(rows: Iterable[Dict[str, Any]], columns: Sequence[str]) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({key: jsonable(row.get(key)) for key in columns})
    return buffer.getvalue().rstrip("\n")


def emit(text: str, output: Optional[str]) -> None:
    """Escribe el reporte en `output` o en la salida estándar."""
    if output:
        with open(output, "w", encoding="utf-8", newline="") as handle:
            handle.write(text + "\n")
        current_app.logger.info("Reporte escrito en %s", output)
    else:
        click.echo(text)


def config_lines(config: RunConfig) -> List[str]:
    """Comentarios de cabecera con la configuración resuelta (para salidas CSV)."""
    return ["# " + current_app.json.dumps(jsonable(config.to_dict()), sort_keys=True)]


def exit_codes(command):
    """Traduce las excepciones de dominio a los códigos de salida documentados."""

    @functools.wraps(command)
    def wrapper(*args, **kwargs):
        try:
            return command(*args, **kwargs)
        except ResourceLimitError as e:
            current_app.logger.warning("Techo de recursos: %s", e)
            click.echo(f"Error: {e}", err=True)
            raise click.exceptions.Exit(EXIT_RESOURCE)
        except (ValueError, TreeError, SamplingError, SeriesError) as e:
            click.echo(f"Error: {e}", err=True)
            raise click.exceptions.Exit(EXIT_INVALID)
        except AsymptoticsError as e:
            current_app.logger.error("Fallo del solucionador: %s", e)
            click.echo(f"Error: {e}", err=True)
            raise click.exceptions.Exit(EXIT_FAILURE)

    return wrapper
