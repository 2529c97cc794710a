from fractions import Fraction

import click
from flask import Blueprint, current_app

from ..models.asymptotics import EquationFamily
from ..models.run_config import EXIT_TOLERANCE, OutputFormat, RunConfig
from ..models.series import ScalarField
from ..services.enumeration_service import EnumerationService
from ..services.equation_service import EquationService
from ..utils.reporting import config_lines, decimal_string, emit, exit_codes, render_csv, render_json
from ..utils.validators import (
    validate_choice,
    validate_integer_input,
    validate_integer_list,
    validate_marks,
    validate_rational_input,
)
from . import enumeration_ceiling, resolve_model

bp = Blueprint('series', __name__, cli_group=None)

COLUMNS = ["n", "coefficient", "decimal", "oracle", "matches"]


@bp.cli.command('series')
@click.option('--family', default='polya', help='polya, marked, o un modelo de grados (ub, binary121, ..., custom).')
@click.option('--D', 'degrees', default=None, help='Grados permitidos del modelo custom.')
@click.option('--w', 'weights', default=None, help='Pesos racionales del modelo custom.')
@click.option('--t', 't_str', default='2', help='Exponente t (racional; no entero implica aritmética real).')
@click.option('--order', default=None, help='Orden de truncamiento N.')
@click.option('--mark-degrees', default=None, help='Grados marcados de la familia marked, p. ej. 0.')
@click.option('--u', 'marks', default=None, help='Valores de las marcas (uno por grado marcado).')
@click.option('--precision-bits', default=None, help='Precisión real en bits.')
@click.option('--check/--no-check', default=True, help='Compara con la enumeración exacta.')
@click.option('--check-limit', default='12', help='Mayor n comparado con la enumeración.')
@click.option('--digits', default='20', help='Cifras de la representación decimal.')
@click.option('--format', 'fmt', default='json', help='json o csv.')
@click.option('--output', default=None, help='Archivo de salida (por defecto, stdout).')
@exit_codes
def series(family, degrees, weights, t_str, order, mark_degrees, marks, precision_bits, check, check_limit, digits,
           fmt, output):
    """Coeficientes de la ecuación funcional truncada a orden N."""
    cfg = current_app.config
    t = validate_rational_input(t_str, "t")
    integral = t.denominator == 1
    t_value = int(t) if integral else t
    order = validate_integer_input(order, "orden") if order is not None else cfg["SERIES_ORDER"]
    bits = validate_integer_input(precision_bits, "precisión") if precision_bits is not None else cfg["REAL_PRECISION_BITS"]
    digits = validate_integer_input(digits, "número de cifras")
    check_limit = validate_integer_input(check_limit, "límite de comprobación")
    output_format = OutputFormat(validate_choice(fmt, ["json", "csv"], "formato"))
    field = ScalarField.rational() if integral else ScalarField.real(bits)

    family_name = family.strip().lower()
    model = None
    mark_list, mark_values = [], []
    if family_name == "polya":
        result = EquationService.solve_polya_series(t_value, order, field)
    elif family_name == "marked":
        mark_list = validate_integer_list(mark_degrees, "grados marcados")
        mark_values = validate_marks(marks, mark_list)
        result = EquationService.solve_marked_series(t_value, mark_list, mark_values, order, field)
    else:
        family_name, model = resolve_model(family, degrees, weights)
        result = EquationService.solve(EquationFamily.degree(model), t_value, order, field=field)

    config = RunConfig(
        command="series",
        model=family_name,
        order=order,
        precision_bits=None if integral else bits,
        output_format=output_format,
        output=output,
        options={
            "t": str(t),
            "field": field.describe(),
            "mark_degrees": mark_list,
            "marks": [str(u) for u in mark_values],
            "check": check,
            "check_limit": check_limit,
            "digits": digits,
        },
    )
    current_app.logger.info("series: familia=%s t=%s N=%d", family_name, t, order)

    rows = []
    mismatches = 0
    for n in range(1, order + 1):
        coefficient = result.coefficient(n)
        row = {"n": n, "coefficient": coefficient, "decimal": decimal_string(coefficient, digits)}
        if check and integral and n <= check_limit:
            oracle = _oracle(n, t_value, family_name, model, mark_list, mark_values)
            row["oracle"] = oracle
            row["matches"] = oracle == coefficient
            mismatches += oracle != coefficient
        rows.append(row)

    if output_format is OutputFormat.CSV:
        text = "\n".join(config_lines(config) + [render_csv(rows, COLUMNS)])
    else:
        text = render_json(config, rows, mismatches=mismatches)
    emit(text, output)
    if mismatches:
        current_app.logger.warning("%d coeficientes no coinciden con la enumeración", mismatches)
        raise click.exceptions.Exit(EXIT_TOLERANCE)


def _oracle(n, t, family_name, model, mark_list, mark_values) -> Fraction:
    if family_name == "polya":
        return EnumerationService.marked_class_sum(n, t, (), (), current_app.config["ENUMERATION_CEILING"])
    if family_name == "marked":
        return EnumerationService.marked_class_sum(
            n, t, mark_list, mark_values, current_app.config["ENUMERATION_CEILING"]
        )
    return EnumerationService.weight_power_sum(n, model, t, enumeration_ceiling(model))
