import click
from flask import Blueprint, current_app

from ..models.run_config import OutputFormat, RunConfig
from ..services.catalog_store_service import CatalogStoreService
from ..services.enumeration_service import EnumerationService
from ..utils.reporting import config_lines, decimal_string, emit, exit_codes, render_csv, render_json
from ..utils.validators import validate_choice, validate_integer_input, validate_size_range
from . import LABELED, enumeration_ceiling, resolve_model

bp = Blueprint('exact', __name__, cli_group=None)

QUANTITIES = {LABELED: "p_n", "plane": "q_n"}
COLUMNS = ["n", "quantity", "probability", "decimal", "classes"]


@bp.cli.command('exact')
@click.option('--model', 'model_name', default=LABELED, help='labeled, plane, ub, binary121, binary, ternary o custom.')
@click.option('--D', 'degrees', default=None, help='Grados permitidos, p. ej. 0,1,2.')
@click.option('--w', 'weights', default=None, help='Pesos racionales, p. ej. 1,1,1/2.')
@click.option('--n', 'sizes', required=True, help='Tamaño o rango: 5, 3..8 o 3,5,8.')
@click.option('--digits', default='20', help='Cifras de la representación decimal.')
@click.option('--dump-classes', is_flag=True, help='Incluye los registros de cada clase.')
@click.option('--format', 'fmt', default='json', help='json o csv.')
@click.option('--output', default=None, help='Archivo de salida (por defecto, stdout).')
@exit_codes
def exact(model_name, degrees, weights, sizes, digits, dump_classes, fmt, output):
    """Probabilidad exacta de isomorfismo por enumeración (p_n, g_n o q_n)."""
    label, model = resolve_model(model_name, degrees, weights)
    sizes = validate_size_range(sizes)
    digits = validate_integer_input(digits, "número de cifras")
    output_format = OutputFormat(validate_choice(fmt, ["json", "csv"], "formato"))
    ceiling = enumeration_ceiling(model)
    config = RunConfig(
        command="exact",
        model=label,
        sizes=tuple(sizes),
        output_format=output_format,
        output=output,
        options={"digits": digits, "dump_classes": dump_classes, "ceiling": ceiling, "model_signature": model.signature},
    )
    current_app.logger.info("exact: modelo=%s n=%s", label, sizes)

    results = []
    for n in sizes:
        if label == LABELED:
            probability = EnumerationService.exact_p_labeled(n, ceiling)
        else:
            probability = EnumerationService.exact_p_gw(n, model, ceiling)
        row = {
            "n": n,
            "quantity": QUANTITIES.get(label, "g_n"),
            "probability": probability,
            "decimal": decimal_string(probability, digits),
            "classes": EnumerationService.class_count(n, model, ceiling),
        }
        if dump_classes:
            row["records"] = [
                CatalogStoreService.row(record) for record in EnumerationService.enumerate_polya(n, model, ceiling)
            ]
        results.append(row)

    if output_format is OutputFormat.CSV:
        text = "\n".join(config_lines(config) + [render_csv(results, COLUMNS)])
    else:
        text = render_json(config, results)
    emit(text, output)
