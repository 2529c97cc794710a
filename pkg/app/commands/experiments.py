import io

import click
from flask import Blueprint, current_app

from ..models.catalog import ExportFormat
from ..models.run_config import OutputFormat, RunConfig
from ..models.sampling import RngSpec
from ..services.catalog_store_service import CatalogStoreService
from ..services.enumeration_service import EnumerationService
from ..services.monte_carlo_service import MonteCarloService
from ..utils.reporting import config_lines, emit, exit_codes, render_csv, render_json
from ..utils.validators import validate_choice, validate_integer_input, validate_seed
from . import enumeration_ceiling, resolve_model, sampling_model_for

bp = Blueprint('experiments', __name__, cli_group=None)

DECAY_COLUMNS = ["n", "q", "rate", "plane_trees"]


@bp.cli.command('plane-decay')
@click.option('--n-max', default='18', help='Mayor tamaño de la tabla.')
@click.option('--method', default='enumeration', help='enumeration o series.')
@click.option('--format', 'fmt', default='csv', help='csv o json.')
@click.option('--output', default=None, help='Archivo de salida (por defecto, stdout).')
@exit_codes
def plane_decay(n_max, method, fmt, output):
    """Tabla (n, q_n exacto, -log(q_n)/n) de árboles planos."""
    n_max = validate_integer_input(n_max, "n máximo")
    method = validate_choice(method, ["enumeration", "series"], "método")
    output_format = OutputFormat(validate_choice(fmt, ["csv", "json"], "formato"))
    ceiling = current_app.config["ENUMERATION_CEILING"]
    config = RunConfig(
        command="plane-decay",
        model="plane",
        sizes=tuple(range(1, n_max + 1)),
        output_format=output_format,
        output=output,
        options={"method": method, "ceiling": ceiling},
    )
    rows = [
        {"n": row.n, "q": row.q, "rate": row.rate, "plane_trees": row.plane_trees}
        for row in EnumerationService.plane_decay_table(n_max, method, ceiling)
    ]
    if output_format is OutputFormat.CSV:
        text = "\n".join(config_lines(config) + [render_csv(rows, DECAY_COLUMNS)])
    else:
        text = render_json(config, rows)
    emit(text, output)


@bp.cli.command('export')
@click.option('--model', 'model_name', default='plane', help='Modelo de grados (plane, ub, ..., custom).')
@click.option('--D', 'degrees', default=None, help='Grados permitidos del modelo custom.')
@click.option('--w', 'weights', default=None, help='Pesos racionales del modelo custom.')
@click.option('--n', 'n_str', required=True, help='Tamaño de las clases.')
@click.option('--format', 'fmt', default='jsonl', help='jsonl o csv.')
@click.option('--catalog', default=None, help='Archivo binario de catálogo (se lee o se crea).')
@click.option('--output', default=None, help='Archivo de salida (por defecto, stdout).')
@exit_codes
def export(model_name, degrees, weights, n_str, fmt, catalog, output):
    """Registros de cada clase de isomorfismo como JSON lines o CSV."""
    label, model = resolve_model(model_name, degrees, weights)
    n = validate_integer_input(n_str, "n")
    export_format = ExportFormat(validate_choice(fmt, [f.value for f in ExportFormat], "formato"))
    ceiling = enumeration_ceiling(model)
    if catalog:
        records = CatalogStoreService.load_or_build(catalog, n, model, ceiling)
    else:
        records = list(EnumerationService.enumerate_polya(n, model, ceiling))
    buffer = io.StringIO()
    written = CatalogStoreService.export(records, buffer, export_format)
    current_app.logger.info("export: %d registros de tamaño %d (%s)", written, n, label)
    emit(buffer.getvalue().rstrip("\n"), output)


@bp.cli.command('leaf-stats')
@click.option('--n', 'n_str', required=True, help='Tamaño de los árboles.')
@click.option('--samples', default='100000', help='Número de clases muestreadas.')
@click.option('--seed', default='0', help='Semilla de 64 bits.')
@click.option('--output', default=None, help='Archivo de salida (por defecto, stdout).')
@exit_codes
def leaf_stats(n_str, samples, seed, output):
    """Hojas de pares etiquetados condicionados a ser isomorfos (muestreo exacto por clases)."""
    n = validate_integer_input(n_str, "n")
    samples = validate_integer_input(samples, "número de muestras")
    rng = RngSpec(validate_seed(seed))
    ceiling = current_app.config["ENUMERATION_CEILING"]
    config = RunConfig(command="leaf-stats", model="labeled", sizes=(n,), seed=rng.seed, output=output,
                       options={"samples": samples, "ceiling": ceiling})
    stats = MonteCarloService.mc_isomorphic_pair_leaf_stats(n, samples, rng, ceiling)
    emit(render_json(config, {
        "n": stats.n,
        "samples": stats.samples,
        "mean_leaves": stats.mean_leaves,
        "mean_fraction": stats.mean_fraction,
        "variance": stats.variance,
        "exact_mean": stats.exact_mean,
    }), output)


@bp.cli.command('giant-branch')
@click.option('--model', 'model_name', default='labeled', help='labeled, plane, ub, ..., custom.')
@click.option('--D', 'degrees', default=None, help='Grados permitidos del modelo custom.')
@click.option('--w', 'weights', default=None, help='Pesos racionales del modelo custom.')
@click.option('--n', 'n_str', required=True, help='Tamaño de los árboles.')
@click.option('--samples', default='10000', help='Número de árboles.')
@click.option('--seed', default='0', help='Semilla de 64 bits.')
@click.option('--max-core', default='4', help='Mayor tamaño de núcleo reportado por separado.')
@click.option('--output', default=None, help='Archivo de salida (por defecto, stdout).')
@exit_codes
def giant_branch(model_name, degrees, weights, n_str, samples, seed, max_core, output):
    """Frecuencias exploratorias del núcleo que queda al quitar la rama gigante."""
    label, model = resolve_model(model_name, degrees, weights)
    n = validate_integer_input(n_str, "n")
    samples = validate_integer_input(samples, "número de muestras")
    max_core = validate_integer_input(max_core, "tamaño máximo del núcleo")
    rng = RngSpec(validate_seed(seed))
    sampling_model = sampling_model_for(label, model, polya=False)
    config = RunConfig(command="giant-branch", model=sampling_model.name, sizes=(n,), seed=rng.seed, output=output,
                       options={"samples": samples, "max_core": max_core})
    profile = MonteCarloService.mc_giant_branch_profile(n, sampling_model, samples, rng, max_core)
    emit(render_json(config, {
        "n": profile.n,
        "samples": profile.samples,
        "mean_core_size": profile.mean_core_size,
        "core_frequencies": profile.core_frequencies,
    }), output)
