from fractions import Fraction

import click
from flask import Blueprint, current_app

from ..models.run_config import EXIT_TOLERANCE, OutputFormat, RunConfig
from ..models.sampling import IntervalMethod, RngSpec
from ..models.tree import ResourceLimitError
from ..services.enumeration_service import EnumerationService
from ..services.monte_carlo_service import MonteCarloService
from ..services.sampler_service import SamplerService
from ..utils.reporting import config_lines, emit, exit_codes, render_csv, render_json
from ..utils.validators import (
    validate_choice,
    validate_integer_input,
    validate_numeric_input,
    validate_seed,
    validate_size_range,
)
from . import LABELED, enumeration_ceiling, resolve_model, sampling_model_for

bp = Blueprint('mc', __name__, cli_group=None)

COLUMNS = ["n", "model", "estimate", "ci_low", "ci_high", "samples", "hits", "seed", "exact", "covered"]


@bp.cli.command('mc')
@click.option('--model', 'model_name', default=LABELED, help='labeled, plane, ub, binary121, binary, ternary o custom.')
@click.option('--D', 'degrees', default=None, help='Grados permitidos del modelo custom.')
@click.option('--w', 'weights', default=None, help='Pesos racionales del modelo custom.')
@click.option('--polya', is_flag=True, help='Muestrea árboles de Pólya uniformes (con grados en D).')
@click.option('--n', 'sizes', required=True, help='Tamaño o rango: 5, 3..8 o 3,5,8.')
@click.option('--samples', default='100000', help='Número de pares.')
@click.option('--seed', default='0', help='Semilla de 64 bits.')
@click.option('--stream', default='0', help='Flujo del generador.')
@click.option('--workers', default=None, help='Procesos en paralelo.')
@click.option('--method', default='wilson', help='wilson o normal.')
@click.option('--confidence', default='0.95', help='Nivel del intervalo.')
@click.option('--strict', is_flag=True, help='Sale con código 2 si el valor exacto cae fuera del intervalo.')
@click.option('--format', 'fmt', default='json', help='json o csv.')
@click.option('--output', default=None, help='Archivo de salida (por defecto, stdout).')
@exit_codes
def mc(model_name, degrees, weights, polya, sizes, samples, seed, stream, workers, method, confidence, strict, fmt,
       output):
    """Estimación Monte Carlo de la probabilidad de isomorfismo con intervalo de confianza."""
    cfg = current_app.config
    label, model = resolve_model(model_name, degrees, weights)
    sizes = validate_size_range(sizes)
    samples = validate_integer_input(samples, "número de muestras")
    rng = RngSpec(validate_seed(seed), validate_integer_input(stream, "flujo", minimum=0))
    workers = validate_integer_input(workers, "número de procesos") if workers is not None else cfg["MC_WORKERS"]
    interval = IntervalMethod(validate_choice(method, [m.value for m in IntervalMethod], "método"))
    confidence = validate_numeric_input(confidence, "nivel de confianza", positive=True)
    output_format = OutputFormat(validate_choice(fmt, ["json", "csv"], "formato"))
    sampling_model = sampling_model_for(label, model, polya)
    config = RunConfig(
        command="mc",
        model=sampling_model.name,
        sizes=tuple(sizes),
        seed=rng.seed,
        workers=workers,
        output_format=output_format,
        output=output,
        options={
            "samples": samples,
            "stream": rng.stream,
            "block_size": cfg["MC_BLOCK_SIZE"],
            "method": interval.value,
            "confidence": confidence,
            "strict": strict,
        },
    )

    rows = []
    misses = 0
    for n in sizes:
        estimate = MonteCarloService.mc_iso_probability(
            n, sampling_model, samples, rng,
            block_size=cfg["MC_BLOCK_SIZE"], workers=workers, method=interval, confidence=confidence,
        )
        row = {
            "n": n,
            "model": estimate.model,
            "estimate": estimate.estimate,
            "ci_low": estimate.ci_low,
            "ci_high": estimate.ci_high,
            "samples": estimate.samples,
            "hits": estimate.hits,
            "seed": estimate.seed,
        }
        exact = _exact_value(n, label, model, polya)
        if exact is not None:
            row["exact"] = exact
            row["covered"] = estimate.contains(float(exact))
            misses += not row["covered"]
        rows.append(row)

    if output_format is OutputFormat.CSV:
        text = "\n".join(config_lines(config) + [render_csv(rows, COLUMNS)])
    else:
        text = render_json(config, rows)
    emit(text, output)
    if strict and misses:
        current_app.logger.warning("%d valores exactos fuera del intervalo de confianza", misses)
        raise click.exceptions.Exit(EXIT_TOLERANCE)


def _exact_value(n, label, model, polya):
    """Valor del oráculo si el tamaño está bajo el techo de enumeración."""
    try:
        if polya:
            return Fraction(1, SamplerService.polya_count(n, model))
        if label == LABELED:
            return EnumerationService.exact_p_labeled(n, enumeration_ceiling(model))
        return EnumerationService.exact_p_gw(n, model, enumeration_ceiling(model))
    except ResourceLimitError:
        current_app.logger.info("n=%d supera el techo de enumeración: sin valor exacto", n)
        return None
