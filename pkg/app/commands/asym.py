import click
import mpmath
from flask import Blueprint, current_app

from ..models.run_config import EXIT_TOLERANCE, OutputFormat, RunConfig
from ..models.tree import DegreeModel
from ..services.asymptotics_service import AsymptoticsService
from ..services.enumeration_service import EnumerationService
from ..utils.reporting import emit, exit_codes, render_json
from ..utils.validators import (
    validate_choice,
    validate_integer_input,
    validate_integer_list,
    validate_numeric_input,
    validate_size_range,
)
from . import enumeration_ceiling, resolve_model

bp = Blueprint('asym', __name__, cli_group=None)

WHICH = ["labeled", "ub", "leaf", "logweight", "aut", "degree"]

# (valor de referencia, tolerancia absoluta)
REFERENCE = {
    ("labeled", "A"): (2.397678, 1e-4),
    ("labeled", "c_l"): (0.354379, 1e-5),
    ("ub", "C"): (1.279101, 1e-4),
    ("ub", "delta"): (0.412681, 1e-5),
    ("leaf", "mu"): (0.340252, 1e-4),
    ("leaf", "labeled_mu"): (0.367879, 1e-6),
    ("logweight:binary121", "mu"): (0.444518, 1e-4),
    ("logweight:binary121", "sigma2"): (0.072413, 1e-3),
    ("logweight:ub", "mu"): (0.176278, 1e-4),
    ("logweight:ub", "sigma2"): (0.025865, 1e-3),
    ("aut", "mu"): (0.137342, 1e-3),
    ("aut", "sigma2"): (0.196770, 1e-3),
}


def _entry(key: str, name: str, value) -> dict:
    entry = {"name": name, "value": mpmath.nstr(value, 15)}
    reference = REFERENCE.get((key, name))
    if reference is not None:
        target, tolerance = reference
        deviation = abs(float(value) - target)
        entry.update(reference=target, deviation=deviation, tolerance=tolerance, within=deviation <= tolerance)
    return entry


def _stability(report) -> dict:
    return {
        "value": mpmath.nstr(report.value, 12),
        "refined": mpmath.nstr(report.refined, 12),
        "drift": float(report.drift),
        "stable": report.stable,
    }


def _values(constants, *names):
    return constants, {name: getattr(constants, name) for name in names}


def _degree_values(constants):
    values = {f"mean_{d}": mean for d, mean in zip(constants.degrees, constants.means)}
    for i, d in enumerate(constants.degrees):
        for j, e in enumerate(constants.degrees):
            if j >= i:
                values[f"cov_{d}_{e}"] = constants.covariance[i][j]
    return constants, values


@bp.cli.command('asym')
@click.option('--which', default='labeled', help='labeled, ub, leaf, logweight, aut o degree.')
@click.option('--model', 'model_name', default='binary121', help='Modelo de grados para logweight.')
@click.option('--D', 'degrees', default=None, help='Grados permitidos del modelo custom.')
@click.option('--w', 'weights', default=None, help='Pesos racionales del modelo custom.')
@click.option('--degrees', 'marked', default='0', help='Grados marcados para --which degree.')
@click.option('--clt-model', default='iso-labeled', help='iso-labeled o labeled (para --which degree).')
@click.option('--order', default=None, help='Orden de truncamiento N.')
@click.option('--nested-degree', default=None, help='Grado de los polinomios anidados.')
@click.option('--precision-bits', default=None, help='Precisión real en bits.')
@click.option('--step', default=None, help='Paso h de las diferencias finitas.')
@click.option('--predict', default=None, help='Rango de n para comparar la predicción con el valor exacto.')
@click.option('--output', default=None, help='Archivo de salida (por defecto, stdout).')
@exit_codes
def asym(which, model_name, degrees, weights, marked, clt_model, order, nested_degree, precision_bits, step, predict,
         output):
    """
    Constantes asintóticas y de TCL con su desviación respecto de los valores de referencia.

    Cada constante se recalcula a orden 2N; una deriva mayor que la tolerancia, un diagnóstico
    de diferencias finitas inestable o una desviación de la referencia terminan con código 2.
    """
    cfg = current_app.config
    which = validate_choice(which, WHICH, "tipo de constante")
    order = validate_integer_input(order, "orden") if order is not None else cfg["SERIES_ORDER"]
    nested = (validate_integer_input(nested_degree, "grado anidado")
              if nested_degree is not None else cfg["NESTED_DEGREE"])
    bits = validate_integer_input(precision_bits, "precisión") if precision_bits is not None else cfg["REAL_PRECISION_BITS"]
    step = validate_numeric_input(step, "paso", positive=True) if step is not None else cfg["FD_STEP"]
    predict_sizes = validate_size_range(predict) if predict is not None else []

    options = {"which": which, "nested_degree": nested, "step": step, "predict": predict_sizes}
    model_label = None
    entries, diagnostics, predictions, unstable = [], {}, [], []

    def checked(compute):
        constants, values = compute(order)
        reports = AsymptoticsService.truncation_reports(lambda N: compute(N)[1], order, base=values)
        diagnostics["truncation"] = {name: _stability(report) for name, report in reports.items()}
        unstable.extend(f"{name}:truncation" for name, report in reports.items() if not report.stable)
        return constants

    def richardson(reports):
        diagnostics["step"] = {name: _stability(report) for name, report in reports.items()}
        unstable.extend(f"{name}:step" for name, report in reports.items() if not report.stable)

    if which == "labeled":
        constants = checked(lambda N: _values(AsymptoticsService.labeled_constants(N, nested, bits),
                                              "A", "c_l", "alpha"))
        entries = [_entry(which, "A", constants.A), _entry(which, "c_l", constants.c_l),
                   _entry(which, "alpha", constants.alpha)]
        diagnostics.update({k: (mpmath.nstr(v, 6) if isinstance(v, mpmath.mpf) else v)
                            for k, v in constants.diagnostics.items()})
        for n in predict_sizes:
            exact = EnumerationService.exact_p_labeled(n, enumeration_ceiling(DegreeModel.poisson()))
            predicted = AsymptoticsService.predict_labeled(n, constants)
            predictions.append({"n": n, "exact": exact, "predicted": predicted,
                                "relative_error": abs(predicted / float(exact) - 1)})
    elif which == "ub":
        constants = checked(lambda N: _values(AsymptoticsService.unary_binary_constants(N, nested, bits),
                                              "C", "delta", "x1", "x2"))
        entries = [_entry(which, "C", constants.C), _entry(which, "delta", constants.delta),
                   _entry(which, "x1", constants.x1), _entry(which, "x2", constants.x2)]
        diagnostics.update({k: (mpmath.nstr(v, 6) if isinstance(v, mpmath.mpf) else v)
                            for k, v in constants.diagnostics.items()})
        ub = DegreeModel.unary_binary()
        for n in predict_sizes:
            exact = EnumerationService.exact_p_gw(n, ub, enumeration_ceiling(ub))
            predicted = AsymptoticsService.predict_unary_binary(n, constants)
            predictions.append({"n": n, "exact": exact, "predicted": predicted,
                                "relative_error": abs(predicted / float(exact) - 1)})
    elif which == "leaf":
        def leaf(N):
            mu = AsymptoticsService.leaf_mean_constant(N, nested, bits)
            return mu, {"mu": mu}

        mu = checked(leaf)
        entries = [_entry(which, "mu", mu), _entry(which, "labeled_mu", AsymptoticsService.labeled_degree_mean(0))]
        cross_check = AsymptoticsService.report(
            AsymptoticsService.degree_mean(0, 2, order, nested, bits), mu, AsymptoticsService.TRUNCATION_DRIFT)
        diagnostics["mu_cross_check"] = _stability(cross_check)
        if not cross_check.stable:
            unstable.append("mu:cross_check")
    elif which == "logweight":
        model_label, model = resolve_model(model_name, degrees, weights)
        constants = checked(lambda N: _values(
            AsymptoticsService.logweight_clt_constants(model, step, N, nested, bits), "mu", "sigma2"))
        key = f"logweight:{model_label}"
        entries = [_entry(key, "mu", constants.mu), _entry(key, "sigma2", constants.sigma2)]
        richardson({"mu": constants.mu_report, "sigma2": constants.sigma2_report})
    elif which == "aut":
        constants = checked(lambda N: _values(
            AsymptoticsService.aut_clt_constants(step, N, nested, bits), "mu", "sigma2"))
        entries = [_entry(which, "mu", constants.mu), _entry(which, "sigma2", constants.sigma2)]
        richardson({"mu": constants.mu_report, "sigma2": constants.sigma2_report})
    else:
        marked_degrees = validate_integer_list(marked, "grados marcados")
        clt_model = validate_choice(clt_model, ["iso-labeled", "labeled"], "modelo del TCL")
        options.update(degrees=marked_degrees, clt_model=clt_model)
        constants = checked(lambda N: _degree_values(
            AsymptoticsService.degree_clt_constants(marked_degrees, clt_model, step, N, nested, bits)))
        entries = [_entry(which, name, value) for name, value in _degree_values(constants)[1].items()]
        richardson(constants.reports)

    config = RunConfig(
        command="asym",
        model=model_label,
        order=order,
        precision_bits=bits,
        output_format=OutputFormat.JSON,
        output=output,
        options=options,
    )
    breaches = [entry["name"] for entry in entries if entry.get("within") is False] + unstable
    emit(render_json(config, entries, diagnostics=diagnostics, predictions=predictions, breaches=breaches), output)
    if breaches:
        current_app.logger.warning("Constantes fuera de tolerancia o inestables: %s", ", ".join(breaches))
        raise click.exceptions.Exit(EXIT_TOLERANCE)
