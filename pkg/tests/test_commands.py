import mpmath
import pytest

from app.models.asymptotics import LabeledConstants
from app.models.run_config import EXIT_INVALID, EXIT_RESOURCE, EXIT_TOLERANCE
from app.services.asymptotics_service import AsymptoticsService
from app.services.enumeration_service import EnumerationService


def test_exact_labeled_three(run_json):
    result, report = run_json("exact", "--n", "3")
    assert result.exit_code == 0
    row = report["results"][0]
    assert row["probability"] == "5/9"
    assert row["quantity"] == "p_n"
    assert row["decimal"].startswith("0.5555555555")
    assert report["config"]["model"] == "labeled"
    assert report["config"]["sizes"] == [3]


def test_exact_unary_binary_four(run_json):
    result, report = run_json("exact", "--model", "ub", "--n", "4")
    assert result.exit_code == 0
    assert report["results"][0]["probability"] == "3/8"
    assert report["results"][0]["quantity"] == "g_n"


def test_exact_custom_model_matches_preset(run_json):
    _, preset = run_json("exact", "--model", "ub", "--n", "2..6")
    _, custom = run_json("exact", "--model", "custom", "--D", "0,1,2", "--w", "1,1,1", "--n", "2..6")
    assert [r["probability"] for r in preset["results"]] == [r["probability"] for r in custom["results"]]


def test_exact_dump_classes(run_json):
    _, report = run_json("exact", "--model", "plane", "--n", "4", "--dump-classes")
    records = report["results"][0]["records"]
    assert len(records) == 4
    assert sum(r["pr"] for r in records) == 5


def test_exact_above_ceiling(run_json):
    result, report = run_json("exact", "--n", "30")
    assert result.exit_code == EXIT_RESOURCE
    assert report is None


@pytest.mark.parametrize("args", [
    ("exact", "--n", "abc"),
    ("exact", "--model", "nope", "--n", "3"),
    ("mc", "--model", "binary", "--n", "4", "--samples", "10"),
    ("asym", "--which", "nope"),
    ("series", "--t", "x"),
])
def test_invalid_input_exit_code(runner, args):
    result = runner.invoke(args=list(args))
    assert result.exit_code == EXIT_INVALID


def test_exact_csv(runner):
    result = runner.invoke(args=["exact", "--n", "1..4", "--format", "csv"])
    lines = result.output.strip().splitlines()
    assert result.exit_code == 0
    assert lines[0].startswith("# {")
    assert lines[1] == "n,quantity,probability,decimal,classes"
    assert len(lines) == 6


def test_series_matches_enumeration(run_json):
    result, report = run_json("series", "--t", "2", "--order", "8")
    assert result.exit_code == 0
    assert report["mismatches"] == 0
    coefficients = [row["coefficient"] for row in report["results"][:3]]
    assert coefficients == ["1", "1", "5/4"]
    assert all(row["matches"] for row in report["results"])


def test_series_fractional_exponent_uses_reals(run_json):
    result, report = run_json("series", "--t", "1/2", "--order", "4", "--precision-bits", "128")
    assert result.exit_code == 0
    assert report["config"]["precision_bits"] == 128
    assert "oracle" not in report["results"][0]
    assert float(report["results"][2]["coefficient"]) == pytest.approx(1.7071067811865475)


def test_series_marked_leaves(run_json):
    result, report = run_json("series", "--family", "marked", "--mark-degrees", "0", "--u", "2", "--order", "5")
    assert result.exit_code == 0
    assert report["mismatches"] == 0
    assert report["results"][2]["coefficient"] == "3"


def test_series_degree_family(run_json):
    result, report = run_json("series", "--family", "ub", "--t", "1", "--order", "6")
    assert result.exit_code == 0
    assert [row["coefficient"] for row in report["results"]] == ["1", "1", "2", "4", "9", "21"]


def test_mc_single_vertex(run_json):
    result, report = run_json("mc", "--n", "1", "--samples", "100")
    assert result.exit_code == 0
    row = report["results"][0]
    assert row["estimate"] == 1.0
    assert row["exact"] == "1"
    assert row["covered"] is True


def test_mc_is_reproducible(run_json):
    args = ("mc", "--model", "ub", "--n", "5..6", "--samples", "3000", "--seed", "42")
    _, first = run_json(*args)
    _, second = run_json(*args)
    assert first == second
    assert first["config"]["seed"] == 42
    assert first["config"]["options"]["samples"] == 3000


def test_mc_polya_exact_value(run_json):
    result, report = run_json("mc", "--polya", "--n", "4", "--samples", "2000")
    assert result.exit_code == 0
    assert report["results"][0]["exact"] == "1/4"
    assert report["config"]["model"] == "polya"


def test_plane_decay_csv(runner):
    result = runner.invoke(args=["plane-decay", "--n-max", "6"])
    lines = result.output.strip().splitlines()
    assert result.exit_code == 0
    assert lines[1] == "n,q,rate,plane_trees"
    assert len(lines) == 8
    assert lines[2].startswith("1,1,")


def test_export_csv(runner, tmp_path):
    catalog = tmp_path / "plane6.ptrc"
    result = runner.invoke(args=["export", "--n", "6", "--format", "csv", "--catalog", str(catalog)])
    lines = result.output.strip().splitlines()
    assert result.exit_code == 0
    assert catalog.exists()
    assert lines[0] == "code_hex,n,aut,pr,weight_num,weight_den"
    assert len(lines) == 21


def test_leaf_stats(run_json):
    result, report = run_json("leaf-stats", "--n", "3", "--samples", "5000")
    assert result.exit_code == 0
    assert report["results"]["exact_mean"] == pytest.approx(1.2)


def test_giant_branch(run_json):
    result, report = run_json("giant-branch", "--n", "3", "--samples", "500")
    assert result.exit_code == 0
    assert set(report["results"]["core_frequencies"]) <= {"()", "(())"}


def test_asym_labeled_within_tolerance(run_json):
    result, report = run_json("asym", "--which", "labeled", "--predict", "10")
    assert result.exit_code == 0
    assert report["breaches"] == []
    names = {entry["name"] for entry in report["results"]}
    assert {"A", "c_l", "alpha"} <= names
    assert report["predictions"][0]["n"] == 10


def _labeled_constants_drifting(drift):
    """Constantes etiquetadas sintéticas cuyo c_l cambia con el orden de truncamiento."""

    def fake(order, nested_degree, precision_bits):
        c_l = mpmath.mpf("0.354379") + mpmath.mpf(drift) * 64 / order
        return LabeledConstants(alpha=mpmath.mpf("0.38188"), xi_prime=mpmath.mpf(1),
                                A=mpmath.mpf("2.397678"), c_l=c_l)

    return fake


def test_asym_truncation_drift_fails_run(run_json, monkeypatch):
    monkeypatch.setattr(AsymptoticsService, "labeled_constants", _labeled_constants_drifting("1e-6"))
    result, report = run_json("asym", "--which", "labeled", "--order", "64")
    assert result.exit_code == EXIT_TOLERANCE
    assert report["breaches"] == ["c_l:truncation"]
    assert report["diagnostics"]["truncation"]["c_l"]["stable"] is False
    assert report["diagnostics"]["truncation"]["A"]["stable"] is True


def test_asym_stable_constants_pass(run_json, monkeypatch):
    monkeypatch.setattr(AsymptoticsService, "labeled_constants", _labeled_constants_drifting("0"))
    result, report = run_json("asym", "--which", "labeled", "--order", "64")
    assert result.exit_code == 0
    assert report["breaches"] == []


def test_config_defaults(app):
    assert app.config["SECRET_KEY"] is None
    assert app.config["ENUMERATION_CEILING"] == EnumerationService.ENUMERATION_CEILING
    assert app.config["RESTRICTED_ENUMERATION_CEILING"] == EnumerationService.RESTRICTED_ENUMERATION_CEILING
