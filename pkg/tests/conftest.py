import json

import pytest

from app import create_app


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: pruebas largas (tamaños grandes o muchas repeticiones)")


@pytest.fixture
def app():
    app = create_app('testing')
    yield app


@pytest.fixture
def runner(app):
    return app.test_cli_runner()


@pytest.fixture
def run_json(runner, tmp_path):
    """Ejecuta un comando con --output y devuelve (resultado, reporte JSON)."""

    def run(*args):
        output = tmp_path / "report.json"
        result = runner.invoke(args=[*args, "--output", str(output)])
        report = json.loads(output.read_text(encoding="utf-8")) if output.exists() else None
        return result, report

    return run
