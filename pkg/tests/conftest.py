from __future__ import annotations

import contextlib
import io
from pathlib import Path

import pytest

from stpa_loc import catalog as catalog_mod
from stpa_loc.cli import main as cli_main
from stpa_loc.dsl import parse_model, parse_scenarios
from stpa_loc.model import has_errors

DATA_DIR = Path(__file__).resolve().parent.parent / "src" / "stpa_loc" / "data"
GOLDEN_DIR = Path(__file__).resolve().parent / "golden"

MODEL_PATH = DATA_DIR / "chat_monitoring.stpa"
SCENARIOS_PATH = DATA_DIR / "chat_monitoring_scenarios.stpa"


@pytest.fixture(scope="session")
def fixture_model():
    model, diags = parse_model(MODEL_PATH.read_text(encoding="utf-8"), file=str(MODEL_PATH))
    assert not has_errors(diags)
    return model


@pytest.fixture(scope="session")
def fixture_scenarios(fixture_model):
    scenarios, diags = parse_scenarios(
        SCENARIOS_PATH.read_text(encoding="utf-8"), fixture_model, file=str(SCENARIOS_PATH)
    )
    assert not has_errors(diags)
    return scenarios


@pytest.fixture(scope="session")
def bundled_catalog():
    return catalog_mod.load_catalog()


def run_cli(argv: list[str]) -> tuple[int, str, str]:
    """Run the CLI in-process, capturing stdout and stderr."""
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = cli_main(argv)
    return code, out.getvalue(), err.getvalue()
