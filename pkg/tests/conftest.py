"""
Pytest configuration and shared fixtures.
"""
import contextlib
import json
import sys
from pathlib import Path
from typing import Any, Dict, List

import pytest
from loguru import logger

# Add the project root directory to PYTHONPATH
PROJECT_ROOT = Path(__file__).parent.parent
sys.path.insert(0, str(PROJECT_ROOT))

from src.core.logger import reset_logging  # noqa: E402
from src.core.models.params import ValidatedParams, validate  # noqa: E402
from src.core.services.presets import fig2_params  # noqa: E402

FIG2_CONFIG: Dict[str, Any] = {
    "nu_b": 30.0,
    "nu_c": 30.0,
    "kappa_a": 30.0,
    "kappa_c": 0.5,
    "gamma_B": 0.16,
    "g_a": 0.08,
    "g_c": 0.1,
    "n_molecules": 1e7,
    "eps_p": 500.0,
    "eps_ir": 0.001,
    "detuning_mode": {"type": "fixed_delta", "delta_thz": -30.0},
}


@pytest.fixture(autouse=True)
def _isolated_logging():
    """Every test starts and ends without leftover loguru sinks."""
    yield
    reset_logging()


@pytest.fixture
def log_messages():
    """Collects loguru messages emitted during the test."""
    messages: List[str] = []
    handler_id = logger.add(lambda m: messages.append(m.record["message"]), level="DEBUG")
    yield messages
    with contextlib.suppress(ValueError):
        logger.remove(handler_id)


@pytest.fixture
def fig2() -> ValidatedParams:
    """Resonance parameter set at |G_a| = 3.48 THz, Delta = -30 THz."""
    return validate(fig2_params())


@pytest.fixture
def fig2_fixed_delta() -> ValidatedParams:
    """Same set with G_a taken from the steady state (N = 1e7, g_a = 0.08 GHz)."""
    return validate(fig2_params(ga_thz=None))


@pytest.fixture
def config_factory(tmp_path):
    """Writes a JSON config derived from the resonant reference set; keyword arguments override fields."""

    def _write(name: str = "fig2.json", drop: tuple = (), **overrides: Any) -> Path:
        data = {k: v for k, v in FIG2_CONFIG.items() if k not in drop}
        data.update(overrides)
        path = tmp_path / name
        path.write_text(json.dumps(data, indent=2), encoding="utf-8")
        return path

    return _write


@pytest.fixture
def out_dir(tmp_path) -> Path:
    return tmp_path / "out"


@pytest.fixture
def log_dir(tmp_path) -> Path:
    return tmp_path / "logs"
