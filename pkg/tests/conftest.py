"""
Shared test fixtures and configuration for the HydroDeep test suite.
"""
import logging

import numpy as np
import pytest
import yaml

from hydrodeep.schemas.model import ModelConfig, TrainConfig
from hydrodeep.schemas.synth import SynthSpec
from hydrodeep.services.datapipe_service import DataPipeService
from hydrodeep.services.synth_service import SynthService
from hydrodeep.utils.enums import Arch

TINY_SIZES = {
    "conv_layers": 2,
    "conv_filters": 3,
    "kernel_width": 3,
    "pool_size": 2,
    "lstm_layers": 2,
    "lstm_units": 3,
    "dropout_rate": 0.0,
    "dense_units": 4,
    "adapter_units": 3,
    "aux_units": 2,
}


def tiny_config(arch=Arch.HYDRODEEP, grid_count=4, lag=7, seed=0, **overrides) -> ModelConfig:
    """Narrow model config used throughout the tests."""
    sizes = {**TINY_SIZES, **overrides}
    return ModelConfig(arch=arch, lag=lag, grid_count=grid_count, seed=seed, **sizes)


@pytest.fixture
def rng():
    """Deterministic generator for test inputs."""
    return np.random.default_rng(1234)


@pytest.fixture
def small_spec():
    """Synthetic spec small enough for unit tests."""
    return SynthSpec(grid_count=4, days=120, seed=3)


@pytest.fixture
def small_watershed(small_spec):
    """Generated watershed for ``small_spec``."""
    return SynthService.generate(small_spec)


@pytest.fixture
def watershed_dir(tmp_path, small_watershed):
    """Directory holding series.csv and grid.csv of ``small_watershed``."""
    return DataPipeService.write_series_csv(small_watershed.grid, small_watershed.series, tmp_path / "ws",
                                            float_format="%.17g")


@pytest.fixture
def quick_train():
    """Short training run."""
    return TrainConfig(epochs=2, batch_size=16, seed=0)


@pytest.fixture
def run_config_file(tmp_path):
    """YAML run config with tiny sizes, two epochs and a small synthetic spec."""
    payload = {
        "seed": 0,
        "lag": 7,
        "model": dict(TINY_SIZES),
        "train": {"epochs": 2, "batch_size": 16},
        "synth": {"grid_count": 4, "days": 120, "seed": 3},
        "transfer": {"budget_epochs": 1, "seeds": [0]},
    }
    path = tmp_path / "config.yaml"
    path.write_text(yaml.safe_dump(payload), encoding="utf-8")
    return path


@pytest.fixture
def make_config():
    """Factory for narrow model configs."""
    return tiny_config


@pytest.fixture(autouse=True)
def propagate_logs():
    """Undo command-line logging setup so caplog sees package records."""
    logger = logging.getLogger("hydrodeep")
    propagate, handlers = logger.propagate, list(logger.handlers)
    logger.propagate = True
    yield
    logger.propagate = propagate
    logger.handlers[:] = handlers
