"""
Command for finite-difference verification of the backward pass.
"""
import logging

import click
from pydantic import ValidationError

from hydrodeep.engine.gradcheck import randomize_parameters, relative_errors
from hydrodeep.schemas.model import ModelConfig
from hydrodeep.services.model_service import ModelService
from hydrodeep.utils.enums import Arch
from hydrodeep.utils.exceptions import ConfigError, NumericVerificationError
from hydrodeep.utils.helpers import make_rng

logger = logging.getLogger(__name__)

GRADCHECK_STREAM = 301


def small_model_config(arch: Arch, grid_count: int = 4, lag: int = 7, seed: int = 0) -> ModelConfig:
    """Default layer stack of ``arch`` with narrow widths, sized for a finite-difference sweep."""
    try:
        return ModelConfig(arch=arch, lag=lag, grid_count=grid_count, seed=seed, conv_filters=3, lstm_units=3,
                           dense_units=4, adapter_units=3, aux_units=2)
    except ValidationError as e:
        first = e.errors()[0]
        raise ConfigError(f"invalid gradcheck model: {first['loc'][0]}: {first['msg']}")


@click.command("gradcheck")
@click.option("--arch", type=click.Choice([a.value for a in Arch]), default=Arch.HYDRODEEP.value, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--grids", type=click.IntRange(min=1), default=4, show_default=True,
              help="Grid count L of the test model.")
@click.option("--lag", type=click.IntRange(min=1), default=7, show_default=True)
@click.option("--batch", type=click.IntRange(min=1), default=2, show_default=True,
              help="Samples in the check batch.")
@click.option("--eps", type=click.FloatRange(min=0.0, min_open=True), default=1e-6, show_default=True)
@click.option("--tol", type=float, default=1e-5, show_default=True)
def gradcheck(arch: str, seed: int, grids: int, lag: int, batch: int, eps: float, tol: float) -> None:
    """Compare analytic and central-difference gradients; exit 3 above tolerance."""
    cfg = small_model_config(Arch(arch), grids, lag, seed)
    model = ModelService.build_model(cfg)
    rng = make_rng(seed, GRADCHECK_STREAM)
    randomize_parameters(model.store, rng)
    sample = (
        rng.uniform(0.0, 1.0, size=(batch, lag, cfg.input1_width)),
        rng.uniform(0.0, 1.0, size=(batch, cfg.input2_width)),
        rng.uniform(0.0, 1.0, size=batch),
    )
    errors = relative_errors(model, sample, eps)
    for name, err in errors.items():
        logger.debug("%s: %.3e", name, err)
    worst = max(errors, key=errors.get)
    click.echo(f"{arch}: max relative error {errors[worst]:.3e} ({worst}, {len(errors)} tensors)")
    if errors[worst] >= tol:
        raise NumericVerificationError(f"gradient check failed: {worst} error {errors[worst]:.3e} >= {tol:g}")
