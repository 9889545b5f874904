"""
Command for generating synthetic watersheds.
"""
import logging
from pathlib import Path
from typing import Optional, Tuple

import click

from hydrodeep.cli.common import guarded_output
from hydrodeep.schemas.run import RunConfig
from hydrodeep.services.datapipe_service import DataPipeService
from hydrodeep.services.synth_service import SynthService
from hydrodeep.utils.enums import ShiftMode

logger = logging.getLogger(__name__)


@click.command("generate")
@click.option("--spec", "spec_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              help="YAML run config; its synth section describes the watershed.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), required=True,
              help="Directory receiving source/ and one directory per target.")
@click.option("--target", "targets", multiple=True, type=click.Choice([m.value for m in ShiftMode]),
              help="Also generate a transfer target shifted along this axis (repeatable).")
@click.option("--target-seed", type=int, default=None, help="Seed of the redrawn target components.")
@click.option("--seed", type=int, default=None, help="Override the generation seed.")
def generate(spec_path: Optional[Path], out_dir: Path, targets: Tuple[str, ...],
             target_seed: Optional[int], seed: Optional[int]) -> None:
    """Generate a synthetic source watershed and optional transfer targets."""
    run_cfg = RunConfig.load(spec_path, {"synth.seed": seed})
    spec = run_cfg.synth
    with guarded_output(out_dir, run_cfg):
        source = SynthService.generate(spec, "source")
        DataPipeService.write_series_csv(source.grid, source.series, out_dir / "source")
        click.echo(f"source: {source.grid.grid_count} grids, {source.series.steps} days")
        for mode in targets:
            tseed = spec.seed + 1 if target_seed is None else target_seed
            target = SynthService.generate(SynthService.target_spec(spec, ShiftMode(mode), tseed), mode)
            DataPipeService.write_series_csv(target.grid, target.series, out_dir / mode)
            click.echo(f"{mode}: {target.grid.grid_count} grids, {target.series.steps} days")
