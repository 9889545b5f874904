"""
Commands for training, evaluating and comparing discharge models.
"""
import logging
from pathlib import Path
from typing import Optional

import click
import numpy as np
import pandas as pd

from hydrodeep.cli.common import (
    format_report,
    guarded_output,
    parse_int_list,
    split_list,
    write_report,
    write_table,
)
from hydrodeep.schemas.run import RunConfig
from hydrodeep.services.checkpoint_service import CheckpointService
from hydrodeep.services.datapipe_service import DataPipeService
from hydrodeep.services.metrics_service import MetricsService
from hydrodeep.services.model_service import FitResult, ModelService
from hydrodeep.utils.enums import Arch
from hydrodeep.utils.exceptions import BuildError, ConfigError

logger = logging.getLogger(__name__)

ARCH_CHOICE = click.Choice([a.value for a in Arch])

data_option = click.option("--data", "data_path", type=click.Path(exists=True, path_type=Path), required=True,
                           help="Directory with series.csv and grid.csv.")
config_option = click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
                             help="YAML run config.")
seed_option = click.option("--seed", type=int, default=None, help="Override the global seed.")
epochs_option = click.option("--epochs", type=int, default=None, help="Override train.epochs.")


def _predictions_frame(result: FitResult) -> pd.DataFrame:
    test = result.prepared.test
    predicted = ModelService.predict_series(result.model, test, result.prepared.scaler)
    return pd.DataFrame({"date": test.dates.strftime("%Y-%m-%d"), "observed": test.target_raw,
                         "predicted": predicted.to_numpy()})


@click.command("train")
@data_option
@config_option
@click.option("--arch", type=ARCH_CHOICE, default=Arch.HYDRODEEP.value, show_default=True)
@click.option("--out", "ckpt_path", type=click.Path(dir_okay=False, path_type=Path), required=True,
              help="Checkpoint file; history, predictions and metrics go next to it.")
@seed_option
@epochs_option
@click.option("--lag", type=int, default=None, help="Override the look-back window.")
def train(data_path: Path, config_path: Optional[Path], arch: str, ckpt_path: Path,
          seed: Optional[int], epochs: Optional[int], lag: Optional[int]) -> None:
    """Weight, scale, window, split, train and evaluate one model."""
    run_cfg = RunConfig.load(config_path, {"seed": seed, "train.epochs": epochs, "lag": lag})
    with guarded_output(ckpt_path.parent, run_cfg) as out_dir:
        grid, series = DataPipeService.load_series_csv(data_path)
        cfg = run_cfg.model_config(Arch(arch), grid.grid_count)
        result = ModelService.fit(grid, series, cfg, run_cfg.train_config(), run_cfg.data)
        CheckpointService.save(result.model, ckpt_path)
        write_table(ModelService.history_frame(result.history), out_dir / "history.csv")
        write_table(_predictions_frame(result), out_dir / "predictions.csv")
        write_report(result.report, out_dir / "metrics.yaml")
        click.echo(format_report(result.report))


@click.command("evaluate")
@click.option("--ckpt", "ckpt_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@data_option
@config_option
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), default=None,
              help="Output directory; defaults to the checkpoint's directory.")
@click.option("--split", "split_name", type=click.Choice(["test", "val", "train", "all"]), default="test",
              show_default=True)
@click.option("--as-printed", is_flag=True, help="Use the squared-numerator PBIAS variant.")
def evaluate(ckpt_path: Path, data_path: Path, config_path: Optional[Path], out_dir: Optional[Path],
             split_name: str, as_printed: bool) -> None:
    """Evaluate a checkpoint and write date, observed, predicted rows."""
    run_cfg = RunConfig.load(config_path)
    out_dir = out_dir or ckpt_path.parent
    with guarded_output(out_dir, run_cfg):
        model = CheckpointService.load(ckpt_path)
        if model.scaler is None:
            raise ConfigError(f"checkpoint {ckpt_path} carries no scaler")
        grid, series = DataPipeService.load_series_csv(data_path)
        prepared = DataPipeService.prepare(grid, series, model.config.lag, run_cfg.data,
                                           model.config.use_runoff_inputs, scaler=model.scaler)
        dataset = prepared.dataset if split_name == "all" else getattr(prepared, split_name)
        predicted = ModelService.predict_series(model, dataset, model.scaler)
        frame = pd.DataFrame({"date": dataset.dates.strftime("%Y-%m-%d"), "observed": dataset.target_raw,
                              "predicted": predicted.to_numpy()})
        write_table(frame, out_dir / "predictions.csv")
        report = MetricsService.report(dataset.target_raw, predicted.to_numpy(), as_printed_pbias=as_printed)
        write_report(report, out_dir / "metrics.yaml")
        click.echo(format_report(report))


@click.command("sweep-lag")
@data_option
@config_option
@click.option("--lags", default="3..11", show_default=True, help="Inclusive range a..b or a comma list.")
@click.option("--arch", type=ARCH_CHOICE, default=Arch.HYDRODEEP.value, show_default=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), required=True)
@seed_option
@epochs_option
def sweep_lag(data_path: Path, config_path: Optional[Path], lags: str, arch: str, out_dir: Path,
              seed: Optional[int], epochs: Optional[int]) -> None:
    """Train one model per look-back window and tabulate test metrics."""
    run_cfg = RunConfig.load(config_path, {"seed": seed, "train.epochs": epochs})
    lag_values = parse_int_list(lags)
    if min(lag_values) < 1:
        raise ConfigError(f"--lags must be positive, got {lags!r}")
    with guarded_output(out_dir, run_cfg):
        grid, series = DataPipeService.load_series_csv(data_path)
        rows = []
        for lag in lag_values:
            lag_cfg = run_cfg.copy(update={"lag": lag})
            cfg = lag_cfg.model_config(Arch(arch), grid.grid_count)
            try:
                result = ModelService.fit(grid, series, cfg, lag_cfg.train_config(), run_cfg.data)
            except BuildError as e:
                logger.warning("Skipping lag %d: %s", lag, e.message)
                rows.append({"lag": lag, "nse": np.nan, "pbias_pct": np.nan, "rsr": np.nan, "n": 0})
                continue
            rows.append({"lag": lag, **result.report.to_record()})
        table = pd.DataFrame(rows, columns=["lag", "nse", "pbias_pct", "rsr", "n"])
        if table["nse"].isna().all():
            raise BuildError(f"no lag in {lags} fits the {arch} layer stack")
        table["best"] = table["nse"] == table["nse"].max()
        best = int(table.loc[table["best"], "lag"].iloc[0])
        logger.info("Best lag %d with test NSE %.4f", best, table["nse"].max())
        write_table(table, out_dir / "lag_sweep.csv")
        click.echo(table.to_string(index=False))


@click.command("compare")
@data_option
@config_option
@click.option("--archs", default=",".join(a.value for a in Arch), show_default=True,
              help="Comma-separated architectures.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), required=True)
@seed_option
@epochs_option
@click.option("--area-scale", type=click.FloatRange(min=0.0, min_open=True), default=None,
              help="m3/s per mm/day of runoff on one grid for the process-based row. Defaults to the "
                   "config's synth grid area, which only matches data generated with that same config.")
def compare(data_path: Path, config_path: Optional[Path], archs: str, out_dir: Path,
            seed: Optional[int], epochs: Optional[int], area_scale: Optional[float]) -> None:
    """
    Compare architectures under one protocol, with the process-based row.

    The process-based row converts summed grid runoff to discharge with
    ``--area-scale``; pass it explicitly for data not produced by
    ``generate`` with the same config.
    """
    run_cfg = RunConfig.load(config_path, {"seed": seed, "train.epochs": epochs})
    try:
        arch_list = [Arch(a) for a in split_list(archs)]
    except ValueError as e:
        raise ConfigError(str(e))
    with guarded_output(out_dir, run_cfg):
        grid, series = DataPipeService.load_series_csv(data_path)
        rows, test_days = [], None
        for arch in arch_list:
            cfg = run_cfg.model_config(arch, grid.grid_count)
            result = ModelService.fit(grid, series, cfg, run_cfg.train_config(), run_cfg.data)
            test_days = result.prepared.test.day_index
            kind = "DL + PB" if cfg.use_runoff_inputs else "DL"
            rows.append({"model": arch.value, "type": kind, **result.report.to_record()})
        scale = run_cfg.synth.area_scale if area_scale is None else area_scale
        pb = ModelService.pb_baseline(series, grid, scale, test_days)
        rows.append({"model": "pb", "type": "PB", **pb.to_record()})
        table = pd.DataFrame(rows, columns=["model", "type", "nse", "pbias_pct", "rsr", "n"])
        reference = table.loc[table["model"] == Arch.HYDRODEEP.value, "nse"]
        if reference.empty:
            table["nse_gain_pct"] = np.nan
        else:
            ref = float(reference.iloc[0])
            table["nse_gain_pct"] = [np.nan if m == Arch.HYDRODEEP.value else MetricsService.relative_nse_gain(ref, v)
                                     for m, v in zip(table["model"], table["nse"])]
        write_table(table, out_dir / "compare.csv")
        click.echo(table.to_string(index=False))
