"""
Command for comparing transfer approaches on target watersheds.
"""
import logging
from pathlib import Path
from typing import Optional

import click

from hydrodeep.cli.common import guarded_output, parse_int_list, split_list, write_table
from hydrodeep.schemas.run import RunConfig
from hydrodeep.services.checkpoint_service import CheckpointService
from hydrodeep.services.transfer_service import TransferService
from hydrodeep.utils.enums import PolicyName

logger = logging.getLogger(__name__)


@click.command("transfer")
@click.option("--source-ckpt", "ckpt_path", type=click.Path(exists=True, dir_okay=False, path_type=Path),
              required=True, help="Checkpoint trained on the source watershed.")
@click.option("--targets", required=True, help="Comma-separated target data directories.")
@click.option("--policy", type=click.Choice([p.value for p in PolicyName] + ["all"]), default="all",
              show_default=True)
@click.option("--budget", type=int, default=None, help="Finetuning epochs; defaults to transfer.budget_epochs.")
@click.option("--seeds", default=None, help="Seeds as a..b or a comma list; defaults to transfer.seeds.")
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--out", "out_dir", type=click.Path(file_okay=False, path_type=Path), required=True)
def transfer(ckpt_path: Path, targets: str, policy: str, budget: Optional[int], seeds: Optional[str],
             config_path: Optional[Path], out_dir: Path) -> None:
    """Score scratch training and the freeze policies on every target."""
    overrides = {"transfer.budget_epochs": budget}
    if seeds is not None:
        overrides["transfer.seeds"] = parse_int_list(seeds)
    run_cfg = RunConfig.load(config_path, overrides)
    transfer_cfg = run_cfg.transfer
    policies = list(PolicyName) if policy == "all" else [PolicyName(policy)]
    with guarded_output(out_dir, run_cfg):
        source = CheckpointService.load(ckpt_path)
        target_list = TransferService.load_targets([Path(p) for p in split_list(targets)])
        table = TransferService.compare_approaches(
            source, target_list, transfer_cfg.budget_epochs, policies, transfer_cfg.seeds,
            train_cfg=run_cfg.train_config(), data_cfg=run_cfg.data,
            full_scratch_epochs=transfer_cfg.full_scratch_epochs, strict_t1=transfer_cfg.strict_t1)
        write_table(table, out_dir / "transfer_comparison.csv")
        logger.info("Median NSE by approach:\n%s", TransferService.median_nse(table).to_string())
        click.echo(table.to_string(index=False))
