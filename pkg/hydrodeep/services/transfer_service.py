"""
Service for moving a trained network to another watershed.

This module provides input-adapter retargeting across grid counts, the
layer-group freeze policies, budgeted finetuning with a freeze check and
the comparison of all approaches on a list of targets.
"""
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Sequence, Tuple

import pandas as pd

from hydrodeep.engine.graph import ModelGraph
from hydrodeep.schemas.dataset import DataConfig, PreparedData
from hydrodeep.schemas.grid import GridSpec, SeriesTable
from hydrodeep.schemas.metrics import MetricReport
from hydrodeep.schemas.model import TrainConfig, TrainHistory
from hydrodeep.schemas.transfer import FreezePolicy, TransferPlan
from hydrodeep.services.checkpoint_service import CheckpointService
from hydrodeep.services.datapipe_service import DataPipeService
from hydrodeep.services.model_service import ModelService
from hydrodeep.utils.enums import LayerGroup, PolicyName
from hydrodeep.utils.exceptions import FreezeViolationError, ParameterError, StateError

logger = logging.getLogger(__name__)

COMPARISON_COLUMNS = ["target", "policy", "nse", "pbias_pct", "rsr", "grids", "budget_epochs", "seed"]
Target = Tuple[str, GridSpec, SeriesTable]


class TransferService:
    """
    Service class for layer-freezing transfer.
    """

    @staticmethod
    def retarget(source: ModelGraph, target_grid_count: int, seed: int = 0, keep_adapter: bool = False) -> ModelGraph:
        """
        Copy a trained network onto a watershed with ``target_grid_count`` grids.

        The spatial, temporal and head groups are copied bit for bit; the
        input adapter is freshly initialised from ``seed`` for the new input
        widths. All Adam moments and step counts start from zero.

        Args:
            source (ModelGraph): Trained source network.
            target_grid_count (int): Grid count L of the target.
            seed (int): Initialisation and dropout seed of the new model.
            keep_adapter (bool): Also copy the adapter; needs equal grid counts.

        Returns:
            ModelGraph: The retargeted network, all parameters trainable.

        Raises:
            ParameterError: If ``target_grid_count`` < 1, or the adapter is kept
                across different grid counts.
        """
        if target_grid_count < 1:
            raise ParameterError(f"target grid count must be at least 1, got {target_grid_count}")
        if source.config is None:
            raise StateError("only models built from a ModelConfig can be retargeted")
        if keep_adapter and target_grid_count != source.config.grid_count:
            raise ParameterError(
                f"cannot keep an adapter for {source.config.grid_count} grids on a {target_grid_count}-grid target")
        cfg = source.config.copy(update={"grid_count": target_grid_count, "seed": seed})
        target = ModelService.build_model(cfg)
        for name, entry in source.store.items():
            if entry.group == LayerGroup.INPUT_ADAPTER and not keep_adapter:
                continue
            target.store[name].value[...] = entry.value
        logger.info("Retargeted %d -> %d grids (%d -> %d parameters)", source.config.grid_count,
                    target_grid_count, source.parameter_count(), target.parameter_count())
        return target

    @staticmethod
    def apply_policy(model: ModelGraph, policy: FreezePolicy) -> None:
        """Set trainable flags so exactly ``policy.trainable_groups`` are updated."""
        model.store.set_trainable(policy.trainable_groups)

    @staticmethod
    def verify_frozen(model: ModelGraph, reference: dict) -> None:
        """
        Check that every parameter in ``reference`` still has identical bytes.

        Raises:
            FreezeViolationError: If a frozen parameter changed.
        """
        changed = [name for name, value in reference.items()
                   if model.store[name].value.tobytes() != value.tobytes()]
        if changed:
            raise FreezeViolationError(f"frozen parameters changed during finetuning: {', '.join(changed)}")

    @staticmethod
    def finetune_model(source: ModelGraph, prepared: PreparedData, policy: FreezePolicy, budget_epochs: int,
                       seed: int = 0, train_cfg: Optional[TrainConfig] = None) -> Tuple[ModelGraph, TrainHistory, MetricReport]:
        """
        Retarget, freeze, train for exactly ``budget_epochs`` and evaluate.

        Args:
            source (ModelGraph): Trained source network.
            prepared (PreparedData): Target data prepared at the source lag.
            policy (FreezePolicy): Groups left trainable.
            budget_epochs (int): Epochs over the target training split.
            seed (int): Seed of the new adapter, shuffling and dropout.
            train_cfg (Optional[TrainConfig]): Batch size and optimizer settings.

        Returns:
            Tuple[ModelGraph, TrainHistory, MetricReport]: Finetuned model, its
            history and the target test report.

        Raises:
            FreezeViolationError: If a frozen parameter changed.
        """
        if budget_epochs < 0:
            raise ParameterError(f"budget must be non-negative, got {budget_epochs}")
        grid_count = prepared.weights.size
        model = TransferService.retarget(source, grid_count, seed, keep_adapter=policy.strict)
        TransferService.apply_policy(model, policy)
        frozen = model.store.snapshot(policy.frozen_groups)
        cfg = (train_cfg or TrainConfig()).copy(update={"epochs": budget_epochs, "seed": seed, "patience": None})
        history = ModelService.train(model, prepared.train, prepared.val, cfg)
        TransferService.verify_frozen(model, frozen)
        model.scaler = prepared.scaler
        report = ModelService.evaluate(model, prepared.test, prepared.scaler)
        logger.info("%s%s on %d grids after %d epochs: NSE %.4f", policy.name.value,
                    " (strict)" if policy.strict else "", grid_count, budget_epochs, report.nse)
        return model, history, report

    @staticmethod
    def prepare_target(source: ModelGraph, grid: GridSpec, series: SeriesTable,
                       data_cfg: Optional[DataConfig] = None) -> PreparedData:
        """Prepare target data at the source model's lag and input layout."""
        if source.config is None:
            raise StateError("only models built from a ModelConfig can be transferred")
        return DataPipeService.prepare(grid, series, source.config.lag, data_cfg, source.config.use_runoff_inputs)

    @staticmethod
    def finetune(plan: TransferPlan, train_cfg: Optional[TrainConfig] = None,
                 data_cfg: Optional[DataConfig] = None) -> Tuple[ModelGraph, MetricReport]:
        """
        Run one :class:`TransferPlan` from checkpoint and target files.

        Returns:
            Tuple[ModelGraph, MetricReport]: Finetuned model and target test report.
        """
        source = CheckpointService.load(plan.source_checkpoint)
        grid, series = DataPipeService.load_series_csv(plan.target_data)
        prepared = TransferService.prepare_target(source, grid, series, data_cfg)
        model, _, report = TransferService.finetune_model(source, prepared, plan.freeze_policy,
                                                          plan.budget_epochs, plan.seed, train_cfg)
        return model, report

    @staticmethod
    def scratch(source: ModelGraph, prepared: PreparedData, epochs: int, seed: int,
                train_cfg: Optional[TrainConfig] = None, patience: Optional[int] = None) -> MetricReport:
        """Train a fresh network of the source architecture on the target for ``epochs``."""
        cfg = source.config.copy(update={"grid_count": prepared.weights.size, "seed": seed})
        model = ModelService.build_model(cfg)
        tcfg = (train_cfg or TrainConfig()).copy(update={"epochs": epochs, "seed": seed, "patience": patience})
        ModelService.train(model, prepared.train, prepared.val, tcfg)
        return ModelService.evaluate(model, prepared.test, prepared.scaler)

    @staticmethod
    def compare_approaches(source: ModelGraph, targets: Sequence[Target], budget_epochs: int = 20,
                           policies: Iterable[PolicyName] = tuple(PolicyName), seeds: Sequence[int] = (0,),
                           train_cfg: Optional[TrainConfig] = None, data_cfg: Optional[DataConfig] = None,
                           full_scratch_epochs: int = 0, strict_t1: bool = False) -> pd.DataFrame:
        """
        Score scratch training and every freeze policy on every target.

        Rows per target and seed: ``scratch`` (fresh model, ``budget_epochs``),
        ``scratch_full`` when ``full_scratch_epochs`` > 0 (fresh model with the
        configured early stopping), one row per policy, and ``T1_strict``
        when requested and the grid counts match.

        Args:
            source (ModelGraph): Trained source network.
            targets (Sequence[Target]): (name, grid, series) of every target.
            budget_epochs (int): Finetuning and scratch budget.
            policies (Iterable[PolicyName]): Policies to run.
            seeds (Sequence[int]): Seeds repeated for every approach.
            train_cfg (Optional[TrainConfig]): Batch size, optimizer and patience.
            data_cfg (Optional[DataConfig]): Target preprocessing.
            full_scratch_epochs (int): Epochs of the fully trained scratch row.
            strict_t1 (bool): Add the zero-training T1 row where possible.

        Returns:
            pd.DataFrame: One row per (target, approach, seed) with columns
            target, policy, nse, pbias_pct, rsr, grids, budget_epochs, seed.
        """
        policies = [PolicyName(p) for p in policies]
        train_cfg = train_cfg or TrainConfig()
        rows: List[dict] = []

        def add(name: str, approach: str, report: MetricReport, grids: int, epochs: int, seed: int) -> None:
            rows.append({"target": name, "policy": approach, "nse": report.nse, "pbias_pct": report.pbias,
                         "rsr": report.rsr, "grids": grids, "budget_epochs": epochs, "seed": seed})

        for name, grid, series in targets:
            prepared = TransferService.prepare_target(source, grid, series, data_cfg)
            grids = grid.grid_count
            for seed in seeds:
                add(name, "scratch", TransferService.scratch(source, prepared, budget_epochs, seed, train_cfg),
                    grids, budget_epochs, seed)
                if full_scratch_epochs > 0:
                    report = TransferService.scratch(source, prepared, full_scratch_epochs, seed, train_cfg,
                                                     patience=train_cfg.patience)
                    add(name, "scratch_full", report, grids, full_scratch_epochs, seed)
                for policy in policies:
                    _, _, report = TransferService.finetune_model(source, prepared, FreezePolicy.of(policy),
                                                                  budget_epochs, seed, train_cfg)
                    add(name, policy.value, report, grids, budget_epochs, seed)
                if strict_t1 and grids == source.config.grid_count:
                    _, _, report = TransferService.finetune_model(source, prepared, FreezePolicy.strict_t1(),
                                                                  0, seed, train_cfg)
                    add(name, "T1_strict", report, grids, 0, seed)
        return pd.DataFrame(rows, columns=COMPARISON_COLUMNS)

    @staticmethod
    def median_nse(table: pd.DataFrame) -> pd.DataFrame:
        """Median NSE over seeds, one row per target and one column per approach."""
        return table.pivot_table(index="target", columns="policy", values="nse", aggfunc="median")

    @staticmethod
    def load_targets(paths: Sequence[Path]) -> List[Target]:
        """Read every target directory; the directory name becomes the target name."""
        targets = []
        for path in paths:
            grid, series = DataPipeService.load_series_csv(Path(path))
            name = Path(path).name if Path(path).is_dir() else Path(path).parent.name
            targets.append((name, grid, series))
        return targets
