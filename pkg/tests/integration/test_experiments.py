"""
Statistical experiments on synthetic watersheds.

These train many models and are deselected by default; run them with
``pytest -m slow``.
"""
import numpy as np
import pytest

from hydrodeep.schemas.model import AdamConfig, ModelConfig, TrainConfig
from hydrodeep.schemas.synth import SynthSpec
from hydrodeep.services.model_service import ModelService
from hydrodeep.services.synth_service import SynthService
from hydrodeep.services.transfer_service import TransferService
from hydrodeep.utils.enums import Arch, PolicyName, ShiftMode

pytestmark = pytest.mark.slow

SEEDS = range(5)
MEDIUM_SIZES = {
    "conv_filters": 16,
    "lstm_layers": 4,
    "lstm_units": 16,
    "dropout_rate": 0.0,
    "dense_units": 16,
    "adapter_units": 8,
    "aux_units": 8,
}


def medium_config(arch: Arch, grid_count: int, seed: int = 0) -> ModelConfig:
    return ModelConfig(arch=arch, lag=7, grid_count=grid_count, seed=seed, **MEDIUM_SIZES)


class TestMemorization:
    """Capacity check on noise-free data."""

    def test_training_nse(self):
        """Training NSE reaches 0.95 on a noise-free watershed."""
        ws = SynthService.generate(SynthSpec(grid_count=8, days=600, noise_std=0.0, seed=21))
        result = ModelService.fit(ws.grid, ws.series, medium_config(Arch.HYDRODEEP, 8),
                                  TrainConfig(epochs=300, batch_size=32, adam=AdamConfig(learning_rate=1e-3)))
        train_report = ModelService.evaluate(result.model, result.prepared.train, result.prepared.scaler)
        assert train_report.nse >= 0.95


class TestAblation:
    """Process-based runoff inputs against precipitation-only inputs."""

    def test_runoff_inputs_help(self):
        """Median test NSE of HydroDeep exceeds that of the ablation."""
        scores = {Arch.HYDRODEEP: [], Arch.DL_ABLATION: []}
        train_cfg = TrainConfig(epochs=60, batch_size=32, patience=10)
        for seed in SEEDS:
            ws = SynthService.generate(SynthSpec(grid_count=6, days=900, noise_std=0.1, seed=100 + seed))
            for arch in scores:
                result = ModelService.fit(ws.grid, ws.series, medium_config(arch, 6, seed),
                                          train_cfg.copy(update={"seed": seed}))
                scores[arch].append(result.report.nse)
        assert np.median(scores[Arch.HYDRODEEP]) > np.median(scores[Arch.DL_ABLATION])


class TestTransferOrdering:
    """Which freeze policy suits which kind of shift."""

    @pytest.mark.parametrize("mode,better", [
        (ShiftMode.SPATIAL, PolicyName.T4),
        (ShiftMode.TEMPORAL, PolicyName.T3),
        (ShiftMode.BOTH, PolicyName.T2),
    ])
    def test_policy_beats_t1(self, mode, better):
        """Retraining the shifted group helps over training only adapter and head."""
        spec = SynthSpec(grid_count=6, days=900, seed=40)
        source, target = SynthService.make_transfer_pair(spec, mode, 41)
        model = ModelService.fit(source.grid, source.series, medium_config(Arch.HYDRODEEP, 6),
                                 TrainConfig(epochs=60, batch_size=32, patience=10)).model
        table = TransferService.compare_approaches(model, [(mode.value, target.grid, target.series)],
                                                   budget_epochs=20, policies=[PolicyName.T1, better],
                                                   seeds=list(SEEDS), train_cfg=TrainConfig(batch_size=32))
        median = TransferService.median_nse(table)
        assert median.loc[mode.value, better.value] >= median.loc[mode.value, PolicyName.T1.value]

    def test_full_finetune_beats_t1_per_seed_on_temporal_shift(self):
        """Retraining every group wins over T1 in at least 4 of 5 seeds."""
        spec = SynthSpec(grid_count=6, days=900, seed=50)
        source, target = SynthService.make_transfer_pair(spec, ShiftMode.TEMPORAL, 51)
        model = ModelService.fit(source.grid, source.series, medium_config(Arch.HYDRODEEP, 6),
                                 TrainConfig(epochs=60, batch_size=32, patience=10)).model
        table = TransferService.compare_approaches(model, [("temporal", target.grid, target.series)],
                                                   budget_epochs=20, policies=[PolicyName.T1, PolicyName.T2],
                                                   seeds=list(SEEDS), train_cfg=TrainConfig(batch_size=32))
        by_seed = table.pivot(index="seed", columns="policy", values="nse")
        wins = int((by_seed[PolicyName.T2.value] >= by_seed[PolicyName.T1.value]).sum())
        assert len(by_seed) == len(SEEDS)
        assert wins >= 4
