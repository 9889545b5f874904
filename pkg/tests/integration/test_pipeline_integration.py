"""
Integration tests running the services together on synthetic watersheds.
"""
import numpy as np
import pytest

from hydrodeep.schemas.model import AdamConfig, TrainConfig
from hydrodeep.schemas.synth import SynthSpec
from hydrodeep.schemas.transfer import FreezePolicy, TransferPlan
from hydrodeep.services.checkpoint_service import CheckpointService
from hydrodeep.services.datapipe_service import DataPipeService
from hydrodeep.services.model_service import ModelService
from hydrodeep.services.synth_service import SynthService
from hydrodeep.services.transfer_service import TransferService
from hydrodeep.utils.enums import Arch, PolicyName, ShiftMode


class TestTrainingPipeline:
    """Generate, write, read, train, checkpoint and evaluate."""

    def test_files_to_checkpoint_to_metrics(self, make_config, watershed_dir, quick_train, tmp_path):
        """A reloaded checkpoint reproduces the in-memory test report."""
        grid, series = DataPipeService.load_series_csv(watershed_dir)
        cfg = make_config(grid_count=grid.grid_count)
        result = ModelService.fit(grid, series, cfg, quick_train)
        ckpt = CheckpointService.save(result.model, tmp_path / "model.ckpt")

        model = CheckpointService.load(ckpt)
        prepared = DataPipeService.prepare(grid, series, model.config.lag, scaler=model.scaler)
        report = ModelService.evaluate(model, prepared.test, model.scaler)
        assert report == result.report

    def test_noise_free_training_improves(self, make_config):
        """Loss falls on a noise-free watershed."""
        ws = SynthService.generate(SynthSpec(grid_count=3, days=200, noise_std=0.0, seed=4))
        cfg = make_config(grid_count=3)
        result = ModelService.fit(ws.grid, ws.series, cfg,
                                  TrainConfig(epochs=20, batch_size=16, adam=AdamConfig(learning_rate=5e-3)))
        assert result.history.train_losses[-1] < result.history.initial_train_loss

    def test_every_architecture_fits(self, make_config, small_watershed):
        """All architectures go through the same pipeline."""
        for arch in Arch:
            cfg = make_config(arch, grid_count=small_watershed.grid.grid_count)
            result = ModelService.fit(small_watershed.grid, small_watershed.series, cfg,
                                      TrainConfig(epochs=1, batch_size=32))
            assert np.isfinite(result.report.nse), arch


class TestTransferPipeline:
    """Source training followed by finetuning on shifted targets."""

    @pytest.mark.parametrize("mode", list(ShiftMode))
    def test_shift_targets(self, make_config, quick_train, tmp_path, mode):
        """Every shift mode finetunes with frozen groups intact."""
        spec = SynthSpec(grid_count=4, days=120, seed=6, target_grid_count=5)
        source, target = SynthService.make_transfer_pair(spec, mode, 60)
        cfg = make_config(grid_count=source.grid.grid_count)
        model = ModelService.fit(source.grid, source.series, cfg, quick_train).model
        ckpt = CheckpointService.save(model, tmp_path / "source.ckpt")
        target_dir = DataPipeService.write_series_csv(target.grid, target.series, tmp_path / mode.value)

        for policy in PolicyName:
            plan = TransferPlan(source_checkpoint=ckpt, target_watershed=mode.value, target_data=target_dir,
                                policy=policy, budget_epochs=1)
            tuned, report = TransferService.finetune(plan, TrainConfig(batch_size=16))
            assert tuned.config.grid_count == target.grid.grid_count
            for name in model.store.names():
                if model.store[name].group in FreezePolicy.of(policy).frozen_groups:
                    assert tuned.store[name].value.tobytes() == model.store[name].value.tobytes()
            assert np.isfinite(report.nse)
