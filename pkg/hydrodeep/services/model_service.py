"""
Service for assembling, training and evaluating discharge networks.

This module builds HydroDeep and the baseline architectures on top of the
engine, runs the minibatch Adam training loop and evaluates predictions in
physical units.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
import pandas as pd
from tqdm import tqdm

from hydrodeep.config.settings import settings
from hydrodeep.engine.functional import mse_grad, mse_loss
from hydrodeep.engine.graph import DROPOUT_STREAM, ModelGraph, backward
from hydrodeep.engine.layers import GRU, LSTM, BiLSTM, Conv1D, Dense, Dropout, Flatten, Layer, MaxPool1D
from hydrodeep.engine.optim import adam_step
from hydrodeep.schemas.dataset import DataConfig, PreparedData, Scaler, WindowedDataset
from hydrodeep.schemas.grid import GridSpec, SeriesTable
from hydrodeep.schemas.metrics import MetricReport
from hydrodeep.schemas.model import EpochRecord, ModelConfig, TrainConfig, TrainHistory
from hydrodeep.services.datapipe_service import DataPipeService
from hydrodeep.services.metrics_service import MetricsService
from hydrodeep.utils.enums import Activation, Arch, LayerGroup, Mode
from hydrodeep.utils.exceptions import DataError, DimensionError
from hydrodeep.utils.helpers import make_rng

logger = logging.getLogger(__name__)

SHUFFLE_STREAM = 201

_RECURRENT = {
    Arch.HYDRODEEP: LSTM,
    Arch.DL_ABLATION: LSTM,
    Arch.LSTM: LSTM,
    Arch.GRU: GRU,
    Arch.BILSTM: BiLSTM,
}
_CONVOLUTIONAL = {Arch.HYDRODEEP, Arch.DL_ABLATION, Arch.CNN}


@dataclass
class FitResult:
    """Everything produced by one prepare-build-train-evaluate run."""
    model: ModelGraph
    prepared: PreparedData
    history: TrainHistory
    report: MetricReport


class ModelService:
    """
    Service class for network construction, training and evaluation.
    """

    @staticmethod
    def build_model(cfg: ModelConfig) -> ModelGraph:
        """
        Assemble the network named by ``cfg.arch``.

        Every architecture starts with the input adapter (a per-day linear
        projection of Input 1 and a linear projection of Input 2) and ends
        with the same head: concatenation, relu dense layer, linear output.
        HydroDeep stacks convolutions, max pooling, recurrent layers and
        dropout in between; ``cnn`` flattens after pooling instead of
        recurring, and the recurrent baselines skip the convolutions.

        Args:
            cfg (ModelConfig): Architecture and sizes.

        Returns:
            ModelGraph: Initialised graph seeded by ``cfg.seed``.

        Raises:
            BuildError: If a stage cannot be built, e.g. the pooled length is 0.
        """
        arch = Arch(cfg.arch)
        sequence: List[Layer] = [Dense("adapter_seq", LayerGroup.INPUT_ADAPTER, cfg.adapter_units)]
        if arch in _CONVOLUTIONAL:
            for i in range(1, cfg.conv_layers + 1):
                sequence.append(Conv1D(f"conv_{i}", LayerGroup.SPATIAL, cfg.conv_filters, cfg.kernel_width,
                                       Activation.TANH))
            sequence.append(MaxPool1D("pool", LayerGroup.SPATIAL, cfg.pool_size))
        if arch == Arch.CNN:
            sequence.append(Flatten("flatten", LayerGroup.SPATIAL))
        else:
            cell = _RECURRENT[arch]
            for i in range(1, cfg.lstm_layers + 1):
                sequence.append(cell(f"{cell.kind}_{i}", LayerGroup.TEMPORAL, cfg.lstm_units,
                                     return_sequence=i < cfg.lstm_layers))
            sequence.append(Dropout("dropout", LayerGroup.TEMPORAL, cfg.dropout_rate))
        aux = [Dense("adapter_aux", LayerGroup.INPUT_ADAPTER, cfg.aux_units)]
        head = [
            Dense("dense", LayerGroup.HEAD, cfg.dense_units, Activation.RELU),
            Dense("output", LayerGroup.HEAD, 1),
        ]
        model = ModelGraph(sequence, aux, head, (cfg.lag, cfg.input1_width), cfg.input2_width,
                           seed=cfg.seed, config=cfg)
        logger.debug("Built %s with %d parameters", arch.value, model.parameter_count())
        return model

    @staticmethod
    def forward(model: ModelGraph, input1: np.ndarray, input2: Optional[np.ndarray] = None,
                mode: Mode = Mode.EVAL) -> np.ndarray:
        """Predictions in normalized units for a batch."""
        pred, _ = model.forward(input1, input2, mode)
        return pred

    @staticmethod
    def loss(model: ModelGraph, dataset: WindowedDataset) -> float:
        """Eval-mode MSE over a whole dataset."""
        return mse_loss(model.predict(dataset.input1, dataset.input2), dataset.target)

    @staticmethod
    def train(model: ModelGraph, train: WindowedDataset, val: Optional[WindowedDataset],
              cfg: TrainConfig) -> TrainHistory:
        """
        Minibatch Adam on the MSE loss.

        Batches are drawn from a permutation seeded by ``cfg.seed`` and the
        dropout generator is reseeded from it too, so a run is a pure
        function of its inputs. The recorded losses are eval-mode losses on
        the full splits after every epoch. With ``patience`` set and a
        non-empty validation split, training stops once validation loss has
        not improved for ``patience`` epochs and the best parameters are
        restored.

        Args:
            model (ModelGraph): Network to update in place.
            train (WindowedDataset): Training samples.
            val (Optional[WindowedDataset]): Validation samples.
            cfg (TrainConfig): Epochs, batch size, optimizer and seed.

        Returns:
            TrainHistory: Initial loss and one record per completed epoch.

        Raises:
            DataError: If the training split is empty.
        """
        if len(train) == 0:
            raise DataError("training split is empty")
        if train.input1.shape[1:] != model.input1_shape:
            raise DimensionError(f"training windows {train.input1.shape[1:]} do not fit the model {model.input1_shape}")
        use_val = val is not None and len(val) > 0
        shuffle_rng = make_rng(cfg.seed, SHUFFLE_STREAM)
        model.rng = make_rng(cfg.seed, DROPOUT_STREAM)
        history = TrainHistory(initial_train_loss=ModelService.loss(model, train))
        best_loss, best_state, waited = np.inf, None, 0
        n = len(train)
        epochs = range(1, cfg.epochs + 1)
        for epoch in tqdm(epochs, desc="train", unit="epoch", disable=not settings.progress):
            order = shuffle_rng.permutation(n) if cfg.shuffle else np.arange(n)
            for start in range(0, n, cfg.batch_size):
                idx = order[start:start + cfg.batch_size]
                model.store.zero_grad()
                pred, tape = model.forward(train.input1[idx], train.input2[idx], Mode.TRAIN)
                backward(tape, mse_grad(pred, train.target[idx]))
                adam_step(model.store, cfg.adam)
            record = EpochRecord(epoch=epoch, train_loss=ModelService.loss(model, train),
                                 val_loss=ModelService.loss(model, val) if use_val else None)
            history.epochs.append(record)
            logger.debug("epoch %d train %.6g val %s", epoch, record.train_loss, record.val_loss)
            if cfg.patience is None or not use_val:
                continue
            if record.val_loss < best_loss:
                best_loss, best_state, waited = record.val_loss, model.store.snapshot(), 0
                history.best_epoch = epoch
            else:
                waited += 1
                if waited >= cfg.patience:
                    history.stopped_early = True
                    logger.info("Early stopping at epoch %d, best epoch %d", epoch, history.best_epoch)
                    break
        if best_state is not None:
            model.store.restore(best_state)
        return history

    @staticmethod
    def predict_series(model: ModelGraph, dataset: WindowedDataset, scaler: Scaler) -> pd.Series:
        """
        Predicted discharge in m3/s, indexed by the target dates.
        """
        pred = model.predict(dataset.input1, dataset.input2)
        values = DataPipeService.inverse_transform_discharge(scaler, pred)
        return pd.Series(values, index=dataset.dates, name="predicted")

    @staticmethod
    def evaluate(model: ModelGraph, dataset: WindowedDataset, scaler: Scaler,
                 as_printed_pbias: bool = False) -> MetricReport:
        """
        Metrics of the inverse-transformed predictions against observed discharge.

        Args:
            model (ModelGraph): Trained network.
            dataset (WindowedDataset): Samples to evaluate, usually the test split.
            scaler (Scaler): Scaler the dataset was built with.
            as_printed_pbias (bool): Use the squared-numerator PBIAS variant.

        Returns:
            MetricReport: NSE, PBIAS and RSR in physical units.
        """
        sim = ModelService.predict_series(model, dataset, scaler).to_numpy()
        return MetricsService.report(dataset.target_raw, sim, as_printed_pbias=as_printed_pbias)

    @staticmethod
    def pb_baseline(series: SeriesTable, grid: GridSpec, area_scale: float,
                    day_index: Optional[np.ndarray] = None) -> MetricReport:
        """
        Score the process-based surrogate alone.

        Discharge is taken as ``area_scale * sum_i r[t][i]`` with no learning
        and no routing delay.

        Args:
            series (SeriesTable): Series holding the surrogate runoff.
            grid (GridSpec): Layout of the same watershed.
            area_scale (float): m3/s per mm/day of runoff on one grid.
            day_index (Optional[np.ndarray]): Days to score, e.g. the test samples'
                ``day_index``; all days when None.

        Returns:
            MetricReport: Metrics of the process-based row.
        """
        if grid.grid_count != series.grid_count:
            raise DimensionError(f"grid file has {grid.grid_count} grids, series has {series.grid_count}")
        sim = area_scale * series.runoff.sum(axis=1)
        obs = series.discharge
        if day_index is not None:
            sim, obs = sim[day_index], obs[day_index]
        return MetricsService.report(obs, sim)

    @staticmethod
    def fit(grid: GridSpec, series: SeriesTable, cfg: ModelConfig, train_cfg: TrainConfig,
            data_cfg: Optional[DataConfig] = None) -> FitResult:
        """
        Prepare data, build, train and evaluate on the test split in one call.

        Args:
            grid (GridSpec): Layout.
            series (SeriesTable): Raw series.
            cfg (ModelConfig): Network; its grid count must match the data.
            train_cfg (TrainConfig): Training loop settings.
            data_cfg (Optional[DataConfig]): Preprocessing settings.

        Returns:
            FitResult: Trained model with its data, history and test report.
        """
        prepared = DataPipeService.prepare(grid, series, cfg.lag, data_cfg, cfg.use_runoff_inputs)
        model = ModelService.build_model(cfg)
        history = ModelService.train(model, prepared.train, prepared.val, train_cfg)
        model.scaler = prepared.scaler
        report = ModelService.evaluate(model, prepared.test, prepared.scaler)
        logger.info("%s lag %d: test NSE %.4f PBIAS %.2f%% RSR %.4f",
                    Arch(cfg.arch).value, cfg.lag, report.nse, report.pbias, report.rsr)
        return FitResult(model=model, prepared=prepared, history=history, report=report)

    @staticmethod
    def history_frame(history: TrainHistory) -> pd.DataFrame:
        """Per-epoch losses as a table, epoch 0 holding the initial training loss."""
        rows = [{"epoch": 0, "train_loss": history.initial_train_loss, "val_loss": np.nan}]
        rows += [{"epoch": r.epoch, "train_loss": r.train_loss,
                  "val_loss": np.nan if r.val_loss is None else r.val_loss} for r in history.epochs]
        return pd.DataFrame(rows, columns=["epoch", "train_loss", "val_loss"])
