"""
Service for turning gridded watershed series into windowed samples.

This module provides the distance weighting, min-max scaling, lag windowing,
chronological splitting and CSV reading/writing of the data pipeline.
"""
import csv
import logging
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import ValidationError

from hydrodeep.config.settings import settings
from hydrodeep.schemas.dataset import DataConfig, PreparedData, Scaler, WindowedDataset
from hydrodeep.schemas.grid import GridSpec, SeriesTable
from hydrodeep.utils.exceptions import (
    DataError,
    DataParseError,
    DimensionError,
    InsufficientHistoryError,
    ParameterError,
)
from hydrodeep.utils.helpers import as_float_array, chronological_split_sizes

logger = logging.getLogger(__name__)

DISCHARGE = "discharge"
SERIES_FILE = "series.csv"
GRID_FILE = "grid.csv"
GRID_COLUMNS = ["grid_id", "x", "y", "dist_km"]


def series_columns(grid_count: int) -> List[str]:
    """Value columns of a series CSV for ``grid_count`` grids, in file order."""
    return ([f"p_{i}" for i in range(1, grid_count + 1)]
            + [f"r_{i}" for i in range(1, grid_count + 1)]
            + [DISCHARGE])


class DataPipeService:
    """
    Service class for the preprocessing pipeline.

    Every step is a pure function; the scaler is fitted on training rows only.
    """

    @staticmethod
    def distance_weights(distances: Sequence[float], exponent: float = 1.0, floor: float = 0.1) -> np.ndarray:
        """
        Inverse-distance precipitation weights normalized to mean 1.

        ``raw_i = 1 / (d_i + floor) ** exponent`` and ``w_i = L * raw_i / sum(raw)``,
        so closer grids weigh more and the weights sum to L.

        Args:
            distances (Sequence[float]): Distance of each grid to the river, km.
            exponent (float): Decay exponent, positive.
            floor (float): Offset keeping the weight of a grid on the river finite.

        Returns:
            np.ndarray: (L,) weights.

        Raises:
            ParameterError: If ``distances`` is empty or a weight would be infinite.
        """
        d = as_float_array(distances, "distances").ravel()
        if d.size == 0:
            raise ParameterError("distance_weights needs at least one distance")
        if exponent <= 0:
            raise ParameterError(f"exponent must be positive, got {exponent}")
        if np.any(d < 0) or floor < 0:
            raise ParameterError("distances and floor must be non-negative")
        shifted = d + floor
        if np.any(shifted == 0):
            raise ParameterError("zero distance with zero floor gives an infinite weight")
        raw = shifted ** -exponent
        return d.size * raw / raw.sum()

    @staticmethod
    def apply_weights(precip: np.ndarray, weights: np.ndarray) -> np.ndarray:
        """
        Elementwise product of every day's precipitation row with the weights.

        Raises:
            DimensionError: If the grid counts differ.
        """
        precip = as_float_array(precip, "precip")
        weights = as_float_array(weights, "weights")
        if precip.shape[-1] != weights.shape[-1]:
            raise DimensionError(f"precip has {precip.shape[-1]} grids, weights have {weights.shape[-1]}")
        return precip * weights

    @staticmethod
    def fit_scaler(rows: np.ndarray, columns: Sequence[str]) -> Scaler:
        """
        Fit per-column min-max statistics.

        Args:
            rows (np.ndarray): (n, C) training rows.
            columns (Sequence[str]): Names of the C columns.

        Returns:
            Scaler: Fitted statistics; constant columns are recorded as degenerate.

        Raises:
            DataError: If there are no rows to fit on.
        """
        rows = as_float_array(rows, "rows")
        if rows.ndim != 2 or rows.shape[1] != len(columns):
            raise DimensionError(f"rows shape {rows.shape} does not match {len(columns)} columns")
        if rows.shape[0] == 0:
            raise DataError("cannot fit a scaler on zero rows")
        lo = rows.min(axis=0)
        hi = rows.max(axis=0)
        degenerate = [c for c, a, b in zip(columns, lo, hi) if a == b]
        if degenerate:
            logger.warning("Degenerate scaler columns map to 0.0: %s", ", ".join(degenerate))
        return Scaler(columns=list(columns), minimum=lo.tolist(), maximum=hi.tolist(), degenerate=degenerate)

    @staticmethod
    def transform(scaler: Scaler, rows: np.ndarray) -> np.ndarray:
        """Map columns to ``(x - min) / (max - min)``; degenerate columns become 0.0."""
        rows = as_float_array(rows, "rows")
        if rows.shape[-1] != len(scaler.columns):
            raise DimensionError(f"rows have {rows.shape[-1]} columns, scaler has {len(scaler.columns)}")
        lo = np.asarray(scaler.minimum)
        span = np.asarray(scaler.maximum) - lo
        safe = np.where(span == 0, 1.0, span)
        return np.where(span == 0, 0.0, (rows - lo) / safe)

    @staticmethod
    def inverse_transform_discharge(scaler: Scaler, values: np.ndarray) -> np.ndarray:
        """Map normalized discharge back to m3/s."""
        lo, hi = scaler.bounds(DISCHARGE)
        return np.asarray(values, dtype=np.float64) * (hi - lo) + lo

    @staticmethod
    def feature_rows(series: SeriesTable, weights: np.ndarray, use_runoff_inputs: bool = True) -> Tuple[np.ndarray, List[str]]:
        """
        Day-by-day feature rows ``[p~_1..p~_L, r_1..r_L, discharge]``.

        Runoff columns are left out when ``use_runoff_inputs`` is False.
        """
        L = series.grid_count
        blocks = [DataPipeService.apply_weights(series.precip, weights)]
        names = [f"p_{i}" for i in range(1, L + 1)]
        if use_runoff_inputs:
            blocks.append(series.runoff)
            names += [f"r_{i}" for i in range(1, L + 1)]
        blocks.append(series.discharge[:, None])
        names.append(DISCHARGE)
        return np.concatenate(blocks, axis=1), names

    @staticmethod
    def make_windows(rows: np.ndarray, lag: int, dates: Optional[pd.DatetimeIndex] = None,
                     raw_discharge: Optional[np.ndarray] = None) -> WindowedDataset:
        """
        Slide a ``lag``-day window over daily feature rows with a step of one day.

        Sample ``n`` targets day ``t = lag + n``; its Input 1 holds the full
        rows of days ``t - lag .. t - 1`` (past discharge is the last column)
        and its Input 2 holds day ``t`` without the discharge column.

        Args:
            rows (np.ndarray): (T, W) weighted and scaled rows, discharge last.
            lag (int): Look-back window in days.
            dates (Optional[pd.DatetimeIndex]): Calendar days of the rows.
            raw_discharge (Optional[np.ndarray]): (T,) unscaled discharge for ``target_raw``.

        Returns:
            WindowedDataset: ``T - lag`` samples.

        Raises:
            ParameterError: If ``lag`` < 1.
            InsufficientHistoryError: If ``T <= lag``.
        """
        rows = as_float_array(rows, "rows")
        if lag < 1:
            raise ParameterError(f"lag must be at least 1, got {lag}")
        steps = rows.shape[0]
        if steps <= lag:
            raise InsufficientHistoryError(f"{steps} days cannot fill a window of lag {lag}")
        if dates is None:
            dates = pd.date_range("2000-01-01", periods=steps, freq="D")
        if raw_discharge is None:
            raw_discharge = rows[:, -1]
        windows = np.lib.stride_tricks.sliding_window_view(rows, lag, axis=0)
        input1 = np.ascontiguousarray(np.swapaxes(windows[: steps - lag], 1, 2))
        day_index = np.arange(lag, steps)
        return WindowedDataset(
            input1=input1,
            input2=rows[lag:, :-1].copy(),
            target=rows[lag:, -1].copy(),
            target_raw=np.asarray(raw_discharge, dtype=np.float64)[lag:].copy(),
            day_index=day_index,
            dates=dates[lag:],
        )

    @staticmethod
    def split(dataset: WindowedDataset, train_frac: float = 0.7,
              val_frac_of_train: float = 0.25) -> Tuple[WindowedDataset, WindowedDataset, WindowedDataset]:
        """
        Chronological train/validation/test split.

        Returns:
            Tuple[WindowedDataset, WindowedDataset, WindowedDataset]: Contiguous
            blocks in time order.
        """
        n_train, n_val, _ = chronological_split_sizes(len(dataset), train_frac, val_frac_of_train)
        return (dataset.subset(0, n_train),
                dataset.subset(n_train, n_train + n_val),
                dataset.subset(n_train + n_val, len(dataset)))

    @staticmethod
    def prepare(grid: GridSpec, series: SeriesTable, lag: int, data_cfg: Optional[DataConfig] = None,
                use_runoff_inputs: bool = True, scaler: Optional[Scaler] = None) -> PreparedData:
        """
        Run weights, scaling, windowing and splitting for one watershed.

        The scaler is fitted on the days the training samples draw from
        (the first ``lag + n_train`` rows) unless one is passed in.

        Args:
            grid (GridSpec): Layout, for distances.
            series (SeriesTable): Raw series.
            lag (int): Look-back window.
            data_cfg (Optional[DataConfig]): Weighting and split settings.
            use_runoff_inputs (bool): Keep the process-based runoff columns.
            scaler (Optional[Scaler]): Pre-fitted scaler, e.g. from a checkpoint.

        Returns:
            PreparedData: Dataset, splits, scaler and weights.
        """
        data_cfg = data_cfg or DataConfig()
        if grid.grid_count != series.grid_count:
            raise DimensionError(f"grid file has {grid.grid_count} grids, series has {series.grid_count}")
        if series.steps <= lag:
            raise InsufficientHistoryError(f"{series.steps} days cannot fill a window of lag {lag}")
        weights = DataPipeService.distance_weights(grid.distances, data_cfg.weight_exponent, data_cfg.weight_floor)
        rows, names = DataPipeService.feature_rows(series, weights, use_runoff_inputs)
        n_train, _, _ = chronological_split_sizes(series.steps - lag, data_cfg.train_frac, data_cfg.val_frac_of_train)
        if scaler is None:
            if n_train == 0:
                raise DataError(f"{series.steps} days leave no training samples at lag {lag}")
            scaler = DataPipeService.fit_scaler(rows[: lag + n_train], names)
        elif scaler.columns != names:
            raise DimensionError("scaler columns do not match the series layout")
        scaled = DataPipeService.transform(scaler, rows)
        dataset = DataPipeService.make_windows(scaled, lag, series.dates, series.discharge)
        train, val, test = DataPipeService.split(dataset, data_cfg.train_frac, data_cfg.val_frac_of_train)
        logger.info("Prepared %d samples (train %d, val %d, test %d) at lag %d",
                    len(dataset), len(train), len(val), len(test), lag)
        return PreparedData(dataset=dataset, train=train, val=val, test=test, scaler=scaler, weights=weights)

    @staticmethod
    def _resolve_paths(path: Path) -> Tuple[Path, Path]:
        path = Path(path)
        if path.is_dir():
            return path / SERIES_FILE, path / GRID_FILE
        return path, path.parent / GRID_FILE

    @staticmethod
    def _read_rows(path: Path) -> List[List[str]]:
        """Decode ``path`` line by line so encoding errors carry a line number."""
        with open(path, "rb") as handle:
            raw_lines = handle.read().splitlines()
        lines = []
        for line_no, raw in enumerate(raw_lines, start=1):
            try:
                lines.append(raw.decode("utf-8"))
            except UnicodeDecodeError:
                raise DataParseError(f"{path}:{line_no}: not valid UTF-8")
        rows = list(csv.reader(lines))
        if not rows:
            raise DataParseError(f"{path}:1: file is empty")
        return rows

    @staticmethod
    def _scan_rows(path: Path, rows: List[List[str]], width: int, numeric_from: int) -> None:
        for line_no, row in enumerate(rows, start=1):
            if len(row) != width:
                raise DataParseError(f"{path}:{line_no}: expected {width} fields, found {len(row)}")
            if line_no == 1:
                continue
            for cell in row[numeric_from:]:
                text = cell.strip()
                if text == "" or text.lower() == "nan":
                    raise DataParseError(f"{path}:{line_no}: missing or NaN value")
                try:
                    value = float(text)
                except ValueError:
                    raise DataParseError(f"{path}:{line_no}: {text!r} is not a number")
                if not np.isfinite(value):
                    raise DataParseError(f"{path}:{line_no}: non-finite value {text!r}")

    @staticmethod
    def load_grid_csv(path: Path) -> GridSpec:
        """
        Read ``grid_id,x,y,dist_km`` rows.

        Raises:
            DataParseError: If the file is missing or malformed.
        """
        if not Path(path).exists():
            raise DataParseError(f"{path}: file not found")
        DataPipeService._scan_rows(path, DataPipeService._read_rows(path), len(GRID_COLUMNS), numeric_from=1)
        try:
            frame = pd.read_csv(path, dtype={"grid_id": str}, float_precision="round_trip")
        except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
            raise DataParseError(f"{path}: {e}")
        if list(frame.columns) != GRID_COLUMNS:
            raise DataParseError(f"{path}:1: header must be {','.join(GRID_COLUMNS)}")
        try:
            return GridSpec(grid_ids=frame["grid_id"].tolist(), x=frame["x"].tolist(),
                            y=frame["y"].tolist(), dist_km=frame["dist_km"].tolist())
        except ValidationError as e:
            raise DataParseError(f"{path}: {e.errors()[0]['msg']}")

    @staticmethod
    def load_series_csv(path: Path) -> Tuple[GridSpec, SeriesTable]:
        """
        Read a watershed from ``series.csv`` and its companion ``grid.csv``.

        Args:
            path (Path): A directory holding both files, or the series file
                itself with ``grid.csv`` next to it.

        Returns:
            Tuple[GridSpec, SeriesTable]: Layout and series.

        Raises:
            DataParseError: On bytes that are not UTF-8, ragged rows, non-numeric
                or NaN cells, a bad header, invalid dates or dates that are not
                consecutive days; the message names the line.
        """
        series_path, grid_path = DataPipeService._resolve_paths(path)
        if not series_path.exists():
            raise DataParseError(f"{series_path}: file not found")
        grid = DataPipeService.load_grid_csv(grid_path)
        expected = ["date"] + series_columns(grid.grid_count)
        rows = DataPipeService._read_rows(series_path)
        if rows[0] != expected:
            raise DataParseError(f"{series_path}:1: header does not match {grid.grid_count} grids "
                                 f"(expected date,p_1..p_L,r_1..r_L,discharge)")
        DataPipeService._scan_rows(series_path, rows, len(expected), numeric_from=1)
        try:
            frame = pd.read_csv(series_path, dtype={"date": str}, float_precision="round_trip")
        except pd.errors.ParserError as e:
            raise DataParseError(f"{series_path}: {e}")
        parsed = pd.to_datetime(frame["date"], format="%Y-%m-%d", errors="coerce")
        bad_dates = np.flatnonzero(parsed.isna().to_numpy())
        if bad_dates.size:
            first = bad_dates[0]
            raise DataParseError(f"{series_path}:{first + 2}: invalid date {frame['date'].iloc[first]!r}")
        dates = pd.DatetimeIndex(parsed)
        values = frame[expected[1:]].to_numpy(dtype=np.float64)
        gaps = np.flatnonzero(np.diff(dates.values) != np.timedelta64(1, "D"))
        if gaps.size:
            raise DataParseError(f"{series_path}:{gaps[0] + 3}: dates are not consecutive days")
        L = grid.grid_count
        series = SeriesTable(dates=dates, precip=values[:, :L], runoff=values[:, L:2 * L], discharge=values[:, -1])
        logger.info("Loaded %d days for %d grids from %s", series.steps, L, series_path)
        return grid, series

    @staticmethod
    def write_series_csv(grid: GridSpec, series: SeriesTable, out_dir: Path, float_format: Optional[str] = None) -> Path:
        """
        Write ``series.csv`` and ``grid.csv`` into ``out_dir``.

        Returns:
            Path: ``out_dir``.
        """
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        float_format = float_format or settings.float_format
        grid_frame = pd.DataFrame({"grid_id": grid.grid_ids, "x": grid.x, "y": grid.y, "dist_km": grid.dist_km})
        grid_frame.to_csv(out_dir / GRID_FILE, index=False, float_format=float_format)
        values = np.concatenate([series.precip, series.runoff, series.discharge[:, None]], axis=1)
        frame = pd.DataFrame(values, columns=series_columns(series.grid_count))
        frame.insert(0, "date", series.dates.strftime("%Y-%m-%d"))
        frame.to_csv(out_dir / SERIES_FILE, index=False, float_format=float_format)
        return out_dir
