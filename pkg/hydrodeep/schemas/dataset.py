"""
Pydantic schemas for the normalized, windowed supervised dataset.
"""
from typing import List

import numpy as np
import pandas as pd
from pydantic import BaseModel, Extra, Field, root_validator


class DataConfig(BaseModel):
    """
    Preprocessing settings.

    Attributes:
        weight_exponent (float): Exponent of the inverse-distance weights.
        weight_floor (float): Distance offset in km keeping weights finite at d=0.
        train_frac (float): Share of samples used for training plus validation.
        val_frac_of_train (float): Share of that span held out for validation.
    """
    weight_exponent: float = Field(1.0, gt=0.0)
    weight_floor: float = Field(0.1, ge=0.0)
    train_frac: float = Field(0.7, gt=0.0, lt=1.0)
    val_frac_of_train: float = Field(0.25, ge=0.0, lt=1.0)

    class Config:
        extra = Extra.forbid


class Scaler(BaseModel):
    """
    Per-column min-max statistics fitted on training rows only.

    Attributes:
        columns (List[str]): Column names (p_1..p_L, r_1..r_L, discharge).
        minimum (List[float]): Per-column minimum.
        maximum (List[float]): Per-column maximum.
        degenerate (List[str]): Columns with max == min; they map to 0.0.
    """
    columns: List[str]
    minimum: List[float]
    maximum: List[float]
    degenerate: List[str] = []

    class Config:
        extra = Extra.forbid

    @root_validator(skip_on_failure=True)
    def ordered_bounds(cls, values):
        if not len(values["columns"]) == len(values["minimum"]) == len(values["maximum"]):
            raise ValueError("scaler columns and bounds differ in length")
        if any(hi < lo for lo, hi in zip(values["minimum"], values["maximum"])):
            raise ValueError("scaler maximum below minimum")
        return values

    def bounds(self, column: str):
        """(min, max) of one column."""
        k = self.columns.index(column)
        return self.minimum[k], self.maximum[k]


class WindowedDataset(BaseModel):
    """
    Lag-windowed two-input samples.

    Attributes:
        input1 (np.ndarray): (N, lag, W1) days t-lag..t-1 of weighted precip,
            runoff and past discharge (the last column).
        input2 (np.ndarray): (N, W2) day-t weighted precip and runoff.
        target (np.ndarray): (N,) normalized discharge at day t.
        target_raw (np.ndarray): (N,) discharge at day t in m3/s.
        day_index (np.ndarray): (N,) position of day t in the source series.
        dates (pd.DatetimeIndex): Calendar day t of every sample.
    """
    input1: np.ndarray
    input2: np.ndarray
    target: np.ndarray
    target_raw: np.ndarray
    day_index: np.ndarray
    dates: pd.DatetimeIndex

    class Config:
        arbitrary_types_allowed = True
        extra = Extra.forbid

    @root_validator(skip_on_failure=True)
    def aligned_samples(cls, values):
        n = values["input1"].shape[0]
        for key in ("input2", "target", "target_raw", "day_index"):
            if values[key].shape[0] != n:
                raise ValueError(f"{key} has {values[key].shape[0]} samples, input1 has {n}")
        if len(values["dates"]) != n:
            raise ValueError("dates do not match the sample count")
        return values

    def __len__(self) -> int:
        return int(self.input1.shape[0])

    @property
    def lag(self) -> int:
        return int(self.input1.shape[1])

    def subset(self, start: int, stop: int) -> "WindowedDataset":
        """Contiguous block of samples ``start:stop``."""
        return WindowedDataset(
            input1=self.input1[start:stop],
            input2=self.input2[start:stop],
            target=self.target[start:stop],
            target_raw=self.target_raw[start:stop],
            day_index=self.day_index[start:stop],
            dates=self.dates[start:stop],
        )


class PreparedData(BaseModel):
    """
    Output of the full preprocessing pipeline for one watershed.

    Attributes:
        dataset (WindowedDataset): All samples in chronological order.
        train (WindowedDataset): Earliest block.
        val (WindowedDataset): Block following train.
        test (WindowedDataset): Final block.
        scaler (Scaler): Statistics of the training rows.
        weights (np.ndarray): Distance weights applied to precipitation.
    """
    dataset: WindowedDataset
    train: WindowedDataset
    val: WindowedDataset
    test: WindowedDataset
    scaler: Scaler
    weights: np.ndarray

    class Config:
        arbitrary_types_allowed = True
