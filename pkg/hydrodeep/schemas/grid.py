"""
Pydantic schemas for the watershed grid layout and its daily series.
"""
from typing import List

import numpy as np
import pandas as pd
from pydantic import BaseModel, Extra, root_validator


class GridSpec(BaseModel):
    """
    Grid layout of one watershed.

    Attributes:
        grid_ids (List[str]): Grid identifiers g_1..g_L.
        x (List[float]): Planar x coordinate per grid.
        y (List[float]): Planar y coordinate per grid.
        dist_km (List[float]): Distance of each grid to the nearest river, km.
    """
    grid_ids: List[str]
    x: List[float]
    y: List[float]
    dist_km: List[float]

    class Config:
        extra = Extra.forbid

    @root_validator(skip_on_failure=True)
    def consistent_layout(cls, values):
        n = len(values["grid_ids"])
        if n < 1:
            raise ValueError("a watershed needs at least one grid")
        for key in ("x", "y", "dist_km"):
            if len(values[key]) != n:
                raise ValueError(f"{key} has {len(values[key])} entries for {n} grids")
        d = np.asarray(values["dist_km"], dtype=np.float64)
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise ValueError("distances must be finite and non-negative")
        return values

    @property
    def grid_count(self) -> int:
        return len(self.grid_ids)

    @property
    def distances(self) -> np.ndarray:
        return np.asarray(self.dist_km, dtype=np.float64)


class SeriesTable(BaseModel):
    """
    Aligned daily series of one watershed.

    Attributes:
        dates (pd.DatetimeIndex): Consecutive days.
        precip (np.ndarray): Precipitation (T, L), mm/day.
        runoff (np.ndarray): Process-based runoff (T, L), mm/day.
        discharge (np.ndarray): Observed discharge (T,), m3/s.
    """
    dates: pd.DatetimeIndex
    precip: np.ndarray
    runoff: np.ndarray
    discharge: np.ndarray

    class Config:
        arbitrary_types_allowed = True
        extra = Extra.forbid

    @root_validator(skip_on_failure=True)
    def aligned_series(cls, values):
        dates = values["dates"]
        precip = np.asarray(values["precip"], dtype=np.float64)
        runoff = np.asarray(values["runoff"], dtype=np.float64)
        discharge = np.asarray(values["discharge"], dtype=np.float64)
        steps = len(dates)
        if precip.ndim != 2 or precip.shape[0] != steps:
            raise ValueError(f"precip shape {precip.shape} does not match {steps} dates")
        if runoff.shape != precip.shape:
            raise ValueError(f"runoff shape {runoff.shape} does not match precip shape {precip.shape}")
        if discharge.shape != (steps,):
            raise ValueError(f"discharge shape {discharge.shape} does not match {steps} dates")
        for name, arr in (("precip", precip), ("runoff", runoff), ("discharge", discharge)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has missing or non-finite entries")
        if steps > 1 and not np.all(np.diff(dates.values) == np.timedelta64(1, "D")):
            raise ValueError("dates must be strictly consecutive days")
        values.update(precip=precip, runoff=runoff, discharge=discharge)
        return values

    @property
    def steps(self) -> int:
        return len(self.dates)

    @property
    def grid_count(self) -> int:
        return self.precip.shape[1]
