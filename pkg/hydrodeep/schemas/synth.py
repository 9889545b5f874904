"""
Pydantic schemas for synthetic watershed generation.
"""
from typing import Optional

import numpy as np
from pydantic import BaseModel, Extra, Field, root_validator

from hydrodeep.schemas.grid import GridSpec, SeriesTable


class SynthSpec(BaseModel):
    """
    Parameters of a synthetic watershed and its process-based surrogate.

    Grids are scattered over a rectangle whose centre line ``y = 0`` is the
    river, so a grid's distance to the river is ``|y|``.

    Attributes:
        grid_count (int): Number of grids L.
        days (int): Length T of the generated series.
        start_date (str): ISO date of the first day.
        extent_km (float): Along-river extent of the layout.
        half_width_km (float): Largest distance from the river.
        spatial_cv (float): Coefficient of variation of the static per-grid rain factor.
        storm_rate (float): Mean storm events per day (Poisson).
        mean_depth_mm (float): Mean depth of one storm event (exponential).
        storm_cell_cv (float): Coefficient of variation of the daily per-grid rain jitter.
        k_min (float): Lower bound of the reservoir constants, 1/day.
        k_max (float): Upper bound of the reservoir constants, 1/day.
        delay_per_km (float): Routing delay in days per km of river distance.
        grid_area_km2 (float): Area of one grid, converts mm/day to m3/s.
        noise_std (float): Sigma of the multiplicative lognormal discharge noise.
        seed (int): Base seed of every generator.
        layout_seed (Optional[int]): Overrides ``seed`` for coordinates and rain factors.
        weather_seed (Optional[int]): Overrides ``seed`` for the storm process.
        reservoir_seed (Optional[int]): Overrides ``seed`` for reservoir constants.
        noise_seed (Optional[int]): Overrides ``seed`` for observation noise.
        target_grid_count (Optional[int]): Grid count of spatially shifted targets.
        temporal_k_factor (float): Scale on [k_min, k_max] for temporally shifted targets.
        temporal_rate_factor (float): Scale on storm_rate for temporally shifted targets.
        temporal_depth_factor (float): Scale on mean_depth_mm for temporally shifted targets.
    """
    grid_count: int = Field(29, ge=1)
    days: int = Field(3000, ge=1)
    start_date: str = "2000-01-01"
    extent_km: float = Field(40.0, gt=0.0)
    half_width_km: float = Field(10.0, gt=0.0)
    spatial_cv: float = Field(0.3, ge=0.0)
    storm_rate: float = Field(0.3, ge=0.0)
    mean_depth_mm: float = Field(12.0, gt=0.0)
    storm_cell_cv: float = Field(0.5, ge=0.0)
    k_min: float = Field(0.05, gt=0.0, lt=1.0)
    k_max: float = Field(0.5, gt=0.0, lt=1.0)
    delay_per_km: float = Field(0.3, ge=0.0)
    grid_area_km2: float = Field(25.0, gt=0.0)
    noise_std: float = Field(0.1, ge=0.0)
    seed: int = 0
    layout_seed: Optional[int] = None
    weather_seed: Optional[int] = None
    reservoir_seed: Optional[int] = None
    noise_seed: Optional[int] = None
    target_grid_count: Optional[int] = Field(None, ge=1)
    temporal_k_factor: float = Field(0.4, gt=0.0)
    temporal_rate_factor: float = Field(1.5, gt=0.0)
    temporal_depth_factor: float = Field(0.8, gt=0.0)

    class Config:
        extra = Extra.forbid

    @root_validator(skip_on_failure=True)
    def ordered_reservoir_range(cls, values):
        if values["k_min"] > values["k_max"]:
            raise ValueError("k_min must not exceed k_max")
        return values

    def effective_seed(self, component: str) -> int:
        """Seed of one generator component, falling back to ``seed``."""
        value = getattr(self, f"{component}_seed")
        return self.seed if value is None else value

    @property
    def area_scale(self) -> float:
        """m3/s produced by 1 mm/day of runoff over one grid."""
        return self.grid_area_km2 * 1e3 / 86400.0


class SyntheticWatershed(BaseModel):
    """
    One generated watershed with its ground-truth surrogate parameters.

    Attributes:
        name (str): Identifier used for output directories.
        spec (SynthSpec): Spec the watershed was generated from.
        grid (GridSpec): Layout.
        series (SeriesTable): Precipitation, surrogate runoff and discharge.
        reservoir_k (np.ndarray): Per-grid reservoir constants.
    """
    name: str
    spec: SynthSpec
    grid: GridSpec
    series: SeriesTable
    reservoir_k: np.ndarray

    class Config:
        arbitrary_types_allowed = True
