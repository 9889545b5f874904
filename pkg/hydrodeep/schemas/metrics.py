"""
Pydantic schema for the goodness-of-fit report.
"""
from typing import Dict

from pydantic import BaseModel, Field


class MetricReport(BaseModel):
    """
    Metrics of one evaluation run.

    Attributes:
        nse (float): Nash-Sutcliffe efficiency, at most 1.
        pbias (float): Percent bias; positive when totals are underestimated.
        rsr (float): RMSE over the standard deviation of observations.
        n (int): Number of evaluated days.
        obs_mean (float): Mean observed discharge, m3/s.
        residual_mean (float): Mean of obs - sim.
        residual_std (float): Standard deviation of obs - sim.
        max_abs_residual (float): Largest absolute residual.
    """
    nse: float
    pbias: float = Field(..., alias="pbias_pct")
    rsr: float
    n: int
    obs_mean: float
    residual_mean: float = 0.0
    residual_std: float = 0.0
    max_abs_residual: float = 0.0

    class Config:
        allow_population_by_field_name = True

    def to_record(self) -> Dict[str, float]:
        """Fixed-key record used in every emitted table."""
        return {"nse": self.nse, "pbias_pct": self.pbias, "rsr": self.rsr, "n": self.n}
