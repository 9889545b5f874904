"""
Service for hydrological goodness-of-fit metrics.

This module provides Nash-Sutcliffe efficiency, percent bias and the
RMSE-observations standard deviation ratio, plus the combined report.
"""
import numpy as np

from hydrodeep.schemas.metrics import MetricReport
from hydrodeep.utils.exceptions import DegenerateMetricError, DimensionError, ParameterError
from hydrodeep.utils.helpers import as_float_array


class MetricsService:
    """
    Service class for metric computation.

    All methods are pure functions of the observed and simulated series.
    """

    @staticmethod
    def _pair(obs, sim):
        obs = as_float_array(obs, "obs").ravel()
        sim = as_float_array(sim, "sim").ravel()
        if obs.shape != sim.shape:
            raise DimensionError(f"obs has {obs.size} values, sim has {sim.size}")
        if obs.size < 2:
            raise ParameterError("metrics need at least two observations")
        return obs, sim

    @staticmethod
    def _variance_sum(obs: np.ndarray) -> float:
        denominator = float(np.sum((obs - obs.mean()) ** 2))
        if denominator == 0.0:
            raise DegenerateMetricError("observations are constant; NSE and RSR are undefined")
        return denominator

    @staticmethod
    def nse(obs, sim) -> float:
        """
        Nash-Sutcliffe efficiency ``1 - sum((obs - sim)^2) / sum((obs - mean(obs))^2)``.

        Args:
            obs: Observed values, at least two and not all identical.
            sim: Simulated values of the same length.

        Returns:
            float: NSE, at most 1.

        Raises:
            DegenerateMetricError: If the observations are constant.
        """
        obs, sim = MetricsService._pair(obs, sim)
        return 1.0 - float(np.sum((obs - sim) ** 2)) / MetricsService._variance_sum(obs)

    @staticmethod
    def pbias(obs, sim, as_printed: bool = False) -> float:
        """
        Percent bias ``100 * sum(obs - sim) / sum(obs)``.

        Positive values mean the simulation underestimates total discharge.
        ``as_printed`` squares the numerator instead, a variant kept for
        auditing tables built with that formula; it can never be negative.

        Raises:
            DegenerateMetricError: If the observations sum to zero.
        """
        obs, sim = MetricsService._pair(obs, sim)
        total = float(np.sum(obs))
        if total == 0.0:
            raise DegenerateMetricError("observations sum to zero; PBIAS is undefined")
        residual = obs - sim
        numerator = float(np.sum(residual ** 2)) if as_printed else float(np.sum(residual))
        return 100.0 * numerator / total

    @staticmethod
    def rsr(obs, sim) -> float:
        """
        RMSE divided by the (population) standard deviation of the observations.

        Equal to ``sqrt(1 - NSE)``.
        """
        obs, sim = MetricsService._pair(obs, sim)
        return float(np.sqrt(np.sum((obs - sim) ** 2) / MetricsService._variance_sum(obs)))

    @staticmethod
    def report(obs, sim, as_printed_pbias: bool = False) -> MetricReport:
        """
        Compute NSE, PBIAS and RSR with a residual summary.

        Args:
            obs: Observed discharge, m3/s.
            sim: Simulated discharge, m3/s.
            as_printed_pbias (bool): Use the squared-numerator PBIAS variant.

        Returns:
            MetricReport: The combined report.
        """
        obs, sim = MetricsService._pair(obs, sim)
        residual = obs - sim
        return MetricReport(
            nse=MetricsService.nse(obs, sim),
            pbias=MetricsService.pbias(obs, sim, as_printed=as_printed_pbias),
            rsr=MetricsService.rsr(obs, sim),
            n=int(obs.size),
            obs_mean=float(obs.mean()),
            residual_mean=float(residual.mean()),
            residual_std=float(residual.std()),
            max_abs_residual=float(np.max(np.abs(residual))),
        )

    @staticmethod
    def relative_nse_gain(nse_model: float, nse_baseline: float) -> float:
        """
        Percent improvement of ``nse_model`` over ``nse_baseline``.

        Returns:
            float: ``100 * (model - baseline) / |baseline|``, NaN when the baseline is 0.
        """
        if nse_baseline == 0.0:
            return float("nan")
        return 100.0 * (nse_model - nse_baseline) / abs(nse_baseline)
