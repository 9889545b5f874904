"""
Service for synthetic watersheds driven by a linear-reservoir surrogate.

Each grid drains through one linear reservoir; discharge at the outlet is
the sum of the grid runoffs, delayed in proportion to their distance from
the river and perturbed by mean-preserving lognormal noise.
"""
import logging
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd

from hydrodeep.schemas.grid import GridSpec, SeriesTable
from hydrodeep.schemas.synth import SynthSpec, SyntheticWatershed
from hydrodeep.services.metrics_service import MetricsService
from hydrodeep.utils.enums import ShiftMode
from hydrodeep.utils.exceptions import DimensionError, ParameterError
from hydrodeep.utils.helpers import as_float_array, make_rng

logger = logging.getLogger(__name__)

LAYOUT_STREAM = 1
FACTOR_STREAM = 2
WEATHER_STREAM = 3
RESERVOIR_STREAM = 4
NOISE_STREAM = 5


def _lognormal_unit_mean(rng: np.random.Generator, cv: float, size) -> np.ndarray:
    """Lognormal draws with mean 1 and coefficient of variation ``cv``."""
    if cv == 0:
        return np.ones(size)
    sigma2 = np.log1p(cv * cv)
    return rng.lognormal(mean=-0.5 * sigma2, sigma=np.sqrt(sigma2), size=size)


class SynthService:
    """
    Service class for synthetic data generation.

    All generators are pure functions of the spec and its seeds.
    """

    @staticmethod
    def gen_watershed(spec: SynthSpec) -> GridSpec:
        """
        Scatter ``spec.grid_count`` grids over the layout rectangle.

        Args:
            spec (SynthSpec): Layout extent and seeds.

        Returns:
            GridSpec: Coordinates and distances ``|y|`` to the river line.
        """
        rng = make_rng(spec.effective_seed("layout"), LAYOUT_STREAM)
        L = spec.grid_count
        x = rng.uniform(0.0, spec.extent_km, size=L)
        y = rng.uniform(-spec.half_width_km, spec.half_width_km, size=L)
        return GridSpec(grid_ids=[f"g_{i}" for i in range(1, L + 1)],
                        x=x.tolist(), y=y.tolist(), dist_km=np.abs(y).tolist())

    @staticmethod
    def spatial_factors(spec: SynthSpec) -> np.ndarray:
        """Static per-grid rain multipliers with mean 1."""
        rng = make_rng(spec.effective_seed("layout"), FACTOR_STREAM)
        return _lognormal_unit_mean(rng, spec.spatial_cv, spec.grid_count)

    @staticmethod
    def reservoir_constants(spec: SynthSpec) -> np.ndarray:
        """
        Per-grid reservoir constants, uniform in ``[k_min, k_max]``.

        Draws are prefix-consistent: a larger grid count extends the same sequence.
        """
        rng = make_rng(spec.effective_seed("reservoir"), RESERVOIR_STREAM)
        return spec.k_min + (spec.k_max - spec.k_min) * rng.random(spec.grid_count)

    @staticmethod
    def gen_precip(spec: SynthSpec, days: Optional[int] = None) -> np.ndarray:
        """
        Daily precipitation from a watershed-wide storm process.

        The daily event count is Poisson(``storm_rate``) and each event has an
        exponential depth of mean ``mean_depth_mm``, so the watershed total is
        gamma distributed given the count. Every grid receives that total times
        its static spatial factor and a daily lognormal jitter of mean 1.

        Args:
            spec (SynthSpec): Storm and layout parameters.
            days (Optional[int]): Length T; defaults to ``spec.days``.

        Returns:
            np.ndarray: (T, L) precipitation, mm/day, non-negative.
        """
        days = spec.days if days is None else days
        rng = make_rng(spec.effective_seed("weather"), WEATHER_STREAM)
        counts = rng.poisson(spec.storm_rate, size=days)
        depths = rng.gamma(np.maximum(counts, 1), spec.mean_depth_mm)
        totals = np.where(counts > 0, depths, 0.0)
        jitter = _lognormal_unit_mean(rng, spec.storm_cell_cv, (days, spec.grid_count))
        return totals[:, None] * SynthService.spatial_factors(spec)[None, :] * jitter

    @staticmethod
    def pb_surrogate(precip: np.ndarray, k: np.ndarray,
                     return_storage: bool = False) -> Union[np.ndarray, Tuple[np.ndarray, np.ndarray]]:
        """
        Linear-reservoir runoff of every grid.

        With ``a_t = s_{t-1} + p_t`` the reservoir releases ``r_t = k a_t`` and
        keeps ``s_t = a_t - r_t``, starting from ``s_0 = 0``, so
        ``sum(r) + s_T == sum(p)`` per grid.

        Args:
            precip (np.ndarray): (T, L) precipitation.
            k (np.ndarray): (L,) reservoir constants in (0, 1].
            return_storage (bool): Also return the (T, L) storage trajectory.

        Returns:
            np.ndarray or Tuple[np.ndarray, np.ndarray]: Runoff, and storage if requested.

        Raises:
            ParameterError: If a constant lies outside (0, 1].
        """
        p = as_float_array(precip, "precip")
        k = as_float_array(k, "k").ravel()
        if p.ndim == 1:
            p = p[:, None]
        if p.shape[1] != k.size:
            raise DimensionError(f"precip has {p.shape[1]} grids, k has {k.size}")
        if np.any(k <= 0) or np.any(k > 1):
            raise ParameterError("reservoir constants must lie in (0, 1]")
        runoff = np.empty_like(p)
        storage = np.empty_like(p)
        s = np.zeros(k.size)
        for t in range(p.shape[0]):
            a = s + p[t]
            runoff[t] = k * a
            s = a - runoff[t]
            storage[t] = s
        if return_storage:
            return runoff, storage
        return runoff

    @staticmethod
    def routing_delays(distances, delay_per_km: float) -> np.ndarray:
        """Whole-day delay of each grid, ``round(delay_per_km * d)``."""
        return np.rint(delay_per_km * as_float_array(distances, "distances")).astype(np.int64)

    @staticmethod
    def routed_runoff(runoff: np.ndarray, delays: np.ndarray) -> np.ndarray:
        """(T, L) matrix whose column i is grid i's runoff shifted by its delay; days before 0 are 0."""
        runoff = as_float_array(runoff, "runoff")
        out = np.zeros_like(runoff)
        steps = runoff.shape[0]
        for i, lag in enumerate(delays):
            if lag < steps:
                out[lag:, i] = runoff[: steps - lag, i]
        return out

    @staticmethod
    def gen_discharge(runoff: np.ndarray, distances, spec: SynthSpec) -> np.ndarray:
        """
        Outlet discharge ``D_t = area_scale * sum_i r[t - delay_i, i]`` with noise.

        Noise is ``D * exp(sigma z - sigma^2 / 2)`` with standard normal ``z``,
        which leaves the expected discharge unchanged.

        Returns:
            np.ndarray: (T,) discharge, m3/s.
        """
        delays = SynthService.routing_delays(distances, spec.delay_per_km)
        discharge = spec.area_scale * SynthService.routed_runoff(runoff, delays).sum(axis=1)
        if spec.noise_std > 0:
            rng = make_rng(spec.effective_seed("noise"), NOISE_STREAM)
            sigma = spec.noise_std
            discharge = discharge * np.exp(sigma * rng.standard_normal(discharge.shape) - 0.5 * sigma * sigma)
        return discharge

    @staticmethod
    def generate(spec: SynthSpec, name: str = "source") -> SyntheticWatershed:
        """
        Generate a complete watershed.

        Args:
            spec (SynthSpec): Generation parameters.
            name (str): Identifier of the watershed.

        Returns:
            SyntheticWatershed: Layout, series and the true reservoir constants.
        """
        grid = SynthService.gen_watershed(spec)
        precip = SynthService.gen_precip(spec)
        k = SynthService.reservoir_constants(spec)
        runoff = SynthService.pb_surrogate(precip, k)
        discharge = SynthService.gen_discharge(runoff, grid.distances, spec)
        dates = pd.date_range(spec.start_date, periods=spec.days, freq="D")
        series = SeriesTable(dates=dates, precip=precip, runoff=runoff, discharge=discharge)
        logger.info("Generated watershed %s: %d grids, %d days", name, spec.grid_count, spec.days)
        return SyntheticWatershed(name=name, spec=spec, grid=grid, series=series, reservoir_k=k)

    @staticmethod
    def target_spec(spec: SynthSpec, mode: ShiftMode, target_seed: int) -> SynthSpec:
        """
        Spec of a transfer target that differs from ``spec`` along ``mode``.

        A spatial shift redraws the layout (and the grid count when
        ``target_grid_count`` is set) under the source weather and reservoir
        seeds. A temporal shift keeps the layout and redraws weather and
        reservoir constants from ``target_seed`` with scaled storm and
        reservoir parameters.
        """
        mode = ShiftMode(mode)
        update = {
            "layout_seed": spec.effective_seed("layout"),
            "weather_seed": spec.effective_seed("weather"),
            "reservoir_seed": spec.effective_seed("reservoir"),
            "noise_seed": target_seed,
        }
        if mode in (ShiftMode.SPATIAL, ShiftMode.BOTH):
            update["layout_seed"] = target_seed
            update["grid_count"] = spec.target_grid_count or spec.grid_count
        if mode in (ShiftMode.TEMPORAL, ShiftMode.BOTH):
            update["weather_seed"] = target_seed
            update["reservoir_seed"] = target_seed
            update["k_min"] = min(spec.k_min * spec.temporal_k_factor, 0.99)
            update["k_max"] = min(spec.k_max * spec.temporal_k_factor, 0.99)
            update["storm_rate"] = spec.storm_rate * spec.temporal_rate_factor
            update["mean_depth_mm"] = spec.mean_depth_mm * spec.temporal_depth_factor
        return spec.copy(update=update)

    @staticmethod
    def make_transfer_pair(spec: SynthSpec, mode: ShiftMode,
                           target_seed: int) -> Tuple[SyntheticWatershed, SyntheticWatershed]:
        """
        Generate a source watershed and a target shifted along one axis.

        Args:
            spec (SynthSpec): Source parameters.
            mode (ShiftMode): spatial_shift, temporal_shift or both.
            target_seed (int): Seed of the redrawn components.

        Returns:
            Tuple[SyntheticWatershed, SyntheticWatershed]: (source, target).
        """
        source = SynthService.generate(spec, "source")
        target = SynthService.generate(SynthService.target_spec(spec, mode, target_seed), f"target_{ShiftMode(mode).value}")
        return source, target

    @staticmethod
    def linear_oracle_nse(watershed: SyntheticWatershed) -> float:
        """
        NSE of a least-squares fit of discharge on the routed grid runoffs.

        Without noise discharge is exactly linear in the routed runoffs, so
        this is the ceiling any learned model can be compared against.
        """
        spec = watershed.spec
        delays = SynthService.routing_delays(watershed.grid.distances, spec.delay_per_km)
        design = SynthService.routed_runoff(watershed.series.runoff, delays)
        coef, *_ = np.linalg.lstsq(design, watershed.series.discharge, rcond=None)
        return MetricsService.nse(watershed.series.discharge, design @ coef)
