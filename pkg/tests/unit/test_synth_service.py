"""
Unit tests for SynthService.
"""
import numpy as np
import pytest

from hydrodeep.schemas.synth import SynthSpec
from hydrodeep.services.synth_service import SynthService
from hydrodeep.utils.enums import ShiftMode
from hydrodeep.utils.exceptions import DimensionError, ParameterError


class TestReservoir:
    """Test cases for the linear-reservoir surrogate."""

    def test_impulse_response(self):
        """One unit of rain drains geometrically."""
        runoff = SynthService.pb_surrogate(np.array([[1.0], [0.0], [0.0], [0.0]]), np.array([0.5]))
        np.testing.assert_allclose(runoff[:, 0], [0.5, 0.25, 0.125, 0.0625])

    def test_mass_balance(self, rng):
        """Released runoff plus final storage equals total rain."""
        precip = rng.uniform(0, 10, (200, 3))
        runoff, storage = SynthService.pb_surrogate(precip, np.array([0.05, 0.3, 0.9]), return_storage=True)
        np.testing.assert_allclose(runoff.sum(axis=0) + storage[-1], precip.sum(axis=0))
        assert np.all(runoff >= 0) and np.all(storage >= 0)

    def test_unit_constant_passes_rain_through(self, rng):
        """k=1 releases everything on the same day."""
        precip = rng.uniform(0, 10, (20, 1))
        np.testing.assert_allclose(SynthService.pb_surrogate(precip, np.array([1.0])), precip)

    @pytest.mark.parametrize("k", [0.0, 1.5, -0.2])
    def test_invalid_constant(self, k):
        """Constants outside (0, 1] are rejected."""
        with pytest.raises(ParameterError):
            SynthService.pb_surrogate(np.ones((3, 1)), np.array([k]))

    def test_grid_count_mismatch(self):
        """One constant per grid."""
        with pytest.raises(DimensionError):
            SynthService.pb_surrogate(np.ones((3, 2)), np.array([0.5]))

    def test_constants_in_range_and_prefix_consistent(self):
        """Constants lie in [k_min, k_max]; more grids extend the same draws."""
        short = SynthService.reservoir_constants(SynthSpec(grid_count=3, k_min=0.1, k_max=0.2))
        long = SynthService.reservoir_constants(SynthSpec(grid_count=6, k_min=0.1, k_max=0.2))
        assert np.all((long >= 0.1) & (long <= 0.2))
        np.testing.assert_array_equal(long[:3], short)


class TestPrecip:
    """Test cases for the storm process."""

    def test_zero_rate_is_dry(self):
        """No storms, no rain."""
        assert not SynthService.gen_precip(SynthSpec(grid_count=3, days=50, storm_rate=0.0)).any()

    def test_non_negative_and_shaped(self, small_spec):
        """(T, L) non-negative rain."""
        precip = SynthService.gen_precip(small_spec)
        assert precip.shape == (small_spec.days, small_spec.grid_count)
        assert np.all(precip >= 0)

    def test_long_run_mean(self):
        """The mean of each grid approaches rate * depth * factor."""
        spec = SynthSpec(grid_count=2, days=100_000, seed=11)
        precip = SynthService.gen_precip(spec)
        expected = spec.storm_rate * spec.mean_depth_mm * SynthService.spatial_factors(spec)
        np.testing.assert_allclose(precip.mean(axis=0), expected, rtol=0.05)

    def test_deterministic(self, small_spec):
        """Same spec, same rain."""
        np.testing.assert_array_equal(SynthService.gen_precip(small_spec), SynthService.gen_precip(small_spec))


class TestDischarge:
    """Test cases for routing and observation noise."""

    def test_routing_delays(self):
        """Delays are whole days proportional to distance."""
        np.testing.assert_array_equal(SynthService.routing_delays([0.0, 1.0, 10.0], 0.3), [0, 0, 3])

    def test_routed_runoff_shifts_columns(self):
        """Column i is shifted down by its delay."""
        runoff = np.arange(8.0).reshape(4, 2)
        routed = SynthService.routed_runoff(runoff, np.array([0, 2]))
        np.testing.assert_array_equal(routed[:, 0], runoff[:, 0])
        np.testing.assert_array_equal(routed[:, 1], [0.0, 0.0, 1.0, 3.0])

    def test_noise_free_discharge(self, rng):
        """Without noise discharge is the scaled sum of routed runoff."""
        spec = SynthSpec(grid_count=2, noise_std=0.0, delay_per_km=0.0)
        runoff = rng.uniform(0, 3, (30, 2))
        np.testing.assert_allclose(SynthService.gen_discharge(runoff, [1.0, 2.0], spec),
                                   spec.area_scale * runoff.sum(axis=1))

    def test_noise_preserves_mean(self, rng):
        """Lognormal noise leaves mean discharge unchanged."""
        spec = SynthSpec(grid_count=1, noise_std=0.2, delay_per_km=0.0, seed=5)
        runoff = np.ones((50_000, 1))
        discharge = SynthService.gen_discharge(runoff, [0.0], spec)
        assert discharge.mean() == pytest.approx(spec.area_scale, rel=0.01)
        assert np.all(discharge > 0)


class TestWatershed:
    """Test cases for whole watersheds and transfer targets."""

    def test_generate(self, small_spec):
        """Layout and series agree with the spec."""
        ws = SynthService.generate(small_spec)
        assert ws.grid.grid_count == small_spec.grid_count
        assert ws.series.steps == small_spec.days
        np.testing.assert_allclose(ws.grid.distances, np.abs(ws.grid.y))
        assert max(ws.grid.dist_km) <= small_spec.half_width_km

    def test_deterministic(self, small_spec):
        """Two runs produce identical series."""
        a, b = SynthService.generate(small_spec), SynthService.generate(small_spec)
        np.testing.assert_array_equal(a.series.discharge, b.series.discharge)
        assert a.grid == b.grid

    def test_oracle_on_noise_free_data(self):
        """Noise-free discharge is linear in the routed runoffs."""
        ws = SynthService.generate(SynthSpec(grid_count=4, days=200, noise_std=0.0, seed=2))
        assert SynthService.linear_oracle_nse(ws) > 0.99

    def test_spatial_shift(self, small_spec):
        """A spatial target keeps reservoir constants and redraws the layout."""
        source, target = SynthService.make_transfer_pair(small_spec, ShiftMode.SPATIAL, 99)
        np.testing.assert_array_equal(source.reservoir_k, target.reservoir_k)
        assert source.grid != target.grid
        assert target.name == "target_spatial_shift"

    def test_spatial_shift_changes_grid_count(self):
        """target_grid_count sets L of a spatial target."""
        spec = SynthSpec(grid_count=4, days=60, target_grid_count=6)
        _, target = SynthService.make_transfer_pair(spec, ShiftMode.SPATIAL, 7)
        assert target.grid.grid_count == 6

    def test_temporal_shift(self, small_spec):
        """A temporal target keeps the layout and changes the dynamics."""
        source, target = SynthService.make_transfer_pair(small_spec, ShiftMode.TEMPORAL, 99)
        assert source.grid == target.grid
        assert not np.array_equal(source.reservoir_k, target.reservoir_k)
        assert target.spec.k_max == pytest.approx(small_spec.k_max * small_spec.temporal_k_factor)
        assert not np.array_equal(source.series.precip, target.series.precip)

    def test_both_shift(self, small_spec):
        """Both axes change together."""
        source, target = SynthService.make_transfer_pair(small_spec, ShiftMode.BOTH, 99)
        assert source.grid != target.grid
        assert not np.array_equal(source.reservoir_k, target.reservoir_k)
