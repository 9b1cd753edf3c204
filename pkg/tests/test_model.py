"""
Tests for the ferromagnet parameters, schedules and elementary coefficients.
"""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from pydantic import ValidationError

from annealbench.errors import DomainError
from annealbench.model import (
    AnnealingSchedule,
    AnnealMode,
    Driver,
    ModelParams,
    classical_energy,
    energy_levels,
    heat_bath_rate,
    kinetic_coefficients,
    kinetic_coefficients_by_index,
    magnetization_grid,
)


class TestModelParams:
    def test_rejects_out_of_domain(self):
        with pytest.raises(ValidationError):
            ModelParams(p=1, J=1.0, N=4)
        with pytest.raises(ValidationError):
            ModelParams(p=2, J=0.0, N=4)
        with pytest.raises(ValidationError):
            ModelParams(p=2, J=1.0, N=0)

    def test_frozen(self):
        params = ModelParams(p=3, N=8)
        with pytest.raises(ValidationError):
            params.N = 9

    def test_derived_properties(self):
        params = ModelParams(p=4, J=2.0, N=10)
        assert params.size == 11
        assert params.ground_energy == -10.0
        assert params.even
        assert not ModelParams(p=3, N=10).even


class TestMagnetizationGrid:
    @given(st.integers(min_value=1, max_value=2000))
    def test_grid_shape_and_endpoints(self, N):
        grid = magnetization_grid(N)
        assert grid.shape == (N + 1,)
        assert grid[0] == -1.0
        assert grid[-1] == 1.0
        assert np.all(np.diff(grid) > 0)

    def test_rejects_empty_system(self):
        with pytest.raises(DomainError):
            magnetization_grid(0)


class TestClassicalEnergy:
    def test_fully_magnetized(self):
        assert classical_energy(1.0, ModelParams(p=3, J=1.0, N=10)) == -5.0

    @pytest.mark.parametrize("p", [2, 3, 5])
    def test_zero_magnetization(self, p):
        assert classical_energy(0.0, ModelParams(p=p, J=1.7, N=9)) == 0.0

    def test_direct_value(self):
        assert classical_energy(0.5, ModelParams(p=2, J=1.0, N=4)) == pytest.approx(-0.5)

    def test_outside_unit_interval(self):
        with pytest.raises(DomainError):
            classical_energy(1.1, ModelParams(p=2, N=4))

    def test_levels_match_grid(self):
        params = ModelParams(p=3, N=6)
        np.testing.assert_allclose(energy_levels(params), -3.0 * params.grid**3)


class TestKineticCoefficients:
    def test_boundaries_vanish(self):
        k_plus, _ = kinetic_coefficients(1.0, 8)
        _, k_minus = kinetic_coefficients(-1.0, 8)
        assert k_plus == 0.0
        assert k_minus == 0.0

    def test_center_value(self):
        k_plus, k_minus = kinetic_coefficients(0.0, 4)
        assert k_plus == pytest.approx(math.sqrt(1.5))
        assert k_minus == pytest.approx(math.sqrt(1.5))

    @given(st.integers(min_value=1, max_value=400))
    def test_integer_form_matches_float_form(self, N):
        by_index = kinetic_coefficients_by_index(N)
        by_value = kinetic_coefficients(magnetization_grid(N), N)
        np.testing.assert_allclose(by_index[0], by_value[0], atol=1e-12)
        np.testing.assert_allclose(by_index[1], by_value[1], atol=1e-12)

    def test_off_grid_rejected(self):
        with pytest.raises(DomainError):
            kinetic_coefficients(1.0 + 1e-3, 2)


class TestHeatBathRate:
    @given(st.floats(min_value=0.0, max_value=50.0))
    def test_degenerate_move(self, beta):
        assert heat_bath_rate(0.0, beta) == 0.5

    def test_zero_temperature(self):
        assert heat_bath_rate(1.0, np.inf) == 0.0
        assert heat_bath_rate(-1.0, np.inf) == 1.0
        assert heat_bath_rate(0.0, np.inf) == 0.5

    @given(st.floats(min_value=-1e3, max_value=1e3))
    def test_infinite_temperature(self, delta):
        assert heat_bath_rate(delta, 0.0) == 0.5

    @given(
        st.floats(min_value=-50.0, max_value=50.0),
        st.floats(min_value=0.0, max_value=20.0),
    )
    def test_bounds_and_balance(self, delta, beta):
        forward = heat_bath_rate(delta, beta)
        backward = heat_bath_rate(-delta, beta)
        assert 0.0 <= forward <= 1.0
        assert forward + backward == pytest.approx(1.0)
        if forward > 1e-300 and backward > 1e-300:
            assert math.log(forward / backward) == pytest.approx(-beta * delta, abs=1e-9)

    def test_negative_beta(self):
        with pytest.raises(DomainError):
            heat_bath_rate(1.0, -1.0)


class TestAnnealingSchedule:
    @given(
        st.floats(min_value=0.0, max_value=10.0),
        st.floats(min_value=0.0, max_value=10.0),
        st.floats(min_value=1e-3, max_value=1e4),
    )
    def test_endpoints_exact(self, start, end, tau):
        schedule = AnnealingSchedule(driver=Driver.TRANSVERSE_FIELD, start_value=start, end_value=end, total_time=tau)
        assert schedule.value(0.0) == start
        assert schedule.value(tau) == end

    def test_affine(self):
        schedule = AnnealingSchedule(driver=Driver.TEMPERATURE, start_value=2.0, end_value=0.0, total_time=10.0)
        assert schedule.value(2.5) == pytest.approx(1.5)
        assert schedule.rate() == pytest.approx(-0.2)
        assert schedule.inverse_temperature(10.0) == np.inf
        assert schedule.inverse_temperature(5.0) == pytest.approx(1.0)

    def test_inverse_temperature_needs_temperature_driver(self):
        schedule = AnnealingSchedule(driver=Driver.TRANSVERSE_FIELD, start_value=2.0, end_value=0.0, total_time=1.0)
        with pytest.raises(DomainError):
            schedule.inverse_temperature(0.5)

    def test_with_total_time(self):
        schedule = AnnealingSchedule(driver=Driver.TEMPERATURE, start_value=2.0, end_value=0.5, total_time=1.0)
        assert schedule.with_total_time(7.0).total_time == 7.0
        assert schedule.total_time == 1.0

    def test_rejects_nonpositive_time(self):
        with pytest.raises(ValidationError):
            AnnealingSchedule(driver=Driver.TEMPERATURE, start_value=2.0, end_value=0.0, total_time=0.0)


def test_anneal_mode_drivers():
    assert AnnealMode("sa").driver is Driver.TEMPERATURE
    assert AnnealMode.QA_IT.driver is Driver.TRANSVERSE_FIELD
    assert AnnealMode.QA_RT.quantum and not AnnealMode.SA.quantum
