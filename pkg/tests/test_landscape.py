"""
Tests for the mean-field free energy, its stationary points and T_c.
"""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from annealbench.errors import DomainError
from annealbench.landscape import (
    critical_temperature,
    entropy_density,
    free_energy_density,
    free_energy_landscape,
    local_extrema,
)
from annealbench.model import ModelParams


class TestEntropy:
    def test_center(self):
        assert entropy_density(0.0) == pytest.approx(math.log(2.0))

    @pytest.mark.parametrize("m", [-1.0, 1.0])
    def test_poles(self, m):
        assert entropy_density(m) == 0.0

    @given(st.floats(min_value=-1.0, max_value=1.0))
    def test_even_and_bounded(self, m):
        value = entropy_density(m)
        assert 0.0 <= value <= math.log(2.0) + 1e-15
        assert value == pytest.approx(entropy_density(-m), abs=1e-15)

    def test_outside_interval(self):
        with pytest.raises(DomainError):
            entropy_density(1.5)


class TestFreeEnergy:
    @given(st.floats(min_value=0.0, max_value=50.0), st.integers(min_value=2, max_value=8))
    def test_full_polarization(self, T, p):
        assert free_energy_density(1.0, T, ModelParams(p=p, J=1.0, N=10)) == pytest.approx(-0.5)

    def test_landscape_default_grid(self):
        m, f = free_energy_landscape(ModelParams(p=3, N=10), 0.4)
        assert m.shape == (401,) and f.shape == (401,)
        assert m[0] == -1.0 and m[-1] == 1.0

    def test_negative_temperature(self):
        with pytest.raises(DomainError):
            free_energy_density(0.3, -1.0, ModelParams(p=3, N=10))


class TestLocalExtrema:
    def test_p2_ordered_phase(self):
        T = 0.5
        extrema = local_extrema(ModelParams(p=2, N=10), T)
        assert extrema.paramagnetic is None
        assert extrema.barrier == 0.0
        assert extrema.ferromagnetic == pytest.approx(math.tanh(extrema.ferromagnetic / T), abs=1e-10)

    def test_p3_barrier_small_temperature(self):
        T = 0.1
        extrema = local_extrema(ModelParams(p=3, N=10), T)
        assert extrema.paramagnetic == 0.0
        assert extrema.has_barrier
        # -(3/2) m^2 + T artanh(m) = 0 near m = 2T/3
        assert extrema.barrier == pytest.approx(2.0 * T / 3.0, rel=0.01)
        assert extrema.ferromagnetic > 0.999

    def test_p3_high_temperature_single_minimum(self):
        extrema = local_extrema(ModelParams(p=3, N=10), 1.0)
        assert extrema.paramagnetic == 0.0
        assert not extrema.has_barrier

    def test_zero_temperature(self):
        extrema = local_extrema(ModelParams(p=3, N=10), 0.0)
        assert extrema.ferromagnetic == 1.0


class TestCriticalTemperature:
    def test_p2_is_coupling(self):
        assert critical_temperature(ModelParams(p=2, J=1.0, N=4)) == 1.0
        assert critical_temperature(ModelParams(p=2, J=2.5, N=4)) == 2.5

    @pytest.mark.parametrize("p", [3, 4, 5])
    def test_minima_exchange_stability(self, p):
        params = ModelParams(p=p, J=1.0, N=10)
        tc = critical_temperature(params)
        assert 0.0 < tc < 1.0
        m = np.linspace(1e-3, 1.0, 10_001)
        for T, below in ((0.99 * tc, True), (1.01 * tc, False)):
            delta = np.asarray(free_energy_density(m, T, params)) - free_energy_density(0.0, T, params)
            assert bool(delta.min() < 0.0) is below

    def test_scales_with_coupling(self):
        one = critical_temperature(ModelParams(p=3, J=1.0, N=4))
        two = critical_temperature(ModelParams(p=3, J=2.0, N=4))
        assert two == pytest.approx(2.0 * one, rel=1e-8)

    @pytest.mark.parametrize("p", [3, 5])
    def test_barrier_persists_below_transition(self, p):
        params = ModelParams(p=p, J=1.0, N=10)
        T = 0.5 * critical_temperature(params)
        extrema = local_extrema(params, T)
        assert extrema.has_barrier
        height = free_energy_density(extrema.barrier, T, params) - free_energy_density(0.0, T, params)
        assert height > 0.0
