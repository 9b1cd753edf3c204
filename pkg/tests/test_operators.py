"""
Tests for the sector operators: quantum Hamiltonian, master generator,
equilibrium distribution and the effective Hamiltonian.
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from annealbench.errors import DetailedBalanceError, DomainError
from annealbench.model import ModelParams
from annealbench.operators import (
    EquilibriumDistribution,
    MasterGenerator,
    TridiagonalOperator,
    build_effective_hamiltonian,
    build_master_generator,
    build_quantum_hamiltonian,
    effective_hamiltonian_beta_derivative,
    equilibrium_distribution,
    symmetrize_generator,
)

orders = st.integers(min_value=2, max_value=6)
sizes = st.integers(min_value=1, max_value=64)
temperatures = st.floats(min_value=0.05, max_value=10.0)


def two_spin_hamiltonian(J: float, gamma: float) -> np.ndarray:
    """-J σ1z σ2z - Γ (σ1x + σ2x) on the 4 configurations."""
    sz = np.diag([1.0, -1.0])
    sx = np.array([[0.0, 1.0], [1.0, 0.0]])
    eye = np.eye(2)
    return -J * np.kron(sz, sz) - gamma * (np.kron(sx, eye) + np.kron(eye, sx))


class TestTridiagonalOperator:
    def test_matvec_matches_dense(self):
        rng = np.random.default_rng(3)
        op = TridiagonalOperator(
            diagonal=rng.normal(size=9),
            off_diagonal=rng.normal(size=8),
            symmetric=False,
            upper_diagonal=rng.normal(size=8),
        )
        vector = rng.normal(size=9) + 1j * rng.normal(size=9)
        np.testing.assert_allclose(op.matvec(vector), op.to_dense() @ vector, atol=1e-12)

    def test_symmetric_equals_transpose(self):
        op = TridiagonalOperator(diagonal=np.arange(5.0), off_diagonal=np.ones(4))
        dense = op.to_dense()
        np.testing.assert_array_equal(dense, dense.T)

    def test_immutable(self):
        op = TridiagonalOperator(diagonal=np.zeros(3), off_diagonal=np.ones(2))
        with pytest.raises(ValueError):
            op.diagonal[0] = 1.0

    def test_shape_mismatch(self):
        with pytest.raises(DomainError):
            TridiagonalOperator(diagonal=np.zeros(3), off_diagonal=np.ones(3))

    def test_reflection(self):
        op = TridiagonalOperator(
            diagonal=np.array([1.0, 2.0, 3.0]),
            off_diagonal=np.array([4.0, 5.0]),
            symmetric=False,
            upper_diagonal=np.array([6.0, 7.0]),
        )
        flip = np.eye(3)[::-1]
        np.testing.assert_array_equal(op.reflected().to_dense(), flip @ op.to_dense() @ flip)

    def test_gershgorin_bounds_spectrum(self):
        params = ModelParams(p=3, N=20)
        op = build_quantum_hamiltonian(params, 1.3)
        assert np.abs(np.linalg.eigvalsh(op.to_dense())).max() <= op.spectral_radius_bound() + 1e-12


class TestQuantumHamiltonian:
    def test_single_spin_without_field(self):
        op = build_quantum_hamiltonian(ModelParams(p=2, J=1.0, N=1), 0.0)
        np.testing.assert_array_equal(op.diagonal, [-0.5, -0.5])
        np.testing.assert_array_equal(op.off_diagonal, [0.0])

    def test_two_spins_match_triplet_sector(self):
        # H_C = -(JN/2) m^2 = -(J/2)(σ1z σ2z + 1) for N = 2
        J, gamma = 1.0, 1.0
        reduced = build_quantum_hamiltonian(ModelParams(p=2, J=J, N=2), gamma).to_dense()
        full = two_spin_hamiltonian(0.5 * J, gamma) - 0.5 * J * np.eye(4)
        assert np.linalg.eigvalsh(reduced)[0] == pytest.approx(np.linalg.eigvalsh(full)[0], abs=1e-12)

    @pytest.mark.parametrize("p", [2, 3])
    def test_large_field_limit(self, p):
        N, gamma = 10, 1e4
        values = np.linalg.eigvalsh(build_quantum_hamiltonian(ModelParams(p=p, N=N), gamma).to_dense())
        assert values[0] == pytest.approx(-N * gamma, abs=N)
        assert values[1] - values[0] == pytest.approx(2.0 * gamma, rel=1e-3)

    def test_negative_field(self):
        with pytest.raises(DomainError):
            build_quantum_hamiltonian(ModelParams(p=2, N=4), -1.0)

    def test_reflection_symmetry_for_even_p(self):
        op = build_quantum_hamiltonian(ModelParams(p=4, N=11), 0.7)
        np.testing.assert_allclose(op.reflected().to_dense(), op.to_dense(), atol=1e-12)


class TestMasterGenerator:
    @settings(max_examples=40, deadline=None)
    @given(orders, sizes, temperatures)
    def test_columns_sum_to_zero(self, p, N, T):
        generator = build_master_generator(ModelParams(p=p, N=N), T)
        scale = max(1.0, float(np.abs(generator.diagonal).max()))
        np.testing.assert_allclose(generator.column_sums(), 0.0, atol=1e-12 * N * scale)
        assert np.all(generator.lower >= 0) and np.all(generator.upper >= 0)

    def test_column_sums_reference_point(self):
        generator = build_master_generator(ModelParams(p=3, N=16), 0.7)
        np.testing.assert_allclose(generator.column_sums(), 0.0, atol=1e-12 * 16)

    def test_single_spin_infinite_temperature(self):
        generator = build_master_generator(ModelParams(p=2, N=1), 1e12)
        np.testing.assert_allclose(generator.stationary_distribution(), [0.5, 0.5], atol=1e-12)

    def test_stationary_is_equilibrium(self):
        params = ModelParams(p=2, N=12)
        generator = build_master_generator(params, 1.5)
        np.testing.assert_allclose(
            generator.stationary_distribution(), equilibrium_distribution(params, 1.5).probabilities, atol=1e-8
        )

    def test_zero_temperature_rates(self):
        generator = build_master_generator(ModelParams(p=3, N=6), 0.0)
        assert isinstance(generator, MasterGenerator)
        # the last step into m = 1 is strictly downhill
        assert generator.lower[-1] == 1.0
        assert generator.upper[-1] == 0.0


class TestEquilibrium:
    def test_infinite_temperature_counts(self):
        dist = equilibrium_distribution(ModelParams(p=2, N=4), 1e15)
        np.testing.assert_allclose(dist.probabilities, np.array([1, 4, 6, 4, 1]) / 16.0, atol=1e-12)

    def test_zero_temperature_odd(self):
        dist = equilibrium_distribution(ModelParams(p=3, N=9), 0.0)
        expected = np.zeros(10)
        expected[-1] = 1.0
        np.testing.assert_array_equal(dist.probabilities, expected)

    def test_zero_temperature_even(self):
        dist = equilibrium_distribution(ModelParams(p=2, N=9), 0.0)
        assert dist.probabilities[0] == pytest.approx(0.5)
        assert dist.probabilities[-1] == pytest.approx(0.5)
        assert dist.probabilities[1:-1].sum() == 0.0

    @settings(max_examples=40, deadline=None)
    @given(orders, st.integers(min_value=2, max_value=200), temperatures)
    def test_normalized_with_binomial_ratios(self, p, N, T):
        params = ModelParams(p=p, N=N)
        dist = equilibrium_distribution(params, T)
        assert isinstance(dist, EquilibriumDistribution)
        assert dist.probabilities.sum() == pytest.approx(1.0, abs=1e-12)
        k = np.arange(N)
        energies = -0.5 * N * params.grid**p
        log_ratio = np.log((N - k) / (k + 1.0)) - (energies[1:] - energies[:-1]) / T
        np.testing.assert_allclose(np.diff(dist.log_probabilities), log_ratio, rtol=1e-10, atol=1e-10)


class TestEffectiveHamiltonian:
    def test_ground_state_is_sqrt_equilibrium(self):
        params = ModelParams(p=2, N=16)
        op = build_effective_hamiltonian(params, 1.2)
        values, vectors = np.linalg.eigh(op.to_dense())
        assert values[0] == pytest.approx(0.0, abs=1e-10)
        expected = np.sqrt(equilibrium_distribution(params, 1.2).probabilities)
        np.testing.assert_allclose(np.abs(vectors[:, 0]), expected, atol=1e-9)

    def test_spectrum_matches_generator(self):
        params = ModelParams(p=3, N=12)
        effective = np.sort(np.linalg.eigvalsh(build_effective_hamiltonian(params, 0.8).to_dense()))
        generator = np.sort(-np.linalg.eigvals(build_master_generator(params, 0.8).to_dense()).real)
        np.testing.assert_allclose(effective, generator, atol=1e-9)

    @settings(max_examples=30, deadline=None)
    @given(orders, st.integers(min_value=1, max_value=40), temperatures)
    def test_matches_explicit_symmetrization(self, p, N, T):
        params = ModelParams(p=p, N=N)
        explicit = symmetrize_generator(build_master_generator(params, T), equilibrium_distribution(params, T))
        closed = build_effective_hamiltonian(params, T)
        np.testing.assert_allclose(explicit.diagonal, closed.diagonal, rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(explicit.off_diagonal, closed.off_diagonal, rtol=1e-8, atol=1e-12)

    def test_infinite_temperature_off_diagonal(self):
        N = 10
        op = build_effective_hamiltonian(ModelParams(p=3, N=N), 1e12)
        k = np.arange(N)
        np.testing.assert_allclose(op.off_diagonal, -0.5 * np.sqrt((N - k) * (k + 1.0)), rtol=1e-9)

    def test_zero_temperature_rejected(self):
        with pytest.raises(DomainError):
            build_effective_hamiltonian(ModelParams(p=2, N=4), 0.0)

    def test_detailed_balance_violation(self):
        params = ModelParams(p=2, N=6)
        generator = build_master_generator(params, 1.0)
        with pytest.raises(DetailedBalanceError):
            symmetrize_generator(generator, equilibrium_distribution(params, 2.0))


class TestBetaDerivative:
    def test_matches_finite_difference(self):
        params = ModelParams(p=3, N=12)
        T, h = 0.8, 1e-5
        beta = 1.0 / T
        plus = build_effective_hamiltonian(params, 1.0 / (beta + h))
        minus = build_effective_hamiltonian(params, 1.0 / (beta - h))
        derivative = effective_hamiltonian_beta_derivative(params, T)
        fd_diag = (plus.diagonal - minus.diagonal) / (2 * h)
        fd_off = (plus.off_diagonal - minus.off_diagonal) / (2 * h)
        scale = np.abs(derivative.diagonal).max()
        np.testing.assert_allclose(derivative.diagonal, fd_diag, rtol=1e-6, atol=1e-6 * scale)
        np.testing.assert_allclose(derivative.off_diagonal, fd_off, rtol=1e-6, atol=1e-6 * scale)

    def test_flat_steps_contribute_nothing(self):
        # single spin, p = 2: both sectors sit at -J/2
        params = ModelParams(p=2, N=1)
        derivative = effective_hamiltonian_beta_derivative(params, 0.5)
        np.testing.assert_array_equal(derivative.diagonal, [0.0, 0.0])
        np.testing.assert_array_equal(derivative.off_diagonal, [0.0])

    def test_vanishes_at_low_temperature(self):
        params = ModelParams(p=3, N=10)
        cold = effective_hamiltonian_beta_derivative(params, 1e-4)
        warm = effective_hamiltonian_beta_derivative(params, 1.0)
        assert np.abs(cold.off_diagonal).max() < 1e-20
        assert np.abs(cold.diagonal).max() < 1e-20
        assert np.abs(warm.off_diagonal).max() > 1e-3


def test_sech_is_overflow_safe():
    op = build_effective_hamiltonian(ModelParams(p=3, N=200), 1e-3)
    assert np.all(np.isfinite(op.off_diagonal))
    assert math.isfinite(op.spectral_radius_bound())
