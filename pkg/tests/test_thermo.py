"""Unit tests for Gibbs states, dephasing and entropies."""

import math

import numpy as np
import pytest

from app.errors import InvalidStateError, ParameterError
from app.services.protocol import random_hermitian
from app.services.quantum.hamiltonians import ParametricOscillatorModel
from app.services.quantum.linalg import eig_hermitian, max_norm
from app.services.quantum.thermo import (
    check_density_matrix,
    dephase,
    free_energy,
    gibbs,
    measurement_entropy_change,
    relative_entropy,
    relative_entropy_to_gibbs,
    vn_entropy,
)

PLUS = np.full((2, 2), 0.5)


def random_density(rng, dim: int) -> np.ndarray:
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


class TestGibbs:
    """Test suite for thermal ensembles."""

    def test_degenerate_zero_hamiltonian(self):
        ensemble = gibbs(np.zeros((2, 2)), 1.0)
        assert ensemble.partition_function == pytest.approx(2.0)
        np.testing.assert_allclose(ensemble.rho, np.eye(2) / 2, atol=1e-15)

    def test_occupations_normalized(self, rng):
        ensemble = gibbs(random_hermitian(rng, 6), 2.3)
        mult = np.array(ensemble.spectrum.multiplicities)
        assert np.sum(mult * ensemble.occupations) == pytest.approx(1.0, abs=1e-12)

    def test_rho_matches_exponential(self, rng):
        h = random_hermitian(rng, 4)
        ensemble = gibbs(h, 0.9)
        values, vectors = np.linalg.eigh(h)
        expected = (vectors * np.exp(-0.9 * values)) @ vectors.conj().T
        np.testing.assert_allclose(ensemble.rho, expected / np.trace(expected), atol=1e-10)

    def test_low_temperature_ground_state(self):
        ensemble = gibbs(np.diag([0.0, 1.0]), 200.0)
        assert ensemble.occupations[0] == pytest.approx(1.0)

    def test_large_energies_do_not_overflow(self):
        ensemble = gibbs(np.diag([-2000.0, -1999.0]), 1.0)
        assert math.isfinite(ensemble.log_partition)
        assert ensemble.free_energy == pytest.approx(-2000.0 - math.log1p(math.exp(-1.0)))

    def test_truncated_oscillator_partition_function(self):
        h = ParametricOscillatorModel(n_trunc=100).evaluate(1.0)
        assert gibbs(h, 1.0).partition_function == pytest.approx(0.5 / math.sinh(0.5), abs=1e-6)

    def test_non_positive_beta(self):
        with pytest.raises(ParameterError):
            gibbs(np.eye(2), 0.0)


class TestFreeEnergy:
    """Test suite for F = -(1/beta) ln Z."""

    def test_unit_partition_function(self):
        assert free_energy(1.0, 2.0) == 0.0

    def test_e(self):
        assert free_energy(math.e, 1.0) == pytest.approx(-1.0)

    def test_non_positive_z(self):
        with pytest.raises(ParameterError):
            free_energy(0.0, 1.0)


class TestDephase:
    """Test suite for the non-selective measurement map."""

    def test_diagonal_fixed_point(self):
        spec = eig_hermitian(np.diag([0.0, 1.0, 2.0]))
        rho = np.diag([0.2, 0.3, 0.5])
        np.testing.assert_allclose(dephase(rho, spec), rho)

    def test_plus_state(self):
        spec = eig_hermitian(np.diag([0.0, 1.0]))
        np.testing.assert_allclose(dephase(PLUS, spec), np.eye(2) / 2)

    def test_energy_invariance_and_idempotence(self, rng):
        for _ in range(100):
            dim = int(rng.integers(2, 7))
            h = random_hermitian(rng, dim)
            spec = eig_hermitian(h)
            rho = random_density(rng, dim)
            rho_m = dephase(rho, spec)
            assert abs(np.trace(rho_m @ h) - np.trace(rho @ h)) <= 1e-12
            assert max_norm(dephase(rho_m, spec) - rho_m) <= 1e-12
            assert max_norm(rho_m @ h - h @ rho_m) <= 1e-10


class TestEntropies:
    """Test suite for von Neumann and relative entropies."""

    def test_pure_state(self):
        assert vn_entropy(PLUS) == pytest.approx(0.0, abs=1e-12)

    def test_maximally_mixed(self):
        assert vn_entropy(np.eye(5) / 5) == pytest.approx(math.log(5))

    def test_qubit_value(self):
        assert vn_entropy(np.diag([0.25, 0.75])) == pytest.approx(0.562335, abs=1e-6)

    def test_measurement_entropy_plus_state(self):
        spec = eig_hermitian(np.diag([0.0, 1.0]))
        assert measurement_entropy_change(PLUS, spec) == pytest.approx(math.log(2))

    def test_measurement_entropy_diagonal(self):
        spec = eig_hermitian(np.diag([0.0, 1.0]))
        assert measurement_entropy_change(np.diag([0.3, 0.7]), spec) == pytest.approx(0.0, abs=1e-12)

    def test_measurement_entropy_nonnegative(self, rng):
        for _ in range(200):
            spec = eig_hermitian(random_hermitian(rng, 4))
            assert measurement_entropy_change(random_density(rng, 4), spec) >= -1e-10

    def test_relative_entropy_self(self, rng):
        rho = random_density(rng, 3)
        assert relative_entropy(rho, rho) == pytest.approx(0.0, abs=1e-10)

    def test_relative_entropy_classical(self):
        assert relative_entropy(np.diag([1.0, 0.0]), np.eye(2) / 2) == pytest.approx(math.log(2))

    def test_relative_entropy_support_violation(self):
        assert relative_entropy(np.eye(2) / 2, np.diag([1.0, 0.0])) == math.inf

    def test_relative_entropy_nonnegative(self, rng):
        for _ in range(100):
            assert relative_entropy(random_density(rng, 3), random_density(rng, 3)) >= -1e-10

    def test_relative_entropy_to_gibbs_uses_exact_log(self):
        # eigenvalue e^-60 of the Gibbs state lies below the support threshold
        ensemble = gibbs(np.diag([0.0, 60.0]), 1.0)
        assert relative_entropy_to_gibbs(ensemble.rho, ensemble) == pytest.approx(0.0, abs=1e-12)

    def test_invalid_state(self):
        with pytest.raises(InvalidStateError):
            check_density_matrix(np.diag([0.5, 0.6]))
