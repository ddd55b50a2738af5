"""Tests for metric operators, sign sequences and the metric decomposition."""

from __future__ import annotations

import numpy as np
import pytest

from phtk.errors import BlockNotHermitian, NotAMetric, ShapeMismatch, SignDomainMismatch
from phtk.models.ensembles import random_quasi_hermitian, random_symmetry_generator
from phtk.theory.metrics import (
    MetricKind,
    SignSequence,
    decompose_eta,
    eta_general,
    eta_plus,
    eta_plus_inverse,
    eta_sigma,
    eta_sigma_inverse,
    is_pseudo_hermitian,
    lambda_operator,
    pseudo_inner,
)
from phtk.theory.spectra import eig_biorthonormal
from tests.helpers import UPPER_TRIANGULAR


# ── SignSequence ──


class TestSignSequence:
    def test_alternating_follows_group_index(self, triangular_system):
        assert SignSequence.alternating(triangular_system).as_list() == [1, -1]

    def test_pairs_carry_no_sign(self, pair_system):
        assert SignSequence.uniform(pair_system).signs == {}
        np.testing.assert_array_equal(SignSequence.uniform(pair_system).weights(pair_system), [0, 0])

    def test_wrong_length(self, triangular_system):
        with pytest.raises(SignDomainMismatch):
            SignSequence.from_list(triangular_system, [1])

    def test_foreign_keys(self, triangular_system):
        with pytest.raises(SignDomainMismatch):
            SignSequence({(0, 0): 1, (5, 0): 1}).weights(triangular_system)

    def test_values_must_be_signs(self, triangular_system):
        with pytest.raises(SignDomainMismatch):
            SignSequence({(0, 0): 1, (1, 0): 2}).weights(triangular_system)


# ── η₊ and η_σ ──


class TestEtaPlus:
    def test_hermitian_diagonal_is_identity(self, diagonal_system):
        eta = eta_plus(diagonal_system)
        np.testing.assert_allclose(eta.matrix, np.eye(2), atol=1e-14)
        assert eta.kind is MetricKind.POSITIVE

    def test_triangular(self, triangular_system):
        eta = eta_plus(triangular_system)
        np.testing.assert_allclose(eta.matrix, [[1, -1], [-1, 2]])
        h = UPPER_TRIANGULAR
        np.testing.assert_allclose(h.conj().T @ eta.matrix, [[1, -1], [-1, 3]])
        np.testing.assert_allclose(eta.matrix @ h, [[1, -1], [-1, 3]])
        assert eta.is_positive()

    def test_pair_is_indefinite(self, pair_system):
        eta = eta_plus(pair_system)
        np.testing.assert_allclose(eta.matrix, np.diag([0.5, -0.5]), atol=1e-15)
        assert eta.kind is MetricKind.INDEFINITE
        assert not eta.is_positive()
        ok, residual = is_pseudo_hermitian(pair_system.hamiltonian, eta)
        assert ok and residual == pytest.approx(0.0, abs=1e-15)


class TestEtaSigma:
    def test_uniform_equals_eta_plus(self, triangular_system):
        np.testing.assert_allclose(
            eta_sigma(triangular_system, SignSequence.uniform(triangular_system)).matrix,
            eta_plus(triangular_system).matrix,
        )

    def test_diagonal_alternating(self, diagonal_system):
        sigma = SignSequence.from_list(diagonal_system, [1, -1])
        np.testing.assert_allclose(eta_sigma(diagonal_system, sigma).matrix, np.diag([1, -1]), atol=1e-14)

    def test_triangular_minus_plus(self, triangular_system):
        sigma = SignSequence.from_list(triangular_system, [-1, 1])
        eta = eta_sigma(triangular_system, sigma)
        np.testing.assert_allclose(eta.matrix, [[-1, 1], [1, 0]])
        assert eta.kind is MetricKind.INDEFINITE
        assert is_pseudo_hermitian(UPPER_TRIANGULAR, eta)[0]

    def test_inverse_triangular(self, triangular_system):
        inv = eta_plus_inverse(triangular_system).matrix
        np.testing.assert_allclose(inv, [[2, 1], [1, 1]])
        np.testing.assert_allclose(inv @ eta_plus(triangular_system).matrix, np.eye(2), atol=1e-14)

    def test_inverse_pair_cross_form(self, pair_system):
        product = eta_sigma_inverse(pair_system).matrix @ eta_plus(pair_system).matrix
        np.testing.assert_allclose(product, np.eye(2), atol=1e-14)

    @pytest.mark.parametrize("signs", [[1, 1], [1, -1], [-1, 1], [-1, -1]])
    def test_every_sign_is_a_metric(self, triangular_system, signs):
        sigma = SignSequence.from_list(triangular_system, signs)
        eta = eta_sigma(triangular_system, sigma).matrix
        np.testing.assert_allclose(eta, eta.conj().T)
        np.testing.assert_allclose(eta @ eta_sigma_inverse(triangular_system, sigma).matrix, np.eye(2), atol=1e-14)

    def test_lambda_matches_inverse_on_real_spectra(self, triangular_system):
        np.testing.assert_allclose(lambda_operator(triangular_system), eta_plus_inverse(triangular_system).matrix)


# ── Checks ──


class TestPseudoHermiticity:
    def test_hermitian_identity_metric(self):
        ok, residual = is_pseudo_hermitian(np.diag([1.0, 2.0]), np.eye(2))
        assert ok and residual == 0.0

    def test_triangular_positive_metric(self):
        assert is_pseudo_hermitian(UPPER_TRIANGULAR, np.array([[1, -1], [-1, 2]]))[0]

    def test_identity_fails_for_non_hermitian(self):
        ok, residual = is_pseudo_hermitian(UPPER_TRIANGULAR, np.eye(2))
        assert not ok and residual > 0.1

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            is_pseudo_hermitian(UPPER_TRIANGULAR, np.eye(3))


class TestPseudoInner:
    def test_standard(self):
        assert pseudo_inner(np.array([1j, 0]), np.array([1j, 0]), np.eye(2)) == pytest.approx(1.0)

    def test_indefinite(self):
        assert pseudo_inner(np.array([0, 1]), np.array([0, 1]), np.diag([1, -1])) == pytest.approx(-1.0)

    def test_eigenvectors_orthonormal(self, triangular_system):
        eta = eta_plus(triangular_system)
        psi = triangular_system.psi
        assert pseudo_inner(psi[:, 0], psi[:, 1], eta) == pytest.approx(0.0, abs=1e-14)
        assert pseudo_inner(psi[:, 0], psi[:, 0], eta) == pytest.approx(1.0)
        assert pseudo_inner(psi[:, 1], psi[:, 1], eta) == pytest.approx(1.0)


# ── decompose_eta ──


class TestDecomposeEta:
    def test_eta_plus_gives_identity(self, triangular_system):
        a, sigma = decompose_eta(triangular_system, eta_plus(triangular_system))
        np.testing.assert_allclose(a, np.eye(2), atol=1e-12)
        assert sigma.as_list() == [1, 1]

    def test_diagonal_scales(self, diagonal_system):
        a, sigma = decompose_eta(diagonal_system, np.diag([4.0, -9.0]))
        assert sigma.as_list() == [1, -1]
        np.testing.assert_allclose(np.abs(a), np.diag([2.0, 3.0]), atol=1e-12)

    def test_recovers_indefinite_sign(self, triangular_system):
        eta = np.array([[-1.0, 1.0], [1.0, 0.0]])
        a, sigma = decompose_eta(triangular_system, eta)
        assert sigma.as_list() == [-1, 1]
        np.testing.assert_allclose(np.abs(a), np.eye(2), atol=1e-12)

    def test_roundtrip_with_degeneracy(self):
        h = random_quasi_hermitian(4, [-1.0, 0.5, 0.5, 2.0], seed=11)
        system = eig_biorthonormal(h)
        assert system.multiplicities == [1, 2, 1]
        a = random_symmetry_generator(system, seed=5)
        sigma = SignSequence.from_list(system, [1, -1, 1, -1])
        eta = eta_general(system, a, sigma).matrix
        a2, sigma2 = decompose_eta(system, eta)
        rebuilt = a2.conj().T @ eta_sigma(system, sigma2).matrix @ a2
        np.testing.assert_allclose(rebuilt, eta, atol=1e-8 * np.abs(eta).max())
        np.testing.assert_allclose(a2 @ h, h @ a2, atol=1e-8 * np.abs(a2).max() * np.abs(h).max())
        assert sorted(sigma2.as_list()) == [-1, -1, 1, 1]

    def test_pair_roundtrip(self, pair_system):
        a = random_symmetry_generator(pair_system, seed=2)
        eta = eta_general(pair_system, a).matrix
        a2, sigma2 = decompose_eta(pair_system, eta)
        assert sigma2.signs == {}
        rebuilt = a2.conj().T @ eta_plus(pair_system).matrix @ a2
        np.testing.assert_allclose(rebuilt, eta, atol=1e-10)

    def test_not_hermitian(self, triangular_system):
        with pytest.raises(NotAMetric):
            decompose_eta(triangular_system, np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_singular(self, diagonal_system):
        with pytest.raises(NotAMetric):
            decompose_eta(diagonal_system, np.diag([1.0, 0.0]))

    def test_not_a_metric_for_h(self, triangular_system):
        # Hermitian and invertible but couples the two eigenvalues
        with pytest.raises(BlockNotHermitian):
            decompose_eta(triangular_system, np.eye(2))
