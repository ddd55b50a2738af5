"""Tests for antilinear operators, τ constructions and the Takagi-based decomposition."""

from __future__ import annotations

import numpy as np
import pytest

from phtk.errors import BlockNotSymmetric, NotInvertible, ShapeMismatch
from phtk.models.ensembles import random_pseudo_hermitian, random_symmetry_generator
from phtk.theory.antilinear import (
    AntilinearOperator,
    apply_antilinear,
    compose,
    decompose_tau,
    inverse,
    is_anti_pseudo_hermitian,
    takagi,
    tau_general,
    tau_plus,
    tau_plus_inverse,
    tau_sigma,
    tau_sigma_inverse,
)
from phtk.theory.metrics import SignSequence
from phtk.theory.spectra import eig_biorthonormal
from tests.helpers import UPPER_TRIANGULAR


# ── AntilinearOperator ──


class TestAntilinearOperator:
    def test_plain_conjugation(self):
        t = AntilinearOperator(np.eye(2))
        np.testing.assert_allclose(t(np.array([1j, 0])), [-1j, 0])

    def test_weighted_conjugation(self):
        t = AntilinearOperator(np.diag([1.0, -1.0]))
        np.testing.assert_allclose(t(np.array([1, 1j])), [1, 1j])

    def test_conjugation_is_involution(self):
        t = AntilinearOperator(np.eye(3))
        x = np.array([1 + 2j, -3j, 0.5])
        np.testing.assert_allclose(t(t(x)), x)
        assert t.involution_residual() == 0.0

    def test_antilinearity(self):
        rng = np.random.default_rng(0)
        m = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
        t = AntilinearOperator(m)
        x, y = rng.standard_normal(3) + 1j, rng.standard_normal(3) - 2j
        a, b = 2 - 1j, 0.5j
        np.testing.assert_allclose(t(a * x + b * y), np.conj(a) * t(x) + np.conj(b) * t(y))

    def test_hermiticity_is_symmetry(self):
        assert AntilinearOperator(np.array([[1, 2j], [2j, 0]])).hermiticity_residual() == 0.0
        assert AntilinearOperator(np.array([[1, 2j], [-2j, 0]])).hermiticity_residual() > 0.5

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            apply_antilinear(AntilinearOperator(np.eye(2)), np.ones(3))


class TestCompose:
    def test_rules(self):
        rng = np.random.default_rng(1)
        lin = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        m1 = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        m2 = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
        t1, t2 = AntilinearOperator(m1), AntilinearOperator(m2)
        x = np.array([1 - 1j, 2j])

        left = compose(lin, t1)
        assert isinstance(left, AntilinearOperator)
        np.testing.assert_allclose(left(x), lin @ t1(x))

        right = compose(t1, lin)
        assert isinstance(right, AntilinearOperator)
        np.testing.assert_allclose(right(x), t1(lin @ x))

        both = compose(t2, t1)
        assert isinstance(both, np.ndarray)
        np.testing.assert_allclose(both @ x, t2(t1(x)))

    def test_inverse(self):
        m = np.array([[1.0, 1j], [0.0, 2.0]])
        t = AntilinearOperator(m)
        t_inv = inverse(t)
        x = np.array([0.3 + 1j, -2.0])
        np.testing.assert_allclose(t_inv(t(x)), x)
        np.testing.assert_allclose(t_inv.matrix, np.linalg.inv(m).conj())

    def test_singular_inverse(self):
        with pytest.raises(NotInvertible):
            inverse(AntilinearOperator(np.array([[1.0, 1.0], [1.0, 1.0]])))


# ── τ constructions ──


class TestTau:
    def test_identity_system(self, diagonal_system):
        np.testing.assert_allclose(tau_plus(diagonal_system).matrix, np.eye(2), atol=1e-14)

    def test_triangular(self, triangular_system):
        np.testing.assert_allclose(tau_plus(triangular_system).matrix, [[1, -1], [-1, 2]])
        assert is_anti_pseudo_hermitian(UPPER_TRIANGULAR, tau_plus(triangular_system))[0]

    def test_pair(self, pair_system):
        tau = tau_plus(pair_system)
        np.testing.assert_allclose(tau.matrix, np.diag([0.5, -0.5]), atol=1e-15)
        assert is_anti_pseudo_hermitian(pair_system.hamiltonian, tau)[0]

    def test_sigma_diagonal(self, diagonal_system):
        sigma = SignSequence.from_list(diagonal_system, [1, -1])
        np.testing.assert_allclose(tau_sigma(diagonal_system, sigma).matrix, np.diag([1, -1]), atol=1e-14)
        assert is_anti_pseudo_hermitian(diagonal_system.hamiltonian, tau_sigma(diagonal_system, sigma))[0]

    def test_pair_form_differs_from_cross_form(self, pair_system):
        phi = pair_system.phi
        plus, minus = pair_system.pair_slots[0]
        pair_sum = np.outer(phi[:, plus], phi[:, plus]) + np.outer(phi[:, minus], phi[:, minus])
        cross = np.outer(phi[:, plus], phi[:, minus]) + np.outer(phi[:, minus], phi[:, plus])
        np.testing.assert_allclose(tau_sigma(pair_system).matrix, pair_sum, atol=1e-15)
        assert not is_anti_pseudo_hermitian(pair_system.hamiltonian, AntilinearOperator(cross))[0]

    @pytest.mark.parametrize("fixture", ["diagonal_system", "triangular_system", "pair_system"])
    def test_inverse_by_composition(self, fixture, request):
        system = request.getfixturevalue(fixture)
        product = compose(tau_plus(system), tau_plus_inverse(system))
        np.testing.assert_allclose(product, np.eye(2), atol=1e-13)
        product = compose(tau_sigma(system), tau_sigma_inverse(system))
        np.testing.assert_allclose(product, np.eye(2), atol=1e-13)

    def test_exists_for_unpaired_spectra(self):
        system = eig_biorthonormal(np.diag([1 + 1j, 2.0]))
        assert is_anti_pseudo_hermitian(system.hamiltonian, tau_plus(system))[0]
        swap = AntilinearOperator(np.array([[0.0, 1.0], [1.0, 0.0]]))
        assert not is_anti_pseudo_hermitian(system.hamiltonian, swap)[0]

    def test_conjugation_for_real_hermitian(self):
        assert is_anti_pseudo_hermitian(np.array([[1.0, 2.0], [2.0, -1.0]]), AntilinearOperator(np.eye(2)))[0]


# ── Takagi ──


class TestTakagi:
    def test_random_symmetric(self):
        rng = np.random.default_rng(4)
        z = rng.standard_normal((5, 5)) + 1j * rng.standard_normal((5, 5))
        x = z + z.T
        u, s = takagi(x)
        np.testing.assert_allclose(u @ np.diag(s) @ u.T, x, atol=1e-12)
        np.testing.assert_allclose(u.conj().T @ u, np.eye(5), atol=1e-12)
        assert np.all(np.diff(s) <= 0) and np.all(s >= 0)

    def test_repeated_singular_values(self):
        # Both singular values equal 1
        x = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
        u, s = takagi(x)
        np.testing.assert_allclose(s, [1.0, 1.0])
        np.testing.assert_allclose(u @ np.diag(s) @ u.T, x, atol=1e-12)

    def test_scalar_square_root(self):
        u, s = takagi(np.array([[-1.0]]))
        assert s[0] == pytest.approx(1.0)
        assert (u[0, 0] ** 2) == pytest.approx(-1.0)

    def test_rejects_non_symmetric(self):
        with pytest.raises(BlockNotSymmetric):
            takagi(np.array([[1.0, 2.0], [0.0, 1.0]]))


# ── decompose_tau ──


class TestDecomposeTau:
    def test_tau_plus_gives_identity(self, triangular_system):
        a = decompose_tau(triangular_system, tau_plus(triangular_system))
        np.testing.assert_allclose(np.abs(a), np.eye(2), atol=1e-12)

    def test_diagonal_square_roots(self, diagonal_system):
        a = decompose_tau(diagonal_system, AntilinearOperator(np.diag([4.0, 9.0])))
        np.testing.assert_allclose(np.abs(a), np.diag([2.0, 3.0]), atol=1e-12)

    def test_negative_entry_takes_imaginary_root(self, diagonal_system):
        tau = AntilinearOperator(np.diag([-1.0, 1.0]))
        a = decompose_tau(diagonal_system, tau)
        assert a[0, 0] ** 2 == pytest.approx(-1.0)
        np.testing.assert_allclose(tau_general(diagonal_system, a).matrix, tau.matrix, atol=1e-12)

    def test_mixed_roundtrip(self):
        h = random_pseudo_hermitian(2, [1.0 + 2.0j], seed=8)
        system = eig_biorthonormal(h)
        a = random_symmetry_generator(system, seed=9)
        tau = tau_general(system, a)
        a2 = decompose_tau(system, tau)
        np.testing.assert_allclose(tau_general(system, a2).matrix, tau.matrix, atol=1e-8 * np.abs(tau.matrix).max())
        np.testing.assert_allclose(a2 @ h, h @ a2, atol=1e-8 * np.abs(a2).max() * np.abs(h).max())

    def test_not_symmetric(self, triangular_system):
        with pytest.raises(BlockNotSymmetric):
            decompose_tau(triangular_system, AntilinearOperator(np.array([[1.0, 1.0], [0.0, 1.0]])))

    def test_couples_distinct_eigenvalues(self, triangular_system):
        with pytest.raises(BlockNotSymmetric):
            decompose_tau(triangular_system, AntilinearOperator(np.eye(2)))

    def test_singular(self, diagonal_system):
        with pytest.raises(NotInvertible):
            decompose_tau(diagonal_system, AntilinearOperator(np.diag([1.0, 0.0])))
