"""Tests for the generalized 𝒫, 𝒯, 𝒞 operators, their verification report and the CPT inner product."""

from __future__ import annotations

import numpy as np
import pytest

from phtk.config import get_profile
from phtk.errors import ComplexSpectrum, UnpairedSpectrum
from phtk.models.ensembles import random_pseudo_hermitian, random_quasi_hermitian
from phtk.theory.ptc import build_ptc, cpt_inner, cpt_inner_antilinear, verify_lemma1
from phtk.theory.spectra import eig_biorthonormal
from tests.helpers import ROTATION


# ── build_ptc ──


class TestBuildPTC:
    def test_hermitian_diagonal(self, diagonal_system):
        ptc = build_ptc(diagonal_system)
        np.testing.assert_allclose(ptc.P.matrix, np.diag([1, -1]), atol=1e-14)
        np.testing.assert_allclose(ptc.C, np.diag([1, -1]), atol=1e-14)
        np.testing.assert_allclose(ptc.T.matrix, np.diag([1, -1]), atol=1e-14)
        assert ptc.real_spectrum

    def test_triangular(self, triangular_system):
        ptc = build_ptc(triangular_system)
        np.testing.assert_allclose(ptc.C, [[1, -2], [0, -1]], atol=1e-14)
        np.testing.assert_allclose(ptc.C @ ptc.C, np.eye(2), atol=1e-14)
        h = triangular_system.hamiltonian
        np.testing.assert_allclose(ptc.C @ h, h @ ptc.C, atol=1e-14)
        np.testing.assert_allclose(ptc.P.matrix, [[1, -1], [-1, 0]], atol=1e-14)
        np.testing.assert_allclose(ptc.Lambda, [[2, 1], [1, 1]], atol=1e-14)
        np.testing.assert_allclose(ptc.Lambda @ ptc.P.matrix, ptc.C, atol=1e-14)

    def test_pair(self, pair_system):
        ptc = build_ptc(pair_system)
        plus, minus = pair_system.pair_slots[0]
        phi = pair_system.phi
        expected_p = np.outer(phi[:, plus], phi[:, minus].conj()) + np.outer(phi[:, minus], phi[:, plus].conj())
        np.testing.assert_allclose(ptc.P.matrix, expected_p, atol=1e-14)
        np.testing.assert_allclose(ptc.C, np.eye(2), atol=1e-14)
        assert not ptc.real_spectrum

    def test_unpaired(self):
        with pytest.raises(UnpairedSpectrum):
            build_ptc(eig_biorthonormal(np.diag([1 + 1j, 2.0])))


# ── verify_lemma1 ──


class TestPTCReport:
    def test_diagonal_all_pass(self, diagonal_system):
        report = verify_lemma1(diagonal_system)
        assert report.passed
        assert all(c.passed for c in report.checks)
        assert report.get("C=P").passed
        assert report.get("C^-1P-herm").passed

    def test_triangular_conditional_items(self, triangular_system):
        report = verify_lemma1(triangular_system)
        assert report.passed
        assert not report.get("inv-P").passed and report.get("inv-P").conditional
        assert not report.get("inv-T").passed and report.get("inv-T").conditional
        assert not report.get("c3.1").passed
        # Identities that need involutions fail, consistently with the verdicts
        assert not report.get("e=TeT").passed
        assert report.get("cond-agree").passed
        assert report.get("inv-agree").passed
        assert report.get("Lambda").passed
        assert "C=P" not in report.tags()

    def test_item_numbers(self, triangular_system):
        report = verify_lemma1(triangular_system)
        assert {c.item for c in report.checks} == {1, 2, 3, 4, 5, 6, 7}
        assert report.get("ph").item == 3

    def test_pair_lambda_not_applicable(self, pair_system):
        report = verify_lemma1(pair_system)
        assert report.passed
        assert report.get("Lambda").residual is None
        assert "cond-agree" not in report.tags()

    def test_normal_pair_system_skips_c_equals_p(self):
        # Normal H gives Φ = Ψ, but 𝒞 is the identity on pair slots while 𝒫 swaps them
        system = eig_biorthonormal(ROTATION)
        np.testing.assert_allclose(system.phi, system.psi, atol=1e-12)
        report = verify_lemma1(system, get_profile("strict"))
        assert report.passed, [c.tag for c in report.failures()]
        assert report.get("C=P").residual is None
        assert "not applicable" in report.get("C=P").note

    @pytest.mark.parametrize("seed", range(5))
    def test_random_quasi_hermitian(self, seed):
        rng = np.random.default_rng(seed)
        h = random_quasi_hermitian(5, np.sort(rng.uniform(-5, 5, 5)), seed=seed)
        report = verify_lemma1(eig_biorthonormal(h), get_profile("strict"))
        assert report.passed, [c.tag for c in report.failures()]

    @pytest.mark.parametrize("seed", range(5))
    def test_random_mixed(self, seed):
        h = random_pseudo_hermitian(2, [0.5 + 1.5j, -1.0 + 0.7j], seed=seed)
        report = verify_lemma1(eig_biorthonormal(h), get_profile("strict"))
        assert report.passed, [c.tag for c in report.failures()]

    def test_residuals_table(self, triangular_system):
        residuals = verify_lemma1(triangular_system).residuals()
        assert residuals["nilp-C"] < 1e-14
        assert "inv-agree" not in residuals


# ── CPT inner product ──


class TestCPTInner:
    def test_identity_system(self, diagonal_system):
        x, y = np.array([1j, 2.0]), np.array([3.0, -1j])
        assert cpt_inner(x, y, diagonal_system) == pytest.approx(np.vdot(x, y))

    def test_triangular_eigenvectors(self, triangular_system):
        psi = triangular_system.psi
        assert cpt_inner(psi[:, 0], psi[:, 1], triangular_system) == pytest.approx(0.0, abs=1e-14)
        assert cpt_inner(psi[:, 1], psi[:, 1], triangular_system) == pytest.approx(1.0)
        assert cpt_inner(np.array([1.0, 0.0]), np.array([1.0, 0.0]), triangular_system) == pytest.approx(1.0)

    def test_antilinear_route_agrees(self):
        h = random_quasi_hermitian(4, [-2.0, -0.5, 1.0, 3.0], seed=12)
        system = eig_biorthonormal(h)
        rng = np.random.default_rng(12)
        x = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        y = rng.standard_normal(4) + 1j * rng.standard_normal(4)
        assert cpt_inner_antilinear(x, y, system) == pytest.approx(cpt_inner(x, y, system), rel=1e-10)

    def test_positive_definite(self):
        system = eig_biorthonormal(random_quasi_hermitian(3, [0.0, 1.0, 2.0], seed=1))
        x = np.array([1.0, -2j, 0.5])
        value = cpt_inner(x, x, system)
        assert value.real > 0 and abs(value.imag) < 1e-12

    def test_complex_spectrum_rejected(self, pair_system):
        with pytest.raises(ComplexSpectrum):
            cpt_inner(np.ones(2), np.ones(2), pair_system)
        with pytest.raises(ComplexSpectrum):
            cpt_inner_antilinear(np.ones(2), np.ones(2), pair_system)
