"""Shared fixtures: hand-checkable systems and module-scoped truncated models."""

import numpy as np
import pytest

from phtk.config import get_profile
from phtk.models.oscillator import bender_hamiltonian, pt_normalize
from phtk.theory.spectra import eig_biorthonormal
from tests.helpers import rotation_system, upper_triangular_system


@pytest.fixture
def diagonal_system():
    """H = diag(1, 2), so Ψ = Φ = I."""
    return eig_biorthonormal(np.diag([1.0, 2.0]))


@pytest.fixture
def triangular_system():
    return upper_triangular_system()


@pytest.fixture
def pair_system():
    return rotation_system()


@pytest.fixture
def strict():
    return get_profile("strict")


@pytest.fixture
def spectral():
    return get_profile("spectral")


@pytest.fixture(scope="module")
def harmonic_64():
    """PT-normalized ν = 0 model at N = 64."""
    model = bender_hamiltonian(0.0, 64)
    return model, pt_normalize(eig_biorthonormal(model.H, 1e-9), model)


@pytest.fixture(scope="module")
def cubic_64():
    """PT-normalized ν = 1 (ix³) model at N = 64."""
    model = bender_hamiltonian(1.0, 64)
    return model, pt_normalize(eig_biorthonormal(model.H, 1e-9), model, strict_modes=16)
