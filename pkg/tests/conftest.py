"""Shared fixtures: random positive densities and the quadrature fixture."""

import numpy as np
import pytest

from bitorus import moments as mo


def random_density_moments(rng, n_max, m_max, deg=2, grid=(64, 64)):
    """Moments of |p|^2 + 0.1 for a random polynomial p: always strictly
    positive, so the moment matrix is positive definite at every level."""
    c = rng.normal(size=(deg + 1, deg + 1)) + 1j * rng.normal(
        size=(deg + 1, deg + 1)
    )

    def density(th, ph):
        z = np.exp(1j * th)
        w = np.exp(1j * ph)
        p = np.zeros_like(z, dtype=complex)
        for a in range(deg + 1):
            for b in range(deg + 1):
                p = p + c[a, b] * z ** a * w ** b
        return np.abs(p) ** 2 + 0.1

    return mo.MomentTable.from_density(density, n_max, m_max, grid=grid)


def decoupled_density(th, ph):
    """1 / |4 + z + w|^2: strictly positive, and the orthogonality
    coupling vanishes at level (1, 1)."""
    return 1.0 / np.abs(4.0 + np.exp(1j * th) + np.exp(1j * ph)) ** 2


@pytest.fixture(scope="session")
def fixture_table():
    return mo.moments_from_density(decoupled_density, 3, 3)


@pytest.fixture
def rng():
    return np.random.default_rng(0x5EED)
