"""Bivariate orthonormal families: orthonormality, recurrences, kernels."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bitorus import bipoly, linalg, moments as mo

from conftest import random_density_moments


def test_poly_eval_matches_naive(rng):
    g = rng.normal(size=(3, 4)) + 1j * rng.normal(size=(3, 4))
    z, w = 0.7 + 0.2j, -1.1 + 0.4j
    want = sum(
        g[i, j] * z ** i * w ** j
        for i in range(3)
        for j in range(4)
    )
    assert abs(bipoly.poly_eval(g, z, w) - want) < 1e-12 * abs(want)


@settings(deadline=None, max_examples=40)
@given(st.integers(0, 3), st.integers(0, 3), st.integers(0, 2 ** 32 - 1))
def test_reverse_grid_involution(n, m, seed):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(n + 1, m + 1)) + 1j * rng.normal(size=(n + 1, m + 1))
    assert np.allclose(bipoly.reverse_grid(bipoly.reverse_grid(g)), g)
    # reversal identity: rev(p)(z, w) = z^n w^m conj(p(1/conj(z), 1/conj(w)))
    z, w = 0.8 * np.exp(0.4j), 1.3 * np.exp(-1.1j)
    lhs = bipoly.poly_eval(bipoly.reverse_grid(g), z, w)
    rhs = z ** n * w ** m * np.conj(
        bipoly.poly_eval(g, 1 / np.conj(z), 1 / np.conj(w))
    )
    assert abs(lhs - rhs) < 1e-9 * max(1.0, abs(rhs))


def test_orthonormal_families(rng):
    t = random_density_moments(rng, 3, 2)
    for n, m in [(0, 0), (1, 1), (2, 2), (3, 1)]:
        vp = bipoly.phi_level(t, n, m)
        g = bipoly.vector_inner(t, vp, vp)
        assert np.max(np.abs(g - np.eye(m + 1))) < 1e-9
        vt = bipoly.phi_tilde_level(t, n, m)
        gt = bipoly.vector_inner(t, vt, vt)
        assert np.max(np.abs(gt - np.eye(n + 1))) < 1e-9
        # each lex row is orthogonal to all lower-total-order monomials
        top = vp.rows[0]
        for a in range(n):
            for b in range(m + 1):
                mono = np.zeros((a + 1, b + 1), dtype=complex)
                mono[a, b] = 1.0
                assert abs(mo.grid_inner_product(t, top, mono)) < 1e-9


def test_leading_matrix_triangular(rng):
    t = random_density_moments(rng, 2, 2)
    vp = bipoly.phi_level(t, 2, 2)
    lead = vp.leading_matrix()
    assert np.allclose(lead, np.triu(lead))
    assert np.all(np.diag(lead).real > 0)


def test_recurrence_and_pointwise_identities(rng):
    t = random_density_moments(rng, 3, 3)
    for n in range(3):
        for m in range(3):
            rep = {}
            rep.update(bipoly.verify_recurrences(t, n, m))
            rep.update(bipoly.verify_pointwise_formulas(t, n, m))
            bad = {k: v for k, v in rep.items() if v > 1e-9}
            assert not bad, f"level ({n},{m}): {bad}"


def test_christoffel_darboux(rng):
    t = random_density_moments(rng, 3, 2)
    pts = bipoly.sample_points(8)
    for (z, w), (z1, w1) in zip(pts[::2], pts[1::2]):
        assert bipoly.christoffel_darboux_residual(t, 2, 2, z, w, z1, w1) < 1e-9


def test_coefficients_shapes(rng):
    t = random_density_moments(rng, 2, 2)
    c = bipoly.coefficients_by_inner_product(t, 2, 1)
    n, m = 2, 1
    assert c.ehat.shape == (m + 1, m + 1)
    assert c.a.shape == (m + 1, m + 1)
    assert c.k.shape == (m, n)
    assert c.k1.shape == (m, n)
    assert c.gamma.shape == (m, m + 1)
    assert c.gamma1.shape == (m, m + 1)
    assert c.t_ehat.shape == (n + 1, n + 1)
    assert c.t_k.shape == (n, m)
    # coupling matrices are contractions for a positive functional
    assert linalg.spectral_norm(c.k) < 1.0
    assert linalg.spectral_norm(c.ehat) < 1.0


def test_vector_polynomial_save_load(tmp_path, rng):
    t = random_density_moments(rng, 2, 2)
    vp = bipoly.phi_level(t, 2, 2)
    path = tmp_path / "level.poly"
    vp.save(path)
    back = bipoly.VectorPolynomial.load(path, ordering="lex")
    assert back.n == 2 and back.m == 2 and back.height == vp.height
    assert np.max(np.abs(back.rows - vp.rows)) < 1e-12


def test_gram_schmidt_levels_requires_pd():
    t = mo.MomentTable(1, 1)
    t.set(0, 0, 1.0)
    t.set(1, 0, 2.0)
    for idx in ((0, 1), (1, 1), (1, -1)):
        t.set(*idx, 0.0)
    with pytest.raises(linalg.NotPositiveDefinite):
        bipoly.gram_schmidt_levels(t, 1, 1)


@pytest.fixture
def rng():
    return np.random.default_rng(12)
