"""Matrix orthogonal polynomials on the circle: block Levinson layer."""

import numpy as np
import pytest

from bitorus import bipoly, linalg, moments as mo, opuc

from conftest import random_density_moments


@pytest.fixture(scope="module")
def seq_and_table():
    rng = np.random.default_rng(7)
    t = random_density_moments(rng, 3, 2)
    blocks = opuc.blocks_from_moments(t, 3, 2)
    seq = opuc.levinson(blocks, 3)
    return seq, blocks, t


def test_orthonormality(seq_and_table):
    seq, blocks, _ = seq_and_table
    m = seq.left[0].size - 1
    for i in range(4):
        for j in range(4):
            g = opuc.block_functional(blocks, seq.left[i], seq.left[j])
            assert np.max(np.abs(g - np.eye(m + 1) * (i == j))) < 1e-9
            gr = opuc.right_pairing(blocks, seq.right[i], seq.right[j])
            assert np.max(np.abs(gr - np.eye(m + 1) * (i == j))) < 1e-9


def test_reflections_are_contractions(seq_and_table):
    seq, _, _ = seq_and_table
    for i in range(1, 4):
        assert linalg.spectral_norm(seq.reflections[i]) < 1.0


def test_cholesky_stack(seq_and_table):
    seq, _, t = seq_and_table
    l = opuc.cholesky_stack(seq)
    c = mo.assemble(t, 3, 2)
    assert np.max(np.abs(l @ c @ l.conj().T - np.eye(c.shape[0]))) < 1e-9
    # block upper triangular with 3x3 blocks (m + 1 = 3)
    for br in range(4):
        for bc in range(br):
            assert np.allclose(l[3 * br: 3 * br + 3, 3 * bc: 3 * bc + 3], 0)


def test_inverse_step_recovers_previous(seq_and_table):
    seq, _, _ = seq_and_table
    for i in range(1, 4):
        li, ri = opuc.inverse_step(
            seq.left[i], seq.right[i], seq.reflections[i],
            seq.a[i], seq.ahat[i],
        )
        for got, want in zip(li.coeffs, seq.left[i - 1].coeffs):
            assert np.max(np.abs(got - want)) < 1e-9
        for got, want in zip(ri.coeffs, seq.right[i - 1].coeffs):
            assert np.max(np.abs(got - want)) < 1e-9


def test_reflection_from_boundary(seq_and_table):
    seq, _, _ = seq_and_table
    for i in range(1, 4):
        e = opuc.reflection_from_boundary(
            seq.left[i], seq.right[i], seq.a[i], seq.ahat[i]
        )
        assert np.max(np.abs(e - seq.reflections[i])) < 1e-9


def test_christoffel_darboux(seq_and_table):
    seq, _, _ = seq_and_table
    for z, z1 in [
        (np.exp(0.3j), np.exp(-1.2j)),
        (0.7 * np.exp(0.9j), 1.2),
        (1.4 * np.exp(2.0j), 0.5 * np.exp(-0.4j)),
    ]:
        assert opuc.cd_residual(seq, 3, z, z1) < 1e-9


def test_identities_and_matching(seq_and_table):
    seq, _, _ = seq_and_table
    assert opuc.det_identity_residual(seq, 3) < 1e-8
    assert opuc.entropy_residual(seq, 3) < 1e-6
    for key, val in opuc.spectral_matching_check(seq).items():
        assert val < 1e-7, key
    assert opuc.monotonicity_defect(seq) < 1e-10
    for key, val in opuc.centro_symmetry_report(seq).items():
        assert val < 1e-8, key


def test_stability_of_reverse(seq_and_table):
    seq, _, _ = seq_and_table
    assert opuc.is_stable(seq.left[3].reverse())
    # z - 1 has a root on the boundary: not stable
    unstable = opuc.make_poly(
        [-np.eye(1, dtype=complex), np.eye(1, dtype=complex)]
    )
    assert not opuc.is_stable(unstable)


def test_bridge_to_bivariate(seq_and_table):
    seq, _, t = seq_and_table
    n, m = 3, 2
    vp = bipoly.phi_level(t, n, m)
    for z, w in bipoly.sample_points(6):
        stack = np.array([w ** (m - c) for c in range(m + 1)])
        assert np.max(np.abs(vp(z, w) - seq.left[n](z) @ stack)) < 1e-9


def test_matrix_fejer_riesz_roundtrip():
    rng = np.random.default_rng(21)
    g = opuc.make_poly(
        [
            np.eye(2) * 2.0,
            rng.normal(size=(2, 2)) * 0.3 + 1j * rng.normal(size=(2, 2)) * 0.3,
            rng.normal(size=(2, 2)) * 0.2,
        ]
    )
    grid = 256
    samples = np.zeros((grid, 2, 2), dtype=complex)
    for ti in range(grid):
        v = g(np.exp(2j * np.pi * ti / grid))
        samples[ti] = v @ v.conj().T
    qb = opuc.trig_poly_blocks(samples, 2)
    factor, eps = opuc.matrix_fejer_riesz(qb, 2)
    assert eps < 1e-8
    assert opuc.is_stable(factor)
    for ti in range(0, grid, 7):
        z = np.exp(2j * np.pi * ti / grid)
        v = factor(z)
        assert np.max(np.abs(v @ v.conj().T - samples[ti])) < 1e-8


def test_levinson_rejects_indefinite():
    t = mo.MomentTable(2, 1)
    t.set(0, 0, 1.0)
    t.set(1, 0, 2.0)
    for idx in ((0, 1), (1, 1), (1, -1), (2, 0), (2, 1), (2, -1)):
        t.set(*idx, 0.0)
    blocks = opuc.blocks_from_moments(t, 2, 1)
    with pytest.raises((opuc.NotStrictlyPositive, linalg.NotPositiveDefinite)):
        opuc.levinson(blocks, 2)
