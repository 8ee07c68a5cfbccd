"""Spectral factorization of bivariate trigonometric polynomials."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bitorus import bipoly, fejer, moments as mo, synthesis

from conftest import decoupled_density


@pytest.fixture(scope="module")
def fixture11():
    return mo.moments_from_density(decoupled_density, 1, 1)


def test_coupling_vanishes_on_fixture(fixture11):
    assert fejer.coupling_norm(fixture11, 1, 1) < 1e-9


def test_stable_factor_shape(fixture11):
    factor = fejer.stable_from_functional(fixture11, 1, 1)
    assert factor.certificate.stable
    # the factor is proportional to 4zw + z + w
    target = np.array([[0.0, 1.0], [1.0, 4.0]], dtype=complex)
    scale = factor.grid[1, 1] / target[1, 1]
    assert np.max(np.abs(factor.grid - scale * target)) < 1e-9


def test_spectral_matching(fixture11):
    factor = fejer.stable_from_functional(fixture11, 1, 1)
    assert fejer.spectral_match_error(fixture11, factor.grid, 1, 1) < 1e-7


def test_geometric_test(fixture11):
    assert fejer.geometric_test(fixture11, 1, 1)


def test_kernel_identity(fixture11):
    pts = bipoly.sample_points(8)
    for (z, w), (z1, w1) in zip(pts[::2], pts[1::2]):
        assert fejer.factor_residual(fixture11, 1, 1, z, w, z1, w1) < 1e-9


def test_product_coeffs():
    f = fejer.product_coeffs(np.array([[0.0, 1.0], [1.0, 4.0]], dtype=complex))
    assert f[(0, 0)] == pytest.approx(18.0)
    assert f[(1, 0)] == pytest.approx(4.0)
    assert f.get((1, 1), 0.0) == pytest.approx(0.0)
    # hermitian: f_{-k,-l} = conj(f_{k,l})
    for (k, l), v in f.items():
        assert f[(-k, -l)] == pytest.approx(np.conj(v))


def test_factorization_roundtrip():
    f = fejer.product_coeffs(np.array([[0.0, 1.0], [1.0, 4.0]], dtype=complex))
    res = fejer.fejer_riesz_factor(f)
    assert res.verdict == "Factored"
    assert res.k_norm < 1e-9
    assert res.reconstruction_error < 1e-8
    assert res.factor.certificate.stable


def test_refusal_with_coupling():
    grid = synthesis.ParameterGrid(2, 2)
    grid.set(0, 0, 1.0)
    grid.set(-1, 1, 0.3)
    state = synthesis.synthesize(grid)
    assert abs(fejer.coupling_norm(state.table, 1, 1) - 0.3) < 1e-10
    with pytest.raises(fejer.NotApplicable) as exc:
        fejer.stable_from_functional(state.table, 1, 1)
    assert abs(exc.value.k_norm - 0.3) < 1e-10
    assert not fejer.geometric_test(state.table, 1, 1)


def test_positive_but_not_factorable():
    bad = {
        (0, 0): 6.0, (1, 0): 1.0, (-1, 0): 1.0, (0, 1): 1.0, (0, -1): 1.0,
        (1, -1): 1.0, (-1, 1): 1.0,
    }
    res = fejer.fejer_riesz_factor(bad)
    assert res.verdict == "NotFactorable"
    assert res.k_norm > 1e-3


def test_not_positive_refused():
    neg = {(0, 0): 1.0, (1, 1): 1.0, (-1, -1): 1.0}
    res = fejer.fejer_riesz_factor(neg)
    assert res.verdict == "NotPositive"


def test_trig_eval_and_degree():
    f = {(0, 0): 2.0, (1, 0): 0.5, (-1, 0): 0.5, (1, 1): 0.1, (-1, -1): 0.1}
    assert fejer.trig_degree(f) == (1, 1)
    z, w = np.exp(0.7j), np.exp(-0.2j)
    want = sum(v * z ** k * w ** l for (k, l), v in f.items())
    assert abs(fejer.trig_eval(f, z, w) - want) < 1e-12


def test_trig_save_load(tmp_path):
    f = {
        (0, 0): 2.0 + 0j, (1, 0): 0.5 - 0.25j, (-1, 0): 0.5 + 0.25j,
        (1, -1): 0.125j, (-1, 1): -0.125j,
    }
    path = tmp_path / "f.trig"
    fejer.save_trig(f, path)
    back = fejer.load_trig(path)
    for k, v in f.items():
        assert back[k] == pytest.approx(v)


def test_certify_stable_detects_root_inside():
    # z - 0.5 vanishes at z = 0.5 inside the disk
    grid = np.array([[-0.5], [1.0]], dtype=complex)
    cert = fejer.certify_stable(grid)
    assert not cert.stable
    # 2 + z/2 + w/2 has no zeros on the closed bidisk
    grid2 = np.array([[2.0, 0.5], [0.5, 0.0]], dtype=complex)
    assert fejer.certify_stable(grid2).stable


def test_full_measure_characterization(fixture11):
    table = mo.moments_from_density(decoupled_density, 2, 2)
    params = synthesis.extract_parameters(table, 2, 2)
    ch = fejer.full_measure_characterization(params, 1, 1, window=1)
    assert ch.ok
    assert ch.worst < 1e-9
    assert ch.propagation_defect < 1e-9


def test_characterization_flags_violation():
    bad = synthesis.ParameterGrid.delta(2, 2)
    bad.set(2, 1, 0.1)
    ch = fejer.full_measure_characterization(bad, 1, 1, window=1)
    assert not ch.ok
    assert ch.condition == "column_parameter"
    assert ch.level == (2, 1)


@settings(deadline=None, max_examples=25)
@given(st.integers(0, 2 ** 32 - 1))
def test_product_coeffs_positive_on_torus(seed):
    rng = np.random.default_rng(seed)
    g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    f = fejer.product_coeffs(g)
    for th in np.linspace(0, 2 * np.pi, 9):
        for ph in np.linspace(0, 2 * np.pi, 9):
            z, w = np.exp(1j * th), np.exp(1j * ph)
            val = fejer.trig_eval(f, z, w)
            assert abs(val.imag) < 1e-9 * max(1.0, abs(val))
            assert val.real >= -1e-9
