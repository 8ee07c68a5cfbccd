"""Parameter synthesis: construction, duality, extraction, refusals."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bitorus import bipoly, linalg, moments as mo, synthesis

from conftest import random_density_moments


def small_complex(draw_re, draw_im):
    return complex(draw_re, draw_im)


def test_parameter_grid_symmetry():
    g = synthesis.ParameterGrid(2, 2)
    g.set(0, 0, 1.0)
    g.set(-1, 2, 0.2 + 0.3j)
    assert g.get(1, -2) == pytest.approx(0.2 - 0.3j)
    assert g.get(2, 2) == 0  # unset defaults to zero
    s = g.swapped()
    assert s.get(2, -1) == pytest.approx(0.2 + 0.3j)


def test_parameter_grid_save_load(tmp_path, rng):
    g = synthesis.ParameterGrid(2, 2)
    g.set(0, 0, 1.5)
    g.set(1, 0, 0.1 - 0.2j)
    g.set(-1, 1, 0.05j)
    g.set(2, 2, 0.3)
    path = tmp_path / "grid.params"
    g.save(path)
    back = synthesis.ParameterGrid.load(path)
    assert back.n_top == 2 and back.m_top == 2
    for idx in ((0, 0), (1, 0), (-1, 1), (2, 2), (1, -1)):
        assert back.get(*idx) == pytest.approx(g.get(*idx))


def test_delta_grid_synthesizes_delta():
    state = synthesis.synthesize(synthesis.ParameterGrid.delta(2, 2))
    want = mo.MomentTable.delta(2, 2)
    worst = max(
        abs(state.table.get(i, j) - v) for (i, j), v in want.items()
    )
    assert worst < 1e-14
    assert state.report.ok


def test_synthesis_matches_brute_force(rng):
    t = random_density_moments(rng, 2, 2)
    grid = synthesis.extract_parameters(t, 2, 2)
    state = synthesis.synthesize(grid)
    worst = max(abs(state.table.get(i, j) - v) for (i, j), v in t.items())
    assert worst < 1e-9
    for n in range(3):
        for m in range(3):
            vp = bipoly.phi_level(t, n, m)
            assert np.max(np.abs(state.phi(n, m).rows - vp.rows)) < 1e-9
            vt = bipoly.phi_tilde_level(t, n, m)
            assert np.max(np.abs(state.phi_tilde(n, m).rows - vt.rows)) < 1e-9


def test_coefficient_duality(rng):
    t = random_density_moments(rng, 2, 2)
    grid = synthesis.extract_parameters(t, 2, 2)
    state = synthesis.synthesize(grid)
    c = state.coefficients(2, 2)
    # the tilde half at (n, m) is the lex half of the swapped problem
    assert np.max(np.abs(c.t_k - c.k.conj().T)) < 1e-10
    assert np.max(np.abs(c.t_k1 - c.k1.T)) < 1e-10
    assert np.max(np.abs(c.t_imat - c.imat.conj().T)) < 1e-10
    assert np.max(np.abs(c.t_i1 - c.i1.T)) < 1e-10


def test_extraction_roundtrip(rng):
    t = random_density_moments(rng, 2, 2)
    grid = synthesis.extract_parameters(t, 2, 2)
    state = synthesis.synthesize(grid)
    back = synthesis.extract_parameters(state.table, 2, 2)
    worst = 0.0
    for (i, j), v in grid.u.items():
        worst = max(worst, abs(back.get(i, j) - v))
    assert worst < 1e-9


def test_axis_refusal():
    bad = synthesis.ParameterGrid.delta(2, 1)
    bad.set(1, 0, 1.5)
    with pytest.raises(synthesis.Inadmissible) as exc:
        synthesis.synthesize(bad)
    assert exc.value.condition == "axis_z_contraction"
    assert exc.value.level == (1, 0)
    report = synthesis.admissibility(bad)
    assert not report.ok
    assert report.first_failure.level == (1, 0)


def test_mass_gate():
    bad = synthesis.ParameterGrid.delta(1, 1)
    bad.set(0, 0, -1.0)
    with pytest.raises(synthesis.Inadmissible) as exc:
        synthesis.synthesize(bad)
    assert exc.value.condition == "u00_positive"


def test_coupling_refusal():
    bad = synthesis.ParameterGrid.delta(1, 1)
    bad.set(-1, 1, 1.2)
    with pytest.raises(synthesis.Inadmissible) as exc:
        synthesis.synthesize(bad)
    assert exc.value.level == (1, 1)
    assert exc.value.condition == "k_contraction"


def test_one_step_extension(rng):
    t = random_density_moments(rng, 2, 2)
    grid = synthesis.extract_parameters(t, 2, 2)
    trimmed = t.copy()
    synthesis._force_moment(trimmed, -2, 2, 0.0)
    synthesis._force_moment(trimmed, 2, 2, 0.0)
    ext = synthesis.one_step_extension(
        trimmed, 2, 2, grid.get(2, 2), grid.get(-2, 2)
    )
    worst = max(abs(ext.table.get(i, j) - v) for (i, j), v in t.items())
    assert worst < 1e-9


def test_synthesized_table_positive(rng):
    t = random_density_moments(rng, 3, 2)
    grid = synthesis.extract_parameters(t, 3, 2)
    state = synthesis.synthesize(grid)
    ok, pivot = mo.is_positive_definite(state.table, 3, 2)
    assert ok and pivot > 0


def test_diagnostics_small(rng):
    t = random_density_moments(rng, 2, 2)
    state = synthesis.synthesize(synthesis.extract_parameters(t, 2, 2))
    for key, val in state.diagnostics.items():
        assert val < 1e-8, key


@settings(deadline=None, max_examples=25)
@given(
    st.lists(
        st.complex_numbers(max_magnitude=0.25, allow_nan=False,
                           allow_infinity=False),
        min_size=8, max_size=8,
    )
)
def test_small_parameters_admissible(vals):
    """Parameters well inside the unit ball at every index stay
    admissible at level (2, 2) and reproduce themselves on extraction."""
    g = synthesis.ParameterGrid(2, 2)
    g.set(0, 0, 1.0)
    idx = [(1, 0), (2, 0), (0, 1), (0, 2), (1, 1), (-1, 1), (2, 1), (1, 2)]
    for (i, j), v in zip(idx, vals):
        g.set(i, j, 0.5 * v)
    state = synthesis.synthesize(g)
    back = synthesis.extract_parameters(state.table, 2, 2)
    for i, j in idx:
        assert abs(back.get(i, j) - g.get(i, j)) < 1e-8
