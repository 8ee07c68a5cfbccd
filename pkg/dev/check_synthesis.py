"""Dual-path checks: parameter synthesis vs brute-force orthogonalization."""

import sys

import numpy as np

sys.path.insert(0, "dev")
from check_formulas import random_density_moments

from bitorus import bipoly, moments as mo, synthesis


def compare_state(state, table, n_top, m_top, rep, tag):
    # reconstructed moments
    worst = 0.0
    for (i, j), v in table.items():
        worst = max(worst, abs(state.table.get(i, j) - v))
    rep[f"{tag}_moments"] = worst

    # polynomials, both orderings
    worst = 0.0
    worst_t = 0.0
    worst_c = 0.0
    for n in range(n_top + 1):
        for m in range(m_top + 1):
            vp = bipoly.phi_level(table, n, m)
            worst = max(worst, np.max(np.abs(state.phi(n, m).rows - vp.rows)))
            vt = bipoly.phi_tilde_level(table, n, m)
            worst_t = max(
                worst_t, np.max(np.abs(state.phi_tilde(n, m).rows - vt.rows))
            )
            got = state.coefficients(n, m)
            want = bipoly.coefficients_by_inner_product(table, n, m)
            for name in (
                "k", "gamma", "k1", "gamma1", "imat", "i1",
                "t_k", "t_gamma", "t_k1", "t_gamma1", "t_imat", "t_i1",
            ):
                a = getattr(got, name)
                b = getattr(want, name)
                if a.size:
                    worst_c = max(worst_c, np.max(np.abs(a - b)))
            for name in ("ehat", "a", "t_ehat", "t_a"):
                a = getattr(got, name)
                b = getattr(want, name)
                if a is None:
                    continue
                worst_c = max(worst_c, np.max(np.abs(a - b)))
    rep[f"{tag}_phi"] = worst
    rep[f"{tag}_phi_tilde"] = worst_t
    rep[f"{tag}_coefficients"] = worst_c


def main():
    rng = np.random.default_rng(11)
    rep = {}

    # delta measure: all parameters zero
    grid = synthesis.ParameterGrid.delta(2, 2)
    state = synthesis.synthesize(grid)
    compare_state(state, mo.MomentTable.delta(2, 2), 2, 2, rep, "delta")

    # random positive tables: extraction then resynthesis must be exact
    for trial in range(3):
        n_top, m_top = [(3, 2), (2, 3), (3, 3)][trial]
        table = random_density_moments(rng, n_top, m_top)
        grid = synthesis.extract_parameters(table, n_top, m_top)
        state = synthesis.synthesize(grid)
        compare_state(state, table, n_top, m_top, rep, f"trial{trial}")
        for key, val in state.diagnostics.items():
            rep[f"trial{trial}_{key}"] = val

    # quadrature fixture 1 / |4 + z + w|^2
    table = mo.moments_from_density(
        lambda th, ph: 1.0 / np.abs(4.0 + np.exp(1j * th) + np.exp(1j * ph)) ** 2, 2, 2
    )
    grid = synthesis.extract_parameters(table, 2, 2)
    state = synthesis.synthesize(grid)
    compare_state(state, table, 2, 2, rep, "fixture")

    # inadmissible parameters must be refused at the right gate
    bad = synthesis.ParameterGrid.delta(2, 1)
    bad.set(1, 0, 1.5)
    try:
        synthesis.synthesize(bad)
        rep["reject_axis"] = 1.0
    except synthesis.Inadmissible as exc:
        rep["reject_axis"] = 0.0 if exc.condition == "axis_z_contraction" else 1.0
    report = synthesis.admissibility(bad)
    rep["reject_report"] = 0.0 if (
        not report.ok and report.first_failure.level == (1, 0)
    ) else 1.0

    # one-step extension agrees with direct synthesis
    table = random_density_moments(rng, 2, 2)
    grid = synthesis.extract_parameters(table, 2, 2)
    trimmed = table.copy()
    synthesis._force_moment(trimmed, -2, 2, 0.0)
    synthesis._force_moment(trimmed, 2, 2, 0.0)
    ext = synthesis.one_step_extension(
        trimmed, 2, 2, grid.get(2, 2), grid.get(-2, 2)
    )
    worst = 0.0
    for (i, j), v in table.items():
        worst = max(worst, abs(ext.table.get(i, j) - v))
    rep["one_step_extension"] = worst

    bad_count = 0
    for key in sorted(rep):
        flag = ""
        if rep[key] > 1e-8:
            flag = "   <-- BAD"
            bad_count += 1
        print(f"{key:40s} {rep[key]:.3e}{flag}")
    print(f"\n{bad_count} failing checks")


if __name__ == "__main__":
    main()
