"""Checks for the stable-factor / factorization layer."""

import sys

import numpy as np

sys.path.insert(0, "dev")

from bitorus import bipoly, fejer, moments as mo, synthesis

rep = {}

# fixture: density 1/|4+z+w|^2 has zero coupling at (1,1)
table = mo.moments_from_density(
    lambda th, ph: 1.0 / np.abs(4.0 + np.exp(1j * th) + np.exp(1j * ph)) ** 2, 1, 1
)
rep["fixture_k_norm"] = fejer.coupling_norm(table, 1, 1)
factor = fejer.stable_from_functional(table, 1, 1)
rep["fixture_stable"] = 0.0 if factor.certificate.stable else 1.0
# factor proportional to 4zw + z + w
g = factor.grid
target = np.array([[0.0, 1.0], [1.0, 4.0]], dtype=complex)
scale = g[1, 1] / target[1, 1]
rep["fixture_factor_shape"] = float(np.max(np.abs(g - scale * target)))
rep["fixture_match"] = fejer.spectral_match_error(table, g, 1, 1)
rep["fixture_geometric"] = 0.0 if fejer.geometric_test(table, 1, 1) else 1.0

# kernel identity residual when the coupling vanishes
worst = 0.0
pts = bipoly.sample_points(8)
for (z, w), (z1, w1) in zip(pts[::2], pts[1::2]):
    worst = max(worst, fejer.factor_residual(table, 1, 1, z, w, z1, w1))
rep["fixture_kernel_identity"] = worst

# trig polynomial factorization roundtrip
f = fejer.product_coeffs(np.array([[0.0, 1.0], [1.0, 4.0]], dtype=complex))
assert abs(f[(0, 0)] - 18.0) < 1e-12 and abs(f[(1, 0)] - 4.0) < 1e-12
res = fejer.fejer_riesz_factor(f)
rep["fr_verdict"] = 0.0 if res.verdict == "Factored" else 1.0
rep["fr_reconstruction"] = res.reconstruction_error
rep["fr_k_norm"] = res.k_norm

# non-factorable strictly positive polynomial via a coupled functional
grid = synthesis.ParameterGrid(2, 2)
grid.set(0, 0, 1.0)
grid.set(-1, 1, 0.3)
state = synthesis.synthesize(grid)
rep["coupled_k_norm_err"] = abs(
    fejer.coupling_norm(state.table, 1, 1) - 0.3
)
try:
    fejer.stable_from_functional(state.table, 1, 1)
    rep["coupled_refused"] = 1.0
except fejer.NotApplicable as exc:
    rep["coupled_refused"] = abs(exc.k_norm - 0.3)
rep["coupled_geometric"] = (
    1.0 if fejer.geometric_test(state.table, 1, 1) else 0.0
)

# a positive trig poly with nonzero coupling must be refused
bad = {
    (0, 0): 6.0, (1, 0): 1.0, (-1, 0): 1.0, (0, 1): 1.0, (0, -1): 1.0,
    (1, -1): 1.0, (-1, 1): 1.0,
}
res2 = fejer.fejer_riesz_factor(bad)
rep["bad_refused"] = 0.0 if res2.verdict == "NotFactorable" else 1.0
rep["bad_k_small"] = 1.0 if res2.k_norm < 1e-3 else 0.0

# non-positive input
neg = {(0, 0): 1.0, (1, 1): 1.0, (-1, -1): 1.0}
res3 = fejer.fejer_riesz_factor(neg)
rep["neg_verdict"] = 0.0 if res3.verdict == "NotPositive" else 1.0

# full-measure characterization on the fixture parameters (window 1)
params = synthesis.extract_parameters(
    mo.moments_from_density(lambda th, ph: 1.0 / np.abs(4.0 + np.exp(1j * th) + np.exp(1j * ph)) ** 2, 2, 2),
    2, 2,
)
ch = fejer.full_measure_characterization(params, 1, 1, window=1)
rep["char_pass"] = 0.0 if ch.ok else 1.0
rep["char_worst"] = ch.worst
rep["char_propagation"] = ch.propagation_defect

bad_grid = synthesis.ParameterGrid.delta(2, 2)
bad_grid.set(2, 1, 0.1)
ch2 = fejer.full_measure_characterization(bad_grid, 1, 1, window=1)
rep["char_violation"] = (
    0.0
    if (not ch2.ok and ch2.condition == "column_parameter"
        and ch2.level == (2, 1))
    else 1.0
)

bad_count = 0
for key in sorted(rep):
    flag = ""
    if rep[key] > 1e-6:
        flag = "   <-- BAD"
        bad_count += 1
    print(f"{key:30s} {rep[key]:.3e}{flag}")
print(f"\n{bad_count} failing checks")
