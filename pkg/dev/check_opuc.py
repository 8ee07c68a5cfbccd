"""Numerical cross-checks for the matrix orthogonal polynomial layer."""

import sys

import numpy as np

sys.path.insert(0, "dev")
from check_formulas import random_density_moments

from bitorus import bipoly, linalg, moments as mo, opuc


def main():
    rng = np.random.default_rng(7)
    t = random_density_moments(rng, 3, 2)
    n, m = 3, 2
    blocks = opuc.blocks_from_moments(t, n, m)
    seq = opuc.levinson(blocks, n)
    rep = {}

    # orthonormality of both families
    worst = 0.0
    for i in range(n + 1):
        for j in range(n + 1):
            g = opuc.block_functional(blocks, seq.left[i], seq.left[j])
            worst = max(worst, np.max(np.abs(g - np.eye(m + 1) * (i == j))))
    rep["left_orthonormal"] = worst
    worst = 0.0
    for i in range(n + 1):
        for j in range(n + 1):
            g = opuc.right_pairing(blocks, seq.right[i], seq.right[j])
            worst = max(worst, np.max(np.abs(g - np.eye(m + 1) * (i == j))))
    rep["right_orthonormal"] = worst

    # Cholesky stack: L* L = C^{-1}
    l = opuc.cholesky_stack(seq)
    c = mo.assemble(t, n, m)
    rep["stack_inverse"] = np.max(np.abs(l @ c @ l.conj().T - np.eye(c.shape[0])))

    # inverse step and boundary reflection
    worst_inv = 0.0
    worst_refl = 0.0
    for i in range(1, n + 1):
        li, ri = opuc.inverse_step(
            seq.left[i], seq.right[i], seq.reflections[i], seq.a[i], seq.ahat[i]
        )
        for a, bcoef in zip(li.coeffs, seq.left[i - 1].coeffs):
            worst_inv = max(worst_inv, np.max(np.abs(a - bcoef)))
        for a, bcoef in zip(ri.coeffs, seq.right[i - 1].coeffs):
            worst_inv = max(worst_inv, np.max(np.abs(a - bcoef)))
        e = opuc.reflection_from_boundary(
            seq.left[i], seq.right[i], seq.a[i], seq.ahat[i]
        )
        worst_refl = max(worst_refl, np.max(np.abs(e - seq.reflections[i])))
    rep["inverse_step"] = worst_inv
    rep["boundary_reflection"] = worst_refl

    # CD, matching, identities
    rep["cd"] = max(
        opuc.cd_residual(seq, n, np.exp(0.3j), np.exp(-1.2j)),
        opuc.cd_residual(seq, n, 0.7 * np.exp(0.9j), 1.2),
    )
    rep.update(
        {"match_" + k: v for k, v in opuc.spectral_matching_check(seq).items()}
    )
    rep["det_identity"] = opuc.det_identity_residual(seq, n)
    rep["entropy"] = opuc.entropy_residual(seq, n)
    rep.update(opuc.centro_symmetry_report(seq))
    rep["stable"] = 0.0 if opuc.is_stable(seq.left[n].reverse()) else 1.0

    rep["monotonic_defect"] = opuc.monotonicity_defect(seq)

    # bridge to the bivariate family: Phi = L_n (w^m..1)^T
    vp = bipoly.phi_level(t, n, m)
    worst = 0.0
    for z, w in bipoly.sample_points(6):
        stack = np.array([w ** (m - c) for c in range(m + 1)])
        worst = max(worst, np.max(np.abs(vp(z, w) - seq.left[n](z) @ stack)))
    rep["bivariate_bridge"] = worst
    # reverse bridge: revPhi row = (1,w,..,w^m) J revR(z)^T J
    jm = linalg.reversal(m + 1)
    worst = 0.0
    for z, w in bipoly.sample_points(6):
        row = np.array([w ** c for c in range(m + 1)])
        rhs = row @ jm @ seq.right[n].reverse()(z).T @ jm
        worst = max(worst, np.max(np.abs(vp.reversed()(z, w) - rhs)))
    rep["reverse_bridge"] = worst

    # Fejer-Riesz roundtrip on a random stable product
    g = opuc.make_poly(
        [
            np.eye(2) * 2.0,
            rng.normal(size=(2, 2)) * 0.3 + 1j * rng.normal(size=(2, 2)) * 0.3,
            rng.normal(size=(2, 2)) * 0.2,
        ]
    )
    deg = 2
    grid = 512
    samples = np.zeros((grid, 2, 2), dtype=complex)
    for ti in range(grid):
        v = g(np.exp(2j * np.pi * ti / grid))
        samples[ti] = v @ v.conj().T
    qb = opuc.trig_poly_blocks(samples, deg)
    factor, eps = opuc.matrix_fejer_riesz(qb, deg)
    worst = 0.0
    for ti in range(0, grid, 7):
        z = np.exp(2j * np.pi * ti / grid)
        v = factor(z)
        worst = max(worst, np.max(np.abs(v @ v.conj().T - samples[ti])))
    rep["fejer_riesz_roundtrip"] = worst
    rep["fejer_riesz_eps"] = eps
    rep["fejer_riesz_stable"] = 0.0 if opuc.is_stable(factor) else 1.0

    bad = 0
    for key in sorted(rep):
        flag = ""
        if rep[key] > 1e-8:
            flag = "   <-- BAD"
            bad += 1
        print(f"{key:30s} {rep[key]:.3e}{flag}")
    print(f"\n{bad} failing checks")


if __name__ == "__main__":
    main()
