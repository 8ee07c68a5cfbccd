"""Factor positive trigonometric polynomials, or watch the refusal.

Two inputs: |4zw + z + w|^2, which admits a stable spectral factor, and
a strictly positive polynomial whose coupling matrix is nonzero, which
provably does not.
"""

import numpy as np

from bitorus import fejer


def report(label, coeffs):
    res = fejer.fejer_riesz_factor(coeffs)
    print(f"{label}:")
    print(f"  verdict              {res.verdict}")
    print(f"  coupling norm        {res.k_norm:.3e}")
    print(f"  min torus sample     {res.min_sample:.6f}")
    if res.verdict == "Factored":
        print(f"  reconstruction error {res.reconstruction_error:.3e}")
        cert = res.factor.certificate
        print(f"  stable factor        min modulus {cert.min_modulus:.4f}")
        print("  factor coefficients:")
        for i in range(res.factor.grid.shape[0]):
            for j in range(res.factor.grid.shape[1]):
                v = res.factor.grid[i, j]
                if abs(v) > 1e-12:
                    print(f"    z^{i} w^{j}: {v.real:+.6f}{v.imag:+.6f}j")
    print()


def main():
    factorable = fejer.product_coeffs(
        np.array([[0.0, 1.0], [1.0, 4.0]], dtype=complex)
    )
    report("|4zw + z + w|^2", factorable)

    positive_but_coupled = {
        (0, 0): 6.0, (1, 0): 1.0, (-1, 0): 1.0, (0, 1): 1.0, (0, -1): 1.0,
        (1, -1): 1.0, (-1, 1): 1.0,
    }
    report("6 + 2cos(t) + 2cos(s) + 2cos(t - s)", positive_but_coupled)


if __name__ == "__main__":
    main()
