"""Numerical cross-checks of the bivariate recurrence identities.

Runs the brute-force families on random positive densities and reports
the max residual of every identity the package relies on.  Any entry
above ~1e-9 means a transcription error somewhere.
"""

import numpy as np

from bitorus import bipoly, moments as mo


def random_density_moments(rng, n_max, m_max, deg=2):
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

    return mo.MomentTable.from_density(density, n_max, m_max, grid=(64, 64))


def main():
    rng = np.random.default_rng(0x5EED)
    worst = {}
    for trial in range(4):
        t = random_density_moments(rng, 4, 4)
        for n in range(0, 4):
            for m in range(0, 4):
                rep = {}
                rep.update(bipoly.verify_recurrences(t, n, m))
                rep.update(bipoly.verify_pointwise_formulas(t, n, m))
                for z, w, z1, w1 in [
                    (np.exp(0.3j), np.exp(1.1j), np.exp(-0.7j), np.exp(2.2j)),
                    (0.6 * np.exp(0.9j), 1.3 * np.exp(0.2j), 0.8, 1.1j),
                ]:
                    rep["cd"] = max(
                        rep.get("cd", 0.0),
                        bipoly.christoffel_darboux_residual(
                            t, n, m, z, w, z1, w1
                        ),
                    )
                for key, val in rep.items():
                    tag = f"({n},{m}) {key}"
                    worst[tag] = max(worst.get(tag, 0.0), val)
    bad = 0
    for tag in sorted(worst):
        flag = ""
        if worst[tag] > 1e-9:
            flag = "   <-- BAD"
            bad += 1
        print(f"{tag:45s} {worst[tag]:.3e}{flag}")
    print(f"\n{bad} failing identities")


if __name__ == "__main__":
    main()
