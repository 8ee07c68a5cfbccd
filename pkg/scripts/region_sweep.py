"""Sweep the closed-form admissibility regions against the algorithm.

For each parameter family with an analytic admissibility region, draw
random points, evaluate the closed-form predicate, run the synthesis
algorithm, and report any disagreements.
"""

import argparse

from bitorus import cli


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--count", type=int, default=1000, help="points per family"
    )
    parser.add_argument(
        "--band", type=float, default=1e-6,
        help="skip points this close to the analytic boundary",
    )
    parser.add_argument("--seed", type=int, default=cli.SWEEP_SEED)
    args = parser.parse_args()

    total = 0
    for name in ("deg11", "contractive-toeplitz", "blocked-extension"):
        rows, disagreements = cli.run_example(
            name, count=args.count, boundary_band=args.band, seed=args.seed
        )
        inside = sum(1 for r in rows if r["algorithm"])
        print(
            f"{name:22s} points={len(rows):5d} admissible={inside:5d} "
            f"disagreements={disagreements}"
        )
        total += disagreements
    if total:
        print(f"\n{total} disagreements: closed forms and algorithm differ")
        raise SystemExit(1)
    print("\nclosed forms and algorithmic verdicts agree everywhere")


if __name__ == "__main__":
    main()
