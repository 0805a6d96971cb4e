#!/usr/bin/env python3
"""Sweep random geodesics and count where the Frobenius distance profile from 1 fails to be convex."""

import argparse
import sys
from pathlib import Path

# Add src to path
sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from unitary_finsler.geodesics import Verdict, probe_g2, random_probe  # noqa: E402
from unitary_finsler.norms import FinslerNorm  # noqa: E402
from unitary_finsler.sampling import trial_generator  # noqa: E402


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seed", type=int, default=7)
    parser.add_argument("--trials", type=int, default=200)
    parser.add_argument("--dims", type=int, nargs="+", default=[2, 3, 4, 6, 8])
    parser.add_argument("--radii", type=float, nargs="+", default=[0.5, 1.0, 2.0, 3.0])
    args = parser.parse_args()

    print(f"{'dim':>4} {'radius':>7} {'violated':>9} {'worst':>12}")
    print("-" * 36)
    for dim in args.dims:
        for radius in args.radii:
            violated = 0
            worst = 0.0
            for trial in range(args.trials):
                rng = trial_generator(args.seed, dim * 100_000 + trial)
                probe = random_probe(rng, dim, radius, FinslerNorm.operator())
                report = probe_g2(probe)
                if report.verdict is Verdict.VIOLATED:
                    violated += 1
                worst = min(worst, report.min_second_difference)
            print(f"{dim:>4} {radius:>7.2f} {violated:>9} {worst:>12.3e}")


if __name__ == "__main__":
    main()
