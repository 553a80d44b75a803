#!/usr/bin/env python3
"""Distortion report for the sample-map catalog.

For each map: dilatation spot checks, the finite-distortion grid verdict, a
multiplicity count, and a CSV sweep of the derivative data.

Usage: python scripts/distortion_report.py [out_dir]
"""

import sys
from pathlib import Path

import numpy as np

from modlab.mappings import (
    K_INF,
    dilatation,
    distortion_to_csv,
    finite_distortion_check,
    fold_map,
    identity_map,
    multiplicity,
    radial_stretch,
    winding,
)

MAPS = [identity_map(), winding(2), winding(3), radial_stretch(2), fold_map()]


def main() -> int:
    out_dir = Path(sys.argv[1]) if len(sys.argv) > 1 else Path("results/distortion")
    out_dir.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(0)
    targets = [0.5 * np.exp(1j * rng.uniform(0, 6.28)) for _ in range(5)]
    print(f"{'map':<18} {'K(0.4+0.1j)':>12} {'finite dist.':>13} {'N (5 targets)':>14}")
    for f in MAPS:
        k = dilatation(f, 0.4 + 0.1j)
        k_str = "inf" if k is K_INF else f"{float(k):.4f}"
        fd = finite_distortion_check(f, grid=33)
        rep = multiplicity(f, targets, seed_grid=24)
        print(f"{f.label:<18} {k_str:>12} {str(fd.passed):>13} {rep.supremum:>14}")
        safe = f.label.replace(":", "_").replace("(", "").replace(")", "")
        distortion_to_csv(f, 33, out_dir / f"{safe}.csv")
    print(f"CSV sweeps in {out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
