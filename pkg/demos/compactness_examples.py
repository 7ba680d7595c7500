#!/usr/bin/env python
# The three named examples: a flat constant symbol, a ball symbol whose
# localized functional decays while the averaged one grows with the fiber
# dimension, and a ball symbol with harmonic weights
import numpy as np
from bargmann_lab import diagnostics

d_ladder = (2, 8, 32)

for tag in ("star1", "star2", "taebaek"):
    report = diagnostics.run_example(tag, d_ladder, order=24, D_ladder=(4, 8, 12))
    print(f"== {tag}")
    for row in report["per_d"]:
        # rows are radii, columns are directions
        N = row["stroethoff"].values.max(axis=1)
        M = row["necessary_random"].values.max(axis=1)
        sigma = row["singular"].values[-1]
        print(f"d={row['d']:3d}  N(0)={N[0]:.4f}  N(5)={N[-1]:.2e}  "
              f"M(0)={M[0]:.4f}  M(5)={M[-1]:.2e}  sigma_1={sigma[0]:.4f}  verdict={row['singular'].verdict}")
    print(report["verdicts"])

# for the harmonic example, N at the origin is the scalar ball value times
# the harmonic number of d
report = diagnostics.run_example("taebaek", d_ladder, order=24, D_ladder=(4, 8))
for row in report["per_d"]:
    H = np.sum(1 / np.arange(1, row["d"] + 1))
    print(row["d"], row["stroethoff"].values[0].max() / H)
