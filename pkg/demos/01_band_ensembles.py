"""Band matrix ensembles: the four kinds, their support patterns, and the
interval machinery used to decompose them into block-tridiagonal form.

Run: python3 demos/01_band_ensembles.py
"""

import numpy as np

from bandlo import (
    BandProfile,
    extract_comparison_matrix,
    partition_intervals,
    row_context,
    sample_matrix,
    zero_row,
)


def show(matrix, label):
    glyphs = {0: ".", 1: "+", -1: "-"}
    print(f"\n{label}")
    for row in matrix.entries:
        print("  " + "".join(glyphs.get(int(x), "#") for x in row))


n = 16

# The general kind carries signs on |i-j| <= d and a configurable law outside
# (zero here). The periodic kind wraps the band around the corners; the
# modified kind keeps the band strictly inside |i-j| < d.
for kind, d in (("general", 3), ("periodic", 3), ("modified", 3), ("block", 4)):
    profile = BandProfile(n=n, d=d, kind=kind)
    show(sample_matrix(profile, seed=1), f"{kind}  n={n} d={d}")

# Same seed, same matrix; different seed, different matrix.
p1 = sample_matrix(BandProfile(n=8, d=2, kind="general"), seed=7)
p2 = sample_matrix(BandProfile(n=8, d=2, kind="general"), seed=7)
p3 = sample_matrix(BandProfile(n=8, d=2, kind="general"), seed=8)
print("\nreproducible:", np.array_equal(p1.entries, p2.entries),
      "| seed-sensitive:", not np.array_equal(p1.entries, p3.entries))

# The interval partition covers range(n) with blocks of length e = floor(d/s),
# choosing s in (2,3) so the last block is at least half-length.
part = partition_intervals(64, 17)
print(f"\npartition of 64 at bandwidth 17: e={part.e}, s={part.s}, "
      f"m={part.m}, fallback={part.fallback}")
print("intervals:", part.intervals)

# Zeroing one row and then keeping only the tridiagonal blocks of the
# partition produces the comparison matrix used to study kernel vectors.
profile = BandProfile(n=16, d=6, kind="periodic")
a = sample_matrix(profile, seed=3)
part = partition_intervals(16, 6)
ctx = row_context(part, 8)
show(zero_row(a, 8), "periodic with row 8 zeroed")
show(extract_comparison_matrix(a, part, ctx),
     "comparison matrix: tridiagonal blocks only, row 8 zeroed")
