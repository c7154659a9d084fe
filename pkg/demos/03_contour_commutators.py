"""Commutators two ways.

The iterated commutator [..[T, b], .., b] is computed from the modified kernel
and again as a Cauchy integral of e^{-zb} T(e^{zb} .) around a circle.  The
trapezoid rule on M nodes converges like delta^M, which the last table shows.
"""

import numpy as np

from weightlab.commutators import ContourSpec, commutator_contour, commutator_direct, contour_error_slope, default_delta
from weightlab.grid import CubeFamily, Family, Grid
from weightlab.operators import hilbert_op, riesz_op
from weightlab.oscillation import dyadic_martingale, script_bmo_norm
from weightlab.weights import ExponentProfile

grid = Grid(1, 128)
fam = CubeFamily(Family.ALL_INTERVALS, grid)
b = dyadic_martingale(grid, 5, 7, 0.8)
f = np.random.default_rng(1).standard_normal(128)
delta = default_delta(ExponentProfile(p=2.0, q=2.0, s=2.0), script_bmo_norm(b, fam).value)
print(f"contour radius {delta:.4f}, 64 nodes")

for T in (hilbert_op(grid), riesz_op(grid, 0.5)):
    for k in (1, 2, 3):
        exact = commutator_direct(T, b, k, f).values
        res = commutator_contour(T, b, k, f, ContourSpec(delta))
        err = np.abs(res.value.values - exact).max() / np.abs(exact).max()
        print(f"{T.kind:<8} k={k}  relative error {err:.1e}  imaginary residue {res.imag_residue:.1e}")

spread = np.abs(b.values - 0.5 * (b.values.max() + b.values.min())).max()
slope, deltas, errors = contour_error_slope(hilbert_op(grid), b, 2, f, 40 / spread)
print("\nradius      error")
for d, e in zip(deltas, errors):
    print(f"{d:8.4f}  {e:10.3e}")
print(f"log-log slope {slope:.2f} (nodes: 64)")
