"""Bilinear Hilbert transform and its commutators.

Checks the periodic symmetrized model against the direct double sum, then
estimates weighted commutator norms on a few grid sizes for a fixed
resolution-independent weight/symbol pair.
"""

import numpy as np

from weightlab.grid import Grid, GridFn
from weightlab.operators import bht, bht_op, bilinear_weighted_norm
from weightlab.verify import multilinear_corpus

n = 64
rng = np.random.default_rng(0)
f, g = rng.standard_normal(n), rng.standard_normal(n)
fast = bht(GridFn(Grid(1, n), f), GridFn(Grid(1, n), g)).values
slow = np.array([
    sum((f[(i - t) % n] * g[(i + t) % n] - f[(i + t) % n] * g[(i - t) % n]) / t for t in range(1, n // 2))
    for i in range(n)
])
print(f"BHT vs double loop at N={n}: {np.abs(fast - slow).max():.1e}")

print("\n   N    alpha   lower bound on the weighted norm")
for size in (32, 64, 128):
    grid = Grid(1, size)
    weights, symbols = multilinear_corpus(grid, 0)
    (w1, w2), (b1, b2) = weights[0], symbols[0]
    for alpha in ((0, 0), (1, 0), (1, 1)):
        est = bilinear_weighted_norm(bht_op(grid), w1, w2, 2.0, 2.0, b=(b1, b2), alpha=alpha, starts=3)
        print(f"{size:4d}   {alpha}   {est.value:.4f}")
