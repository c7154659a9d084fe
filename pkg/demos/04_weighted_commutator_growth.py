"""How the Hilbert commutator norm on L^2(w) grows with [w]_{A_2}.

Two-value weights sweep [w]_{A_2} from 1 to 100.  The ratio to [w]^{k+1}
should stay bounded; the fitted exponent is printed per order.
"""

import numpy as np

from weightlab.commutators import commutator_matrix
from weightlab.grid import CubeFamily, Family, Grid
from weightlab.operators import hilbert_op, spectral_norm
from weightlab.oscillation import dyadic_martingale, script_bmo_norm
from weightlab.verify import crw_weights
from weightlab.weights import ap_constant

grid = Grid(1, 256)
fam = CubeFamily(Family.ALL_INTERVALS, grid)
T = hilbert_op(grid)
b = dyadic_martingale(grid, 2, 6)
nb = script_bmo_norm(b, fam).value

rows = []
for w in crw_weights(grid, 8):
    a2 = ap_constant(w, 2, fam).value
    wv = np.sqrt(w.values)  # L^2(w) norm = l^2 norm after conjugating by w^{1/2}
    norms = []
    for k in (1, 2):
        K = wv[:, None] * commutator_matrix(T, b, k) / wv[None, :]
        norms.append(spectral_norm(lambda x: K @ x, lambda y: K.T @ y, grid.size, K).value / nb**k)
    rows.append((a2, *norms))
    print(f"[w]_A2 = {a2:7.2f}   k=1: {norms[0]:9.3f}   k=2: {norms[1]:10.3f}")

rows = np.array(rows)
for k, col in ((1, 1), (2, 2)):
    slope = np.polyfit(np.log(rows[1:, 0]), np.log(rows[1:, col]), 1)[0]
    print(f"order {k}: fitted growth exponent {slope:.2f}, exponent in the bound {k + 1}")
