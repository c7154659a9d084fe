"""BMO and its exponential cousin.

The L^1 oscillation stays put as the grid refines for log|x - c| while the
sup norm grows; the exp-L norm dominates the L^1 one on every family.
"""

import math

from weightlab.grid import CubeFamily, Family, Grid
from weightlab.oscillation import bmo_norm, log_singularity, script_bmo_norm, two_value

print(f"{'N':>6}{'max|b|':>10}{'BMO':>10}{'exp-L BMO':>12}")
for n in (64, 256, 1024):
    g = Grid(1, n)
    b = log_singularity(g, 0.37)
    fam = CubeFamily(Family.DYADIC_INTERVALS, g)
    print(f"{n:>6}{abs(b.values).max():>10.3f}{bmo_norm(b, fam).value:>10.4f}{script_bmo_norm(b, fam).value:>12.4f}")

# a jump of size a has BMO a/2 and exp-L norm a/(2 ln 2) on two cells
g = Grid(1, 2)
fam = CubeFamily(Family.ALL_INTERVALS, g)
b = two_value(g, 3.0)
print(f"\njump 3: BMO {bmo_norm(b, fam).value}, exp-L {script_bmo_norm(b, fam).value:.6f}, "
      f"closed form {1.5 / math.log(2):.6f}")
