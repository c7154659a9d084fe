"""Weight constants on a grid.

Builds a few weights, prints their A_p and reverse Hoelder constants over
all intervals, and shows the exact fractional-class identity.
"""

from weightlab.grid import CubeFamily, Family, Grid
from weightlab.weights import (
    ExponentProfile,
    ap_constant,
    apq_constant,
    exp_of,
    power,
    power_weight,
    rh_constant,
    two_value_weight,
)
from weightlab.oscillation import dyadic_martingale

grid = Grid(1, 256)
fam = CubeFamily(Family.ALL_INTERVALS, grid)

weights = {
    "two-value (1, 4)": two_value_weight(grid, 4.0),
    "|x - 1/2|^-0.4": power_weight(grid, -0.4),
    "exp(0.5 * martingale)": exp_of(dyadic_martingale(grid, 3, 6), 0.5),
}

print(f"{'weight':<24}{'A_2':>10}{'A_3':>10}{'RH_2':>10}  binding interval for A_2")
for name, w in weights.items():
    a2 = ap_constant(w, 2, fam)
    print(f"{name:<24}{a2.value:>10.4f}{ap_constant(w, 3, fam).value:>10.4f}"
          f"{rh_constant(w, 2, fam).value:>10.4f}  {a2.argmax}")

# [w]_{A_{p,q}} equals [w^q]_{A_s} once 1/p - 1/q = alpha
prof = ExponentProfile.fractional(0.25, 2.0, 1)
print(f"\nfractional exponents: p={prof.p}, q={prof.q}, s={prof.s}")
for name, w in weights.items():
    lhs = apq_constant(w, prof.p, prof.q, fam).value
    rhs = ap_constant(power(w, prof.q), prof.s, fam).value
    print(f"{name:<24}{lhs:>14.8f}{rhs:>14.8f}  gap {abs(lhs - rhs) / rhs:.1e}")
