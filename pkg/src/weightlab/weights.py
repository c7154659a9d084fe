"""Weights and their Muckenhoupt-type constants over a cube family.

Every constant here is a supremum over a finite :class:`~weightlab.grid.CubeFamily`
of a product of powered averages.  Products are evaluated in the log domain and
each powered weight is rescaled by its maximum before averaging, so weights
spanning many orders of magnitude stay accurate.  Reported values are exact
for the family and lower-bound the continuum constants.

``A_1`` is deliberately absent: only ``p > 1`` classes are defined.
"""

from __future__ import annotations

import functools
import hashlib
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .grid import Cube, CubeFamily, Family, Grid, GridError, GridFn, cube_windows

EXP_GUARD = 700.0


class WeightError(ValueError):
    """Invalid exponent or weight input."""


class UnsupportedClassError(WeightError):
    """Requested a class that is intentionally not implemented (``A_1``)."""


class WeightRangeError(ArithmeticError):
    """Exponentiation would overflow double precision."""


def conjugate(p: float) -> float:
    """Hölder conjugate ``p' = p/(p-1)``; ``inf`` maps to 1 and 1 to ``inf``."""
    if p == math.inf:
        return 1.0
    if p == 1:
        return math.inf
    return p / (p - 1.0)


class Weight(GridFn):
    """Strictly positive, finite grid function."""

    def __init__(self, grid: Grid, values):
        super().__init__(grid, values)
        if self.is_complex or not np.all(self.values > 0):
            raise WeightError("weights must be real and strictly positive")

    @classmethod
    def from_array(cls, values) -> "Weight":
        values = np.asarray(values, dtype=float)
        return cls(Grid(values.ndim, values.shape[0]), values)

    @classmethod
    def ones(cls, grid: Grid) -> "Weight":
        return cls(grid, np.ones(grid.shape))

    @functools.cached_property
    def log_values(self) -> np.ndarray:
        return np.log(self.values)

    @functools.cached_property
    def digest(self) -> str:
        h = hashlib.sha1(np.ascontiguousarray(self.values).tobytes())
        h.update(repr(self.grid).encode())
        return h.hexdigest()

    def powered(self, t: float) -> "_ScaledArray":
        """``w**t`` as a max-normalized array plus its log scale."""
        return _scaled_power(self.log_values, t)


# --- algebra ----------------------------------------------------------------


def power(w: Weight, t: float) -> Weight:
    if t == 1:
        return w
    return _from_log(w.grid, t * w.log_values)


def product(w1: Weight, w2: Weight) -> Weight:
    if w1.grid != w2.grid:
        raise GridError("weights live on different grids")
    return _from_log(w1.grid, w1.log_values + w2.log_values)


def exp_of(b: GridFn, lam: float) -> Weight:
    """The weight ``exp(lam * b)``; refuses exponents beyond the overflow guard."""
    b_vals = np.asarray(b.values)
    if np.iscomplexobj(b_vals):
        raise WeightError("exp_of needs a real symbol")
    span = abs(lam) * float(np.max(np.abs(b_vals)))
    if span > EXP_GUARD:
        raise WeightRangeError(
            f"|lambda| * max|b| = {span:.4g} exceeds the guard {EXP_GUARD}; rescale the symbol"
        )
    return Weight(b.grid, np.exp(lam * b_vals))


def _from_log(grid: Grid, logs: np.ndarray) -> Weight:
    if np.max(np.abs(logs)) > EXP_GUARD:
        raise WeightRangeError("resulting weight leaves the double-precision range")
    return Weight(grid, np.exp(logs))


@dataclass(frozen=True)
class _ScaledArray:
    values: np.ndarray  # max-normalized, in (0, 1]
    log_scale: float


def _scaled_power(logs: np.ndarray, t: float) -> _ScaledArray:
    z = t * logs
    top = float(np.max(z))
    return _ScaledArray(np.exp(z - top), top)


# --- exponent bookkeeping ---------------------------------------------------


@dataclass(frozen=True)
class ExponentProfile:
    """Exponents shared by the weight classes and the verification checks.

    Scalar fields cover the linear theorems (``p, q, s, theta, eta``,
    fractional order ``alpha`` in dimension ``n``).  ``p_list`` (length ``m``)
    and ``r_list`` (length ``m + 1``) describe vector weights.
    """

    p: float | None = None
    q: float | None = None
    s: float | None = None
    theta: float = 1.0
    eta: float = 2.0
    alpha: float | None = None
    n: int = 1
    p_list: tuple[float, ...] = ()
    r_list: tuple[float, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "p_list", tuple(float(v) for v in self.p_list))
        if self.r_list is not None:
            object.__setattr__(self, "r_list", tuple(float(v) for v in self.r_list))
        if self.eta is not None and self.eta <= 1:
            raise WeightError("eta must exceed 1")
        if self.theta <= 0:
            raise WeightError("theta must be positive")
        if self.s is not None and self.s <= 1:
            raise WeightError("s must exceed 1")
        for pj in self.p_list:
            if not 1 < pj < math.inf:
                raise WeightError(f"vector exponents need 1 < p_j < inf, got {pj}")
        if self.p_list and self.p is not None:
            if not math.isclose(1 / self.p, sum(1 / pj for pj in self.p_list), rel_tol=1e-12):
                raise WeightError("p must satisfy 1/p = sum 1/p_j")
        if self.alpha is not None:
            if not 0 < self.alpha < self.n:
                raise WeightError("fractional order must lie in (0, n)")
            if self.p is not None and self.q is not None:
                if not math.isclose(1 / self.p - 1 / self.q, self.alpha / self.n, rel_tol=1e-12, abs_tol=1e-14):
                    raise WeightError("fractional exponents need 1/p - 1/q = alpha/n")
        if self.r_list is not None:
            if len(self.r_list) != self.m + 1:
                raise WeightError("r_list must have length m + 1")
            for rj, pj in zip(self.r_list, self.p_list):
                if not 1 <= rj < pj:
                    raise WeightError(f"need 1 <= r_j < p_j, got r={rj}, p={pj}")
            r_last = self.r_list[-1]
            if r_last < 1 or not conjugate(r_last) > self.multilinear_p:
                raise WeightError("need r'_{m+1} > p")

    @classmethod
    def fractional(cls, alpha: float, p: float, n: int = 1) -> "ExponentProfile":
        """Profile with ``q`` fixed by ``1/p - 1/q = alpha/n``."""
        inv_q = 1 / p - alpha / n
        if inv_q <= 0:
            raise WeightError("need p < n/alpha")
        return cls(p=p, q=1 / inv_q, alpha=alpha, n=n, s=(1 / inv_q) * (n - alpha) / n)

    @property
    def m(self) -> int:
        return len(self.p_list)

    @property
    def multilinear_p(self) -> float:
        return 1.0 / sum(1.0 / pj for pj in self.p_list)

    @property
    def p_conj(self) -> float:
        return conjugate(self.p)

    @property
    def q_conj(self) -> float:
        return conjugate(self.q)

    @property
    def s_conj(self) -> float:
        return conjugate(self.s)

    @property
    def eta_conj(self) -> float:
        return conjugate(self.eta)

    @property
    def deltas(self) -> tuple[float, ...]:
        """``Delta_1..Delta_{m+1}`` of the ``A_{P,R}`` class."""
        if self.r_list is None:
            raise WeightError("profile carries no R exponents")
        out = [1.0 / (1.0 / rj - 1.0 / pj) for rj, pj in zip(self.r_list, self.p_list)]
        inv_last = 1.0 / self.multilinear_p - 1.0 / conjugate(self.r_list[-1])
        out.append(1.0 / inv_last)
        return tuple(out)

    def to_dict(self) -> dict:
        out = {}
        for key in ("p", "q", "s", "theta", "eta", "alpha", "n"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        if self.p_list:
            out["p_list"] = list(self.p_list)
        if self.r_list is not None:
            out["r_list"] = list(self.r_list)
        return out


@dataclass(frozen=True)
class VectorWeight:
    components: tuple[Weight, ...]
    profile: ExponentProfile

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if len(self.components) != self.profile.m:
            raise WeightError("number of components must match the exponent list")
        grids = {w.grid for w in self.components}
        if len(grids) != 1:
            raise GridError("vector weight components must share one grid")

    @property
    def grid(self) -> Grid:
        return self.components[0].grid

    def nu_log(self) -> np.ndarray:
        """``log nu_w`` with ``nu_w = prod_j w_j^{p/p_j}``."""
        p = self.profile.multilinear_p
        return sum((p / pj) * w.log_values for w, pj in zip(self.components, self.profile.p_list))

    def nu(self) -> Weight:
        return _from_log(self.grid, self.nu_log())

    def sigma(self, j: int) -> Weight:
        """``sigma_j = w_j^{1 - p_j'}``."""
        pj = self.profile.p_list[j]
        return power(self.components[j], 1.0 - conjugate(pj))


# --- the supremum engine ----------------------------------------------------


@dataclass(frozen=True)
class ConstantResult:
    """A family-relative class constant and the cube attaining it."""

    cls: str
    value: float
    argmax: Cube
    family: str
    exponents: dict = field(default_factory=dict)

    def __float__(self) -> float:
        return self.value

    def to_dict(self) -> dict:
        return {
            "class": self.cls,
            "exponents": self.exponents,
            "family": self.family,
            "value": self.value,
            "argmax_cube": self.argmax.to_dict(),
        }


def _log_averages(arr: _ScaledArray, fam: CubeFamily) -> np.ndarray:
    starts, lengths = fam.arrays
    from .grid import PrefixTable

    sums = PrefixTable(arr.values).box_sums(starts, lengths)
    avg = sums / np.prod(lengths, axis=1)
    return np.log(avg) + arr.log_scale


def _log_maxima(logs: np.ndarray, fam: CubeFamily) -> np.ndarray:
    parts = []
    for length, starts in fam.blocks():
        parts.append(cube_windows(logs, length, starts).max(axis=1))
    return np.concatenate(parts)


def _sup(log_terms: np.ndarray, fam: CubeFamily, cls: str, exponents: dict) -> ConstantResult:
    idx = int(np.argmax(log_terms))
    return ConstantResult(cls, float(np.exp(log_terms[idx])), fam.cube(idx), fam.name, exponents)


def per_cube_log(terms: Sequence[tuple[np.ndarray, float, float]], fam: CubeFamily) -> np.ndarray:
    """``sum_i e_i * log avg_Q(exp(t_i * L_i))`` for every cube ``Q``.

    ``terms`` holds ``(L_i, t_i, e_i)`` triples with ``L_i`` a log-weight.
    """
    total = np.zeros(len(fam))
    for logs, t, e in terms:
        if e == 0:
            continue
        total += e * _log_averages(_scaled_power(logs, t), fam)
    return total


def _check_family(w: GridFn, fam: CubeFamily) -> None:
    if w.grid != fam.grid:
        raise GridError("weight and family live on different grids")


@functools.lru_cache(maxsize=4096)
def _cached_ap(digest: str, w_ref: "_Ref", p: float, fam: CubeFamily) -> ConstantResult:
    w = w_ref.obj
    log_terms = _weight_log_avg(w, 1.0, fam) + (p - 1.0) * _weight_log_avg(w, 1.0 - conjugate(p), fam)
    return _sup(log_terms, fam, "a_p", {"p": p})


@functools.lru_cache(maxsize=48)
def _cached_log_avg(digest: str, w_ref: "_Ref", t: float, fam: CubeFamily) -> np.ndarray:
    out = _log_averages(_scaled_power(w_ref.obj.log_values, t), fam)
    out.setflags(write=False)
    return out


def _weight_log_avg(w: Weight, t: float, fam: CubeFamily) -> np.ndarray:
    """``log avg_Q w^t`` for every cube; memoized since sweeps over exponents reuse it."""
    return _cached_log_avg(w.digest, _Ref(w, w.digest), float(t), fam)


class _Ref:
    """Carries an object through ``lru_cache`` keyed only by its digest."""

    __slots__ = ("obj", "key")

    def __init__(self, obj, key):
        self.obj, self.key = obj, key

    def __hash__(self):
        return hash(self.key)

    def __eq__(self, other):
        return isinstance(other, _Ref) and other.key == self.key


def ap_constant(w: Weight, p: float, fam: CubeFamily) -> ConstantResult:
    """``[w]_{A_p}`` over ``fam``: ``sup (avg w)(avg w^{1-p'})^{p-1}``."""
    if not p > 1:
        raise UnsupportedClassError("A_p is only defined here for p > 1 (no A_1)")
    if p == math.inf:
        raise WeightError("A_inf has no constant of this form")
    _check_family(w, fam)
    return _cached_ap(w.digest, _Ref(w, w.digest), float(p), fam)


def rh_constant(w: Weight, q: float, fam: CubeFamily) -> ConstantResult:
    """``[w]_{RH_q}``; ``q = inf`` uses the per-cube maximum of ``w``."""
    if not q > 1:
        raise WeightError("reverse Hölder exponent must exceed 1")
    _check_family(w, fam)
    if q == math.inf:
        log_terms = _log_maxima(w.log_values, fam) - _weight_log_avg(w, 1.0, fam)
    else:
        log_terms = _weight_log_avg(w, q, fam) / q - _weight_log_avg(w, 1.0, fam)
    return _sup(log_terms, fam, "rh_q", {"q": q})


def apq_constant(w: Weight, p: float, q: float, fam: CubeFamily) -> ConstantResult:
    """``[w]_{A_{p,q}} = sup (avg w^q)(avg w^{-p'})^{q/p'}``."""
    if not (1 < p < math.inf and 1 < q < math.inf):
        raise WeightError("A_{p,q} needs 1 < p, q < inf")
    _check_family(w, fam)
    pc = conjugate(p)
    log_terms = _weight_log_avg(w, q, fam) + (q / pc) * _weight_log_avg(w, -pc, fam)
    return _sup(log_terms, fam, "a_pq", {"p": p, "q": q})


def a_vector_constant(w: VectorWeight, fam: CubeFamily) -> ConstantResult:
    """``[w]_{A_P} = sup (avg nu_w)^{1/p} prod_j (avg w_j^{1-p_j'})^{1/p_j'}``."""
    _check_family(w.components[0], fam)
    p = w.profile.multilinear_p
    terms = [(w.nu_log(), 1.0, 1.0 / p)]
    for wj, pj in zip(w.components, w.profile.p_list):
        pc = conjugate(pj)
        terms.append((wj.log_values, 1.0 - pc, 1.0 / pc))
    return _sup(per_cube_log(terms, fam), fam, "a_vector", w.profile.to_dict())


def a_pq_vector_constant(w: VectorWeight, q: float, fam: CubeFamily) -> ConstantResult:
    """``[w]_{A_{P,q}} = sup (avg prod_j w_j^q) prod_j (avg w_j^{-p_j'})^{q/p_j'}``."""
    if not q > 0:
        raise WeightError("q must be positive")
    _check_family(w.components[0], fam)
    prod_log = sum(wj.log_values for wj in w.components)
    terms = [(prod_log, q, 1.0)]
    for wj, pj in zip(w.components, w.profile.p_list):
        pc = conjugate(pj)
        terms.append((wj.log_values, -pc, q / pc))
    return _sup(per_cube_log(terms, fam), fam, "a_pq_vector", {**w.profile.to_dict(), "q": q})


def a_pr_constant(w: VectorWeight, fam: CubeFamily) -> ConstantResult:
    """``[w]_{A_{P,R}}``; with ``R = (1, ..., 1)`` this is exactly ``[w]_{A_P}``."""
    if w.profile.r_list is None:
        raise WeightError("A_{P,R} needs a profile with r_list")
    _check_family(w.components[0], fam)
    p = w.profile.multilinear_p
    deltas = w.profile.deltas
    d_last = deltas[-1]
    terms = [(w.nu_log(), d_last / p, 1.0 / d_last)]
    for wj, pj, dj in zip(w.components, w.profile.p_list, deltas[:-1]):
        terms.append((wj.log_values, -dj / pj, 1.0 / dj))
    return _sup(per_cube_log(terms, fam), fam, "a_pr", w.profile.to_dict())


def check_bht_admissible(r: Sequence[float]) -> bool:
    """Whether ``sum_j 1/min(r_j, 2) < 2`` for a triple ``1 < r_j < inf``."""
    if len(r) != 3:
        raise WeightError("admissibility is stated for triples")
    if not all(1 < rj < math.inf for rj in r):
        raise WeightError("need 1 < r_j < inf")
    return sum(1.0 / min(rj, 2.0) for rj in r) < 2.0


@dataclass(frozen=True)
class RestrictedMembership:
    """``A_{p/r-} ∩ RH_{(r+/p)'}`` membership computed two ways.

    ``constant`` is ``[w^s]_{A_{s(q-1)+1}}`` with ``q = p/r-`` and
    ``s = (r+/p)'``; ``ap_part``/``rh_part`` are ``[w]_{A_q}`` and
    ``[w]_{RH_s}``.  The two routes are tied by the exact discrete sandwich
    ``max(ap, rh)^s <= constant <= (ap * rh)^s``.
    """

    member: bool
    constant: float
    ap_part: float
    rh_part: float
    q: float
    s: float

    def __iter__(self):
        return iter((self.member, self.constant))

    @property
    def lower(self) -> float:
        return max(self.ap_part, self.rh_part) ** self.s

    @property
    def upper(self) -> float:
        return (self.ap_part * self.rh_part) ** self.s


def membership_restricted(
    w: Weight,
    p: float,
    r_minus: float,
    r_plus: float,
    fam: CubeFamily,
    bound: float | None = None,
) -> RestrictedMembership:
    """Membership in ``A_{p/r-} ∩ RH_{(r+/p)'}`` via the single class ``A_{s(q-1)+1}``.

    Over a finite family every positive weight has finite constants, so
    membership means "finite constant", or "constant <= bound" when a bound
    is given.  ``r_plus = inf`` makes the reverse Hölder part vacuous.
    """
    if not 1 <= r_minus < p < r_plus:
        raise WeightError("need 1 <= r- < p < r+")
    q = p / r_minus
    if r_plus == math.inf:
        ap = ap_constant(w, q, fam).value
        ok = math.isfinite(ap) and (bound is None or ap <= bound)
        return RestrictedMembership(ok, ap, ap, 1.0, q, 1.0)
    s = conjugate(r_plus / p)
    target = s * (q - 1.0) + 1.0
    const = ap_constant(power(w, s), target, fam).value
    ap = ap_constant(w, q, fam).value
    rh = rh_constant(w, s, fam).value
    ok = math.isfinite(const) and (bound is None or const <= bound)
    return RestrictedMembership(ok, const, ap, rh, q, s)


def power_weight(grid: Grid, a: float, center: float = 0.5) -> Weight:
    """``|x - center|^a`` clipped at half a cell so it stays finite and positive."""
    if grid.dim == 1:
        r = np.abs(grid.coordinates() - center)
    else:
        x, y = grid.coordinates()
        r = np.hypot(x - center, y - center)
    r = np.maximum(r, 0.5 * grid.spacing)
    return Weight(grid, r**a)


def two_value_weight(grid: Grid, a: float) -> Weight:
    """1 on the left half (first axis) and ``a`` on the right half."""
    vals = np.ones(grid.shape)
    vals[grid.n_points // 2 :] = a
    return Weight(grid, vals)


def dyadic_family(grid: Grid) -> CubeFamily:
    return CubeFamily(Family.DYADIC_INTERVALS if grid.dim == 1 else Family.DYADIC_RECTANGLES, grid)
