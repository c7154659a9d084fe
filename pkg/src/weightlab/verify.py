"""Inequality verification: one named check per quantitative statement.

Every check is classified once and for all:

* ``exact_discrete`` checks hold over *any* finite cube family because their
  proofs use only Hölder, Jensen and definitions.  A single violation (beyond
  a ``1e-9`` relative rounding slack) is a defect.
* ``empirical`` checks involve continuum reverse Hölder or operator
  boundedness.  They report ratios and fail only on non-finite values or
  guard trips; any asserted bound they record is reported as a violation
  count without failing the check.

Corpora are generated per index from ``SeedSequence(seed, spawn_key=(stream, i))``
so a fixed seed gives a stable corpus prefix and bit-identical reruns.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import __version__
from .commutators import commutator_direct, commutator_matrix
from .grid import CubeFamily, Family, Grid, GridFn
from .operators import (
    LinearKernelOp,
    bht_op,
    bilinear_weighted_norm,
    custom_op,
    double_hilbert_op,
    hilbert_matrix,
    hilbert_op,
    riesz_op,
    spectral_norm,
    weighted_norm,
)
from .oscillation import (
    BmoFn,
    bmo_norm,
    dyadic_martingale,
    little_bmo_norm,
    log_singularity,
    script_bmo_norm,
    slice_bmo_norms,
    two_value,
)
from .weights import (
    ExponentProfile,
    VectorWeight,
    Weight,
    WeightRangeError,
    a_pr_constant,
    a_vector_constant,
    ap_constant,
    apq_constant,
    conjugate,
    exp_of,
    membership_restricted,
    per_cube_log,
    power,
    power_weight,
    product,
    rh_constant,
    two_value_weight,
)

EXACT = "exact_discrete"
EMPIRICAL = "empirical"
EXACT_RTOL = 1e-9
IDENTITY_RTOL = 1e-10

STREAM_WEIGHTS, STREAM_SYMBOLS, STREAM_WEIGHTS_2D, STREAM_SYMBOLS_2D = 1, 2, 3, 4


class ConfigError(ValueError):
    """Invalid verification configuration."""


def _rng(seed: int, stream: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(stream, int(index))))


def _clean(x):
    """JSON-safe scalars: non-finite floats become strings."""
    if isinstance(x, dict):
        return {str(k): _clean(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_clean(v) for v in x]
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else str(x)
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


# --- outcomes ---------------------------------------------------------------


@dataclass
class CheckOutcome:
    """Aggregated result of one check over its corpus."""

    check_id: str
    classification: str
    instances_run: int = 0
    violations: int = 0
    max_ratio: float = 0.0
    argmax: dict | None = None
    guard_trips: int = 0
    harness_sanity: bool = False
    details: dict = field(default_factory=dict)
    records: list = field(default_factory=list)

    def observe(self, lhs: float, rhs: float, descriptor: dict, rtol: float = EXACT_RTOL) -> float:
        """Record ``lhs <= rhs``; returns the ratio."""
        lhs, rhs = float(lhs), float(rhs)
        self.instances_run += 1
        if rhs > 0:
            ratio = lhs / rhs
        else:
            ratio = 0.0 if lhs <= 0 else math.inf
        if not math.isfinite(lhs) or lhs > rhs * (1 + rtol) + 1e-300:
            self.violations += 1
        if not ratio <= self.max_ratio and (ratio > self.max_ratio or not math.isfinite(ratio)):
            self.max_ratio, self.argmax = ratio, descriptor
        self.records.append({**descriptor, "lhs": lhs, "rhs": rhs, "ratio": ratio})
        return ratio

    def guard(self, descriptor: dict, message: str) -> None:
        self.guard_trips += 1
        self.details.setdefault("guard_trips", []).append({**descriptor, "message": message})

    def max_ratio_by(self, key: str) -> dict:
        """Largest recorded ratio grouped by one descriptor field."""
        out: dict = {}
        for rec in self.records:
            if key in rec:
                k = str(rec[key])
                out[k] = max(out.get(k, 0.0), rec["ratio"])
        return out

    @property
    def passed(self) -> bool:
        if self.guard_trips or not math.isfinite(self.max_ratio):
            return False
        if self.classification == EXACT:
            return self.violations == 0
        return True

    def to_dict(self) -> dict:
        return _clean(
            {
                "check_id": self.check_id,
                "classification": self.classification,
                "instances_run": self.instances_run,
                "violations": self.violations,
                "max_ratio": self.max_ratio,
                "argmax": self.argmax,
                "guard_trips": self.guard_trips,
                "harness_sanity": self.harness_sanity,
                "passed": self.passed,
                "details": self.details,
            }
        )


# --- corpora ----------------------------------------------------------------


@dataclass(frozen=True)
class WeightCorpus:
    """Seeded mixture of ``exp(lambda * martingale)``, two-value and clipped power weights."""

    grid: Grid
    count: int
    seed: int

    def __post_init__(self):
        if self.count < 1:
            raise ConfigError("weight corpus must be non-empty")

    def __len__(self) -> int:
        return self.count

    def __iter__(self):
        return (self.weight(i) for i in range(self.count))

    def describe(self, i: int) -> dict:
        rng = _rng(self.seed, STREAM_WEIGHTS if self.grid.dim == 1 else STREAM_WEIGHTS_2D, i)
        kind = ("exp_martingale", "two_value", "power")[i % 3]
        if kind == "exp_martingale":
            return {
                "kind": kind,
                "depth": int(rng.integers(1, self.grid.levels + 1)),
                "lam": float(rng.choice([-1.0, 1.0]) * rng.uniform(0.05, 0.6)),
                "martingale_seed": int(rng.integers(2**31)),
            }
        if kind == "two_value":
            return {"kind": kind, "a": float(np.exp(rng.uniform(-4.0, 4.0)))}
        return {
            "kind": kind,
            "a": float(rng.uniform(-0.9, 0.9) * self.grid.dim),
            "center": float(rng.uniform(0.2, 0.8)),
        }

    def weight(self, i: int) -> Weight:
        d = self.describe(i)
        if d["kind"] == "exp_martingale":
            b = dyadic_martingale(self.grid, d["martingale_seed"], d["depth"])
            return exp_of(b, d["lam"])
        if d["kind"] == "two_value":
            return two_value_weight(self.grid, d["a"])
        return power_weight(self.grid, d["a"], d["center"])

    def to_dict(self) -> dict:
        return {"dim": self.grid.dim, "n_points": self.grid.n_points, "count": self.count, "seed": self.seed}


@dataclass(frozen=True)
class SymbolCorpus:
    """Seeded mixture of martingale, shifted log-singularity and step symbols."""

    grid: Grid
    count: int
    seed: int

    def __post_init__(self):
        if self.count < 1:
            raise ConfigError("symbol corpus must be non-empty")

    def __len__(self) -> int:
        return self.count

    def __iter__(self):
        return (self.symbol(i) for i in range(self.count))

    def describe(self, i: int) -> dict:
        rng = _rng(self.seed, STREAM_SYMBOLS if self.grid.dim == 1 else STREAM_SYMBOLS_2D, i)
        kind = ("dyadic_martingale", "log_singularity", "two_value")[i % 3]
        if kind == "dyadic_martingale":
            return {
                "kind": kind,
                "depth": int(rng.integers(1, self.grid.levels + 1)),
                "eps": float(rng.uniform(0.2, 2.0)),
                "martingale_seed": int(rng.integers(2**31)),
            }
        if kind == "log_singularity":
            return {"kind": kind, "center": float(rng.uniform(0.1, 0.9)), "scale": float(rng.uniform(0.5, 2.0))}
        return {"kind": kind, "a": float(rng.uniform(0.5, 5.0))}

    def symbol(self, i: int) -> BmoFn:
        d = self.describe(i)
        if d["kind"] == "dyadic_martingale":
            return dyadic_martingale(self.grid, d["martingale_seed"], d["depth"], d["eps"])
        if d["kind"] == "log_singularity":
            return log_singularity(self.grid, d["center"]).scaled(d["scale"])
        return two_value(self.grid, d["a"])

    def to_dict(self) -> dict:
        return {"dim": self.grid.dim, "n_points": self.grid.n_points, "count": self.count, "seed": self.seed}


def _centered(b: GridFn) -> BmoFn:
    v = np.asarray(b.values, dtype=float)
    return BmoFn(b.grid, v - 0.5 * (v.max() + v.min()))


def symbol_norms(symbols: Iterable[GridFn], fam: CubeFamily) -> list[float]:
    return [script_bmo_norm(b, fam).value for b in symbols]


# --- exact checks -----------------------------------------------------------


def check_lemma_bmo_to_ap(
    symbols: Sequence[GridFn],
    fam: CubeFamily,
    norms: Sequence[float] | None = None,
    factors: Sequence[float] = (1.0, -1.0, 0.5, -0.5, 0.25, -0.25),
    p_list: Sequence[float] = (1.5, 2.0, 3.0),
) -> CheckOutcome:
    """``[e^{lam b}]_{A_{1+|lam| ||b||}} <= 4^{|lam| ||b||}`` and the fixed-``p`` form."""
    out = CheckOutcome("lemma_bmo_to_ap", EXACT)
    norms = symbol_norms(symbols, fam) if norms is None else norms
    for i, (b, nb) in enumerate(zip(symbols, norms)):
        if nb == 0:
            out.observe(1.0, 1.0, {"symbol": i, "t": 0.0})
            continue
        bc = _centered(b)
        for t in factors:
            desc = {"symbol": i, "t": t}
            try:
                w = exp_of(bc, t / nb)
            except WeightRangeError as exc:
                out.guard(desc, str(exc))
                continue
            bound = 4.0 ** abs(t)
            out.observe(ap_constant(w, 1 + abs(t), fam).value, bound, {**desc, "p": 1 + abs(t)})
            for p in p_list:
                if abs(t) <= min(1.0, p - 1.0):
                    out.observe(ap_constant(w, p, fam).value, bound, {**desc, "p": p})
    return out


def check_lemma_product(
    weights: Sequence[Weight],
    symbols: Sequence[GridFn],
    fam: CubeFamily,
    norms: Sequence[float] | None = None,
    r_list: Sequence[float] = (1.5, 2.0, 3.0),
    eta_list: Sequence[float] = (2.0,),
    factors: Sequence[float] = (1.0, -1.0, 0.5),
) -> CheckOutcome:
    """``[w e^{lam b}]_{A_r} <= [w^eta]_{A_r}^{1/eta} 4^{|lam| ||b||}`` for ``|lam| <= min{1, r-1}/(eta' ||b||)``."""
    out = CheckOutcome("lemma_product", EXACT)
    norms = symbol_norms(symbols, fam) if norms is None else norms
    for i, w in enumerate(weights):
        j = i % len(symbols)
        bc, nb = _centered(symbols[j]), norms[j]
        for eta in eta_list:
            eta_c = conjugate(eta)
            try:
                w_eta = power(w, eta)
            except WeightRangeError as exc:
                out.guard({"weight": i, "eta": eta}, str(exc))
                continue
            for r in r_list:
                base = ap_constant(w_eta, r, fam).value ** (1.0 / eta)
                for t in factors if nb > 0 else (0.0,):
                    lam = t * min(1.0, r - 1.0) / (eta_c * nb) if nb > 0 else 0.0
                    desc = {"weight": i, "symbol": j, "r": r, "eta": eta, "t": t}
                    try:
                        wl = product(w, exp_of(bc, lam))
                    except WeightRangeError as exc:
                        out.guard(desc, str(exc))
                        continue
                    out.observe(ap_constant(wl, r, fam).value, base * 4.0 ** (abs(lam) * nb), desc)
    return out


DEFAULT_P_LISTS = ((2.0, 2.0), (3.0, 1.5), (1.5, 3.0), (4.0, 4.0))


def vector_corpus(weights: Sequence[Weight], p_lists=DEFAULT_P_LISTS) -> list[VectorWeight]:
    out = []
    for i in range(len(weights) // 2):
        prof = ExponentProfile(p_list=p_lists[i % len(p_lists)])
        out.append(VectorWeight((weights[2 * i], weights[2 * i + 1]), prof))
    return out


def check_vector_algebra(vweights: Sequence[VectorWeight], fam: CubeFamily) -> CheckOutcome:
    """Bilinear ``A_P`` algebra: ``[nu]_{A_{2p}} <= [w]^p``, ``[sigma_j]_{A_{2p_j'}} <= [w]^{p_j'}``,
    the Hölder inclusion, and ``A_{P,R} = A_P`` at ``R = (1, ..., 1)``."""
    out = CheckOutcome("vector_weight_algebra", EXACT)
    for i, vw in enumerate(vweights):
        prof = vw.profile
        p = prof.multilinear_p
        A = a_vector_constant(vw, fam).value
        desc = {"vector_weight": i, "p_list": list(prof.p_list)}
        out.observe(ap_constant(vw.nu(), 2 * p, fam).value, A**p, {**desc, "form": "nu"})
        for j, pj in enumerate(prof.p_list):
            pc = conjugate(pj)
            out.observe(ap_constant(vw.sigma(j), 2 * pc, fam).value, A**pc, {**desc, "form": f"sigma_{j + 1}"})
        holder = math.prod(ap_constant(w, pj, fam).value ** (1 / pj) for w, pj in zip(vw.components, prof.p_list))
        out.observe(A, holder, {**desc, "form": "holder_inclusion"})
        ones = VectorWeight(vw.components, ExponentProfile(p_list=prof.p_list, r_list=(1.0,) * (prof.m + 1)))
        apr = a_pr_constant(ones, fam).value
        out.observe(max(apr, A), min(apr, A), {**desc, "form": "a_pr_unit_r"}, rtol=IDENTITY_RTOL)
    return out


def check_ap_monotone_duality(
    weights: Sequence[Weight],
    fam: CubeFamily,
    p_grid: Sequence[float] = (1.25, 1.5, 2.0, 3.0, 4.0),
    q_grid: Sequence[float] = (1.5, 2.0, 4.0, math.inf),
    sandwich: Sequence[tuple[float, float]] = ((2.0, 2.0), (1.5, 3.0), (3.0, 1.5)),
) -> CheckOutcome:
    """Monotonicity in p and q, A_p duality, and the two-sided A_q ∩ RH_s sandwich."""
    out = CheckOutcome("ap_monotone_duality", EXACT)
    for i, w in enumerate(weights):
        ap = {p: ap_constant(w, p, fam).value for p in p_grid}
        for lo, hi in zip(p_grid, p_grid[1:]):
            out.observe(ap[hi], ap[lo], {"weight": i, "form": "ap_monotone", "p": lo, "q": hi})
        rh = {q: rh_constant(w, q, fam).value for q in q_grid}
        for lo, hi in zip(q_grid, q_grid[1:]):
            out.observe(rh[lo], rh[hi], {"weight": i, "form": "rh_monotone", "p": lo, "q": hi})
        for p in p_grid:
            pc = conjugate(p)
            dual = ap_constant(power(w, 1 - pc), pc, fam).value ** (p - 1)
            out.observe(max(ap[p], dual), min(ap[p], dual), {"weight": i, "form": "duality", "p": p}, rtol=IDENTITY_RTOL)
        for q, s in sandwich:
            const = ap_constant(power(w, s), s * (q - 1) + 1, fam).value
            a_q = ap[q] if q in ap else ap_constant(w, q, fam).value
            rh_s = rh[s] if s in rh else rh_constant(w, s, fam).value
            desc = {"weight": i, "form": "sandwich", "q": q, "s": s}
            out.observe(max(a_q, rh_s) ** s, const, {**desc, "side": "lower"})
            out.observe(const, (a_q * rh_s) ** s, {**desc, "side": "upper"})
    return out


def check_bmo_vs_script(symbols: Sequence[GridFn], fam: CubeFamily, norms: Sequence[float] | None = None) -> CheckOutcome:
    """``||f||_BMO <= ||f||_{script BMO}`` over the same family; John-Nirenberg ratios reported."""
    out = CheckOutcome("bmo_le_script_bmo", EXACT)
    norms = symbol_norms(symbols, fam) if norms is None else norms
    jn = []
    for i, (b, s) in enumerate(zip(symbols, norms)):
        m = bmo_norm(b, fam).value
        out.observe(m, s, {"symbol": i})
        if m > 0:
            jn.append(s / m)
    out.details["john_nirenberg_ratio_max"] = max(jn) if jn else None
    out.details["john_nirenberg_ratio_min"] = min(jn) if jn else None
    out.details["family"] = fam.name
    return out


def check_bmo_rect_equivalence(
    symbols: Sequence[GridFn],
    weights: Sequence[Weight],
    bridge_factors: Sequence[float] = (1.0, 2.0, 4.0),
) -> CheckOutcome:
    """Rectangle family: ``bmo <= script BMO_R``, both exponential bridges and slice bounds."""
    out = CheckOutcome("bmo_rect_equivalence", EXACT)
    reverse = []
    for i, f in enumerate(symbols):
        fam = CubeFamily(Family.DYADIC_RECTANGLES, f.grid)
        little = little_bmo_norm(f).value
        S = script_bmo_norm(f, fam).value
        out.observe(little, S, {"symbol": i, "form": "bmo_le_script"})
        if little > 0:
            reverse.append(S / little)
        fc = _centered(f)
        try:
            K = ap_constant(exp_of(fc, 1.0), 2.0, fam).value
            out.observe(S, 1.0 + math.log2(K), {"symbol": i, "form": "script_le_1_plus_log2_a2"})
        except WeightRangeError as exc:
            out.guard({"symbol": i, "form": "script_le_1_plus_log2_a2"}, str(exc))
        if S > 0:
            for c in bridge_factors:
                lam = c * S
                desc = {"symbol": i, "form": "a2_of_exp_le_4_pow", "lambda_over_norm": c}
                try:
                    val = ap_constant(exp_of(fc, 1.0 / lam), 2.0, fam).value
                except WeightRangeError as exc:
                    out.guard(desc, str(exc))
                    continue
                out.observe(val, 4.0 ** (S / lam), desc)
        for axis in (0, 1):
            slices = slice_bmo_norms(f, axis)
            out.observe(float(slices.max()), 2.0 * little, {"symbol": i, "form": "slice_bmo", "axis": axis})
    for i, w in enumerate(weights):
        fam = CubeFamily(Family.DYADIC_RECTANGLES, w.grid)
        A = ap_constant(w, 2.0, fam).value
        g1 = Grid(1, w.grid.n_points)
        fam1 = CubeFamily(Family.DYADIC_INTERVALS, g1)
        for axis in (0, 1):
            vals = w.values if axis == 1 else w.values.T
            worst = max(ap_constant(Weight(g1, row), 2.0, fam1).value for row in vals)
            out.observe(worst, A, {"weight": i, "form": "slice_a2", "axis": axis})
    out.details["reverse_constant_max"] = max(reverse) if reverse else None
    return out


def check_fractional_identity(weights: Sequence[Weight], fam: CubeFamily, alpha: float = 0.25, p: float = 2.0) -> CheckOutcome:
    """``[w]_{A_{p,q}} = [w^q]_{A_{q(n-alpha)/n}}`` under ``1/p - 1/q = alpha/n``."""
    n = fam.grid.dim
    prof = ExponentProfile.fractional(alpha, p, n)
    q = prof.q
    out = CheckOutcome("fractional_class_identity", EXACT)
    out.details["exponents"] = {"alpha": alpha, "p": p, "q": q, "n": n}
    for i, w in enumerate(weights):
        a = apq_constant(w, p, q, fam).value
        b = ap_constant(power(w, q), q * (n - alpha) / n, fam).value
        out.observe(max(a, b), min(a, b), {"weight": i}, rtol=IDENTITY_RTOL)
    return out


def check_restricted_membership(
    weights: Sequence[Weight],
    fam: CubeFamily,
    triples: Sequence[tuple[float, float, float]] = ((2.0, 1.0, 4.0), (3.0, 1.5, 6.0), (2.0, 1.0, math.inf)),
) -> CheckOutcome:
    """``A_{p/r-} ∩ RH_{(r+/p)'}`` via ``[w^s]_{A_{s(q-1)+1}}``, tied to the direct pair by a sandwich."""
    out = CheckOutcome("restricted_membership", EXACT)
    agree = 0
    for i, w in enumerate(weights):
        for p, r_minus, r_plus in triples:
            m = membership_restricted(w, p, r_minus, r_plus, fam)
            desc = {"weight": i, "p": p, "r_minus": r_minus, "r_plus": r_plus}
            out.observe(m.lower, m.constant, {**desc, "side": "lower"})
            out.observe(m.constant, m.upper, {**desc, "side": "upper"})
            direct = math.isfinite(m.ap_part) and math.isfinite(m.rh_part)
            agree += direct == m.member
    out.details["membership_agreement"] = agree
    return out


# --- empirical checks -------------------------------------------------------


def check_perez_rh(weights: Sequence[Weight], fam: CubeFamily, p: float = 2.0) -> CheckOutcome:
    """``(avg w^rho)^{1/rho} <= 2 avg w`` with ``rho = 1 + 1/(2^{2p+n+1} [w]_{A_p})``."""
    out = CheckOutcome("perez_reverse_holder", EMPIRICAL)
    n = fam.grid.dim
    violating = []
    for i, w in enumerate(weights):
        A = ap_constant(w, p, fam).value
        rho = 1.0 + 1.0 / (2.0 ** (2 * p + n + 1) * A)
        ratios = np.exp(per_cube_log([(w.log_values, rho, 1.0 / rho), (w.log_values, 1.0, -1.0)], fam))
        k = int(np.argmax(ratios))
        out.observe(float(ratios[k]), 2.0, {"weight": i, "rho": rho, "cube": fam.cube(k).to_dict()})
        if ratios[k] > 2.0:
            violating.append({"weight": i, "cube": fam.cube(k).to_dict(), "deficit": float(ratios[k] - 2.0)})
    out.details["violating_cubes"] = violating
    out.details["max_deficit"] = max((v["deficit"] for v in violating), default=0.0)
    return out


def _step_max(keys: np.ndarray, vals: np.ndarray):
    """Monotone step function ``t -> max{vals[i] : keys[i] <= t}``."""
    order = np.argsort(keys, kind="stable")
    ks, run = keys[order], np.maximum.accumulate(vals[order])

    def phi(t: float) -> float:
        idx = np.searchsorted(ks, t * (1 + 1e-12), side="right") - 1
        return float(run[idx]) if idx >= 0 else 0.0

    return phi


def _commutator_norm(T: LinearKernelOp, b, k: int, w, p: float, q: float, **kw) -> float:
    op = custom_op(T.grid, commutator_matrix(T, b, k))
    return weighted_norm(op, w, p, q, **kw).value


def check_main_linear(
    T: LinearKernelOp,
    weights: Sequence[Weight],
    symbols: Sequence[GridFn],
    norms: Sequence[float],
    fam: CubeFamily,
    profile: ExponentProfile = ExponentProfile(p=2.0, q=2.0, s=2.0, theta=1.0, eta=2.0),
    k_list: Sequence[int] = (0, 1, 2),
    pairs_per_weight: int = 1,
) -> CheckOutcome:
    """Commutator norms against the general bound with a measured ``phi``.

    ``phi(t)`` is the largest measured ``||T||_{L^p(w^p) -> L^q(w^q)}`` over corpus
    weights with ``[w^theta]_{A_s} <= t``; at ``k = 0`` the ratio is at most one by
    construction (harness sanity only).
    """
    p, q, s, theta, eta = profile.p, profile.q, profile.s, profile.theta, profile.eta
    n = T.grid.dim
    eta_c = conjugate(eta)
    mn = min(1.0, s - 1.0)
    out = CheckOutcome("main_linear", EMPIRICAL, harness_sanity=0 in k_list)
    c_theta, c_eta, norm_T = [], [], []
    for w in weights:
        c_theta.append(ap_constant(power(w, theta), s, fam).value)
        c_eta.append(ap_constant(power(w, theta * eta), s, fam).value)
        norm_T.append(weighted_norm(T, w, p, q).value)
    phi = _step_max(np.array(c_theta), np.array(norm_T))
    sharp_ratio, k0 = 0.0, 0.0
    for i, w in enumerate(weights):
        for jj in range(pairs_per_weight):
            j = (i + jj * len(weights)) % len(symbols)
            nb = norms[j]
            arg = 4.0 ** (mn / eta_c) * c_eta[i] ** (1.0 / eta)
            arg2 = 4.0**mn * 2.0**s * c_theta[i]
            for k in k_list:
                if k > 0 and nb == 0:
                    lhs = 0.0  # constant symbol: the commutator vanishes
                else:
                    lhs = _commutator_norm(T, symbols[j], k, w, p, q) / nb**k
                rhs = math.factorial(k) * (eta_c * theta / mn) ** k * phi(arg)
                r = out.observe(lhs, rhs, {"weight": i, "symbol": j, "k": k}, rtol=1e-10)
                if k == 0:
                    k0 = max(k0, r)
                sharp = (
                    math.factorial(k)
                    * (2.0 ** (2 * max(s, conjugate(s)) + n + 2) * theta / mn) ** k
                    * c_theta[i] ** (k * max(1.0, 1.0 / (s - 1.0)))
                    * phi(arg2)
                )
                if k > 0:
                    sharp_ratio = max(sharp_ratio, lhs / sharp if sharp > 0 else 0.0)
    out.details.update(
        {
            "operator": T.to_dict(),
            "profile": profile.to_dict(),
            "k0_self_consistency_max_ratio": k0,
            "max_ratio_by_k": out.max_ratio_by("k"),
            "sharpened_bound_max_ratio_k_ge_1": sharp_ratio,
        }
    )
    return out


def crw_weights(grid: Grid, count: int = 12, a2_max: float = 100.0) -> list[Weight]:
    """Two-value weights whose ``A_2`` constant ``(1 + a)^2 / (4a)`` runs from 1 to ``a2_max``."""
    targets = np.geomspace(1.0, a2_max, count)
    # (1 + a)^2 = 4 a t  ->  a = 2t - 1 + 2 sqrt(t^2 - t)
    a = 2 * targets - 1 + 2 * np.sqrt(np.maximum(targets**2 - targets, 0.0))
    return [two_value_weight(grid, float(v)) for v in a]


def check_crw_quantitative(
    weights: Sequence[Weight],
    symbols: Sequence[GridFn],
    norms: Sequence[float],
    fam: CubeFamily,
    k_list: Sequence[int] = (1, 2),
    p: float = 2.0,
) -> CheckOutcome:
    """Hilbert commutators on ``L^2(w)`` as ``[w]_{A_2}`` grows.

    The observed bound is ``C_k [w]^{k+1} ||b||^k`` with ``C_k`` fitted on the
    least weighted instance of the corpus (``[w] = 1`` for the default
    two-value family).  Also reported: the growth exponent of the worst ratio
    against ``[w]``, and the ratio to the corollary's explicit right-hand side
    ``k! (2^{2 max{p,p'}+n+2} p / min{1, p-1})^k [w]^k phi(4^{min{1,p-1}} 2^p [w])``
    with ``phi(t) = C t`` and ``C`` fitted at ``k = 0``.
    The weight enters as the measure, so norms are taken with ``v = w^{1/2}``.
    """
    if p != 2.0:
        raise ConfigError("the quantitative corollary check is implemented for p = 2")
    T = hilbert_op(fam.grid)
    n = fam.grid.dim
    out = CheckOutcome("crw_quantitative", EMPIRICAL)
    A = np.array([ap_constant(w, p, fam).value for w in weights])
    roots = [power(w, 0.5) for w in weights]
    norm0 = np.array([weighted_norm(T, v, 2, 2).value for v in roots])
    C = float(np.max(norm0 / A))
    coef = 2.0 ** (2 * max(p, conjugate(p)) + n + 2) * p / min(1.0, p - 1.0)
    live = [j for j in range(len(symbols)) if norms[j] > 0]
    base = int(np.argmin(A))
    growth, fitted, corollary, literal = {}, {}, {}, {}
    for k in k_list:
        lhs = np.zeros((len(weights), len(symbols)))
        for i, v in enumerate(roots):
            for j in live:
                lhs[i, j] = _commutator_norm(T, symbols[j], k, v, 2, 2) / norms[j] ** k
        C_k = float(lhs[base].max())
        fitted[str(k)] = C_k
        for i in range(len(weights)):
            for j in live:
                out.observe(lhs[i, j], C_k * A[i] ** (k + 1), {"weight": i, "a2": A[i], "symbol": j, "k": k})
        best = lhs.max(axis=1)
        growth[str(k)] = float(np.polyfit(np.log(A), np.log(best), 1)[0]) if len(set(A)) >= 2 else math.nan
        rhs = math.factorial(k) * coef**k * A**k * C * 4.0 ** min(1.0, p - 1.0) * 2.0**p * A
        corollary[str(k)] = float(np.max(best / rhs))
        literal[str(k)] = float(np.max(best / (C * A ** (k + 1))))
    out.details.update(
        {
            "fitted_C_k0": C,
            "fitted_C_k": fitted,
            "a2_range": [float(A.min()), float(A.max())],
            "growth_exponent": growth,
            "max_ratio_by_k": out.max_ratio_by("k"),
            "corollary_rhs_max_ratio": corollary,
            "ratio_to_k0_C_times_a2_pow_k_plus_1": literal,
        }
    )
    return out


def check_fractional(
    weights: Sequence[Weight],
    symbols: Sequence[GridFn],
    norms: Sequence[float],
    fam: CubeFamily,
    alpha: float = 0.25,
    p: float = 2.0,
    k_list: Sequence[int] = (0, 1, 2),
    starts: int = 8,
) -> CheckOutcome:
    """Riesz-potential commutators against the fractional corollary's shape (``C`` fitted at ``k = 0``)."""
    n = fam.grid.dim
    prof = ExponentProfile.fractional(alpha, p, n)
    q, s = prof.q, prof.s
    T = riesz_op(fam.grid, alpha)
    out = CheckOutcome("fractional", EMPIRICAL, harness_sanity=0 in k_list)
    expo = max(1.0, conjugate(p) / q)
    A = np.array([apq_constant(w, p, q, fam).value for w in weights])
    norm0 = np.array([weighted_norm(T, w, p, q, starts=starts).value for w in weights])
    C = float(np.max(norm0 / A ** ((1 - alpha / n) * expo)))
    coef = 2.0 ** (2 * max(s, conjugate(s)) + n + 2) * q / min(1.0, s - 1.0)
    identity_gap = 0.0
    for i, w in enumerate(weights):
        other = ap_constant(power(w, q), s, fam).value
        identity_gap = max(identity_gap, abs(other - A[i]) / A[i])
        j = i % len(symbols)
        for k in k_list:
            if k > 0 and norms[j] == 0:
                continue
            lhs = norm0[i] if k == 0 else _commutator_norm(T, symbols[j], k, w, p, q, starts=starts) / norms[j] ** k
            rhs = C * math.factorial(k) * coef**k * A[i] ** ((k + 1 - alpha / n) * expo)
            out.observe(lhs, rhs, {"weight": i, "symbol": j, "k": k})
    out.details.update(
        {
            "exponents": prof.to_dict(),
            "fitted_C": C,
            "identity_max_rel_gap": identity_gap,
            "max_ratio_by_k": out.max_ratio_by("k"),
        }
    )
    return out


def multilinear_corpus(grid: Grid, seed: int) -> tuple[list[tuple[Weight, Weight]], list[tuple[BmoFn, BmoFn]]]:
    """Resolution-independent corpus: every member is a fixed function on ``[0, 1)`` sampled at ``N``.

    Weights are ``w_j = u_j^{1/2}`` so that ``w_j^2 = u_j``.
    """
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(9,)))
    mseeds = [int(v) for v in rng.integers(2**31, size=4)]
    depth = min(3, grid.levels)
    us = [
        power_weight(grid, -0.4),
        power_weight(grid, 0.3, 0.3),
        two_value_weight(grid, 4.0),
        exp_of(dyadic_martingale(grid, mseeds[0], depth), 0.3),
    ]
    roots = [power(u, 0.5) for u in us]
    vw = [(roots[0], roots[1]), (roots[2], roots[3]), (roots[1], roots[2]), (roots[3], roots[0])]
    d4 = min(4, grid.levels)
    bs = [
        (dyadic_martingale(grid, mseeds[1], d4), dyadic_martingale(grid, mseeds[2], d4)),
        (log_singularity(grid, 0.4), dyadic_martingale(grid, mseeds[3], d4)),
    ]
    return vw, bs


def check_multilinear(
    sizes: Sequence[int] = (64, 128, 256),
    p_list: tuple[float, float] = (2.0, 2.0),
    alphas: Sequence[tuple[int, int]] = ((0, 0), (1, 0), (0, 1), (1, 1)),
    seed: int = 0,
    starts: int = 4,
) -> CheckOutcome:
    """Bilinear Hilbert commutators on ``L^{p1}(w1) x L^{p2}(w2) -> L^p(nu_w)``.

    Both bound shapes are evaluated with a measured ``phi``: the joint
    ``A_P`` form ``alpha! phi(c_P [w]) [w]^{|alpha| max{p, p_j'}}`` and the
    bilinear CZ form ``alpha! C [w]^{(|alpha|+1) max{1, p_j'/p}}``; the
    tighter one gives the ratio.
    """
    p1, p2 = p_list
    p = 1.0 / (1.0 / p1 + 1.0 / p2)
    pcs = [conjugate(p1), conjugate(p2)]
    c_P = 4.0 ** (1 + sum(min(1 / pj, 1 - 1 / pj) for pj in p_list))
    e_joint = max([p] + pcs)
    e_cz = max([1.0] + [pc / p for pc in pcs])
    out = CheckOutcome("multilinear_bht", EMPIRICAL, harness_sanity=(0, 0) in alphas)
    per_size = {}
    for N in sizes:
        grid = Grid(1, N)
        fam = CubeFamily(Family.ALL_INTERVALS, grid)
        T = bht_op(grid)
        vws, bs = multilinear_corpus(grid, seed)
        prof = ExponentProfile(p_list=p_list)
        A = np.array([a_vector_constant(VectorWeight(pair, prof), fam).value for pair in vws])
        base = np.array([bilinear_weighted_norm(T, w1, w2, p1, p2, starts=starts, seed=seed).value for w1, w2 in vws])
        phi = _step_max(A, base)
        C = float(np.max(base / A**e_cz))
        bnorms = [(script_bmo_norm(b1, fam).value, script_bmo_norm(b2, fam).value) for b1, b2 in bs]
        worst = 0.0
        for i, (w1, w2) in enumerate(vws):
            for j, (b1, b2) in enumerate(bs):
                for a in alphas:
                    if a == (0, 0) and j > 0:
                        continue
                    if a == (0, 0):
                        lhs = base[i]
                    else:
                        est = bilinear_weighted_norm(T, w1, w2, p1, p2, b=(b1, b2), alpha=a, starts=starts, seed=seed)
                        lhs = est.value / (bnorms[j][0] ** a[0] * bnorms[j][1] ** a[1])
                    fact = math.factorial(a[0]) * math.factorial(a[1])
                    size_a = a[0] + a[1]
                    joint = fact * phi(c_P * A[i]) * A[i] ** (size_a * e_joint)
                    cz = fact * C * A[i] ** ((size_a + 1) * e_cz)
                    r = out.observe(lhs, min(joint, cz), {"n_points": N, "vector_weight": i, "symbols": j, "alpha": list(a)})
                    if a != (0, 0):
                        worst = max(worst, r)
        per_size[str(N)] = worst
    vals = list(per_size.values())
    variation = max((max(a, b) / min(a, b) for a, b in zip(vals, vals[1:]) if min(a, b) > 0), default=1.0)
    out.details.update(
        {
            "p_list": list(p_list),
            "p": p,
            "max_ratio_by_size": per_size,
            "max_consecutive_variation": variation,
            "max_ratio_by_alpha": out.max_ratio_by("alpha"),
            "bht_model": bht_op(Grid(1, sizes[0])).to_dict(),
        }
    )
    return out


def check_converse_linear(
    T: LinearKernelOp,
    symbols: Sequence[GridFn],
    norms: Sequence[float],
    p: float = 2.0,
    lambda0: float = 0.5,
    k_max: int = 8,
    grid_factors: Sequence[float] = (0.0, 0.1, 0.2, 0.3, 0.4),
) -> CheckOutcome:
    """Both directions of the commutator/weight bridge with ``||b|| = 1`` normalization.

    (b): ``C0 = max_{k <= K} ||T_b^k|| (lambda0/p)^k / k!`` and
    ``||T||_{L^p(e^{lam b})} <= C0 (1 - |lam|/lambda0)^{-1}``.
    (a): ``phi(lambda0)`` is the largest measured weighted norm over the grid
    ``|lam| <= lambda0`` and ``||T_b^k|| <= phi(lambda0) k! (p/lambda0)^k``.
    """
    if p != 2.0:
        raise ConfigError("the converse check measures L^2 norms; use p = 2")
    out = CheckOutcome("converse_linear", EMPIRICAL)
    viol = {"a": 0, "b": 0}
    c0_list = []
    a_grid = sorted(set(list(grid_factors) + [lambda0]))
    for j, (b, nb) in enumerate(zip(symbols, norms)):
        if nb == 0:
            continue
        bh = BmoFn(b.grid, (b.values - 0.5 * (b.values.max() + b.values.min())) / nb)
        comm = [_commutator_norm(T, bh, k, None, 2, 2) for k in range(k_max + 1)]
        C0 = max(c * (lambda0 / p) ** k / math.factorial(k) for k, c in enumerate(comm))
        c0_list.append(C0)
        measured = {}
        for t in a_grid:
            for sign in ((1.0,) if t == 0 else (1.0, -1.0)):
                lam = sign * t
                v = exp_of(bh, lam / 2.0)
                measured[lam] = weighted_norm(T, v, 2, 2).value
        for t in grid_factors:
            for lam in ((0.0,) if t == 0 else (t, -t)):
                before = out.violations
                out.observe(measured[lam], C0 / (1 - abs(lam) / lambda0), {"symbol": j, "direction": "b", "lambda": lam})
                viol["b"] += out.violations - before
        phi0 = max(measured.values())
        for k, c in enumerate(comm):
            before = out.violations
            out.observe(c, phi0 * math.factorial(k) * (p / lambda0) ** k, {"symbol": j, "direction": "a", "k": k})
            viol["a"] += out.violations - before
    out.details.update(
        {
            "lambda0": lambda0,
            "k_max": k_max,
            "violations_by_direction": viol,
            "max_ratio_by_direction": out.max_ratio_by("direction"),
            "C0_max": max(c0_list, default=0.0),
        }
    )
    return out


def double_hilbert_commutator_norm(b: GridFn) -> float:
    """``||[b, H_1 H_2]||`` on ``L^2`` of a 2D grid."""
    T = double_hilbert_op(b.grid)
    bv = np.asarray(b.values, dtype=float)
    bv = bv - 0.5 * (bv.max() + bv.min())
    shape = b.grid.shape

    def A(x):
        x = np.ravel(x).reshape(shape)
        return (bv * T.apply(x) - T.apply(bv * x)).ravel()

    def At(y):
        y = np.ravel(y).reshape(shape)
        return (T.apply_adjoint(bv * y) - bv * T.apply_adjoint(y)).ravel()

    return spectral_norm(A, At, b.grid.size).value


def double_hilbert_corpus(grid: Grid, seed: int) -> list[BmoFn]:
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(11,)))
    mseeds = [int(v) for v in rng.integers(2**31, size=2)]
    depth = min(3, grid.levels)
    return [
        dyadic_martingale(grid, mseeds[0], depth),
        dyadic_martingale(grid, mseeds[1], depth, 0.5),
        log_singularity(grid, 0.45),
    ]


def separable_commutator_error(n_points: int, seed: int = 0) -> float:
    """``[b, H_1 H_2](u ⊗ v)`` against ``([g, H] u) ⊗ (H v)`` for ``b(x, y) = g(x)``."""
    rng = np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(12,)))
    g1, g2 = Grid(1, n_points), Grid(2, n_points)
    g = dyadic_martingale(g1, int(rng.integers(2**31)), min(3, g1.levels))
    u, v = rng.standard_normal(n_points), rng.standard_normal(n_points)
    H, T = hilbert_op(g1), double_hilbert_op(g2)
    b2 = np.repeat(g.values[:, None], n_points, axis=1)
    f = np.outer(u, v)
    two_d = b2 * T.apply(f) - T.apply(b2 * f)
    one_d = g.values * H.apply(u) - H.apply(g.values * u)
    ref = np.outer(one_d, H.apply(v))
    return float(np.max(np.abs(two_d - ref)) / np.max(np.abs(ref)))


def check_double_hilbert_commutator(sizes: Sequence[int] = (32, 64, 128), seed: int = 0) -> CheckOutcome:
    """``||[b, H_1 H_2]||_{L^2} / ||b||_bmo`` as the grid doubles, plus the tensor cross-check."""
    out = CheckOutcome("double_hilbert_commutator", EMPIRICAL)
    out.details["separable_cross_check_error"] = separable_commutator_error(sizes[0], seed)
    per_size = {}
    for N in sizes:
        grid = Grid(2, N)
        worst = 0.0
        for i, b in enumerate(double_hilbert_corpus(grid, seed)):
            nb = little_bmo_norm(b).value
            r = double_hilbert_commutator_norm(b) / nb if nb > 0 else 0.0
            out.instances_run += 1
            out.records.append({"n_points": N, "symbol": i, "ratio": r})
            worst = max(worst, r)
            if r > out.max_ratio:
                out.max_ratio, out.argmax = r, {"n_points": N, "symbol": i}
        per_size[str(N)] = worst
    vals = list(per_size.values())
    out.details["max_ratio_by_size"] = per_size
    out.details["max_consecutive_variation"] = max(
        (max(a, b) / min(a, b) for a, b in zip(vals, vals[1:]) if min(a, b) > 0), default=1.0
    )
    return out


def check_power_weight_membership(
    sizes: Sequence[int] = (256, 512, 1024, 2048),
    exponents: Sequence[float] = (0.0, 0.1, 0.25, 0.4),
    p_j: float = 3.0,
) -> CheckOutcome:
    """Clipped ``|x - 1/2|^{-a}`` in ``A_{p_j/2}`` and ``(w, w)`` in ``A_P``: constants should settle as ``N`` grows."""
    out = CheckOutcome("power_weight_membership", EMPIRICAL)
    table = {}
    for a in exponents:
        rows = []
        for N in sizes:
            grid = Grid(1, N)
            fam = CubeFamily(Family.ALL_INTERVALS, grid)
            w = power_weight(grid, -a)
            m = membership_restricted(w, p_j, 2.0, math.inf, fam)
            vec = a_vector_constant(VectorWeight((w, w), ExponentProfile(p_list=(p_j, p_j))), fam).value
            rows.append([N, m.constant, vec])
            out.instances_run += 1
        growth = rows[-1][1] / rows[-2][1] if len(rows) > 1 else 1.0
        out.max_ratio = max(out.max_ratio, growth)
        table[str(a)] = {"rows": rows, "last_growth": growth}
    out.details["constants"] = table
    out.details["p_j"] = p_j
    return out


# --- suites -----------------------------------------------------------------


SIZES = {
    "smoke": {
        "n_1d": 128,
        "n_2d": 16,
        "weights": 40,
        "symbols": 10,
        "weights_2d": 6,
        "symbols_2d": 6,
        "perez_n": 256,
        "perez_weights": 20,
        "crw_n": 128,
        "crw_weights": 6,
        "crw_symbols": 3,
        "fractional_n": 64,
        "fractional_weights": 6,
        "multilinear_sizes": [32, 64],
        "converse_n": 128,
        "converse_symbols": 4,
        "double_hilbert_sizes": [16, 32],
        "power_sizes": [128, 256, 512],
        "eta_list": [2.0],
    },
    "full": {
        "n_1d": 512,
        "n_2d": 64,
        "weights": 200,
        "symbols": 50,
        "weights_2d": 20,
        "symbols_2d": 20,
        "perez_n": 1024,
        "perez_weights": 100,
        "crw_n": 256,
        "crw_weights": 12,
        "crw_symbols": 4,
        "fractional_n": 128,
        "fractional_weights": 20,
        "multilinear_sizes": [64, 128, 256],
        "converse_n": 256,
        "converse_symbols": 20,
        "double_hilbert_sizes": [32, 64, 128],
        "power_sizes": [256, 512, 1024, 2048],
        "eta_list": [4.0 / 3.0, 2.0, 4.0],
    },
}

SUITES = ("exact", "empirical", "all")


@dataclass
class SuiteReport:
    config: dict
    checks: list[CheckOutcome]

    @property
    def exact_violations(self) -> int:
        return sum(c.violations for c in self.checks if c.classification == EXACT)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return _clean(
            {
                "artifact": "weightlab",
                "version": __version__,
                "config": self.config,
                "exact_violations": self.exact_violations,
                "passed": self.passed,
                "checks": [c.to_dict() for c in self.checks],
            }
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["check_id", "classification", "instances_run", "violations", "max_ratio", "guard_trips", "passed"])
        for c in self.checks:
            writer.writerow([c.check_id, c.classification, c.instances_run, c.violations, repr(float(c.max_ratio)), c.guard_trips, c.passed])
        return buf.getvalue()

    def instances_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["check_id", "instance", "lhs", "rhs", "ratio"])
        for c in self.checks:
            for rec in c.records:
                desc = {k: v for k, v in rec.items() if k not in ("lhs", "rhs", "ratio")}
                writer.writerow([c.check_id, json.dumps(_clean(desc), sort_keys=True), rec.get("lhs", ""), rec.get("rhs", ""), rec["ratio"]])
        return buf.getvalue()


def resolve_config(suite: str = "exact", seed: int = 0, size: str = "smoke", overrides: dict | None = None) -> dict:
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}; choose from {SUITES}")
    if size not in SIZES:
        raise ConfigError(f"unknown size {size!r}; choose from {tuple(SIZES)}")
    cfg = {"suite": suite, "seed": int(seed), "size": size, **SIZES[size], "family_1d": "all_intervals"}
    for key, val in (overrides or {}).items():
        if key not in cfg:
            raise ConfigError(f"unknown configuration key {key!r}")
        cfg[key] = val
    for key in ("weights", "symbols", "weights_2d", "symbols_2d", "perez_weights", "crw_weights", "crw_symbols",
                "fractional_weights", "converse_symbols"):
        if int(cfg[key]) < 1:
            raise ConfigError(f"corpus size {key} must be at least 1")
    return cfg


def run_exact(cfg: dict) -> list[CheckOutcome]:
    seed = cfg["seed"]
    g1 = Grid(1, cfg["n_1d"])
    fam = CubeFamily(Family(cfg["family_1d"]), g1)
    weights = list(WeightCorpus(g1, cfg["weights"], seed))
    symbols = list(SymbolCorpus(g1, cfg["symbols"], seed))
    norms = symbol_norms(symbols, fam)
    g2 = Grid(2, cfg["n_2d"])
    weights2 = list(WeightCorpus(g2, cfg["weights_2d"], seed))
    symbols2 = list(SymbolCorpus(g2, cfg["symbols_2d"], seed))
    return [
        check_lemma_bmo_to_ap(symbols, fam, norms),
        check_lemma_product(weights, symbols, fam, norms, eta_list=cfg["eta_list"]),
        check_vector_algebra(vector_corpus(weights), fam),
        check_ap_monotone_duality(weights, fam),
        check_bmo_vs_script(symbols, fam, norms),
        check_bmo_rect_equivalence(symbols2, weights2),
        check_fractional_identity(weights, fam),
        check_restricted_membership(weights, fam),
    ]


def run_empirical(cfg: dict) -> list[CheckOutcome]:
    seed = cfg["seed"]
    g1 = Grid(1, cfg["n_1d"])
    fam = CubeFamily(Family(cfg["family_1d"]), g1)
    weights = list(WeightCorpus(g1, cfg["weights"], seed))
    symbols = list(SymbolCorpus(g1, cfg["symbols"], seed))
    norms = symbol_norms(symbols, fam)
    gp = Grid(1, cfg["perez_n"])
    perez = check_perez_rh(list(WeightCorpus(gp, cfg["perez_weights"], seed)), CubeFamily(Family.ALL_INTERVALS, gp))
    main = check_main_linear(hilbert_op(g1), weights, symbols, norms, fam, k_list=(0, 1, 2))
    gc = Grid(1, cfg["crw_n"])
    famc = CubeFamily(Family.ALL_INTERVALS, gc)
    csyms = list(SymbolCorpus(gc, cfg["crw_symbols"], seed))
    crw = check_crw_quantitative(crw_weights(gc, cfg["crw_weights"]), csyms, symbol_norms(csyms, famc), famc)
    gf = Grid(1, cfg["fractional_n"])
    famf = CubeFamily(Family.ALL_INTERVALS, gf)
    fsyms = list(SymbolCorpus(gf, max(1, cfg["symbols"] // 5), seed))
    frac = check_fractional(list(WeightCorpus(gf, cfg["fractional_weights"], seed)), fsyms, symbol_norms(fsyms, famf), famf)
    multi = check_multilinear(cfg["multilinear_sizes"], seed=seed)
    gv = Grid(1, cfg["converse_n"])
    famv = CubeFamily(Family.ALL_INTERVALS, gv)
    vsyms = list(SymbolCorpus(gv, cfg["converse_symbols"], seed))
    conv = check_converse_linear(hilbert_op(gv), vsyms, symbol_norms(vsyms, famv))
    dh = check_double_hilbert_commutator(cfg["double_hilbert_sizes"], seed)
    pw = check_power_weight_membership(cfg["power_sizes"])
    return [perez, main, crw, frac, multi, conv, dh, pw]


def run_suite(suite: str = "exact", seed: int = 0, size: str = "smoke", overrides: dict | None = None) -> SuiteReport:
    """Run a verification suite; the report embeds the resolved configuration."""
    cfg = resolve_config(suite, seed, size, overrides)
    checks: list[CheckOutcome] = []
    if suite in ("exact", "all"):
        checks += run_exact(cfg)
    if suite in ("empirical", "all"):
        checks += run_empirical(cfg)
    return SuiteReport(cfg, checks)
