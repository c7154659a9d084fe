"""Oscillation norms: BMO, the localized exp-L norm and its supremum.

``expl_norm`` finds the ``lambda`` with ``avg_Q exp(|h| / lambda) = 2``.  The
root is bracketed by Jensen (``lambda >= avg|h| / ln 2``) and by convexity of
``t -> exp(t / lambda)`` on ``[0, max|h|]`` (``lambda <= M / ln(1 + M / avg|h|)``).
Inside that bracket a Newton iteration on ``mu = 1 / lambda`` is run from the
right end; the objective ``log avg exp(mu |h|) - ln 2`` is convex and
increasing in ``mu`` so the iterates decrease monotonically onto the root,
with bisection as a fallback whenever a step leaves the bracket.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .grid import Cube, CubeFamily, Family, Grid, GridError, GridFn, cube_windows

LN2 = math.log(2.0)
EXPL_RTOL = 1e-12
EXPL_MAX_ITER = 200


def _lse(x: np.ndarray) -> np.ndarray:
    """Row-wise log-sum-exp (avoids the per-call overhead of the scipy version)."""
    top = x.max(axis=1)
    return top + np.log(np.exp(x - top[:, None]).sum(axis=1))


class ConvergenceError(ArithmeticError):
    """The exp-L root finder failed to converge."""


class BmoFn(GridFn):
    """Real-valued grid function used as a BMO symbol."""

    def __init__(self, grid: Grid, values):
        super().__init__(grid, values)
        if self.is_complex:
            raise GridError("BMO functions are real-valued")

    @classmethod
    def from_array(cls, values) -> "BmoFn":
        values = np.asarray(values, dtype=float)
        return cls(Grid(values.ndim, values.shape[0]), values)

    def scaled(self, t: float) -> "BmoFn":
        return BmoFn(self.grid, t * self.values)

    def shifted(self, c: float) -> "BmoFn":
        return BmoFn(self.grid, self.values + c)


def as_bmo(f: GridFn) -> BmoFn:
    return f if isinstance(f, BmoFn) else BmoFn(f.grid, f.values)


@dataclass(frozen=True)
class ExpLNormResult:
    lambda_star: float
    iterations: int
    residual: float


@dataclass(frozen=True)
class NormResult:
    norm_kind: str
    family: str
    value: float
    argmax: Cube
    lambda_star: float | None = None

    def __float__(self) -> float:
        return self.value

    def to_dict(self) -> dict:
        return {
            "norm_kind": self.norm_kind,
            "family": self.family,
            "value": self.value,
            "argmax_cube": self.argmax.to_dict(),
            "lambda_star": self.lambda_star,
        }


# --- exp-L solver -----------------------------------------------------------


def _expl_rows(a: np.ndarray, rtol: float = EXPL_RTOL, max_iter: int = EXPL_MAX_ITER):
    """Solve ``mean(exp(a_i / lam)) = 2`` for every row of the nonnegative matrix ``a``.

    Returns ``(lam, iterations, residual)``; rows that vanish get ``lam = 0``.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    n = a.shape[1]
    mean = a.mean(axis=1)
    top = a.max(axis=1)
    lam = np.zeros(len(a))
    resid = np.zeros(len(a))
    live = top > 0
    if not np.any(live):
        return lam, 0, 0.0
    # the root is homogeneous in a, so solve on max-normalized rows (safe for subnormal data)
    top = top[live]
    a = a[live] / top[:, None]
    mean = a.mean(axis=1)
    mu_hi = LN2 / mean
    mu_lo = np.log1p(1.0 / mean)
    mu = mu_hi.copy()
    log_n = math.log(n)
    it = 0
    active = np.ones(len(a), dtype=bool)
    while np.any(active):
        it += 1
        if it > max_iter:
            raise ConvergenceError(f"exp-L solve did not converge in {max_iter} iterations")
        idx = np.flatnonzero(active)
        x = mu[idx, None] * a[idx]
        lse = _lse(x)
        g = lse - log_n - LN2
        # derivative: weighted mean of a under softmax(x)
        soft = np.exp(x - lse[:, None])
        dg = np.einsum("ij,ij->i", soft, a[idx])
        with np.errstate(divide="ignore", invalid="ignore"):
            step = np.where(dg > 0, g / dg, 0.0)
        hi = np.where(g > 0, mu[idx], mu_hi[idx])
        lo = np.where(g < 0, mu[idx], mu_lo[idx])
        mu_hi[idx], mu_lo[idx] = hi, lo
        cand = mu[idx] - step
        bad = ~((cand >= lo) & (cand <= hi)) | ~np.isfinite(cand)
        cand = np.where(bad, 0.5 * (lo + hi), cand)
        done = (np.abs(cand - mu[idx]) <= rtol * 1e-2 * np.abs(cand)) | (g == 0)
        mu[idx] = cand
        active[idx[done]] = False
    x = mu[:, None] * a
    resid_live = np.abs(np.exp(_lse(x) - log_n) - 2.0)
    lam[live] = top / mu
    resid[live] = resid_live
    return lam, it, float(resid.max())


def expl_norm(f: GridFn, cube: Cube, tol: float = EXPL_RTOL) -> ExpLNormResult:
    """Localized exp-L norm ``inf{lam > 0 : avg_Q exp(|f| / lam) <= 2}`` of ``f`` itself.

    Pass ``f - f_Q`` to get the oscillation norm used by the BMO-type spaces.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    cube.validate(f.grid)
    vals = np.abs(np.asarray(f.values)[cube.slices()]).ravel()
    lam, it, resid = _expl_rows(vals[None, :], rtol=tol)
    return ExpLNormResult(float(lam[0]), it, resid)


def expl_norm_bisect(values: np.ndarray, rtol: float = 1e-13, max_iter: int = 400) -> float:
    """Plain bisection for ``mean(exp(|v| / lam)) = 2``; slow reference solver."""
    a = np.abs(np.asarray(values, dtype=float)).ravel()
    top = a.max()
    if top == 0:
        return 0.0
    lo, hi = 1e-300, top / LN2
    log_n = math.log(a.size)

    def excess(lam):
        return _lse((a / lam)[None, :])[0] - log_n - LN2

    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        if excess(mid) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rtol * hi:
            break
    return 0.5 * (lo + hi)


# --- norms over families ----------------------------------------------------


def _oscillation_rows(values: np.ndarray, length, starts) -> np.ndarray:
    win = cube_windows(values, length, starts)
    return np.abs(win - win.mean(axis=1, keepdims=True))


def _check(f: GridFn, fam: CubeFamily) -> np.ndarray:
    if f.grid != fam.grid:
        raise GridError("function and family live on different grids")
    if f.is_complex:
        raise GridError("oscillation norms need real functions")
    return np.asarray(f.values)


def oscillations(f: GridFn, fam: CubeFamily) -> np.ndarray:
    """``avg_Q |f - f_Q|`` for every cube, in family order."""
    values = _check(f, fam)
    return np.concatenate([_oscillation_rows(values, L, st).mean(axis=1) for L, st in fam.blocks()])


def bmo_norm(f: GridFn, fam: CubeFamily) -> NormResult:
    """``sup_Q avg_Q |f - f_Q|`` over ``fam``."""
    osc = oscillations(f, fam)
    idx = int(np.argmax(osc))
    return NormResult("bmo", fam.name, float(osc[idx]), fam.cube(idx))


def script_bmo_norm(b: GridFn, fam: CubeFamily) -> NormResult:
    """``sup_Q ||b - b_Q||_{exp L, Q}`` over ``fam``.

    Cubes whose analytic upper bound cannot beat the running best are skipped;
    the supremum itself is unaffected.
    """
    values = _check(b, fam)
    blocks = fam.blocks()
    offsets = np.cumsum([0] + [len(st) for _, st in blocks])
    bounds = []
    best_val, best_idx = 0.0, 0

    def consider(k, rows):
        nonlocal best_val, best_idx
        L, st = blocks[k]
        lam, _, _ = _expl_rows(_oscillation_rows(values, L, st[rows]))
        for j in np.flatnonzero(lam == lam.max()):
            idx = int(offsets[k] + rows[j])
            if lam[j] > best_val or (lam[j] == best_val and idx < best_idx):
                best_val, best_idx = float(lam[j]), idx

    seeds, seed_lower = [], []
    for k, (L, st) in enumerate(blocks):
        a = _oscillation_rows(values, L, st)
        mean, top = a.mean(axis=1), a.max(axis=1)
        with np.errstate(divide="ignore", invalid="ignore"):
            upper = np.where(top > 0, top / np.log1p(top / np.where(mean > 0, mean, 1.0)), 0.0)
        bounds.append(upper)
        seeds.append(np.unique([int(np.argmax(upper)), int(np.argmax(mean))]))
        seed_lower.append(mean / LN2)
    # exact values at the most promising cube of each block seed the running best
    lowers = [lo.max() for lo in seed_lower]
    for k in np.argsort(lowers, kind="stable")[::-1]:
        rows = seeds[k]
        if bounds[k][rows].max() > best_val:
            consider(k, rows)
    for k in np.argsort([-u.max() for u in bounds], kind="stable"):
        keep = np.flatnonzero(bounds[k] >= best_val * (1 - 1e-9))
        keep = np.setdiff1d(keep, seeds[k])
        if not len(keep) or bounds[k].max() == 0:
            continue
        if best_val > 0:
            # lambda* >= best  iff  avg exp(|h| / best) >= 2
            L, st = blocks[k]
            a = _oscillation_rows(values, L, st[keep])
            excess = _lse(a / best_val) - math.log(a.shape[1]) - LN2
            keep = keep[excess >= -1e-12]
            if not len(keep):
                continue
        consider(k, keep)
    return NormResult("script_bmo", fam.name, best_val, fam.cube(best_idx), best_val)


def expl_norms_all(b: GridFn, fam: CubeFamily) -> np.ndarray:
    """``||b - b_Q||_{exp L, Q}`` for every cube (no pruning)."""
    values = _check(b, fam)
    return np.concatenate([_expl_rows(_oscillation_rows(values, L, st))[0] for L, st in fam.blocks()])


def little_bmo_norm(f: GridFn) -> NormResult:
    """BMO over the dyadic rectangles of a 2D grid."""
    if f.grid.dim != 2:
        raise GridError("little bmo is defined on 2D grids")
    res = bmo_norm(f, CubeFamily(Family.DYADIC_RECTANGLES, f.grid))
    return NormResult("little_bmo", res.family, res.value, res.argmax)


def slice_bmo_norms(f: GridFn, axis: int, indices=None, variant: Family = Family.DYADIC_INTERVALS) -> np.ndarray:
    """1D BMO norms of the slices of a 2D function along ``axis``.

    ``axis = 1`` gives ``f(x, .)`` for each row ``x``; ``axis = 0`` gives ``f(., y)``.
    """
    if f.grid.dim != 2:
        raise GridError("slices need a 2D function")
    vals = np.asarray(f.values)
    if axis == 0:
        vals = vals.T
    if indices is None:
        indices = range(vals.shape[0])
    g1 = Grid(1, f.grid.n_points)
    fam = CubeFamily(variant, g1)
    return np.array([bmo_norm(GridFn(g1, vals[i]), fam).value for i in indices])


# --- generators --------------------------------------------------------------


def log_singularity(grid: Grid, center: float = 0.5) -> BmoFn:
    """``log|x - center|`` clipped at half a cell (Euclidean distance in 2D)."""
    if grid.dim == 1:
        r = np.abs(grid.coordinates() - center)
    else:
        x, y = grid.coordinates()
        r = np.hypot(x - center, y - center)
    return BmoFn(grid, np.log(np.maximum(r, 0.5 * grid.spacing)))


def dyadic_martingale(grid: Grid, seed: int | np.random.Generator, depth: int, eps: float = 1.0) -> BmoFn:
    """Random dyadic cascade: each dyadic cube of the first ``depth`` generations adds a
    mean-zero ``±eps`` Haar pattern with a random sign.

    In 2D the pattern is one of the three tensor Haar functions, chosen at random.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    depth = min(int(depth), grid.levels)
    n = grid.n_points
    vals = np.zeros(grid.shape)
    for level in range(depth):
        size = n >> level
        half = size // 2
        count = n // size
        if grid.dim == 1:
            signs = rng.choice([-1.0, 1.0], size=count)
            pattern = np.concatenate([np.ones(half), -np.ones(half)])
            vals += eps * np.kron(signs, pattern)
        else:
            signs = rng.choice([-1.0, 1.0], size=(count, count))
            kinds = rng.integers(0, 3, size=(count, count))
            h = np.concatenate([np.ones(half), -np.ones(half)])
            one = np.ones(size)
            patterns = [np.outer(h, one), np.outer(one, h), np.outer(h, h)]
            for kind in range(3):
                mask = (kinds == kind) * signs
                vals += eps * np.kron(mask, patterns[kind])
    return BmoFn(grid, vals)


def two_value(grid: Grid, a: float) -> BmoFn:
    """``0`` on the left half (first axis) and ``a`` on the right half."""
    vals = np.zeros(grid.shape)
    vals[grid.n_points // 2 :] = a
    return BmoFn(grid, vals)


def generate_bmo(kind: str, grid: Grid, **params) -> BmoFn:
    """Dispatch to a named generator: ``log_singularity``, ``dyadic_martingale``, ``two_value``."""
    if kind == "log_singularity":
        return log_singularity(grid, **params)
    if kind == "dyadic_martingale":
        return dyadic_martingale(grid, **params)
    if kind == "two_value":
        return two_value(grid, **params)
    raise ValueError(f"unknown BMO generator {kind!r}")
