"""Discrete kernel realizations of the linear and bilinear operators.

Kernels are written in integer index units with the cell measure folded in,
so for the Hilbert transform ``K[i, j] = (1/N) / (x_i - x_j) = 1 / (i - j)``.
Singular diagonals are dropped; no regularization is applied.

Model choices (recorded in every ``to_dict``):

* Hilbert: non-periodic principal-value kernel on the unit interval.
* Riesz potential: ``c_alpha = 1``.
* BHT: periodic indexing, symmetrized odd kernel truncated at ``T = N/2 - 1``.
* BI_s and the bilinear CZ kernel: 1D, only the single point ``j = k = i``
  is excluded.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import signal
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, svds

from .grid import CubeFamily, Grid, GridError, GridFn

MAX_LINEAR_POINTS = 1024
MAX_DENSE_2D_POINTS = 64
SPECTRAL_RESIDUAL = 1e-10


class OperatorError(ValueError):
    """Invalid operator request."""


class OperatorConvergenceError(ArithmeticError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3g})")
        self.residual = residual


def _values(f) -> np.ndarray:
    return np.asarray(f.values if isinstance(f, GridFn) else f)


# --- maximal function -------------------------------------------------------


def maximal(f: GridFn, fam: CubeFamily) -> GridFn:
    """``Mf(x) = max`` of ``avg_Q |f|`` over family members ``Q`` containing ``x``."""
    if f.grid != fam.grid:
        raise GridError("function and family live on different grids")
    absf = GridFn(f.grid, np.abs(_values(f)))
    avgs = absf.averages(fam)
    out = np.zeros(f.grid.shape)
    n = f.grid.n_points
    pos = 0
    for length, starts in fam.blocks():
        a = avgs[pos : pos + len(starts)]
        pos += len(starts)
        covered = np.full(tuple(n - L + 1 for L in length), -np.inf)
        covered[tuple(starts.T)] = a
        # cell x is covered by the starts x - L + 1 .. x
        for axis, L in enumerate(length):
            pad = [(0, 0)] * len(length)
            pad[axis] = (L - 1, L - 1)
            padded = np.pad(covered, pad, constant_values=-np.inf)
            covered = sliding_window_view(padded, L, axis=axis).max(axis=-1)
        out = np.maximum(out, covered)
    return GridFn(f.grid, out)


# --- linear operators -------------------------------------------------------


def hilbert_matrix(n: int) -> np.ndarray:
    d = np.subtract.outer(np.arange(n), np.arange(n)).astype(float)
    with np.errstate(divide="ignore"):
        k = 1.0 / d
    np.fill_diagonal(k, 0.0)
    return k


def riesz_matrix(grid: Grid, alpha: float) -> np.ndarray:
    """``N^{-alpha} |i - j|^{alpha - n}`` with the diagonal removed (``c_alpha = 1``)."""
    n_dim = grid.dim
    if not 0 < alpha < n_dim:
        raise OperatorError(f"Riesz order must lie in (0, {n_dim}), got {alpha}")
    n = grid.n_points
    if n_dim == 1:
        dist = np.abs(np.subtract.outer(np.arange(n), np.arange(n))).astype(float)
    else:
        if n > MAX_DENSE_2D_POINTS:
            raise OperatorError(f"dense 2D Riesz matrices are limited to N <= {MAX_DENSE_2D_POINTS}")
        ix, iy = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        ix, iy = ix.ravel(), iy.ravel()
        dist = np.hypot(np.subtract.outer(ix, ix), np.subtract.outer(iy, iy))
    with np.errstate(divide="ignore"):
        k = n ** (-alpha) * dist ** (alpha - n_dim)
    np.fill_diagonal(k, 0.0)
    return k


@dataclass(frozen=True, eq=False)
class LinearKernelOp:
    """Linear operator on a grid given by a dense kernel matrix.

    For ``double_hilbert`` only the 1D factor is stored and the operator acts
    along each axis of a 2D array.
    """

    kind: str
    grid: Grid
    matrix: np.ndarray | None = None
    factor: np.ndarray | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        for arr in (self.matrix, self.factor):
            if arr is not None:
                arr.setflags(write=False)

    @property
    def is_dense(self) -> bool:
        return self.matrix is not None

    def apply(self, values: np.ndarray) -> np.ndarray:
        """Apply to a raw array of grid shape (real or complex)."""
        values = np.asarray(values)
        if values.shape != self.grid.shape:
            raise GridError(f"expected shape {self.grid.shape}, got {values.shape}")
        if self.matrix is not None:
            return (self.matrix @ values.ravel()).reshape(self.grid.shape)
        h = self.factor
        return h @ values @ h.T

    def apply_adjoint(self, values: np.ndarray) -> np.ndarray:
        values = np.asarray(values)
        if self.matrix is not None:
            return (self.matrix.T @ values.ravel()).reshape(self.grid.shape)
        h = self.factor
        return h.T @ values @ h

    def __call__(self, f: GridFn) -> GridFn:
        if f.grid != self.grid:
            raise GridError("operator and function live on different grids")
        return GridFn(self.grid, self.apply(f.values))

    def dense(self) -> np.ndarray:
        if self.matrix is not None:
            return self.matrix
        if self.grid.n_points > MAX_DENSE_2D_POINTS:
            raise OperatorError("dense double Hilbert matrix too large")
        return np.kron(self.factor, self.factor)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n_points": self.grid.n_points, "dim": self.grid.dim, **self.params}


def hilbert_op(grid: Grid) -> LinearKernelOp:
    if grid.dim != 1:
        raise GridError("the Hilbert transform acts on 1D grids")
    if grid.n_points > MAX_LINEAR_POINTS:
        raise OperatorError(f"dense linear operators are limited to N <= {MAX_LINEAR_POINTS}")
    return LinearKernelOp("hilbert", grid, matrix=hilbert_matrix(grid.n_points), params={"kernel": "pv_nonperiodic"})


def riesz_op(grid: Grid, alpha: float) -> LinearKernelOp:
    if grid.dim == 1 and grid.n_points > MAX_LINEAR_POINTS:
        raise OperatorError(f"dense linear operators are limited to N <= {MAX_LINEAR_POINTS}")
    return LinearKernelOp("riesz", grid, matrix=riesz_matrix(grid, alpha), params={"alpha": alpha, "c_alpha": 1.0})


def double_hilbert_op(grid: Grid) -> LinearKernelOp:
    if grid.dim != 2:
        raise GridError("the double Hilbert transform acts on 2D grids")
    return LinearKernelOp("double_hilbert", grid, factor=hilbert_matrix(grid.n_points), params={"kernel": "pv_nonperiodic"})


def custom_op(grid: Grid, matrix) -> LinearKernelOp:
    matrix = np.array(matrix, dtype=float)
    if matrix.shape != (grid.size, grid.size):
        raise OperatorError("custom kernel must be a size x size matrix")
    return LinearKernelOp("custom", grid, matrix=matrix)


def hilbert(f: GridFn, method: str = "direct") -> GridFn:
    """Discrete principal-value Hilbert transform ``sum_{j != i} f_j / (i - j)``.

    ``method="fft"`` evaluates the same sum as a linear convolution.
    """
    if f.grid.dim != 1:
        raise GridError("the Hilbert transform acts on 1D grids")
    vals = _values(f)
    n = f.grid.n_points
    if method == "direct":
        return GridFn(f.grid, hilbert_matrix(n) @ vals)
    if method == "fft":
        d = np.arange(-(n - 1), n, dtype=float)
        with np.errstate(divide="ignore"):
            k = 1.0 / d
        k[n - 1] = 0.0
        conv = signal.fftconvolve(vals, k)
        return GridFn(f.grid, conv[n - 1 : 2 * n - 1])
    raise OperatorError(f"unknown Hilbert method {method!r}")


def riesz(f: GridFn, alpha: float) -> GridFn:
    """Discrete Riesz potential ``I_alpha`` with ``c_alpha = 1``."""
    return riesz_op(f.grid, alpha)(f)


def double_hilbert(f: GridFn) -> GridFn:
    """``H_1 H_2 f``: the 1D transform applied along both axes."""
    return double_hilbert_op(f.grid)(f)


# --- bilinear operators -----------------------------------------------------


Slicer = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class BilinearKernelOp:
    """Bilinear operator ``T(f, g)(x_i) = sum_{j,k} K_i[j, k] f_j g_k`` on a 1D grid.

    BHT is stored as shift terms and never materialized; the other kernels
    are generated in chunks of output rows by ``slicer(rows) -> (len(rows), N, N)``.
    """

    kind: str
    grid: Grid
    params: dict = field(default_factory=dict)
    slicer: Slicer | None = None
    chunk: int = 16

    def apply(self, f: np.ndarray, g: np.ndarray) -> np.ndarray:
        return self.apply_modified(f, g)

    def __call__(self, f: GridFn, g: GridFn) -> GridFn:
        if f.grid != self.grid or g.grid != self.grid:
            raise GridError("operator and functions live on different grids")
        return GridFn(self.grid, self.apply(f.values, g.values))

    def apply_modified(self, f, g, b1=None, b2=None, a1: int = 0, a2: int = 0) -> np.ndarray:
        """Apply the kernel times ``(b1(x) - b1(y))^a1 (b2(x) - b2(z))^a2``."""
        f, g = np.asarray(f), np.asarray(g)
        if self.kind == "bht":
            return self._bht(f, g, b1, b2, a1, a2)
        n = self.grid.n_points
        dtype = np.result_type(f, g, float)
        out = np.zeros(n, dtype=dtype)
        for lo in range(0, n, self.chunk):
            rows = np.arange(lo, min(lo + self.chunk, n))
            u = np.broadcast_to(f, (len(rows), n)).astype(dtype)
            v = np.broadcast_to(g, (len(rows), n)).astype(dtype)
            if a1:
                u = u * np.subtract.outer(b1[rows], b1) ** a1
            if a2:
                v = v * np.subtract.outer(b2[rows], b2) ** a2
            out[rows] = np.einsum("rjk,rj,rk->r", self.slicer(rows), u, v)
        return out

    def _bht_tables(self, b1, b2, a1, a2):
        n = self.grid.n_points
        i = np.arange(n)[:, None]
        t = np.arange(1, n // 2)[None, :]
        im, ip = (i - t) % n, (i + t) % n
        left = right = np.ones(im.shape)
        if a1:
            left = left * (b1[:, None] - b1[im]) ** a1
            right = right * (b1[:, None] - b1[ip]) ** a1
        if a2:
            left = left * (b2[:, None] - b2[ip]) ** a2
            right = right * (b2[:, None] - b2[im]) ** a2
        return im, ip, left / t, right / t

    def _bht(self, f, g, b1, b2, a1, a2):
        im, ip, left, right = self._bht_tables(b1, b2, a1, a2)
        # sum_t (f_{i-t} g_{i+t} - f_{i+t} g_{i-t}) / t
        return (f[..., im] * g[..., ip] * left - f[..., ip] * g[..., im] * right).sum(axis=-1)

    def apply_adjoint(self, slot: int, h, other, b1=None, b2=None, a1: int = 0, a2: int = 0) -> np.ndarray:
        """Transpose in one slot: ``<T(f, g), h> = <f, T*_0(h, g)> = <g, T*_1(h, f)>``.

        The same kernel modification as :meth:`apply_modified` is applied.
        Real inputs only.
        """
        h, other = np.asarray(h, dtype=float), np.asarray(other, dtype=float)
        n = self.grid.n_points
        out = np.zeros(n)
        if self.kind == "bht":
            im, ip, left, right = self._bht_tables(b1, b2, a1, a2)
            hh = h[:, None]
            if slot == 0:  # other = g; f sits at i - t (left) and i + t (right)
                return (np.bincount(im.ravel(), (hh * other[ip] * left).ravel(), n)
                        - np.bincount(ip.ravel(), (hh * other[im] * right).ravel(), n))
            # other = f; g sits at i + t (left) and i - t (right)
            return (np.bincount(ip.ravel(), (hh * other[im] * left).ravel(), n)
                    - np.bincount(im.ravel(), (hh * other[ip] * right).ravel(), n))
        dtype = float
        bj, aj, bo, ao = (b1, a1, b2, a2) if slot == 0 else (b2, a2, b1, a1)
        for lo in range(0, n, self.chunk):
            rows = np.arange(lo, min(lo + self.chunk, n))
            v = np.broadcast_to(other, (len(rows), n)).astype(dtype)
            if ao:
                v = v * np.subtract.outer(bo[rows], bo) ** ao
            k = self.slicer(rows)
            if slot == 1:
                k = k.transpose(0, 2, 1)
            part = np.einsum("rjk,rk->rj", k, v) * h[rows, None]
            if aj:
                part = part * np.subtract.outer(bj[rows], bj) ** aj
            out += part.sum(axis=0)
        return out

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n_points": self.grid.n_points, **self.params}


def _need_1d(grid: Grid):
    if grid.dim != 1:
        raise GridError("bilinear operators are implemented on 1D grids")


def bht_op(grid: Grid) -> BilinearKernelOp:
    _need_1d(grid)
    return BilinearKernelOp("bht", grid, {"truncation": grid.n_points // 2 - 1, "indexing": "periodic"})


def bi_s_op(grid: Grid, s: float) -> BilinearKernelOp:
    """``N^{-s} (|i-j| + |i-k|)^{s-2}`` with the point ``j = k = i`` removed."""
    _need_1d(grid)
    if not 0 < s < 2:
        raise OperatorError(f"BI_s needs 0 < s < 2n = 2, got {s}")
    n = grid.n_points
    idx = np.arange(n)

    def slicer(rows):
        d = np.abs(rows[:, None] - idx[None, :]).astype(float)
        tot = d[:, :, None] + d[:, None, :]
        with np.errstate(divide="ignore"):
            k = n ** (-s) * tot ** (s - 2.0)
        k[tot == 0] = 0.0
        return k

    return BilinearKernelOp("bi_s", grid, {"s": s}, slicer)


def bilinear_cz_op(grid: Grid) -> BilinearKernelOp:
    """Odd kernel ``((x-y) + (x-z)) / ((x-y)^2 + (x-z)^2)^{3/2}`` of homogeneity ``-2``."""
    _need_1d(grid)
    idx = np.arange(grid.n_points)

    def slicer(rows):
        d = (rows[:, None] - idx[None, :]).astype(float)
        u, v = d[:, :, None], d[:, None, :]
        r2 = u * u + v * v
        with np.errstate(divide="ignore", invalid="ignore"):
            k = (u + v) / r2**1.5
        k[r2 == 0] = 0.0
        return k

    return BilinearKernelOp("bilinear_cz", grid, {}, slicer)


def bht(f: GridFn, g: GridFn) -> GridFn:
    """Truncated symmetrized discrete bilinear Hilbert transform."""
    return bht_op(f.grid)(f, g)


def bi_s(f: GridFn, g: GridFn, s: float) -> GridFn:
    """Discrete bilinear fractional integral."""
    return bi_s_op(f.grid, s)(f, g)


# --- weighted operator norms ------------------------------------------------


@dataclass(frozen=True)
class WeightedNormEstimate:
    value: float
    method: str
    iterations: int
    residual: float

    @property
    def is_lower_bound(self) -> bool:
        return self.method == "random_probe_lower_bound"

    def to_dict(self) -> dict:
        return {"value": self.value, "method": self.method, "iterations": self.iterations, "residual": self.residual}


def _as_linear_operator(apply, apply_adj, size, dtype=float) -> LinearOperator:
    return LinearOperator((size, size), matvec=apply, rmatvec=apply_adj, dtype=dtype)


def spectral_norm(apply, apply_adj, size: int, dense: np.ndarray | None = None) -> WeightedNormEstimate:
    """Largest singular value of a real operator given by mat-vec callbacks.

    ARPACK (implicitly restarted Lanczos on ``A^T A``) is used; the singular
    pair is accepted once ``||A v - s u|| + ||A^T u - s v|| <= 1e-10 s``.
    Small or stubborn cases fall back to a dense SVD.
    """
    if size <= 64 and dense is not None:
        s = float(np.linalg.norm(dense, 2))
        return WeightedNormEstimate(s, "exact_spectral_p2", 0, 0.0)
    op = _as_linear_operator(apply, apply_adj, size)
    rng = np.random.default_rng(0)
    v0 = rng.standard_normal(size)
    try:
        u, s, vt = svds(op, k=1, tol=1e-13, v0=v0, maxiter=20 * size)
    except ArpackNoConvergence as exc:
        if dense is None:
            raise OperatorConvergenceError(f"ARPACK failed: {exc}", math.inf) from None
        return WeightedNormEstimate(float(np.linalg.norm(dense, 2)), "exact_spectral_p2", 0, 0.0)
    sigma = float(s[0])
    if sigma == 0:
        return WeightedNormEstimate(0.0, "exact_spectral_p2", 1, 0.0)
    u, v = u[:, 0], vt[0]
    resid = (np.linalg.norm(apply(v) - sigma * u) + np.linalg.norm(apply_adj(u) - sigma * v)) / sigma
    if resid > SPECTRAL_RESIDUAL:
        if dense is None:
            raise OperatorConvergenceError("spectral norm did not reach the residual target", resid)
        return WeightedNormEstimate(float(np.linalg.norm(dense, 2)), "exact_spectral_p2", 0, 0.0)
    return WeightedNormEstimate(sigma, "exact_spectral_p2", 1, float(resid))


def _dual(y: np.ndarray, r: float) -> np.ndarray:
    return np.sign(y) * np.abs(y) ** (r - 1.0)


def weighted_norm(
    T: LinearKernelOp,
    w,
    p: float = 2.0,
    q: float = 2.0,
    starts: int = 32,
    seed: int = 0,
    max_iter: int = 200,
) -> WeightedNormEstimate:
    """``||T||`` from ``L^p(w^p)`` to ``L^q(w^q)`` with cell measure ``1/N^n``.

    ``p = q = 2`` gives the exact top singular value of ``D_w K D_w^{-1}``.
    Otherwise a nonlinear power iteration from ``starts`` seeded random
    vectors (plus the constant vector) returns a lower bound.
    """
    if not (1 < p < math.inf and 1 < q < math.inf):
        raise OperatorError("weighted norms need 1 < p, q < inf")
    wv = np.asarray(w.values if w is not None else np.ones(T.grid.shape), dtype=float).ravel()
    shape = T.grid.shape
    size = T.grid.size

    def A(h):
        return wv * T.apply((np.ravel(h) / wv).reshape(shape)).ravel()

    def At(h):
        return T.apply_adjoint((np.ravel(h) * wv).reshape(shape)).ravel() / wv

    if p == 2 and q == 2:
        dense = None
        if T.is_dense or size <= MAX_DENSE_2D_POINTS**2 // 4:
            dense = wv[:, None] * T.dense() / wv[None, :]
        return spectral_norm(A, At, size, dense)
    scale = size ** (1.0 / p - 1.0 / q)
    pc = p / (p - 1.0)
    rng = np.random.default_rng(seed)
    best, total_it = 0.0, 0
    for trial in range(starts + 1):
        x = np.ones(size) if trial == 0 else rng.standard_normal(size)
        x /= np.linalg.norm(x, p)
        val = 0.0
        for it in range(max_iter):
            total_it += 1
            y = A(x)
            new_val = np.linalg.norm(y, q)
            z = At(_dual(y, q))
            if not np.any(z):
                break
            x_new = _dual(z, pc)
            x_new /= np.linalg.norm(x_new, p)
            if abs(new_val - val) <= 1e-12 * max(new_val, 1e-300):
                val = new_val
                break
            val, x = new_val, x_new
        best = max(best, val)
    return WeightedNormEstimate(float(best * scale), "random_probe_lower_bound", total_it, math.nan)


def bilinear_weighted_norm(
    T: BilinearKernelOp,
    w1,
    w2,
    p1: float,
    p2: float,
    b=None,
    alpha=(0, 0),
    starts: int = 6,
    rounds: int = 6,
    inner: int = 4,
    seed: int = 0,
) -> WeightedNormEstimate:
    """Lower bound for ``||T||`` (or its commutator) from ``L^{p1}(w1) x L^{p2}(w2)`` to ``L^p(nu_w)``.

    Alternates nonlinear power steps in each slot with the other slot frozen;
    every step is an ascent step, so the best value over the seeded starts is
    a certified lower bound.  Measures carry the cell weight ``1/N``.
    """
    if not (1 < p1 < math.inf and 1 < p2 < math.inf):
        raise OperatorError("bilinear norms need 1 < p_j < inf")
    p = 1.0 / (1.0 / p1 + 1.0 / p2)
    n = T.grid.n_points
    w1v = np.ones(n) if w1 is None else np.asarray(w1.values, dtype=float)
    w2v = np.ones(n) if w2 is None else np.asarray(w2.values, dtype=float)
    nu_root = (w1v ** (p / p1) * w2v ** (p / p2)) ** (1.0 / p)
    s1, s2 = w1v ** (-1.0 / p1), w2v ** (-1.0 / p2)
    b1, b2 = (None, None) if b is None else (np.asarray(_values(b[0]), float), np.asarray(_values(b[1]), float))
    a1, a2 = (int(a) for a in alpha)
    mod = dict(b1=b1, b2=b2, a1=a1, a2=a2)
    pc = (p1 / (p1 - 1.0), p2 / (p2 - 1.0))
    scales, exps = (s1, s2), (p1, p2)

    def value(x1, x2):
        y = nu_root * T.apply_modified(x1 * s1, x2 * s2, **mod)
        return np.linalg.norm(y, p) if p >= 1 else np.sum(np.abs(y) ** p) ** (1 / p), y

    rng = np.random.default_rng(seed)
    best, steps = 0.0, 0
    for trial in range(starts):
        xs = [np.ones(n), np.ones(n)] if trial == 0 else [rng.standard_normal(n), rng.standard_normal(n)]
        xs = [x / np.linalg.norm(x, r) for x, r in zip(xs, exps)]
        val, y = value(*xs)
        for _ in range(rounds):
            prev = val
            for slot in (0, 1):
                for _ in range(inner):
                    steps += 1
                    z = nu_root * _dual(y, p)
                    other = xs[1 - slot] * scales[1 - slot]
                    grad = scales[slot] * T.apply_adjoint(slot, z, other, **mod)
                    if not np.any(grad):
                        break
                    x_new = _dual(grad, pc[slot])
                    xs[slot] = x_new / np.linalg.norm(x_new, exps[slot])
                    val, y = value(*xs)
            if val <= prev * (1 + 1e-10):
                break
        best = max(best, val)
    return WeightedNormEstimate(float(best), "random_probe_lower_bound", steps, math.nan)


def operator_norm(T: LinearKernelOp) -> float:
    """Unweighted ``L^2`` operator norm."""
    return weighted_norm(T, None, 2, 2).value


def dump_kernel_csv(T: LinearKernelOp, path: str | Path) -> None:
    """Write the dense kernel one row per line."""
    mat = T.dense()
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row in mat:
            writer.writerow([repr(float(v)) for v in row])


# --- registry ---------------------------------------------------------------

LINEAR_OPERATORS = ("hilbert", "riesz", "double_hilbert")
BILINEAR_OPERATORS = ("bht", "bi_s", "bilinear_cz")


def make_operator(name: str, grid: Grid, alpha: float = 0.5, s: float = 1.0):
    """Build an operator by name."""
    if name == "hilbert":
        return hilbert_op(grid)
    if name == "riesz":
        return riesz_op(grid, alpha)
    if name == "double_hilbert":
        return double_hilbert_op(grid)
    if name == "bht":
        return bht_op(grid)
    if name == "bi_s":
        return bi_s_op(grid, s)
    if name == "bilinear_cz":
        return bilinear_cz_op(grid)
    raise OperatorError(f"unknown operator {name!r}; choose from {LINEAR_OPERATORS + BILINEAR_OPERATORS}")
