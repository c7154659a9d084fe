"""Iterated and multilinear commutators, computed two independent ways.

Direct route: the kernel is multiplied by ``(b(y) - b(x))^k`` (linear) or by
``prod_j (b_j(x) - b_j(y_j))^{alpha_j}`` (multilinear).

Contour route: the conjugated family ``Psi(z) = e^{-z b} T(e^{z b} .)`` is
entire in ``z`` with Taylor coefficients ``T_b^k / k!``, so the commutator is a
Cauchy integral over ``|z| = delta``.  The trapezoid rule with ``M`` nodes is
exact up to aliasing: its error is ``k! sum_{l >= 1} a_{k + lM} delta^{lM}``
where ``a_n`` are the Taylor coefficients.

In the multilinear family the exponentials enter as ``e^{z_j (b_j(y_j) - b_j(x))}``,
so ``D^alpha Psi(0) = (-1)^{|alpha|} [T, b]_alpha`` and the contour result is
multiplied by that sign.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .grid import GridError, GridFn
from .operators import BilinearKernelOp, LinearKernelOp
from .weights import ExponentProfile, WeightRangeError, conjugate

PSI_GUARD = 50.0
IMAG_WARN = 1e-6


class ContourWarning(RuntimeWarning):
    """Large imaginary residue in a contour evaluation."""


@dataclass(frozen=True)
class ContourSpec:
    """Radius (or per-slot radii) and node count of the trapezoid contour."""

    delta: float | tuple[float, ...]
    m_nodes: int = 64

    def __post_init__(self):
        deltas = self.deltas
        if not all(d > 0 and math.isfinite(d) for d in deltas):
            raise ValueError("contour radii must be positive and finite")
        if self.m_nodes < 8 or self.m_nodes % 2:
            raise ValueError("m_nodes must be even and at least 8")

    @property
    def deltas(self) -> tuple[float, ...]:
        if isinstance(self.delta, (tuple, list)):
            return tuple(float(d) for d in self.delta)
        return (float(self.delta),)

    def angles(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.m_nodes) / self.m_nodes

    def to_dict(self) -> dict:
        return {"delta": list(self.deltas) if len(self.deltas) > 1 else self.deltas[0], "m_nodes": self.m_nodes}


@dataclass(frozen=True)
class ContourResult:
    value: GridFn
    imag_residue: float
    spec: ContourSpec

    def to_dict(self) -> dict:
        return {"imag_residue": self.imag_residue, **self.spec.to_dict()}


def _vals(f) -> np.ndarray:
    return np.asarray(f.values if isinstance(f, GridFn) else f)


def _centered(b) -> np.ndarray:
    v = _vals(b).astype(float)
    return v - 0.5 * (v.max() + v.min())


def _out(T, values) -> GridFn:
    values = np.asarray(values)
    if np.iscomplexobj(values) and not np.any(values.imag):
        values = values.real
    return GridFn(T.grid, values)


# --- direct route -----------------------------------------------------------


def commutator_matrix(T: LinearKernelOp, b, k: int) -> np.ndarray:
    """Dense kernel ``K[i, j] (b_j - b_i)^k``."""
    if k < 0:
        raise ValueError("commutator order must be nonnegative")
    K = T.dense()
    if k == 0:
        return K.copy()
    bv = _vals(b).ravel()
    return K * np.subtract.outer(bv, bv).T ** k


def commutator_direct(T: LinearKernelOp, b, k: int, f) -> GridFn:
    """``T_b^k f(x) = T((b(.) - b(x))^k f)(x)``."""
    if k < 0:
        raise ValueError("commutator order must be nonnegative")
    fv = _vals(f)
    if k == 0:
        return _out(T, T.apply(fv))
    if T.is_dense:
        return _out(T, (commutator_matrix(T, b, k) @ fv.ravel()).reshape(T.grid.shape))
    # factored operators: binomial expansion around a centered symbol
    bc = _centered(b)
    total = np.zeros(T.grid.shape, dtype=np.result_type(fv, float))
    for i in range(k + 1):
        total = total + math.comb(k, i) * (-bc) ** (k - i) * T.apply(bc**i * fv)
    return _out(T, total)


def commutator_recursive(T: LinearKernelOp, b, k: int, f) -> GridFn:
    """``T_b^k = [T_b^{k-1}, b]`` unrolled by composition with multiplication by ``b``."""
    bv = _vals(b)

    def apply(order, g):
        if order == 0:
            return T.apply(g)
        return apply(order - 1, bv * g) - bv * apply(order - 1, g)

    return _out(T, apply(k, _vals(f)))


def commutator_multilinear_direct(T: BilinearKernelOp, b: Sequence, alpha: Sequence[int], f, g) -> GridFn:
    """Bilinear kernel times ``prod_j (b_j(x) - b_j(y_j))^{alpha_j}``."""
    a1, a2 = (int(a) for a in alpha)
    if a1 < 0 or a2 < 0:
        raise ValueError("multi-index entries must be nonnegative")
    b1, b2 = (_vals(bj) for bj in b)
    return _out(T, T.apply_modified(_vals(f), _vals(g), b1, b2, a1, a2))


# --- conjugated family ------------------------------------------------------


def _guard(z, bc):
    span = abs(complex(z).real) * float(np.max(np.abs(bc))) if bc.size else 0.0
    if span > PSI_GUARD:
        raise WeightRangeError(f"|Re z| * max|b - c| = {span:.4g} exceeds the guard {PSI_GUARD}")


def psi_conjugate(T, b, z, f, g=None) -> GridFn:
    """``Psi(z) f = e^{-z b} T(e^{z b} f)``; bilinear form takes ``b, z`` as pairs.

    Symbols are centered first; ``Psi`` does not change under ``b -> b + c``.
    """
    if isinstance(T, BilinearKernelOp):
        if g is None:
            raise ValueError("bilinear conjugation needs two inputs")
        return _out(T, _psi_bilinear(T, [_centered(bj) for bj in b], z, _vals(f), _vals(g)))
    bc = _centered(b)
    _guard(z, bc)
    e = np.exp(z * bc)
    return _out(T, T.apply(e * _vals(f)) / e)


def _psi_bilinear(T, bcs, zs, f, g):
    for z, bc in zip(zs, bcs):
        _guard(z, bc)
    e1, e2 = np.exp(zs[0] * bcs[0]), np.exp(zs[1] * bcs[1])
    return T.apply(e1 * f, e2 * g) / (e1 * e2)


# --- contour route ----------------------------------------------------------


def _finish(T, total, spec, sample_scale: float) -> ContourResult:
    # sample_scale bounds the quadrature terms; a residue at rounding level
    # relative to it is noise even when the true output is zero.
    real, imag = total.real, total.imag
    scale = float(np.max(np.abs(real))) if real.size else 0.0
    resid = float(np.max(np.abs(imag))) if imag.size else 0.0
    if resid > IMAG_WARN * max(scale, 1e-6 * sample_scale, np.finfo(float).tiny):
        warnings.warn(f"contour imaginary residue {resid:.3g} vs output {scale:.3g}", ContourWarning, stacklevel=3)
    return ContourResult(GridFn(T.grid, real), resid, spec)


def commutator_contour(T: LinearKernelOp, b, k: int, f, spec: ContourSpec) -> ContourResult:
    """``(k! / (M delta^k)) sum_m e^{-i k theta_m} Psi(delta e^{i theta_m}) f``."""
    if k < 0:
        raise ValueError("commutator order must be nonnegative")
    (delta,) = spec.deltas[:1]
    bc = _centered(b)
    _guard(delta, bc)
    theta = spec.angles()
    fv = _vals(f).astype(complex)
    total = np.zeros(T.grid.shape, dtype=complex)
    peak = 0.0
    # fixed node order keeps the reduction reproducible
    for th in theta:
        z = delta * np.exp(1j * th)
        e = np.exp(z * bc)
        term = T.apply(e * fv) / e
        peak = max(peak, float(np.max(np.abs(term))))
        total += np.exp(-1j * k * th) * term
    factor = math.factorial(k) / (spec.m_nodes * delta**k)
    total *= factor
    return _finish(T, total, spec, peak * factor * spec.m_nodes)


def commutator_contour_multi(T: BilinearKernelOp, b: Sequence, alpha: Sequence[int], f, g, spec: ContourSpec) -> ContourResult:
    """Trapezoid rule on the distinguished boundary of the polydisc.

    ``(-1)^{|alpha|} alpha! / (M^2 delta^alpha) sum e^{-i alpha . theta} Psi(z) (f, g)``.
    """
    a1, a2 = (int(a) for a in alpha)
    deltas = spec.deltas if len(spec.deltas) == 2 else spec.deltas * 2
    bcs = [_centered(bj) for bj in b]
    for d, bc in zip(deltas, bcs):
        _guard(d, bc)
    theta = spec.angles()
    fv, gv = _vals(f).astype(complex), _vals(g).astype(complex)
    total = np.zeros(T.grid.shape, dtype=complex)
    peak = 0.0
    e2_all = [np.exp(deltas[1] * np.exp(1j * t2) * bcs[1]) for t2 in theta]
    for t1 in theta:
        e1 = np.exp(deltas[0] * np.exp(1j * t1) * bcs[0])
        u = e1 * fv
        for t2, e2 in zip(theta, e2_all):
            term = T.apply(u, e2 * gv) / (e1 * e2)
            peak = max(peak, float(np.max(np.abs(term))))
            total += np.exp(-1j * (a1 * t1 + a2 * t2)) * term
    sign = -1.0 if (a1 + a2) % 2 else 1.0
    factor = math.factorial(a1) * math.factorial(a2) / (spec.m_nodes**2 * deltas[0] ** a1 * deltas[1] ** a2)
    total *= sign * factor
    return _finish(T, total, ContourSpec(tuple(deltas), spec.m_nodes), peak * factor * spec.m_nodes**2)


# --- radii and series -------------------------------------------------------


def default_delta(profile: ExponentProfile, b_norm, w_constant: float | None = None):
    """Contour radius from the exponents, scaled by ``1 / ||b||``.

    Linear profiles give ``min{1, s - 1} / (theta eta')``.  Profiles with
    ``p_list`` give one radius per slot, ``min{1, p_j - 1} / (p_j r')`` with
    ``r' = [w]_{A_P}^{max{p, p_1', ..., p_m'}}``.
    """
    if profile.p_list:
        if w_constant is None or not w_constant >= 1:
            raise ValueError("multilinear radii need the vector weight constant ([w] >= 1)")
        p = profile.multilinear_p
        r_conj = w_constant ** max([p] + [conjugate(pj) for pj in profile.p_list])
        norms = list(b_norm) if isinstance(b_norm, (tuple, list)) else [b_norm] * profile.m
        if any(not bn > 0 for bn in norms):
            raise ValueError("symbol norms must be positive")
        return tuple(min(1.0, pj - 1.0) / (pj * r_conj) / bn for pj, bn in zip(profile.p_list, norms))
    if profile.s is None:
        raise ValueError("linear radius needs s")
    if not b_norm > 0:
        raise ValueError("symbol norm must be positive")
    return min(1.0, profile.s - 1.0) / (profile.theta * profile.eta_conj) / b_norm


def taylor_reconstruct(T: LinearKernelOp, b, f, z: complex, k_max: int) -> GridFn:
    """Partial sum ``sum_{k <= K} z^k T_b^k f / k!`` of the series of ``Psi(z) f``."""
    if k_max < 0:
        raise ValueError("k_max must be nonnegative")
    bc = _centered(b)
    _guard(z, bc)
    fv = _vals(f)
    total = np.zeros(T.grid.shape, dtype=complex)
    for k in range(k_max + 1):
        total += z**k / math.factorial(k) * _vals(commutator_direct(T, bc, k, fv))
    return _out(T, total)


def contour_error_slope(
    T: LinearKernelOp,
    b,
    k: int,
    f,
    delta0: float,
    m_nodes: int = 64,
    halvings: int = 2,
) -> tuple[float, np.ndarray, np.ndarray]:
    """Log-log slope of the contour-vs-direct error over ``delta0 / 2^j``.

    Returns ``(slope, deltas, errors)``; the aliasing formula predicts slope ``M``.
    """
    exact = _vals(commutator_direct(T, b, k, f))
    deltas = delta0 / 2.0 ** np.arange(halvings + 1)
    errors = []
    for d in deltas:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ContourWarning)
            approx = commutator_contour(T, b, k, f, ContourSpec(float(d), m_nodes)).value.values
        errors.append(float(np.linalg.norm(approx - exact)))
    errors = np.array(errors)
    slope = float(np.polyfit(np.log(deltas), np.log(errors), 1)[0])
    return slope, deltas, errors
