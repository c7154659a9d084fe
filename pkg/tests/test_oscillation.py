import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from conftest import naive_bmo, naive_expl, naive_script_bmo
from weightlab.grid import Cube, CubeFamily, Family, Grid, GridError, GridFn
from weightlab.oscillation import (
    BmoFn,
    bmo_norm,
    dyadic_martingale,
    expl_norm,
    expl_norm_bisect,
    expl_norms_all,
    generate_bmo,
    little_bmo_norm,
    log_singularity,
    script_bmo_norm,
    slice_bmo_norms,
    two_value,
)

LN2 = math.log(2.0)
reals = arrays(np.float64, 16, elements=st.floats(-50, 50))


def _fam(n, variant=Family.ALL_INTERVALS, dim=1):
    return CubeFamily(variant, Grid(dim, n))


def test_bmo_examples(fam2, grid2):
    assert bmo_norm(BmoFn(grid2, [3.0, 3.0]), fam2).value == 0.0
    for a in (1.0, 3.0, 10.0):
        assert bmo_norm(two_value(grid2, a), fam2).value == pytest.approx(a / 2)
    assert bmo_norm(two_value(grid2, 3.0), fam2).argmax == Cube.interval(0, 2)


@settings(max_examples=30, deadline=None)
@given(reals, st.floats(-1e3, 1e3))
def test_bmo_matches_bruteforce_and_ignores_constants(vals, c):
    fam = _fam(16)
    f = BmoFn(fam.grid, vals)
    ref = naive_bmo(vals)
    assert bmo_norm(f, fam).value == pytest.approx(ref, rel=1e-12, abs=1e-12)
    assert bmo_norm(f.shifted(c), fam).value == pytest.approx(ref, rel=1e-9, abs=1e-9)


def test_expl_closed_forms():
    g = Grid(1, 8)
    q = Cube.interval(0, 8)
    assert expl_norm(GridFn(g, np.zeros(8)), q).lambda_star == 0.0
    for c in (0.1, 1.0, 7.0):
        assert expl_norm(GridFn(g, np.full(8, -c)), q).lambda_star == pytest.approx(c / LN2, rel=1e-13)
    # (0, 2 ln 2) minus its mean is +-ln 2
    g2 = Grid(1, 2)
    h = GridFn(g2, np.array([-LN2, LN2]))
    assert expl_norm(h, Cube.interval(0, 2)).lambda_star == pytest.approx(1.0, rel=1e-13)
    assert expl_norm_bisect(h.values) == pytest.approx(1.0, rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(arrays(np.float64, st.integers(2, 40), elements=st.floats(-30, 30)))
def test_expl_newton_matches_root_finding_oracle(vals):
    g_vals = np.abs(vals)
    if g_vals.max() == 0:
        return
    n = 1 << max(1, math.ceil(math.log2(len(vals))))
    padded = np.zeros(n)
    padded[: len(vals)] = vals
    res = expl_norm(GridFn(Grid(1, n), padded), Cube.interval(0, len(vals)))
    assert res.lambda_star == pytest.approx(naive_expl(vals), rel=1e-11)
    assert res.lambda_star == pytest.approx(expl_norm_bisect(vals), rel=1e-11)
    assert res.residual < 1e-10


def test_expl_solver_converges_on_hard_rows(rng):
    # one huge spike among zeros pushes the root toward the bracket edge
    for n in (2, 64, 4096):
        v = np.zeros(n)
        v[0] = 100.0
        lam = expl_norm(GridFn(Grid(1, n), v), Cube.interval(0, n))
        assert lam.lambda_star == pytest.approx(naive_expl(v), rel=1e-11)
        assert lam.iterations < 60


def test_expl_rejects_bad_tolerance():
    with pytest.raises(ValueError):
        expl_norm(GridFn(Grid(1, 2), [0.0, 1.0]), Cube.interval(0, 2), tol=0)


def test_script_bmo_examples(fam2, grid2):
    assert script_bmo_norm(BmoFn(grid2, [5.0, 5.0]), fam2).value == 0.0
    f = two_value(grid2, 2 * LN2)
    assert script_bmo_norm(f, fam2).value == pytest.approx(1.0, rel=1e-13)
    # two-value closed form: |f - f_Q| = a/2 on the whole interval
    for a in (0.5, 3.0):
        assert script_bmo_norm(two_value(grid2, a), fam2).value == pytest.approx(a / 2 / LN2, rel=1e-13)


@settings(max_examples=20, deadline=None)
@given(reals)
def test_script_bmo_matches_bruteforce(vals):
    fam = _fam(16)
    f = BmoFn(fam.grid, vals)
    assert script_bmo_norm(f, fam).value == pytest.approx(naive_script_bmo(vals), rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("kind", ["log_singularity", "dyadic_martingale", "two_value", "noise"])
def test_pruned_supremum_equals_full_scan(kind, rng):
    g = Grid(1, 256)
    fam = CubeFamily(Family.ALL_INTERVALS, g)
    if kind == "log_singularity":
        b = log_singularity(g, 0.37)
    elif kind == "dyadic_martingale":
        b = dyadic_martingale(g, 11, 6, 0.7)
    elif kind == "two_value":
        b = two_value(g, 2.5)
    else:
        b = BmoFn(g, rng.standard_normal(256))
    full = expl_norms_all(b, fam)
    assert script_bmo_norm(b, fam).value == pytest.approx(full.max(), rel=1e-13)


@settings(max_examples=20, deadline=None)
@given(reals)
def test_bmo_is_dominated_by_script_bmo(vals):
    for variant in (Family.ALL_INTERVALS, Family.DYADIC_INTERVALS):
        fam = _fam(16, variant)
        f = BmoFn(fam.grid, vals)
        assert bmo_norm(f, fam).value <= script_bmo_norm(f, fam).value * (1 + 1e-12) + 1e-15


def test_little_bmo_of_separable_function_equals_1d_dyadic_bmo(rng):
    g = rng.standard_normal(16)
    f = BmoFn(Grid(2, 16), np.repeat(g[:, None], 16, axis=1))
    one_d = bmo_norm(BmoFn(Grid(1, 16), g), _fam(16, Family.DYADIC_INTERVALS)).value
    assert little_bmo_norm(f).value == pytest.approx(one_d, rel=1e-12)
    # slices along y are constant
    assert np.all(slice_bmo_norms(f, axis=1) == 0)
    assert slice_bmo_norms(f, axis=0)[3] == pytest.approx(one_d, rel=1e-12)


def test_little_bmo_examples_and_inclusion(rng):
    g = Grid(2, 16)
    assert little_bmo_norm(BmoFn(g, np.full((16, 16), 2.0))).value == 0.0
    fam = CubeFamily(Family.DYADIC_RECTANGLES, g)
    for seed in range(3):
        f = dyadic_martingale(g, seed, 3)
        assert little_bmo_norm(f).value <= script_bmo_norm(f, fam).value * (1 + 1e-12)
    with pytest.raises(GridError):
        little_bmo_norm(BmoFn(Grid(1, 4), [0, 1, 2, 3]))


def test_generators(grid2):
    g = Grid(1, 64)
    assert np.all(two_value(g, 0.0).values == 0)
    assert np.ptp(dyadic_martingale(g, 3, 0).values) == 0
    a, b = dyadic_martingale(g, 5, 4), dyadic_martingale(g, 5, 4)
    assert a.values.tobytes() == b.values.tobytes()
    assert a.values.tobytes() != dyadic_martingale(g, 6, 4).values.tobytes()
    ls = log_singularity(g)
    assert np.isfinite(ls.values).all() and ls.values.min() == pytest.approx(math.log(0.5 / 64))
    assert generate_bmo("two_value", g, a=2.0).values.max() == 2.0
    with pytest.raises(ValueError):
        generate_bmo("nope", g)
    with pytest.raises(GridError):
        BmoFn(g, np.ones(64) * 1j)


def test_log_singularity_bmo_stays_bounded_as_n_grows():
    norms, sups = [], []
    for n in (256, 512, 1024, 2048, 4096):
        g = Grid(1, n)
        b = log_singularity(g)
        norms.append(bmo_norm(b, CubeFamily(Family.DYADIC_INTERVALS, g)).value)
        sups.append(np.abs(b.values).max())
    assert max(norms) / min(norms) < 1.1
    assert sups[-1] - sups[0] > 2.7  # max|b| grows like log N
