"""Acceptance criteria 1-8 at their stated sizes and tolerances.

Each test records a PASS/FAIL line that is repeated in the terminal summary.
The full-size suites are shared through module fixtures; the determinism test
re-runs them from scratch.
"""

import math
import time

import numpy as np
import pytest

from conftest import record_criterion
from weightlab.commutators import ContourSpec, commutator_contour, commutator_direct, contour_error_slope, default_delta
from weightlab.grid import CubeFamily, Family, Grid, GridFn
from weightlab.operators import bht, hilbert_op, riesz_op
from weightlab.oscillation import script_bmo_norm
from weightlab.verify import SymbolCorpus, WeightCorpus, run_suite
from weightlab.weights import ExponentProfile, ap_constant, apq_constant, power

SEED = 0


def _naive_bht(f, g):
    n = len(f)
    out = np.zeros(n)
    for i in range(n):
        for t in range(1, n // 2):
            out[i] += (f[(i - t) % n] * g[(i + t) % n] - f[(i + t) % n] * g[(i - t) % n]) / t
    return out


@pytest.fixture(scope="module")
def exact_full():
    t0 = time.perf_counter()
    report = run_suite("exact", SEED, "full")
    return report, time.perf_counter() - t0


@pytest.fixture(scope="module")
def empirical_full():
    return run_suite("empirical", SEED, "full")


def _check(report, check_id):
    (c,) = [c for c in report.checks if c.check_id == check_id]
    return c


def test_criterion_1_exact_suite_zero_violations(exact_full):
    report, elapsed = exact_full
    cfg = report.config
    sizes_ok = (cfg["weights"], cfg["symbols"], cfg["n_1d"], cfg["n_2d"]) == (200, 50, 512, 64)
    per_check = {c.check_id: c.violations for c in report.checks}
    ok = sizes_ok and report.exact_violations == 0 and all(c.instances_run > 0 for c in report.checks) and elapsed <= 300
    record_criterion(1, ok, f"violations={report.exact_violations} checks={len(per_check)} runtime={elapsed:.0f}s")
    assert sizes_ok
    assert per_check == {k: 0 for k in per_check}
    assert all(c.instances_run > 0 for c in report.checks)
    assert elapsed <= 300


def test_criterion_2_contour_fidelity():
    g = Grid(1, 128)
    fam = CubeFamily(Family.ALL_INTERVALS, g)
    symbols = list(SymbolCorpus(g, 20, SEED))
    rng = np.random.default_rng(SEED)
    inputs = [rng.standard_normal(128) for _ in symbols]
    prof = ExponentProfile(p=2.0, q=2.0, s=2.0, theta=1.0, eta=2.0)
    worst, slopes = 0.0, []
    for T in (hilbert_op(g), riesz_op(g, 0.5)):
        for k in (1, 2, 3):
            for b, f in zip(symbols, inputs):
                delta = default_delta(prof, script_bmo_norm(b, fam).value)
                exact = commutator_direct(T, b, k, f).values
                approx = commutator_contour(T, b, k, f, ContourSpec(delta, 64)).value.values
                worst = max(worst, np.abs(approx - exact).max() / np.abs(exact).max())
            # slope test radius: large enough that quadrature error sits above rounding
            for b, f in list(zip(symbols, inputs))[:3]:
                spread = np.abs(b.values - 0.5 * (b.values.max() + b.values.min())).max()
                slope, _, _ = contour_error_slope(T, b, k, f, 40.0 / spread, m_nodes=64)
                slopes.append(slope)
    ok = worst <= 1e-8 and min(slopes) >= 64 * 0.9
    record_criterion(2, ok, f"max_rel_err={worst:.2e} min_slope={min(slopes):.2f} (need >= 57.6)")
    assert worst <= 1e-8
    assert min(slopes) >= 64 * 0.9


def test_criterion_3_perez_reverse_holder(empirical_full):
    c = _check(empirical_full, "perez_reverse_holder")
    cfg = empirical_full.config
    deficit = c.details["max_deficit"]
    ok = cfg["perez_n"] == 1024 and c.instances_run == 100 and deficit <= 1e-9 and c.passed
    record_criterion(3, ok, f"weights={c.instances_run} violations={c.violations} max_ratio={c.max_ratio:.4f} max_deficit={deficit:.1e}")
    assert cfg["perez_n"] == 1024 and c.instances_run == 100
    assert deficit <= 1e-9 and c.passed


def test_criterion_4_crw_domination(empirical_full):
    c = _check(empirical_full, "crw_quantitative")
    d = c.details
    lo, hi = d["a2_range"]
    dom = {k: v <= 1 + 1e-12 for k, v in d["max_ratio_by_k"].items()}
    growth = {k: d["growth_exponent"][k] <= int(k) + 1 + 0.25 for k in ("1", "2")}
    ok = lo == pytest.approx(1.0) and hi == pytest.approx(100.0) and all(dom.values()) and all(growth.values())
    record_criterion(
        4,
        ok,
        "growth_exponent k=1: {:.3f} (<= 2.25), k=2: {:.3f} (<= 3.25); fitted-C domination max ratio {}".format(
            d["growth_exponent"]["1"], d["growth_exponent"]["2"], max(d["max_ratio_by_k"].values())
        ),
    )
    assert lo == pytest.approx(1.0) and hi == pytest.approx(100.0)
    assert all(dom.values())
    assert all(growth.values())


def test_criterion_5_fractional_identity():
    g = Grid(1, 512)
    fam = CubeFamily(Family.ALL_INTERVALS, g)
    prof = ExponentProfile.fractional(0.25, 2.0, 1)
    worst = 0.0
    for w in WeightCorpus(g, 200, SEED):
        a = apq_constant(w, prof.p, prof.q, fam).value
        b = ap_constant(power(w, prof.q), prof.s, fam).value
        worst = max(worst, abs(a - b) / max(a, b))
    ok = worst <= 1e-10
    record_criterion(5, ok, f"q={prof.q} s={prof.s} max_rel_gap={worst:.2e} over 200 weights")
    assert worst <= 1e-10


def test_criterion_6_converse_bridge(empirical_full):
    c = _check(empirical_full, "converse_linear")
    d = c.details
    b_rows = [r for r in c.records if r["direction"] == "b"]
    lams = sorted({round(abs(r["lambda"]), 12) for r in b_rows})
    symbols = {r["symbol"] for r in b_rows}
    ok = d["violations_by_direction"]["b"] == 0 and lams == [0.0, 0.1, 0.2, 0.3, 0.4] and len(symbols) == 20
    record_criterion(6, ok, f"direction (b) violations={d['violations_by_direction']['b']} symbols={len(symbols)} max_ratio={d['max_ratio_by_direction']['b']:.4f}")
    assert (d["lambda0"], d["k_max"]) == (0.5, 8)
    assert lams == [0.0, 0.1, 0.2, 0.3, 0.4] and len(symbols) == 20
    assert d["violations_by_direction"]["b"] == 0


def test_criterion_7_bht_pipeline(empirical_full):
    rng = np.random.default_rng(SEED)
    g = Grid(1, 64)
    f, h = rng.standard_normal(64), rng.standard_normal(64)
    err = np.abs(bht(GridFn(g, f), GridFn(g, h)).values - _naive_bht(f, h)).max()
    one = GridFn(g, np.ones(64))
    zero = bool(np.all(bht(one, one).values == 0))
    c = _check(empirical_full, "multilinear_bht")
    by_size = c.details["max_ratio_by_size"]
    finite = all(math.isfinite(v) and v > 0 for v in by_size.values())
    variation = c.details["max_consecutive_variation"]
    ok = err <= 1e-12 and zero and finite and set(by_size) == {"64", "128", "256"} and variation <= 2
    record_criterion(7, ok, f"oracle_err={err:.1e} bht(1,1)==0: {zero} ratios={ {k: round(v, 4) for k, v in by_size.items()} } variation={variation:.3f}")
    assert err <= 1e-12 and zero
    assert set(by_size) == {"64", "128", "256"} and finite
    assert variation <= 2


def test_criterion_8_determinism(exact_full, empirical_full):
    same_exact = run_suite("exact", SEED, "full").to_json() == exact_full[0].to_json()
    same_emp = run_suite("empirical", SEED, "full").to_json() == empirical_full.to_json()
    record_criterion(8, same_exact and same_emp, f"exact bit-identical={same_exact} empirical bit-identical={same_emp}")
    assert same_exact and same_emp
