"""Shared fixtures and brute-force oracles.

The oracles loop over explicit cubes with plain ``np.mean`` and solve exp-L
equations with ``scipy.optimize.brentq``; none of them touch prefix tables,
log-domain products or the package's Newton solver.
"""

import math

import numpy as np
import pytest
from scipy.optimize import brentq

from weightlab.grid import CubeFamily, Family, Grid


def cubes_1d(n):
    for length in range(1, n + 1):
        for start in range(n - length + 1):
            yield slice(start, start + length)


def naive_ap(w, p):
    w = np.asarray(w, float)
    pc = p / (p - 1)
    return max(np.mean(w[s]) * np.mean(w[s] ** (1 - pc)) ** (p - 1) for s in cubes_1d(len(w)))


def naive_rh(w, q):
    w = np.asarray(w, float)
    if q == math.inf:
        return max(np.max(w[s]) / np.mean(w[s]) for s in cubes_1d(len(w)))
    return max(np.mean(w[s] ** q) ** (1 / q) / np.mean(w[s]) for s in cubes_1d(len(w)))


def naive_vector(ws, ps):
    p = 1 / sum(1 / pj for pj in ps)
    nu = np.prod([np.asarray(w, float) ** (p / pj) for w, pj in zip(ws, ps)], axis=0)
    best = 0.0
    for s in cubes_1d(len(nu)):
        val = np.mean(nu[s]) ** (1 / p)
        for w, pj in zip(ws, ps):
            pc = pj / (pj - 1)
            val *= np.mean(np.asarray(w, float)[s] ** (1 - pc)) ** (1 / pc)
        best = max(best, val)
    return best


def naive_expl(h):
    """``inf{lam : mean(exp(|h| / lam)) <= 2}`` by bracketing root search."""
    a = np.abs(np.asarray(h, float))
    if a.max() == 0:
        return 0.0
    top = a.max()
    a = a / top
    lam = brentq(lambda lam: np.mean(np.exp(a / lam)) - 2.0, 1 / 50.0, 1.0001 / math.log(2), xtol=1e-15, rtol=1e-14)
    return top * lam


def naive_script_bmo(b):
    b = np.asarray(b, float)
    return max(naive_expl(b[s] - b[s].mean()) for s in cubes_1d(len(b)))


def naive_bmo(b):
    b = np.asarray(b, float)
    return max(np.mean(np.abs(b[s] - b[s].mean())) for s in cubes_1d(len(b)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def grid2():
    return Grid(1, 2)


@pytest.fixture
def fam2(grid2):
    return CubeFamily(Family.ALL_INTERVALS, grid2)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, passed: bool, summary: str) -> None:
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {summary}"
    ACCEPTANCE_LINES[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
