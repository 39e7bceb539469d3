"""Solver unit tests: known optima, statuses, certificates, determinism,
and randomized cross-checks against an independent LP solver."""

import numpy as np
import pytest
from scipy.optimize import linprog

from mechlab.simplex import (
    INFEASIBLE,
    OPTIMAL,
    UNBOUNDED,
    SimplexResult,
    solve_simplex,
)

GAP_TOL = 1e-7
FEAS_TOL = 1e-9


def test_textbook_max():
    # max 3x + 2y s.t. x + y <= 4, x + 3y <= 6, 0 <= x,y <= 10
    res = solve_simplex(
        c=[3.0, 2.0],
        A=[[1.0, 1.0], [1.0, 3.0]],
        b=[4.0, 6.0],
        senses=["<=", "<="],
        lower=[0.0, 0.0],
        upper=[10.0, 10.0],
        maximize=True,
    )
    assert res.status == OPTIMAL
    assert res.objective == pytest.approx(12.0, abs=1e-9)
    assert np.allclose(res.x, [4.0, 0.0], atol=1e-9)
    assert res.duality_gap <= GAP_TOL
    assert res.max_infeasibility <= FEAS_TOL


def test_equality_row_and_duals():
    # min x + 2y s.t. x + y = 1, x - y <= 0.2, x,y in [0,1]
    res = solve_simplex(
        c=[1.0, 2.0],
        A=[[1.0, 1.0], [1.0, -1.0]],
        b=[1.0, 0.2],
        senses=["=", "<="],
        lower=[0.0, 0.0],
        upper=[1.0, 1.0],
        maximize=False,
    )
    assert res.status == OPTIMAL
    assert res.objective == pytest.approx(1.4, abs=1e-9)
    assert np.allclose(res.x, [0.6, 0.4], atol=1e-9)
    assert res.duality_gap <= GAP_TOL


def test_upper_bounds_active():
    # max x + y with x + y <= 3, x <= 1 (bound), y <= 1 (bound): hits the box
    res = solve_simplex(
        c=[1.0, 1.0],
        A=[[1.0, 1.0]],
        b=[3.0],
        senses=["<="],
        lower=[0.0, 0.0],
        upper=[1.0, 1.0],
        maximize=True,
    )
    assert res.objective == pytest.approx(2.0, abs=1e-12)
    assert np.allclose(res.x, [1.0, 1.0])


def test_infeasible():
    res = solve_simplex(
        c=[1.0],
        A=[[1.0], [1.0]],
        b=[2.0, -1.0],
        senses=[">=", "<="],
        lower=[0.0],
        upper=[5.0],
        maximize=True,
    )
    assert res.status == INFEASIBLE
    assert res.x is None


def test_unbounded():
    res = solve_simplex(
        c=[1.0],
        A=[[-1.0]],
        b=[0.0],
        senses=["<="],
        lower=[0.0],
        upper=[np.inf],
        maximize=True,
    )
    assert res.status == UNBOUNDED


def test_no_rows_boxed():
    res = solve_simplex(
        c=[1.0, -2.0, 0.0],
        A=np.zeros((0, 3)),
        b=[],
        senses=[],
        lower=[0.0, -1.0, 0.5],
        upper=[2.0, 3.0, 0.5],
        maximize=True,
    )
    assert res.status == OPTIMAL
    assert np.allclose(res.x, [2.0, -1.0, 0.5])
    assert res.objective == pytest.approx(4.0)


def test_redundant_equality_rows():
    # second equality row is a copy; solver must retire it, not fail
    res = solve_simplex(
        c=[1.0, 1.0],
        A=[[1.0, 1.0], [1.0, 1.0]],
        b=[1.0, 1.0],
        senses=["=", "="],
        lower=[0.0, 0.0],
        upper=[1.0, 1.0],
        maximize=True,
    )
    assert res.status == OPTIMAL
    assert res.objective == pytest.approx(1.0, abs=1e-9)


def test_degenerate_cycling_guard():
    # Classic cycling-prone instance (Beale).  Bland's rule must terminate.
    c = [0.75, -150.0, 0.02, -6.0]
    A = [
        [0.25, -60.0, -0.04, 9.0],
        [0.5, -90.0, -0.02, 3.0],
        [0.0, 0.0, 1.0, 0.0],
    ]
    b = [0.0, 0.0, 1.0]
    res = solve_simplex(
        c=c,
        A=A,
        b=b,
        senses=["<=", "<=", "<="],
        lower=[0.0] * 4,
        upper=[np.inf] * 4,
        maximize=True,
    )
    assert res.status == OPTIMAL
    assert res.objective == pytest.approx(0.05, abs=1e-9)


def test_deterministic_repeat():
    rng = np.random.default_rng(7)
    c = rng.normal(size=8)
    A = rng.normal(size=(5, 8))
    b = rng.normal(size=5) + 2.0
    senses = ["<="] * 4 + ["="]
    args = dict(
        c=c, A=A, b=b, senses=senses, lower=np.zeros(8), upper=np.ones(8), maximize=True
    )
    r1 = solve_simplex(**args)
    r2 = solve_simplex(**args)
    assert r1.status == r2.status == OPTIMAL
    assert r1.objective == r2.objective  # bitwise
    assert np.array_equal(r1.x, r2.x)
    assert r1.iterations == r2.iterations


def _scipy_solve(c, A, b, senses, lower, upper, maximize):
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for i, s in enumerate(senses):
        if s == "<=":
            A_ub.append(A[i])
            b_ub.append(b[i])
        elif s == ">=":
            A_ub.append(-A[i])
            b_ub.append(-b[i])
        else:
            A_eq.append(A[i])
            b_eq.append(b[i])
    bounds = list(zip(np.asarray(lower, dtype=float), np.asarray(upper, dtype=float)))
    bounds = [(lo if np.isfinite(lo) else None, up if np.isfinite(up) else None) for lo, up in bounds]
    res = linprog(
        c=-np.asarray(c) if maximize else np.asarray(c),
        A_ub=np.asarray(A_ub) if A_ub else None,
        b_ub=np.asarray(b_ub) if b_ub else None,
        A_eq=np.asarray(A_eq) if A_eq else None,
        b_eq=np.asarray(b_eq) if b_eq else None,
        bounds=bounds,
        method="highs",
    )
    return res


@pytest.mark.parametrize("seed", range(30))
def test_random_cross_check(seed):
    """Random boxed LPs: objective must agree with an independent solver."""
    rng = np.random.default_rng(1000 + seed)
    n = int(rng.integers(2, 7))
    m = int(rng.integers(1, 9))
    c = rng.normal(size=n)
    A = rng.normal(size=(m, n))
    b = rng.normal(size=m)
    senses = [rng.choice(["<=", ">=", "="]) if i % 3 == 0 else "<=" for i in range(m)]
    lower = np.zeros(n)
    upper = rng.uniform(0.5, 3.0, size=n)
    maximize = bool(seed % 2)
    mine = solve_simplex(c, A, b, senses, lower, upper, maximize=maximize)
    ref = _scipy_solve(c, A, b, senses, lower, upper, maximize)
    if mine.status == OPTIMAL:
        assert ref.status == 0
        ref_obj = -ref.fun if maximize else ref.fun
        assert mine.objective == pytest.approx(ref_obj, abs=1e-7)
        assert mine.duality_gap <= GAP_TOL
        assert mine.max_infeasibility <= FEAS_TOL
    elif mine.status == INFEASIBLE:
        assert ref.status == 2
    else:
        assert ref.status == 3


@pytest.mark.parametrize("seed", range(10))
def test_random_equality_heavy(seed):
    rng = np.random.default_rng(2000 + seed)
    n = int(rng.integers(3, 8))
    m = int(rng.integers(1, n))
    c = rng.normal(size=n)
    A = rng.normal(size=(m, n))
    x0 = rng.uniform(0.2, 0.8, size=n)  # plant a feasible interior point
    b = A @ x0
    senses = ["="] * m
    mine = solve_simplex(c, A, b, senses, np.zeros(n), np.ones(n), maximize=True)
    ref = _scipy_solve(c, A, b, senses, np.zeros(n), np.ones(n), True)
    assert mine.status == OPTIMAL
    assert ref.status == 0
    assert mine.objective == pytest.approx(-ref.fun, abs=1e-7)
    assert mine.duality_gap <= GAP_TOL
