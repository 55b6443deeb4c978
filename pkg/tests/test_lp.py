"""Tests for the dense equality-form simplex and the support-scan oracle."""

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from cyclorat.lp import batch_support_values, enumerate_basic_values, solve_equality_lp


def test_textbook_instance():
    # min -3x - 2y s.t. 2x + y + s1 = 10, x + y + s2 = 8, x + s3 = 4;
    # optimum at (x, y) = (2, 6) with value -18.
    c = np.array([-3.0, -2.0, 0.0, 0.0, 0.0])
    A = np.array(
        [
            [2.0, 1.0, 1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0, 1.0, 0.0],
            [1.0, 0.0, 0.0, 0.0, 1.0],
        ]
    )
    b = np.array([10.0, 8.0, 4.0])
    res = solve_equality_lp(c, A, b)
    assert res.status == "optimal"
    assert_allclose(res.value, -18.0, atol=1e-12)
    assert_allclose(res.x[:2], [2.0, 6.0], atol=1e-12)


def test_infeasible_instance():
    # x1 + x2 = 1 and x1 + x2 = 2 cannot both hold.
    c = np.zeros(2)
    A = np.array([[1.0, 1.0], [1.0, 1.0]])
    b = np.array([1.0, 2.0])
    res = solve_equality_lp(c, A, b)
    assert res.status == "infeasible"
    assert math.isinf(res.value)


def test_unbounded_instance():
    # min -x1 with x1 - x2 = 0: push both variables up forever.
    c = np.array([-1.0, 0.0])
    A = np.array([[1.0, -1.0]])
    b = np.array([0.0])
    res = solve_equality_lp(c, A, b)
    assert res.status == "unbounded"


def test_redundant_rows():
    c = np.array([1.0, 2.0])
    A = np.array([[1.0, 1.0], [2.0, 2.0]])
    b = np.array([1.0, 2.0])
    res = solve_equality_lp(c, A, b)
    assert res.status == "optimal"
    assert_allclose(res.value, 1.0, atol=1e-12)


def _random_transport_instance(rng, rows, cols):
    # Mixture-style instances resembling the conjugate LP: columns are
    # simplex points, right-hand side a convex combination of them.
    G = rng.dirichlet(np.ones(rows), size=cols)  # cols points in rows-dim
    lam = rng.dirichlet(np.ones(cols))
    q = lam @ G
    A = np.vstack([G.T, np.ones((1, cols))])
    b = np.concatenate([q, [1.0]])
    c = rng.normal(size=cols)
    return c, A, b


def test_simplex_matches_support_scan_on_random_instances():
    rng = np.random.default_rng(21)
    for _ in range(120):
        rows = int(rng.integers(2, 5))
        cols = int(rng.integers(2, 9))
        c, A, b = _random_transport_instance(rng, rows, cols)
        res = solve_equality_lp(c, A, b)
        oracle = enumerate_basic_values(c, A, b)
        assert res.status == "optimal"
        assert_allclose(res.value, oracle, atol=1e-9)


def test_simplex_detects_infeasible_mixtures():
    rng = np.random.default_rng(22)
    for _ in range(40):
        rows = int(rng.integers(2, 5))
        cols = int(rng.integers(2, 7))
        c, A, b = _random_transport_instance(rng, rows, cols)
        b[:-1] = rng.dirichlet(np.ones(rows)) * 2.0  # no longer sums to 1
        res = solve_equality_lp(c, A, b)
        oracle = enumerate_basic_values(c, A, b)
        assert (res.status == "infeasible") == math.isinf(oracle)


def test_batch_support_values_matches_single():
    rng = np.random.default_rng(23)
    cols = 7
    rows = 3
    G = rng.dirichlet(np.ones(rows), size=cols)
    A = np.vstack([G.T, np.ones((1, cols))])
    c = rng.normal(size=cols)
    queries = rng.dirichlet(np.ones(cols), size=25) @ G
    B = np.hstack([queries, np.ones((25, 1))])
    batch = batch_support_values(c, A, B)
    singles = np.array(
        [enumerate_basic_values(c, A, B[k]) for k in range(25)]
    )
    assert_allclose(batch, singles, atol=1e-10)


def test_batch_reports_infeasible_queries():
    rng = np.random.default_rng(24)
    G = rng.dirichlet(np.ones(2), size=4)
    A = np.vstack([G.T, np.ones((1, 4))])
    c = rng.normal(size=4)
    inside = rng.dirichlet(np.ones(4), size=3) @ G
    outside = np.array([[0.999, 0.001]])  # outside conv of interior points
    B = np.hstack([np.vstack([inside, outside]), np.ones((4, 1))])
    vals = batch_support_values(c, A, B)
    assert np.all(np.isfinite(vals[:3]))
    assert math.isinf(vals[3])
