import math

import numpy as np
import pytest
from scipy.optimize import linprog

from fbl_lab.errors import ValidationError
from fbl_lab.solver import AscentConfig, LinearProgram, maximize_ratio, solve_lp
from fbl_lab.spaces import NormedSpace

from oracles import random_bounded_lp, vertex_enumeration_lp


# -- simplex -------------------------------------------------------------------------


def test_tiny_covering_lp():
    lp = LinearProgram([1, 1], [([1, 1], ">=", 1)])
    res = solve_lp(lp)
    assert res.ok and res.value == pytest.approx(1.0)


def test_infeasible():
    lp = LinearProgram([1], [([1], "<=", -1)])
    assert solve_lp(lp).status == "infeasible"


def test_unbounded():
    lp = LinearProgram([-1, 0], [([1, -1], "<=", 1)])
    assert solve_lp(lp).status == "unbounded"


def test_free_variables_and_bounds():
    # minimize x - y with x in [-2, inf), y free, x + y = 1, y <= 4
    lp = LinearProgram([1, -1], [([1, 1], "=", 1), ([0, 1], "<=", 4)], lower=[-2, -math.inf])
    res = solve_lp(lp)
    assert res.ok
    assert res.value == pytest.approx(-2 - 3)
    assert res.x[0] == pytest.approx(-2) and res.x[1] == pytest.approx(3)


def test_redundant_equalities():
    A = np.array([[1.0, 1, 1], [2, 2, 2]])
    lp = LinearProgram.from_arrays([1, 2, 3], A_eq=A, b_eq=[1, 2])
    res = solve_lp(lp)
    assert res.ok and res.value == pytest.approx(1.0)


def test_rejects_bad_input():
    with pytest.raises(ValidationError):
        LinearProgram([1, 2], [([1], "<=", 1)])
    with pytest.raises(ValidationError):
        LinearProgram([1], [([1], "<", 1)])
    with pytest.raises(ValidationError):
        solve_lp(LinearProgram([1]), rule="steepest")


@pytest.mark.parametrize("rule", ["bland", "dantzig"])
def test_against_vertex_enumeration(rule):
    rng = np.random.default_rng(100)
    for _ in range(6):
        c, A, b = random_bounded_lp(rng)
        exact = float(vertex_enumeration_lp(c, A, b))
        res = solve_lp(LinearProgram.from_arrays(c, A_eq=A, b_eq=b), rule=rule)
        assert res.ok
        assert res.value == pytest.approx(exact, rel=1e-8, abs=1e-9)


def test_against_scipy_inequality_form():
    rng = np.random.default_rng(5)
    for _ in range(20):
        m, n = 15, 12
        A = rng.uniform(0, 1, size=(m, n))
        b = rng.uniform(1, 2, size=m)
        c = -rng.uniform(0, 1, size=n)
        ref = linprog(c, A_ub=A, b_ub=b, method="highs")
        for rule in ("bland", "dantzig"):
            res = solve_lp(LinearProgram.from_arrays(c, A_ub=A, b_ub=b), rule=rule)
            assert res.value == pytest.approx(ref.fun, rel=1e-9)


def test_weak_duality_and_complementary_values():
    rng = np.random.default_rng(9)
    for _ in range(20):
        m, n = 8, 14
        A = rng.uniform(0, 1, size=(m, n))
        b = rng.uniform(1, 2, size=m)
        c = rng.uniform(0.5, 1.5, size=n)
        # min c.x  s.t.  A x >= b: duals y >= 0 with A^T y <= c
        res = solve_lp(LinearProgram.from_arrays(c, A_ge=A, b_ge=b))
        assert res.ok
        y = res.duals
        assert np.all(y >= -1e-9)
        assert np.all(A.T @ y <= c + 1e-9)
        assert b @ y <= res.value + 1e-9
        assert b @ y == pytest.approx(res.value, rel=1e-9)


def test_deterministic():
    rng = np.random.default_rng(3)
    c, A, b = random_bounded_lp(rng)
    lp = LinearProgram.from_arrays(c, A_eq=A, b_eq=b)
    r1, r2 = solve_lp(lp), solve_lp(lp)
    assert np.array_equal(r1.x, r2.x) and r1.iterations == r2.iterations


# -- ratio ascent --------------------------------------------------------------------


def test_identity_ratio():
    val, _ = maximize_ratio(lambda x: np.linalg.norm(x), lambda x: np.linalg.norm(x), 3)
    assert val == pytest.approx(1.0)


def test_linear_functional_euclidean():
    l2 = NormedSpace.lq(2, 3)
    val, x = maximize_ratio(lambda x: x[0], l2.norm, 3)
    assert val == pytest.approx(1.0, abs=1e-9)
    np.testing.assert_allclose(x / np.linalg.norm(x), [1, 0, 0], atol=1e-4)


def test_linear_functional_on_sup_norm_ball():
    linf = NormedSpace.lq(math.inf, 2)
    a = np.array([1.0, 2.0])
    val, _ = maximize_ratio(lambda x: abs(a @ x), linf.norm, 2)
    # vertices of the square: (+-1, +-1)
    assert val == pytest.approx(3.0, rel=1e-6)


@pytest.mark.parametrize("q", [1.5, 2.0, 3.0, 4.0])
def test_linear_functionals_reach_dual_norm(q):
    space = NormedSpace.lq(q, 4)
    rng = np.random.default_rng(int(q * 10))
    for _ in range(3):
        a = rng.normal(size=4)
        val, _ = maximize_ratio(lambda x: abs(a @ x), space.norm, 4)
        assert val == pytest.approx(space.dual_norm(a), rel=1e-6)


def test_reproducible_and_monotone_in_starts():
    rng = np.random.default_rng(0)
    M = rng.normal(size=(3, 3))
    obj = lambda x: np.abs(M @ x).max() + 0.3 * abs(np.sin(5 * x[0]))
    den = lambda x: np.linalg.norm(x)
    prev = -np.inf
    for k in (1, 2, 4, 8):
        cfg = AscentConfig(starts=k, seed=3)
        v1, x1 = maximize_ratio(obj, den, 3, cfg)
        v2, x2 = maximize_ratio(obj, den, 3, cfg)
        assert v1 == v2 and np.array_equal(x1, x2)
        assert v1 >= prev
        prev = v1


def test_vectorized_mode_matches():
    M = np.array([[1.0, 2.0], [0.5, -1.0]])
    obj = lambda X: np.abs(X @ M.T).sum(axis=-1)
    den = lambda X: np.linalg.norm(X, axis=-1)
    v, _ = maximize_ratio(obj, den, 2, vectorized=True)
    ref = max(np.abs(M @ [np.cos(t), np.sin(t)]).sum() for t in np.linspace(0, 2 * np.pi, 100_000))
    assert v == pytest.approx(ref, rel=1e-8)
