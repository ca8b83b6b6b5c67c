import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from fbl_lab.errors import ValidationError
from fbl_lab.spaces import (NormedSpace, conjugate, dual_norm, norm, quasi_norm_pinfty,
                            sample_sphere)

from oracles import lorentz_weak_norm_by_k

SPACES = [
    NormedSpace.lq(1, 4), NormedSpace.lq(2, 4), NormedSpace.lq(math.inf, 4),
    NormedSpace.lq(1.5, 4), NormedSpace.lq(3, 4),
    NormedSpace.lorentz_weak(2, 4), NormedSpace.lorentz_weak(1.5, 4),
    NormedSpace.lorentz_l1(2, 4), NormedSpace.lorentz_l1(3, 4),
]


def test_euclidean_example():
    assert norm(NormedSpace.lq(2, 3), [3, 4, 0]) == pytest.approx(5.0, abs=1e-15)


@pytest.mark.parametrize("r", [1.5, 2.0, 3.0])
@pytest.mark.parametrize("size", [1, 2, 4])
def test_lorentz_l1_signed_indicator(r, size):
    x = np.zeros(5)
    x[[0, 2, 3, 4][:size]] = [1, -1, 1, -1][:size]
    assert norm(NormedSpace.lorentz_l1(r, 5), x) == pytest.approx(size ** (1 / r), rel=1e-13)


def test_lorentz_weak_example():
    x = [1, 2**-0.5, 3**-0.5, 4**-0.5]
    expect = max(k**-0.5 * sum(j**-0.5 for j in range(1, k + 1)) for k in range(1, 5))
    assert norm(NormedSpace.lorentz_weak(2, 4), x) == pytest.approx(expect, rel=1e-14)


@given(arrays(float, 6, elements=st.floats(-10, 10)), st.sampled_from([1.2, 2.0, 4.0]))
def test_lorentz_weak_matches_loop(x, p):
    assert norm(NormedSpace.lorentz_weak(p, 6), x) == pytest.approx(
        lorentz_weak_norm_by_k(x, p), rel=1e-12, abs=1e-12)


@pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
def test_quasi_norm_examples(p):
    n = 7
    x = np.arange(1, n + 1) ** (-1 / p)
    assert quasi_norm_pinfty(p, x) == pytest.approx(1.0, abs=1e-14)
    assert quasi_norm_pinfty(p, np.zeros(n)) == 0
    assert quasi_norm_pinfty(p, [2.5, 0, 0]) == pytest.approx(2.5)


def test_dual_norm_examples():
    assert dual_norm(NormedSpace.lq(1, 3), [1, -1, 1]) == pytest.approx(1.0)
    assert dual_norm(NormedSpace.lq(2, 3), [3, 4, 0]) == pytest.approx(5.0)
    for p in (1.5, 2.0, 3.0):
        n = 6
        assert dual_norm(NormedSpace.lorentz_weak(p, n), np.ones(n)) == pytest.approx(
            n ** (1 - 1 / p), rel=1e-13)


def test_duals_and_bidual():
    assert NormedSpace.lq(3, 2).dual() == NormedSpace.lq(1.5, 2)
    assert NormedSpace.lq(1, 2).dual() == NormedSpace.lq(math.inf, 2)
    assert NormedSpace.lorentz_weak(3, 4).dual() == NormedSpace.lorentz_l1(1.5, 4)
    assert NormedSpace.lorentz_l1(1.5, 4).dual() == NormedSpace.lorentz_weak(3, 4)
    for s in SPACES:
        dd = s.dual().dual()
        assert (dd.kind, dd.dim) == (s.kind, s.dim)
        assert dd.param == pytest.approx(s.param, rel=1e-12)


@pytest.mark.parametrize("space", SPACES, ids=str)
def test_homogeneity_and_triangle(space):
    rng = np.random.default_rng(7)
    X = rng.normal(size=(10_000, space.dim)) * rng.exponential(size=(10_000, 1))
    Y = rng.normal(size=(10_000, space.dim))
    t = rng.normal(size=10_000) * 5
    nx, ny = space.norm(X), space.norm(Y)
    assert space.norm(np.zeros(space.dim)) == 0
    np.testing.assert_allclose(space.norm(t[:, None] * X), np.abs(t) * nx, rtol=1e-10, atol=1e-12)
    assert np.all(space.norm(X + Y) <= (nx + ny) * (1 + 1e-10) + 1e-12)


@pytest.mark.parametrize("space", SPACES, ids=str)
def test_dual_pairing_inequality(space):
    rng = np.random.default_rng(3)
    X, Z = rng.normal(size=(2000, space.dim)), rng.normal(size=(2000, space.dim))
    lhs = np.abs((X * Z).sum(axis=1))
    assert np.all(lhs <= space.norm(X) * space.dual_norm(Z) * (1 + 1e-10))


@pytest.mark.parametrize("space", SPACES, ids=str)
def test_extreme_points_give_dual_norm(space):
    ext = space.extreme_points()
    if ext is None:
        pytest.skip("non-polyhedral ball")
    assert np.allclose(space.norm(ext), 1.0)
    rng = np.random.default_rng(1)
    Z = rng.normal(size=(200, space.dim))
    np.testing.assert_allclose(np.abs(Z @ ext.T).max(axis=1), space.dual_norm(Z), rtol=1e-12)


@given(arrays(float, 5, elements=st.floats(-5, 5)), st.sampled_from([1.5, 2.0, 3.0]))
def test_weak_norm_dominates_quasi_norm(x, p):
    assert quasi_norm_pinfty(p, x) <= norm(NormedSpace.lorentz_weak(p, 5), x) * (1 + 1e-12) + 1e-15


def test_sample_sphere_planar_euclidean():
    pts = sample_sphere(NormedSpace.lq(2, 2), 4, seed=0)
    ang = np.sort(np.mod(np.arctan2(pts[:, 1], pts[:, 0]), 2 * np.pi))
    np.testing.assert_allclose(ang, [0, np.pi / 2, np.pi, 3 * np.pi / 2], atol=1e-12)


@pytest.mark.parametrize("space", SPACES + [NormedSpace.lq(2, 3), NormedSpace.lq(1, 3)], ids=str)
def test_sample_sphere_normalized_and_deterministic(space):
    a = sample_sphere(space, 300, seed=5)
    b = sample_sphere(space, 300, seed=5)
    assert a.shape == (300, space.dim)
    np.testing.assert_allclose(space.norm(a), 1.0, atol=1e-12)
    assert np.array_equal(a, b)


def test_parse_and_json_roundtrip():
    for text, kind in [("l1:4", "lq"), ("linf:2", "lq"), ("lq:1.5:3", "lq"),
                       ("lorentzweak:2:4", "lorentzweak"), ("lorentzl1:3:5", "lorentzl1")]:
        s = NormedSpace.parse(text)
        assert s.kind == kind
        assert NormedSpace.from_json(s.to_json()) == s
    assert NormedSpace.parse("linf:2").param == math.inf


@pytest.mark.parametrize("bad", ["", "l0:2", "lq:0.5:2", "l2:0", "lorentzweak:1:3", "foo:1:2", "l2"])
def test_parse_rejects(bad):
    with pytest.raises(ValidationError):
        NormedSpace.parse(bad)


def test_validation():
    with pytest.raises(ValidationError):
        norm(NormedSpace.lq(2, 3), [1, 2])
    with pytest.raises(ValidationError):
        norm(NormedSpace.lq(2, 2), [1, np.nan])
    assert conjugate(1) == math.inf and conjugate(math.inf) == 1 and conjugate(3) == pytest.approx(1.5)
