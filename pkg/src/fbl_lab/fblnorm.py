"""Norm estimators for elements of the free p-convex Banach lattice FBL^(p)[E].

For a positively homogeneous ``f`` on ``E*``::

    ||f||_p = sup { (sum_i |f(x_i*)|^p)^(1/p) : ||(x_i*)||_{p,weak} <= 1 }

* :func:`fbl_p_lower` maximizes that ratio over tuples and returns a valid
  lower bound (the weak-p norm of the final tuple is recomputed accurately).
* :func:`fbl_p_upper_lp` discretizes the dominating-measure description:
  ``||f||_p^p`` is the least mass of a measure ``mu`` on the unit sphere of
  ``E`` with ``|f(x*)|^p <= int |<x*, e>|^p dmu(e)`` for all ``x*``.  Masses
  and test functionals are restricted to grids, so the bound is certified
  only at the tested directions.
* :func:`sandwich_bounds` brackets every such norm between ``||f||_inf`` and
  ``dim E * ||f||_inf``.

Anything with a ``space`` attribute and a vectorized ``evaluate`` method can
be passed as ``f``; lattice expressions are the usual case.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .estimate import NormEstimate
from .fvl import sup_norm_on_dual_ball
from .solver import AscentConfig, LinearProgram, maximize_ratio, solve_lp
from .spaces import NormedSpace, as_vector, sample_sphere

DEFAULT_TUPLE_CAP = 16


def _check_p(p: float, allow_inf: bool = True) -> float:
    p = float(p)
    if not p >= 1 or (math.isinf(p) and not allow_inf):
        raise ValidationError(f"p out of range: {p}")
    return p


@dataclass(frozen=True)
class FunctionalTuple:
    space: NormedSpace
    members: np.ndarray
    p: float

    def __post_init__(self):
        m = as_vector(self.members, self.space.dim)
        m = np.atleast_2d(m)
        if m.shape[0] == 0:
            raise ValidationError("functional tuple must be nonempty")
        object.__setattr__(self, "members", m)
        object.__setattr__(self, "p", _check_p(self.p))


# -- weak-p norms ----------------------------------------------------------------


def _lp_rows(values: np.ndarray, p: float) -> np.ndarray:
    """l_p norm along the last axis of a nonnegative array."""
    if math.isinf(p):
        return values.max(axis=-1)
    if p == 1:
        return values.sum(axis=-1)
    m = values.max(axis=-1, keepdims=True)
    safe = np.where(m > 0, m, 1.0)
    return np.squeeze(safe, -1) * ((values / safe) ** p).sum(axis=-1) ** (1.0 / p)


class _WeakNorm:
    """Batched ``||(x_i*)||_{p,weak}`` for tuples of shape ``(k, N, n)``.

    Polyhedral unit balls are handled exactly through their extreme points;
    ``l_2`` with ``p = 2`` through the largest singular value; ``p = 1`` in
    the plane through the sign sectors cut out by the functionals; everything
    else through a fixed sphere grid (``fast``) followed, in ``accurate``,
    by local ascent from the best grid points.
    """

    def __init__(self, space: NormedSpace, p: float, grid: int = 1024, seed: int = 0):
        self.space, self.p = space, p
        self.ext = space.extreme_points()
        self.spectral = space.kind == "lq" and space.param == 2 and p == 2
        self.sectors = p == 1 and space.dim == 2
        self.exact = self.ext is not None or math.isinf(p) or self.spectral or self.sectors
        if self.ext is not None:
            self.points = self.ext
        else:
            self.points = sample_sphere(space, grid if space.dim > 1 else 2, seed)
        self.seed = seed

    def fast(self, T: np.ndarray) -> np.ndarray:
        T = np.asarray(T, dtype=float)
        if math.isinf(self.p):
            return self.space.dual().norm(T).max(axis=-1)
        if self.ext is None and self.spectral:
            return np.linalg.norm(T, ord=2, axis=(-2, -1))
        if self.ext is None and self.sectors:
            return self._planar_sign_max(T)
        vals = np.abs(T @ self.points.T)              # (k, N, points)
        return _lp_rows(np.swapaxes(vals, -1, -2), self.p).max(axis=-1)

    def _planar_sign_max(self, T):
        # on each arc between consecutive zeros of the <x_i*, e> the signs are
        # fixed, so the sup of sum |<x_i*, e>| is a dual norm of a signed sum
        k, N, _ = T.shape
        ang = np.arctan2(T[..., 1], T[..., 0]) + np.pi / 2
        cuts = np.sort(np.concatenate([ang, ang + np.pi], axis=-1) % (2 * np.pi), axis=-1)
        nxt = np.concatenate([cuts[:, 1:], cuts[:, :1] + 2 * np.pi], axis=-1)
        mid = (cuts + nxt) / 2
        E = np.stack([np.cos(mid), np.sin(mid)], axis=-1)            # (k, 2N, 2)
        signs = np.sign(np.einsum("kjn,ksn->ksj", T, E))
        S = signs @ T                                                 # (k, 2N, n)
        return self.space.dual().norm(S).max(axis=-1)

    def accurate(self, T: np.ndarray) -> float:
        """Weak-p norm of a single tuple ``(N, n)``."""
        T = np.asarray(T, dtype=float)
        base = float(self.fast(T[None])[0])
        if self.exact or base == 0:
            return base
        vals = _lp_rows(np.abs(self.points @ T.T), self.p)
        top = np.argsort(-vals)[:4]
        cfg = AscentConfig(starts=0, max_iters=100, seed=self.seed)
        val, _ = maximize_ratio(
            lambda X: _lp_rows(np.abs(X @ T.T), self.p), self.space.norm, self.space.dim, cfg,
            starts=self.points[top], vectorized=True,
        )
        return max(base, val)


def weak_p_norm(t: FunctionalTuple, config: AscentConfig | None = None) -> float:
    """``sup { (sum_i |<x_i*, e>|^p)^(1/p) : ||e|| <= 1 }``.

    Exact for polyhedral balls, for ``p = inf`` and for ``l_2`` with ``p = 2``;
    otherwise a lower bound from grid search plus ascent.
    """
    config = config or AscentConfig()
    return _WeakNorm(t.space, t.p, seed=config.seed).accurate(t.members)


# -- lower bound -----------------------------------------------------------------


def _grid_lp(f, p: float, masses: np.ndarray, tests: np.ndarray, rule: str):
    """Solve the discretized domination LP in its dual (packing) form.

    maximize sum_t nu_t b_t  subject to  sum_t nu_t |<x_t*, e_m>|^p <= 1,
    whose optimal value equals min { sum_m mu_m : mu dominates f on tests }.
    Returns ``(value, mu, nu, iterations)``.
    """
    b = np.abs(np.asarray(f.evaluate(tests), dtype=float)) ** p
    bmax = float(b.max(initial=0.0))
    if bmax == 0:
        return 0.0, np.zeros(len(masses)), np.zeros(len(tests)), 0
    M = np.abs(tests @ masses.T) ** p          # (tests, masses)
    keep = b > 1e-14 * bmax
    lp = LinearProgram.from_arrays(-b[keep] / bmax, A_ub=M[keep].T, b_ub=np.ones(len(masses)))
    res = solve_lp(lp, rule=rule)
    if res.status == "unbounded":
        raise NumericalError(
            "domination LP infeasible: the mass grid cannot dominate f; increase grid_mass")
    if not res.ok:
        raise NumericalError(f"domination LP failed: {res.status}")
    nu = np.zeros(len(tests))
    nu[keep] = res.x / bmax
    mu = -res.duals * bmax
    return -res.value * bmax, np.maximum(mu, 0.0), nu, res.iterations


def _tuple_value(f, T: np.ndarray, p: float) -> float:
    return float(_lp_rows(np.abs(np.asarray(f.evaluate(T)))[None], p)[0])


def _lp_witness(f, p: float, grid: int, seed: int, cap: int) -> np.ndarray | None:
    space = f.space
    masses = sample_sphere(space, grid, seed)
    tests = sample_sphere(space.dual(), grid, seed)
    try:
        _, _, nu, _ = _grid_lp(f, p, masses, tests, "dantzig")
    except NumericalError:
        return None
    order = np.argsort(-nu)[:cap]
    order = order[nu[order] > 0]
    if order.size == 0:
        return None
    return tests[order] * nu[order, None] ** (1.0 / p)


def fbl_p_lower(f, p: float, tuple_cap: int = DEFAULT_TUPLE_CAP,
                config: AscentConfig | None = None, seed_grid: int | None = None) -> NormEstimate:
    """Lower bound for ``||f||`` in FBL^(p)[E] by ascent over functional tuples.

    The ratio ``(sum_i |f(x_i*)|^p)^(1/p) / ||(x_i*)||_{p,weak}`` is maximized
    jointly over ``tuple_cap * n`` coordinates.  Candidates are the single
    functional optimum (the uniform norm), a tuple read off a coarse
    domination LP (``seed_grid`` points per grid; default 180 for n <= 3,
    0 disables), and ``config.starts`` random tuples.  For ``p = inf`` the
    norm is the uniform norm and only single functionals are used.
    """
    p = _check_p(p)
    if tuple_cap < 1:
        raise ValidationError("tuple_cap must be at least 1")
    config = config or AscentConfig()
    space = f.space
    n = space.dim
    sup = sup_norm_on_dual_ball(f, seed=config.seed)
    meta = {"seed": config.seed, "tuple_cap": tuple_cap, "p": p if math.isfinite(p) else "inf"}
    if math.isinf(p) or sup.lower == 0:
        meta.update(grid=sup.meta["grid"], iterations=sup.meta["iterations"], members=1)
        return NormEstimate(sup.lower, None, "tuple-ascent", meta)

    weak = _WeakNorm(space, p, seed=config.seed)
    N = tuple_cap

    def numerator(Z):
        T = Z.reshape(len(Z), N, n)
        return _lp_rows(np.abs(np.asarray(f.evaluate(T))), p)

    def denominator(Z):
        return weak.fast(Z.reshape(len(Z), N, n))

    starts = []
    if seed_grid is None:
        seed_grid = 180 if n <= 3 else 0
    if seed_grid:
        W = _lp_witness(f, p, seed_grid, config.seed, N)
        if W is not None:
            pad = np.zeros((N, n))
            pad[: len(W)] = W
            starts.append(pad.ravel())
    best_val, best_T = sup.lower, np.asarray(sup.meta["argmax"])[None]
    if starts or config.starts:
        val, z = maximize_ratio(numerator, denominator, N * n, config, starts=starts,
                                vectorized=True)
        T = z.reshape(N, n)
        T = T[np.abs(np.asarray(f.evaluate(T))) > 0] if np.any(f.evaluate(T)) else T[:1]
        den = weak.accurate(T)
        if den > 0:
            val = _tuple_value(f, T, p) / den
            if val > best_val:
                best_val, best_T = val, T
    meta.update(grid=[len(weak.points)], iterations=config.max_iters, members=int(len(best_T)),
                seed_grid=seed_grid)
    return NormEstimate(best_val, None, "tuple-ascent", meta)


# -- upper bound -----------------------------------------------------------------


def fbl_p_upper_lp(f, p: float, grid_mass: int = 720, grid_test: int = 720, seed: int = 0,
                   rule: str = "dantzig") -> NormEstimate:
    """Grid-LP bound ``(min total mass)^(1/p)`` for ``||f||`` in FBL^(p)[E], ``p < inf``.

    ``upper`` is exact for the discretized problem and approaches a true
    upper bound only as both grids refine; the estimate records both grid
    sizes.  ``lower`` comes from the LP's dual solution: a functional tuple
    whose weak-p norm is recomputed over the whole ball, hence a genuine
    lower bound.  An infeasible LP raises :class:`NumericalError`.
    """
    p = _check_p(p, allow_inf=False)
    space = f.space
    masses = sample_sphere(space, grid_mass, seed)
    tests = sample_sphere(space.dual(), grid_test, seed)
    value, mu, nu, iters = _grid_lp(f, p, masses, tests, rule)
    upper = value ** (1.0 / p)
    lower = 0.0
    support = np.flatnonzero(nu > 0)
    if support.size:
        T = tests[support] * nu[support, None] ** (1.0 / p)
        den = _WeakNorm(space, p, seed=seed).accurate(T)
        if den > 0:
            lower = min(upper, _tuple_value(f, T, p) / den)
    meta = {"seed": seed, "grid": [int(grid_mass), int(grid_test)], "iterations": iters,
            "p": p, "rule": rule, "mass_support": int(np.count_nonzero(mu > 0)),
            "rigorous": False, "certified": "grid-certified only at tested directions"}
    return NormEstimate(lower, upper, "grid-lp", meta)


def fbl_p_upper(f, p: float, grid_mass: int = 720, grid_test: int = 720, seed: int = 0,
                rule: str = "dantzig") -> NormEstimate:
    """Upper estimate for any ``p``: the grid LP for finite ``p``, the uniform norm for ``p = inf``."""
    p = _check_p(p)
    if math.isinf(p):
        est = sup_norm_on_dual_ball(f, grid=max(grid_test, 8), seed=seed)
        return NormEstimate(est.lower, est.upper, "sup-grid", est.meta)
    return fbl_p_upper_lp(f, p, grid_mass, grid_test, seed, rule)


def sandwich_bounds(f, grid: int = 2048, seed: int = 0) -> tuple[float, float]:
    """``(||f||_inf lower estimate, dim E * ||f||_inf upper estimate)``.

    Every FBL^(p)[E] norm of ``f``, ``1 <= p <= inf``, lies in between.
    """
    est = sup_norm_on_dual_ball(f, grid=grid, seed=seed)
    high = est.upper if est.upper is not None else est.lower
    return est.lower, f.space.dim * high
