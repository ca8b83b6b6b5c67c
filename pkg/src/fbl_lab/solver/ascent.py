"""Multi-start ascent for ratios of positively homogeneous functions.

The ratio ``r(x) = objective(x) / denominator(x)`` is scale invariant, so the
iterate is kept on the denominator's unit sphere.  Gradients come from central
differences; at kinks this degrades to a (possibly poor) subgradient step,
which is acceptable because only lower bounds are ever claimed: the returned
value is re-evaluated at the returned point.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ..errors import NumericalError, ValidationError


@dataclass(frozen=True)
class AscentConfig:
    starts: int = 8
    max_iters: int = 200
    step0: float = 0.5
    shrink: float = 0.5
    tol: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.starts < 0:
            raise ValidationError("starts must be nonnegative")
        if not 0 < self.shrink < 1:
            raise ValidationError("shrink must lie in (0, 1)")
        if self.tol <= 0:
            raise ValidationError("tol must be positive")
        if self.max_iters < 0:
            raise ValidationError("max_iters must be nonnegative")

    def replace(self, **kw) -> "AscentConfig":
        vals = {k: getattr(self, k) for k in self.__dataclass_fields__}
        vals.update(kw)
        return AscentConfig(**vals)


def _batch(fn, vectorized):
    if vectorized:
        def call(X):
            return np.asarray(fn(X), dtype=float).reshape(len(X))
    else:
        def call(X):
            return np.array([float(fn(x)) for x in X])
    return call


def _ascend(x0, obj, den, config: AscentConfig):
    """Single-start projected ascent; returns ``(value, point)``."""

    def ratio(X):
        o, d = obj(X), den(X)
        if not (np.all(np.isfinite(o)) and np.all(np.isfinite(d))):
            raise NumericalError("evaluator returned a non-finite value")
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(d > 0, o / np.where(d > 0, d, 1.0), -np.inf)

    dim = x0.size
    d0 = den(x0[None])[0]
    if not d0 > 0:
        return -np.inf, x0
    x = x0 / d0
    r = ratio(x[None])[0]
    t = config.step0
    eye = np.eye(dim)
    stall = 0
    for _ in range(config.max_iters):
        h = 1e-6 * max(1.0, float(np.abs(x).max()))
        probes = np.vstack([x + h * eye, x - h * eye])
        vals = ratio(probes)
        if not np.all(np.isfinite(vals)):
            break
        g = (vals[:dim] - vals[dim:]) / (2 * h)
        gn = float(np.linalg.norm(g))
        if gn == 0:
            break
        direction = g / gn * float(np.linalg.norm(x))
        moved = False
        while t >= config.tol:
            y = x + t * direction
            dy = den(y[None])[0]
            if dy > 0:
                y = y / dy
                ry = ratio(y[None])[0]
                if ry > r:
                    gain = ry - r
                    x, r = y, ry
                    t = min(t / config.shrink, 1.0)
                    moved = True
                    break
            t *= config.shrink
        if not moved:
            break
        stall = stall + 1 if gain <= 1e-15 * max(1.0, abs(r)) else 0
        if stall >= 5:
            break
    return r, x


def worker_count() -> int:
    """Worker cap from ``FBL_LAB_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("FBL_LAB_THREADS", "1")))
    except ValueError:
        return 1


def maximize_ratio(objective, denominator, dim: int, config: AscentConfig | None = None,
                   starts=None, vectorized: bool = False):
    """Best value of ``objective(x) / denominator(x)`` over multi-start ascent.

    ``starts`` are extra initial points tried before ``config.starts`` random
    Gaussian ones; the random start with index ``i`` depends only on
    ``(config.seed, i)``, so adding starts never lowers the result.  With
    ``vectorized=True`` both callables take ``(k, dim)`` arrays.

    Returns ``(value, argmax)``; ``value`` is recomputed at ``argmax``.
    """
    config = config or AscentConfig()
    obj = _batch(objective, vectorized)
    den = _batch(denominator, vectorized)
    inits = [] if starts is None else [np.asarray(s, dtype=float).reshape(dim) for s in starts]
    for i in range(config.starts):
        rng = np.random.default_rng([config.seed, i])
        inits.append(rng.normal(size=dim))
    if not inits:
        raise ValidationError("no starting points")

    def run(x0):
        return _ascend(x0, obj, den, config)

    workers = min(worker_count(), len(inits))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, inits))
    else:
        results = [run(x0) for x0 in inits]
    # deterministic merge: highest value, lowest start index on ties
    best = max(range(len(results)), key=lambda i: (results[i][0], -i))
    x = results[best][1]
    o, d = obj(x[None])[0], den(x[None])[0]
    if not (np.isfinite(o) and np.isfinite(d)):
        raise NumericalError("evaluator returned a non-finite value")
    if not d > 0:
        raise NumericalError("denominator vanished at every start")
    return float(o / d), x
