"""Pointed partitions of unity on the dual sphere and positive finite-rank operators.

A pointed partition ``alpha`` is a family of peaks ``x_i*`` on ``S(E*)``
with continuous hats ``f_i >= 0``, ``sum_i f_i = 1`` and ``f_i(x_i*) = 1``.
It induces the positive operator ``P_alpha f = sum_i f(x_i*) f_i``, which
satisfies ``||P_alpha f|| <= (1 + omega(diam alpha) / c) ||f||`` for a
convenient lattice norm with controlling modulus ``omega`` and constant
``c``.  This module builds such partitions (exactly in dimension 2, grid
verified in dimension 3) and measures both sides of that inequality.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .fvl import add, delta, psum, scale
from .spaces import NormedSpace, as_vector, euclidean_directions, fibonacci_sphere, sample_sphere

# -- controlling families ------------------------------------------------------------


@dataclass(frozen=True)
class ControllingFamilySpec:
    """Which controlling family (and so which modulus) is meant.

    ``fblp``   -- the family of FBL^(p)[E]: ``(sum_i l_i |delta_{e_i}|^p)^(1/p)``
                  with ``l`` a probability vector and ``||e_i|| = 1``; for
                  ``p = inf`` the constant function 1.
    ``upperp`` -- convex combinations of ``max_i |delta_{e_i}|`` with
                  ``sum_i ||e_i||^p <= 1`` (the equivalent convenient norm of
                  the free lattice with upper p-estimate).

    ``c`` is the constant with ``c ||f|| <= ||f||_inf``; ``None`` means
    ``1 / dim E``, the value available for FBL^(p)[E].
    """

    kind: str
    p: float
    c: float | None = None

    def __post_init__(self):
        if self.kind not in ("fblp", "upperp"):
            raise ValidationError(f"unknown controlling family {self.kind!r}")
        p = float(self.p)
        if self.kind == "fblp" and not p >= 1:
            raise ValidationError("fblp needs p in [1, inf]")
        if self.kind == "upperp" and not 1 < p < math.inf:
            raise ValidationError("upperp needs p in (1, inf)")
        if self.c is not None and not self.c > 0:
            raise ValidationError("c must be positive")
        object.__setattr__(self, "p", p)

    @classmethod
    def fblp(cls, p: float, c: float | None = None):
        return cls("fblp", p, c)

    @classmethod
    def upperp(cls, p: float, c: float | None = None):
        return cls("upperp", p, c)

    def constant(self, space: NormedSpace) -> float:
        return self.c if self.c is not None else 1.0 / space.dim


def modulus(spec: ControllingFamilySpec, s: float) -> float:
    """Modulus of equicontinuity of the family at distance ``s``."""
    if s < 0:
        raise ValidationError("distance must be nonnegative")
    if spec.kind == "upperp":
        return float(s)
    if math.isinf(spec.p):
        return 0.0
    return spec.p ** (1.0 / spec.p) * s ** (1.0 / spec.p)


class DualNormFunction:
    """``x* -> ||x*||``: the constant 1 on the dual sphere, extended homogeneously."""

    def __init__(self, space: NormedSpace):
        self.space = space

    def evaluate(self, X):
        out = self.space.dual().norm(as_vector(X, self.space.dim))
        return out

    __call__ = evaluate

    def lipschitz(self) -> float:
        return 1.0


def sample_member(spec: ControllingFamilySpec, space: NormedSpace, rng: np.random.Generator,
                  terms: int = 4):
    """A random element of the controlling family of ``spec``."""
    if spec.kind == "fblp" and math.isinf(spec.p):
        return DualNormFunction(space)
    k = int(rng.integers(1, terms + 1))
    E = rng.normal(size=(k, space.dim))
    E /= space.norm(E)[:, None]
    lam = rng.dirichlet(np.ones(k))
    if spec.kind == "fblp":
        return psum(spec.p, [scale(l ** (1.0 / spec.p), delta(space, e)) for l, e in zip(lam, E)])
    # upperp: convex combination of maxima of moduli with sum ||e_i||^p <= 1
    parts = []
    for t in lam:
        m = int(rng.integers(1, 4))
        G = rng.normal(size=(m, space.dim))
        G /= space.norm(G)[:, None]
        w = rng.dirichlet(np.ones(m)) ** (1.0 / spec.p)
        parts.append(scale(t, psum(math.inf, [delta(space, g * wi) for g, wi in zip(G, w)])))
    return add(*parts) if len(parts) > 1 else parts[0]


# -- pointed partitions ----------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PointedPartition:
    """Peaks on ``S(E*)`` with hat functions forming a partition of unity.

    In dimension 2 the hats are trapezoids in the polar angle: sector ``i``
    is centred at angle ``2 pi i / K`` with a plateau of half-width
    ``(1 - overlap) pi / K`` and linear ramps reaching zero at half-width
    ``(1 + overlap) pi / K``; ``overlap = 0`` gives sector indicators.  In
    dimension 3 the hats are normalized cones around Fibonacci peaks.
    """

    space: NormedSpace
    peaks: np.ndarray
    overlap: float
    diam: float
    _dirs: np.ndarray
    _radius: float

    def hats(self, X) -> np.ndarray:
        """Values of all hats at the directions of ``X``: shape ``(len(X), K)``."""
        X = np.atleast_2d(as_vector(X, self.space.dim))
        K = len(self.peaks)
        if self.space.dim == 2:
            width = 2 * math.pi / K
            ang = np.arctan2(X[:, 1], X[:, 0])
            centres = width * np.arange(K)
            d = np.abs((ang[:, None] - centres[None, :] + math.pi) % (2 * math.pi) - math.pi)
            half = width / 2
            if self.overlap == 0:
                out = np.where(d < half, 1.0, 0.0)
                out = np.where(np.isclose(d, half, rtol=0, atol=1e-15), 0.5, out)
                return out
            ramp = self.overlap * half
            return np.clip((half + ramp - d) / (2 * ramp), 0.0, 1.0)
        U = X / np.linalg.norm(X, axis=1, keepdims=True)
        dist = np.linalg.norm(U[:, None, :] - self._dirs[None, :, :], axis=2)
        phi = np.clip(1.0 - dist / self._radius, 0.0, None)
        tot = phi.sum(axis=1, keepdims=True)
        if np.any(tot == 0):
            raise ValidationError("partition does not cover the sphere")
        return phi / tot

    def residual(self, grid: int = 4096, seed: int = 0) -> float:
        """``max |sum_i f_i - 1|`` on a dual-sphere grid."""
        X = euclidean_directions(self.space.dim, grid, seed)
        X = np.vstack([X, self.peaks])
        return float(np.abs(self.hats(X).sum(axis=1) - 1.0).max())

    def __len__(self):
        return len(self.peaks)


def _arc_diameter(space: NormedSpace, lo: float, hi: float, samples: int = 65) -> float:
    dual = space.dual()
    th = np.linspace(lo, hi, samples)
    arc = np.column_stack([np.cos(th), np.sin(th)])
    arc /= dual.norm(arc)[:, None]
    return float(dual.norm(arc[:, None, :] - arc[None, :, :]).max())


def build_partition(space: NormedSpace, sectors: int, overlap: float = 0.5) -> PointedPartition:
    """Pointed partition of unity of ``S(E*)`` with ``sectors`` pieces.

    ``diam`` is the largest support diameter measured in the norm of ``E*``.
    """
    if sectors < 3:
        raise ValidationError("need at least 3 sectors")
    if not 0 <= overlap < 1:
        raise ValidationError("overlap must lie in [0, 1)")
    dual = space.dual()
    if space.dim == 2:
        width = 2 * math.pi / sectors
        centres = width * np.arange(sectors)
        dirs = np.column_stack([np.cos(centres), np.sin(centres)])
        peaks = dirs / dual.norm(dirs)[:, None]
        half = (1 + overlap) * width / 2
        diam = max(_arc_diameter(space, c - half, c + half) for c in centres)
        return PointedPartition(space, peaks, float(overlap), diam, dirs, half)
    if space.dim == 3:
        dirs = fibonacci_sphere(sectors)
        sep = np.linalg.norm(dirs[:, None, :] - dirs[None, :, :], axis=2)
        np.fill_diagonal(sep, np.inf)
        radius = float(sep.min())
        peaks = dirs / dual.norm(dirs)[:, None]
        alpha = PointedPartition(space, peaks, float(overlap), 0.0, dirs, radius)
        # grid-verified: support of hat i is a Euclidean cap of the given radius
        probe = euclidean_directions(3, 20000)
        alpha.hats(probe)
        diam = 0.0
        for i in range(sectors):
            cap = probe[np.linalg.norm(probe - dirs[i], axis=1) <= radius]
            if len(cap) > 1:
                cap = cap / dual.norm(cap)[:, None]
                diam = max(diam, float(dual.norm(cap[:, None, :] - cap[None, :, :]).max()))
        object.__setattr__(alpha, "diam", diam)
        return alpha
    raise ValidationError("pointed partitions are built for dimension 2 or 3 only")


class FiniteRankImage:
    """``P_alpha f``, extended positively homogeneously from the dual sphere."""

    def __init__(self, alpha: PointedPartition, coefficients: np.ndarray):
        self.alpha = alpha
        self.space = alpha.space
        self.coefficients = np.asarray(coefficients, dtype=float)

    def evaluate(self, X):
        X = as_vector(X, self.space.dim)
        shape = X.shape[:-1]
        flat = X.reshape(-1, self.space.dim)
        r = self.space.dual().norm(flat)
        vals = np.zeros(len(flat))
        nz = r > 0
        if np.any(nz):
            vals[nz] = r[nz] * (self.alpha.hats(flat[nz]) @ self.coefficients)
        out = vals.reshape(shape)
        return float(out) if out.ndim == 0 else out

    __call__ = evaluate

    def lipschitz(self) -> float | None:
        return None


def _values(f, X):
    return np.asarray(f.evaluate(X) if hasattr(f, "evaluate") else f(X), dtype=float)


def apply_P(alpha: PointedPartition, f) -> FiniteRankImage:
    """The finite-rank image ``x* -> sum_i f(x_i*) f_i(x*)``."""
    return FiniteRankImage(alpha, _values(f, alpha.peaks))


def sup_on_grid(func, space: NormedSpace, grid: int = 4096, seed: int = 0) -> float:
    """``max |func|`` over a dual-sphere grid."""
    X = sample_sphere(space.dual(), grid, seed)
    return float(np.abs(_values(func, X)).max())


def approximation_error(alpha: PointedPartition, g, grid: int = 4096, seed: int = 0) -> float:
    """``max |P_alpha g - g|`` on a dual-sphere grid (peaks included)."""
    X = np.vstack([sample_sphere(alpha.space.dual(), grid, seed), alpha.peaks])
    return float(np.abs(_values(apply_P(alpha, g), X) - _values(g, X)).max())


def verify_pap_bound(alpha: PointedPartition, spec: ControllingFamilySpec, f, p: float,
                     grid: int = 720, seed: int = 0) -> dict:
    """Compare ``||P_alpha f|| / ||f||`` in FBL^(p)[E] with ``1 + omega(diam) / c``.

    Both norms use the same estimator on the same grids (grid LP for finite
    ``p``, refined uniform norm for ``p = inf``).  ``excess`` is
    ``|measured - 1|``: how far ``P_alpha`` moves the norm of ``f``.
    """
    from .fblnorm import fbl_p_upper_lp
    from .fvl import sup_norm_on_dual_ball

    p = float(p)
    image = apply_P(alpha, f)
    if math.isinf(p):
        ref = sup_norm_on_dual_ball(f, grid=max(grid, 8), seed=seed).lower
        img = sup_on_grid(image, alpha.space, grid=max(grid, 8) * 4, seed=seed)
        img = max(img, float(np.abs(image.coefficients).max()) if len(image.coefficients) else 0.0)
    else:
        ref = fbl_p_upper_lp(f, p, grid, grid, seed, rule="dantzig").upper
        img = fbl_p_upper_lp(image, p, grid, grid, seed, rule="dantzig").upper
    omega = modulus(spec, alpha.diam)
    bound = 1.0 + omega / spec.constant(alpha.space)
    measured = img / ref if ref > 0 else 0.0
    return {
        "sectors": len(alpha),
        "diam": alpha.diam,
        "omega": omega,
        "bound": bound,
        "measured": measured,
        "excess": abs(measured - 1.0),
        "norm_f": ref,
        "norm_Pf": img,
        "p": p if math.isfinite(p) else "inf",
        "grid": grid,
    }
