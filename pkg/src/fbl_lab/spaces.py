"""Finite-dimensional normed spaces, their duals, and unit-sphere sampling.

Three families are supported, all on ``R^n`` with coordinatewise pairing:

* ``lq``          -- the usual l_q norm, ``1 <= q <= inf``;
* ``lorentzweak`` -- weak l_p (the l_{p,inf} Banach norm)
  ``max_k k^(1/p - 1) * (sum of the k largest |x_i|)``;
* ``lorentzl1``   -- Lorentz l_{r,1}, ``sum_i (i^(1/r) - (i-1)^(1/r)) x*_i``
  with ``x*`` the decreasing rearrangement of ``|x|``.

``lorentzweak(p)`` and ``lorentzl1(p')`` are dual to each other.

Every norm routine accepts arrays of shape ``(..., n)`` and reduces over the
last axis, so whole grids of vectors are normed in one call.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import ValidationError

KINDS = ("lq", "lorentzweak", "lorentzl1")

# Cap on how many extreme points of a unit ball we are willing to list.
MAX_EXTREME_POINTS = 50_000


def conjugate(p: float) -> float:
    """Hoelder conjugate ``p' = p / (p - 1)`` with ``1' = inf`` and ``inf' = 1``."""
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def as_vector(x, dim: int | None = None) -> np.ndarray:
    """Convert ``x`` to a float array, checking finiteness and trailing dimension."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        raise ValidationError("expected a vector, got a scalar")
    if not np.all(np.isfinite(arr)):
        raise ValidationError("vector has non-finite entries")
    if dim is not None and arr.shape[-1] != dim:
        raise ValidationError(f"dimension mismatch: expected {dim}, got {arr.shape[-1]}")
    return arr


def _sorted_abs_desc(x: np.ndarray) -> np.ndarray:
    return -np.sort(-np.abs(x), axis=-1)


@dataclass(frozen=True)
class NormedSpace:
    """An n-dimensional normed space of one of the supported kinds.

    ``param`` is ``q`` for ``lq``, ``p`` for ``lorentzweak`` and ``r`` for
    ``lorentzl1``.
    """

    kind: str
    param: float
    dim: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown space kind {self.kind!r}")
        if not isinstance(self.dim, (int, np.integer)) or self.dim < 1:
            raise ValidationError(f"dimension must be a positive integer, got {self.dim!r}")
        p = float(self.param)
        if math.isnan(p):
            raise ValidationError("space parameter is NaN")
        if self.kind == "lq":
            if p < 1:
                raise ValidationError(f"lq needs q in [1, inf], got {p}")
        elif not (1 < p < math.inf):
            raise ValidationError(f"{self.kind} needs a parameter in (1, inf), got {p}")
        object.__setattr__(self, "param", p)
        object.__setattr__(self, "dim", int(self.dim))

    # -- constructors -----------------------------------------------------

    @classmethod
    def lq(cls, q: float, dim: int) -> "NormedSpace":
        return cls("lq", q, dim)

    @classmethod
    def lorentz_weak(cls, p: float, dim: int) -> "NormedSpace":
        return cls("lorentzweak", p, dim)

    @classmethod
    def lorentz_l1(cls, r: float, dim: int) -> "NormedSpace":
        return cls("lorentzl1", r, dim)

    @classmethod
    def parse(cls, text: str) -> "NormedSpace":
        """Parse the command-line shorthand.

        Accepted forms: ``l1:4``, ``l2:3``, ``linf:2``, ``lq:1.5:3``,
        ``lorentzweak:2:4``, ``lorentzl1:2:4``.
        """
        parts = text.strip().lower().split(":")
        try:
            if len(parts) == 2 and parts[0].startswith("l") and parts[0] not in KINDS:
                head = parts[0][1:]
                q = math.inf if head == "inf" else float(head)
                return cls("lq", q, int(parts[1]))
            if len(parts) == 3 and parts[0] in KINDS:
                param = math.inf if parts[1] == "inf" else float(parts[1])
                return cls(parts[0], param, int(parts[2]))
        except ValueError as exc:
            raise ValidationError(f"cannot parse space {text!r}: {exc}") from None
        raise ValidationError(f"cannot parse space {text!r}")

    @classmethod
    def from_json(cls, obj: dict) -> "NormedSpace":
        try:
            param = obj["param"]
            if isinstance(param, str):
                param = math.inf if param.lower() in ("inf", "infinity") else float(param)
            return cls(obj["kind"], param, int(obj["dim"]))
        except (KeyError, TypeError) as exc:
            raise ValidationError(f"malformed space object: {obj!r}") from exc

    def to_json(self) -> dict:
        param = "inf" if math.isinf(self.param) else self.param
        return {"kind": self.kind, "param": param, "dim": self.dim}

    def __str__(self):
        param = "inf" if math.isinf(self.param) else f"{self.param:g}"
        return f"{self.kind}:{param}:{self.dim}"

    # -- duality ----------------------------------------------------------

    def dual(self) -> "NormedSpace":
        if self.kind == "lq":
            return NormedSpace("lq", conjugate(self.param), self.dim)
        if self.kind == "lorentzweak":
            return NormedSpace("lorentzl1", conjugate(self.param), self.dim)
        return NormedSpace("lorentzweak", conjugate(self.param), self.dim)

    # -- norms ------------------------------------------------------------

    def norm(self, x) -> np.ndarray | float:
        """Norm of ``x`` (or of every row of a stacked array)."""
        x = as_vector(x, self.dim)
        out = self._norm(x)
        return float(out) if np.ndim(out) == 0 else out

    def dual_norm(self, xstar) -> np.ndarray | float:
        return self.dual().norm(xstar)

    def _norm(self, x: np.ndarray) -> np.ndarray:
        if self.kind == "lq":
            q = self.param
            a = np.abs(x)
            if q == 1:
                return a.sum(axis=-1)
            if math.isinf(q):
                return a.max(axis=-1)
            if q == 2:
                return np.sqrt((a * a).sum(axis=-1))
            # scale first so large entries do not overflow a**q
            m = a.max(axis=-1, keepdims=True)
            safe = np.where(m > 0, m, 1.0)
            return np.squeeze(safe, -1) * ((a / safe) ** q).sum(axis=-1) ** (1.0 / q)
        s = _sorted_abs_desc(x)
        return (s * self._lorentz_weights).sum(axis=-1) if self.kind == "lorentzl1" \
            else (np.cumsum(s, axis=-1) * self._weak_factors).max(axis=-1)

    @cached_property
    def _lorentz_weights(self) -> np.ndarray:
        i = np.arange(1, self.dim + 1, dtype=float)
        e = 1.0 / self.param
        return i**e - (i - 1) ** e

    @cached_property
    def _weak_factors(self) -> np.ndarray:
        k = np.arange(1, self.dim + 1, dtype=float)
        return k ** (1.0 / self.param - 1.0)

    # -- geometry ---------------------------------------------------------

    def norming_vectors(self, Y) -> np.ndarray:
        """For each row ``y`` of ``Y`` (a dual vector) some ``e`` with
        ``||e|| <= 1`` and ``<y, e> = ||y||_*``.  Zero rows map to zero."""
        Y = np.atleast_2d(as_vector(Y, self.dim))
        a, sg = np.abs(Y), np.where(Y < 0, -1.0, 1.0)
        rows = np.arange(len(Y))
        if self.kind == "lq":
            q = self.param
            if q == 1:
                out = np.zeros_like(Y)
                k = a.argmax(axis=1)
                out[rows, k] = sg[rows, k]
            elif math.isinf(q):
                out = sg.copy()
            else:
                r = conjugate(q)
                m = a.max(axis=1, keepdims=True)
                safe = np.where(m > 0, m, 1.0)
                w = (a / safe) ** (r - 1.0)
                out = sg * w / np.maximum(self.norm(w), 1e-300)[:, None]
        else:
            order = np.argsort(-a, axis=1, kind="stable")
            srt = np.take_along_axis(a, order, axis=1)
            k = np.arange(1, self.dim + 1, dtype=float)
            if self.kind == "lorentzweak":
                # signed rearrangement of the increments of k -> k^(1 - 1/p)
                e = 1.0 - 1.0 / self.param
                vals = np.broadcast_to(k**e - (k - 1) ** e, srt.shape)
            else:
                # normalized indicator of the best leading block
                best = (np.cumsum(srt, axis=1) * k ** (-1.0 / self.param)).argmax(axis=1)
                vals = np.where(k[None, :] <= best[:, None] + 1, 1.0, 0.0)
                vals = vals / (best[:, None] + 1.0) ** (1.0 / self.param)
            out = np.empty_like(Y)
            np.put_along_axis(out, order, vals, axis=1)
            out *= sg
        out[np.all(Y == 0, axis=1)] = 0.0
        return out


    def extreme_points(self) -> np.ndarray | None:
        """All extreme points of the closed unit ball, or ``None``.

        Available for the polyhedral balls (l_1, l_inf and both Lorentz
        kinds) when their number stays below ``MAX_EXTREME_POINTS``.  The
        supremum of a convex function over the ball is a maximum over these
        points, which is how weak-p norms are computed exactly.
        """
        n = self.dim
        if self.kind == "lq" and self.param == 1:
            eye = np.eye(n)
            return np.vstack([eye, -eye])
        if self.kind == "lq" and math.isinf(self.param):
            if 2**n > MAX_EXTREME_POINTS:
                return None
            return np.array(list(itertools.product((1.0, -1.0), repeat=n)))
        if self.kind == "lorentzl1":
            if 3**n - 1 > MAX_EXTREME_POINTS:
                return None
            pts = [v for v in itertools.product((0.0, 1.0, -1.0), repeat=n) if any(v)]
            pts = np.array(pts)
            size = np.count_nonzero(pts, axis=1).astype(float)
            return pts / size[:, None] ** (1.0 / self.param)
        if self.kind == "lorentzweak":
            if 2**n * math.factorial(n) > MAX_EXTREME_POINTS:
                return None
            # signed permutations of the increments of k -> k^(1 - 1/p)
            k = np.arange(1, n + 1, dtype=float)
            e = 1.0 - 1.0 / self.param
            d = k**e - (k - 1) ** e
            perms = np.array(list(itertools.permutations(range(n))))
            base = d[np.argsort(perms, axis=1)]
            signs = np.array(list(itertools.product((1.0, -1.0), repeat=n)))
            return (base[:, None, :] * signs[None, :, :]).reshape(-1, n)
        return None


def norm(space: NormedSpace, x) -> float:
    """Norm of a single vector in ``space``."""
    return float(space.norm(as_vector(x, space.dim)))


def dual_norm(space: NormedSpace, xstar) -> float:
    """Norm of ``xstar`` in the dual of ``space``."""
    return float(space.dual().norm(as_vector(xstar, space.dim)))


def quasi_norm_pinfty(p: float, x) -> float | np.ndarray:
    """Weak-l_p quasi-norm ``sup_t t * #{i : |x_i| > t}^(1/p)``.

    Equals ``max_k x*_k * k^(1/p)``.  It is equivalent to the Banach norm of
    ``lorentzweak(p)`` up to a constant depending on ``p`` only; the constant
    is never assumed here.
    """
    p = float(p)
    if not (1 < p < math.inf):
        raise ValidationError(f"p must lie in (1, inf), got {p}")
    x = as_vector(x)
    s = _sorted_abs_desc(x)
    k = np.arange(1, s.shape[-1] + 1, dtype=float)
    out = (s * k ** (1.0 / p)).max(axis=-1)
    return float(out) if np.ndim(out) == 0 else out


def _halton_directions(dim: int, count: int, seed: int) -> np.ndarray:
    from scipy.stats import norm as gauss
    from scipy.stats import qmc

    u = qmc.Halton(d=dim, scramble=True, seed=seed).random(count)
    u = np.clip(u, 1e-12, 1 - 1e-12)
    return gauss.ppf(u)


def fibonacci_sphere(count: int) -> np.ndarray:
    """Fibonacci lattice on the Euclidean 2-sphere in R^3."""
    i = np.arange(count, dtype=float)
    z = 1.0 - (2.0 * i + 1.0) / count
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = i * math.pi * (3.0 - math.sqrt(5.0))
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def euclidean_directions(dim: int, count: int, seed: int = 0) -> np.ndarray:
    """Deterministic directions: equiangular (n=2), Fibonacci (n=3), Halton (n>=4)."""
    if dim == 1:
        return np.array([[1.0], [-1.0]] * ((count + 1) // 2))[:count]
    if dim == 2:
        t = 2.0 * math.pi * np.arange(count) / count
        return np.column_stack([np.cos(t), np.sin(t)])
    if dim == 3:
        return fibonacci_sphere(count)
    return _halton_directions(dim, count, seed)


def sample_sphere(space: NormedSpace, count: int, seed: int = 0) -> np.ndarray:
    """``count`` points of norm one in ``space``, as a ``(count, n)`` array.

    Directions come from :func:`euclidean_directions` and are renormalized
    in the norm of ``space``; the result depends only on the arguments.
    """
    if count < 1:
        raise ValidationError("count must be at least 1")
    d = euclidean_directions(space.dim, int(count), int(seed))
    return d / space.norm(d)[:, None]
