"""Free-vector-lattice elements as expression trees over generators.

A :class:`LatticeExpr` is a positively homogeneous function on ``E*`` built
from generators ``delta_e : x* -> <x*, e>`` with linear operations, moduli,
finite maxima/minima and p-sums ``(sum_i |f_i|^p)^(1/p)`` (``p = inf`` gives
``max_i |f_i|``).  Evaluation is vectorized: ``f.evaluate(X)`` accepts an
array of dual vectors of shape ``(..., n)``.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ValidationError
from .estimate import NormEstimate
from .spaces import NormedSpace, as_vector, euclidean_directions

OPS = ("delta", "scale", "sum", "abs", "max", "min", "psum")


@dataclass(frozen=True, eq=False)
class LatticeExpr:
    op: str
    space: NormedSpace
    args: tuple = ()
    e: tuple | None = None
    c: float | None = None
    p: float | None = None

    def __post_init__(self):
        if self.op not in OPS:
            raise ValidationError(f"unknown lattice operation {self.op!r}")
        for a in self.args:
            if not isinstance(a, LatticeExpr):
                raise ValidationError("children must be LatticeExpr instances")
            if a.space != self.space:
                raise ValidationError(f"cannot combine expressions over {a.space} and {self.space}")
        if self.op == "delta":
            vec = as_vector(self.e, self.space.dim)
            if vec.ndim != 1:
                raise ValidationError("generator must be a single vector")
            object.__setattr__(self, "e", tuple(float(v) for v in vec))
        elif self.op in ("scale", "abs") and len(self.args) != 1:
            raise ValidationError(f"{self.op} takes exactly one child")
        elif self.op in ("sum", "max", "min", "psum") and not self.args:
            raise ValidationError(f"{self.op} needs at least one child")
        if self.op == "scale" and not math.isfinite(float(self.c)):
            raise ValidationError("scale factor must be finite")
        if self.op == "psum":
            p = float(self.p)
            if not p >= 1:
                raise ValidationError(f"psum exponent must lie in [1, inf], got {self.p}")
            object.__setattr__(self, "p", p)

    # -- evaluation -------------------------------------------------------

    def evaluate(self, xstar) -> np.ndarray | float:
        """Value at ``xstar`` (a dual vector or a stack of them)."""
        X = as_vector(xstar, self.space.dim)
        with np.errstate(over="ignore", invalid="ignore"):
            out = self._eval(X)
        if not np.all(np.isfinite(out)):
            raise NumericalError("expression evaluated to a non-finite value")
        return float(out) if np.ndim(out) == 0 else out

    __call__ = evaluate

    def _eval(self, X: np.ndarray) -> np.ndarray:
        op = self.op
        if op == "delta":
            return X @ np.asarray(self.e)
        vals = [a._eval(X) for a in self.args]
        if op == "scale":
            return self.c * vals[0]
        if op == "sum":
            return np.sum(vals, axis=0)
        if op == "abs":
            return np.abs(vals[0])
        if op == "max":
            return np.max(vals, axis=0)
        if op == "min":
            return np.min(vals, axis=0)
        a = np.abs(np.asarray(vals))
        if math.isinf(self.p):
            return a.max(axis=0)
        if self.p == 1:
            return a.sum(axis=0)
        m = a.max(axis=0)
        safe = np.where(m > 0, m, 1.0)
        return safe * ((a / safe) ** self.p).sum(axis=0) ** (1.0 / self.p)

    def lipschitz(self) -> float:
        """A Lipschitz constant of ``x* -> f(x*)`` with respect to the dual norm."""
        op = self.op
        if op == "delta":
            return float(self.space.norm(np.asarray(self.e)))
        ls = [a.lipschitz() for a in self.args]
        if op == "scale":
            return abs(self.c) * ls[0]
        if op == "sum":
            return float(sum(ls))
        if op in ("abs", "max", "min"):
            return max(ls)
        if math.isinf(self.p):
            return max(ls)
        return float(np.sum(np.asarray(ls) ** self.p) ** (1.0 / self.p))

    def generators(self) -> list[np.ndarray]:
        if self.op == "delta":
            return [np.asarray(self.e)]
        return [g for a in self.args for g in a.generators()]

    # -- operator sugar ---------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(-1.0, other))

    def __neg__(self):
        return scale(-1.0, self)

    def __mul__(self, c):
        return scale(c, self)

    __rmul__ = __mul__

    def __abs__(self):
        return absval(self)

    def __or__(self, other):
        return vmax(self, other)

    def __and__(self, other):
        return vmin(self, other)

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        if self.op == "delta":
            return {"op": "delta", "e": list(self.e)}
        obj = {"op": self.op, "args": [a.to_json() for a in self.args]}
        if self.op == "scale":
            obj["c"] = self.c
        if self.op == "psum":
            obj["p"] = "inf" if math.isinf(self.p) else self.p
        return obj

    @classmethod
    def from_json(cls, obj, space: NormedSpace) -> "LatticeExpr":
        if isinstance(obj, str):
            try:
                obj = json.loads(obj)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"malformed expression JSON: {exc}") from None
        if not isinstance(obj, dict) or "op" not in obj:
            raise ValidationError(f"expression node must be an object with 'op': {obj!r}")
        op = obj["op"]
        if op == "delta":
            if "e" not in obj:
                raise ValidationError("delta node needs 'e'")
            return cls("delta", space, e=obj["e"])
        args = obj.get("args")
        if args is None and "arg" in obj:
            args = [obj["arg"]]
        if not isinstance(args, list):
            raise ValidationError(f"{op} node needs an 'args' list")
        kids = tuple(cls.from_json(a, space) for a in args)
        if op == "scale":
            return cls("scale", space, kids, c=float(obj.get("c", 1.0)))
        if op == "psum":
            p = obj.get("p")
            if isinstance(p, str) and p.lower() in ("inf", "infinity"):
                p = math.inf
            if p is None:
                raise ValidationError("psum node needs 'p'")
            return cls("psum", space, kids, p=float(p))
        return cls(op, space, kids)


# -- constructors ------------------------------------------------------------


def delta(space: NormedSpace, e) -> LatticeExpr:
    return LatticeExpr("delta", space, e=e)


def scale(c: float, f: LatticeExpr) -> LatticeExpr:
    return LatticeExpr("scale", f.space, (f,), c=float(c))


def add(*fs: LatticeExpr) -> LatticeExpr:
    return LatticeExpr("sum", fs[0].space, tuple(fs))


def absval(f: LatticeExpr) -> LatticeExpr:
    return LatticeExpr("abs", f.space, (f,))


def vmax(*fs: LatticeExpr) -> LatticeExpr:
    return LatticeExpr("max", fs[0].space, tuple(fs))


def vmin(*fs: LatticeExpr) -> LatticeExpr:
    return LatticeExpr("min", fs[0].space, tuple(fs))


def psum(p: float, fs) -> LatticeExpr:
    fs = tuple(fs)
    return LatticeExpr("psum", fs[0].space, fs, p=p)


def psum_of_generators(space: NormedSpace, p: float, vectors) -> LatticeExpr:
    """``(sum_i |delta_{e_i}|^p)^(1/p)``, or ``max_i |delta_{e_i}|`` for p = inf."""
    return psum(p, [delta(space, v) for v in np.atleast_2d(vectors)])


def zero(space: NormedSpace) -> LatticeExpr:
    return delta(space, np.zeros(space.dim))


def evaluate(f, xstar):
    """Evaluate a lattice expression, or any object with an ``evaluate`` method."""
    return f.evaluate(xstar)


def random_expression(space: NormedSpace, rng: np.random.Generator, depth: int = 3,
                      n_generators: int = 4) -> LatticeExpr:
    """A random tree of depth at most ``depth`` over at most ``n_generators`` generators.

    Generators and scale factors are drawn from unit balls, which keeps the
    results in a range where the estimators are reliable.
    """
    k = int(rng.integers(1, n_generators + 1))
    gens = []
    for _ in range(k):
        v = rng.normal(size=space.dim)
        v *= rng.uniform(0.2, 1.0) / space.norm(v)
        gens.append(delta(space, v))

    def build(level):
        # the root is always an operation so trivial single-generator trees are rare
        if level == 0 or (level < depth and rng.random() < 0.25):
            return gens[int(rng.integers(k))]
        choice = int(rng.integers(6))
        if choice == 0:
            return scale(rng.uniform(-1, 1), build(level - 1))
        if choice == 1:
            return absval(build(level - 1))
        kids = [build(level - 1) for _ in range(int(rng.integers(2, 4)))]
        if choice == 2:
            return add(*kids)
        if choice == 3:
            return vmax(*kids)
        if choice == 4:
            return vmin(*kids)
        return psum(float(rng.choice([1.0, 2.0, 3.0, math.inf])), kids)

    return build(depth)


# -- uniform norm -------------------------------------------------------------


def _covering_radius(points: np.ndarray, dual: NormedSpace) -> float:
    if dual.dim == 2:
        nxt = np.roll(points, -1, axis=0)
        return float(dual.norm(points - nxt).max())
    # nearest-neighbour spacing on a subsample; heuristic for n >= 3
    sub = points[:: max(1, len(points) // 512)]
    d = dual.norm(sub[:, None, :] - points[None, :, :])
    d[d == 0] = np.inf
    return float(d.min(axis=1).max())


def sup_norm_on_dual_ball(f, grid: int = 2048, seed: int = 0, refine: int = 4) -> NormEstimate:
    """Estimate ``||f||_inf = sup { |f(x*)| : ||x*|| <= 1 }``.

    ``lower`` is the best sampled value after local refinement and is a
    valid lower bound.  ``upper`` adds ``Lip(f) * covering radius`` to the
    raw grid maximum; the covering radius is exact for n = 2 and estimated
    for n >= 3, so the upper side is flagged non-rigorous.
    """
    from .solver import AscentConfig, maximize_ratio

    if grid < 8:
        raise ValidationError("grid must be at least 8")
    dual = f.space.dual()
    pts = euclidean_directions(dual.dim, grid, seed)
    pts = pts / dual.norm(pts)[:, None]
    vals = np.abs(np.asarray(f.evaluate(pts)))
    grid_max = float(vals.max())
    lower, arg = grid_max, pts[int(vals.argmax())]
    iters = 0
    if grid_max > 0 and refine > 0:
        top = np.argsort(-vals)[:refine]
        cfg = AscentConfig(starts=0, max_iters=60, seed=seed)
        val, x = maximize_ratio(
            lambda X: np.abs(f.evaluate(X)), dual.norm, dual.dim, cfg,
            starts=pts[top], vectorized=True,
        )
        iters = cfg.max_iters
        if val > lower:
            lower, arg = val, x
    lip = f.lipschitz() if hasattr(f, "lipschitz") else None
    if lip is None:
        upper = None
    else:
        upper = max(lower, grid_max + lip * _covering_radius(pts, dual))
    slack = 0.0 if not upper or lower == 0 else upper / lower - 1.0
    return NormEstimate(
        lower, upper, "sup-grid",
        {"seed": seed, "grid": [grid], "iterations": iters, "slack": slack,
         "rigorous": False, "argmax": [float(v) for v in arg]},
    )
