"""Norms of finite sums of atoms in the duals of free Banach lattices.

An atom of FBL^(p)[E]* is the lattice-homomorphic extension ``x^`` of some
``x* in E*``, acting by ``<x^, f> = f(x*)``.  For ``psi = sum_j x_j^``:

* in FBL^(p)[E]*, ``||psi||`` is the supremum of
  ``(sum_i ||sum_j a_ij x_j*||^{p'})^{1/p'}`` over matrices whose columns lie
  in the unit ball of l_{p'}; it equals ``sum_j ||x_j*||`` for ``p = inf`` and
  ``max_signs ||sum_j +-x_j*||`` for ``p = 1``;
* in the dual of the free lattice with upper p-estimate, ``||psi||`` lies in
  ``[L, K_p L]`` where ``L`` maximizes ``(sum_k max_signs ||sum_{S_k} +-x_j*||^{p'})^{1/p'}``
  over set partitions ``{S_k}``.  ``K_p`` has no known numeric value and is
  kept symbolic.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .estimate import NormEstimate
from .partitions import restricted_growth_strings
from .solver import AscentConfig
from .spaces import NormedSpace, as_vector, conjugate

SIGN_ENUMERATION_LIMIT = 24
_CHUNK = 1 << 16


@dataclass(frozen=True)
class AtomCombination:
    """``sum_j x_j^`` for dual vectors ``x_j*`` (rows of ``atoms``)."""

    space: NormedSpace
    atoms: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        a = np.atleast_2d(as_vector(self.atoms, self.space.dim))
        if a.shape[0] == 0:
            raise ValidationError("an atom combination needs at least one atom")
        object.__setattr__(self, "atoms", a)

    @classmethod
    def basis(cls, space: NormedSpace) -> "AtomCombination":
        """The canonical basis of ``E*``."""
        return cls(space, np.eye(space.dim))

    def __len__(self):
        return self.atoms.shape[0]

    def to_json(self) -> dict:
        return {"space": self.space.to_json(), "atoms": self.atoms.tolist()}


@dataclass(frozen=True)
class PartitionValue:
    value: float
    best_partition: list
    best_signs: list
    heuristic: bool = False

    def to_json(self) -> dict:
        return {
            "value": self.value,
            "bounds": {"lower": self.value, "upper": "K_p * %r" % self.value},
            "best_partition": self.best_partition,
            "best_signs": self.best_signs,
            "heuristic": self.heuristic,
        }


# -- sign maxima -------------------------------------------------------------------


def _sign_patterns(N: int, start: int, stop: int) -> np.ndarray:
    """Rows ``start..stop-1`` of the 2^(N-1) sign patterns with first sign +."""
    idx = np.arange(start, stop, dtype=np.int64)[:, None]
    bits = (idx >> np.arange(N - 1, dtype=np.int64)[None, :]) & 1
    return np.hstack([np.ones((len(idx), 1)), 1.0 - 2.0 * bits])


def _sign_local_search(X: np.ndarray, dual: NormedSpace, seed: int, restarts: int = 16):
    rng = np.random.default_rng([seed, 17])
    N = len(X)
    best_v, best_s = -1.0, None
    for r in range(restarts):
        s = np.ones(N) if r == 0 else rng.choice([-1.0, 1.0], size=N)
        s[0] = 1.0
        v = float(dual.norm(s @ X))
        improved = True
        while improved:
            improved = False
            flips = np.repeat(s[None], N, axis=0)
            flips[np.arange(N), np.arange(N)] *= -1
            vals = dual.norm(flips @ X)
            j = int(np.argmax(vals))
            if vals[j] > v * (1 + 1e-13):
                s, v, improved = flips[j], float(vals[j]), True
        if s[0] < 0:
            s = -s
        if v > best_v:
            best_v, best_s = v, s
    return best_v, best_s


def sign_maximum(X: np.ndarray, space: NormedSpace, seed: int = 0):
    """``max over signs of ||sum_j +-x_j*||`` in ``E*``.

    Exact when either the 2^(N-1) sign patterns (N <= 24) or the extreme
    points of the unit ball of ``E`` can be enumerated, using
    ``max_signs ||sum +-x_j*|| = sup_{e in B(E)} sum_j |<x_j*, e>|``.
    Returns ``(value, signs, exact)``.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    N = len(X)
    dual = space.dual()
    if N == 1:
        return float(dual.norm(X[0])), np.ones(1), True
    ext = space.extreme_points()
    if ext is not None and len(ext) < 2 ** (N - 1):
        vals = np.abs(ext @ X.T)
        k = int(vals.sum(axis=1).argmax())
        s = np.sign(ext[k] @ X.T)
        s[s == 0] = 1.0
        s = s * s[0]
        return float(vals[k].sum()), s, True
    if N <= SIGN_ENUMERATION_LIMIT:
        total = 2 ** (N - 1)
        best_v, best_s = -1.0, None
        for start in range(0, total, _CHUNK):
            S = _sign_patterns(N, start, min(total, start + _CHUNK))
            vals = dual.norm(S @ X)
            k = int(vals.argmax())
            if vals[k] > best_v:
                best_v, best_s = float(vals[k]), S[k]
        return best_v, best_s, True
    v, s = _sign_local_search(X, dual, seed)
    return v, s, False


# -- FBL^(p) atom norms ------------------------------------------------------------


def _matrix_value(A, X, dual, q):
    """Objective at a matrix whose columns have l_q norm at most 1."""
    return float((dual.norm(A @ X) ** q).sum() ** (1.0 / q))


def _alternating(A, X, space, p, q, iters: int = 500, tol: float = 1e-13):
    """Block ascent on ``sum_j (sum_i |b_i <x_j*, e_i>|^p)^(1/p)``.

    With the rows ``y_i = sum_j a_ij x_j*`` fixed, the best ``e_i`` are
    norming vectors of ``y_i`` and the best ``b`` norms ``(||y_i||)`` in
    l_q; with ``c_ij = b_i <x_j*, e_i>`` fixed, the best column ``a_j`` norms
    ``c_j`` in l_p.  Both steps are exact, so the value never decreases.
    """
    dual = space.dual()
    A = A / np.maximum((np.abs(A) ** q).sum(axis=0) ** (1.0 / q), 1e-300)
    val = _matrix_value(A, X, dual, q)
    for _ in range(iters):
        Y = A @ X
        t = dual.norm(Y)
        if not np.any(t > 0):
            break
        b = (t / t.max()) ** (q - 1.0)
        b /= (b**p).sum() ** (1.0 / p)
        C = b[:, None] * (space.norming_vectors(Y) @ X.T)          # (m, N)
        mag = np.abs(C)
        cn = (mag**p).sum(axis=0) ** (1.0 / p)
        live = cn > 0
        new = A.copy()
        new[:, live] = np.sign(C[:, live]) * (mag[:, live] / cn[live]) ** (p - 1.0)
        nv = _matrix_value(new, X, dual, q)
        if nv <= val * (1 + tol):
            if nv > val:
                A, val = new, nv
            break
        A, val = new, nv
    return val, A


def atom_norm_fbl_p(c: AtomCombination, p: float, config: AscentConfig | None = None,
                    m_cap: int | None = None) -> NormEstimate:
    """Norm of ``sum_j x_j^`` in the dual of FBL^(p)[E].

    Closed forms for ``p = inf`` and ``p = 1``.  For ``1 < p < inf`` the
    supremum over ``m_cap x N`` matrices (default ``m_cap = N``) is
    approached by alternating block maximization from the best sign row,
    the identity and ``config.starts`` random matrices.  ``lower`` is the
    value of the best matrix found, ``upper`` the ``p = inf`` value
    ``sum_j ||x_j*||``, which always dominates.
    """
    p = float(p)
    if not p >= 1:
        raise ValidationError(f"p must lie in [1, inf], got {p}")
    config = config or AscentConfig()
    X = c.atoms
    N, n = X.shape
    dual = c.space.dual()
    total = float(dual.norm(X).sum())
    if math.isinf(p):
        return NormEstimate(total, total, "closed-form-inf", {"N": N})
    sv, signs, exact = sign_maximum(X, c.space, config.seed)
    if p == 1:
        return NormEstimate(sv, sv if exact else None, "sign-enumeration" if exact else "sign-search",
                            {"N": N, "signs": signs.tolist(), "exact": exact})
    q = conjugate(p)
    m = int(m_cap or N)
    if m < 1:
        raise ValidationError("m_cap must be positive")
    starts = []
    a = np.zeros((m, N))
    a[0] = signs
    starts.append(a)
    a = np.zeros((m, N))
    a[np.arange(N) % m, np.arange(N)] = 1.0
    starts.append(a)
    for i in range(config.starts):
        starts.append(np.random.default_rng([config.seed, i]).normal(size=(m, N)))
    best = sv
    for A0 in starts:
        val, _ = _alternating(A0, X, c.space, p, q, iters=config.max_iters)
        best = max(best, val)
    return NormEstimate(min(best, total), total, "alternating-ascent",
                        {"N": N, "m_cap": m, "seed": config.seed, "starts": len(starts),
                         "iterations": config.max_iters})


# -- upper p-estimate atom norms ---------------------------------------------------


def _block_table(X: np.ndarray, space: NormedSpace, seed: int):
    """Sign maxima for every nonempty subset, indexed by bitmask."""
    N = len(X)
    vals = np.zeros(1 << N)
    signs: list = [None] * (1 << N)
    for mask in range(1, 1 << N):
        idx = [j for j in range(N) if mask >> j & 1]
        v, s, _ = sign_maximum(X[idx], space, seed)
        vals[mask] = v
        signs[mask] = s
    return vals, signs


def _partition_objective(values, q):
    v = np.asarray(values, dtype=float)
    return float(np.sum(v**q) ** (1.0 / q))


def _exact_partition(X, space, q, seed):
    N = len(X)
    vals, signs = _block_table(X, space, seed)
    powered = vals**q
    best, best_a = -1.0, None
    for a in restricted_growth_strings(N):
        masks = {}
        for j, k in enumerate(a):
            masks[k] = masks.get(k, 0) | (1 << j)
        s = sum(powered[mk] for mk in masks.values())
        if s > best * (1 + 1e-12):
            best, best_a = s, list(a)
    blocks: dict = {}
    for j, k in enumerate(best_a):
        blocks.setdefault(k, []).append(j)
    part = [blocks[k] for k in sorted(blocks)]
    sg = [signs[sum(1 << j for j in b)].tolist() for b in part]
    return best ** (1.0 / q), part, sg


def _greedy_partition(X, space, q, seed, rounds: int = 3):
    """Greedy insertion followed by single-element moves.

    Each block carries a signed sum; its value is the dual norm of that sum,
    which is one admissible sign choice, so the objective never overstates
    the partition supremum.  Blocks are re-signed exactly where affordable.
    """
    dual = space.dual()
    N = len(X)
    sums: list[np.ndarray] = []
    members: list[list[int]] = []
    sgn: list[list[float]] = []
    for j in range(N):
        x = X[j]
        own = float(dual.norm(x)) ** q
        if sums:
            S = np.array(sums)
            cur = dual.norm(S) ** q
            plus, minus = dual.norm(S + x) ** q, dual.norm(S - x) ** q
            gains = np.maximum(plus, minus) - cur
            k = int(np.argmax(gains))
            tol = 1e-12 * max(1.0, abs(own))
            if gains[k] >= own - tol:
                sign = 1.0 if plus[k] >= minus[k] else -1.0
                sums[k] = sums[k] + sign * x
                members[k].append(j)
                sgn[k].append(sign)
                continue
        sums.append(x.copy())
        members.append([j])
        sgn.append([1.0])

    def total():
        return float(np.sum(dual.norm(np.array(sums)) ** q))

    current = total()
    for _ in range(rounds):
        moved = False
        for j in range(N):
            k0 = next(k for k, mem in enumerate(members) if j in mem)
            pos = members[k0].index(j)
            sj = sgn[k0][pos]
            S = np.array(sums)
            base = dual.norm(S) ** q
            removed = dual.norm(S[k0] - sj * X[j]) ** q if len(members[k0]) > 1 else 0.0
            others = np.arange(len(sums)) != k0
            plus = dual.norm(S + X[j]) ** q
            minus = dual.norm(S - X[j]) ** q
            gains = np.where(others, np.maximum(plus, minus) - base, -np.inf)
            new_block = float(dual.norm(X[j])) ** q if len(members[k0]) > 1 else -np.inf
            loss = base[k0] - removed
            k = int(np.argmax(gains))
            best_gain = max(gains[k], new_block) - loss
            if best_gain <= 1e-12 * max(1.0, current):
                continue
            members[k0].pop(pos)
            sgn[k0].pop(pos)
            sums[k0] = sums[k0] - sj * X[j]
            if gains[k] >= new_block:
                sign = 1.0 if plus[k] >= minus[k] else -1.0
                sums[k] = sums[k] + sign * X[j]
                members[k].append(j)
                sgn[k].append(sign)
            else:
                sums.append(X[j].copy())
                members.append([j])
                sgn.append([1.0])
            if not members[k0]:
                del sums[k0], members[k0], sgn[k0]
            current = total()
            moved = True
        if not moved:
            break
    # exact re-signing of each block where it is cheap
    values = []
    for k, mem in enumerate(members):
        v_greedy = float(dual.norm(sums[k]))
        if len(mem) <= 16 or space.extreme_points() is not None:
            v, s, _ = sign_maximum(X[mem], space, seed)
            if v > v_greedy:
                values.append(v)
                sgn[k] = list(s)
                continue
        values.append(v_greedy)
    order = sorted(range(len(members)), key=lambda k: min(members[k]))
    part, signs, vals = [], [], []
    for k in order:
        srt = np.argsort(members[k])
        part.append([members[k][i] for i in srt])
        s = np.array([sgn[k][i] for i in srt])
        signs.append((s * s[0]).tolist())
        vals.append(values[k])
    return _partition_objective(vals, q), part, signs


def atom_norm_upper_p_bound(c: AtomCombination, p: float, n_cap: int = 9,
                            seed: int = 0) -> PartitionValue:
    """Partition supremum ``L`` bounding the dual norm in the upper p-estimate lattice.

    The true norm lies in ``[L, K_p L]``.  All set partitions are enumerated
    (restricted-growth order) when ``N <= n_cap``; beyond that a greedy
    local search is used and the result is flagged heuristic.
    """
    p = float(p)
    if not 1 < p < math.inf:
        raise ValidationError(f"p must lie in (1, inf), got {p}")
    q = conjugate(p)
    X = c.atoms
    N = len(X)
    if N <= n_cap:
        value, part, signs = _exact_partition(X, c.space, q, seed)
        return PartitionValue(value, part, signs, heuristic=False)
    value, part, signs = _greedy_partition(X, c.space, q, seed)
    # the two extreme partitions are always candidates
    dual = c.space.dual()
    single = _partition_objective(dual.norm(X), q)
    if single > value * (1 + 1e-12):
        value, part, signs = single, [[j] for j in range(N)], [[1.0]] * N
    return PartitionValue(value, part, signs, heuristic=True)


# -- pairing and discretization ----------------------------------------------------


def pair(c: AtomCombination, f) -> float:
    """``<sum_j x_j^, f> = sum_j f(x_j*)``."""
    if f.space != c.space:
        raise ValidationError(f"space mismatch: {f.space} vs {c.space}")
    return float(np.sum(f.evaluate(c.atoms)))


def cell_diameters(points: np.ndarray, space: NormedSpace) -> np.ndarray:
    """Diameters, in the norm of ``E*``, of the cells of a dual-sphere grid.

    For n = 2 the points must be in angular order; cell ``i`` is the arc of
    the dual sphere between the angular midpoints to its neighbours.  For
    n >= 3 each cell is approximated by twice the distance to the nearest
    other grid point.
    """
    dual = space.dual()
    P = np.asarray(points, dtype=float)
    if space.dim == 2 and len(P) >= 3:
        ang = np.unwrap(np.arctan2(P[:, 1], P[:, 0]))
        nxt = np.append(ang[1:], ang[0] + 2 * np.pi)
        prv = np.insert(ang[:-1], 0, ang[-1] - 2 * np.pi)
        lo, hi = (ang + prv) / 2, (ang + nxt) / 2
        t = np.linspace(0.0, 1.0, 33)
        out = np.empty(len(P))
        for i in range(len(P)):
            th = lo[i] + t * (hi[i] - lo[i])
            arc = np.column_stack([np.cos(th), np.sin(th)])
            arc /= dual.norm(arc)[:, None]
            out[i] = dual.norm(arc[:, None, :] - arc[None, :, :]).max()
        return out
    d = dual.norm(P[:, None, :] - P[None, :, :])
    d[d == 0] = np.inf
    return 2 * d.min(axis=1)


def discretize_functional(weights, space: NormedSpace, points, p: float = 1.0) -> AtomCombination:
    """Collapse a positive functional given by ``weights`` on dual-sphere ``points`` into atoms.

    Produces ``sum_i w_i x_i^``.  ``meta`` carries ``diam`` (largest cell
    diameter) and ``inflation_bound = 1 + dim E * omega(diam)`` with
    ``omega`` the controlling-family modulus of FBL^(p)[E].
    """
    from .pap import ControllingFamilySpec, modulus

    w = np.asarray(weights, dtype=float)
    P = np.atleast_2d(as_vector(points, space.dim))
    if w.shape != (len(P),):
        raise ValidationError("need one weight per grid point")
    if not np.all(np.isfinite(w)):
        raise ValidationError("weights must be finite")
    if np.any(w < 0):
        raise ValidationError("weights must be nonnegative")
    diam = float(cell_diameters(P, space).max()) if len(P) > 1 else 2.0
    omega = modulus(ControllingFamilySpec.fblp(p), diam)
    meta = {"diam": diam, "omega": omega, "inflation_bound": 1.0 + space.dim * omega,
            "mass": float(w.sum())}
    return AtomCombination(space, w[:, None] * P, meta)
