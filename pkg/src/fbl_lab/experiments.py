"""Desk-scale reproductions of the finite-dimensional estimates.

* :func:`alpha` / :func:`check_id_ratio` -- the exponent ``alpha(p, q)`` with
  ``||id : FBL^(q)[E] -> FBL^(p)[E]|| <= n^alpha`` and an empirical check
  of that bound on random lattice expressions.
* :func:`remark_6_7` -- for ``E = l_1^n`` the canonical dual basis has atom
  norm 1 in FBL[E]* and ``n`` in FBL^(inf)[E]*.
* :func:`remark_6_8` / :func:`cor_6_5_trend` -- the cyclic weak-l_p vectors in
  ``l_{p,inf}^n`` whose p-sum grows like ``(ln n)^(1/p)`` relative to their norms.

Every report is a plain dict; ``rows`` hold CSV-ready records with the
columns ``n, p, q, value, bound, ratio``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .duals import AtomCombination, atom_norm_fbl_p, atom_norm_upper_p_bound, pair
from .errors import ValidationError
from .fblnorm import fbl_p_lower, fbl_p_upper
from .fvl import delta, psum_of_generators, random_expression
from .solver import AscentConfig, worker_count
from .spaces import NormedSpace, quasi_norm_pinfty

CSV_COLUMNS = ("n", "p", "q", "value", "bound", "ratio")


def _fmt(p):
    return "inf" if math.isinf(p) else p


def alpha(p: float, q: float) -> float:
    """Exponent of ``n`` in the bound for the formal identity FBL^(q) -> FBL^(p)."""
    p, q = float(p), float(q)
    if not (p >= 1 and q >= 1):
        raise ValidationError("p and q must lie in [1, inf]")
    if p >= q:
        return 0.0
    d = 1.0 / p - (0.0 if math.isinf(q) else 1.0 / q)
    if p <= min(2.0, q):
        return d
    return p * d / 2.0


def harmonic(n: int) -> float:
    return math.fsum(1.0 / j for j in range(1, n + 1))


def check_id_ratio(space: NormedSpace, p: float, q: float, trials: int = 20, seed: int = 0,
                   tol: float = 0.05, grid: int | None = None, config: AscentConfig | None = None,
                   expressions=None) -> dict:
    """Compare ``||f||_p`` (lower estimate) with ``n^alpha ||f||_q`` (upper estimate).

    A violation is ``lower_p > n^alpha * upper_q * (1 + tol)``.  ``expressions``
    overrides the random depth-3 trees.
    """
    n = space.dim
    a = alpha(p, q)
    bound = n**a
    if grid is None:
        grid = 720 if n == 2 else 400
    config = config or AscentConfig(starts=2, max_iters=150, seed=seed)
    if expressions is None:
        expressions = [random_expression(space, np.random.default_rng([seed, t]))
                       for t in range(trials)]

    def one(item):
        t, f = item
        lo = fbl_p_lower(f, p, config=config.replace(seed=seed + t)).lower
        up = fbl_p_upper(f, q, grid_mass=grid, grid_test=grid, seed=seed).upper
        return lo, up

    items = list(enumerate(expressions))
    workers = min(worker_count(), len(items))
    if workers > 1:
        # map keeps input order, so the report does not depend on scheduling
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(one, items))
    else:
        results = [one(it) for it in items]
    rows, violations = [], 0
    for lo, up in results:
        ratio = lo / up if up > 0 else 0.0
        bad = ratio > bound * (1 + tol)
        violations += bad
        rows.append({"n": n, "p": _fmt(p), "q": _fmt(q), "value": ratio, "bound": bound,
                     "ratio": ratio / bound, "lower_p": lo, "upper_q": up, "violation": bool(bad)})
    return {
        "experiment": "id-ratio",
        "space": space.to_json(),
        "p": _fmt(p), "q": _fmt(q), "alpha": a, "bound": bound, "tol": tol,
        "trials": len(rows), "seed": seed, "grid": grid,
        "max_ratio": max((r["value"] for r in rows), default=0.0),
        "violations": int(violations),
        "rows": rows,
    }


def remark_6_7(n: int) -> dict:
    """Atom norms of the canonical basis of ``E* = l_inf^n`` for ``E = l_1^n``.

    Returns ``a`` (the FBL[E]* norm, a sign maximum equal to 1), ``b`` (the
    FBL^(inf)[E]* norm, a sum of norms equal to ``n``) and ``b / a``, a lower
    bound for the lattice Banach-Mazur distance between the two lattices.
    """
    if n < 1:
        raise ValidationError("n must be positive")
    c = AtomCombination.basis(NormedSpace.lq(1, n))
    a = atom_norm_fbl_p(c, 1).lower
    b = atom_norm_fbl_p(c, math.inf).lower
    return {"experiment": "remark67", "n": n, "a": a, "b": b, "ratio": b / a,
            "rows": [{"n": n, "p": 1, "q": "inf", "value": b / a, "bound": n, "ratio": b / a / n}]}


def lorentz_witness(n: int, p: float) -> np.ndarray:
    """Matrix ``beta`` with ``beta[i, k] = ((i + k - 1) mod n)^(-1/p)``, residues in ``1..n``.

    Column ``k`` is the vector ``x_k``; indices in the formula are 1-based.
    """
    i = np.arange(1, n + 1)[:, None]
    k = np.arange(1, n + 1)[None, :]
    m = (i + k - 2) % n + 1
    return m.astype(float) ** (-1.0 / p)


def remark_6_8(n: int, p: float, n_cap: int = 9) -> dict:
    """The ``(ln n)^(1/p)`` witness in ``E = l_{p,inf}^n``.

    Reports the quasi-norms of the vectors ``x_k`` (all 1), their Banach
    norms, the row sums ``sum_k beta_ik^p`` (all ``H_n``), the pairing
    ``P = <sum_i e_i^, (sum_k |delta_{x_k}|^p)^(1/p)> = n H_n^(1/p)``, the
    partition bound ``D = n^(1/p')`` on the dual atom norm, and the growth
    factor ``R = P / (D n^(1/p)) = H_n^(1/p)``.  The equivalence constant
    between the two weak-l_p norms and ``K_p`` stay symbolic.
    """
    p = float(p)
    if n < 2:
        raise ValidationError("n must be at least 2")
    if not 1 < p < math.inf:
        raise ValidationError("p must lie in (1, inf)")
    space = NormedSpace.lorentz_weak(p, n)
    beta = lorentz_witness(n, p)
    X = beta.T                                   # rows are x_k
    quasi = np.asarray(quasi_norm_pinfty(p, X))
    banach = np.asarray(space.norm(X))
    H = harmonic(n)
    row_sums = (beta**p).sum(axis=1)
    c = AtomCombination.basis(space)
    f = psum_of_generators(space, p, X)
    P = float(pair(c, f))
    part = atom_norm_upper_p_bound(c, p, n_cap=n_cap)
    D = float(part.value)
    R = P / (D * n ** (1.0 / p))
    q = p / (p - 1.0)
    return {
        "experiment": "remark68", "n": n, "p": p,
        "quasi_norm_max_dev": float(np.abs(quasi - 1.0).max()),
        "banach_norm_min": float(banach.min()), "banach_norm_max": float(banach.max()),
        "harmonic": H, "row_sum_max_dev": float(np.abs(row_sums - H).max()),
        "P": P, "P_closed_form": n * H ** (1.0 / p),
        "D": D, "D_closed_form": n ** (1.0 / q), "D_heuristic": part.heuristic,
        "R": R, "R_closed_form": H ** (1.0 / p),
        "note": "dual norm known up to K_p; weak-l_p norm equivalence constant symbolic",
        "rows": [{"n": n, "p": p, "q": "", "value": R, "bound": H ** (1.0 / p),
                  "ratio": R / H ** (1.0 / p)}],
    }


def cor_6_5_trend(p: float, n_list, n_cap: int = 9) -> dict:
    """Tabulate ``R(n)`` against ``(ln n)^(1/p)`` for each ``n`` in ``n_list``."""
    rows = []
    for n in n_list:
        rep = remark_6_8(int(n), p, n_cap=n_cap)
        log_term = math.log(n) ** (1.0 / p) if n > 1 else float("nan")
        rows.append({"n": int(n), "p": float(p), "q": "", "value": rep["R"], "bound": log_term,
                     "ratio": rep["R"] / log_term})
    return {"experiment": "cor65", "p": float(p), "n_list": [int(n) for n in n_list], "rows": rows}


def generator_ratio(space: NormedSpace, e, p: float, q: float, grid: int = 720) -> float:
    """``||delta_e||_p / ||delta_e||_q`` through the same estimators as :func:`check_id_ratio`."""
    f = delta(space, e)
    lo = fbl_p_lower(f, p).lower
    up = fbl_p_upper(f, q, grid_mass=grid, grid_test=grid).upper
    return lo / up
