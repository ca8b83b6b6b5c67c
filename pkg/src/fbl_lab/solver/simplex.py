"""Dense revised simplex with Bland's anti-cycling rule.

Problems are stated as::

    minimize    c . x
    subject to  a_i . x  (<=, >=, =)  b_i
                x_j >= lower_j          (default 0; -inf means free)

and solved by a two-phase method on the standard form ``A x = b, x >= 0``
with an explicit basis inverse updated by rank-one pivots and refactorized
periodically.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg.blas import dger

from ..errors import ValidationError

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"
NUMERICAL_FAILURE = "numerical_failure"

_RELATIONS = {"<=": "<=", "≤": "<=", ">=": ">=", "≥": ">=", "=": "=", "==": "="}


@dataclass
class LinearProgram:
    objective: np.ndarray
    constraints: list = field(default_factory=list)
    lower: np.ndarray | None = None

    def __post_init__(self):
        self.objective = np.asarray(self.objective, dtype=float)
        if self.objective.ndim != 1 or not np.all(np.isfinite(self.objective)):
            raise ValidationError("objective must be a finite vector")
        n = self.objective.size
        rows = []
        for coeffs, rel, rhs in self.constraints:
            a = np.asarray(coeffs, dtype=float)
            if a.shape != (n,) or not np.all(np.isfinite(a)) or not math.isfinite(rhs):
                raise ValidationError("constraint has wrong length or non-finite data")
            if rel not in _RELATIONS:
                raise ValidationError(f"unknown relation {rel!r}")
            rows.append((a, _RELATIONS[rel], float(rhs)))
        self.constraints = rows
        if self.lower is None:
            self.lower = np.zeros(n)
        else:
            self.lower = np.asarray(self.lower, dtype=float)
            if self.lower.shape != (n,) or np.any(np.isnan(self.lower)) or np.any(self.lower == np.inf):
                raise ValidationError("lower bounds must be a vector of reals or -inf")

    @classmethod
    def from_arrays(cls, c, A_ub=None, b_ub=None, A_ge=None, b_ge=None, A_eq=None, b_eq=None,
                    lower=None) -> "LinearProgram":
        cons = []
        for A, b, rel in ((A_ub, b_ub, "<="), (A_ge, b_ge, ">="), (A_eq, b_eq, "=")):
            if A is not None:
                cons += [(row, rel, rhs) for row, rhs in zip(np.atleast_2d(A), np.atleast_1d(b))]
        return cls(c, cons, lower)

    @property
    def n_vars(self) -> int:
        return self.objective.size


@dataclass
class LPResult:
    status: str
    x: np.ndarray | None
    value: float | None
    duals: np.ndarray | None = None
    iterations: int = 0

    @property
    def ok(self) -> bool:
        return self.status == OPTIMAL


def _ger(alpha, x, y, a):
    """In-place ``a += alpha * outer(x, y)`` for a Fortran-ordered float64 ``a``."""
    return dger(alpha, x, y, a=a, overwrite_a=True)


def _unit_columns(A):
    """For each column the row of its single nonzero entry (or -1) and that entry."""
    nz = A != 0
    single = nz.sum(axis=0) == 1
    row = np.where(single, nz.argmax(axis=0), -1)
    sign = np.where(single, A[np.maximum(row, 0), np.arange(A.shape[1])], 0.0)
    return row, sign


class _Core:
    """Revised simplex on ``A x = b, x >= 0`` from a given feasible basis."""

    def __init__(self, A, b, basis, rule, tol, max_iter, refactor):
        self.A, self.b = A, b
        self.m, self.n = A.shape
        self.basis = list(basis)
        self.rule, self.tol = rule, tol
        self.max_iter, self.refactor = max_iter, refactor
        self.iterations = 0
        self.Binv = None
        self.unit_row = self.unit_sign = None

    def factor(self) -> bool:
        """Rebuild the basis inverse.

        Basic columns that are signed unit vectors (slacks, artificials) are
        eliminated directly so only the structural block is inverted.
        """
        if self.unit_row is None:
            self.unit_row, self.unit_sign = _unit_columns(self.A)
        m = self.m
        pos = np.arange(m)
        cols = np.asarray(self.basis)
        urow = self.unit_row[cols]
        slack = urow >= 0
        R = urow[slack]
        if np.unique(R).size != R.size:
            return False
        Q = np.setdiff1d(pos, R)
        K = cols[~slack]
        if K.size != Q.size:
            return False
        Binv = np.zeros((m, m), order="F")
        pk, ps = pos[~slack], pos[slack]
        if K.size:
            try:
                Cinv = np.linalg.inv(self.A[np.ix_(Q, K)])
            except np.linalg.LinAlgError:
                return False
            Binv[np.ix_(pk, Q)] = Cinv
        sign = self.unit_sign[cols[slack]]
        Binv[ps, R] = 1.0 / sign
        if K.size and ps.size:
            Binv[np.ix_(ps, Q)] = -(self.A[np.ix_(R, K)] @ Cinv) / sign[:, None]
        self.Binv = Binv
        return bool(np.all(np.isfinite(Binv)))

    def run(self, c, allowed) -> str:
        """Minimize ``c . x`` moving only through columns flagged in ``allowed``."""
        if not self.factor():
            return NUMERICAL_FAILURE
        scale = max(1.0, float(np.abs(c).max(initial=0.0)))
        dtol = self.tol * scale
        AT = np.ascontiguousarray(self.A.T)
        degenerate = 0
        since = 0
        xb = self.Binv @ self.b
        while True:
            if self.iterations >= self.max_iter:
                return NUMERICAL_FAILURE
            if since >= self.refactor:
                if not self.factor():
                    return NUMERICAL_FAILURE
                xb = self.Binv @ self.b
                since = 0
            y = c[self.basis] @ self.Binv
            d = c - AT @ y
            d[self.basis] = 0.0
            cand = np.flatnonzero((d < -dtol) & allowed)
            if cand.size == 0:
                return OPTIMAL
            bland = self.rule == "bland" or degenerate >= 50
            j = int(cand[0]) if bland else int(cand[np.argmin(d[cand])])
            u = self.Binv @ AT[j]
            ptol = self.tol * max(1.0, float(np.abs(u).max()))
            rows = np.flatnonzero(u > ptol)
            if rows.size == 0:
                return UNBOUNDED
            xr = np.maximum(xb[rows], 0.0)
            ratios = xr / u[rows]
            best = ratios.min()
            if bland:
                ties = rows[ratios <= best + self.tol * max(1.0, best)]
                # among tied rows leave the smallest variable index
                r = int(min(ties, key=lambda i: self.basis[i]))
            else:
                # Harris: take the largest pivot among rows blocking within tolerance
                bound = ((xr + self.tol) / u[rows]).min()
                ok = rows[ratios <= bound]
                r = int(ok[np.argmax(u[ok])])
                best = xr[np.searchsorted(rows, r)] / u[r]
            degenerate = degenerate + 1 if best <= self.tol else 0
            piv = u[r]
            row = self.Binv[r] / piv
            step = xb[r] / piv
            xb -= step * u
            xb[r] = step
            u[r] -= 1.0
            self.Binv = _ger(-1.0, u, row, self.Binv)
            self.basis[r] = j
            self.iterations += 1
            since += 1

    def solution(self):
        x = np.zeros(self.n)
        x[self.basis] = self.Binv @ self.b
        return x


def _standard_form(lp: LinearProgram):
    n = lp.n_vars
    free = np.isneginf(lp.lower)
    shift = np.where(free, 0.0, lp.lower)
    # columns: x' (n), x^- for free vars, slacks
    neg_cols = np.flatnonzero(free)
    rows, rhs, slack_sign, flipped = [], [], [], []
    for a, rel, b in lp.constraints:
        b = b - a @ shift
        s = {"<=": 1.0, ">=": -1.0, "=": 0.0}[rel]
        flip = b < 0
        if flip:
            a, b, s = -a, -b, -s
        rows.append(np.concatenate([a, -a[neg_cols]]))
        rhs.append(b)
        slack_sign.append(s)
        flipped.append(flip)
    m = len(rows)
    n_struct = n + neg_cols.size
    n_slack = sum(1 for s in slack_sign if s != 0)
    A = np.zeros((m, n_struct + n_slack))
    if m:
        A[:, :n_struct] = np.array(rows)
    basis = [None] * m
    k = n_struct
    for i, s in enumerate(slack_sign):
        if s != 0:
            A[i, k] = s
            if s > 0:
                basis[i] = k
            k += 1
    c = np.concatenate([lp.objective, -lp.objective[neg_cols], np.zeros(n_slack)])
    return A, np.array(rhs, dtype=float), c, basis, shift, neg_cols, np.array(flipped, dtype=bool)


def solve_lp(lp: LinearProgram, rule: str = "bland", tol: float = 1e-9,
             max_iter: int = 200_000, refactor: int = 50) -> LPResult:
    """Solve ``lp``; the status is one of optimal / infeasible / unbounded / numerical_failure.

    ``rule="bland"`` always enters the lowest-index improving column.
    ``rule="dantzig"`` enters the most negative reduced cost but falls back
    to Bland after 50 consecutive degenerate pivots, which keeps the
    anti-cycling guarantee.
    """
    if rule not in ("bland", "dantzig"):
        raise ValidationError(f"unknown pivot rule {rule!r}")
    A, b, c, basis, shift, neg_cols, flipped = _standard_form(lp)
    m, n_std = A.shape
    n = lp.n_vars
    if m == 0:
        if np.any(c < 0):
            return LPResult(UNBOUNDED, None, None)
        x = shift.copy()
        return LPResult(OPTIMAL, x, float(lp.objective @ x), np.zeros(0))

    missing = [i for i, v in enumerate(basis) if v is None]
    iterations = 0
    if missing:
        art = np.zeros((m, len(missing)))
        for k, i in enumerate(missing):
            art[i, k] = 1.0
            basis[i] = n_std + k
        A1 = np.hstack([A, art])
        c1 = np.concatenate([np.zeros(n_std), np.ones(len(missing))])
        core = _Core(A1, b, basis, rule, tol, max_iter, refactor)
        status = core.run(c1, np.ones(A1.shape[1], dtype=bool))
        iterations = core.iterations
        if status != OPTIMAL:
            return LPResult(NUMERICAL_FAILURE, None, None, iterations=iterations)
        x1 = core.solution()
        if x1[n_std:].sum() > 1e-7 * max(1.0, float(np.abs(b).max())):
            return LPResult(INFEASIBLE, None, None, iterations=iterations)
        # pivot remaining artificials out of the basis; drop redundant rows
        keep = np.ones(m, dtype=bool)
        for r in range(m):
            if core.basis[r] < n_std:
                continue
            row = core.Binv[r] @ A
            row[[k for k in core.basis if k < n_std]] = 0.0
            cols = np.flatnonzero(np.abs(row) > 1e-9)
            if cols.size:
                j = int(cols[0])
                u = core.Binv @ A1[:, j]
                prow = core.Binv[r] / u[r]
                core.Binv -= np.outer(u, prow)
                core.Binv[r] = prow
                core.basis[r] = j
            else:
                keep[r] = False
        A, b = A[keep], b[keep]
        basis = [v for v, k in zip(core.basis, keep) if k]
        row_map = np.flatnonzero(keep)
    else:
        row_map = np.arange(m)

    core = _Core(A, b, basis, rule, tol, max_iter - iterations, refactor)
    status = core.run(c, np.ones(n_std, dtype=bool))
    iterations += core.iterations
    if status != OPTIMAL:
        return LPResult(status, None, None, iterations=iterations)
    if not core.factor():
        return LPResult(NUMERICAL_FAILURE, None, None, iterations=iterations)
    xs = core.solution()
    resid = np.abs(A @ xs - b).max(initial=0.0)
    if resid > 1e-7 * max(1.0, float(np.abs(b).max(initial=0.0))) or xs.min() < -1e-7:
        return LPResult(NUMERICAL_FAILURE, None, None, iterations=iterations)
    xs = np.maximum(xs, 0.0)
    x = xs[:n].copy()
    x[neg_cols] -= xs[n:n + neg_cols.size]
    x += shift
    y_std = c[core.basis] @ core.Binv
    duals = np.zeros(m)
    duals[row_map] = y_std
    duals[flipped] *= -1
    return LPResult(OPTIMAL, x, float(lp.objective @ x), duals, iterations)
