"""Reduced-problem post-processing: restricted QP solves and exact subset enumeration.

After screening produces a candidate set Z, the surviving combinatorial
problem is solved exactly by enumerating supports inside Z and solving a ridge
QP on each.  The big-M box bound that a mixed-integer formulation would need
is still computed, but only as a post-hoc diagnostic: enumeration does not
require it.
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import projgrad
from .errors import DataError, NumericalError
from .minmax import SupportVector
from .model import DEFAULT_FEASIBILITY_TOL, PenalizedQP, SparseQP, objective

log = logging.getLogger(__name__)

DEFAULT_ENUMERATION_CAP = 10**6
SUPPORT_TOL = 1e-12
INFEASIBLE = float("inf")


@dataclass(frozen=True)
class ReducedProblem:
    """Original problem restricted to screened candidates, plus the box bound M."""

    parent: SparseQP
    Z: SupportVector
    M: float
    candidate_indices: tuple[int, ...]

    def __post_init__(self):
        if self.Z.count() < 1:
            raise DataError("candidate set Z must contain at least one index")
        if not self.M > 0:
            raise DataError(f"big-M bound {self.M} must be positive")
        if tuple(int(j) for j in self.Z.indices()) != tuple(self.candidate_indices):
            raise DataError("candidate_indices inconsistent with Z")


@dataclass(frozen=True)
class SparseSolution:
    """Primal solution: vector, support, objective value, exactness certificate."""

    x: np.ndarray
    support: tuple[int, ...]
    objective: float
    exact: bool

    def __post_init__(self):
        x = np.array(np.ravel(self.x), dtype=np.float64)
        x.setflags(write=False)
        object.__setattr__(self, "x", x)


def _solution(p: SparseQP | PenalizedQP, x: np.ndarray, value: float, exact: bool) -> SparseSolution:
    support = tuple(int(j) for j in np.flatnonzero(np.abs(x) > SUPPORT_TOL))
    return SparseSolution(x=x, support=support, objective=value, exact=exact)


def restricted_qp(
    p: SparseQP | PenalizedQP,
    support,
    *,
    tol: float = 1e-9,
    max_iters: int = 20000,
) -> tuple[np.ndarray, float]:
    """Minimize the quadratic objective with all coordinates off ``support`` fixed at zero.

    Without linear constraints this is one Cholesky solve of
    ``(Q_SS + I/eta) x_S = -c_S / 2``.  With constraints the bound-constrained
    dual is maximized by projected gradient ascent and the primal recovered
    from it; an infeasible restriction is reported with value ``inf``.
    """
    S = np.unique(np.asarray(support, dtype=int))
    if S.size < 1:
        raise DataError("support must contain at least one index")
    if S.min() < 0 or S.max() >= p.n:
        raise DataError(f"support indices out of range for n={p.n}")
    H = p.Q[np.ix_(S, S)] + np.eye(S.size) / p.eta
    cS = p.c[S]
    factor = scipy.linalg.cho_factor(H, lower=True)
    if p.m == 0:
        xS = scipy.linalg.cho_solve(factor, -0.5 * cS)
        x = np.zeros(p.n)
        x[S] = xS
        return x, objective(p, x)

    AS = p.A[:, S]

    def x_of(beta: np.ndarray) -> np.ndarray:
        return scipy.linalg.cho_solve(factor, -0.5 * (cS + AS.T @ beta))

    def value_and_grad(beta: np.ndarray) -> tuple[float, np.ndarray]:
        xS = x_of(beta)
        resid = AS @ xS - p.b
        val = cS @ xS + xS @ (H @ xS) + beta @ resid
        return float(val), resid

    curvature = 0.5 * np.linalg.norm(AS @ scipy.linalg.cho_solve(factor, AS.T), 2)
    res = projgrad.maximize(
        value_and_grad,
        np.zeros(p.m),
        nonneg=np.ones(p.m, dtype=bool),
        curvature=max(curvature, 1e-12),
        tol=tol,
        max_iters=max_iters,
        norm_cap=1e8,
    )
    if not res.converged and _constraints_infeasible(AS, p.b):
        return np.zeros(p.n), INFEASIBLE
    if not res.converged:
        log.warning(
            "restricted QP dual ascent stopped uncertified (grad norm %.3e after %d iters)",
            res.grad_norm,
            res.iterations,
        )
    x = np.zeros(p.n)
    x[S] = x_of(res.x)
    return x, objective(p, x)


def _constraints_infeasible(AS: np.ndarray, b: np.ndarray) -> bool:
    # Exact feasibility certificate for {x : AS x <= b} via linear programming.
    from scipy.optimize import linprog

    lp = linprog(
        c=np.zeros(AS.shape[1]),
        A_ub=AS,
        b_ub=b,
        bounds=[(None, None)] * AS.shape[1],
        method="highs",
    )
    return lp.status == 2


def compute_big_m(p: SparseQP, z_terminal: SupportVector) -> float:
    """Box bound from the terminal support: four times the sup-norm of its ridge solution.

    Falls back to 1 when that solution is identically zero (or the support is
    empty), so the bound stays positive.
    """
    idx = z_terminal.indices()
    if idx.size == 0:
        return 1.0
    x, value = restricted_qp(p, idx)
    if not np.isfinite(value):
        return 1.0
    norm = float(np.max(np.abs(x)))
    return 4.0 * norm if norm > 0 else 1.0


def make_reduced_problem(
    p: SparseQP, Z: SupportVector, z_terminal: SupportVector | None = None
) -> ReducedProblem:
    """Bundle the candidate set with its big-M diagnostic bound.

    ``z_terminal`` should be the final solver support; when omitted, the s
    candidates in Z with the largest ``|c_j|`` stand in for it.
    """
    if Z.n != p.n:
        raise DataError(f"candidate vector length {Z.n} != problem dimension {p.n}")
    if z_terminal is None:
        if Z.count() <= p.s:
            z_terminal = Z
        else:
            idx = Z.indices()
            order = np.argsort(-np.abs(p.c[idx]), kind="stable")
            z_terminal = SupportVector.from_indices(p.n, idx[order[: p.s]])
    M = compute_big_m(p, z_terminal)
    return ReducedProblem(
        parent=p, Z=Z, M=M, candidate_indices=tuple(int(j) for j in Z.indices())
    )


def _enumerate_best(
    p: SparseQP, candidates: tuple[int, ...], s: int, cap: int
) -> tuple[np.ndarray, float]:
    r = min(s, len(candidates))
    if math.comb(len(candidates), r) > cap:
        raise NumericalError(
            f"enumeration of C({len(candidates)}, {r}) supports exceeds the cap {cap}; "
            "greedily preselect a smaller candidate set (e.g. by |c_j| or screening with "
            "smaller eta), lower s, or raise the cap"
        )
    # Feasible sets nest upward in the support, so smaller sizes only matter
    # when linear constraints can rule supports out.
    sizes = [r] if p.m == 0 else list(range(r, 0, -1))
    best_x: np.ndarray | None = None
    best_val = INFEASIBLE
    for size in sizes:
        for S in itertools.combinations(candidates, size):
            x, val = restricted_qp(p, S)
            if val < best_val:
                best_x, best_val = x, val
    if p.m > 0 and np.all(p.b >= -DEFAULT_FEASIBILITY_TOL) and 0.0 < best_val:
        best_x, best_val = np.zeros(p.n), 0.0
    if best_x is None:
        raise NumericalError("every candidate support is infeasible under the linear constraints")
    return best_x, best_val


def solve_reduced(rp: ReducedProblem, s: int, cap: int = DEFAULT_ENUMERATION_CAP) -> SparseSolution:
    """Exact solve over all supports of up to ``s`` candidates by enumeration.

    Ties on the objective resolve to the lexicographically smallest support of
    the largest optimal size, making the result deterministic.  The big-M box
    is checked after the fact and logged if it would have been binding.
    """
    p = rp.parent
    x, val = _enumerate_best(p, rp.candidate_indices, s, cap)
    if np.any(np.abs(x) >= rp.M - 1e-12):
        log.warning(
            "big-M bound %.6g would have been binding at the optimum (max |x_j| = %.6g)",
            rp.M,
            float(np.max(np.abs(x))),
        )
    return _solution(p, x, val, exact=True)


def solve_exact(p: SparseQP, cap: int = DEFAULT_ENUMERATION_CAP) -> SparseSolution:
    """Ground-truth optimum of the full problem: enumeration over all supports."""
    x, val = _enumerate_best(p, tuple(range(p.n)), p.s, cap)
    return _solution(p, x, val, exact=True)
