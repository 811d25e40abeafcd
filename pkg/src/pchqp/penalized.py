"""Solver loops for the l0-penalized variant (penalty theta instead of a budget).

Both iterative schemes carry over unchanged except for the support update,
which becomes the per-coordinate threshold rule: keep j iff
``(eta/4) gamma_j^2 > theta``.  The theta term is constant in the duals for a
fixed support, so best responses and subgradient steps are identical to the
budgeted case.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .best_response import BRConfig, BRTrace, _run_alternation
from .dual_ascent import DPConfig, DPTrace, _run_subgradient
from .errors import DataError, NumericalError
from .minmax import DualPoint, SupportVector, eval_H, gamma, select_support_penalized
from .model import DEFAULT_FEASIBILITY_TOL, PenalizedQP
from .reduction import INFEASIBLE, SparseSolution, _solution, restricted_qp

PenalizedTrace = BRTrace | DPTrace

DEFAULT_SUBSET_CAP = 10**6


def eval_f_penalized(
    trunc, p: PenalizedQP, d: DualPoint
) -> tuple[float, SupportVector]:
    """Inner minimum of H over all binary supports: value and minimizing support."""
    g = gamma(trunc, p, d)
    z = select_support_penalized(g, p.eta, p.theta)
    val = p.theta * z.count() - 0.25 * float(d.alpha @ d.alpha) - 0.25 * p.eta * float(
        (g * g) @ z.z
    )
    if p.m:
        val -= float(d.beta @ p.b)
    return val, z


def run_best_response_penalized(
    trunc,
    p: PenalizedQP,
    z0: SupportVector | None = None,
    cfg: BRConfig | None = None,
) -> BRTrace:
    """Alternating best response with the threshold support rule; H-values recorded."""
    cfg = cfg or BRConfig()
    if z0 is None:
        z0 = select_support_penalized(p.c, p.eta, p.theta)

    def select_fn(tr, prob, d):
        return select_support_penalized(gamma(tr, prob, d), prob.eta, prob.theta)

    return _run_alternation(trunc, p, z0, cfg, select_fn, eval_H)


def run_dual_program_penalized(
    trunc,
    p: PenalizedQP,
    d0: DualPoint | None = None,
    cfg: DPConfig | None = None,
) -> DPTrace:
    """Subgradient ascent on ``min_z H``; steps are unchanged from the budgeted case."""
    cfg = cfg or DPConfig()
    if d0 is None:
        d0 = DualPoint.zeros(trunc.k, p.m)
    return _run_subgradient(trunc, p, d0, cfg, eval_f_penalized)


def solve_reduced_penalized(
    p: PenalizedQP, Z: SupportVector, cap: int = DEFAULT_SUBSET_CAP
) -> SparseSolution:
    """Exact penalized minimum over all subsets of the candidate set.

    Every subset S of the candidates is scored as its restricted ridge value
    plus ``theta |S|``; the empty support scores zero.  Requires
    ``2^ |Z|`` to stay under ``cap``.
    """
    if Z.n != p.n:
        raise DataError(f"candidate vector length {Z.n} != problem dimension {p.n}")
    candidates = tuple(int(j) for j in Z.indices())
    if 2 ** len(candidates) > cap:
        raise NumericalError(
            f"enumeration of 2^{len(candidates)} subsets exceeds the cap {cap}; "
            "shrink the candidate set or raise the cap"
        )
    best_x = np.zeros(p.n)
    best_val = 0.0 if (p.m == 0 or np.all(p.b >= -DEFAULT_FEASIBILITY_TOL)) else INFEASIBLE
    for size in range(1, len(candidates) + 1):
        for S in itertools.combinations(candidates, size):
            x, val = restricted_qp(p, S)
            if not math.isfinite(val):
                continue
            total = val + p.theta * size
            if total < best_val:
                best_x, best_val = x, total
    if not math.isfinite(best_val):
        raise NumericalError("every candidate subset is infeasible under the linear constraints")
    return _solution(p, best_x, best_val, exact=True)
