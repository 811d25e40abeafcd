"""Alternating best-response solver with limit-cycle detection and screening.

The loop alternates an exact dual maximization for the current support with
the analytic support update, using the one-step-stale pairing

    (alpha_{t+1}, beta_{t+1}) = BR(z_t),      z_{t+1} = J(alpha_t, beta_t),

where J is the closed-form support minimizer.  Supports live in a finite set,
so the sequence enters a limit cycle; a period of one certifies the support as
optimal for the truncated problem.  ``BRConfig.fresh_support_update`` switches
to the Gauss-Seidel pairing ``z_{t+1} = J(alpha_{t+1}, beta_{t+1})``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import reduce
from typing import Callable

import numpy as np
import scipy.linalg

from . import projgrad
from .errors import DataError, NumericalError
from .minmax import DualPoint, Iterate, SupportVector, eval_L, gamma, select_support
from .model import PenalizedQP, SparseQP
from .spectral import SpectralTruncation


@dataclass(frozen=True)
class BRConfig:
    """Iteration budget of the alternation and tolerances of the inner dual solve."""

    max_iters: int = 40
    qp_tol: float = 1e-9
    qp_max_iters: int = 20000
    fresh_support_update: bool = False

    def __post_init__(self):
        if self.max_iters < 1 or self.qp_max_iters < 1 or self.qp_tol <= 0:
            raise DataError("BRConfig fields must be positive")


@dataclass
class BRTrace:
    """Recorded alternation: iterates plus cycle location, if one was found.

    ``cycle_period == 1`` means the alternation reached a fixed point, which
    certifies the support as the exact minimizer at this truncation level.
    """

    iterates: list[Iterate]
    cycle_start: int | None
    cycle_period: int | None
    converged_certificate: bool

    def supports(self) -> list[SupportVector]:
        return [it.z for it in self.iterates]


def initial_support(p: SparseQP, rng: np.random.Generator | None = None) -> SupportVector:
    """Default start: the support selected at zero duals; optionally a random s-subset."""
    if rng is not None:
        return SupportVector.from_indices(p.n, rng.choice(p.n, size=p.s, replace=False))
    return select_support(p.c, p.s)


def br_unconstrained(trunc: SpectralTruncation, p: SparseQP | PenalizedQP, z: SupportVector) -> np.ndarray:
    """Exact maximizer of L(z, ., .) when there are no linear constraints.

    Solves the k-by-k system ``(I/eta + W_S^T W_S) alpha = -W_S^T c_S`` by
    Cholesky, where ``W = V sqrt(Lambda)`` and ``S`` is the support.  The
    identity term makes the system positive definite for every support.
    """
    if p.m != 0:
        raise DataError("br_unconstrained requires a constraint-free problem (m = 0)")
    mask = z.mask()
    Ws = trunc.scaled_basis[mask]
    M = np.eye(trunc.k) / p.eta + Ws.T @ Ws
    rhs = -(Ws.T @ p.c[mask])
    try:
        alpha = scipy.linalg.cho_solve(scipy.linalg.cho_factor(M, lower=True), rhs)
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - I/eta forces PD
        raise NumericalError(f"best-response system unexpectedly singular: {exc}") from exc
    return alpha


def br_constrained(
    trunc: SpectralTruncation, p: SparseQP | PenalizedQP, z: SupportVector, cfg: BRConfig | None = None
) -> DualPoint:
    """Maximize L(z, ., .) over alpha free and beta >= 0 by projected gradient ascent.

    Terminates when the projected gradient norm falls below ``cfg.qp_tol``; on
    hitting the iteration cap the best iterate is returned with a warning.
    """
    cfg = cfg or BRConfig()
    k, m = trunc.k, p.m
    mask = z.mask()
    Ws = trunc.scaled_basis[mask]
    As = p.A[:, mask]
    cs = p.c[mask]

    def value_and_grad(u: np.ndarray) -> tuple[float, np.ndarray]:
        alpha, beta = u[:k], u[k:]
        gs = cs + Ws @ alpha + As.T @ beta
        val = -0.25 * (alpha @ alpha) - beta @ p.b - 0.25 * p.eta * (gs @ gs)
        grad_a = -0.5 * alpha - 0.5 * p.eta * (Ws.T @ gs)
        grad_b = -p.b - 0.5 * p.eta * (As @ gs)
        return float(val), np.concatenate([grad_a, grad_b])

    D = np.hstack([Ws, As.T]) if Ws.size or As.size else np.zeros((0, k + m))
    smax = np.linalg.norm(D, 2) if D.size else 0.0
    curvature = 0.5 + 0.5 * p.eta * smax**2
    nonneg = np.zeros(k + m, dtype=bool)
    nonneg[k:] = True
    res = projgrad.maximize(
        value_and_grad,
        np.zeros(k + m),
        nonneg=nonneg,
        curvature=curvature,
        tol=cfg.qp_tol,
        max_iters=cfg.qp_max_iters,
    )
    if not res.converged:
        warnings.warn(
            f"constrained best response hit the iteration cap ({cfg.qp_max_iters}) with projected "
            f"gradient norm {res.grad_norm:.3e}; returning the best iterate (not certified)",
            RuntimeWarning,
            stacklevel=2,
        )
    return DualPoint(res.x[:k], res.x[k:])


def best_response(
    trunc: SpectralTruncation, p: SparseQP | PenalizedQP, z: SupportVector, cfg: BRConfig | None = None
) -> DualPoint:
    """Single-valued best-response map: exact solve for m = 0, projected gradient otherwise."""
    if p.m == 0:
        return DualPoint(br_unconstrained(trunc, p, z), np.zeros(0))
    return br_constrained(trunc, p, z, cfg)


SelectFn = Callable[[SpectralTruncation, SparseQP | PenalizedQP, DualPoint], SupportVector]
ValueFn = Callable[[SpectralTruncation, SparseQP | PenalizedQP, SupportVector, DualPoint], float]


def _run_alternation(
    trunc: SpectralTruncation,
    p: SparseQP | PenalizedQP,
    z0: SupportVector,
    cfg: BRConfig,
    select_fn: SelectFn,
    value_fn: ValueFn,
) -> BRTrace:
    d0 = DualPoint.zeros(trunc.k, p.m)
    iterates = [Iterate(z0, d0.alpha, d0.beta, value_fn(trunc, p, z0, d0))]
    # The one-step-stale update makes the next support depend on the previous
    # two, so cycles are detected on consecutive support pairs; the fresh
    # variant is memoryless and hashes single supports.
    seen: dict = {}
    cycle_start = cycle_period = None
    if cfg.fresh_support_update:
        seen[z0] = 0
    for _ in range(cfg.max_iters):
        cur = iterates[-1]
        d_new = best_response(trunc, p, cur.z, cfg)
        if cfg.fresh_support_update:
            z_new = select_fn(trunc, p, d_new)
            key = z_new
        else:
            z_new = select_fn(trunc, p, cur.dual)
            key = (cur.z, z_new)
        if key in seen:
            cycle_start = seen[key]
            cycle_period = len(iterates) - cycle_start
            break
        seen[key] = len(iterates)
        iterates.append(Iterate(z_new, d_new.alpha, d_new.beta, value_fn(trunc, p, z_new, d_new)))
    return BRTrace(
        iterates=iterates,
        cycle_start=cycle_start,
        cycle_period=cycle_period,
        converged_certificate=cycle_period == 1,
    )


def run_best_response(
    trunc: SpectralTruncation,
    p: SparseQP,
    z0: SupportVector | None = None,
    cfg: BRConfig | None = None,
) -> BRTrace:
    """Run the alternation from ``z0`` until a cycle repeats or the budget runs out."""
    cfg = cfg or BRConfig()
    if z0 is None:
        z0 = initial_support(p)
    elif z0.count() > p.s:
        raise DataError(f"initial support size {z0.count()} exceeds budget s={p.s}")

    def select_fn(tr, prob, d):
        return select_support(gamma(tr, prob, d), prob.s)

    return _run_alternation(trunc, p, z0, cfg, select_fn, eval_L)


def screen_from_trace(trace: BRTrace, p_window: int = 6) -> SupportVector:
    """Componentwise OR of recent supports: the screening candidate set.

    Uses the last ``p_window`` supports, or one full cycle when a cycle was
    detected (a superset of the window whenever the window under-covers the
    cycle).
    """
    if p_window < 1:
        raise DataError(f"p_window={p_window} must be >= 1")
    if not trace.iterates:
        raise DataError("empty trace")
    if trace.cycle_period:
        chunk = trace.iterates[trace.cycle_start : trace.cycle_start + trace.cycle_period]
    else:
        chunk = trace.iterates[-min(p_window, len(trace.iterates)) :]
    return reduce(lambda a, b: a.union(b), (it.z for it in chunk))
