"""Subgradient ascent on the dual of the support-screening min-max program.

The inner function ``f(alpha, beta) = min_z L(z, alpha, beta)`` is concave and
piecewise quadratic; its subgradient at a point reuses the analytically
minimizing support.  Steps follow the non-summable diminishing rule
``kappa_t = a / sqrt(t)``.  Every dual value is a lower bound on the truncated
optimum (weak duality), and a support that stays constant over the trailing
window certifies itself as the exact minimizer at this truncation level.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Callable

import numpy as np

from .errors import DataError, NumericalError
from .minmax import DualPoint, Iterate, SupportVector, gamma, select_support
from .model import PenalizedQP, SparseQP
from .spectral import SpectralTruncation


@dataclass(frozen=True)
class DPConfig:
    """Iteration budget, step constant ``a`` of ``kappa_t = a/sqrt(t)``, window size."""

    max_iters: int = 500
    step_a: float = 4e-3
    p_window: int = 50
    divergence_cap: float = 1e12

    def __post_init__(self):
        if self.max_iters < 1 or self.step_a <= 0 or self.p_window < 1 or self.divergence_cap <= 0:
            raise DataError("DPConfig fields must be positive")


@dataclass
class DPTrace:
    """Recorded ascent: iterates, the running maximum of f, and the window certificate."""

    iterates: list[Iterate]
    best_f: np.ndarray
    z_converged: bool

    def supports(self) -> list[SupportVector]:
        return [it.z for it in self.iterates]


def eval_f(trunc: SpectralTruncation, p: SparseQP, d: DualPoint) -> tuple[float, SupportVector]:
    """Inner minimum of L over budgeted supports: value and the minimizing support."""
    g = gamma(trunc, p, d)
    z = select_support(g, p.s)
    val = -0.25 * float(d.alpha @ d.alpha) - 0.25 * p.eta * float((g * g) @ z.z)
    if p.m:
        val -= float(d.beta @ p.b)
    return val, z


def dp_step(
    trunc: SpectralTruncation,
    p: SparseQP | PenalizedQP,
    d: DualPoint,
    z: SupportVector,
    kappa: float,
) -> DualPoint:
    """One subgradient ascent step of size ``kappa`` using the support ``z``.

    With ``g`` evaluated at the current duals and ``u = z * g``:

        alpha' = (1 - kappa/2) alpha - (kappa eta / 2) W^T u
        beta'  = max{0, beta - kappa b - (kappa eta / 2) A u}
    """
    if kappa <= 0:
        raise DataError(f"step size kappa={kappa} must be positive")
    g = gamma(trunc, p, d)
    u = g * z.z
    alpha_new = (1.0 - 0.5 * kappa) * d.alpha - 0.5 * kappa * p.eta * (trunc.scaled_basis.T @ u)
    if p.m:
        beta_new = np.maximum(0.0, d.beta - kappa * p.b - 0.5 * kappa * p.eta * (p.A @ u))
    else:
        beta_new = d.beta
    return DualPoint(alpha_new, beta_new)


EvalFn = Callable[[SpectralTruncation, SparseQP | PenalizedQP, DualPoint], tuple[float, SupportVector]]


def _run_subgradient(
    trunc: SpectralTruncation,
    p: SparseQP | PenalizedQP,
    d0: DualPoint,
    cfg: DPConfig,
    eval_fn: EvalFn,
) -> DPTrace:
    d = d0
    iterates: list[Iterate] = []
    best: list[float] = []
    cur_best = -np.inf
    for t in range(1, cfg.max_iters + 1):
        val, z = eval_fn(trunc, p, d)
        cur_best = max(cur_best, val)
        iterates.append(Iterate(z, d.alpha, d.beta, val))
        best.append(cur_best)
        if t < cfg.max_iters:
            d = dp_step(trunc, p, d, z, cfg.step_a / np.sqrt(t))
            norm = float(np.linalg.norm(d.alpha)) + float(np.linalg.norm(d.beta))
            if norm > cfg.divergence_cap:
                raise NumericalError(
                    f"dual iterate norm {norm:.3e} exceeded {cfg.divergence_cap:.1e} at t={t}; "
                    f"step constant a={cfg.step_a} is likely too large for this instance"
                )
    window = cfg.p_window
    z_converged = len(iterates) >= window and all(
        it.z == iterates[-1].z for it in iterates[-window:]
    )
    return DPTrace(iterates=iterates, best_f=np.asarray(best), z_converged=z_converged)


def run_dual_program(
    trunc: SpectralTruncation,
    p: SparseQP,
    d0: DualPoint | None = None,
    cfg: DPConfig | None = None,
) -> DPTrace:
    """Run subgradient ascent for a fixed budget, recording f at every iterate.

    There is no early stopping on an f-plateau; the fixed budget sidesteps a
    termination rule.  Iterate-norm blowup beyond ``divergence_cap`` aborts
    with diagnostics.
    """
    cfg = cfg or DPConfig()
    if d0 is None:
        d0 = DualPoint.zeros(trunc.k, p.m)
    return _run_subgradient(trunc, p, d0, cfg, eval_f)


def screen_from_dp(trace: DPTrace, p_window: int = 50) -> SupportVector:
    """Componentwise OR of the final ``p_window`` supports of a dual ascent trace."""
    if p_window < 1:
        raise DataError(f"p_window={p_window} must be >= 1")
    if not trace.iterates:
        raise DataError("empty trace")
    chunk = trace.iterates[-min(p_window, len(trace.iterates)) :]
    return reduce(lambda a, b: a.union(b), (it.z for it in chunk))
