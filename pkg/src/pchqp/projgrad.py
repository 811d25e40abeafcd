"""Projected gradient ascent for smooth concave maximization with sign constraints.

Used for the constrained best-response solve and for duals of restricted QPs.
The step starts at the inverse of a caller-supplied curvature bound and backs
off geometrically whenever the objective fails to increase; convergence is
declared when the projected gradient norm drops below tolerance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

MAX_BACKTRACKS = 60


@dataclass
class AscentResult:
    x: np.ndarray
    value: float
    grad_norm: float
    iterations: int
    converged: bool
    diverged: bool = False


def _project(x: np.ndarray, nonneg: np.ndarray | None) -> np.ndarray:
    if nonneg is None:
        return x
    out = np.array(x, copy=True)
    out[nonneg] = np.maximum(out[nonneg], 0.0)
    return out


def _projected_gradient(x: np.ndarray, grad: np.ndarray, nonneg: np.ndarray | None) -> np.ndarray:
    if nonneg is None:
        return grad
    pg = np.array(grad, copy=True)
    blocked = nonneg & (x <= 0.0) & (grad < 0.0)
    pg[blocked] = 0.0
    return pg


def maximize(
    value_and_grad: Callable[[np.ndarray], tuple[float, np.ndarray]],
    x0: np.ndarray,
    *,
    nonneg: np.ndarray | None = None,
    curvature: float = 1.0,
    tol: float = 1e-9,
    max_iters: int = 20000,
    norm_cap: float | None = None,
) -> AscentResult:
    """Maximize a smooth concave function, optionally with ``x[nonneg] >= 0``.

    ``curvature`` is an upper bound on the gradient's Lipschitz constant, so
    ``1/curvature`` is an ascent-safe step; backtracking guards against an
    underestimated bound.  ``norm_cap`` flags divergence (an unbounded
    objective, e.g. the dual of an infeasible program).
    """
    x = _project(np.array(x0, dtype=np.float64, copy=True), nonneg)
    val, grad = value_and_grad(x)
    step0 = 1.0 / max(curvature, 1e-300)
    it = 0
    for it in range(1, max_iters + 1):
        pg = _projected_gradient(x, grad, nonneg)
        gnorm = float(np.linalg.norm(pg))
        if gnorm <= tol:
            return AscentResult(x, val, gnorm, it - 1, converged=True)
        step = step0
        x_new, val_new, grad_new = x, val, grad
        for _ in range(MAX_BACKTRACKS):
            cand = _project(x + step * grad, nonneg)
            cand_val, cand_grad = value_and_grad(cand)
            if cand_val >= val - 1e-14 * (1.0 + abs(val)):
                x_new, val_new, grad_new = cand, cand_val, cand_grad
                break
            step *= 0.5
        x, val, grad = x_new, val_new, grad_new
        if norm_cap is not None and float(np.linalg.norm(x)) > norm_cap:
            return AscentResult(x, val, float("inf"), it, converged=False, diverged=True)
    pg = _projected_gradient(x, grad, nonneg)
    return AscentResult(x, val, float(np.linalg.norm(pg)), it, converged=False)
