"""Problem containers and validated constructors.

The central object is :class:`SparseQP`: minimize ``<c, x> + <x, Q x> +
eta^-1 ||x||^2`` subject to ``A x <= b`` and at most ``s`` nonzero entries.
:class:`PenalizedQP` swaps the cardinality budget for a per-nonzero penalty
``theta``.  All arrays are float64 and frozen after construction, so instances
are safe to share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError

SYMMETRY_RTOL = 1e-10
PSD_RTOL = 1e-8
DEFAULT_FEASIBILITY_TOL = 1e-8


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=np.float64, copy=True)
    a.setflags(write=False)
    return a


def _check_dims(Q, c, A, b) -> None:
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise DataError(f"Q must be square, got shape {Q.shape}")
    n = Q.shape[0]
    if c.ndim != 1 or c.shape[0] != n:
        raise DataError(f"c must have length {n}, got shape {c.shape}")
    if A.ndim != 2 or A.shape[1] != n:
        raise DataError(f"A must have {n} columns, got shape {A.shape}")
    if b.ndim != 1 or b.shape[0] != A.shape[0]:
        raise DataError(f"b must have length {A.shape[0]}, got shape {b.shape}")
    for name, arr in (("Q", Q), ("c", c), ("A", A), ("b", b)):
        if not np.all(np.isfinite(arr)):
            raise DataError(f"{name} contains non-finite entries")


@dataclass(frozen=True)
class SparseQP:
    """A cardinality-constrained convex quadratic program.

    ``Q`` is symmetric positive semidefinite (up to round-off), ``A``/``b``
    may be empty (``m = 0``), ``1 <= s <= n`` and ``eta > 0``.  Use
    :func:`build_problem` or :func:`from_regression` to construct validated
    instances; the dataclass itself only enforces shape consistency and
    symmetry.
    """

    Q: np.ndarray
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    s: int
    eta: float

    def __post_init__(self):
        object.__setattr__(self, "Q", _freeze(self.Q))
        object.__setattr__(self, "c", _freeze(np.ravel(self.c)))
        object.__setattr__(self, "A", _freeze(np.atleast_2d(self.A)))
        object.__setattr__(self, "b", _freeze(np.ravel(self.b)))
        _check_dims(self.Q, self.c, self.A, self.b)
        asym = np.linalg.norm(self.Q - self.Q.T)
        if asym > SYMMETRY_RTOL * max(1.0, np.linalg.norm(self.Q)):
            raise DataError(f"Q asymmetric beyond tolerance (||Q - Q^T||_F = {asym:.3e})")
        if not (1 <= int(self.s) <= self.n):
            raise DataError(f"sparsity budget s={self.s} outside [1, {self.n}]")
        if not self.eta > 0:
            raise DataError(f"ridge parameter eta={self.eta} must be positive")
        object.__setattr__(self, "s", int(self.s))
        object.__setattr__(self, "eta", float(self.eta))

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @property
    def m(self) -> int:
        return self.b.shape[0]


@dataclass(frozen=True)
class PenalizedQP:
    """Variant of :class:`SparseQP` with an l0 penalty ``theta`` instead of a budget."""

    Q: np.ndarray
    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    theta: float
    eta: float

    def __post_init__(self):
        object.__setattr__(self, "Q", _freeze(self.Q))
        object.__setattr__(self, "c", _freeze(np.ravel(self.c)))
        object.__setattr__(self, "A", _freeze(np.atleast_2d(self.A)))
        object.__setattr__(self, "b", _freeze(np.ravel(self.b)))
        _check_dims(self.Q, self.c, self.A, self.b)
        asym = np.linalg.norm(self.Q - self.Q.T)
        if asym > SYMMETRY_RTOL * max(1.0, np.linalg.norm(self.Q)):
            raise DataError(f"Q asymmetric beyond tolerance (||Q - Q^T||_F = {asym:.3e})")
        if not self.theta > 0:
            raise DataError(f"sparsity penalty theta={self.theta} must be positive")
        if not self.eta > 0:
            raise DataError(f"ridge parameter eta={self.eta} must be positive")
        object.__setattr__(self, "theta", float(self.theta))
        object.__setattr__(self, "eta", float(self.eta))

    @property
    def n(self) -> int:
        return self.c.shape[0]

    @property
    def m(self) -> int:
        return self.b.shape[0]


@dataclass(frozen=True)
class RegressionData:
    """Covariate matrix (one row per sample) and response vector."""

    features: np.ndarray
    targets: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "features", _freeze(np.atleast_2d(self.features)))
        object.__setattr__(self, "targets", _freeze(np.ravel(self.targets)))
        if self.features.ndim != 2 or self.features.shape[0] < 1 or self.features.shape[1] < 1:
            raise DataError(f"features must be a nonempty 2-d matrix, got shape {self.features.shape}")
        if self.targets.shape[0] != self.features.shape[0]:
            raise DataError(
                f"targets length {self.targets.shape[0]} != number of samples {self.features.shape[0]}"
            )
        if not (np.all(np.isfinite(self.features)) and np.all(np.isfinite(self.targets))):
            raise DataError("regression data contains non-finite entries")

    @property
    def samples(self) -> int:
        return self.features.shape[0]

    @property
    def n(self) -> int:
        return self.features.shape[1]


def _empty_constraints(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.zeros((0, n)), np.zeros(0)


def build_problem(Q, c, A=None, b=None, *, s: int, eta: float) -> SparseQP:
    """Validate inputs and build a :class:`SparseQP`.

    ``Q`` is symmetrized as ``(Q + Q^T) / 2`` before validation, which
    tolerates asymmetry introduced by file round-off.  Raises
    :class:`~pchqp.errors.DataError` on dimension mismatch, a spectrum that is
    negative beyond round-off, ``s`` out of range or ``eta <= 0``.
    """
    Q = np.array(Q, dtype=np.float64)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise DataError(f"Q must be square, got shape {Q.shape}")
    n = Q.shape[0]
    if A is None:
        A, b = _empty_constraints(n)
    elif b is None:
        raise DataError("A given without b")
    Q = 0.5 * (Q + Q.T)
    _check_psd(Q)
    return SparseQP(Q=Q, c=c, A=A, b=b, s=s, eta=eta)


def build_penalized_problem(Q, c, A=None, b=None, *, theta: float, eta: float) -> PenalizedQP:
    """Penalized counterpart of :func:`build_problem`."""
    Q = np.array(Q, dtype=np.float64)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise DataError(f"Q must be square, got shape {Q.shape}")
    n = Q.shape[0]
    if A is None:
        A, b = _empty_constraints(n)
    elif b is None:
        raise DataError("A given without b")
    Q = 0.5 * (Q + Q.T)
    _check_psd(Q)
    return PenalizedQP(Q=Q, c=c, A=A, b=b, theta=theta, eta=eta)


def _check_psd(Q: np.ndarray) -> None:
    if Q.size == 0:
        raise DataError("Q must be at least 1x1")
    if not np.all(np.isfinite(Q)):
        raise DataError("Q contains non-finite entries")
    w = np.linalg.eigvalsh(Q)
    lam_max = float(w[-1])
    lam_min = float(w[0])
    if lam_min < -PSD_RTOL * max(lam_max, 0.0):
        raise DataError(
            f"Q is not positive semidefinite: min eigenvalue {lam_min:.3e}, max {lam_max:.3e}"
        )


def from_regression(data: RegressionData, *, s: int, eta: float) -> SparseQP:
    """Pose ridge regression with a sparsity budget as a :class:`SparseQP`.

    With ``N`` samples, features ``w_i`` and responses ``y_i`` this sets
    ``Q = (1/N) sum_i w_i w_i^T`` and ``c = -(2/N) sum_i y_i w_i``, so that the
    quadratic objective equals the mean squared error plus ridge term up to
    the constant ``(1/N) sum_i y_i^2``.
    """
    W = data.features
    y = data.targets
    N = data.samples
    Q = (W.T @ W) / N
    c = -2.0 / N * (W.T @ y)
    return build_problem(Q, c, s=s, eta=eta)


def objective(p: SparseQP | PenalizedQP, x) -> float:
    """Quadratic objective ``<c, x> + <x, Q x> + eta^-1 ||x||^2``; no feasibility check."""
    x = np.ravel(np.asarray(x, dtype=np.float64))
    if x.shape[0] != p.n:
        raise DataError(f"x must have length {p.n}, got {x.shape[0]}")
    return float(p.c @ x + x @ (p.Q @ x) + (x @ x) / p.eta)


def penalized_objective(p: PenalizedQP, x, tol: float = DEFAULT_FEASIBILITY_TOL) -> float:
    """Quadratic objective plus ``theta`` times the number of entries with ``|x_j| > tol``."""
    x = np.ravel(np.asarray(x, dtype=np.float64))
    return objective(p, x) + p.theta * int(np.count_nonzero(np.abs(x) > tol))


def feasible(p: SparseQP, x, tol: float = DEFAULT_FEASIBILITY_TOL) -> bool:
    """True iff ``A x <= b + tol`` componentwise and at most ``s`` entries have ``|x_j| > tol``."""
    x = np.ravel(np.asarray(x, dtype=np.float64))
    if x.shape[0] != p.n:
        raise DataError(f"x must have length {p.n}, got {x.shape[0]}")
    if p.m and np.any(p.A @ x > p.b + tol):
        return False
    return int(np.count_nonzero(np.abs(x) > tol)) <= p.s
