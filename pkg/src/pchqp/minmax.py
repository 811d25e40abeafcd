"""Saddle objective of the truncated problem and its closed-form support minimizers.

For a truncation with scaled basis ``W = V sqrt(Lambda)`` and duals
``(alpha, beta >= 0)`` the concave objective is

    L(z, alpha, beta) = -beta.b - ||alpha||^2 / 4 - (eta/4) sum_j z_j g_j^2,

with ``g = c + W alpha + A^T beta``.  Minimizing over binary ``z`` is
analytic: under a cardinality budget take the s largest ``g_j^2``; under a
per-nonzero penalty ``theta`` keep exactly the coordinates with
``(eta/4) g_j^2 > theta``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DataError
from .model import PenalizedQP, SparseQP
from .spectral import SpectralTruncation


@dataclass(frozen=True, eq=False)
class SupportVector:
    """Binary indicator of candidate nonzero coordinates; hashable and immutable."""

    z: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z)
        if z.ndim != 1:
            raise DataError(f"support vector must be 1-d, got shape {z.shape}")
        zi = np.array(z, dtype=np.int8)
        if not np.all((zi == 0) | (zi == 1)):
            raise DataError("support vector entries must be 0 or 1")
        zi.setflags(write=False)
        object.__setattr__(self, "z", zi)

    def __eq__(self, other) -> bool:
        return isinstance(other, SupportVector) and np.array_equal(self.z, other.z)

    def __hash__(self) -> int:
        return hash(self.z.tobytes())

    @property
    def n(self) -> int:
        return self.z.shape[0]

    def count(self) -> int:
        return int(self.z.sum())

    def indices(self) -> np.ndarray:
        return np.flatnonzero(self.z)

    def mask(self) -> np.ndarray:
        return self.z.astype(bool)

    def union(self, other: "SupportVector") -> "SupportVector":
        return SupportVector(np.maximum(self.z, other.z))

    @staticmethod
    def empty(n: int) -> "SupportVector":
        return SupportVector(np.zeros(n, dtype=np.int8))

    @staticmethod
    def full(n: int) -> "SupportVector":
        return SupportVector(np.ones(n, dtype=np.int8))

    @staticmethod
    def from_indices(n: int, indices) -> "SupportVector":
        z = np.zeros(n, dtype=np.int8)
        z[np.asarray(indices, dtype=int)] = 1
        return SupportVector(z)


@dataclass(frozen=True, eq=False)
class DualPoint:
    """Dual pair (alpha free, beta >= 0 componentwise)."""

    alpha: np.ndarray
    beta: np.ndarray

    def __post_init__(self):
        a = np.array(np.ravel(self.alpha), dtype=np.float64)
        b = np.array(np.ravel(self.beta), dtype=np.float64)
        if b.size and b.min() < 0:
            raise DataError(f"beta must be nonnegative, min entry {b.min():.3e}")
        a.setflags(write=False)
        b.setflags(write=False)
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @staticmethod
    def zeros(k: int, m: int) -> "DualPoint":
        return DualPoint(np.zeros(k), np.zeros(m))


@dataclass(frozen=True)
class Iterate:
    """One step of either iterative solver: support, duals and objective value."""

    z: SupportVector
    alpha: np.ndarray
    beta: np.ndarray
    value: float

    @property
    def dual(self) -> DualPoint:
        return DualPoint(self.alpha, self.beta)


def gamma(trunc: SpectralTruncation, p: SparseQP | PenalizedQP, d: DualPoint) -> np.ndarray:
    """The support-scoring vector ``c + V sqrt(Lambda) alpha + A^T beta``."""
    if d.alpha.shape[0] != trunc.k:
        raise DataError(f"alpha must have length {trunc.k}, got {d.alpha.shape[0]}")
    if d.beta.shape[0] != p.m:
        raise DataError(f"beta must have length {p.m}, got {d.beta.shape[0]}")
    g = p.c + trunc.scaled_basis @ d.alpha
    if p.m:
        g = g + p.A.T @ d.beta
    return g


def eval_L(trunc: SpectralTruncation, p: SparseQP | PenalizedQP, z: SupportVector, d: DualPoint) -> float:
    """Saddle objective at (z, alpha, beta); pure evaluation, no budget check."""
    if z.n != p.n:
        raise DataError(f"support vector length {z.n} != problem dimension {p.n}")
    g = gamma(trunc, p, d)
    val = -0.25 * float(d.alpha @ d.alpha) - 0.25 * p.eta * float((g * g) @ z.z)
    if p.m:
        val -= float(d.beta @ p.b)
    return val


def eval_H(trunc: SpectralTruncation, p: PenalizedQP, z: SupportVector, d: DualPoint) -> float:
    """Penalized saddle objective: ``eval_L`` plus ``theta`` times the support size."""
    return eval_L(trunc, p, z, d) + p.theta * z.count()


def select_support(gamma_vec: np.ndarray, s: int) -> SupportVector:
    """Exact minimizer of L over supports with at most ``s`` ones.

    Picks the ``s`` largest squared entries of ``gamma_vec``; ties resolve to
    the lowest index, which makes the map single-valued.
    """
    g = np.ravel(np.asarray(gamma_vec, dtype=np.float64))
    n = g.shape[0]
    if not 1 <= s <= n:
        raise DataError(f"sparsity budget s={s} outside [1, {n}]")
    order = np.argsort(-np.square(g), kind="stable")
    z = np.zeros(n, dtype=np.int8)
    z[order[:s]] = 1
    return SupportVector(z)


def select_support_penalized(gamma_vec: np.ndarray, eta: float, theta: float) -> SupportVector:
    """Exact minimizer of H over all binary supports: keep j iff ``(eta/4) g_j^2 > theta``.

    The inequality is strict; boundary coordinates are excluded (either choice
    is optimal, exclusion keeps the map deterministic).
    """
    if not (eta > 0 and theta > 0):
        raise DataError(f"eta={eta} and theta={theta} must be positive")
    g = np.ravel(np.asarray(gamma_vec, dtype=np.float64))
    return SupportVector((0.25 * eta * np.square(g) > theta).astype(np.int8))


def primal_value_k(trunc: SpectralTruncation, p: SparseQP, z: SupportVector, cfg=None) -> float:
    """Objective of the rank-k problem restricted to the support ``z``.

    Computed as the dual maximum of L(z, ., .): a closed-form linear solve
    when there are no linear constraints, projected gradient ascent otherwise.
    """
    if z.count() > p.s:
        raise DataError(f"support size {z.count()} exceeds budget s={p.s}")
    from .best_response import best_response

    d = best_response(trunc, p, z, cfg)
    return eval_L(trunc, p, z, d)
