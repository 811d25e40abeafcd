"""Symmetric eigendecomposition, rank-k truncation and reconstruction diagnostics.

Eigenvectors follow a fixed sign convention (largest-magnitude entry positive,
lowest index breaking ties) so repeated runs on the same matrix are
bit-identical.  All functions are pure and thread-safe.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DataError, NumericalError

EIGENVALUE_CLAMP_RTOL = 1e-12
K_HAT_RATIO = 0.1


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Full eigendecomposition: eigenvalues descending, orthonormal columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvectors.shape[0]


@dataclass(frozen=True, eq=False)
class SpectralTruncation:
    """Top-k slice of a spectrum with precomputed square-root eigenvalues.

    ``eigenvalues`` are descending and clamped at zero, ``eigenvectors`` is the
    n-by-k matrix of the leading eigenvectors, and ``scaled_basis`` is the
    n-by-k product of eigenvectors with the diagonal of square-root
    eigenvalues (the workhorse of all dual computations).
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sqrt_eigenvalues: np.ndarray
    k: int
    n: int

    @cached_property
    def scaled_basis(self) -> np.ndarray:
        return self.eigenvectors * self.sqrt_eigenvalues

    @property
    def spectrum(self) -> Spectrum:
        return Spectrum(self.eigenvalues, self.eigenvectors)

    def matrix(self) -> np.ndarray:
        """Dense rank-k reconstruction of the source matrix."""
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.T


def _canonical_signs(V: np.ndarray) -> np.ndarray:
    V = np.array(V, copy=True)
    for j in range(V.shape[1]):
        i = int(np.argmax(np.abs(V[:, j])))  # argmax takes the lowest index on ties
        if V[i, j] < 0:
            V[:, j] = -V[:, j]
    return V


def eig_sym(Q) -> Spectrum:
    """Full symmetric eigendecomposition, eigenvalues sorted descending.

    Raises :class:`~pchqp.errors.NumericalError` if the underlying QR
    iteration fails to converge, reporting basic conditioning diagnostics.
    """
    Q = np.asarray(Q, dtype=np.float64)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise DataError(f"expected a square matrix, got shape {Q.shape}")
    try:
        w, V = np.linalg.eigh(Q)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(
            f"symmetric eigendecomposition did not converge for n={Q.shape[0]}, "
            f"||Q||_F={np.linalg.norm(Q):.3e}, max|Q_ij|={np.max(np.abs(Q)):.3e}: {exc}"
        ) from exc
    order = np.argsort(w, kind="stable")[::-1]
    w = np.ascontiguousarray(w[order])
    V = _canonical_signs(V[:, order])
    w.setflags(write=False)
    V.setflags(write=False)
    return Spectrum(eigenvalues=w, eigenvectors=V)


def truncate(spectrum: Spectrum | SpectralTruncation, k: int) -> SpectralTruncation:
    """Keep the k leading eigenpairs; eigenvalues below ``1e-12 * lambda_1`` clamp to 0."""
    w = spectrum.eigenvalues
    V = spectrum.eigenvectors
    if not 1 <= k <= w.shape[0]:
        raise DataError(f"truncation level k={k} outside [1, {w.shape[0]}]")
    lam1 = max(float(w[0]), 0.0)
    wk = np.array(w[:k], copy=True)
    wk[wk < EIGENVALUE_CLAMP_RTOL * lam1] = 0.0
    Vk = np.array(V[:, :k], copy=True)
    wk.setflags(write=False)
    Vk.setflags(write=False)
    sq = np.sqrt(wk)
    sq.setflags(write=False)
    return SpectralTruncation(
        eigenvalues=wk, eigenvectors=Vk, sqrt_eigenvalues=sq, k=int(k), n=V.shape[0]
    )


def frobenius_error(spectrum: Spectrum | SpectralTruncation, k: int) -> float:
    """Frobenius distance between the matrix and its rank-k truncation.

    By the Eckart-Young identity this is the root of the sum of squared
    discarded eigenvalues.
    """
    w = spectrum.eigenvalues
    if not 1 <= k <= w.shape[0]:
        raise DataError(f"truncation level k={k} outside [1, {w.shape[0]}]")
    tail = w[k:]
    return float(np.sqrt(tail @ tail))


def k_hat(spectrum: Spectrum | SpectralTruncation) -> int:
    """Smallest k whose reconstruction error is at most 10% of the rank-1 error.

    Returns 1 when the rank-1 error is already zero (rank-one or zero matrix).
    """
    if spectrum.eigenvalues.shape[0] == 0:
        raise DataError("empty spectrum")
    err1 = frobenius_error(spectrum, 1)
    # a tail at round-off scale counts as an exact rank-one reconstruction
    if err1 <= EIGENVALUE_CLAMP_RTOL * max(float(spectrum.eigenvalues[0]), 0.0):
        return 1
    for k in range(1, spectrum.eigenvalues.shape[0] + 1):
        if frobenius_error(spectrum, k) <= K_HAT_RATIO * err1:
            return k
    return spectrum.eigenvalues.shape[0]
