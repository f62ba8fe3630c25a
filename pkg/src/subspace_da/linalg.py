"""Dense subspace primitives: PCA bases, projection and subspace alignment."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateData, DimensionMismatch, DimensionTooLarge

__all__ = [
    "SubspaceBasis",
    "AlignmentResult",
    "as_feature_matrix",
    "pca_basis",
    "project",
    "align_subspaces",
    "frobenius_distance_sq",
]


def as_feature_matrix(x, name="x"):
    """Return ``x`` as a finite 2-D float64 array, or raise."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] < 1 or x.shape[1] < 1:
        raise DimensionMismatch(f"{name} must be a non-empty 2-D matrix, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError(f"{name} contains non-finite entries")
    return x


@dataclass(frozen=True)
class SubspaceBasis:
    """Column-orthonormal ``(D, d)`` basis plus the mean used for centering."""

    basis: np.ndarray
    mean: np.ndarray

    def __post_init__(self):
        basis = np.asarray(self.basis, dtype=np.float64)
        mean = np.asarray(self.mean, dtype=np.float64).ravel()
        if basis.ndim != 2:
            raise DimensionMismatch("basis must be a 2-D matrix")
        if mean.shape[0] != basis.shape[0]:
            raise DimensionMismatch(
                f"mean has length {mean.shape[0]} but basis has {basis.shape[0]} rows"
            )
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "mean", mean)

    @property
    def ambient_dim(self) -> int:
        return self.basis.shape[0]

    @property
    def d(self) -> int:
        return self.basis.shape[1]

    def recentered(self, mean) -> "SubspaceBasis":
        """Same basis, different centering vector."""
        return SubspaceBasis(self.basis, mean)


@dataclass(frozen=True)
class AlignmentResult:
    m: np.ndarray
    u: np.ndarray
    residual: float


def _fix_signs(vectors):
    # Largest-magnitude entry of each column made positive; argmax picks the
    # first index on ties so the rule is deterministic.
    idx = np.argmax(np.abs(vectors), axis=0)
    signs = np.sign(vectors[idx, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def pca_basis(x, d) -> SubspaceBasis:
    """Top-``d`` principal directions of ``x``.

    The eigenproblem is solved on the ``D x D`` covariance when ``D <= n`` and
    on the ``n x n`` Gram matrix otherwise. Columns are ordered by decreasing
    eigenvalue and sign-normalised so each column's largest-magnitude entry is
    positive.

    Raises
    ------
    DimensionTooLarge
        If ``d`` is not in ``[1, min(n - 1, D)]``.
    DegenerateData
        If the covariance has rank lower than ``d``.
    """
    x = as_feature_matrix(x)
    n, D = x.shape
    d = int(d)
    limit = min(n - 1, D)
    if d < 1 or d > limit:
        raise DimensionTooLarge(
            f"subspace dimension d={d} must satisfy 1 <= d <= min(n-1, D) = {limit} "
            f"(n={n}, D={D})"
        )
    mean = x.mean(axis=0)
    xc = x - mean
    if D <= n:
        evals, evecs = np.linalg.eigh(xc.T @ xc / (n - 1))
    else:
        evals, small = np.linalg.eigh(xc @ xc.T / (n - 1))
        evecs = None
    order = np.argsort(-evals, kind="stable")
    evals = evals[order]
    tol = max(n, D) * np.finfo(np.float64).eps * max(evals[0], 0.0)
    rank = int(np.sum(evals > tol))
    if rank < d:
        raise DegenerateData(
            f"covariance rank {rank} is smaller than the requested d={d}", rank=rank
        )
    if evecs is None:
        top = small[:, order[:d]]
        vectors = xc.T @ top / np.sqrt((n - 1) * evals[:d])
        # Re-orthonormalise to remove round-off from the Gram route.
        q, r = np.linalg.qr(vectors)
        vectors = q * np.sign(np.diag(r))
    else:
        vectors = evecs[:, order[:d]]
    return SubspaceBasis(_fix_signs(vectors), mean)


def project(x, b: SubspaceBasis) -> np.ndarray:
    """Return ``(x - b.mean) @ b.basis``; centering always uses ``b.mean``."""
    x = as_feature_matrix(x)
    if x.shape[1] != b.ambient_dim:
        raise DimensionMismatch(
            f"data has {x.shape[1]} columns but basis expects {b.ambient_dim}"
        )
    return (x - b.mean) @ b.basis


def align_subspaces(s: SubspaceBasis, t: SubspaceBasis) -> AlignmentResult:
    """Closed-form alignment ``M = S^T T`` of a source basis onto a target basis."""
    if s.basis.shape != t.basis.shape:
        raise DimensionMismatch(
            f"source basis {s.basis.shape} and target basis {t.basis.shape} differ"
        )
    m = s.basis.T @ t.basis
    u = s.basis @ m
    return AlignmentResult(m=m, u=u, residual=frobenius_distance_sq(u, t.basis))


def frobenius_distance_sq(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimensionMismatch(f"shapes {a.shape} and {b.shape} differ")
    diff = a - b
    return float(np.sum(diff * diff))
