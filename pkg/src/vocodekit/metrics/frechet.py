"""Gaussian statistics of embedding sets and the Fréchet distance between them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeError, ValidationError

EIG_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class EmbeddingStats:
    mean: np.ndarray
    covariance: np.ndarray
    n: int

    def __post_init__(self):
        mu = np.atleast_1d(np.asarray(self.mean, dtype=np.float64))
        cov = np.atleast_2d(np.asarray(self.covariance, dtype=np.float64))
        if cov.shape != (mu.shape[0], mu.shape[0]):
            raise ShapeError("covariance must be d x d for a d-dim mean")
        if not np.allclose(cov, cov.T, rtol=0, atol=1e-9):
            raise ValidationError("covariance is not symmetric")
        if self.n < 2:
            raise ValidationError("need at least 2 embeddings")
        object.__setattr__(self, "mean", mu)
        object.__setattr__(self, "covariance", cov)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


def embedding_stats(embeddings) -> EmbeddingStats:
    """Sample mean and unbiased covariance of an n x d matrix."""
    e = np.asarray(embeddings, dtype=np.float64)
    if e.ndim == 1:
        e = e[:, None]
    if e.ndim != 2 or e.shape[0] < 2:
        raise ValidationError("need an n x d matrix with n >= 2")
    mu = e.mean(axis=0)
    centered = e - mu
    cov = centered.T @ centered / (e.shape[0] - 1)
    return EmbeddingStats(mu, (cov + cov.T) / 2.0, e.shape[0])


def psd_sqrt(mat: np.ndarray, tol: float = EIG_TOL) -> np.ndarray:
    """Symmetric square root; eigenvalues down to -tol (relative to the largest) clip to 0."""
    sym = (mat + mat.T) / 2.0
    vals, vecs = np.linalg.eigh(sym)
    scale = max(1.0, float(np.abs(vals).max(initial=0.0)))
    if vals.min(initial=0.0) < -tol * scale:
        raise ValidationError(f"matrix is not PSD (eigenvalue {vals.min():.3e})")
    return (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T


def frechet_distance(a: EmbeddingStats, b: EmbeddingStats) -> float:
    """|mu_a - mu_b|^2 + Tr(S_a + S_b - 2 (S_a S_b)^(1/2)).

    The cross term uses Tr((S_a S_b)^(1/2)) = Tr((R S_b R)^(1/2)) with R the
    symmetric root of S_a, so only symmetric eigenproblems are solved.
    """
    if a.dim != b.dim:
        raise ShapeError(f"embedding dimensions differ: {a.dim} vs {b.dim}")
    root_a = psd_sqrt(a.covariance)
    cross = psd_sqrt(root_a @ b.covariance @ root_a)
    diff = a.mean - b.mean
    value = diff @ diff + np.trace(a.covariance) + np.trace(b.covariance) - 2.0 * np.trace(cross)
    return float(max(value, 0.0))
