"""Dense complex linear-algebra kernels and subspace geometry.

All routines are pure functions on numpy arrays. Matrices are dense
``complex128``, eigen/singular values are always returned in descending
order, and norms are spectral unless noted otherwise. Tolerance checks use
the mixed form ``err <= tol * (1 + scale)`` so they behave across magnitudes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import (
    DimensionMismatchError,
    DuplicateFrequencyError,
    FrequencyOutOfRangeError,
    NonFiniteError,
    NotHermitianError,
    RankRequestTooLargeError,
)

HERMITIAN_TOL = 1e-8
PINV_RELATIVE_CUTOFF = 1e-12


@dataclass(frozen=True)
class EigDecomposition:
    """Hermitian eigendecomposition with eigenvalues sorted descending.

    ``vectors[:, j]`` is the unit eigenvector paired with ``values[j]``.
    Within a numerically degenerate cluster the factorization's own order is
    kept; callers should use spans, not individual degenerate vectors.
    """

    values: np.ndarray
    vectors: np.ndarray


def _as_complex_matrix(m, name="matrix") -> np.ndarray:
    a = np.asarray(m, dtype=np.complex128)
    if a.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-D, got shape {a.shape}")
    if not np.isfinite(a).all():
        raise NonFiniteError(f"{name} contains NaN or Inf entries")
    return a


def hermitian_eig(m) -> EigDecomposition:
    """Eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Parameters
    ----------
    m : array_like, square
        Hermitian matrix. Symmetry is verified entrywise against
        ``1e-8 * (1 + max|m|)``.

    Returns
    -------
    EigDecomposition
        Real eigenvalues (descending) and the matching unitary eigenvectors.
    """
    a = _as_complex_matrix(m)
    if a.shape[0] != a.shape[1]:
        raise NotHermitianError(f"matrix is not square: {a.shape}")
    scale = np.abs(a).max() if a.size else 0.0
    asym = np.abs(a - a.conj().T).max() if a.size else 0.0
    if asym > HERMITIAN_TOL * (1.0 + scale):
        raise NotHermitianError(f"asymmetry {asym:.3e} exceeds tolerance at scale {scale:.3e}")
    values, vectors = np.linalg.eigh(a)
    return EigDecomposition(values=values[::-1].copy(), vectors=vectors[:, ::-1].copy())


def svd_top_subspace(m, r: int) -> tuple[np.ndarray, np.ndarray]:
    """Orthonormal basis of the top-``r`` left singular subspace.

    Parameters
    ----------
    m : array_like, p x n
    r : int
        Subspace dimension, ``1 <= r <= min(p, n)``.

    Returns
    -------
    basis : ndarray, p x r
        Isometric columns spanning the dominant left singular subspace.
    singular_values : ndarray
        All ``min(p, n)`` singular values, descending.
    """
    a = _as_complex_matrix(m)
    if not 1 <= r <= min(a.shape):
        raise RankRequestTooLargeError(
            f"requested dimension {r} not in [1, {min(a.shape)}] for shape {a.shape}"
        )
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    return u[:, :r].copy(), s


def pseudo_inverse(m) -> np.ndarray:
    """Moore-Penrose pseudoinverse via SVD.

    Singular values below ``1e-12 * sigma_max`` are truncated so that the
    result stays stable on numerically rank-deficient input.
    """
    a = _as_complex_matrix(m)
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    cutoff = PINV_RELATIVE_CUTOFF * (s[0] if s.size else 0.0)
    inv = np.where(s > cutoff, 1.0 / np.where(s > cutoff, s, 1.0), 0.0)
    return (vh.conj().T * inv) @ u.conj().T


def subspace_distance(u, v) -> float:
    """Sine-theta distance between two equal-dimension subspaces.

    The canonical angles between the spans satisfy
    ``theta_j = arccos sigma_j(v^H u)``; this returns ``max_j sin(theta_j)``,
    which equals the spectral norm of the difference of the orthogonal
    projectors and lies in [0, 1]. The sines are computed directly as the
    singular values of the residual ``v - u (u^H v)`` -- the arccos route
    loses half the working precision near zero angles.

    Both arguments must be matrices with isometric columns of the same
    shape (same ambient dimension and same subspace dimension).
    """
    ub = _as_complex_matrix(u, "u")
    vb = _as_complex_matrix(v, "v")
    if ub.shape != vb.shape:
        raise DimensionMismatchError(f"subspace shapes differ: {ub.shape} vs {vb.shape}")
    if ub.shape[1] > ub.shape[0]:
        raise DimensionMismatchError(f"subspace dimension exceeds ambient: {ub.shape}")
    resid = vb - ub @ (ub.conj().T @ vb)
    sines = np.linalg.svd(resid, compute_uv=False)
    return float(min(1.0, sines.max()))


def projector(basis) -> np.ndarray:
    """Orthogonal projector ``B B^H`` onto the span of isometric columns."""
    b = _as_complex_matrix(basis, "basis")
    return b @ b.conj().T


def validate_frequencies(freqs) -> np.ndarray:
    """Return frequencies as a 1-D float array after range/distinctness checks."""
    f = np.atleast_1d(np.asarray(freqs, dtype=np.float64))
    if f.ndim != 1 or f.size < 1:
        raise FrequencyOutOfRangeError("frequency set must be a nonempty 1-D collection")
    if not np.isfinite(f).all():
        raise NonFiniteError("frequency set contains NaN or Inf")
    if (f < 0.0).any() or (f >= 1.0).any():
        raise FrequencyOutOfRangeError(f"frequencies must lie in [0, 1): {f}")
    if np.unique(f).size != f.size:
        raise DuplicateFrequencyError(f"frequencies must be pairwise distinct: {f}")
    return f


def vandermonde(freqs, n: int) -> np.ndarray:
    """Array manifold matrix of a uniform linear array.

    Entry ``(row, k)`` is ``exp(2j*pi*row*f_k)`` for ``row = 0..n-1``, so
    column ``k`` is the steering vector of frequency ``f_k`` and every
    column has Euclidean norm ``sqrt(n)``.
    """
    f = validate_frequencies(freqs)
    if n < 1:
        raise DimensionMismatchError(f"sensor count must be >= 1, got {n}")
    return np.exp(2j * np.pi * np.outer(np.arange(n), f))


def steering_vector(f: float, n: int) -> np.ndarray:
    """Single steering vector ``[1, e^{2i pi f}, ..., e^{2i pi (n-1) f}]``."""
    return np.exp(2j * np.pi * f * np.arange(n))


def spectral_norm(m) -> float:
    """Largest singular value."""
    a = _as_complex_matrix(m)
    return float(np.linalg.svd(a, compute_uv=False)[0])
