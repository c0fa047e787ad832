"""Symmetric-matrix numerics: PSD eigenvalue repair and square roots.

Estimated covariance matrices are PSD only up to floating-point noise
(and genuinely singular whenever there are more parameters than
observations), so every square root in the library goes through the
clipped eigendecomposition below.
"""

from __future__ import annotations

import numpy as np

from .errors import NumericalError

# Eigenvalues in [-REL_TOL * lambda_max, 0) are rounding noise and get
# clipped; anything more negative indicates a real bug upstream.
REL_TOL = 1e-8


def clipped_eigh(s: np.ndarray, rel_tol: float = REL_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric PSD matrix with noise clipping.

    Returns (eigenvalues, eigenvectors) with negative eigenvalues within
    ``rel_tol`` of the largest one clipped to zero.  Raises NumericalError
    for negativity beyond the tolerance.
    """
    s = np.asarray(s, dtype=float)
    sym = (s + s.T) / 2.0
    vals, vecs = np.linalg.eigh(sym)
    top = max(vals[-1], 0.0)
    floor = -rel_tol * top if top > 0 else -rel_tol
    if vals[0] < floor:
        raise NumericalError(
            f"matrix is not positive semidefinite: min eigenvalue {vals[0]:.3e} "
            f"exceeds tolerance {floor:.3e}"
        )
    return np.clip(vals, 0.0, None), vecs


def sqrtm_psd(s: np.ndarray, rel_tol: float = REL_TOL) -> np.ndarray:
    """Symmetric square root of a PSD matrix via eigendecomposition."""
    vals, vecs = clipped_eigh(s, rel_tol)
    return (vecs * np.sqrt(vals)) @ vecs.T


def psd_eigvalsh(s: np.ndarray, rel_tol: float = REL_TOL) -> np.ndarray:
    """Ascending eigenvalues of a symmetric PSD matrix, noise clipped."""
    vals, _ = clipped_eigh(s, rel_tol)
    return vals
