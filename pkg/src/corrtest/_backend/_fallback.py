"""Pure-numpy implementations of the resampling hot kernels.

Used whenever the compiled extension is unavailable (or forced via
CORRTEST_BACKEND=python).  Semantics match corrtest._backend._core: both
compute per-replicate means and covariances (divisor n-1) of the same
inputs; results agree up to floating-point summation order.
"""

from __future__ import annotations

import numpy as np


def batch_mean_cov(y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Means and sample covariances of B replicate samples.

    y has shape (B, n, q); returns means (B, q) and covariances
    (B, q, q) with divisor n-1.
    """
    y = np.ascontiguousarray(y, dtype=float)
    b, n, _ = y.shape
    means = y.mean(axis=1)
    yc = y - means[:, None, :]
    covs = yc.transpose(0, 2, 1) @ yc
    covs /= n - 1
    return means, covs


def wild_mean_cov(base: np.ndarray, w: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Means and sample covariances of weight-perturbed rows.

    base has shape (n, q), w has shape (B, n); replicate b consists of the
    rows w[b, k] * base[k].  Returns means (B, q) and covariances
    (B, q, q) with divisor n-1.
    """
    base = np.ascontiguousarray(base, dtype=float)
    w = np.ascontiguousarray(w, dtype=float)
    y = w[:, :, None] * base[None, :, :]
    return batch_mean_cov(y)
