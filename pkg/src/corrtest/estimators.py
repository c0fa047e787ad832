"""Per-group moment estimation.

For each group this produces the empirical covariance and correlation,
the fourth-moment covariance estimator of the vectorized centered
products, the Jacobian mapping covariance-scale fluctuations to
correlation scale, and the resulting correlation-scale covariance with
its pooled block-diagonal form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError, DimensionError
from .matops import Dims, index_vectors, structural, vech_indices, vech_minus

# Relative threshold below which a column's sample variance counts as
# zero (catches constant columns whose residuals are pure rounding).
_VAR_REL_EPS = 1e-24


@dataclass(frozen=True)
class GroupSample:
    """One group's raw observations, an n x d matrix (rows = subjects)."""

    data: np.ndarray

    def __post_init__(self):
        data = np.asarray(self.data, dtype=float)
        if data.ndim != 2:
            raise DimensionError(f"group data must be a 2-d array, got ndim={data.ndim}")
        n, d = data.shape
        if d < 2:
            raise DimensionError(f"observations must have dimension >= 2, got d={d}")
        if n < 2:
            raise DegenerateDataError(f"need at least 2 observations per group, got n={n}")
        if not np.all(np.isfinite(data)):
            raise DegenerateDataError("group data contains non-finite values")
        var = data.var(axis=0, ddof=1)
        scale = np.mean(data**2, axis=0) + 1.0
        dead = np.nonzero(var <= _VAR_REL_EPS * scale)[0]
        if dead.size:
            cols = ", ".join(str(j + 1) for j in dead)
            raise DegenerateDataError(f"column(s) {cols} have zero sample variance")
        object.__setattr__(self, "data", data)

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class MomentSet:
    """All per-group moment estimates derived from one GroupSample."""

    n: int
    mean: np.ndarray
    V_hat: np.ndarray  # d x d covariance, divisor n-1
    v_hat: np.ndarray  # vech(V_hat)
    R_hat: np.ndarray  # d x d correlation
    r_hat: np.ndarray  # strict-upper vectorization of R_hat
    Sigma_hat: np.ndarray  # p x p covariance of vech of centered products
    M_hat: np.ndarray  # p_u x p Jacobian at (v_hat, r_hat)
    Upsilon_hat: np.ndarray  # p_u x p_u = M_hat Sigma_hat M_hat^T

    @property
    def d(self) -> int:
        return self.mean.shape[0]


@dataclass(frozen=True)
class PooledMoments:
    """Per-group moments plus the pooled correlation vector and its
    block-diagonal covariance, scaled by N/n_i per block."""

    groups: tuple[MomentSet, ...]
    N: int
    r_hat_pooled: np.ndarray
    Upsilon_pooled: np.ndarray

    @property
    def a(self) -> int:
        return len(self.groups)

    @property
    def dims(self) -> Dims:
        return Dims(d=self.groups[0].d, a=len(self.groups))


def sample_moments(g: GroupSample):
    """Mean, covariance (divisor n-1) and correlation of one group.

    Returns (mean, V_hat, v_hat, R_hat, r_hat).
    """
    x = g.data
    mean = x.mean(axis=0)
    xc = x - mean
    v_mat = xc.T @ xc / (g.n - 1)
    sd = np.sqrt(np.diag(v_mat))
    r_mat = v_mat / np.outer(sd, sd)
    np.fill_diagonal(r_mat, 1.0)
    rows, cols = vech_indices(g.d)
    v_hat = v_mat[rows, cols]
    r_hat = vech_minus(r_mat)
    return mean, v_mat, v_hat, r_mat, r_hat


def centered_vech_products(g: GroupSample) -> np.ndarray:
    """The n x p matrix of vech(x~_k x~_k^T) minus their average, where
    x~_k are the mean-centered rows.  Shared by the fourth-moment
    estimator and the wild bootstrap."""
    xc = g.data - g.data.mean(axis=0)
    rows, cols = vech_indices(g.d)
    prods = xc[:, rows] * xc[:, cols]
    return prods - prods.mean(axis=0)


def sigma_hat(g: GroupSample) -> np.ndarray:
    """Fourth-moment covariance estimator of the vectorized centered
    products, with divisor n-1."""
    q = centered_vech_products(g)
    return q.T @ q / (g.n - 1)


def scaling_diagonal(v_hat: np.ndarray, dims: Dims) -> np.ndarray:
    """Diagonal of the variance-normalizing map: entry (j,k) of vech gets
    1/sqrt(v_jj v_kk).  Reused by the second-order Monte-Carlo engine."""
    v_hat = np.asarray(v_hat, dtype=float)
    if v_hat.shape != (dims.p,):
        raise DimensionError(f"expected length-{dims.p} v_hat, got shape {v_hat.shape}")
    iv = index_vectors(dims.d)
    variances = v_hat[iv.a0]
    if np.any(variances <= 0):
        bad = ", ".join(str(j + 1) for j in np.nonzero(variances <= 0)[0])
        raise DegenerateDataError(f"non-positive variance estimate for variable(s) {bad}")
    rows, cols = vech_indices(dims.d)
    return 1.0 / np.sqrt(variances[rows] * variances[cols])


def m_transform(v_hat: np.ndarray, r_hat: np.ndarray, dims: Dims) -> np.ndarray:
    """Jacobian of the covariance-to-correlation map at (v_hat, r_hat):
    [L - 1/2 diag(r_hat) M1] diag(scaling)."""
    r_hat = np.asarray(r_hat, dtype=float)
    if r_hat.shape != (dims.p_u,):
        raise DimensionError(f"expected length-{dims.p_u} r_hat, got shape {r_hat.shape}")
    lam = scaling_diagonal(v_hat, dims)
    sm = structural(dims.d)
    return (sm.L - 0.5 * r_hat[:, None] * sm.M1) * lam[None, :]


def moment_set(g: GroupSample) -> MomentSet:
    """Compute the full MomentSet for one group."""
    mean, v_mat, v_hat, r_mat, r_hat = sample_moments(g)
    dims = Dims(g.d)
    sig = sigma_hat(g)
    m_hat = m_transform(v_hat, r_hat, dims)
    ups = m_hat @ sig @ m_hat.T
    ups = (ups + ups.T) / 2.0
    return MomentSet(
        n=g.n,
        mean=mean,
        V_hat=v_mat,
        v_hat=v_hat,
        R_hat=r_mat,
        r_hat=r_hat,
        Sigma_hat=sig,
        M_hat=m_hat,
        Upsilon_hat=ups,
    )


def pooled_moments(groups) -> PooledMoments:
    """MomentSets for all groups plus the pooled correlation vector and
    its exact block-diagonal covariance, block i scaled by N/n_i."""
    groups = list(groups)
    if not groups:
        raise DimensionError("need at least one group")
    sets = []
    for g in groups:
        if not isinstance(g, GroupSample):
            g = GroupSample(g)
        sets.append(moment_set(g))
    d = sets[0].d
    for i, ms in enumerate(sets):
        if ms.d != d:
            raise DimensionError(
                f"group {i + 1} has dimension {ms.d}, expected {d} as in group 1"
            )
    n_total = sum(ms.n for ms in sets)
    p_u = sets[0].r_hat.shape[0]
    a = len(sets)
    r_pooled = np.concatenate([ms.r_hat for ms in sets])
    ups = np.zeros((a * p_u, a * p_u))
    for i, ms in enumerate(sets):
        sl = slice(i * p_u, (i + 1) * p_u)
        ups[sl, sl] = (n_total / ms.n) * ms.Upsilon_hat
    return PooledMoments(
        groups=tuple(sets), N=n_total, r_hat_pooled=r_pooled, Upsilon_pooled=ups
    )
