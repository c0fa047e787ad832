"""Half-vectorization operators and the structural 0/1 selector matrices.

Everything downstream (moment estimators, quadratic forms, the
second-order Monte-Carlo correction) is assembled from the matrices
built here, so the stacking order is fixed once and for all: the upper
triangle is read row by row, (1,1),(1,2),...,(1,d),(2,2),...,(d,d).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ArgumentError, DimensionError


def _check_dim(d: int) -> int:
    d = int(d)
    if d < 2:
        raise DimensionError(f"dimension must be at least 2, got {d}")
    return d


@dataclass(frozen=True)
class Dims:
    """Problem dimensions: observation dimension d and group count a.

    p = d(d+1)/2 is the length of the full half-vectorization, p_u =
    d(d-1)/2 the length of the strictly-upper one.
    """

    d: int
    a: int = 1
    p: int = field(init=False)
    p_u: int = field(init=False)

    def __post_init__(self):
        _check_dim(self.d)
        if self.a < 1:
            raise ArgumentError(f"number of groups must be at least 1, got {self.a}")
        object.__setattr__(self, "p", self.d * (self.d + 1) // 2)
        object.__setattr__(self, "p_u", self.d * (self.d - 1) // 2)


@dataclass(frozen=True)
class IndexVectors:
    """1-based positions of diagonal (a_idx) and off-diagonal (b_idx)
    entries inside the length-p half-vectorization."""

    a_idx: np.ndarray
    b_idx: np.ndarray

    @property
    def a0(self) -> np.ndarray:
        """0-based diagonal positions (for array indexing)."""
        return self.a_idx - 1

    @property
    def b0(self) -> np.ndarray:
        """0-based off-diagonal positions (for array indexing)."""
        return self.b_idx - 1


@dataclass(frozen=True)
class StructuralMatrices:
    """The fixed selector matrices for one dimension d.

    L maps vech to the strictly-upper vectorization; M1..M6 realize the
    matrix-product identities used by the correlation Jacobian and its
    second-order correction; A_sel selects the d diagonal entries.
    """

    d: int
    L: np.ndarray
    M1: np.ndarray
    M2: np.ndarray
    M3: np.ndarray
    M4: np.ndarray
    M5: np.ndarray
    M6: np.ndarray

    @property
    def A_sel(self) -> np.ndarray:
        return self.M6


@lru_cache(maxsize=None)
def vech_indices(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Row/column index pairs (0-based) of the row-major upper triangle.

    vech(X) == X[rows, cols] for the returned arrays.
    """
    d = _check_dim(d)
    rows, cols = np.triu_indices(d)
    return rows, cols


@lru_cache(maxsize=None)
def vech_minus_indices(d: int) -> tuple[np.ndarray, np.ndarray]:
    """Like :func:`vech_indices` but for the strict upper triangle."""
    d = _check_dim(d)
    rows, cols = np.triu_indices(d, k=1)
    return rows, cols


def vech(x: np.ndarray) -> np.ndarray:
    """Stack the upper triangle (diagonal included) of a square matrix,
    row by row, into a length-p vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise DimensionError(f"vech expects a square matrix, got shape {x.shape}")
    rows, cols = vech_indices(x.shape[0])
    return x[rows, cols]


def vech_minus(x: np.ndarray) -> np.ndarray:
    """Stack the strict upper triangle of a square matrix, row by row,
    into a length-p_u vector."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise DimensionError(f"vech_minus expects a square matrix, got shape {x.shape}")
    rows, cols = vech_minus_indices(x.shape[0])
    return x[rows, cols]


def unvech(v: np.ndarray, d: int) -> np.ndarray:
    """Inverse of :func:`vech` for a symmetric d x d matrix."""
    v = np.asarray(v, dtype=float)
    dims = Dims(d)
    if v.shape != (dims.p,):
        raise DimensionError(f"expected a length-{dims.p} vector, got shape {v.shape}")
    rows, cols = vech_indices(d)
    x = np.zeros((d, d))
    x[rows, cols] = v
    x[cols, rows] = v
    return x


def index_vectors(d: int) -> IndexVectors:
    """Positions of diagonal/off-diagonal entries inside vech (1-based).

    a_k = 1 + sum_{j<k} (d+1-j); b is the ascending complement in 1..p.
    """
    d = _check_dim(d)
    p = d * (d + 1) // 2
    a_idx = np.ones(d, dtype=np.int64)
    for k in range(1, d):
        a_idx[k] = a_idx[k - 1] + (d - k + 1)
    mask = np.ones(p + 1, dtype=bool)
    mask[0] = False
    mask[a_idx] = False
    b_idx = np.nonzero(mask)[0].astype(np.int64)
    return IndexVectors(a_idx=a_idx, b_idx=b_idx)


def _basis_rows(targets: np.ndarray, width: int) -> np.ndarray:
    """Matrix whose l-th row is the standard basis vector e_{targets[l]}
    of length ``width`` (targets 1-based); coinciding targets add up."""
    out = np.zeros((len(targets), width))
    for ell, t in enumerate(targets):
        out[ell, t - 1] += 1.0
    return out


@lru_cache(maxsize=None)
def structural(d: int) -> StructuralMatrices:
    """Build the selector matrices for dimension d.

    All are assembled from sums of outer products of standard basis
    vectors; positions come from the auxiliary matrix H = 1_d a^T whose
    half-vectorizations encode which diagonal entry belongs to each
    row/column of a matrix product.
    """
    d = _check_dim(d)
    dims = Dims(d)
    p, p_u = dims.p, dims.p_u
    iv = index_vectors(d)

    # H[j, k] = a_k; vech-/vech of H and H^T give the four index vectors.
    h = np.ones(d)[:, None] * iv.a_idx[None, :].astype(float)
    h1 = vech_minus(h).astype(np.int64)
    h2 = vech_minus(h.T).astype(np.int64)
    h3 = vech(h).astype(np.int64)
    h4 = vech(h.T).astype(np.int64)

    L = _basis_rows(iv.b_idx, p)
    M1 = _basis_rows(h1, p) + _basis_rows(h2, p)
    M2 = _basis_rows(h4, p)
    M3 = _basis_rows(h3, p)
    M4 = M2 + M3
    M5 = np.diag(vech(np.eye(d)))
    M6 = _basis_rows(iv.a_idx, p)
    return StructuralMatrices(d=d, L=L, M1=M1, M2=M2, M3=M3, M4=M4, M5=M5, M6=M6)


def direct_sum(blocks) -> np.ndarray:
    """Block-diagonal arrangement of square matrices."""
    blocks = [np.atleast_2d(np.asarray(b, dtype=float)) for b in blocks]
    if not blocks:
        raise ArgumentError("direct_sum needs at least one block")
    for b in blocks:
        if b.shape[0] != b.shape[1]:
            raise DimensionError(f"direct_sum blocks must be square, got shape {b.shape}")
    total = sum(b.shape[0] for b in blocks)
    out = np.zeros((total, total))
    offset = 0
    for b in blocks:
        k = b.shape[0]
        out[offset : offset + k, offset : offset + k] = b
        offset += k
    return out


def centering_projector(k: int) -> np.ndarray:
    """The centering projector P_k = I_k - (1/k) 1_k 1_k^T.

    Idempotent with zero row sums, so P_k r = 0 encodes equality of the
    entries of r.
    """
    k = int(k)
    if k < 1:
        raise ArgumentError(f"projector size must be at least 1, got {k}")
    return np.eye(k) - np.full((k, k), 1.0 / k)
