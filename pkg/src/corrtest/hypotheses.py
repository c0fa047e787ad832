"""Builders for hypothesis pairs (C, zeta) on pooled correlation vectors.

A hypothesis states C r = zeta for the pooled vector r of strictly-upper
vectorized correlation matrices.  The builders cover the standard
families (homogeneity across groups, diagonal correlation, a given
correlation matrix, all correlations equal); ``custom`` validates an
arbitrary pair.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, DimensionError
from .matops import Dims, centering_projector, vech_minus


@dataclass(frozen=True)
class HypothesisSpec:
    """A validated hypothesis matrix C (m x a*p_u) with target zeta (m)."""

    C: np.ndarray
    zeta: np.ndarray
    label: str
    a: int
    dims: Dims

    def __post_init__(self):
        c = np.atleast_2d(np.asarray(self.C, dtype=float))
        z = np.atleast_1d(np.asarray(self.zeta, dtype=float))
        if c.shape[1] != self.a * self.dims.p_u:
            raise DimensionError(
                f"hypothesis matrix has {c.shape[1]} columns, "
                f"expected a*p_u = {self.a * self.dims.p_u}"
            )
        if z.shape != (c.shape[0],):
            raise DimensionError(
                f"target vector has length {z.shape[0]}, expected {c.shape[0]} rows of C"
            )
        if not np.any(c):
            raise ArgumentError("hypothesis matrix must have at least one nonzero entry")
        object.__setattr__(self, "C", c)
        object.__setattr__(self, "zeta", z)

    @property
    def m(self) -> int:
        return self.C.shape[0]

    def rank(self, rel_tol: float = 1e-10) -> int:
        """Numerical rank of C (diagnostic only, never required)."""
        s = np.linalg.svd(self.C, compute_uv=False)
        return int(np.sum(s > rel_tol * s[0]))


def equal_correlation_matrices(a: int, dims: Dims) -> HypothesisSpec:
    """H0: all a groups share one correlation matrix.

    C = P_a (x) I_{p_u} with the centering projector P_a, zeta = 0.
    """
    if a < 2:
        raise ArgumentError(f"homogeneity needs at least 2 groups, got a={a}")
    c = np.kron(centering_projector(a), np.eye(dims.p_u))
    return HypothesisSpec(
        C=c, zeta=np.zeros(a * dims.p_u), label="equal-corr-matrices", a=a, dims=dims
    )


def identity_correlation(dims: Dims) -> HypothesisSpec:
    """H0: the (single group's) correlation matrix is diagonal."""
    return HypothesisSpec(
        C=np.eye(dims.p_u), zeta=np.zeros(dims.p_u), label="identity-corr", a=1, dims=dims
    )


def given_correlation(r_target: np.ndarray) -> HypothesisSpec:
    """H0: the correlation matrix equals the given matrix R."""
    r_target = np.asarray(r_target, dtype=float)
    if r_target.ndim != 2 or r_target.shape[0] != r_target.shape[1]:
        raise ArgumentError(f"R must be a square matrix, got shape {r_target.shape}")
    if not np.allclose(r_target, r_target.T, atol=1e-12):
        raise ArgumentError("R must be symmetric")
    if not np.allclose(np.diag(r_target), 1.0, atol=1e-12):
        raise ArgumentError("R must have unit diagonal")
    if np.any(np.abs(r_target) > 1 + 1e-12):
        raise ArgumentError("R entries must lie in [-1, 1]")
    dims = Dims(r_target.shape[0])
    return HypothesisSpec(
        C=np.eye(dims.p_u), zeta=vech_minus(r_target), label="given-corr", a=1, dims=dims
    )


def equal_correlations(dims: Dims) -> HypothesisSpec:
    """H0: all off-diagonal correlations of one group are equal
    (compound-symmetry pattern).  C = P_{p_u}, zeta = 0."""
    if dims.p_u < 2:
        raise ArgumentError(
            f"equal-correlations needs p_u >= 2 (d >= 3), got p_u={dims.p_u}"
        )
    return HypothesisSpec(
        C=centering_projector(dims.p_u),
        zeta=np.zeros(dims.p_u),
        label="equal-correlations",
        a=1,
        dims=dims,
    )


def custom(c: np.ndarray, zeta: np.ndarray, a: int, dims: Dims) -> HypothesisSpec:
    """Validate an arbitrary user-supplied (C, zeta) pair."""
    return HypothesisSpec(C=c, zeta=zeta, label="custom", a=a, dims=dims)


def load_custom_csv(path, a: int, dims: Dims) -> HypothesisSpec:
    """Read an m x (a*p_u + 1) block [C | zeta] from a CSV file."""
    block = np.loadtxt(path, delimiter=",", ndmin=2)
    if block.shape[1] != a * dims.p_u + 1:
        raise DimensionError(
            f"custom hypothesis file {path} has {block.shape[1]} columns, "
            f"expected a*p_u + 1 = {a * dims.p_u + 1}"
        )
    return custom(block[:, :-1], block[:, -1], a=a, dims=dims)
