"""The ATS quadratic form and its Monte-Carlo critical-value engine.

The statistic is N (C r_hat - zeta)^T (C r_hat - zeta) / tr(C Ups C^T);
its null limit is a mixture of independent chi-square(1) variables whose
weights are the eigenvalues of the trace-normalized contrast covariance.
Critical values come from simulating that mixture.  A variance-stabilized
variant applies atanh componentwise before forming the quadratic form.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    ArgumentError,
    ConfigError,
    DegenerateHypothesisError,
    TransformDomainError,
)
from .estimators import PooledMoments
from .hypotheses import HypothesisSpec
from .linalg import psd_eigvalsh, sqrtm_psd

# One simulation chunk draws at most this many chi-square variates so the
# workspace stays bounded; chunks get independent child seeds, which keeps
# results reproducible under any parallel schedule.
_CHUNK_ELEMENTS = 1 << 22

DEFAULT_MC_REPS = 10_000

# Small negative eigenvalue mass relative to the largest one is rounding
# noise; beyond this it is an error (handled inside psd_eigvalsh).
_EIG_REL_TOL = 1e-10


@dataclass(frozen=True)
class TestReport:
    """Outcome of one test: statistic, critical value, p-value, decision."""

    statistic: float
    critical_value: float
    p_value: float
    alpha: float
    method: str
    reject: bool
    reps: int
    seed: int

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ArgumentError(f"alpha must lie in (0, 1], got {self.alpha}")
        if not 0.0 < self.p_value <= 1.0:
            raise ArgumentError(f"p-value {self.p_value} outside (0, 1]")
        if self.reject != (self.statistic > self.critical_value):
            raise ArgumentError("decision inconsistent with statistic and critical value")

    def to_dict(self) -> dict:
        return {
            "statistic": self.statistic,
            "critical_value": self.critical_value,
            "p_value": self.p_value,
            "alpha": self.alpha,
            "method": self.method,
            "reject": self.reject,
            "reps": self.reps,
            "seed": self.seed,
        }


def contrast_gram(pm: PooledMoments, h: HypothesisSpec) -> np.ndarray:
    """C Ups C^T for the pooled covariance estimate (m x m, symmetric)."""
    g = h.C @ pm.Upsilon_pooled @ h.C.T
    return (g + g.T) / 2.0


def _trace_or_raise(g: np.ndarray) -> float:
    tr = float(np.trace(g))
    if tr <= 0.0:
        raise DegenerateHypothesisError(
            "the contrast covariance C Ups C^T has zero trace; "
            "the hypothesis carries no variation under the data"
        )
    return tr


def small_sample_factor(n_total: int) -> float:
    """The (N-3)/N multiplier used by the -m test variants."""
    return (n_total - 3) / n_total


def ats_statistic(pm: PooledMoments, h: HypothesisSpec, factor: bool = False) -> float:
    """N ||C r_hat - zeta||^2 / tr(C Ups C^T), optionally times (N-3)/N."""
    diff = h.C @ pm.r_hat_pooled - h.zeta
    tr = _trace_or_raise(contrast_gram(pm, h))
    stat = pm.N * float(diff @ diff) / tr
    if factor:
        stat *= small_sample_factor(pm.N)
    return stat


def limit_eigenvalues(
    pm: PooledMoments, h: HypothesisSpec, E: np.ndarray | None = None
) -> np.ndarray:
    """Weights of the chi-square mixture in the null limit, nonincreasing.

    For the ATS weight E = I / tr(C Ups C^T) these are the eigenvalues of
    C Ups C^T divided by its trace (same nonzero spectrum as the pooled
    p_u-scale product, at m x m cost).  A custom symmetric E is supported
    through the square-root similarity transform.
    """
    g = contrast_gram(pm, h)
    tr = _trace_or_raise(g)
    if E is None:
        vals = psd_eigvalsh(g, rel_tol=_EIG_REL_TOL) / tr
    else:
        E = np.asarray(E, dtype=float)
        if E.shape != (h.m, h.m):
            raise ArgumentError(f"E must be {h.m} x {h.m}, got shape {E.shape}")
        k = sqrtm_psd(g, rel_tol=_EIG_REL_TOL)
        vals = np.linalg.eigvalsh((k @ E @ k + (k @ E @ k).T) / 2.0)
        vals = np.clip(vals, 0.0, None)
    full = np.zeros(h.a * h.dims.p_u)
    take = min(len(vals), len(full))
    full[:take] = np.sort(vals)[::-1][:take]
    return full


def empirical_upper_quantile(draws: np.ndarray, alpha: float) -> float:
    """Order statistic at index ceil((1-alpha) W); -inf when alpha = 1."""
    w = len(draws)
    k = int(np.ceil((1.0 - alpha) * w))
    if k <= 0:
        return float("-inf")
    return float(np.partition(draws, k - 1)[k - 1])


def mc_p_value(draws: np.ndarray, statistic: float) -> float:
    """(1 + #{draws >= statistic}) / (1 + W); never exactly zero."""
    return (1.0 + int(np.sum(draws >= statistic))) / (1.0 + len(draws))


def weighted_chisq_draws(lambdas: np.ndarray, reps: int, seed: int) -> np.ndarray:
    """Simulate ``reps`` draws of sum_l lambda_l B_l with iid chi^2_1 B_l.

    Zero weights are dropped before drawing.  Generation is chunked; each
    chunk uses a child seed spawned from ``seed``.
    """
    lam = np.asarray(lambdas, dtype=float)
    lam = lam[lam > 0.0]
    if lam.size == 0:
        raise DegenerateHypothesisError("all mixture weights are zero")
    n_lam = lam.size
    chunk_rows = max(1, _CHUNK_ELEMENTS // n_lam)
    n_chunks = (reps + chunk_rows - 1) // chunk_rows
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    out = np.empty(reps)
    start = 0
    for child in children:
        rng = np.random.default_rng(child)
        rows = min(chunk_rows, reps - start)
        out[start : start + rows] = rng.chisquare(1.0, (rows, n_lam)) @ lam
        start += rows
    return out


def weighted_chisq_quantile(
    lambdas: np.ndarray, alpha: float, reps: int, seed: int
) -> tuple[float, np.ndarray]:
    """Empirical (1-alpha) quantile of the weighted chi-square mixture.

    Returns the quantile together with the simulated draws so callers can
    reuse them for p-values.
    """
    if reps < 100:
        raise ConfigError(f"need at least 100 Monte-Carlo replicates, got {reps}")
    if not 0.0 < alpha <= 1.0:
        raise ArgumentError(f"alpha must lie in (0, 1], got {alpha}")
    draws = weighted_chisq_draws(lambdas, reps, seed)
    return empirical_upper_quantile(draws, alpha), draws


def fisherz_ats(
    pm: PooledMoments, h: HypothesisSpec, factor: bool = False
) -> tuple[float, np.ndarray]:
    """Variance-stabilized ATS: atanh is applied componentwise to C r_hat
    and zeta before forming the quadratic form.

    Returns the statistic and the transformed contrast covariance
    J (C Ups C^T) J whose trace-normalized eigenvalues drive the limit.
    """
    cr = h.C @ pm.r_hat_pooled
    if np.any(np.abs(cr) >= 1.0) or np.any(np.abs(h.zeta) >= 1.0):
        raise TransformDomainError(
            "atanh transform needs all components of C r_hat and zeta "
            "strictly inside (-1, 1)"
        )
    diff = np.arctanh(cr) - np.arctanh(h.zeta)
    jac = 1.0 / (1.0 - cr**2)
    g = contrast_gram(pm, h)
    g_z = jac[:, None] * g * jac[None, :]
    tr = _trace_or_raise(g_z)
    stat = pm.N * float(diff @ diff) / tr
    if factor:
        stat *= small_sample_factor(pm.N)
    return stat, g_z


def parse_method(method: str) -> tuple[str, bool]:
    """Split a method tag into (base engine tag, small-sample-factor flag)."""
    base = method
    factor = False
    if method.endswith("-m"):
        base, factor = method[:-2], True
    known = {"ats-mc", "ats-par", "ats-wild", "ats-tay", "atsfz-mc"}
    if base not in known:
        raise ArgumentError(f"unknown method {method!r}; expected one of {sorted(known)}"
                            " with optional -m suffix")
    return base, factor


def mc_test(
    pm: PooledMoments,
    h: HypothesisSpec,
    method: str = "ats-mc",
    alpha: float = 0.05,
    reps: int = DEFAULT_MC_REPS,
    seed: int = 0,
) -> TestReport:
    """Monte-Carlo test: compare the statistic against the simulated
    (1-alpha) quantile of its estimated chi-square-mixture limit."""
    base, factor = parse_method(method)
    if base == "ats-mc":
        stat = ats_statistic(pm, h, factor=factor)
        lambdas = limit_eigenvalues(pm, h)
    elif base == "atsfz-mc":
        stat, g_z = fisherz_ats(pm, h, factor=factor)
        lambdas = np.sort(psd_eigvalsh(g_z, rel_tol=_EIG_REL_TOL))[::-1]
        lambdas = lambdas / np.trace(g_z)
    else:
        raise ArgumentError(
            f"method {method!r} is a resampling engine; use the resampling module"
        )
    quantile, draws = weighted_chisq_quantile(lambdas, alpha, reps, seed)
    return TestReport(
        statistic=stat,
        critical_value=quantile,
        p_value=mc_p_value(draws, stat),
        alpha=alpha,
        method=method,
        reject=stat > quantile,
        reps=reps,
        seed=seed,
    )
