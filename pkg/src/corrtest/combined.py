"""Simultaneous test of equal covariance and equal correlation matrices
for two groups.

The contrast stacks the d variance differences on top of the p_u
correlation differences, scaled by sqrt(N).  Coordinates are flagged
either against a Monte-Carlo equicoordinate quantile of the limiting
normal distribution, or against per-coordinate quantiles of a
second-order Monte-Carlo sample whose common level is calibrated so the
family-wise error stays at alpha (the beta-tilde search).  Which
coordinates are flagged tells variance differences apart from genuine
dependence differences.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, ConfigError, DegenerateDataError, DimensionError
from .estimators import GroupSample, MomentSet, moment_set
from .linalg import sqrtm_psd
from .matops import structural, vech_minus_indices
from .quadform import empirical_upper_quantile
from .resampling import taylor_context, taylor_f_batch, _chunks

DEFAULT_EQUI_REPS = 100_000
DEFAULT_TAYLOR_REPS = 1_000

CLASS_DEPENDENCE = "different-dependence"
CLASS_VARIANCES = "equal-correlation-different-variances"
CLASS_NONE = "no-rejection"


@dataclass(frozen=True)
class ContrastStatistic:
    """sqrt(N)-scaled difference of (variances, correlations) between two
    groups, with its plug-in covariance."""

    T: np.ndarray  # length p = d + p_u
    Gamma_hat: np.ndarray  # p x p
    d: int
    N: int

    @property
    def p(self) -> int:
        return self.T.shape[0]

    @property
    def variance_coordinates(self) -> np.ndarray:
        """1-based coordinate numbers holding variance differences."""
        return np.arange(1, self.d + 1)

    @property
    def correlation_coordinates(self) -> np.ndarray:
        """1-based coordinate numbers holding correlation differences."""
        return np.arange(self.d + 1, self.p + 1)


@dataclass(frozen=True)
class CombinedVerdict:
    """Decision, classification and the per-coordinate evidence."""

    reject_any: bool
    classification: str
    flagged_coordinates: tuple[int, ...]  # 1-based
    per_coordinate_quantiles: np.ndarray  # thresholds on the raw scale
    beta_tilde: float | None = None
    z_quantile: float | None = None


def coordinate_labels(d: int) -> list[str]:
    """Human-readable names for the p = d + p_u contrast coordinates."""
    labels = [f"variance of variable {j}" for j in range(1, d + 1)]
    rows, cols = vech_minus_indices(d)
    labels += [f"correlation of pair ({j + 1},{k + 1})" for j, k in zip(rows, cols)]
    return labels


def _stack(ms: MomentSet) -> np.ndarray:
    return np.concatenate([np.diag(ms.V_hat), ms.r_hat])


def _stacked_map(ms: MomentSet) -> np.ndarray:
    """[A_sel; M_hat]: maps covariance-scale vectors to the contrast scale."""
    sm = structural(ms.d)
    return np.vstack([sm.A_sel, ms.M_hat])


def contrast_statistic(g1: GroupSample, g2: GroupSample) -> ContrastStatistic:
    """The scaled two-group contrast and its plug-in covariance."""
    g1 = g1 if isinstance(g1, GroupSample) else GroupSample(g1)
    g2 = g2 if isinstance(g2, GroupSample) else GroupSample(g2)
    if g1.d != g2.d:
        raise DimensionError(f"groups have mismatched dimensions {g1.d} and {g2.d}")
    ms1, ms2 = moment_set(g1), moment_set(g2)
    n_total = ms1.n + ms2.n
    t = np.sqrt(n_total) * (_stack(ms1) - _stack(ms2))
    gamma = np.zeros((t.shape[0], t.shape[0]))
    for ms in (ms1, ms2):
        b = _stacked_map(ms)
        gamma += (n_total / ms.n) * (b @ ms.Sigma_hat @ b.T)
    gamma = (gamma + gamma.T) / 2.0
    return ContrastStatistic(T=t, Gamma_hat=gamma, d=g1.d, N=n_total)


def _classify(flagged: np.ndarray, d: int) -> str:
    if flagged.size == 0:
        return CLASS_NONE
    if np.any(flagged > d):
        return CLASS_DEPENDENCE
    return CLASS_VARIANCES


def equicoordinate_test(
    cs: ContrastStatistic,
    alpha: float = 0.05,
    reps: int = DEFAULT_EQUI_REPS,
    seed: int = 0,
) -> CombinedVerdict:
    """Flag coordinates whose standardized statistic exceeds the
    two-sided equicoordinate quantile of the limiting normal law.

    The quantile is the empirical (1-alpha) quantile of max_l |Z_l| over
    Monte-Carlo draws Z from N(0, Gamma-correlation).  Requires strictly
    positive diagonal of Gamma; otherwise use the Taylor procedure.
    """
    if reps < 100:
        raise ConfigError(f"need at least 100 Monte-Carlo replicates, got {reps}")
    diag = np.diag(cs.Gamma_hat)
    if np.any(diag <= 0):
        raise DegenerateDataError(
            "Gamma_hat has non-positive diagonal entries; the standardized "
            "equicoordinate test is unavailable - use taylor_combined_test"
        )
    sd = np.sqrt(diag)
    t_std = cs.T / sd
    corr = cs.Gamma_hat / np.outer(sd, sd)
    root = sqrtm_psd(corr)

    maxima = np.empty(reps)
    start = 0
    for rows, child in _chunks(reps, cs.p, seed):
        rng = np.random.default_rng(child)
        z = rng.standard_normal((rows, cs.p)) @ root
        maxima[start : start + rows] = np.abs(z).max(axis=1)
        start += rows
    z_quant = empirical_upper_quantile(maxima, alpha)

    flagged = np.nonzero(np.abs(t_std) >= z_quant)[0] + 1
    return CombinedVerdict(
        reject_any=flagged.size > 0,
        classification=_classify(flagged, cs.d),
        flagged_coordinates=tuple(int(j) for j in flagged),
        per_coordinate_quantiles=z_quant * sd,
        beta_tilde=None,
        z_quantile=z_quant,
    )


def _beta_tilde_search(
    columns: np.ndarray, alpha: float
) -> tuple[float, np.ndarray, np.ndarray]:
    """Largest grid level beta with simulated family-wise error <= alpha.

    ``columns`` holds the B x p replicate matrix.  For each replicate the
    earliest grid index at which it exceeds some coordinate's (1-beta)
    upper-order-statistic quantile is found by ranking; the family-wise
    error curve over the grid {0, 1/B, ..., (B-1)/B} is then a cumulative
    count, nondecreasing by construction.

    Returns (beta_tilde, per-coordinate quantiles at beta_tilde, curve).
    """
    b_reps, p = columns.shape
    sorted_cols = np.sort(columns, axis=0)
    # s[b, l] = number of values in column l strictly below columns[b, l]
    s = np.empty((b_reps, p), dtype=np.int64)
    for ell in range(p):
        s[:, ell] = np.searchsorted(sorted_cols[:, ell], columns[:, ell], side="left")
    # replicate b first exceeds at grid index B - max_l s[b, l]
    first = b_reps - s.max(axis=1)
    counts = np.bincount(first, minlength=b_reps + 1)
    curve = np.cumsum(counts[:b_reps]) / b_reps
    if np.any(np.diff(curve) < 0):
        raise ArgumentError("family-wise error curve must be nondecreasing")
    feasible = np.nonzero(curve <= alpha)[0]
    j_star = int(feasible[-1])
    k = b_reps - j_star  # order-statistic index of the (1 - beta) quantile
    quantiles = sorted_cols[k - 1, :]
    return j_star / b_reps, quantiles, curve


def taylor_combined_test(
    g1: GroupSample,
    g2: GroupSample,
    alpha: float = 0.05,
    reps: int = DEFAULT_TAYLOR_REPS,
    seed: int = 0,
    two_sided: bool = True,
) -> CombinedVerdict:
    """Combined test with second-order Monte-Carlo calibration.

    Replicates of the contrast are simulated from the stacked
    covariance-to-(variances, correlations) map with the quadratic
    correction on the correlation block; a common per-coordinate level
    beta-tilde is then chosen so the simulated family-wise error stays at
    alpha, and the observed contrast is compared coordinate-wise.

    ``two_sided`` (default) works with absolute values of both the
    replicates and the statistic; the one-sided variant compares raw
    values exactly as the calibration display is written.
    """
    if reps < 100:
        raise ConfigError(f"need at least 100 replicates, got {reps}")
    g1 = g1 if isinstance(g1, GroupSample) else GroupSample(g1)
    g2 = g2 if isinstance(g2, GroupSample) else GroupSample(g2)
    cs = contrast_statistic(g1, g2)
    ms = (moment_set(g1), moment_set(g2))
    ctxs = [taylor_context(m) for m in ms]
    roots = [sqrtm_psd(m.Sigma_hat) for m in ms]
    maps = [_stacked_map(m) for m in ms]
    p_cov = ms[0].v_hat.shape[0]

    draws = np.empty((reps, cs.p))
    start = 0
    for rows, child in _chunks(reps, p_cov, seed):
        rng = np.random.default_rng(child)
        t_tay = np.zeros((rows, cs.p))
        sign = 1.0
        for i in range(2):
            y = rng.standard_normal((rows, p_cov)) @ roots[i]
            ytay = y @ maps[i].T
            ytay[:, cs.d :] += taylor_f_batch(ctxs[i], y) / np.sqrt(ms[i].n)
            t_tay += sign * ytay / np.sqrt(ms[i].n)
            sign = -1.0
        draws[start : start + rows] = np.sqrt(cs.N) * t_tay
        start += rows

    columns = np.abs(draws) if two_sided else draws
    t_obs = np.abs(cs.T) if two_sided else cs.T
    beta_tilde, quantiles, _ = _beta_tilde_search(columns, alpha)
    flagged = np.nonzero(t_obs > quantiles)[0] + 1
    return CombinedVerdict(
        reject_any=flagged.size > 0,
        classification=_classify(flagged, cs.d),
        flagged_coordinates=tuple(int(j) for j in flagged),
        per_coordinate_quantiles=quantiles,
        beta_tilde=beta_tilde,
        z_quantile=None,
    )
