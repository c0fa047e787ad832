"""Resampling critical-value engines.

Three ways of simulating the null distribution of the ATS quadratic
form: a parametric bootstrap drawing synthetic correlation-scale normal
vectors with the plug-in covariance, a wild bootstrap reweighting the
centered product vectors, and a second-order Monte-Carlo that augments
the linear correlation-scale map with its quadratic correction term.

All engines are deterministic given (data, seed, B): replicates are
drawn in chunks whose seeds are spawned from the configured seed, so the
result is independent of chunk scheduling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import ArgumentError, ConfigError, DimensionError
from .estimators import (
    GroupSample,
    MomentSet,
    PooledMoments,
    centered_vech_products,
    pooled_moments,
)
from .hypotheses import HypothesisSpec
from .linalg import sqrtm_psd
from .matops import Dims, index_vectors, structural, vech, vech_indices
from .quadform import (
    TestReport,
    ats_statistic,
    contrast_gram,
    empirical_upper_quantile,
    mc_p_value,
    _trace_or_raise,
)

DEFAULT_BOOT_REPS = 1_000
DEFAULT_TAYLOR_REPS = 10_000

# Replicate chunks are sized so one chunk's raw draws stay below this
# many doubles.
_CHUNK_ELEMENTS = 1 << 24

_ENGINES = ("par", "wild", "taylor")
_WILD_WEIGHTS = ("rademacher", "gaussian")


@dataclass(frozen=True)
class ResamplingConfig:
    """Replicate count, seed and engine selection for one test run."""

    B: int
    seed: int
    engine: str
    wild_weight: str = "rademacher"

    def __post_init__(self):
        if self.B < 100:
            raise ConfigError(f"need at least 100 resampling replicates, got B={self.B}")
        if self.engine not in _ENGINES:
            raise ConfigError(f"unknown engine {self.engine!r}; expected one of {_ENGINES}")
        if self.wild_weight not in _WILD_WEIGHTS:
            raise ConfigError(
                f"unknown wild weight {self.wild_weight!r}; expected one of {_WILD_WEIGHTS}"
            )


@dataclass(frozen=True)
class TaylorContext:
    """Per-group ingredients of the quadratic correction term.

    lam is the diagonal of the variance-normalizing map; K = M4 M5 and M1
    are the structural matrices entering the correction; the index arrays
    avoid re-deriving the vech layout per replicate.
    """

    n: int
    v_hat: np.ndarray
    r_hat: np.ndarray
    R_hat: np.ndarray
    Sigma_hat: np.ndarray
    lam: np.ndarray  # length p
    vech_R: np.ndarray  # vech(R_hat), length p
    M_hat: np.ndarray  # p_u x p
    K: np.ndarray  # M4 @ M5, p x p
    M1: np.ndarray  # p_u x p
    a0: np.ndarray  # diagonal positions in vech, 0-based
    b0: np.ndarray  # off-diagonal positions in vech, 0-based
    iu: np.ndarray  # row index of each vech slot
    ju: np.ndarray  # column index of each vech slot


def taylor_context(ms: MomentSet) -> TaylorContext:
    """Assemble the replicate-loop cache for one group's moments."""
    dims = Dims(ms.d)
    iv = index_vectors(dims.d)
    sm = structural(dims.d)
    rows, cols = vech_indices(dims.d)
    variances = ms.v_hat[iv.a0]
    lam = 1.0 / np.sqrt(variances[rows] * variances[cols])
    return TaylorContext(
        n=ms.n,
        v_hat=ms.v_hat,
        r_hat=ms.r_hat,
        R_hat=ms.R_hat,
        Sigma_hat=ms.Sigma_hat,
        lam=lam,
        vech_R=vech(ms.R_hat),
        M_hat=ms.M_hat,
        K=sm.M4 @ sm.M5,
        M1=sm.M1,
        a0=iv.a0,
        b0=iv.b0,
        iu=rows,
        ju=cols,
    )


def taylor_f_batch(ctx: TaylorContext, y: np.ndarray) -> np.ndarray:
    """Quadratic correction applied to a (B, p) batch of draws.

    Each row x maps to
      1/4 L diag(vech(u u^T)) vech(R) - 1/2 L diag(Lx) M4 M5 Lx
      + 3/8 diag(r) M1 vech(u u^T),
    where L is the variance-normalizing map (ctx.lam) and u picks the
    diagonal slots of Lx.
    """
    w = y * ctx.lam[None, :]
    u = w[:, ctx.a0]
    vuu = u[:, ctx.iu] * u[:, ctx.ju]
    t1 = 0.25 * (vuu * ctx.vech_R[None, :])[:, ctx.b0]
    t2 = -0.5 * (w * (w @ ctx.K.T))[:, ctx.b0]
    t3 = 0.375 * (vuu @ ctx.M1.T) * ctx.r_hat[None, :]
    return t1 + t2 + t3


def taylor_f(ctx: TaylorContext, y: np.ndarray) -> np.ndarray:
    """Quadratic correction for a single length-p vector."""
    y = np.asarray(y, dtype=float)
    if y.shape != ctx.lam.shape:
        raise DimensionError(f"expected a length-{ctx.lam.shape[0]} vector, got {y.shape}")
    return taylor_f_batch(ctx, y[None, :])[0]


def _ensure_inputs(groups, h: HypothesisSpec, pm: PooledMoments | None):
    groups = [g if isinstance(g, GroupSample) else GroupSample(g) for g in groups]
    if pm is None:
        pm = pooled_moments(groups)
    if len(groups) != h.a:
        raise DimensionError(
            f"hypothesis is for {h.a} group(s) but {len(groups)} were supplied"
        )
    if pm.dims.d != h.dims.d:
        raise DimensionError(
            f"hypothesis dimension d={h.dims.d} does not match data d={pm.dims.d}"
        )
    return groups, pm


def _chunks(total: int, per_replicate_elements: int, seed: int):
    """Yield (chunk_size, child_seed) pairs covering ``total`` replicates."""
    chunk = max(1, _CHUNK_ELEMENTS // max(per_replicate_elements, 1))
    n_chunks = (total + chunk - 1) // chunk
    children = np.random.SeedSequence(seed).spawn(n_chunks)
    done = 0
    for child in children:
        rows = min(chunk, total - done)
        yield rows, child
        done += rows


def _hypothesis_blocks(h: HypothesisSpec):
    """Column blocks C_i of C and their Grams C_i^T C_i, one per group."""
    p_u = h.dims.p_u
    blocks = [h.C[:, i * p_u : (i + 1) * p_u] for i in range(h.a)]
    grams = [c.T @ c for c in blocks]
    return blocks, grams


def _method_tag(engine: str, factor: bool) -> str:
    tag = {"par": "ats-par", "wild": "ats-wild", "taylor": "ats-tay"}[engine]
    return tag + ("-m" if factor else "")


def parametric_bootstrap_test(
    groups,
    h: HypothesisSpec,
    alpha: float = 0.05,
    cfg: ResamplingConfig | None = None,
    pm: PooledMoments | None = None,
    factor: bool = False,
) -> TestReport:
    """Parametric bootstrap: per replicate, draw n_i synthetic normal
    vectors with covariance Ups_i per group, recompute the pooled mean
    and covariance, and evaluate the quadratic form with the recomputed
    trace weight.  The observed statistic is the plain ATS."""
    cfg = cfg or ResamplingConfig(B=DEFAULT_BOOT_REPS, seed=0, engine="par")
    if cfg.engine != "par":
        raise ConfigError(f"parametric bootstrap needs engine='par', got {cfg.engine!r}")
    groups, pm = _ensure_inputs(groups, h, pm)
    stat = ats_statistic(pm, h, factor=factor)
    blocks, grams = _hypothesis_blocks(h)
    roots = [sqrtm_psd(ms.Upsilon_hat) for ms in pm.groups]
    ns = [ms.n for ms in pm.groups]
    p_u = h.dims.p_u

    draws = np.empty(cfg.B)
    start = 0
    per_rep = max(ns) * p_u
    for rows, child in _chunks(cfg.B, per_rep, cfg.seed):
        rng = np.random.default_rng(child)
        cbar = np.zeros((rows, h.m))
        trace = np.zeros(rows)
        for i, ms in enumerate(pm.groups):
            z = rng.standard_normal((rows, ns[i], p_u))
            y = z @ roots[i]
            means, covs = _backend.batch_mean_cov(y)
            cbar += means @ blocks[i].T
            trace += (pm.N / ns[i]) * np.einsum("jk,bjk->b", grams[i], covs)
        q = np.full(rows, np.inf)
        ok = trace > 0
        q[ok] = pm.N * np.einsum("bm,bm->b", cbar, cbar)[ok] / trace[ok]
        draws[start : start + rows] = q
        start += rows

    crit = empirical_upper_quantile(draws, alpha)
    return TestReport(
        statistic=stat,
        critical_value=crit,
        p_value=mc_p_value(draws, stat),
        alpha=alpha,
        method=_method_tag("par", factor),
        reject=stat > crit,
        reps=cfg.B,
        seed=cfg.seed,
    )


def _wild_weights(rng: np.random.Generator, shape, kind: str) -> np.ndarray:
    if kind == "rademacher":
        return rng.integers(0, 2, size=shape).astype(float) * 2.0 - 1.0
    return rng.standard_normal(shape)


def wild_bootstrap_test(
    groups,
    h: HypothesisSpec,
    alpha: float = 0.05,
    cfg: ResamplingConfig | None = None,
    pm: PooledMoments | None = None,
    factor: bool = False,
) -> TestReport:
    """Wild bootstrap: multiply each centered product vector (already
    mapped to correlation scale) by an iid mean-0/variance-1 weight,
    then recompute mean, covariance and the quadratic form."""
    cfg = cfg or ResamplingConfig(B=DEFAULT_BOOT_REPS, seed=0, engine="wild")
    if cfg.engine != "wild":
        raise ConfigError(f"wild bootstrap needs engine='wild', got {cfg.engine!r}")
    groups, pm = _ensure_inputs(groups, h, pm)
    stat = ats_statistic(pm, h, factor=factor)
    blocks, grams = _hypothesis_blocks(h)
    bases = [
        centered_vech_products(g) @ ms.M_hat.T for g, ms in zip(groups, pm.groups)
    ]
    ns = [ms.n for ms in pm.groups]

    draws = np.empty(cfg.B)
    start = 0
    per_rep = sum(ns)
    for rows, child in _chunks(cfg.B, per_rep, cfg.seed):
        rng = np.random.default_rng(child)
        cbar = np.zeros((rows, h.m))
        trace = np.zeros(rows)
        for i, ms in enumerate(pm.groups):
            w = _wild_weights(rng, (rows, ns[i]), cfg.wild_weight)
            means, covs = _backend.wild_mean_cov(bases[i], w)
            cbar += means @ blocks[i].T
            trace += (pm.N / ns[i]) * np.einsum("jk,bjk->b", grams[i], covs)
        q = np.full(rows, np.inf)
        ok = trace > 0
        q[ok] = pm.N * np.einsum("bm,bm->b", cbar, cbar)[ok] / trace[ok]
        draws[start : start + rows] = q
        start += rows

    crit = empirical_upper_quantile(draws, alpha)
    return TestReport(
        statistic=stat,
        critical_value=crit,
        p_value=mc_p_value(draws, stat),
        alpha=alpha,
        method=_method_tag("wild", factor),
        reject=stat > crit,
        reps=cfg.B,
        seed=cfg.seed,
    )


def taylor_quadform_draws(
    pm: PooledMoments,
    h: HypothesisSpec,
    reps: int,
    seed: int,
    correction: bool = True,
) -> np.ndarray:
    """Simulate the second-order null quadratic form.

    Per replicate and group, a covariance-scale normal vector is drawn
    with the plug-in fourth-moment covariance, mapped to correlation
    scale, and (when ``correction`` is on) shifted by the quadratic term
    over sqrt(n_i); the pooled contrast enters the quadratic form with
    the trace weight computed once from the data.
    """
    blocks, _ = _hypothesis_blocks(h)
    trace0 = _trace_or_raise(contrast_gram(pm, h))
    ctxs = [taylor_context(ms) for ms in pm.groups]
    roots = [sqrtm_psd(ms.Sigma_hat) for ms in pm.groups]
    p = pm.dims.p

    draws = np.empty(reps)
    start = 0
    for rows, child in _chunks(reps, p, seed):
        rng = np.random.default_rng(child)
        cy = np.zeros((rows, h.m))
        for i, ms in enumerate(pm.groups):
            y = rng.standard_normal((rows, p)) @ roots[i]
            ytay = y @ ms.M_hat.T
            if correction:
                ytay += taylor_f_batch(ctxs[i], y) / np.sqrt(ms.n)
            cy += (ytay @ blocks[i].T) / np.sqrt(ms.n)
        draws[start : start + rows] = pm.N * np.einsum("bm,bm->b", cy, cy) / trace0
        start += rows
    return draws


def taylor_mc_test(
    groups,
    h: HypothesisSpec,
    alpha: float = 0.05,
    cfg: ResamplingConfig | None = None,
    pm: PooledMoments | None = None,
    factor: bool = False,
    correction: bool = True,
) -> TestReport:
    """Second-order Monte-Carlo test.  With ``correction=False`` the
    engine degenerates to sampling the first-order mixture limit."""
    cfg = cfg or ResamplingConfig(B=DEFAULT_TAYLOR_REPS, seed=0, engine="taylor")
    if cfg.engine != "taylor":
        raise ConfigError(f"Taylor engine needs engine='taylor', got {cfg.engine!r}")
    groups, pm = _ensure_inputs(groups, h, pm)
    stat = ats_statistic(pm, h, factor=factor)
    draws = taylor_quadform_draws(pm, h, cfg.B, cfg.seed, correction=correction)
    crit = empirical_upper_quantile(draws, alpha)
    return TestReport(
        statistic=stat,
        critical_value=crit,
        p_value=mc_p_value(draws, stat),
        alpha=alpha,
        method=_method_tag("taylor", factor),
        reject=stat > crit,
        reps=cfg.B,
        seed=cfg.seed,
    )
