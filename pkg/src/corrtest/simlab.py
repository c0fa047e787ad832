"""Data generators and experiment drivers for type-I-error and power
studies.

Observations are drawn as mu + V^{1/2} Z with iid standardized errors
(normal, t with 9 df, skewed normal, gamma) and a configurable covariance
structure per group.  Experiments are reproducible: every run derives its
data stream and engine seeds from (scenario seed, run index), so results
do not depend on scheduling or worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import ArgumentError, ConfigError
from .estimators import GroupSample, pooled_moments
from .hypotheses import (
    HypothesisSpec,
    equal_correlation_matrices,
    equal_correlations,
    identity_correlation,
)
from .linalg import sqrtm_psd
from .matops import Dims, vech_minus
from .methods import run_method

DISTRIBUTIONS = ("normal", "t9", "skew-normal", "gamma")
COV_KINDS = ("toeplitz", "ar", "diag-scale", "identity-plus-J", "shifted")
SCENARIOS = ("A_r", "B_r", "C_r", "E", "power-A", "power-B")

# Default replication budget, desk scale: published studies use 10,000
# runs and 1,000 bootstrap replicates; these defaults keep one table cell
# in the minutes range while staying within ~3 binomial standard errors.
DESK_RUNS = 2_000
DESK_BOOT_REPS = 500
DESK_MC_REPS = 10_000


@dataclass(frozen=True)
class DistributionSpec:
    """Error distribution, standardized to mean 0 and variance 1."""

    family: str
    gamma_shape: float = 2.0
    skew_alpha: float = 4.0
    t_df: float = 9.0

    def __post_init__(self):
        if self.family not in DISTRIBUTIONS:
            raise ConfigError(
                f"unknown distribution {self.family!r}; expected one of {DISTRIBUTIONS}"
            )
        if self.family == "gamma" and self.gamma_shape <= 0:
            raise ConfigError(f"gamma shape must be positive, got {self.gamma_shape}")
        if self.family == "t9" and self.t_df <= 4:
            raise ConfigError("t distribution needs more than 4 df for finite fourth moments")


def draw_standardized(dist: DistributionSpec, rng: np.random.Generator, size) -> np.ndarray:
    """iid draws with mean 0 and variance 1 from the given family."""
    if dist.family == "normal":
        return rng.standard_normal(size)
    if dist.family == "t9":
        return rng.standard_t(dist.t_df, size) / np.sqrt(dist.t_df / (dist.t_df - 2.0))
    if dist.family == "skew-normal":
        # X = delta |U0| + sqrt(1 - delta^2) U1 has the skewed normal law
        # with shape alpha = delta / sqrt(1 - delta^2).
        delta = dist.skew_alpha / np.sqrt(1.0 + dist.skew_alpha**2)
        x = delta * np.abs(rng.standard_normal(size))
        x += np.sqrt(1.0 - delta**2) * rng.standard_normal(size)
        return (x - delta * np.sqrt(2.0 / np.pi)) / np.sqrt(1.0 - 2.0 * delta**2 / np.pi)
    k = dist.gamma_shape
    return (rng.gamma(k, 1.0, size) - k) / np.sqrt(k)


@dataclass(frozen=True)
class CovarianceSpec:
    """Recipe for one group's covariance matrix.

    Kinds: toeplitz (1 - |i-j|/2d), ar (rho^|i-j|), diag-scale
    (diag(scale)), identity-plus-J (I + delta J), shifted (base + delta J).
    ``scale`` on toeplitz/ar applies the two-sided diagonal scaling
    D^{1/2} V D^{1/2}, which changes variances but not correlations.
    """

    kind: str
    d: int
    rho: float = 0.6
    scale: tuple[float, ...] | None = None
    delta: float = 0.0
    base: "CovarianceSpec | None" = None

    def __post_init__(self):
        if self.kind not in COV_KINDS:
            raise ConfigError(f"unknown covariance kind {self.kind!r}; expected {COV_KINDS}")
        if self.kind == "shifted" and self.base is None:
            raise ConfigError("shifted covariance needs a base spec")
        if self.kind == "diag-scale" and self.scale is None:
            raise ConfigError("diag-scale covariance needs a scale vector")

    def build(self) -> np.ndarray:
        d = self.d
        idx = np.arange(d)
        if self.kind == "toeplitz":
            v = 1.0 - np.abs(idx[:, None] - idx[None, :]) / (2.0 * d)
        elif self.kind == "ar":
            v = self.rho ** np.abs(idx[:, None] - idx[None, :])
        elif self.kind == "diag-scale":
            v = np.diag(np.asarray(self.scale, dtype=float))
        elif self.kind == "identity-plus-J":
            v = np.eye(d) + self.delta * np.ones((d, d))
        else:  # shifted
            v = self.base.build() + self.delta * np.ones((d, d))
        if self.kind in ("toeplitz", "ar") and self.scale is not None:
            root = np.sqrt(np.asarray(self.scale, dtype=float))
            v = root[:, None] * v * root[None, :]
        if np.linalg.eigvalsh((v + v.T) / 2.0)[0] <= 0:
            raise ConfigError(f"covariance spec {self} does not produce an SPD matrix")
        return v


def group_scale_vector(d: int) -> tuple[float, ...]:
    """The published variance ladder (d, d+1, ..., 2d-1)/d; equals
    (1, 1.2, ..., 1.8) for d = 5."""
    return tuple((d + j) / d for j in range(d))


@dataclass(frozen=True)
class SimScenario:
    """One simulation design: group sizes, generator, hypothesis, methods
    and replication budget."""

    label: str
    group_ns: tuple[int, ...]
    dist: DistributionSpec
    covs: tuple[CovarianceSpec, ...]
    hypothesis_family: str
    methods: tuple[str, ...]
    runs: int = DESK_RUNS
    mc_reps: int = DESK_MC_REPS
    boot_reps: int = DESK_BOOT_REPS
    alpha: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.runs < 1:
            raise ConfigError(f"need at least one run, got runs={self.runs}")
        if len(self.group_ns) != len(self.covs):
            raise ConfigError("one covariance spec per group is required")

    @property
    def d(self) -> int:
        return self.covs[0].d

    @property
    def a(self) -> int:
        return len(self.group_ns)

    @property
    def N(self) -> int:
        return sum(self.group_ns)

    def hypothesis(self) -> HypothesisSpec:
        dims = Dims(self.d, a=self.a)
        if self.hypothesis_family == "equal-corr-matrices":
            return equal_correlation_matrices(self.a, dims)
        if self.hypothesis_family == "identity-corr":
            return identity_correlation(dims)
        if self.hypothesis_family == "equal-correlations":
            return equal_correlations(dims)
        raise ConfigError(f"unknown hypothesis family {self.hypothesis_family!r}")

    def group_means(self) -> list[np.ndarray]:
        """Group 1 uses the published quadratic mean (1,4,...,d^2)/4,
        further groups are centered."""
        mu1 = (np.arange(1, self.d + 1) ** 2) / 4.0
        return [mu1] + [np.zeros(self.d) for _ in range(self.a - 1)]


def _two_group_sizes(n_total: int) -> tuple[int, int]:
    n1 = int(round(0.6 * n_total))
    return n1, n_total - n1


def scenario(
    label: str,
    dist: str | DistributionSpec = "normal",
    n: int | None = None,
    d: int = 5,
    methods: tuple[str, ...] = ("ats-par",),
    runs: int = DESK_RUNS,
    mc_reps: int = DESK_MC_REPS,
    boot_reps: int = DESK_BOOT_REPS,
    alpha: float = 0.05,
    seed: int = 0,
) -> SimScenario:
    """Build one of the published designs.

    ``n`` is the total sample size N; two-group designs split it 60/40.
    Defaults: N = 100 for the two-group power design, n = 125 for the
    one-group one.
    """
    if label not in SCENARIOS:
        raise ConfigError(f"unknown scenario {label!r}; expected one of {SCENARIOS}")
    if isinstance(dist, str):
        dist = DistributionSpec(dist)
    if label == "A_r":
        if n is None:
            raise ConfigError("scenario A_r needs the total sample size n")
        base = CovarianceSpec("toeplitz", d)
        covs = (base, replace(base, scale=group_scale_vector(d)))
        group_ns = _two_group_sizes(n)
        family = "equal-corr-matrices"
    elif label == "B_r":
        if n is None:
            raise ConfigError("scenario B_r needs the group size n")
        covs = (CovarianceSpec("diag-scale", d, scale=group_scale_vector(d)),)
        group_ns = (n,)
        family = "identity-corr"
    elif label == "C_r":
        if n is None:
            raise ConfigError("scenario C_r needs the group size n")
        covs = (CovarianceSpec("identity-plus-J", d, delta=1.0),)
        group_ns = (n,)
        family = "equal-correlations"
    elif label == "E":
        if n is None:
            raise ConfigError("scenario E needs the group size n")
        covs = (CovarianceSpec("diag-scale", d, scale=tuple((j + 1) / d for j in range(d))),)
        group_ns = (n,)
        family = "identity-corr"
    elif label == "power-A":
        base = CovarianceSpec("toeplitz", d)
        covs = (CovarianceSpec("shifted", d, base=base, delta=0.0), base)
        group_ns = _two_group_sizes(n if n is not None else 100)
        family = "equal-corr-matrices"
    else:  # power-B
        covs = (CovarianceSpec("identity-plus-J", d, delta=0.0),)
        group_ns = (n if n is not None else 125,)
        family = "identity-corr"
    return SimScenario(
        label=label,
        group_ns=group_ns,
        dist=dist,
        covs=covs,
        hypothesis_family=family,
        methods=tuple(methods),
        runs=runs,
        mc_reps=mc_reps,
        boot_reps=boot_reps,
        alpha=alpha,
        seed=seed,
    )


def draw_group(
    n: int,
    mu: np.ndarray,
    cov: CovarianceSpec | np.ndarray,
    dist: DistributionSpec,
    seed,
) -> GroupSample:
    """One group of n observations mu + V^{1/2} z with iid standardized
    errors; V^{1/2} is the symmetric eigendecomposition square root."""
    v = cov.build() if isinstance(cov, CovarianceSpec) else np.asarray(cov, dtype=float)
    root = sqrtm_psd(v)
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    z = draw_standardized(dist, rng, (n, v.shape[0]))
    return GroupSample(np.asarray(mu, dtype=float)[None, :] + z @ root)


def _population_corr_vector(sc: SimScenario) -> np.ndarray:
    parts = []
    for spec in sc.covs:
        v = spec.build()
        sd = np.sqrt(np.diag(v))
        parts.append(vech_minus(v / np.outer(sd, sd)))
    return np.concatenate(parts)


def validate_null(sc: SimScenario) -> None:
    """Check structurally that the scenario's generator satisfies its
    hypothesis (population correlations in the null space of C)."""
    h = sc.hypothesis()
    residual = h.C @ _population_corr_vector(sc) - h.zeta
    if np.max(np.abs(residual)) > 1e-10:
        raise ConfigError(
            f"scenario {sc.label!r} generator violates its null hypothesis "
            f"(max residual {np.max(np.abs(residual)):.3e})"
        )


def _delta_covs(sc: SimScenario, delta: float) -> tuple[CovarianceSpec, ...]:
    """Group 1's covariance gets the delta J shift; other groups keep theirs."""
    first = sc.covs[0]
    if first.kind in ("identity-plus-J", "shifted"):
        first = replace(first, delta=delta)
    else:
        first = CovarianceSpec("shifted", first.d, base=first, delta=delta)
    return (first,) + sc.covs[1:]


def _method_reps(sc: SimScenario, method: str) -> int:
    return sc.boot_reps if method.startswith(("ats-par", "ats-wild")) else sc.mc_reps


def _run_block(sc: SimScenario, run_indices, delta_index: int, delta: float | None) -> np.ndarray:
    """Rejection indicators for a block of runs; shape (len(runs), methods)."""
    covs = sc.covs if delta is None else _delta_covs(sc, delta)
    mats = [spec.build() for spec in covs]
    means = sc.group_means()
    h = sc.hypothesis()
    out = np.zeros((len(run_indices), len(sc.methods)), dtype=bool)
    for row, run_idx in enumerate(run_indices):
        root = np.random.SeedSequence(sc.seed, spawn_key=(delta_index, int(run_idx)))
        data_ss, method_ss = root.spawn(2)
        rng = np.random.default_rng(data_ss)
        groups = [
            draw_group(n_i, means[i], mats[i], sc.dist, rng)
            for i, n_i in enumerate(sc.group_ns)
        ]
        pm = pooled_moments(groups)
        seeds = method_ss.generate_state(len(sc.methods), np.uint64)
        for col, method in enumerate(sc.methods):
            report = run_method(
                method,
                groups,
                h,
                alpha=sc.alpha,
                reps=_method_reps(sc, method),
                seed=int(seeds[col]),
                pm=pm,
            )
            out[row, col] = report.reject
    return out


def _n_jobs(n_jobs: int | None) -> int:
    if n_jobs is None:
        n_jobs = int(os.environ.get("CORRTEST_THREADS", "1"))
    return max(1, n_jobs)


def _collect_rejections(
    sc: SimScenario, delta_index: int, delta: float | None, n_jobs: int | None
) -> np.ndarray:
    jobs = min(_n_jobs(n_jobs), sc.runs)
    indices = np.arange(sc.runs)
    if jobs == 1:
        return _run_block(sc, indices, delta_index, delta)
    blocks = np.array_split(indices, jobs * 4)
    blocks = [b for b in blocks if b.size]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = list(
            pool.map(_run_block, [sc] * len(blocks), blocks, [delta_index] * len(blocks),
                     [delta] * len(blocks))
        )
    return np.vstack(parts)


def _binomial_se(rate: float, runs: int) -> float:
    return float(np.sqrt(rate * (1.0 - rate) / runs))


def _in_band(rate: float, alpha: float, runs: int) -> bool:
    half = 1.96 * np.sqrt(alpha * (1.0 - alpha) / runs)
    return bool(abs(rate - alpha) <= half)


def type1_experiment(sc: SimScenario, n_jobs: int | None = None) -> list[dict]:
    """Rejection rates per method under the scenario's null hypothesis.

    Returns one row per method with the rate, its binomial standard error
    and whether it falls inside the 95% binomial band around alpha.
    """
    validate_null(sc)
    rejections = _collect_rejections(sc, 0, None, n_jobs)
    rows = []
    for col, method in enumerate(sc.methods):
        rate = float(rejections[:, col].mean())
        rows.append(
            {
                "scenario": sc.label,
                "distribution": sc.dist.family,
                "N": sc.N,
                "method": method,
                "runs": sc.runs,
                "rate": rate,
                "se": _binomial_se(rate, sc.runs),
                "in_band": _in_band(rate, sc.alpha, sc.runs),
            }
        )
    return rows


def power_curve(sc: SimScenario, deltas, n_jobs: int | None = None) -> list[dict]:
    """Rejection rates per (delta, method) with group 1's covariance
    shifted by delta J; delta = 0 is the type-I error point."""
    deltas = [float(x) for x in deltas]
    if any(x < 0 for x in deltas):
        raise ConfigError("delta values must be nonnegative")
    rows = []
    for di, delta in enumerate(deltas):
        rejections = _collect_rejections(sc, di, delta, n_jobs)
        for col, method in enumerate(sc.methods):
            rate = float(rejections[:, col].mean())
            rows.append(
                {
                    "scenario": sc.label,
                    "distribution": sc.dist.family,
                    "N": sc.N,
                    "method": method,
                    "delta": delta,
                    "runs": sc.runs,
                    "rate": rate,
                    "se": _binomial_se(rate, sc.runs),
                }
            )
    return rows
