"""Uniform dispatch over the test engines by method tag.

Method tags combine an engine with an optional small-sample factor
suffix: ats-mc, ats-par, ats-wild, ats-tay, atsfz-mc, each also with
"-m" for the (N-3)/N multiplier on the statistic.
"""

from __future__ import annotations

import numpy as np

from .estimators import GroupSample, PooledMoments, pooled_moments
from .hypotheses import HypothesisSpec
from .quadform import DEFAULT_MC_REPS, TestReport, mc_test, parse_method
from .resampling import (
    DEFAULT_BOOT_REPS,
    DEFAULT_TAYLOR_REPS,
    ResamplingConfig,
    parametric_bootstrap_test,
    taylor_mc_test,
    wild_bootstrap_test,
)

METHODS = (
    "ats-mc",
    "ats-mc-m",
    "ats-par",
    "ats-par-m",
    "ats-wild",
    "ats-wild-m",
    "ats-tay",
    "ats-tay-m",
    "atsfz-mc",
    "atsfz-mc-m",
)


def default_reps(method: str) -> int:
    base, _ = parse_method(method)
    if base in ("ats-mc", "atsfz-mc"):
        return DEFAULT_MC_REPS
    if base in ("ats-par", "ats-wild"):
        return DEFAULT_BOOT_REPS
    return DEFAULT_TAYLOR_REPS


def run_method(
    method: str,
    groups: list[GroupSample],
    h: HypothesisSpec,
    alpha: float = 0.05,
    reps: int | None = None,
    seed: int = 0,
    pm: PooledMoments | None = None,
    wild_weight: str = "rademacher",
) -> TestReport:
    """Run one test identified by its method tag."""
    base, factor = parse_method(method)
    if pm is None:
        pm = pooled_moments(groups)
    if reps is None:
        reps = default_reps(method)
    if base in ("ats-mc", "atsfz-mc"):
        return mc_test(pm, h, method=method, alpha=alpha, reps=reps, seed=seed)
    if base == "ats-par":
        cfg = ResamplingConfig(B=reps, seed=seed, engine="par")
        return parametric_bootstrap_test(groups, h, alpha, cfg, pm=pm, factor=factor)
    if base == "ats-wild":
        cfg = ResamplingConfig(B=reps, seed=seed, engine="wild", wild_weight=wild_weight)
        return wild_bootstrap_test(groups, h, alpha, cfg, pm=pm, factor=factor)
    cfg = ResamplingConfig(B=reps, seed=seed, engine="taylor")
    return taylor_mc_test(groups, h, alpha, cfg, pm=pm, factor=factor)
