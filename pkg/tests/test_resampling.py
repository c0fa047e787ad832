import numpy as np
import pytest

import corrtest as ct
from corrtest.errors import ConfigError
from corrtest.estimators import moment_set, pooled_moments
from corrtest.matops import unvech, vech, vech_minus
from corrtest.resampling import (
    ResamplingConfig,
    parametric_bootstrap_test,
    taylor_context,
    taylor_f,
    taylor_f_batch,
    taylor_mc_test,
    taylor_quadform_draws,
    wild_bootstrap_test,
    _wild_weights,
)


def make_groups(seed=0, sizes=(60, 40), d=3):
    rng = np.random.default_rng(seed)
    return [ct.GroupSample(rng.standard_normal((n, d))) for n in sizes]


@pytest.fixture(scope="module")
def fixture_groups():
    groups = make_groups()
    pm = pooled_moments(groups)
    h = ct.equal_correlation_matrices(2, ct.Dims(3, a=2))
    return groups, pm, h


class TestConfig:
    def test_b_floor(self):
        with pytest.raises(ConfigError):
            ResamplingConfig(B=50, seed=0, engine="par")

    def test_unknown_engine(self):
        with pytest.raises(ConfigError):
            ResamplingConfig(B=500, seed=0, engine="jackknife")

    def test_engine_mismatch_rejected(self, fixture_groups):
        groups, pm, h = fixture_groups
        cfg = ResamplingConfig(B=200, seed=0, engine="wild")
        with pytest.raises(ConfigError):
            parametric_bootstrap_test(groups, h, 0.05, cfg, pm=pm)


class TestParametricBootstrap:
    def test_deterministic(self, fixture_groups):
        groups, pm, h = fixture_groups
        cfg = ResamplingConfig(B=400, seed=42, engine="par")
        r1 = parametric_bootstrap_test(groups, h, 0.05, cfg, pm=pm)
        r2 = parametric_bootstrap_test(groups, h, 0.05, cfg, pm=pm)
        assert r1.critical_value == r2.critical_value
        assert r1.p_value == r2.p_value

    def test_critical_value_positive(self, fixture_groups):
        groups, pm, h = fixture_groups
        cfg = ResamplingConfig(B=400, seed=1, engine="par")
        assert parametric_bootstrap_test(groups, h, 0.05, cfg, pm=pm).critical_value > 0

    def test_replicate_count_stability(self):
        # critical value stabilizes as B grows; the B=10^3 side is
        # averaged over three seeds to separate convergence from
        # single-draw quantile noise
        groups = make_groups(5, sizes=(70, 50), d=3)
        pm = pooled_moments(groups)
        h = ct.equal_correlation_matrices(2, ct.Dims(3, a=2))
        small = np.mean(
            [
                parametric_bootstrap_test(
                    groups, h, 0.05, ResamplingConfig(B=1000, seed=s, engine="par"), pm=pm
                ).critical_value
                for s in (3, 13, 23)
            ]
        )
        big = parametric_bootstrap_test(
            groups, h, 0.05, ResamplingConfig(B=10_000, seed=4, engine="par"), pm=pm
        ).critical_value
        assert abs(small - big) < 0.1

    def test_statistic_is_plain_ats(self, fixture_groups):
        groups, pm, h = fixture_groups
        cfg = ResamplingConfig(B=200, seed=9, engine="par")
        report = parametric_bootstrap_test(groups, h, 0.05, cfg, pm=pm)
        assert report.statistic == pytest.approx(ct.ats_statistic(pm, h), rel=1e-14)
        report_m = parametric_bootstrap_test(groups, h, 0.05, cfg, pm=pm, factor=True)
        assert report_m.method == "ats-par-m"
        assert report_m.statistic == pytest.approx(
            report.statistic * (pm.N - 3) / pm.N, rel=1e-14
        )


class TestWildBootstrap:
    def test_weight_generator_self_test(self):
        rng = np.random.default_rng(0)
        for kind in ("rademacher", "gaussian"):
            w = _wild_weights(rng, 10**6, kind)
            assert abs(w.mean()) < 0.005
            assert abs(w.var() - 1.0) < 0.005

    def test_rademacher_magnitude(self):
        rng = np.random.default_rng(1)
        w = _wild_weights(rng, 1000, "rademacher")
        assert np.array_equal(np.abs(w), np.ones(1000))

    def test_deterministic(self, fixture_groups):
        groups, pm, h = fixture_groups
        cfg = ResamplingConfig(B=300, seed=8, engine="wild")
        r1 = wild_bootstrap_test(groups, h, 0.05, cfg, pm=pm)
        r2 = wild_bootstrap_test(groups, h, 0.05, cfg, pm=pm)
        assert r1.critical_value == r2.critical_value

    def test_gaussian_weights_run(self, fixture_groups):
        groups, pm, h = fixture_groups
        cfg = ResamplingConfig(B=300, seed=8, engine="wild", wild_weight="gaussian")
        report = wild_bootstrap_test(groups, h, 0.05, cfg, pm=pm)
        assert report.critical_value > 0


class TestTaylorF:
    def test_zero_at_zero(self):
        ms = moment_set(make_groups(2)[0])
        ctx = taylor_context(ms)
        assert np.array_equal(taylor_f(ctx, np.zeros(6)), np.zeros(3))

    def test_even_function(self):
        ms = moment_set(make_groups(3)[0])
        ctx = taylor_context(ms)
        rng = np.random.default_rng(4)
        for _ in range(5):
            y = rng.standard_normal(6)
            assert np.allclose(taylor_f(ctx, y), taylor_f(ctx, -y), atol=1e-14)

    def test_batch_matches_single(self):
        ms = moment_set(make_groups(6)[0])
        ctx = taylor_context(ms)
        rng = np.random.default_rng(5)
        ys = rng.standard_normal((7, 6))
        batch = taylor_f_batch(ctx, ys)
        for k in range(7):
            assert np.allclose(batch[k], taylor_f(ctx, ys[k]), atol=1e-14)

    def test_matches_numerical_hessian(self):
        # f(y) must equal the second-order term 1/2 y^T H y of the
        # covariance-to-correlation map, H from central finite differences
        rng = np.random.default_rng(6)
        for d in (2, 3):
            n = 50
            g = ct.GroupSample(rng.standard_normal((n, d)) * (1 + 0.4 * np.arange(d)))
            ms = moment_set(g)
            ctx = taylor_context(ms)
            hess = fd_hessian(ms.v_hat, d, step=1e-4)
            for _ in range(4):
                y = rng.standard_normal(len(ms.v_hat))
                quad = 0.5 * np.einsum("cjk,j,k->c", hess, y, y)
                assert np.max(np.abs(taylor_f(ctx, y) - quad)) < 1e-3


def corr_map(v, d):
    v_mat = unvech(v, d)
    sd = np.sqrt(np.diag(v_mat))
    return vech_minus(v_mat / np.outer(sd, sd))


def fd_hessian(v, d, step):
    p = len(v)
    p_u = d * (d - 1) // 2
    hess = np.zeros((p_u, p, p))
    for j in range(p):
        for k in range(p):
            ej = np.zeros(p)
            ek = np.zeros(p)
            ej[j] = step
            ek[k] = step
            hess[:, j, k] = (
                corr_map(v + ej + ek, d)
                - corr_map(v + ej - ek, d)
                - corr_map(v - ej + ek, d)
                + corr_map(v - ej - ek, d)
            ) / (4 * step**2)
    return hess


class TestTaylorEngine:
    def test_deterministic(self, fixture_groups):
        groups, pm, h = fixture_groups
        cfg = ResamplingConfig(B=2000, seed=13, engine="taylor")
        r1 = taylor_mc_test(groups, h, 0.05, cfg, pm=pm)
        r2 = taylor_mc_test(groups, h, 0.05, cfg, pm=pm)
        assert r1.critical_value == r2.critical_value

    def test_f_zero_matches_plain_mc(self, fixture_groups):
        # with the correction off, the engine samples the first-order
        # mixture limit, so its quantile matches the plain MC quantile
        groups, pm, h = fixture_groups
        draws = taylor_quadform_draws(pm, h, 100_000, seed=31, correction=False)
        q_tay = np.quantile(draws, 0.95)
        q_mc, _ = ct.weighted_chisq_quantile(
            ct.limit_eigenvalues(pm, h), 0.05, 100_000, seed=32
        )
        assert q_tay == pytest.approx(q_mc, abs=0.1)

    def test_correction_gap_shrinks_with_n(self):
        # second-order term scales like 1/sqrt(n): quantile gap between
        # corrected and uncorrected engine shrinks as n grows
        gaps = {}
        for n in (25, 250):
            diffs = []
            for rep in range(20):
                rng = np.random.default_rng(1000 + rep)
                g = ct.GroupSample(
                    rng.standard_normal((n, 5)) * np.sqrt([1, 1.2, 1.4, 1.6, 1.8])
                )
                pm = pooled_moments([g])
                h = ct.identity_correlation(ct.Dims(5))
                on = np.quantile(taylor_quadform_draws(pm, h, 10_000, rep), 0.95)
                off = np.quantile(
                    taylor_quadform_draws(pm, h, 10_000, rep, correction=False), 0.95
                )
                diffs.append(abs(on - off))
            gaps[n] = np.mean(diffs)
        assert gaps[25] > gaps[250]

    def test_upsilon_shared_not_recomputed(self, fixture_groups):
        # trace weight comes from the data moments: forcing correction
        # off changes draws but not the observed statistic
        groups, pm, h = fixture_groups
        cfg = ResamplingConfig(B=500, seed=2, engine="taylor")
        r_on = taylor_mc_test(groups, h, 0.05, cfg, pm=pm)
        r_off = taylor_mc_test(groups, h, 0.05, cfg, pm=pm, correction=False)
        assert r_on.statistic == r_off.statistic


class TestBootstrapConsistency:
    def test_bootstrap_agrees_with_limit_quantile(self):
        # moderate-size version of the consistency check; the full-size
        # run (n_i = 10^4) lives in the acceptance suite
        groups = make_groups(77, sizes=(2000, 2000), d=3)
        pm = pooled_moments(groups)
        h = ct.equal_correlation_matrices(2, ct.Dims(3, a=2))
        boot = parametric_bootstrap_test(
            groups, h, 0.05, ResamplingConfig(B=4000, seed=5, engine="par"), pm=pm
        ).critical_value
        mc = ct.weighted_chisq_quantile(
            ct.limit_eigenvalues(pm, h), 0.05, 200_000, seed=6
        )[0]
        assert boot == pytest.approx(mc, rel=0.1)
