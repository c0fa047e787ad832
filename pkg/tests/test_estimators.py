import numpy as np
import pytest

from corrtest.errors import DegenerateDataError, DimensionError
from corrtest.estimators import (
    GroupSample,
    m_transform,
    moment_set,
    pooled_moments,
    sample_moments,
    sigma_hat,
)
from corrtest.matops import Dims, index_vectors, unvech, vech, vech_minus


def spd_sample(rng, n, d, scale=None):
    x = rng.standard_normal((n, d))
    if scale is not None:
        x = x * scale
    return GroupSample(x)


def pearson_oracle(x):
    """Naive double-loop Pearson correlations."""
    n, d = x.shape
    out = np.eye(d)
    for j in range(d):
        for k in range(d):
            xj = x[:, j] - x[:, j].mean()
            xk = x[:, k] - x[:, k].mean()
            out[j, k] = (xj @ xk) / np.sqrt((xj @ xj) * (xk @ xk))
    return out


def sigma_hat_oracle(x):
    """Literal double-loop transcription of the fourth-moment estimator."""
    n, d = x.shape
    xc = x - x.mean(axis=0)
    p = d * (d + 1) // 2
    prods = np.zeros((n, p))
    for k in range(n):
        prods[k] = vech(np.outer(xc[k], xc[k]))
    avg = prods.mean(axis=0)
    out = np.zeros((p, p))
    for k in range(n):
        diff = prods[k] - avg
        out += np.outer(diff, diff)
    return out / (n - 1)


class TestGroupSample:
    def test_two_point_example(self):
        g = GroupSample([[0.0, 0.0], [2.0, 2.0]])
        _, v_mat, _, _, r_hat = sample_moments(g)
        assert np.allclose(v_mat, [[2, 2], [2, 2]])
        assert np.allclose(r_hat, [1.0])

    def test_constant_column_named(self):
        data = np.random.default_rng(0).standard_normal((20, 3))
        data[:, 1] = 7.0
        with pytest.raises(DegenerateDataError, match="2"):
            GroupSample(data)

    def test_single_row_rejected(self):
        with pytest.raises(DegenerateDataError):
            GroupSample(np.ones((1, 3)))

    def test_one_column_rejected(self):
        with pytest.raises(DimensionError):
            GroupSample(np.random.default_rng(0).standard_normal((5, 1)))


class TestSampleMoments:
    def test_against_pearson_oracle(self):
        rng = np.random.default_rng(1)
        g = spd_sample(rng, 50, 4)
        _, _, _, r_mat, _ = sample_moments(g)
        assert np.allclose(r_mat, pearson_oracle(g.data), atol=1e-12)

    def test_vectorizations_consistent(self):
        rng = np.random.default_rng(2)
        g = spd_sample(rng, 30, 5)
        _, v_mat, v_hat, r_mat, r_hat = sample_moments(g)
        assert np.array_equal(v_hat, vech(v_mat))
        assert np.array_equal(r_hat, vech_minus(r_mat))


class TestSigmaHat:
    def test_against_bruteforce_oracle(self):
        rng = np.random.default_rng(3)
        for n, d in ((10, 2), (25, 3), (40, 4)):
            g = spd_sample(rng, n, d)
            assert np.allclose(sigma_hat(g), sigma_hat_oracle(g.data), atol=1e-12)

    def test_n2_single_degree_of_freedom(self):
        # with n = 2 the two centered rows are negatives of each other, so
        # their product vectors coincide and the estimator collapses: at
        # most one centered product vector, here exactly the zero matrix
        g = GroupSample([[0.0, 1.0], [1.0, 0.0]])
        s = sigma_hat(g)
        assert np.linalg.matrix_rank(s, tol=1e-10) <= 1
        assert np.allclose(s, 0.0, atol=1e-12)

    def test_normal_fourth_moment_limit(self):
        # Var(vech component at (1,1)) -> 2 for standard normal data
        rng = np.random.default_rng(4)
        g = spd_sample(rng, 100_000, 2)
        s = sigma_hat(g)
        assert abs(s[0, 0] - 2.0) < 0.1

    def test_symmetric_psd(self):
        rng = np.random.default_rng(5)
        g = spd_sample(rng, 60, 4)
        s = sigma_hat(g)
        assert np.array_equal(s, s.T)
        vals = np.linalg.eigvalsh(s)
        assert vals[0] >= -1e-8 * vals[-1]


class TestMTransform:
    def test_d2_hand_value(self):
        # unit variances, correlation rho: the Jacobian row is
        # (-rho/2, 1, -rho/2)
        rho = 0.37
        m = m_transform(np.array([1.0, rho, 1.0]), np.array([rho]), Dims(2))
        assert np.allclose(m, [[-rho / 2, 1.0, -rho / 2]], atol=1e-12)

    def test_matches_finite_difference_jacobian(self):
        rng = np.random.default_rng(6)
        for d in (2, 3, 4):
            a = rng.standard_normal((d + 3, d))
            v_mat = a.T @ a / (d + 3)
            v = vech(v_mat)
            r = vech_minus(corr_of(v_mat))
            m = m_transform(v, r, Dims(d))
            jac = fd_jacobian(v, d)
            assert np.max(np.abs(jac - m)) < 1e-5

    def test_diagonal_v_zero_at_diagonal_columns(self):
        d = 4
        v_mat = np.diag([1.0, 2.0, 3.0, 4.0])
        m = m_transform(vech(v_mat), np.zeros(6), Dims(d))
        iv = index_vectors(d)
        assert np.allclose(m[:, iv.a0], 0.0)

    def test_nonpositive_variance_rejected(self):
        with pytest.raises(DegenerateDataError):
            m_transform(np.array([1.0, 0.2, 0.0]), np.array([0.2]), Dims(2))


def corr_of(v_mat):
    sd = np.sqrt(np.diag(v_mat))
    return v_mat / np.outer(sd, sd)


def corr_map(v, d):
    return vech_minus(corr_of(unvech(v, d)))


def fd_jacobian(v, d, step=1e-6):
    p = len(v)
    p_u = d * (d - 1) // 2
    jac = np.zeros((p_u, p))
    for j in range(p):
        e = np.zeros(p)
        e[j] = step
        jac[:, j] = (corr_map(v + e, d) - corr_map(v - e, d)) / (2 * step)
    return jac


class TestPooledMoments:
    def test_single_group_unscaled(self):
        rng = np.random.default_rng(7)
        g = spd_sample(rng, 40, 3)
        pm = pooled_moments([g])
        assert np.allclose(pm.Upsilon_pooled, pm.groups[0].Upsilon_hat)

    def test_equal_groups_scaled_by_two(self):
        rng = np.random.default_rng(8)
        g1, g2 = spd_sample(rng, 30, 3), spd_sample(rng, 30, 3)
        pm = pooled_moments([g1, g2])
        p_u = 3
        assert np.allclose(pm.Upsilon_pooled[:p_u, :p_u], 2 * pm.groups[0].Upsilon_hat)
        assert np.allclose(pm.Upsilon_pooled[p_u:, p_u:], 2 * pm.groups[1].Upsilon_hat)

    def test_block_structure_exact(self):
        rng = np.random.default_rng(9)
        pm = pooled_moments([spd_sample(rng, 25, 3), spd_sample(rng, 35, 3)])
        off = pm.Upsilon_pooled[:3, 3:]
        assert np.array_equal(off, np.zeros_like(off))

    def test_mismatched_dimension_rejected(self):
        rng = np.random.default_rng(10)
        with pytest.raises(DimensionError):
            pooled_moments([spd_sample(rng, 20, 3), spd_sample(rng, 20, 4)])

    def test_normal_identity_limit(self):
        # independent components: each off-diagonal correlation estimate
        # has asymptotic variance 1
        rng = np.random.default_rng(11)
        pm = pooled_moments([spd_sample(rng, 100_000, 3)])
        assert np.max(np.abs(np.diag(pm.Upsilon_pooled) - 1.0)) < 0.05

    def test_upsilon_is_m_sigma_m(self):
        rng = np.random.default_rng(12)
        ms = moment_set(spd_sample(rng, 50, 4))
        assert np.allclose(ms.Upsilon_hat, ms.M_hat @ ms.Sigma_hat @ ms.M_hat.T)


class TestScaleEquivariance:
    def test_correlation_moments_scale_free(self):
        rng = np.random.default_rng(13)
        x = rng.standard_normal((60, 4))
        scale = np.array([0.3, 2.0, 5.5, 0.9])
        ms1 = moment_set(GroupSample(x))
        ms2 = moment_set(GroupSample(x * scale))
        assert np.allclose(ms1.R_hat, ms2.R_hat, atol=1e-10)
        assert np.allclose(ms1.r_hat, ms2.r_hat, atol=1e-10)
        assert np.allclose(ms1.Upsilon_hat, ms2.Upsilon_hat, atol=1e-10)
