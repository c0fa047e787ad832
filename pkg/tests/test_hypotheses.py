import numpy as np
import pytest

from corrtest.errors import ArgumentError, DimensionError
from corrtest.hypotheses import (
    custom,
    equal_correlation_matrices,
    equal_correlations,
    given_correlation,
    identity_correlation,
    load_custom_csv,
)
from corrtest.matops import Dims


class TestEqualCorrelationMatrices:
    def test_a2_d2(self):
        h = equal_correlation_matrices(2, Dims(2, a=2))
        assert np.allclose(h.C, [[0.5, -0.5], [-0.5, 0.5]])
        assert np.array_equal(h.zeta, [0, 0])

    def test_a2_d5_rank(self):
        h = equal_correlation_matrices(2, Dims(5, a=2))
        assert h.C.shape == (20, 20)
        assert h.rank() == 10

    def test_null_space_membership(self):
        rng = np.random.default_rng(0)
        block = rng.uniform(-1, 1, 10)
        r = np.concatenate([block, block])
        h = equal_correlation_matrices(2, Dims(5, a=2))
        assert np.allclose(h.C @ r, 0.0, atol=1e-12)
        r_bad = np.concatenate([block, block + 0.1])
        assert np.linalg.norm(h.C @ r_bad - h.zeta) > 0

    def test_needs_two_groups(self):
        with pytest.raises(ArgumentError):
            equal_correlation_matrices(1, Dims(3))


class TestIdentityCorrelation:
    def test_d5(self):
        h = identity_correlation(Dims(5))
        assert np.array_equal(h.C, np.eye(10))
        assert np.array_equal(h.zeta, np.zeros(10))

    def test_zero_vector_satisfies(self):
        h = identity_correlation(Dims(4))
        assert np.allclose(h.C @ np.zeros(6) - h.zeta, 0.0)

    def test_d3_rows(self):
        assert identity_correlation(Dims(3)).m == 3


class TestGivenCorrelation:
    def test_identity_target_reduces(self):
        h = given_correlation(np.eye(4))
        href = identity_correlation(Dims(4))
        assert np.array_equal(h.C, href.C)
        assert np.array_equal(h.zeta, href.zeta)

    def test_d2_target(self):
        h = given_correlation([[1.0, 0.5], [0.5, 1.0]])
        assert np.array_equal(h.zeta, [0.5])

    def test_compound_symmetry_d4(self):
        r = np.full((4, 4), 0.3)
        np.fill_diagonal(r, 1.0)
        h = given_correlation(r)
        assert np.allclose(h.zeta, np.full(6, 0.3))

    def test_bad_diagonal_rejected(self):
        with pytest.raises(ArgumentError):
            given_correlation([[2.0, 0.1], [0.1, 1.0]])

    def test_asymmetry_rejected(self):
        with pytest.raises(ArgumentError):
            given_correlation([[1.0, 0.2], [0.3, 1.0]])


class TestEqualCorrelations:
    def test_d5_projector(self):
        h = equal_correlations(Dims(5))
        assert h.C.shape == (10, 10)
        assert h.rank() == 9

    def test_constant_vector_in_null_space(self):
        h = equal_correlations(Dims(5))
        assert np.allclose(h.C @ np.full(10, 0.4), 0.0, atol=1e-12)

    def test_d3_hand_arithmetic(self):
        h = equal_correlations(Dims(3))
        out = h.C @ np.array([0.2, 0.2, 0.5])
        assert np.allclose(out, [-0.1, -0.1, 0.2], atol=1e-12)

    def test_d2_rejected(self):
        with pytest.raises(ArgumentError):
            equal_correlations(Dims(2))


class TestCustom:
    def test_roundtrip(self):
        h = equal_correlation_matrices(2, Dims(3, a=2))
        h2 = custom(h.C, h.zeta, a=2, dims=Dims(3, a=2))
        assert np.array_equal(h.C, h2.C)
        assert np.array_equal(h.zeta, h2.zeta)

    def test_single_row_selector(self):
        dims = Dims(3)
        c = np.zeros((1, 3))
        c[0, 0] = 1.0
        h = custom(c, [0.0], a=1, dims=dims)
        assert h.m == 1

    def test_wrong_zeta_length(self):
        with pytest.raises(DimensionError):
            custom(np.eye(3), [0.0, 0.0], a=1, dims=Dims(3))

    def test_all_zero_matrix_rejected(self):
        with pytest.raises(ArgumentError):
            custom(np.zeros((2, 3)), [0.0, 0.0], a=1, dims=Dims(3))

    def test_csv_loader(self, tmp_path):
        dims = Dims(3)
        block = np.hstack([np.eye(3), np.array([[0.1], [0.2], [0.3]])])
        path = tmp_path / "hyp.csv"
        np.savetxt(path, block, delimiter=",")
        h = load_custom_csv(path, a=1, dims=dims)
        assert np.allclose(h.C, np.eye(3))
        assert np.allclose(h.zeta, [0.1, 0.2, 0.3])

    def test_csv_loader_shape_mismatch(self, tmp_path):
        path = tmp_path / "hyp.csv"
        np.savetxt(path, np.ones((2, 3)), delimiter=",")
        with pytest.raises(DimensionError):
            load_custom_csv(path, a=1, dims=Dims(3))


class TestBuilderDeterminism:
    def test_repeat_calls_identical(self):
        a = equal_correlation_matrices(3, Dims(4, a=3))
        b = equal_correlation_matrices(3, Dims(4, a=3))
        assert np.array_equal(a.C, b.C)
        assert np.array_equal(a.zeta, b.zeta)
