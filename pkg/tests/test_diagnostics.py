import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from augforget.diagnostics import (CkaMatrix, ZeroGradientError, aggregated_sign_discrepancy,
                                   cka_matrix, cosine_alignment, linear_cka, sign_discrepancy,
                                   spearman_rho, taylor_gradient)
from augforget.errors import ShapeError
from augforget.model import MLP, GradientVector, param_count
from augforget.numerics import make_rng

vectors = arrays(np.float64, st.integers(1, 40),
                 elements=st.floats(-1e3, 1e3, allow_subnormal=False))


def orthogonal(rng, n):
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


class TestCosine:
    def test_examples(self):
        g = make_rng(0).standard_normal(50)
        assert cosine_alignment(g, g) == 1.0
        assert cosine_alignment(g, -g) == -1.0
        assert cosine_alignment([1, 0], [0, 1]) == 0.0

    def test_zero_vector(self):
        with pytest.raises(ZeroGradientError):
            cosine_alignment([0.0, 0.0], [1.0, 2.0])

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            cosine_alignment([1.0], [1.0, 2.0])

    def test_accepts_gradient_vectors(self):
        a = GradientVector([1.0, 2.0], {"aug": 0})
        assert cosine_alignment(a, a) == 1.0

    @settings(max_examples=100, deadline=None)
    @given(st.integers(0, 2**32 - 1), st.floats(1e-3, 1e3), st.floats(1e-3, 1e3))
    def test_positive_scaling(self, seed, s1, s2):
        rng = make_rng(seed)
        a, b = rng.standard_normal(30), rng.standard_normal(30)
        assert cosine_alignment(s1 * a, s2 * b) == pytest.approx(cosine_alignment(a, b), abs=1e-12)


class TestSignDiscrepancy:
    def test_examples(self):
        g = make_rng(0).standard_normal(20)
        assert sign_discrepancy(g, g) == 0.0
        assert sign_discrepancy(g, -g) == 1.0
        assert sign_discrepancy([1, -2, 3, 0], [1, 2, -3, 0]) == 0.5

    def test_zero_against_nonzero_counts(self):
        assert sign_discrepancy([0.0, 1.0], [1.0, 1.0]) == 0.5

    def test_empty(self):
        with pytest.raises(ValueError):
            sign_discrepancy([], [])

    @settings(max_examples=100, deadline=None)
    @given(vectors, st.integers(0, 2**32 - 1))
    def test_symmetric_and_bounded(self, a, seed):
        b = make_rng(seed).standard_normal(len(a))
        sd = sign_discrepancy(a, b)
        assert 0.0 <= sd <= 1.0
        assert sd == sign_discrepancy(b, a)
        assert sign_discrepancy(a, a) == 0.0

    @settings(max_examples=100, deadline=None)
    @given(vectors, st.integers(0, 2**32 - 1))
    def test_positive_rescaling(self, a, seed):
        rng = make_rng(seed)
        b = rng.standard_normal(len(a))
        scale = rng.uniform(0.01, 100, len(a))
        assert sign_discrepancy(a * scale, b) == sign_discrepancy(a, b)


class TestAggregated:
    def test_k1_and_identical(self):
        rng = make_rng(1)
        g1, g2 = rng.standard_normal(10), rng.standard_normal(10)
        assert aggregated_sign_discrepancy(g1, [g2]).aggregated == sign_discrepancy(g1, g2)
        assert aggregated_sign_discrepancy(g1, [g1, g1, g1]).aggregated == 0.0

    def test_mean_of_batches(self):
        g1 = np.ones(5)
        batches = [np.array([-1, 1, 1, 1, 1.0]), np.array([-1, -1, 1, 1, 1.0]),
                   np.array([-1, -1, -1, 1, 1.0])]
        report = aggregated_sign_discrepancy(g1, batches)
        np.testing.assert_allclose(report.per_batch, [0.2, 0.4, 0.6])
        assert report.aggregated == pytest.approx(0.4, abs=1e-15)
        assert report.k == 3

    def test_empty_list(self):
        with pytest.raises(ValueError):
            aggregated_sign_discrepancy(np.ones(3), [])


class TestLinearCka:
    def test_self_similarity(self):
        x = make_rng(0).standard_normal((50, 8))
        assert linear_cka(x, x) == pytest.approx(1.0, abs=1e-12)

    def test_rotation_and_scaling(self):
        rng = make_rng(1)
        x = rng.standard_normal((60, 10))
        y = rng.standard_normal((60, 6))
        base = linear_cka(x, y)
        assert linear_cka(x, x @ orthogonal(rng, 10)) == pytest.approx(1.0, abs=1e-10)
        assert linear_cka(x, -3.5 * x) == pytest.approx(1.0, abs=1e-10)
        assert linear_cka(x @ orthogonal(rng, 10), 7.0 * y) == pytest.approx(base, abs=1e-10)

    def test_independent_features_low(self):
        # Monte Carlo over 20 draws at n=2000, p=q=64 gave a mean of ~0.031 (max 0.032)
        rng = make_rng(2)
        assert linear_cka(rng.standard_normal((2000, 64)), rng.standard_normal((2000, 64))) < 0.1

    def test_zero_features(self):
        x = make_rng(3).standard_normal((10, 4))
        assert linear_cka(x, np.ones((10, 3))) == 0.0

    def test_errors(self):
        with pytest.raises(ShapeError):
            linear_cka(np.ones((4, 2)), np.ones((5, 2)))
        with pytest.raises(ValueError):
            linear_cka(np.ones((1, 2)), np.ones((1, 2)))

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_range(self, seed):
        rng = make_rng(seed)
        n = int(rng.integers(2, 30))
        x = rng.standard_normal((n, int(rng.integers(1, 8))))
        y = rng.standard_normal((n, int(rng.integers(1, 8))))
        assert -1e-9 <= linear_cka(x, y) <= 1 + 1e-9


class TestCkaMatrix:
    def test_same_model_diagonal_one(self):
        rng = make_rng(4)
        model = MLP((6, 5, 4, 3), rng.standard_normal(param_count((6, 5, 4, 3))))
        m = cka_matrix(model, model, rng.standard_normal((40, 6)))
        assert isinstance(m, CkaMatrix) and m.values.shape == (3, 3)
        np.testing.assert_allclose(np.diag(m.values), 1.0, atol=1e-12)
        assert (m.values >= -1e-9).all() and (m.values <= 1 + 1e-9).all()
        assert m.header() == ["layer", "layer0", "layer1", "layer2"]

    def test_probe_too_small(self):
        model = MLP((6, 3))
        with pytest.raises(ValueError):
            cka_matrix(model, model, np.zeros((1, 6)))


class TestTaylorGradient:
    def test_zero_terms(self):
        rng = make_rng(5)
        g = rng.standard_normal(4)
        np.testing.assert_array_equal(taylor_gradient(g, rng.standard_normal((4, 3)), np.zeros(3)), g)
        np.testing.assert_array_equal(taylor_gradient(g, np.zeros((4, 3)), rng.standard_normal(3)), g)

    def test_quadratic_loss_is_exact(self):
        # L = 0.5 ||theta - x||^2: grad_theta = theta - x, so at x + delta it is g_x - delta
        rng = make_rng(6)
        theta, x, delta = rng.standard_normal((3, 7))
        g_x = theta - x
        exact = theta - (x + delta)
        np.testing.assert_allclose(taylor_gradient(g_x, -np.eye(7), delta), exact, atol=1e-15)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            taylor_gradient(np.zeros(3), np.zeros((2, 2)), np.zeros(2))


def brute_force_spearman(a, b):
    """Rank by counting (ties share the mean position), then Pearson on ranks."""
    def ranks(v):
        out = []
        for x in v:
            below = sum(1 for y in v if y < x)
            equal = sum(1 for y in v if y == x)
            out.append(below + (equal + 1) / 2)
        return out

    ra, rb = ranks(list(a)), ranks(list(b))
    n = len(ra)
    ma, mb = sum(ra) / n, sum(rb) / n
    cov = sum((x - ma) * (y - mb) for x, y in zip(ra, rb))
    va = sum((x - ma) ** 2 for x in ra)
    vb = sum((y - mb) ** 2 for y in rb)
    return cov / (va * vb) ** 0.5


class TestSpearman:
    def test_matches_brute_force(self):
        rng = make_rng(7)
        for _ in range(20):
            n = int(rng.integers(3, 12))
            a = rng.integers(0, 5, n).astype(float)
            b = rng.standard_normal(n)
            if len(set(a)) < 2:
                a[0] += 1
            assert spearman_rho(a, b) == pytest.approx(brute_force_spearman(a, b), abs=1e-12)

    def test_perfect_monotone(self):
        assert spearman_rho([1, 2, 3, 4], [10, 20, 25, 100]) == pytest.approx(1.0)
        assert spearman_rho([1, 2, 3, 4], [4, 3, 2, 1]) == pytest.approx(-1.0)

    def test_constant_is_nan(self):
        assert np.isnan(spearman_rho([1, 1, 1], [1, 2, 3]))
