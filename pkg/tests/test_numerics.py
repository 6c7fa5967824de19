import numpy as np
import pytest

from augforget.errors import ShapeError
from augforget.numerics import argsort_desc, gauss, make_rng, matmul, spawn_rngs


class TestMatmul:
    def test_identity(self):
        a = make_rng(0).standard_normal((3, 4))
        np.testing.assert_array_equal(matmul(np.eye(3), a), a)

    def test_annihilator(self):
        a = make_rng(1).standard_normal((3, 4))
        np.testing.assert_array_equal(matmul(a, np.zeros((4, 2))), np.zeros((3, 2)))

    def test_hand_arithmetic(self):
        np.testing.assert_array_equal(matmul([[1, 2], [3, 4]], [[1], [1]]), [[3], [7]])

    def test_mismatch_names_shapes(self):
        with pytest.raises(ShapeError, match=r"\(2, 3\).*\(2, 3\)"):
            matmul(np.ones((2, 3)), np.ones((2, 3)))

    def test_associativity(self):
        rng = make_rng(2)
        for _ in range(20):
            a, b, c = (rng.standard_normal(s) for s in [(4, 5), (5, 6), (6, 3)])
            left, right = matmul(matmul(a, b), c), matmul(a, matmul(b, c))
            np.testing.assert_allclose(left, right, rtol=1e-9, atol=1e-12)


class TestGauss:
    def test_zero_std_is_constant(self):
        np.testing.assert_array_equal(gauss(make_rng(0), 3, 4, 0.0, 0.0), np.zeros((3, 4)))
        np.testing.assert_array_equal(gauss(make_rng(0), 2, 2, 1.5, 0.0), np.full((2, 2), 1.5))

    def test_seed_reproducible(self):
        a = gauss(make_rng(42), 10, 10)
        b = gauss(make_rng(42), 10, 10)
        assert a.tobytes() == b.tobytes()

    def test_sample_mean_bound(self):
        n = 100_000
        x = gauss(make_rng(3), n, 1, 0.0, 1.0)
        assert abs(x.mean()) < 3 / np.sqrt(n)

    def test_negative_std(self):
        with pytest.raises(ValueError):
            gauss(make_rng(0), 1, 1, 0.0, -1.0)

    def test_spawned_streams_differ(self):
        a, b = spawn_rngs(5, 2)
        assert a.random() != b.random()


class TestArgsortDesc:
    @pytest.mark.parametrize("values, expected", [
        ([0.5, 0.1, 0.9], [2, 0, 1]),
        ([1, 1, 1], [0, 1, 2]),
        ([], []),
    ])
    def test_examples(self, values, expected):
        assert list(argsort_desc(values)) == expected

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            argsort_desc([1.0, np.nan])

    def test_permutation_and_order(self):
        rng = make_rng(7)
        for _ in range(50):
            v = rng.integers(0, 5, 30).astype(float)
            order = argsort_desc(v)
            assert sorted(order) == list(range(30))
            assert np.all(np.diff(v[order]) <= 0)
            # ties keep ascending index order
            for a, b in zip(order[:-1], order[1:]):
                if v[a] == v[b]:
                    assert a < b
