import numpy as np
import pytest

import srsample as sr
from srsample.dct import _prefix_lengths


class TestDct1D:
    def test_constant_signal_maps_to_dc(self):
        x = np.full(8, 3.5)
        X = sr.dct_forward(x)
        assert X[0] == pytest.approx(3.5 * np.sqrt(8), abs=1e-12)
        np.testing.assert_allclose(X[1:], 0.0, atol=1e-12)

    def test_unit_impulse_raw_cosines(self):
        # unscaled coefficients of e_0 are cos(pi k / (2N)); undo the
        # orthonormal scaling to compare against the plain cosine sum
        X = sr.dct_forward([1.0, 0.0, 0.0, 0.0])
        scale = np.array([np.sqrt(1 / 4), *([np.sqrt(2 / 4)] * 3)])
        raw = X / scale
        expected = [1.0, np.cos(np.pi / 8), np.cos(np.pi / 4), np.cos(3 * np.pi / 8)]
        np.testing.assert_allclose(raw, expected, atol=1e-12)

    def test_parseval(self):
        rng = np.random.default_rng(0)
        for n in (1, 2, 5, 16, 33):
            x = rng.normal(size=n)
            assert np.linalg.norm(sr.dct_forward(x)) == pytest.approx(
                np.linalg.norm(x), abs=1e-12
            )

    def test_round_trip(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=16)
        np.testing.assert_allclose(sr.dct_inverse(sr.dct_forward(x)), x, atol=1e-10)

    def test_inverse_of_constant_spectrum(self):
        X = np.zeros(6)
        X[0] = 2.0 * np.sqrt(6)
        np.testing.assert_allclose(sr.dct_inverse(X), np.full(6, 2.0), atol=1e-12)

    def test_zero_vector(self):
        np.testing.assert_array_equal(sr.dct_inverse(np.zeros(5)), np.zeros(5))

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            sr.dct_forward(np.array([]))
        with pytest.raises(ValueError):
            sr.dct_inverse(np.array([]))

    def test_direct_and_fft_agree(self):
        rng = np.random.default_rng(2)
        for n in (4, 16, 64, 100):
            x = rng.normal(size=n)
            np.testing.assert_allclose(
                sr.dct_forward(x, method="direct"), sr.dct_forward(x, method="fft"),
                atol=1e-10,
            )
            np.testing.assert_allclose(
                sr.dct_inverse(x, method="direct"), sr.dct_inverse(x, method="fft"),
                atol=1e-10,
            )


class TestDctNd:
    def test_constant_2x2(self):
        out = sr.dct_nd(np.full((2, 2), 1.5))
        assert out[0, 0] == pytest.approx(3.0, abs=1e-12)
        assert np.abs(out).sum() == pytest.approx(3.0, abs=1e-12)

    def test_round_trip_16x16(self):
        rng = np.random.default_rng(3)
        a = rng.normal(size=(16, 16))
        np.testing.assert_allclose(sr.dct_nd_inverse(sr.dct_nd(a)), a, atol=1e-10)

    def test_separability(self):
        rng = np.random.default_rng(4)
        a = rng.normal(size=(6, 5))
        rowwise = np.apply_along_axis(sr.dct_forward, 0, a)
        both = np.apply_along_axis(sr.dct_forward, 1, rowwise)
        np.testing.assert_allclose(sr.dct_nd(a), both, atol=1e-12)

    def test_direct_matches_fft(self):
        rng = np.random.default_rng(5)
        a = rng.normal(size=(4, 8))
        np.testing.assert_allclose(
            sr.dct_nd(a, method="direct"), sr.dct_nd(a, method="fft"), atol=1e-10
        )
        np.testing.assert_allclose(
            sr.dct_nd_inverse(a, method="direct"), sr.dct_nd_inverse(a, method="fft"),
            atol=1e-10,
        )


class TestNaturalOrder:
    def test_1d_is_identity(self):
        np.testing.assert_array_equal(sr.natural_order((5,)), np.arange(5))

    def test_2x2_diagonal_stripes(self):
        # (0,0), then (0,1) before (1,0), then (1,1)
        np.testing.assert_array_equal(sr.natural_order((2, 2)), [0, 1, 2, 3])

    def test_3x3_stripe_order(self):
        order = sr.natural_order((3, 3))
        coords = [(i // 3, i % 3) for i in order]
        sums = [a + b for a, b in coords]
        assert sums == sorted(sums)
        assert coords[0] == (0, 0)
        assert coords[1] == (0, 1) and coords[2] == (1, 0)

    def test_is_permutation(self):
        order = sr.natural_order((4, 7))
        assert sorted(order.tolist()) == list(range(28))


class TestSelectPrefix:
    def test_keep_everything(self):
        rng = np.random.default_rng(6)
        x = rng.normal(size=12)
        assert sr.select_prefix(x, 1.0) == 12

    def test_cumulative_enumeration(self):
        assert sr.select_prefix([3.0, 1.0, 0.0, 0.0], 0.9) == 1

    def test_minimum_one_rule(self):
        assert sr.select_prefix([1.0, 3.0], 0.05) == 1

    def test_zero_energy_rejected(self):
        with pytest.raises(ValueError):
            sr.select_prefix(np.zeros(4), 0.5)

    def test_invalid_budget_rejected(self):
        with pytest.raises(ValueError):
            sr.select_prefix([1.0, 2.0], 0.0)
        with pytest.raises(ValueError):
            sr.select_prefix([1.0, 2.0], 1.2)

    def test_prefix_nesting(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            x = rng.normal(size=24)
            levels = np.sort(rng.uniform(0.05, 1.0, size=6))
            js = [sr.select_prefix(x, e) for e in levels]
            assert js == sorted(js)

    def test_retained_fraction_within_budget_when_j_above_one(self):
        rng = np.random.default_rng(8)
        for _ in range(50):
            x = rng.normal(size=16)
            e = rng.uniform(0.1, 0.999)
            j = sr.select_prefix(x, e)
            if j > 1:
                kept = np.sum(x[:j] ** 2) / np.sum(x**2)
                assert kept <= e + 1e-9

    def test_batch_matches_scalar(self):
        rng = np.random.default_rng(9)
        X = rng.normal(size=(40, 10))
        for e in (0.1, 0.5, 0.9, 1.0):
            batch = _prefix_lengths(X, e)
            singles = [sr.select_prefix(row, e) for row in X]
            np.testing.assert_array_equal(batch, singles)
