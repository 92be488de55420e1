import numpy as np
import pytest

import srsample as sr
from srsample.qoi import BOLTZMANN


class TestMoments:
    def test_constant_dataset(self):
        X = np.full((5, 3), 2.0)
        m1, m2 = sr.moments12(X)
        np.testing.assert_array_equal(m1, [2.0, 2.0, 2.0])
        np.testing.assert_array_equal(m2, np.zeros((3, 3)))

    def test_two_antisymmetric_samples(self):
        X = np.array([[1.0, -1.0], [-1.0, 1.0]])
        m1, m2 = sr.moments12(X)
        np.testing.assert_array_equal(m1, [0.0, 0.0])
        np.testing.assert_array_equal(m2, [[2.0, -2.0], [-2.0, 2.0]])

    def test_matches_two_pass_oracle(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(200, 6))
        m1, m2 = sr.moments12(X)
        mean = np.array([X[:, i].sum() / 200 for i in range(6)])
        cov = np.zeros((6, 6))
        for row in X:
            d = row - mean
            cov += np.outer(d, d)
        cov /= 199
        np.testing.assert_allclose(m1, mean, atol=1e-12)
        np.testing.assert_allclose(m2, cov, atol=1e-12)

    def test_single_sample_rejected(self):
        with pytest.raises(ValueError):
            sr.moments12(np.ones((1, 4)))

    def test_permutation_invariance(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(50, 4))
        perm = rng.permutation(50)
        m1a, m2a = sr.moments12(X)
        m1b, m2b = sr.moments12(X[perm])
        np.testing.assert_allclose(m1a, m1b, atol=1e-13)
        np.testing.assert_allclose(m2a, m2b, atol=1e-13)


class TestMomentError:
    def test_identical_data_is_zero(self):
        rng = np.random.default_rng(2)
        X = rng.normal(size=(30, 3))
        target = sr.QoIRecord.from_moments(X)
        assert target.error(X) == 0.0

    def test_mean_shift(self):
        target = sr.QoIRecord(
            kind="moments12", m1=np.zeros(2), m2=np.eye(2), tolerance=0.05
        )
        rng = np.random.default_rng(3)
        X = rng.normal(size=(1000, 2))
        X = X - X.mean(axis=0)  # exact zero mean
        D = X @ np.linalg.inv(np.linalg.cholesky(np.cov(X, rowvar=False))).T
        X = D + np.array([0.03, -0.07])  # unit covariance, shifted mean
        assert target.error(X) == pytest.approx(0.07, abs=1e-9)

    def test_symmetric_in_roles(self):
        rng = np.random.default_rng(4)
        A = rng.normal(size=(40, 3))
        B = rng.normal(size=(40, 3))
        ta, tb = sr.QoIRecord.from_moments(A), sr.QoIRecord.from_moments(B)
        assert ta.error(B) == pytest.approx(tb.error(A), abs=1e-12)

    def test_kind_mismatch(self):
        rec = sr.QoIRecord(kind="phi4_stats", q1=0.0, q2=1.0, q3=1.0, edges=((0, 1),))
        with pytest.raises(ValueError):
            sr.moment_error(rec, np.ones((3, 2)))


class TestPhi4Stats:
    def test_zero_data(self):
        assert sr.phi4_stats(np.zeros((4, 4)), ((0, 1), (2, 3))) == (0.0, 0.0, 0.0)

    def test_all_ones(self):
        assert sr.phi4_stats(np.ones((3, 4)), ((0, 1), (1, 2))) == (1.0, 1.0, 1.0)

    def test_matches_nested_loop_oracle(self):
        rng = np.random.default_rng(5)
        edges = sr.lattice_edges((2, 3))
        X = rng.normal(size=(20, 6))
        q1, q2, q3 = sr.phi4_stats(X, edges)
        acc1 = np.mean([
            np.mean([x[i] * x[j] for i, j in edges]) for x in X
        ])
        acc2 = np.mean([np.mean(x**2) for x in X])
        acc3 = np.mean([np.mean(x**4) for x in X])
        assert q1 == pytest.approx(acc1, abs=1e-12)
        assert q2 == pytest.approx(acc2, abs=1e-12)
        assert q3 == pytest.approx(acc3, abs=1e-12)

    def test_empty_edges_rejected(self):
        with pytest.raises(ValueError):
            sr.phi4_stats(np.ones((2, 4)), ())


class TestTemperature:
    def test_zero_velocities(self):
        T, mean = sr.kinetic_temperature(np.zeros((3, 6)), 1.0)
        np.testing.assert_array_equal(T, np.zeros(3))
        assert mean == 0.0

    def test_two_atom_inversion(self):
        # 2 atoms in 3-D with no fixed DOFs: N_DOF = 3; choose speeds so that
        # E_kin = 1.5 k_B 300 and the temperature comes out at exactly 300 K
        e_kin = 1.5 * BOLTZMANN * 300.0
        v0 = np.sqrt(2.0 * e_kin)
        V = np.zeros((1, 6))
        V[0, 0] = v0  # all energy in one component, mass 1
        T, mean = sr.kinetic_temperature(V, 1.0)
        assert mean == pytest.approx(300.0, rel=1e-12)

    def test_doubling_speeds_quadruples_t(self):
        rng = np.random.default_rng(6)
        V = rng.normal(size=(5, 9))
        _, t1 = sr.kinetic_temperature(V, 2.0)
        _, t2 = sr.kinetic_temperature(2.0 * V, 2.0)
        assert t2 == pytest.approx(4.0 * t1, rel=1e-12)

    def test_single_atom_rejected(self):
        with pytest.raises(ValueError):
            sr.kinetic_temperature(np.ones((2, 3)), 1.0)  # N_DOF = 0

    def test_maxwell_boltzmann_recovers_300k(self):
        # closed-form expectation check at M x N_DOF large enough for 0.5 K
        rng = np.random.default_rng(7)
        mass = 4.48e-26
        n_atoms = 500
        m_samples = 2000
        std = np.sqrt(BOLTZMANN * 300.0 / mass)
        V = rng.standard_normal((m_samples, 3 * n_atoms)) * std
        _, t_mean = sr.kinetic_temperature(V, mass)
        # N_DOF correction biases up by 3/(3N-3); subtract before comparing
        expected = 300.0 * (3 * n_atoms) / (3 * n_atoms - 3)
        assert t_mean == pytest.approx(expected, abs=0.5)


class TestTvDistance:
    def test_identical(self):
        assert sr.tv_distance([1, 2, 3], [2, 4, 6]) == 0.0

    def test_disjoint_supports(self):
        assert sr.tv_distance([1, 0], [0, 1]) == 1.0

    def test_direct_sum(self):
        assert sr.tv_distance([0.5, 0.5], [0.75, 0.25]) == pytest.approx(0.25, abs=1e-15)

    def test_bounds_and_triangle(self):
        rng = np.random.default_rng(8)
        for _ in range(25):
            p, q, r = rng.random((3, 16)) + 1e-9
            dpq = sr.tv_distance(p, q)
            dqr = sr.tv_distance(q, r)
            dpr = sr.tv_distance(p, r)
            assert 0.0 <= dpq <= 1.0
            assert dpr <= dpq + dqr + 1e-12

    def test_zero_total_rejected(self):
        with pytest.raises(ValueError):
            sr.tv_distance([0, 0], [1, 1])

    def test_mismatched_spaces_rejected(self):
        with pytest.raises(ValueError):
            sr.tv_distance([1, 2], [1, 2, 3])


class TestSpinHistogram:
    def test_counts_and_encoding(self):
        X = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, -1.0], [1.0, 1.0]])
        counts = sr.spin_histogram(X)
        np.testing.assert_array_equal(counts, [1, 2, 0, 1])

    def test_width_guard(self):
        with pytest.raises(ValueError):
            sr.spin_histogram(np.ones((2, 21)))


class TestQoIRecordJson:
    def test_moments_round_trip(self):
        rng = np.random.default_rng(9)
        rec = sr.QoIRecord.from_moments(rng.normal(size=(20, 3)), tolerance=0.02)
        back = sr.QoIRecord.from_json(rec.to_json())
        assert back.kind == rec.kind and back.tolerance == rec.tolerance
        np.testing.assert_allclose(back.m1, rec.m1, atol=0)
        np.testing.assert_allclose(back.m2, rec.m2, atol=0)

    def test_phi4_round_trip(self):
        rec = sr.QoIRecord(kind="phi4_stats", q1=-0.1, q2=1.1, q3=2.3, edges=((0, 1),))
        back = sr.QoIRecord.from_json(rec.to_json())
        assert (back.q1, back.q2, back.q3) == (rec.q1, rec.q2, rec.q3)
        assert back.edges == rec.edges

    def test_temperature_round_trip(self):
        rec = sr.QoIRecord(
            kind="temperature", temperature=300.0, masses=4.48e-26, tolerance=0.5
        )
        back = sr.QoIRecord.from_json(rec.to_json())
        assert back.temperature == rec.temperature
        np.testing.assert_array_equal(back.masses, rec.masses)

    def test_bad_tolerance(self):
        with pytest.raises(ValueError):
            sr.QoIRecord(kind="moments12", m1=np.zeros(2), m2=np.eye(2), tolerance=0.0)
