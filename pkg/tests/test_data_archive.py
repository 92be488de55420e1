import numpy as np
import pytest

import srsample as sr
from srsample.data import FormatError


def spin_set(rng, m=40, shape=(4, 4)):
    n = int(np.prod(shape))
    data = np.where(rng.random((m, n)) < 0.5, -1.0, 1.0)
    return sr.SampleSet(data, kind="spin", shape=shape)


def continuous_set(rng, m=40, n=16):
    return sr.SampleSet(rng.normal(size=(m, n)), kind="continuous")


def dummy_archive_inputs(samples):
    if samples.kind == "spin":
        model = sr.IsingModel(np.zeros((samples.n, samples.n)), np.zeros(samples.n))
    else:
        model = sr.GaussianModel(np.zeros(samples.n), np.eye(samples.n))
    return model, sr.QoIRecord.from_moments(samples.data)


class TestSampleSet:
    def test_spin_validation(self):
        with pytest.raises(ValueError):
            sr.SampleSet(np.array([[1.0, 0.5]]), kind="spin")

    def test_shape_product_must_match(self):
        with pytest.raises(ValueError):
            sr.SampleSet(np.ones((2, 6)), kind="continuous", shape=(2, 2))

    def test_file_round_trip(self, tmp_path):
        rng = np.random.default_rng(0)
        for samples in (spin_set(rng), continuous_set(rng)):
            path = tmp_path / f"{samples.kind}.srsx"
            samples.save(path)
            back = sr.SampleSet.load(path)
            assert back.kind == samples.kind
            assert back.shape == samples.shape
            np.testing.assert_array_equal(back.data, samples.data)

    def test_bit_identical_files(self, tmp_path):
        rng = np.random.default_rng(1)
        samples = spin_set(rng)
        p1, p2 = tmp_path / "a.srsx", tmp_path / "b.srsx"
        samples.save(p1)
        samples.save(p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.srsx"
        path.write_bytes(b"NOPE" + b"\x00" * 32)
        with pytest.raises(FormatError):
            sr.SampleSet.load(path)

    def test_truncated_payload(self, tmp_path):
        rng = np.random.default_rng(2)
        path = tmp_path / "trunc.srsx"
        spin_set(rng).save(path)
        path.write_bytes(path.read_bytes()[:-8])
        with pytest.raises(FormatError):
            sr.SampleSet.load(path)


class TestCompressDecompress:
    def test_lossless_limit_spin(self):
        rng = np.random.default_rng(3)
        samples = spin_set(rng)
        model, qoi = dummy_archive_inputs(samples)
        recon = sr.decompress_set(sr.compress_set(samples, 1.0, model, qoi))
        np.testing.assert_array_equal(recon.data, samples.data)

    def test_lossless_limit_continuous(self):
        rng = np.random.default_rng(4)
        samples = continuous_set(rng)
        model, qoi = dummy_archive_inputs(samples)
        recon = sr.decompress_set(sr.compress_set(samples, 1.0, model, qoi))
        np.testing.assert_allclose(recon.data, samples.data, atol=1e-9)

    def test_constant_sample_exact_at_any_level(self):
        samples = sr.SampleSet(np.full((3, 8), 1.25), kind="continuous")
        model = sr.GaussianModel(np.zeros(8), np.eye(8))
        qoi = sr.QoIRecord(kind="moments12", m1=np.zeros(8), m2=np.eye(8))
        for e in (0.05, 0.5, 1.0):
            arc = sr.compress_set(samples, e, model, qoi)
            recon = sr.decompress_set(arc)
            np.testing.assert_allclose(recon.data, samples.data, atol=1e-10)
            if e < 1.0:
                # all energy sits in the leading coefficient
                assert np.all(arc.lengths == 1)

    def test_kept_count_monotone_in_energy_budget(self):
        rng = np.random.default_rng(5)
        samples = continuous_set(rng)
        model, qoi = dummy_archive_inputs(samples)
        totals = [
            sr.compress_set(samples, e, model, qoi).lengths.sum()
            for e in (0.1, 0.3, 0.5, 0.7, 0.9, 1.0)
        ]
        assert totals == sorted(totals)

    def test_reconstruction_error_non_increasing_in_budget(self):
        rng = np.random.default_rng(6)
        samples = continuous_set(rng)
        model, qoi = dummy_archive_inputs(samples)
        errs = []
        for e in (0.2, 0.4, 0.6, 0.8, 1.0):
            recon = sr.decompress_set(sr.compress_set(samples, e, model, qoi))
            errs.append(np.linalg.norm(recon.data - samples.data) / np.linalg.norm(samples.data))
        assert all(b <= a + 1e-12 for a, b in zip(errs, errs[1:]))

    def test_retained_fraction_within_budget(self):
        rng = np.random.default_rng(7)
        samples = continuous_set(rng)
        model, qoi = dummy_archive_inputs(samples)
        for e in (0.3, 0.6, 0.9):
            arc = sr.compress_set(samples, e, model, qoi)
            # the minimum-one rule can push single-coefficient samples over
            # budget; all others stay within it
            starts = np.concatenate([[0], np.cumsum(arc.lengths)])
            coeff_sets = [arc.coeffs[starts[i]:starts[i + 1]] for i in range(arc.m)]
            # Parseval: row energy equals total coefficient energy
            for row, kept in zip(samples.data, coeff_sets):
                if kept.size > 1:
                    frac = np.sum(kept**2) / np.sum(row**2)
                    assert frac <= e + 1e-9

    def test_spin_binarization_sign(self):
        rng = np.random.default_rng(8)
        samples = spin_set(rng, m=25)
        model, qoi = dummy_archive_inputs(samples)
        recon = sr.decompress_set(sr.compress_set(samples, 0.1, model, qoi))
        assert set(np.unique(recon.data)) <= {-1.0, 1.0}

    def test_invalid_budget(self):
        rng = np.random.default_rng(9)
        samples = spin_set(rng)
        model, qoi = dummy_archive_inputs(samples)
        with pytest.raises(ValueError):
            sr.compress_set(samples, 0.0, model, qoi)


class TestArchiveIO:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(10)
        samples = continuous_set(rng, m=30)
        model, qoi = dummy_archive_inputs(samples)
        arc = sr.compress_set(samples, 0.4, model, qoi)
        p1, p2 = tmp_path / "x.srsa", tmp_path / "y.srsa"
        arc.save(p1)
        back = sr.Archive.load(p1)
        back.save(p2)
        assert p1.read_bytes() == p2.read_bytes()
        assert back.e_presv == arc.e_presv
        assert back.kind == arc.kind and back.shape == arc.shape
        np.testing.assert_array_equal(back.lengths, arc.lengths)
        np.testing.assert_array_equal(back.coeffs, arc.coeffs)
        np.testing.assert_array_equal(back.model.precision, model.precision)
        np.testing.assert_allclose(back.qoi.m1, qoi.m1, atol=0)

    def test_decompress_after_reload(self, tmp_path):
        rng = np.random.default_rng(11)
        samples = spin_set(rng)
        model, qoi = dummy_archive_inputs(samples)
        arc = sr.compress_set(samples, 0.5, model, qoi)
        path = tmp_path / "z.srsa"
        arc.save(path)
        a = sr.decompress_set(arc)
        b = sr.decompress_set(sr.Archive.load(path))
        np.testing.assert_array_equal(a.data, b.data)

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.srsa"
        path.write_bytes(b"JUNK" + b"\x00" * 64)
        with pytest.raises(FormatError):
            sr.Archive.load(path)

    def test_truncated_sample_block(self, tmp_path):
        rng = np.random.default_rng(12)
        samples = spin_set(rng, m=10)
        model, qoi = dummy_archive_inputs(samples)
        arc = sr.compress_set(samples, 0.9, model, qoi)
        path = tmp_path / "t.srsa"
        arc.save(path)
        path.write_bytes(path.read_bytes()[:-4])
        with pytest.raises(FormatError):
            sr.Archive.load(path)

    def test_samples_view(self):
        rng = np.random.default_rng(13)
        samples = continuous_set(rng, m=8)
        model, qoi = dummy_archive_inputs(samples)
        arc = sr.compress_set(samples, 0.6, model, qoi)
        views = arc.samples
        assert len(views) == 8
        assert all(v.j_kept == l for v, l in zip(views, arc.lengths))
        np.testing.assert_array_equal(np.concatenate([v.coeffs for v in views]), arc.coeffs)
