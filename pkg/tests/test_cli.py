import json

import numpy as np
import pytest

import srsample as sr
from srsample.cli import main


def run(args):
    return main([str(a) for a in args])


@pytest.fixture
def spin_file(tmp_path):
    path = tmp_path / "spins.srsx"
    assert run([
        "generate", "--model", "ising", "--shape", 2, 2, "--m", 3000,
        "--seed", 5, "--output", path,
    ]) == 0
    return path


class TestGenerate:
    def test_ising_file_contents(self, spin_file):
        samples = sr.SampleSet.load(spin_file)
        assert samples.kind == "spin"
        assert samples.n == 4 and samples.m == 3000
        assert set(np.unique(samples.data)) <= {-1.0, 1.0}

    def test_seed_replay_bit_identical(self, tmp_path):
        a, b = tmp_path / "a.srsx", tmp_path / "b.srsx"
        for p in (a, b):
            assert run([
                "generate", "--model", "gaussian", "--n", 6, "--m", 200,
                "--seed", 3, "--output", p,
            ]) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_velocities(self, tmp_path):
        out = tmp_path / "v.srsx"
        assert run([
            "generate", "--model", "velocities", "--n-atoms", 50, "--m", 20,
            "--seed", 1, "--output", out,
        ]) == 0
        assert sr.SampleSet.load(out).n == 150

    def test_model_out(self, tmp_path):
        out = tmp_path / "s.srsx"
        mout = tmp_path / "truth.json"
        assert run([
            "generate", "--model", "ising", "--shape", 2, 2, "--m", 100,
            "--seed", 2, "--output", out, "--model-out", mout,
        ]) == 0
        model = sr.model_from_json(mout.read_text())
        assert model.variant == "ising"


class TestLearnCompressRestore:
    def test_full_cycle(self, tmp_path, spin_file):
        model_path = tmp_path / "model.json"
        report_path = tmp_path / "fit.json"
        assert run([
            "learn", "--input", spin_file, "--output", model_path,
            "--report", report_path,
        ]) == 0
        fit_report = json.loads(report_path.read_text())
        assert "iterations" in fit_report and "wall_time_s" in fit_report

        archive_path = tmp_path / "a.srsa"
        assert run([
            "compress", "--input", spin_file, "--model", model_path,
            "--compression", 0.5, "--output", archive_path,
        ]) == 0

        out_path = tmp_path / "restored.srsx"
        trace_path = tmp_path / "trace.csv"
        rep_path = tmp_path / "rep.json"
        assert run([
            "restore", "--input", archive_path, "--output", out_path,
            "--report", rep_path, "--trace", trace_path, "--seed", 1,
            "--max-sweeps", 40,
        ]) == 0
        restored = sr.SampleSet.load(out_path)
        assert restored.m == 3000 and restored.kind == "spin"
        doc = json.loads(rep_path.read_text())
        assert doc["converged"] is True
        assert trace_path.read_text().startswith("sweep,qoi_error,wall_time_s")

    def test_no_correct_lossless(self, tmp_path, spin_file):
        model_path = tmp_path / "model.json"
        assert run(["learn", "--input", spin_file, "--output", model_path]) == 0
        archive_path = tmp_path / "c0.srsa"
        assert run([
            "compress", "--input", spin_file, "--model", model_path,
            "--compression", 0.0, "--output", archive_path,
        ]) == 0
        out_path = tmp_path / "raw.srsx"
        assert run([
            "restore", "--input", archive_path, "--output", out_path, "--no-correct",
        ]) == 0
        original = sr.SampleSet.load(spin_file)
        restored = sr.SampleSet.load(out_path)
        np.testing.assert_array_equal(restored.data, original.data)

    def test_gaussian_learn_recovers_identity_precision(self, tmp_path):
        data_path = tmp_path / "g.srsx"
        assert run([
            "generate", "--model", "gaussian", "--n", 4, "--m", 50_000,
            "--construction", "spectrum", "--kappa", 1.0, "--seed", 8,
            "--output", data_path,
        ]) == 0
        model_path = tmp_path / "g.json"
        assert run([
            "learn", "--input", data_path, "--output", model_path,
            "--fit-steps", 200000, "--fit-tol", 1e-10,
        ]) == 0
        model = sr.model_from_json(model_path.read_text())
        assert model.variant == "gaussian"
        assert np.abs(model.precision - np.eye(4)).max() <= 0.1


class TestEvaluate:
    def test_self_comparison_is_zero(self, tmp_path, spin_file):
        out = tmp_path / "m.json"
        assert run([
            "evaluate", "--original", spin_file, "--reconstructed", spin_file,
            "--qoi-kind", "moments12", "--tv", "--output", out,
        ]) == 0
        doc = json.loads(out.read_text())
        assert doc["moment_error"] == 0.0
        assert doc["tv_distance"] == 0.0

    def test_dimension_mismatch_exit_code(self, tmp_path, spin_file):
        other = tmp_path / "other.srsx"
        run(["generate", "--model", "gaussian", "--n", 7, "--m", 50,
             "--seed", 1, "--output", other])
        assert run([
            "evaluate", "--original", spin_file, "--reconstructed", other,
        ]) == 2


class TestExitCodes:
    def test_missing_input_is_io_error(self, tmp_path):
        assert run([
            "learn", "--input", tmp_path / "missing.srsx",
            "--output", tmp_path / "m.json",
        ]) == 4

    def test_corrupt_file_is_io_error(self, tmp_path):
        bad = tmp_path / "bad.srsx"
        bad.write_bytes(b"garbage!")
        assert run([
            "learn", "--input", bad, "--output", tmp_path / "m.json",
        ]) == 4

    def test_bad_compression_is_config_error(self, tmp_path, spin_file):
        model_path = tmp_path / "model.json"
        run(["learn", "--input", spin_file, "--output", model_path])
        assert run([
            "compress", "--input", spin_file, "--model", model_path,
            "--compression", 1.5, "--output", tmp_path / "x.srsa",
        ]) == 2

    def test_bad_config_json_is_config_error(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text('{"experiment": "unknown_kind"}')
        assert run(["experiment", "--config", cfg]) == 2

    def test_missing_config_is_io_error(self, tmp_path):
        assert run(["experiment", "--config", tmp_path / "nope.json"]) == 4


class TestExperimentCommand:
    def test_tiny_experiment_outputs(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "experiment": "ising_synthetic",
            "m_samples": 2000,
            "shape": [2, 2],
            "compression_levels": [0.5],
            "max_sweeps": 30,
            "seeds": [1, 2],
        }))
        out_dir = tmp_path / "out"
        assert run(["experiment", "--config", cfg, "--output-dir", out_dir]) == 0
        csv_path = out_dir / "ising_synthetic_report.csv"
        json_path = out_dir / "ising_synthetic_report.json"
        assert csv_path.exists() and json_path.exists()
        lines = csv_path.read_text().strip().splitlines()
        assert lines[0].startswith("experiment,level,seed,pre_error,post_error,sweeps")
        assert len(lines) == 3
        doc = json.loads(json_path.read_text())
        assert "aggregates" in doc

    def test_flag_overrides_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({
            "experiment": "ising_synthetic",
            "m_samples": 2000,
            "shape": [2, 2],
            "compression_levels": [0.3, 0.5, 0.7],
            "max_sweeps": 30,
            "seeds": [1, 2, 3],
        }))
        out_dir = tmp_path / "o2"
        assert run([
            "experiment", "--config", cfg, "--output-dir", out_dir,
            "--seed", 9, "--compression", 0.5,
        ]) == 0
        doc = json.loads((out_dir / "ising_synthetic_report.json").read_text())
        assert len(doc["rows"]) == 1
        assert doc["rows"][0]["seed"] == 9

    def test_scaling_command(self, tmp_path):
        cfg = tmp_path / "scfg.json"
        cfg.write_text(json.dumps({
            "experiment": "scaling_gaussian",
            "m_samples": 1500,
            "compression_levels": [0.9],
            "seeds": [1],
            "max_sweeps": 40,
            "model_params": {"sizes": [8, 16], "kappa": 10.0, "fit_steps": 300},
        }))
        out_dir = tmp_path / "s"
        assert run(["scaling", "--config", cfg, "--output-dir", out_dir]) == 0
        doc = json.loads((out_dir / "scaling_gaussian_report.json").read_text())
        assert set(doc["slopes"]) == {"learn", "codec", "correct"}

    def test_scaling_config_on_experiment_command_rejected(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"experiment": "scaling_gaussian"}))
        assert run(["experiment", "--config", cfg]) == 2
