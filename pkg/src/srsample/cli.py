"""Command-line interface: generate, learn, compress, restore, evaluate, experiment, scaling.

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 I/O or
format error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .archive import Archive, compress_set, decompress_set
from .data import FormatError, KIND_SPIN, SampleSet
from .learning import KineticScoreMatching
from .models import Phi4Model, lattice_edges, model_from_json, model_to_json
from .pipeline import (
    ConfigError,
    ExperimentConfig,
    build_qoi,
    gaussian_target,
    learn_model,
    maxwell_boltzmann_velocities,
    random_lattice_ising,
    random_phi4_model,
    run_experiment,
)
from .qoi import (
    ALUMINUM_MASS_GRAMS,
    KIND_MOMENTS,
    KIND_PHI4,
    KIND_TEMPERATURE,
    QoIRecord,
    kinetic_temperature,
    moments12,
    phi4_stats,
    spin_histogram,
    tv_distance,
)
from .sampling import (
    CorrectionOptions,
    DivergenceError,
    correct,
    exact_ising_distribution,
    generate_gaussian,
    generate_phi4,
    sample_exact,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="srsample",
        description="QoI-preserving sample compression with MCMC-corrected reconstruction",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a synthetic sample file")
    g.add_argument("--model", required=True,
                   choices=["ising", "gaussian", "phi4", "velocities"])
    g.add_argument("--output", required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--m", type=int, default=10_000, help="number of samples")
    g.add_argument("--shape", type=int, nargs="+", default=None,
                   help="lattice shape (e.g. 4 4); gaussian uses --n")
    g.add_argument("--n", type=int, default=16, help="dimension for gaussian data")
    g.add_argument("--periodic", action="store_true")
    g.add_argument("--coupling-low", type=float, default=-0.4)
    g.add_argument("--coupling-high", type=float, default=0.4)
    g.add_argument("--kappa", type=float, default=50.0)
    g.add_argument("--construction", default="spectrum",
                   choices=["spectrum", "factor", "smooth"])
    g.add_argument("--scale", type=float, default=1.0)
    g.add_argument("--gen-steps", type=int, default=50_000,
                   help="Langevin steps for phi4 generation")
    g.add_argument("--gen-dt", type=float, default=1e-3)
    g.add_argument("--threads", type=int, default=1)
    g.add_argument("--n-atoms", type=int, default=10_000)
    g.add_argument("--t-kelvin", type=float, default=300.0)
    g.add_argument("--mass", type=float, default=ALUMINUM_MASS_GRAMS * 1e-3)
    g.add_argument("--n-dim", type=int, default=3)
    g.add_argument("--model-out", default=None,
                   help="also write the true generating model as JSON")

    l = sub.add_parser("learn", help="fit a model to a sample file")
    l.add_argument("--input", required=True)
    l.add_argument("--output", required=True, help="model JSON path")
    l.add_argument("--kind", default="auto",
                   choices=["auto", "ising", "gaussian", "phi4", "kinetic"])
    l.add_argument("--report", default=None, help="fit report JSON path")
    l.add_argument("--periodic", action="store_true")
    l.add_argument("--mass", type=float, default=None)
    l.add_argument("--n-dim", type=int, default=3)
    l.add_argument("--n-fix-dofs", type=int, default=0)
    l.add_argument("--fit-steps", type=int, default=None)
    l.add_argument("--fit-tol", type=float, default=None)

    c = sub.add_parser("compress", help="compress samples into an archive")
    c.add_argument("--input", required=True)
    c.add_argument("--model", required=True, help="model JSON path")
    c.add_argument("--output", required=True, help="archive path")
    c.add_argument("--compression", type=float, required=True,
                   help="compression level C in [0,1); retained energy is 1-C")
    c.add_argument("--tolerance", type=float, default=0.05)
    c.add_argument("--mass", type=float, default=None)
    c.add_argument("--n-dim", type=int, default=3)
    c.add_argument("--n-fix-dofs", type=int, default=0)

    r = sub.add_parser("restore", help="decompress an archive and correct its QoIs")
    r.add_argument("--input", required=True)
    r.add_argument("--output", required=True, help="restored sample file")
    r.add_argument("--report", default=None, help="correction report JSON path")
    r.add_argument("--trace", default=None, help="correction trace CSV path")
    r.add_argument("--no-correct", action="store_true",
                   help="emit the raw decompressed samples")
    r.add_argument("--tolerance", type=float, default=None,
                   help="override the archived QoI tolerance")
    r.add_argument("--max-sweeps", type=int, default=100)
    r.add_argument("--check-every", type=int, default=1)
    r.add_argument("--langevin-step", type=float, default=0.05)
    r.add_argument("--seed", type=int, default=0)

    e = sub.add_parser("evaluate", help="QoI error metrics between two sample files")
    e.add_argument("--original", required=True)
    e.add_argument("--reconstructed", required=True)
    e.add_argument("--qoi-kind", default=KIND_MOMENTS,
                   choices=[KIND_MOMENTS, KIND_PHI4, KIND_TEMPERATURE])
    e.add_argument("--output", default=None, help="metrics JSON path (default stdout)")
    e.add_argument("--tv", action="store_true",
                   help="also report total-variation distance (spin data)")
    e.add_argument("--periodic", action="store_true")
    e.add_argument("--mass", type=float, default=ALUMINUM_MASS_GRAMS * 1e-3)
    e.add_argument("--n-dim", type=int, default=3)
    e.add_argument("--n-fix-dofs", type=int, default=0)

    x = sub.add_parser("experiment", help="run a configured end-to-end experiment")
    x.add_argument("--config", required=True)
    x.add_argument("--output-dir", default=".")
    x.add_argument("--seed", type=int, default=None, help="override: single seed")
    x.add_argument("--compression", type=float, default=None,
                   help="override: single compression level")
    x.add_argument("--tolerance", type=float, default=None)
    x.add_argument("--max-sweeps", type=int, default=None)
    x.add_argument("--threads", type=int, default=None)
    x.add_argument("--with-random-baseline", action="store_true")
    x.add_argument("--input", default=None, help="sample file for ingest experiments")

    s = sub.add_parser("scaling", help="run a size-ladder timing study")
    s.add_argument("--config", required=True)
    s.add_argument("--output-dir", default=".")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--threads", type=int, default=None)

    return parser


def _load_samples(path):
    try:
        return SampleSet.load(path)
    except FileNotFoundError as exc:
        raise _IOFailure(str(exc)) from exc
    except FormatError as exc:
        raise _IOFailure(str(exc)) from exc


class _IOFailure(Exception):
    pass


def _cmd_generate(args):
    rng = np.random.default_rng(args.seed)
    truth = None
    if args.model == "ising":
        shape = tuple(args.shape or (4, 4))
        truth = random_lattice_ising(
            shape, rng, coupling_low=args.coupling_low,
            coupling_high=args.coupling_high, periodic=args.periodic,
        )
        table = exact_ising_distribution(truth)
        samples = sample_exact(table, args.m, rng)
        samples = SampleSet(samples.data, kind=KIND_SPIN, shape=shape)
    elif args.model == "gaussian":
        mu, sigma = gaussian_target(
            args.n, rng,
            {"construction": args.construction, "kappa": args.kappa, "scale": args.scale},
        )
        samples = generate_gaussian(mu, sigma, args.m, rng)
    elif args.model == "phi4":
        shape = tuple(args.shape or (16, 16))
        truth = random_phi4_model(shape, rng, periodic=args.periodic or True)
        samples = generate_phi4(truth, args.gen_steps, args.gen_dt, args.m, rng,
                                workers=args.threads)
    else:  # velocities
        samples = maxwell_boltzmann_velocities(
            args.n_atoms, args.t_kelvin, args.mass, args.m, rng, n_dim=args.n_dim
        )
    samples.save(args.output)
    if args.model_out and truth is not None:
        Path(args.model_out).write_text(model_to_json(truth) + "\n")
    print(f"wrote {samples.m} x {samples.n} {samples.kind} samples to {args.output}")
    return EXIT_OK


def _cmd_learn(args):
    samples = _load_samples(args.input)
    params = {}
    if args.fit_steps is not None:
        params["n_steps"] = args.fit_steps
    if args.fit_tol is not None:
        params["tol"] = args.fit_tol
    if args.kind == "phi4" or (args.kind == "auto" and samples.shape and len(samples.shape) > 1
                               and samples.kind != KIND_SPIN):
        params["periodic"] = args.periodic
    model, report = learn_model(
        samples, kind=args.kind, masses=args.mass,
        n_dim=args.n_dim, n_fix_dofs=args.n_fix_dofs, **params,
    )
    Path(args.output).write_text(model_to_json(model) + "\n")
    if args.report:
        Path(args.report).write_text(json.dumps(report, indent=2) + "\n")
    print(f"learned {model.variant} model ({model.n} sites) -> {args.output}")
    return EXIT_OK


def _cmd_compress(args):
    samples = _load_samples(args.input)
    try:
        model = model_from_json(Path(args.model).read_text())
    except FileNotFoundError as exc:
        raise _IOFailure(str(exc)) from exc
    if not 0.0 <= args.compression < 1.0:
        raise ConfigError("compression must lie in [0, 1)")
    qoi = build_qoi(
        samples, model.qoi_kind, args.tolerance,
        edges=model.edges if isinstance(model, Phi4Model) else None,
        masses=args.mass, n_dim=args.n_dim, n_fix_dofs=args.n_fix_dofs,
    )
    archive = compress_set(samples, 1.0 - args.compression, model, qoi)
    archive.save(args.output)
    print(
        f"wrote archive {args.output}: {archive.m} samples, level {args.compression:g}, "
        f"mean kept coefficients {archive.lengths.mean():.2f}/{archive.n}"
    )
    return EXIT_OK


def _cmd_restore(args):
    try:
        archive = Archive.load(args.input)
    except FileNotFoundError as exc:
        raise _IOFailure(str(exc)) from exc
    except FormatError as exc:
        raise _IOFailure(str(exc)) from exc
    if args.no_correct:
        samples = decompress_set(archive)
        report = None
    else:
        opts = CorrectionOptions(
            tolerance=args.tolerance if args.tolerance is not None else archive.qoi.tolerance,
            max_sweeps=args.max_sweeps,
            check_every=args.check_every,
            langevin_step=args.langevin_step,
        )
        target = archive.qoi
        if args.tolerance is not None:
            doc = json.loads(target.to_json())
            doc["tolerance"] = args.tolerance
            target = QoIRecord.from_json(json.dumps(doc))
        samples = decompress_set(archive)
        samples, report = correct(samples, archive.model, target, opts,
                                  np.random.default_rng(args.seed))
    samples.save(args.output)
    if report is not None:
        if args.report:
            Path(args.report).write_text(json.dumps(report.to_dict(), indent=2) + "\n")
        if args.trace:
            Path(args.trace).write_text(report.to_csv())
        status = "converged" if report.converged else "NOT converged"
        print(
            f"restored {samples.m} samples to {args.output}; {status} after "
            f"{report.sweeps_used} sweeps (final error {report.final_error:.4g})"
        )
        if not report.converged:
            return EXIT_NUMERIC
    else:
        print(f"restored {samples.m} samples to {args.output} (no correction)")
    return EXIT_OK


def _cmd_evaluate(args):
    orig = _load_samples(args.original)
    recon = _load_samples(args.reconstructed)
    if orig.n != recon.n:
        raise ConfigError(f"dimension mismatch: {orig.n} vs {recon.n}")
    metrics = {}
    if args.qoi_kind == KIND_MOMENTS:
        m1o, m2o = moments12(orig.data)
        m1r, m2r = moments12(recon.data)
        e1 = float(np.max(np.abs(m1o - m1r)))
        e2 = float(np.max(np.abs(m2o - m2r)))
        metrics.update(e1=e1, e2=e2, moment_error=max(e1, e2))
    elif args.qoi_kind == KIND_PHI4:
        if orig.shape is None or len(orig.shape) < 2:
            raise ConfigError("phi4 evaluation needs lattice-shaped samples")
        edges = lattice_edges(orig.shape, periodic=args.periodic)
        qo = phi4_stats(orig.data, edges)
        qr = phi4_stats(recon.data, edges)
        metrics.update(
            q_original=list(qo), q_reconstructed=list(qr),
            qoi_error=float(max(abs(a - b) for a, b in zip(qo, qr))),
        )
    else:
        _, to = kinetic_temperature(orig.data, args.mass, n_dim=args.n_dim,
                                    n_fix_dofs=args.n_fix_dofs)
        _, tr = kinetic_temperature(recon.data, args.mass, n_dim=args.n_dim,
                                    n_fix_dofs=args.n_fix_dofs)
        metrics.update(t_original=to, t_reconstructed=tr, temperature_error=abs(to - tr))
    if args.tv:
        if orig.kind != KIND_SPIN or recon.kind != KIND_SPIN:
            raise ConfigError("TV distance needs spin data on both sides")
        metrics["tv_distance"] = tv_distance(
            spin_histogram(orig.data), spin_histogram(recon.data)
        )
    text = json.dumps(metrics, indent=2)
    if args.output:
        Path(args.output).write_text(text + "\n")
    else:
        print(text)
    return EXIT_OK


def _load_config(args):
    try:
        text = Path(args.config).read_text()
    except FileNotFoundError as exc:
        raise _IOFailure(str(exc)) from exc
    cfg = ExperimentConfig.from_json(text)
    # precedence: flags > config > defaults
    if getattr(args, "seed", None) is not None:
        cfg.seeds = (args.seed,)
    if getattr(args, "compression", None) is not None:
        cfg.compression_levels = (args.compression,)
    if getattr(args, "tolerance", None) is not None:
        cfg.tolerance = args.tolerance
    if getattr(args, "max_sweeps", None) is not None:
        cfg.max_sweeps = args.max_sweeps
    if getattr(args, "threads", None) is not None:
        cfg.workers = args.threads
    if getattr(args, "with_random_baseline", False):
        cfg.with_random_baseline = True
    if getattr(args, "input", None):
        cfg.input_path = args.input
    return cfg


def _cmd_experiment(args):
    cfg = _load_config(args)
    if cfg.experiment.startswith("scaling"):
        raise ConfigError("use the 'scaling' subcommand for scaling experiments")
    report = run_experiment(cfg)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{cfg.experiment}_report.csv").write_text(report.to_csv())
    (out / f"{cfg.experiment}_report.json").write_text(report.to_json() + "\n")
    print(f"wrote {cfg.experiment} report ({len(report.rows)} rows) to {out}")
    return EXIT_OK


def _cmd_scaling(args):
    cfg = _load_config(args)
    if not cfg.experiment.startswith("scaling"):
        raise ConfigError("scaling subcommand needs a scaling_* experiment config")
    report = run_experiment(cfg)
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{cfg.experiment}_report.csv").write_text(report.to_csv())
    (out / f"{cfg.experiment}_report.json").write_text(report.to_json() + "\n")
    slopes = report.slopes()
    print("fitted log-log wall-time slopes: "
          + ", ".join(f"{k}={v:.2f}" for k, v in slopes.items()))
    return EXIT_OK


_COMMANDS = {
    "generate": _cmd_generate,
    "learn": _cmd_learn,
    "compress": _cmd_compress,
    "restore": _cmd_restore,
    "evaluate": _cmd_evaluate,
    "experiment": _cmd_experiment,
    "scaling": _cmd_scaling,
}


def main(argv=None):
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DivergenceError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except _IOFailure as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
