"""MCMC kernels, exact small-model oracles, synthetic generators, and QoI correction.

Every operation takes an explicit seed or ``numpy.random.Generator``; identical
seeds and inputs reproduce identical outputs.  Ensemble updates are vectorized
over chains (one chain per sample).
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import expit

from .data import KIND_CONTINUOUS, KIND_SPIN, SampleSet
from .models import GaussianModel, IsingModel, Phi4Model, _adjacency, score
from .qoi import QoIRecord
from .validation import as_matrix, as_rng, check_spins, check_symmetric

ENUMERATION_MAX_SITES = 24
DIVERGENCE_LIMIT = 1e6
_PHI4_CHUNK = 2048


class DivergenceError(RuntimeError):
    """A chain state left the finite/bounded region (dynamics diverged)."""


@dataclass(frozen=True)
class CorrectionOptions:
    """Knobs of the warm-started correction loop."""

    tolerance: float = 0.05
    max_sweeps: int = 100
    check_every: int = 1
    langevin_step: float = 0.05

    def __post_init__(self):
        if self.tolerance <= 0:
            raise ValueError("tolerance must be positive")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be at least 1")
        if self.check_every < 1:
            raise ValueError("check_every must be at least 1")
        if self.langevin_step < 0:
            raise ValueError("langevin_step must be nonnegative")


@dataclass
class CorrectionReport:
    """Per-checkpoint error trace of one correction run."""

    sweeps_used: int
    error_trace: list = field(default_factory=list)  # (sweep, qoi_error, wall_time_s)
    converged: bool = False
    wall_time: float = 0.0

    def to_dict(self):
        return {
            "sweeps_used": self.sweeps_used,
            "converged": self.converged,
            "wall_time_s": self.wall_time,
            "error_trace": [
                {"sweep": s, "qoi_error": e, "wall_time_s": w} for s, e, w in self.error_trace
            ],
        }

    def to_csv(self):
        lines = ["sweep,qoi_error,wall_time_s"]
        lines += [f"{s},{e:.10g},{w:.6f}" for s, e, w in self.error_trace]
        return "\n".join(lines) + "\n"

    @property
    def final_error(self):
        return self.error_trace[-1][1]


def glauber_sweep(model: IsingModel, sigma, rng):
    """One sweep (= N single-site heat-bath updates at uniformly random sites) of one chain."""
    g = as_rng(rng)
    s = np.array(sigma, dtype=np.float64).ravel()
    check_spins(s, "sigma")
    n = model.n
    if s.size != n:
        raise ValueError("spin vector length does not match model size")
    J, h = model.coupling, model.field
    for _ in range(n):
        i = int(g.integers(n))
        p = expit(2.0 * (h[i] + J[i] @ s))
        s[i] = 1.0 if g.random() < p else -1.0
    return s


def glauber_sweep_ensemble(model: IsingModel, S, rng):
    """One sweep applied to every chain of an (M, N) spin ensemble (returns a new array)."""
    g = as_rng(rng)
    out = np.array(S, dtype=np.float64)
    check_spins(out, "spins")
    m, n = out.shape
    J, h = model.coupling, model.field
    rows_idx = np.arange(m)
    for _ in range(n):
        idx = g.integers(n, size=m)
        local = np.einsum("ij,ij->i", J[idx], out) + h[idx]
        p = expit(2.0 * local)
        out[rows_idx, idx] = np.where(g.random(m) < p, 1.0, -1.0)
    return out


def langevin_step(model, x, eps, rng):
    """x + eps * score(x) + sqrt(2 eps) z with standard normal z; vector or (M, N) batch."""
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    g = as_rng(rng)
    X = np.asarray(x, dtype=np.float64)
    drift = score(model, X)
    noise = g.standard_normal(X.shape)
    return X + eps * drift + math.sqrt(2.0 * eps) * noise


def _decode_states(indices, n):
    """Spin matrix for state indices (bit b set <=> site b is +1)."""
    k = np.asarray(indices, dtype=np.uint64).reshape(-1, 1)
    bits = (k >> np.arange(n, dtype=np.uint64)) & np.uint64(1)
    return bits.astype(np.float64) * 2.0 - 1.0


def exact_ising_distribution(model: IsingModel):
    """Normalized Boltzmann probabilities over all 2^N states (N <= 24)."""
    n = model.n
    if n > ENUMERATION_MAX_SITES:
        raise ValueError(f"exact enumeration is limited to {ENUMERATION_MAX_SITES} sites")
    total = 1 << n
    energies = np.empty(total)
    chunk = 1 << 16
    for start in range(0, total, chunk):
        idx = np.arange(start, min(start + chunk, total), dtype=np.uint64)
        S = _decode_states(idx, n)
        energies[start : start + S.shape[0]] = S @ model.field + 0.5 * np.einsum(
            "mi,mi->m", S @ model.coupling, S
        )
    energies -= energies.max()
    p = np.exp(energies)
    p /= p.sum()
    return p


def sample_exact(probs, m, rng):
    """M i.i.d. spin samples drawn from an exact state table by inverse-CDF lookup."""
    g = as_rng(rng)
    p = np.asarray(probs, dtype=np.float64).ravel()
    if p.size < 1 or abs(p.sum() - 1.0) > 1e-9 or np.any(p < 0):
        raise ValueError("probs must be a normalized probability table")
    n = int(round(math.log2(p.size)))
    if 1 << n != p.size:
        raise ValueError("table length must be a power of two")
    cdf = np.cumsum(p)
    cdf[-1] = 1.0
    idx = np.searchsorted(cdf, g.random(m), side="right")
    return SampleSet(_decode_states(idx, n), kind=KIND_SPIN)


def generate_gaussian(mean, cov, m, rng, shape=None):
    """M draws from N(mean, cov) via the Cholesky factor."""
    g = as_rng(rng)
    mu = np.asarray(mean, dtype=np.float64).ravel()
    C = check_symmetric(cov, "cov", tol=1e-10 * max(1.0, float(np.abs(cov).max())))
    try:
        L = np.linalg.cholesky(C)
    except np.linalg.LinAlgError as exc:
        raise ValueError("covariance must be positive definite") from exc
    Z = g.standard_normal((m, mu.size))
    return SampleSet(mu + Z @ L.T, kind=KIND_CONTINUOUS, shape=shape)


def well_conditioned_covariance(n, kappa, rng):
    """Sigma = Q D Q' with random orthogonal Q and eigenvalues uniform on [1/kappa, 1]."""
    if kappa < 1:
        raise ValueError("kappa must be at least 1")
    g = as_rng(rng)
    Q, _ = np.linalg.qr(g.standard_normal((n, n)))
    lam = g.uniform(1.0 / kappa, 1.0, size=n)
    sigma = (Q * lam) @ Q.T
    return 0.5 * (sigma + sigma.T)


def _phi4_evolve(model, x, n_steps, dt, g):
    """In-place unadjusted Langevin evolution of a (c, N) block of chains."""
    adj = _adjacency(model.n, model.edges)
    a4, b2, gam = 4.0 * model.alpha, 2.0 * model.beta, model.gamma
    step_noise = math.sqrt(2.0 * dt)
    drift = np.empty_like(x)
    for _ in range(n_steps):
        np.multiply(x, x, out=drift)
        drift *= -a4
        drift -= b2
        drift *= x  # (-4a x^2 - 2b) x
        drift -= gam * (x @ adj)
        x += dt * drift
        x += step_noise * g.standard_normal(x.shape)
        if not np.isfinite(x[0, 0]):
            raise DivergenceError("lattice-field generation diverged; reduce the step size")
    return x


def _phi4_chunk_worker(args):
    model, n_steps, dt, count, child_rng = args
    x = child_rng.standard_normal((count, model.n))
    return _phi4_evolve(model, x, n_steps, dt, child_rng)


def generate_phi4(model: Phi4Model, n_steps, dt, m, rng, workers=1):
    """M independent chains from standard-normal starts, evolved n_steps at step dt.

    Chains are processed in fixed-size blocks with per-block spawned RNG
    streams, so results are identical for any ``workers`` count.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    g = as_rng(rng)
    counts = [min(_PHI4_CHUNK, m - s) for s in range(0, m, _PHI4_CHUNK)]
    children = g.spawn(len(counts))
    jobs = [(model, n_steps, dt, c, s) for c, s in zip(counts, children)]
    if workers is None:
        workers = 1
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(_phi4_chunk_worker, jobs))
    else:
        blocks = [_phi4_chunk_worker(j) for j in jobs]
    data = np.vstack(blocks)
    return SampleSet(data, kind=KIND_CONTINUOUS, shape=model.shape)


def concat_datasets(sets, m, rng):
    """Joint samples built by concatenating one independent draw from each input set."""
    if not sets:
        raise ValueError("need at least one input set")
    kinds = {s.kind for s in sets}
    if len(kinds) != 1:
        raise ValueError("all sets must share the same sample kind")
    g = as_rng(rng)
    parts = [s.data[g.integers(s.m, size=m)] for s in sets]
    return SampleSet(np.hstack(parts), kind=kinds.pop())


def random_initial_set(kind, m, n, rng, shape=None):
    """Baseline chain initialization: uniform +-1 spins or standard normal vectors."""
    g = as_rng(rng)
    if kind == KIND_SPIN:
        data = g.integers(0, 2, size=(m, n)).astype(np.float64) * 2.0 - 1.0
    elif kind == KIND_CONTINUOUS:
        data = g.standard_normal((m, n))
    else:
        raise ValueError(f"unknown kind {kind!r}")
    return SampleSet(data, kind=kind, shape=shape)


def _check_model_matches(init: SampleSet, model, target: QoIRecord):
    if init.n != model.n:
        raise ValueError(f"sample dimension {init.n} does not match model size {model.n}")
    if target.kind != model.qoi_kind:
        raise ValueError(
            f"QoI kind {target.kind!r} does not match the model's {model.qoi_kind!r}"
        )
    if isinstance(model, IsingModel) and init.kind != KIND_SPIN:
        raise ValueError("Ising correction needs spin samples")
    if not isinstance(model, IsingModel) and init.kind != KIND_CONTINUOUS:
        raise ValueError("Langevin correction needs continuous samples")


def correct(init: SampleSet, model, target: QoIRecord, opts: CorrectionOptions, rng):
    """Run one MCMC chain per sample until the ensemble QoIs match the stored targets.

    Discrete models advance by full Glauber sweeps, continuous models by single
    Langevin iterations of the whole ensemble; every ``check_every`` sweeps the
    ensemble QoI error is compared against ``opts.tolerance``.
    """
    _check_model_matches(init, model, target)
    g = as_rng(rng)
    t0 = time.perf_counter()
    X = np.array(init.data)
    discrete = isinstance(model, IsingModel)
    err = target.error(X)
    trace = [(0, float(err), 0.0)]
    converged = err <= opts.tolerance
    sweeps = 0
    while not converged and sweeps < opts.max_sweeps:
        sweeps += 1
        if discrete:
            X = glauber_sweep_ensemble(model, X, g)
        else:
            X = langevin_step(model, X, opts.langevin_step, g)
            if not np.all(np.isfinite(X)) or np.max(np.abs(X)) > DIVERGENCE_LIMIT:
                raise DivergenceError(
                    f"correction diverged at sweep {sweeps}; reduce langevin_step"
                )
        if sweeps % opts.check_every == 0:
            err = target.error(X)
            trace.append((sweeps, float(err), time.perf_counter() - t0))
            converged = err <= opts.tolerance
    report = CorrectionReport(
        sweeps_used=sweeps,
        error_trace=trace,
        converged=bool(converged),
        wall_time=time.perf_counter() - t0,
    )
    return SampleSet(X, kind=init.kind, shape=init.shape), report
