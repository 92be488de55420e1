"""Quantities of interest, their error metrics, and distributional diagnostics."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .validation import as_matrix

BOLTZMANN = 1.38e-23
ALUMINUM_MASS_GRAMS = 26.982 / 6.022e23

KIND_MOMENTS = "moments12"
KIND_PHI4 = "phi4_stats"
KIND_TEMPERATURE = "temperature"

# spin-state TV histograms are dense over 2^N states; refuse beyond this width
TV_MAX_SITES = 20


def moments12(X):
    """Sample mean and Bessel-corrected covariance of an (M, N) sample matrix."""
    A = as_matrix(X)
    if A.shape[0] < 2:
        raise ValueError("need at least two samples for second moments")
    m1 = A.mean(axis=0)
    D = A - m1
    m2 = (D.T @ D) / (A.shape[0] - 1)
    return m1, m2


def phi4_stats(X, edges):
    """(edge product mean, squared-value mean, fourth-power mean) over samples and sites."""
    A = as_matrix(X)
    e = np.asarray(edges, dtype=np.intp)
    if e.size == 0:
        raise ValueError("phi4 statistics need a non-empty edge set")
    q1 = float(np.mean(A[:, e[:, 0]] * A[:, e[:, 1]]))
    q2 = float(np.mean(A**2))
    q3 = float(np.mean(A**4))
    return q1, q2, q3


def kinetic_temperature(V, masses, n_dim=3, n_fix_dofs=0, k_b=BOLTZMANN):
    """Kinetic temperature per configuration and its ensemble mean.

    ``V`` holds one velocity configuration per row (n_dim components per atom,
    atom-major); ``masses`` is one mass per atom or a scalar.
    """
    A = as_matrix(V)
    n_comp = A.shape[1]
    if n_comp % n_dim != 0:
        raise ValueError(f"row width {n_comp} is not a multiple of n_dim={n_dim}")
    n_atoms = n_comp // n_dim
    m = np.asarray(masses, dtype=np.float64).ravel()
    if m.size == 1:
        m = np.full(n_atoms, float(m[0]))
    if m.size != n_atoms:
        raise ValueError(f"need {n_atoms} masses, got {m.size}")
    if np.any(m <= 0.0):
        raise ValueError("masses must be positive")
    n_dof = n_dim * n_atoms - n_dim - n_fix_dofs
    if n_dof <= 0:
        raise ValueError(f"non-positive degree-of-freedom count {n_dof}")
    per_component_mass = np.repeat(m, n_dim)
    e_kin = 0.5 * (A * A) @ per_component_mass
    T = 2.0 * e_kin / (n_dof * k_b)
    return T, float(T.mean())


def tv_distance(p_counts, q_counts):
    """Half L1 distance between two normalized histograms over the same state space."""
    p = np.asarray(p_counts, dtype=np.float64).ravel()
    q = np.asarray(q_counts, dtype=np.float64).ravel()
    if p.size != q.size:
        raise ValueError("histograms must cover the same state space")
    ps, qs = p.sum(), q.sum()
    if ps <= 0.0 or qs <= 0.0:
        raise ValueError("cannot normalize a zero-total histogram")
    return float(0.5 * np.abs(p / ps - q / qs).sum())


def spin_histogram(X):
    """Dense histogram of +-1 spin rows over all 2^N states (bit b set <=> site b is +1)."""
    A = as_matrix(X)
    n = A.shape[1]
    if n > TV_MAX_SITES:
        raise ValueError(f"dense spin histograms are limited to {TV_MAX_SITES} sites, got {n}")
    bits = (A > 0).astype(np.uint64)
    idx = bits @ (np.uint64(1) << np.arange(n, dtype=np.uint64))
    return np.bincount(idx.astype(np.int64), minlength=1 << n).astype(np.int64)


@dataclass(frozen=True)
class QoIRecord:
    """Named QoI targets with a tolerance; payload fields depend on ``kind``."""

    kind: str
    tolerance: float = 0.05
    m1: np.ndarray | None = None
    m2: np.ndarray | None = None
    q1: float | None = None
    q2: float | None = None
    q3: float | None = None
    temperature: float | None = None
    masses: np.ndarray | None = None
    n_dim: int = 3
    n_fix_dofs: int = 0
    k_b: float = BOLTZMANN
    edges: tuple = field(default=())

    def __post_init__(self):
        if self.tolerance <= 0.0:
            raise ValueError("tolerance must be positive")
        if self.kind == KIND_MOMENTS:
            if self.m1 is None or self.m2 is None:
                raise ValueError("moments12 record needs m1 and m2")
            m1 = np.asarray(self.m1, dtype=np.float64).ravel()
            m2 = np.asarray(self.m2, dtype=np.float64)
            if m2.shape != (m1.size, m1.size):
                raise ValueError("m2 must be square and match m1")
            if not np.allclose(m2, m2.T, atol=1e-10 * max(1.0, np.abs(m2).max()), rtol=0.0):
                raise ValueError("m2 must be symmetric")
            object.__setattr__(self, "m1", m1)
            object.__setattr__(self, "m2", m2)
        elif self.kind == KIND_PHI4:
            if self.q1 is None or self.q2 is None or self.q3 is None:
                raise ValueError("phi4_stats record needs q1, q2, q3")
            object.__setattr__(self, "edges", tuple(tuple(e) for e in self.edges))
        elif self.kind == KIND_TEMPERATURE:
            if self.temperature is None or self.masses is None:
                raise ValueError("temperature record needs a target temperature and masses")
            n_dof_check = self.n_dim  # full check happens against data width at use time
            if n_dof_check <= 0:
                raise ValueError("n_dim must be positive")
            object.__setattr__(
                self, "masses", np.atleast_1d(np.asarray(self.masses, dtype=np.float64))
            )
        else:
            raise ValueError(f"unknown QoI kind {self.kind!r}")

    @classmethod
    def from_moments(cls, X, tolerance=0.05):
        m1, m2 = moments12(X)
        return cls(kind=KIND_MOMENTS, tolerance=tolerance, m1=m1, m2=m2)

    @classmethod
    def from_phi4(cls, X, edges, tolerance=0.05):
        q1, q2, q3 = phi4_stats(X, edges)
        return cls(kind=KIND_PHI4, tolerance=tolerance, q1=q1, q2=q2, q3=q3, edges=tuple(edges))

    @classmethod
    def from_temperature(cls, V, masses, tolerance=0.5, n_dim=3, n_fix_dofs=0, k_b=BOLTZMANN):
        _, t_mean = kinetic_temperature(V, masses, n_dim=n_dim, n_fix_dofs=n_fix_dofs, k_b=k_b)
        return cls(
            kind=KIND_TEMPERATURE,
            tolerance=tolerance,
            temperature=t_mean,
            masses=masses,
            n_dim=n_dim,
            n_fix_dofs=n_fix_dofs,
            k_b=k_b,
        )

    def error(self, X):
        """Max elementwise QoI error of a sample matrix against the stored targets."""
        if self.kind == KIND_MOMENTS:
            m1, m2 = moments12(X)
            e1 = float(np.max(np.abs(m1 - self.m1)))
            e2 = float(np.max(np.abs(m2 - self.m2)))
            return max(e1, e2)
        if self.kind == KIND_PHI4:
            q1, q2, q3 = phi4_stats(X, self.edges)
            return max(abs(q1 - self.q1), abs(q2 - self.q2), abs(q3 - self.q3))
        if self.kind == KIND_TEMPERATURE:
            _, t_mean = kinetic_temperature(
                X, self.masses, n_dim=self.n_dim, n_fix_dofs=self.n_fix_dofs, k_b=self.k_b
            )
            return abs(t_mean - self.temperature)
        raise ValueError(f"unknown QoI kind {self.kind!r}")

    def to_json(self):
        doc = {"kind": self.kind, "tolerance": self.tolerance}
        if self.kind == KIND_MOMENTS:
            doc["m1"] = self.m1.tolist()
            doc["m2"] = self.m2.ravel().tolist()
        elif self.kind == KIND_PHI4:
            doc.update(q1=self.q1, q2=self.q2, q3=self.q3, edges=[list(e) for e in self.edges])
        else:
            doc.update(
                temperature=self.temperature,
                masses=self.masses.tolist(),
                n_dim=self.n_dim,
                n_fix_dofs=self.n_fix_dofs,
                k_b=self.k_b,
            )
        return json.dumps(doc, separators=(",", ":"))

    @classmethod
    def from_json(cls, text):
        doc = json.loads(text)
        kind = doc["kind"]
        tol = float(doc.get("tolerance", 0.05))
        if kind == KIND_MOMENTS:
            m1 = np.asarray(doc["m1"], dtype=np.float64)
            n = m1.size
            m2 = np.asarray(doc["m2"], dtype=np.float64).reshape(n, n)
            return cls(kind=kind, tolerance=tol, m1=m1, m2=m2)
        if kind == KIND_PHI4:
            return cls(
                kind=kind,
                tolerance=tol,
                q1=doc["q1"],
                q2=doc["q2"],
                q3=doc["q3"],
                edges=tuple(tuple(e) for e in doc.get("edges", ())),
            )
        if kind == KIND_TEMPERATURE:
            return cls(
                kind=kind,
                tolerance=tol,
                temperature=doc["temperature"],
                masses=np.asarray(doc["masses"], dtype=np.float64),
                n_dim=int(doc.get("n_dim", 3)),
                n_fix_dofs=int(doc.get("n_fix_dofs", 0)),
                k_b=float(doc.get("k_b", BOLTZMANN)),
            )
        raise ValueError(f"unknown QoI kind {kind!r}")


def moment_error(target: QoIRecord, X):
    """max(e1, e2): inf-norm mean error and max-abs covariance-entry error."""
    if target.kind != KIND_MOMENTS:
        raise ValueError(f"moment_error needs a moments12 record, got {target.kind!r}")
    return target.error(X)
