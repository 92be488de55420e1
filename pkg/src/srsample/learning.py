"""Estimators that fit exponential-family models to sample sets.

* ``InteractionScreening`` recovers pairwise binary models by minimizing, per
  node, the convex exponential screening loss with plain gradient descent.
* ``GaussianScoreMatching`` fits a multivariate normal in natural form by
  gradient descent on the quadratic score-matching objective
  J(Theta) = tr(Theta' Theta C)/2 - tr(Theta), whose minimizer is C^-1.
* ``Phi4ScoreMatching`` fits the three quartic-lattice couplings by solving the
  score-matching normal equations in closed form (the empirical objective is an
  exact quadratic in the parameters).
* ``KineticScoreMatching`` fits the one-parameter kinetic-energy family to
  velocity data, yielding a temperature estimate and a diagonal Gaussian.
"""

from __future__ import annotations

import time
import warnings

import numpy as np
from sklearn.base import BaseEstimator

from .models import GaussianModel, IsingModel, Phi4Model, QOI_MOMENTS, QOI_TEMPERATURE, neighbor_sum
from .qoi import BOLTZMANN
from .validation import as_matrix, check_spins


def screening_loss(X, i, coupling_row, field_i, weights=None):
    """Exponential screening loss of node ``i``: mean of exp(-s_i (h_i + sum_j J_ij s_j)).

    ``coupling_row`` holds the couplings of node i to every node (entry i is
    ignored).  Always positive; convex in (coupling_row, field_i).
    """
    A = check_spins(as_matrix(X))
    row = np.asarray(coupling_row, dtype=np.float64).ravel().copy()
    if row.size == A.shape[1] - 1:
        row = np.insert(row, i, 0.0)
    if row.size != A.shape[1]:
        raise ValueError("coupling row length must be N or N-1")
    row[i] = 0.0
    local = A @ row + field_i
    w = np.exp(-A[:, i] * local)
    if weights is None:
        return float(w.mean())
    weights = np.asarray(weights, dtype=np.float64)
    return float(np.sum(w * weights) / np.sum(weights))


class InteractionScreening(BaseEstimator):
    """Pairwise binary-model estimator via per-node convex screening losses.

    Each node's couplings and field minimize an exponential loss over the
    samples; the independent per-node problems are batched into joint matrix
    operations.  The recovered coupling matrix is symmetrized and optionally
    thresholded.

    Parameters
    ----------
    step_size : gradient-descent step (default 0.25).
    tol : stop a node once its loss improves by less than this (default 1e-6).
    max_iter : iteration cap; exceeding it flags non-convergence.
    l1 : optional L1 penalty on couplings (proximal step), 0 disables.
    coupling_threshold : zero out |J_ij| below this after symmetrization.
    """

    def __init__(self, step_size=0.25, tol=1e-6, max_iter=50_000, l1=0.0,
                 coupling_threshold=0.0):
        self.step_size = step_size
        self.tol = tol
        self.max_iter = max_iter
        self.l1 = l1
        self.coupling_threshold = coupling_threshold

    def fit(self, X, y=None, sample_weight=None):
        if self.step_size <= 0 or self.tol <= 0:
            raise ValueError("step_size and tol must be positive")
        A = check_spins(as_matrix(X))
        m, n = A.shape
        if m < 2:
            raise ValueError("need at least two samples")
        if sample_weight is None:
            w_norm = np.full(m, 1.0 / m)
        else:
            sw = np.asarray(sample_weight, dtype=np.float64)
            if sw.shape != (m,) or np.any(sw < 0) or sw.sum() <= 0:
                raise ValueError("sample_weight must be a nonnegative vector over samples")
            w_norm = sw / sw.sum()

        t0 = time.perf_counter()
        J = np.zeros((n, n))
        h = np.zeros(n)
        active = np.ones(n, dtype=bool)
        loss = np.full(n, np.inf)
        iters = np.zeros(n, dtype=np.int64)
        Aw = A * w_norm[:, None]
        step = self.step_size

        it = 0
        while it < self.max_iter and active.any():
            it += 1
            local = A @ J.T + h  # (m, n): column i is h_i + sum_j J_ij s_j
            W = np.exp(-A * local)
            new_loss = w_norm @ W
            WA = W * Aw
            G = -(WA.T @ A)  # d loss_i / d J_ij
            np.fill_diagonal(G, 0.0)
            gh = -WA.sum(axis=0)
            improved = np.abs(loss - new_loss)
            done = active & (improved < self.tol)
            iters[active] = it
            loss = new_loss
            active = active & ~done
            if not active.any():
                break
            J[active] -= step * G[active]
            if self.l1 > 0.0:
                thr = step * self.l1
                J[active] = np.sign(J[active]) * np.maximum(np.abs(J[active]) - thr, 0.0)
            h[active] -= step * gh[active]

        self.converged_ = not bool(active.any())
        if not self.converged_:
            warnings.warn(
                f"screening descent hit max_iter={self.max_iter} before all nodes converged",
                RuntimeWarning,
            )
        J_sym = 0.5 * (J + J.T)
        np.fill_diagonal(J_sym, 0.0)
        if self.coupling_threshold > 0.0:
            J_sym[np.abs(J_sym) < self.coupling_threshold] = 0.0
        self.coupling_ = J_sym
        self.field_ = h
        self.n_iter_ = iters
        self.loss_ = loss
        self.fit_time_ = time.perf_counter() - t0
        return self

    def to_model(self):
        return IsingModel(self.coupling_, self.field_)

    def report(self):
        """Machine-readable fit report (iterations, final per-node loss, wall time)."""
        return {
            "iterations": self.n_iter_.tolist(),
            "final_loss": self.loss_.tolist(),
            "converged": self.converged_,
            "wall_time_s": self.fit_time_,
        }


class GaussianScoreMatching(BaseEstimator):
    """Gaussian fit in natural form: empirical mean plus gradient-descent precision.

    The precision iterates follow Theta <- Theta - step * G with the symmetrized
    gradient G = (C Theta + Theta C)/2 - I of the quadratic score-matching
    objective; the unique stationary point is Theta = C^-1.

    ``method='direct'`` runs the matrix iteration as written; ``method='eig'``
    runs the identical iteration in the eigenbasis of C (one O(N^3)
    diagonalization, then O(N^2) per step), which matters for large N.
    ``method='auto'`` picks by size.  ``tol`` stops early once the gradient RMS
    ||G||_F / N falls below it; 0 disables early stopping.
    """

    def __init__(self, step_size=0.05, n_steps=1000, tol=1e-12, method="auto",
                 cond_limit=1e8):
        self.step_size = step_size
        self.n_steps = n_steps
        self.tol = tol
        self.method = method
        self.cond_limit = cond_limit

    def fit(self, X, y=None):
        if self.step_size <= 0 or self.n_steps < 1:
            raise ValueError("step_size must be positive and n_steps >= 1")
        A = as_matrix(X)
        m, n = A.shape
        if m < 2:
            raise ValueError("need at least two samples")
        t0 = time.perf_counter()
        mu = A.mean(axis=0)
        D = A - mu
        C = (D.T @ D) / (m - 1)
        C = 0.5 * (C + C.T)
        lam = np.linalg.eigvalsh(C)
        if lam[0] <= 0.0 or lam[-1] / lam[0] > self.cond_limit:
            cond = np.inf if lam[0] <= 0.0 else lam[-1] / lam[0]
            raise ValueError(
                "empirical covariance is singular or ill-conditioned "
                f"(condition estimate {cond:.3g}); "
                "regularize the data or add samples before fitting"
            )
        method = self.method
        if method == "auto":
            method = "eig" if n >= 128 else "direct"
        if method == "direct":
            theta, n_iter, grad_rms = self._iterate_direct(C, n)
        elif method == "eig":
            theta, n_iter, grad_rms = self._iterate_eig(C, n)
        else:
            raise ValueError(f"unknown method {self.method!r}")
        self.mean_ = mu
        self.covariance_ = C
        self.precision_ = theta
        self.n_iter_ = n_iter
        self.grad_rms_ = grad_rms
        self.residual_ = float(np.max(np.abs(C @ theta - np.eye(n))))
        self.converged_ = self.residual_ <= 1e-5
        self.fit_time_ = time.perf_counter() - t0
        return self

    def _iterate_direct(self, C, n):
        eye = np.eye(n)
        theta = eye.copy()
        step = self.step_size
        grad_rms = np.inf
        it = 0
        for it in range(1, self.n_steps + 1):
            G = 0.5 * (C @ theta + theta @ C) - eye
            grad_rms = float(np.linalg.norm(G) / n)
            if self.tol > 0.0 and grad_rms <= self.tol:
                break
            theta -= step * G
        return theta, it, grad_rms

    def _iterate_eig(self, C, n):
        lam, Q = np.linalg.eigh(C)
        S = 0.5 * (lam[:, None] + lam[None, :])
        eye = np.eye(n)
        T = eye.copy()
        step = self.step_size
        grad_rms = np.inf
        it = 0
        for it in range(1, self.n_steps + 1):
            G = S * T - eye
            grad_rms = float(np.linalg.norm(G) / n)
            if self.tol > 0.0 and grad_rms <= self.tol:
                break
            T -= step * G
        theta = Q @ T @ Q.T
        return 0.5 * (theta + theta.T), it, grad_rms

    def to_model(self, qoi_kind=QOI_MOMENTS):
        return GaussianModel(self.mean_, self.precision_, qoi_kind=qoi_kind)

    def report(self):
        return {
            "iterations": int(self.n_iter_),
            "grad_rms": self.grad_rms_,
            "residual_max": self.residual_,
            "converged": self.converged_,
            "wall_time_s": self.fit_time_,
        }


def phi4_objective(X, edges, theta, model_n=None):
    """Empirical score-matching objective and its gradient for the quartic lattice family.

    Returns (value, gradient) of
        mean_m sum_i [ d_i psi_i(x) + psi_i(x)^2 / 2 ]
    where psi is the model score; both are exact in the quadratic form
    value = theta' A theta / 2 - b' theta + const handled by ``_phi4_normal_eq``.
    """
    A_mat, b, const = _phi4_normal_eq(X, edges, model_n)
    th = np.asarray(theta, dtype=np.float64)
    value = 0.5 * th @ A_mat @ th - b @ th + const
    grad = A_mat @ th - b
    return float(value), grad


def _phi4_normal_eq(X, edges, model_n=None):
    """Quadratic expansion (A, b, const) of the empirical quartic score objective."""
    A = as_matrix(X)
    n = model_n if model_n is not None else A.shape[1]
    probe = Phi4Model(0.0, 0.0, 0.0, tuple(edges), n)
    s = neighbor_sum(probe, A)
    x2 = A * A
    x3 = x2 * A
    f1, f2, f3 = 4.0 * x3, 2.0 * A, s
    m = A.shape[0]

    def tot(u, v):
        return float(np.sum(u * v) / m)

    A_mat = np.array(
        [
            [tot(f1, f1), tot(f1, f2), tot(f1, f3)],
            [tot(f2, f1), tot(f2, f2), tot(f2, f3)],
            [tot(f3, f1), tot(f3, f2), tot(f3, f3)],
        ]
    )
    # d_i psi_i = -(12 x_i^2) a - 2 b, so the linear term is +b' theta with
    # b = mean over samples of (sum_i 12 x_i^2, 2 N, 0)
    b = np.array([float(np.sum(12.0 * x2) / m), 2.0 * A.shape[1], 0.0])
    return A_mat, b, 0.0


class Phi4ScoreMatching(BaseEstimator):
    """Quartic-lattice coupling estimator via closed-form score matching.

    The empirical objective is quadratic in (alpha, beta, gamma), so the fit
    solves its 3x3 normal equations directly.
    """

    def __init__(self, edges, n=None):
        self.edges = edges
        self.n = n

    def fit(self, X, y=None):
        A = as_matrix(X)
        n = self.n if self.n is not None else A.shape[1]
        if n != A.shape[1]:
            raise ValueError("sample width does not match the declared lattice size")
        t0 = time.perf_counter()
        A_mat, b, _ = _phi4_normal_eq(A, self.edges, n)
        cond = np.linalg.cond(A_mat)
        if not np.isfinite(cond) or cond > 1e12:
            raise ValueError("degenerate normal matrix; data has too little variation")
        theta = np.linalg.solve(A_mat, b)
        self.alpha_, self.beta_, self.gamma_ = (float(t) for t in theta)
        self.fit_time_ = time.perf_counter() - t0
        return self

    def to_model(self, shape=None):
        return Phi4Model(
            self.alpha_, self.beta_, self.gamma_,
            tuple(tuple(e) for e in self.edges),
            self.n if self.n is not None else max(max(e) for e in self.edges) + 1,
            shape=shape,
        )

    def report(self):
        return {
            "theta": [self.alpha_, self.beta_, self.gamma_],
            "wall_time_s": self.fit_time_,
        }


class KineticScoreMatching(BaseEstimator):
    """One-parameter kinetic-energy family fit for velocity data.

    The sufficient statistic is the total kinetic energy, so the score-matching
    solution is closed-form and maps to a diagonal Gaussian whose per-component
    precision is mass_i / (k_B T).
    """

    def __init__(self, masses, n_dim=3, n_fix_dofs=0, k_b=BOLTZMANN):
        self.masses = masses
        self.n_dim = n_dim
        self.n_fix_dofs = n_fix_dofs
        self.k_b = k_b

    def fit(self, X, y=None):
        V = as_matrix(X)
        n_comp = V.shape[1]
        if n_comp % self.n_dim != 0:
            raise ValueError("row width is not a multiple of n_dim")
        n_atoms = n_comp // self.n_dim
        m = np.asarray(self.masses, dtype=np.float64)
        if m.ndim == 0:
            m = np.full(n_atoms, float(m))
        if m.size != n_atoms or np.any(m <= 0):
            raise ValueError("need one positive mass per atom")
        mc = np.repeat(m, self.n_dim)
        second = (V * V).mean(axis=0)
        theta = -float(mc.sum() / np.sum(mc * mc * second))
        self.natural_param_ = theta
        self.temperature_ = -1.0 / (self.k_b * theta)
        self.precision_diag_ = -theta * mc
        return self

    def to_model(self):
        return GaussianModel(
            np.zeros_like(self.precision_diag_), self.precision_diag_,
            qoi_kind=QOI_TEMPERATURE,
        )
