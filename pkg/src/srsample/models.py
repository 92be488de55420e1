"""Exponential-family model types and their energy / score / conditional evaluations.

All models describe unnormalized log densities log p(x) = E(x) - log Z:

* ``IsingModel``     E(s) = sum_i h_i s_i + sum_{i<j} J_ij s_i s_j       on s in {-1,+1}^N
* ``GaussianModel``  E(x) = x^T A x + b^T x with A = -Theta/2, b = Theta mu
* ``Phi4Model``      E(x) = -a sum x_i^4 - b sum x_i^2 - g sum_{(i,j) in edges} x_i x_j

Instances are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .validation import check_lattice_shape, check_spins, check_square, readonly

QOI_MOMENTS = "moments12"
QOI_PHI4 = "phi4_stats"
QOI_TEMPERATURE = "temperature"

_ALLOWED_QOI = {
    "ising": (QOI_MOMENTS,),
    "gaussian": (QOI_MOMENTS, QOI_TEMPERATURE),
    "phi4": (QOI_PHI4,),
}


@dataclass(frozen=True, eq=False)
class IsingModel:
    """Pairwise binary model with symmetric zero-diagonal couplings and local fields."""

    coupling: np.ndarray
    field: np.ndarray
    qoi_kind: str = QOI_MOMENTS

    def __post_init__(self):
        J = check_square(self.coupling, "coupling")
        n = J.shape[0]
        h = np.asarray(self.field, dtype=np.float64).ravel()
        if h.size != n:
            raise ValueError(f"field length {h.size} does not match coupling size {n}")
        if not np.allclose(J, J.T, atol=0.0, rtol=0.0):
            raise ValueError("coupling matrix must be exactly symmetric")
        if np.any(np.diag(J) != 0.0):
            raise ValueError("coupling matrix must have zero diagonal")
        if self.qoi_kind not in _ALLOWED_QOI["ising"]:
            raise ValueError(f"qoi_kind {self.qoi_kind!r} not valid for an Ising model")
        object.__setattr__(self, "coupling", readonly(J))
        object.__setattr__(self, "field", readonly(h))

    @property
    def n(self):
        return self.field.size

    @property
    def variant(self):
        return "ising"


@dataclass(frozen=True, eq=False)
class GaussianModel:
    """Multivariate normal in natural form; precision may be a full matrix or a diagonal.

    ``precision`` of shape (N, N) stores Theta; shape (N,) stores diag(Theta).
    """

    mean: np.ndarray
    precision: np.ndarray
    qoi_kind: str = QOI_MOMENTS

    def __post_init__(self):
        mu = np.asarray(self.mean, dtype=np.float64).ravel()
        P = np.asarray(self.precision, dtype=np.float64)
        if P.ndim == 1:
            if P.size != mu.size:
                raise ValueError("diagonal precision length must match mean length")
            if np.any(P <= 0.0):
                raise ValueError("diagonal precision entries must be positive")
        elif P.ndim == 2:
            P = check_square(P, "precision", n=mu.size)
            if not np.allclose(P, P.T, atol=1e-12 * max(1.0, np.abs(P).max()), rtol=0.0):
                raise ValueError("precision matrix must be symmetric")
            P = 0.5 * (P + P.T)
            if np.min(np.linalg.eigvalsh(P)) <= 0.0:
                raise ValueError("precision matrix must be positive definite")
        else:
            raise ValueError("precision must be a vector (diagonal) or a square matrix")
        if self.qoi_kind not in _ALLOWED_QOI["gaussian"]:
            raise ValueError(f"qoi_kind {self.qoi_kind!r} not valid for a Gaussian model")
        object.__setattr__(self, "mean", readonly(mu))
        object.__setattr__(self, "precision", readonly(P))

    @property
    def n(self):
        return self.mean.size

    @property
    def variant(self):
        return "gaussian"

    @property
    def is_diagonal(self):
        return self.precision.ndim == 1

    def precision_matrix(self):
        """Dense Theta regardless of storage layout."""
        if self.is_diagonal:
            return np.diag(self.precision)
        return np.array(self.precision)

    def covariance(self):
        if self.is_diagonal:
            return np.diag(1.0 / self.precision)
        return np.linalg.inv(self.precision)


@dataclass(frozen=True, eq=False)
class Phi4Model:
    """Quartic lattice field model with scalar couplings and an explicit edge set."""

    alpha: float
    beta: float
    gamma: float
    edges: tuple
    n: int
    qoi_kind: str = QOI_PHI4
    shape: tuple | None = field(default=None)

    def __post_init__(self):
        edges = tuple((int(i), int(j)) for i, j in self.edges)
        seen = set()
        for i, j in edges:
            if i == j:
                raise ValueError(f"self edge ({i},{i}) not allowed")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i},{j}) references a site outside [0,{self.n})")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "gamma", float(self.gamma))
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "n", int(self.n))
        if self.shape is not None:
            object.__setattr__(self, "shape", check_lattice_shape(self.shape, self.n))
        if self.qoi_kind not in _ALLOWED_QOI["phi4"]:
            raise ValueError(f"qoi_kind {self.qoi_kind!r} not valid for a phi4 model")

    @property
    def variant(self):
        return "phi4"

    def theta(self):
        return np.array([self.alpha, self.beta, self.gamma])


def lattice_edges(shape, periodic=True):
    """Nearest-neighbor edges of a 1-D or 2-D lattice, as site-index pairs.

    Sites are numbered row-major.  With ``periodic`` the lattice wraps around
    (each boundary site also couples to the opposite side); dimensions of
    length < 3 never wrap (the wrap edge would duplicate the open one).
    """
    dims = tuple(int(d) for d in shape)
    if len(dims) == 1:
        (n,) = dims
        edges = [(i, i + 1) for i in range(n - 1)]
        if periodic and n > 2:
            edges.append((0, n - 1))
        return tuple(edges)
    if len(dims) == 2:
        rows, cols = dims
        idx = lambda r, c: r * cols + c
        edges = []
        for r in range(rows):
            for c in range(cols):
                if c + 1 < cols:
                    edges.append((idx(r, c), idx(r, c + 1)))
                elif periodic and cols > 2:
                    edges.append((idx(r, 0), idx(r, cols - 1)))
                if r + 1 < rows:
                    edges.append((idx(r, c), idx(r + 1, c)))
                elif periodic and rows > 2:
                    edges.append((idx(0, c), idx(rows - 1, c)))
        return tuple(sorted((min(e), max(e)) for e in edges))
    raise ValueError(f"only 1-D and 2-D lattices are supported, got shape {dims}")


# dense adjacency wins over sparse matmul up to a few thousand sites
_DENSE_ADJACENCY_MAX = 1024


@lru_cache(maxsize=32)
def _adjacency(n, edges):
    from scipy import sparse

    if not edges:
        return sparse.csr_matrix((n, n))
    e = np.asarray(edges, dtype=np.intp)
    rows = np.concatenate([e[:, 0], e[:, 1]])
    cols = np.concatenate([e[:, 1], e[:, 0]])
    data = np.ones(rows.size)
    A = sparse.csr_matrix((data, (rows, cols)), shape=(n, n))
    return A.toarray() if n <= _DENSE_ADJACENCY_MAX else A


def neighbor_sum(model: Phi4Model, X):
    """Sum of neighboring values for each site: A x with A the (symmetric) edge adjacency."""
    A = _adjacency(model.n, model.edges)
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        return A @ X
    return X @ A


def ising_energy(model: IsingModel, sigma):
    """E(s) = sum_i h_i s_i + sum_{i<j} J_ij s_i s_j for one spin vector."""
    s = np.asarray(sigma, dtype=np.float64).ravel()
    if s.size != model.n:
        raise ValueError(f"spin vector length {s.size} does not match model size {model.n}")
    check_spins(s, "sigma")
    return float(model.field @ s + 0.5 * s @ model.coupling @ s)


def log_density(model, x):
    """Unnormalized log density E(x); accepts a vector or a (M, N) batch."""
    if isinstance(model, IsingModel):
        X = np.asarray(x, dtype=np.float64)
        if X.ndim == 1:
            return ising_energy(model, X)
        check_spins(X, "sigma")
        if X.shape[1] != model.n:
            raise ValueError("spin matrix width does not match model size")
        return X @ model.field + 0.5 * np.einsum("mi,ij,mj->m", X, model.coupling, X)
    X = np.asarray(x, dtype=np.float64)
    single = X.ndim == 1
    X2d = X.reshape(1, -1) if single else X
    if X2d.shape[1] != model.n:
        raise ValueError(f"input width {X2d.shape[1]} does not match model size {model.n}")
    if isinstance(model, GaussianModel):
        d = X2d - model.mean
        if model.is_diagonal:
            quad = -0.5 * np.sum(d * d * model.precision, axis=1)
        else:
            quad = -0.5 * np.einsum("mi,ij,mj->m", d, model.precision, d)
        # natural form x^T A x + b^T x = centered quadratic + mu^T Theta mu / 2
        if model.is_diagonal:
            const = 0.5 * np.sum(model.mean**2 * model.precision)
        else:
            const = 0.5 * model.mean @ model.precision @ model.mean
        out = quad + const
        return float(out[0]) if single else out
    if isinstance(model, Phi4Model):
        nb = neighbor_sum(model, X2d)
        out = (
            -model.alpha * np.sum(X2d**4, axis=1)
            - model.beta * np.sum(X2d**2, axis=1)
            - 0.5 * model.gamma * np.sum(X2d * nb, axis=1)
        )
        return float(out[0]) if single else out
    raise TypeError(f"unsupported model type {type(model).__name__}")


def score(model, x):
    """Gradient of the log density with respect to x (continuous models only)."""
    if isinstance(model, IsingModel):
        raise TypeError("score is undefined for discrete (Ising) models")
    X = np.asarray(x, dtype=np.float64)
    single = X.ndim == 1
    X2d = X.reshape(1, -1) if single else X
    if X2d.shape[1] != model.n:
        raise ValueError(f"input width {X2d.shape[1]} does not match model size {model.n}")
    if isinstance(model, GaussianModel):
        d = X2d - model.mean
        g = -(d * model.precision) if model.is_diagonal else -(d @ model.precision)
    elif isinstance(model, Phi4Model):
        g = (
            -4.0 * model.alpha * X2d**3
            - 2.0 * model.beta * X2d
            - model.gamma * neighbor_sum(model, X2d)
        )
    else:
        raise TypeError(f"unsupported model type {type(model).__name__}")
    return g[0] if single else g


def glauber_conditional(model: IsingModel, sigma, i):
    """P(s_i = +1 | all other spins) under the heat-bath (Glauber) rule."""
    s = np.asarray(sigma, dtype=np.float64).ravel()
    if s.size != model.n:
        raise ValueError("spin vector length does not match model size")
    if not (0 <= i < model.n):
        raise IndexError(f"site index {i} out of range [0,{model.n})")
    check_spins(s, "sigma")
    local = model.field[i] + model.coupling[i] @ s  # diagonal is zero, so s_i drops out
    # logistic of twice the local field; stable for large |local|
    z = 2.0 * local
    if z >= 0:
        return float(1.0 / (1.0 + np.exp(-z)))
    e = np.exp(z)
    return float(e / (1.0 + e))


def model_to_json(model):
    """Canonical one-line JSON for any model variant."""
    if isinstance(model, IsingModel):
        doc = {
            "variant": "ising",
            "n": model.n,
            "j": model.coupling.ravel().tolist(),
            "h": model.field.tolist(),
            "qoi_kind": model.qoi_kind,
        }
    elif isinstance(model, GaussianModel):
        doc = {
            "variant": "gaussian",
            "n": model.n,
            "mu": model.mean.tolist(),
            "theta": model.precision.ravel().tolist(),
            "theta_layout": "diag" if model.is_diagonal else "full",
            "qoi_kind": model.qoi_kind,
        }
    elif isinstance(model, Phi4Model):
        doc = {
            "variant": "phi4",
            "n": model.n,
            "alpha": model.alpha,
            "beta": model.beta,
            "gamma": model.gamma,
            "edges": [list(e) for e in model.edges],
            "shape": list(model.shape) if model.shape is not None else None,
            "qoi_kind": model.qoi_kind,
        }
    else:
        raise TypeError(f"unsupported model type {type(model).__name__}")
    return json.dumps(doc, separators=(",", ":"))


def model_from_json(text):
    doc = json.loads(text)
    variant = doc.get("variant")
    n = int(doc["n"])
    if variant == "ising":
        J = np.asarray(doc["j"], dtype=np.float64).reshape(n, n)
        return IsingModel(J, np.asarray(doc["h"]), qoi_kind=doc.get("qoi_kind", QOI_MOMENTS))
    if variant == "gaussian":
        theta = np.asarray(doc["theta"], dtype=np.float64)
        if doc.get("theta_layout", "full") == "full":
            theta = theta.reshape(n, n)
        return GaussianModel(np.asarray(doc["mu"]), theta, qoi_kind=doc.get("qoi_kind", QOI_MOMENTS))
    if variant == "phi4":
        return Phi4Model(
            doc["alpha"],
            doc["beta"],
            doc["gamma"],
            tuple(tuple(e) for e in doc["edges"]),
            n,
            qoi_kind=doc.get("qoi_kind", QOI_PHI4),
            shape=tuple(doc["shape"]) if doc.get("shape") else None,
        )
    raise ValueError(f"unknown model variant {variant!r}")
