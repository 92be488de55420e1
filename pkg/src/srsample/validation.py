"""Input validation helpers shared by estimators, samplers, and the codec."""

from __future__ import annotations

import math

import numpy as np


def as_matrix(X, name="X", dtype=np.float64):
    """Coerce to a 2-D float array with at least one row and column."""
    A = np.asarray(X, dtype=dtype)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional (samples x components), got ndim={A.ndim}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and one column, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains non-finite entries")
    return A


def as_vector(x, name="x", dtype=np.float64):
    v = np.asarray(x, dtype=dtype).ravel()
    if v.size < 1:
        raise ValueError(f"{name} must be non-empty")
    return v


def check_spins(X, name="samples"):
    """Require every entry to be exactly -1 or +1."""
    A = np.asarray(X)
    if not np.all(np.abs(A) == 1.0):
        raise ValueError(f"{name} must contain only -1/+1 entries")
    return A


def check_lattice_shape(shape, n):
    """Validate an optional lattice shape against the flat dimension n."""
    if shape is None:
        return None
    dims = tuple(int(d) for d in shape)
    if any(d < 1 for d in dims):
        raise ValueError(f"lattice shape must have positive dimensions, got {dims}")
    if math.prod(dims) != n:
        raise ValueError(f"product of lattice shape {dims} is {math.prod(dims)}, expected {n}")
    return dims


def check_square(A, name="matrix", n=None):
    M = np.asarray(A, dtype=np.float64)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"{name} must be square, got shape {M.shape}")
    if n is not None and M.shape[0] != n:
        raise ValueError(f"{name} must be {n}x{n}, got shape {M.shape}")
    return M


def check_symmetric(A, name="matrix", tol=0.0):
    M = check_square(A, name)
    if not np.allclose(M, M.T, atol=tol, rtol=0.0):
        raise ValueError(f"{name} must be symmetric")
    return M


def as_rng(seed):
    """Coerce an integer seed, SeedSequence, Generator, or None to a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def readonly(a):
    """Return a C-contiguous read-only float64 copy (for immutable model fields)."""
    out = np.array(a, dtype=np.float64, order="C", copy=True)
    out.setflags(write=False)
    return out
