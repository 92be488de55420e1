"""Sample-set container and its binary file format (magic ``SRSX``)."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from .validation import as_matrix, check_lattice_shape, check_spins

KIND_CONTINUOUS = "continuous"
KIND_SPIN = "spin"

_MAGIC = b"SRSX"
_VERSION = 1
_KIND_CODE = {KIND_CONTINUOUS: 0, KIND_SPIN: 1}
_KIND_NAME = {v: k for k, v in _KIND_CODE.items()}


class FormatError(ValueError):
    """Raised when a binary file fails magic/version/length checks."""


@dataclass(frozen=True, eq=False)
class SampleSet:
    """M samples of dimension N, continuous reals or +-1 spins, with an optional lattice shape."""

    data: np.ndarray
    kind: str = KIND_CONTINUOUS
    shape: tuple | None = None

    def __post_init__(self):
        A = as_matrix(self.data, "data")
        if self.kind not in _KIND_CODE:
            raise ValueError(f"kind must be one of {sorted(_KIND_CODE)}, got {self.kind!r}")
        if self.kind == KIND_SPIN:
            check_spins(A)
        object.__setattr__(self, "data", A)
        object.__setattr__(self, "shape", check_lattice_shape(self.shape, A.shape[1]))

    @property
    def m(self):
        return self.data.shape[0]

    @property
    def n(self):
        return self.data.shape[1]

    def lattice_shape(self):
        """The declared lattice shape, defaulting to the flat (N,) layout."""
        return self.shape if self.shape is not None else (self.n,)

    def save(self, path):
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            dims = self.lattice_shape()
            fh.write(struct.pack("<HBB", _VERSION, _KIND_CODE[self.kind], len(dims)))
            fh.write(struct.pack(f"<{len(dims)}Q", *dims))
            fh.write(struct.pack("<Q", self.m))
            fh.write(np.ascontiguousarray(self.data, dtype="<f8").tobytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            raw = fh.read()
        if raw[:4] != _MAGIC:
            raise FormatError(f"{path}: bad magic {raw[:4]!r}, expected {_MAGIC!r}")
        version, kind_code, ndim = struct.unpack_from("<HBB", raw, 4)
        if version != _VERSION:
            raise FormatError(f"{path}: unsupported version {version}")
        if kind_code not in _KIND_NAME:
            raise FormatError(f"{path}: unknown sample kind code {kind_code}")
        off = 8
        dims = struct.unpack_from(f"<{ndim}Q", raw, off)
        off += 8 * ndim
        (m,) = struct.unpack_from("<Q", raw, off)
        off += 8
        n = int(np.prod(dims))
        need = off + 8 * m * n
        if len(raw) != need:
            raise FormatError(f"{path}: payload length {len(raw)} != expected {need}")
        data = np.frombuffer(raw, dtype="<f8", count=m * n, offset=off).reshape(m, n)
        shape = tuple(int(d) for d in dims) if ndim > 1 else None
        return cls(data=data.copy(), kind=_KIND_NAME[kind_code], shape=shape)
