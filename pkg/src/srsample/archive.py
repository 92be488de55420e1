"""Self-describing compressed archive: DCT prefixes + model + QoI targets (magic ``SRSA``)."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
import scipy.fft

from .data import _KIND_CODE, _KIND_NAME, KIND_SPIN, FormatError, SampleSet
from .dct import _prefix_lengths, natural_order
from .models import model_from_json, model_to_json
from .qoi import QoIRecord

_MAGIC = b"SRSA"
_VERSION = 1


@dataclass(frozen=True, eq=False)
class CompressedSample:
    """Leading DCT coefficients of one sample in natural frequency order."""

    coeffs: np.ndarray

    @property
    def j_kept(self):
        return self.coeffs.size


@dataclass(frozen=True, eq=False)
class Archive:
    """Compressed container: per-sample coefficient prefixes plus model and QoI targets."""

    e_presv: float
    kind: str
    shape: tuple
    model: object
    qoi: QoIRecord
    lengths: np.ndarray
    coeffs: np.ndarray  # all retained coefficients, concatenated sample-major
    version: int = _VERSION
    # mean retained-energy fraction, known at compress time only (not serialized)
    retained_fraction: float | None = None

    def __post_init__(self):
        if not 0.0 < self.e_presv <= 1.0:
            raise ValueError(f"e_presv must lie in (0, 1], got {self.e_presv}")
        lengths = np.asarray(self.lengths, dtype=np.int64)
        if lengths.size < 1 or np.any(lengths < 1):
            raise ValueError("every sample must retain at least one coefficient")
        coeffs = np.asarray(self.coeffs, dtype=np.float64)
        if coeffs.size != int(lengths.sum()):
            raise ValueError("coefficient payload does not match the stored lengths")
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("retained coefficients must be finite")
        object.__setattr__(self, "shape", tuple(int(d) for d in self.shape))
        object.__setattr__(self, "lengths", lengths)
        object.__setattr__(self, "coeffs", coeffs)

    @property
    def m(self):
        return self.lengths.size

    @property
    def n(self):
        return int(np.prod(self.shape))

    @property
    def compression_level(self):
        return 1.0 - self.e_presv

    @property
    def samples(self):
        """Per-sample views as ``CompressedSample`` records."""
        starts = np.concatenate([[0], np.cumsum(self.lengths)])
        return [
            CompressedSample(self.coeffs[starts[i] : starts[i + 1]]) for i in range(self.m)
        ]

    def save(self, path):
        model_json = model_to_json(self.model).encode()
        qoi_json = self.qoi.to_json().encode()
        with open(path, "wb") as fh:
            fh.write(_MAGIC)
            fh.write(struct.pack("<HBB", self.version, _KIND_CODE[self.kind], len(self.shape)))
            fh.write(struct.pack(f"<{len(self.shape)}Q", *self.shape))
            fh.write(struct.pack("<Qd", self.m, self.e_presv))
            fh.write(struct.pack("<I", len(model_json)))
            fh.write(model_json)
            fh.write(struct.pack("<I", len(qoi_json)))
            fh.write(qoi_json)
            starts = np.concatenate([[0], np.cumsum(self.lengths)])
            for i in range(self.m):
                block = self.coeffs[starts[i] : starts[i + 1]]
                fh.write(struct.pack("<I", block.size))
                fh.write(np.ascontiguousarray(block, dtype="<f8").tobytes())

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
        shape = struct.unpack_from(f"<{ndim}Q", raw, off)
        off += 8 * ndim
        m, e_presv = struct.unpack_from("<Qd", raw, off)
        off += 16
        (mj_len,) = struct.unpack_from("<I", raw, off)
        off += 4
        model = model_from_json(raw[off : off + mj_len].decode())
        off += mj_len
        (qj_len,) = struct.unpack_from("<I", raw, off)
        off += 4
        qoi = QoIRecord.from_json(raw[off : off + qj_len].decode())
        off += qj_len
        lengths = np.empty(m, dtype=np.int64)
        chunks = []
        for i in range(m):
            if off + 4 > len(raw):
                raise FormatError(f"{path}: truncated sample block {i}")
            (j_kept,) = struct.unpack_from("<I", raw, off)
            off += 4
            end = off + 8 * j_kept
            if j_kept < 1 or end > len(raw):
                raise FormatError(f"{path}: corrupt sample block {i}")
            lengths[i] = j_kept
            chunks.append(np.frombuffer(raw, dtype="<f8", count=j_kept, offset=off))
            off += 8 * j_kept
        if off != len(raw):
            raise FormatError(f"{path}: {len(raw) - off} trailing bytes")
        coeffs = np.concatenate(chunks) if chunks else np.empty(0)
        return cls(
            e_presv=float(e_presv),
            kind=_KIND_NAME[kind_code],
            shape=tuple(int(d) for d in shape),
            model=model,
            qoi=qoi,
            lengths=lengths,
            coeffs=coeffs.copy(),
        )


def _ordered_coefficients(samples: SampleSet):
    """DCT coefficients of every sample, flattened in natural frequency order."""
    dims = samples.lattice_shape()
    stack = samples.data.reshape(samples.m, *dims)
    axes = tuple(range(1, len(dims) + 1))
    coeffs = scipy.fft.dctn(stack, type=2, norm="ortho", axes=axes).reshape(samples.m, -1)
    return coeffs[:, natural_order(dims)]


def compress_set(samples: SampleSet, e_presv, model, qoi: QoIRecord) -> Archive:
    """Transform each sample, keep its energy-budgeted coefficient prefix, bundle metadata."""
    if not 0.0 < e_presv <= 1.0:
        raise ValueError(f"e_presv must lie in (0, 1], got {e_presv}")
    coeffs = _ordered_coefficients(samples)
    lengths = _prefix_lengths(coeffs, e_presv)
    mask = np.arange(coeffs.shape[1]) < lengths[:, None]
    energy = coeffs**2
    fractions = np.where(mask, energy, 0.0).sum(axis=1) / energy.sum(axis=1)
    return Archive(
        e_presv=float(e_presv),
        kind=samples.kind,
        shape=samples.lattice_shape(),
        model=model,
        qoi=qoi,
        lengths=lengths,
        coeffs=coeffs[mask],
        retained_fraction=float(fractions.mean()),
    )


def decompress_set(archive: Archive) -> SampleSet:
    """Zero-pad prefixes, invert the transform, and re-binarize spin data by sign."""
    m, n = archive.m, archive.n
    ordered = np.zeros((m, n))
    mask = np.arange(n) < archive.lengths[:, None]
    ordered[mask] = archive.coeffs
    full = np.empty_like(ordered)
    full[:, natural_order(archive.shape)] = ordered
    stack = full.reshape(m, *archive.shape)
    axes = tuple(range(1, len(archive.shape) + 1))
    data = scipy.fft.idctn(stack, type=2, norm="ortho", axes=axes).reshape(m, n)
    if archive.kind == KIND_SPIN:
        data = np.where(data >= 0.0, 1.0, -1.0)  # ties map to +1
    shape = archive.shape if len(archive.shape) > 1 else None
    return SampleSet(data=data, kind=archive.kind, shape=shape)
