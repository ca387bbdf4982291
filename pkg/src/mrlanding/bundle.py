"""Binary persistence of trained Q-tables (the "QBundle").

Byte layout, all integers and floats little-endian:

    header
      4s    magic b"QBND"
      u16   format version (1)
      32s   sha256 of the canonical training-config text
      u32   n_cs
      u32   n_theta
      u32   number of step records that follow
      u32   flags (bit 0: training converged)
    per step record
      i32   step index
      u8    is_latest
      6×f64 p_lim, v_lim, a_lim, p_goal, v_goal, a_goal
      f64[] q_a, row-major, shape (3, 3, 3, 2*n_theta+1, 3)
      f64[] q_b, same shape
      u64[] visit counts, same shape
    trailer
      32s   sha256 of every preceding byte
"""

from __future__ import annotations

import hashlib
import math
import struct
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .discretization import CurriculumGeometry, StepGeometry
from .double_q import QTablePair, table_shape

MAGIC = b"QBND"
VERSION = 1
FLAG_CONVERGED = 1
_HEADER = struct.Struct("<4sH32sIIII")
_STEP = struct.Struct("<iB6d")
_DIGEST = 32
MAX_N_THETA = 64
MAX_STEPS = 64


class BundleFormatError(ValueError):
    pass


class ConfigHashMismatch(UserWarning):
    pass


@dataclass
class QBundle:
    config_hash: bytes
    n_cs: int
    n_theta: int
    tables: list[QTablePair]
    geometry: list[StepGeometry]
    converged: bool = True

    def __post_init__(self):
        if len(self.config_hash) != 32:
            raise ValueError("config_hash must be 32 bytes")
        if len(self.tables) != len(self.geometry):
            raise ValueError("one geometry record per table required")
        shape = table_shape(self.n_theta)
        for t in self.tables:
            if t.q_a.shape != shape or t.q_b.shape != shape or t.visits.shape != shape:
                raise ValueError(f"table shape must be {shape}")

    @property
    def complete(self) -> bool:
        return len(self.tables) == self.n_cs + 1

    def curriculum_geometry(self, sigma: float, sigma_a: float) -> CurriculumGeometry:
        return CurriculumGeometry(tuple(self.geometry), sigma, sigma_a)

    def equals(self, other: "QBundle") -> bool:
        return (self.config_hash == other.config_hash and self.n_cs == other.n_cs
                and self.n_theta == other.n_theta and self.converged == other.converged
                and self.geometry == other.geometry
                and len(self.tables) == len(other.tables)
                and all(a.equals(b) for a, b in zip(self.tables, other.tables)))


def to_bytes(bundle: QBundle) -> bytes:
    flags = FLAG_CONVERGED if bundle.converged else 0
    parts = [_HEADER.pack(MAGIC, VERSION, bundle.config_hash, bundle.n_cs, bundle.n_theta,
                          len(bundle.tables), flags)]
    for geo, t in zip(bundle.geometry, bundle.tables):
        parts.append(_STEP.pack(geo.index, int(geo.is_latest), geo.p_lim, geo.v_lim, geo.a_lim,
                                geo.p_goal, geo.v_goal, geo.a_goal))
        parts.append(np.ascontiguousarray(t.q_a, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(t.q_b, dtype="<f8").tobytes())
        parts.append(np.ascontiguousarray(t.visits, dtype="<u8").tobytes())
    body = b"".join(parts)
    return body + hashlib.sha256(body).digest()


def from_bytes(data: bytes) -> QBundle:
    """Parse a bundle; any malformed input raises BundleFormatError."""
    if len(data) < _HEADER.size + _DIGEST:
        raise BundleFormatError(f"truncated bundle ({len(data)} bytes)")
    body, digest = data[:-_DIGEST], data[-_DIGEST:]
    magic, version, cfg_hash, n_cs, n_theta, n_steps, flags = _HEADER.unpack_from(body, 0)
    if magic != MAGIC:
        raise BundleFormatError("not a Q-table bundle (bad magic)")
    if version != VERSION:
        raise BundleFormatError(f"unsupported bundle version {version}")
    if hashlib.sha256(body).digest() != digest:
        raise BundleFormatError("checksum mismatch: bundle is corrupt or truncated")
    if not 1 <= n_theta <= MAX_N_THETA or n_cs >= MAX_STEPS or not 1 <= n_steps <= n_cs + 1:
        raise BundleFormatError(f"implausible header: n_cs={n_cs} n_theta={n_theta} "
                                f"steps={n_steps}")
    shape = table_shape(n_theta)
    count = math.prod(shape)
    expected = _HEADER.size + n_steps * (_STEP.size + 3 * 8 * count)
    if len(body) != expected:
        raise BundleFormatError(f"bundle body is {len(body)} bytes, expected {expected}")
    off = _HEADER.size
    tables, geometry = [], []
    for i in range(n_steps):
        idx, latest, *vals = _STEP.unpack_from(body, off)
        off += _STEP.size
        if idx != i or latest not in (0, 1) or not all(math.isfinite(v) for v in vals):
            raise BundleFormatError(f"bad geometry record for step {i}")
        geometry.append(StepGeometry(idx, *vals, is_latest=bool(latest)))
        arrays = []
        for dt in ("<f8", "<f8", "<u8"):
            arr = np.frombuffer(body, dtype=dt, count=count, offset=off).reshape(shape)
            arrays.append(arr.astype(dt[1:], copy=True))
            off += 8 * count
        tables.append(QTablePair(*arrays))
    return QBundle(cfg_hash, n_cs, n_theta, tables, geometry, bool(flags & FLAG_CONVERGED))


def save(bundle: QBundle, path) -> bytes:
    data = to_bytes(bundle)
    Path(path).write_bytes(data)
    return data


def load(path, expected_hash: bytes | None = None) -> QBundle:
    bundle = from_bytes(Path(path).read_bytes())
    if expected_hash is not None and expected_hash != bundle.config_hash:
        warnings.warn("bundle was trained with a different configuration than the one "
                      "supplied", ConfigHashMismatch, stacklevel=2)
    return bundle
