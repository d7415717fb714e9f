"""Temporally and spatially correlated massive MISO channels, plus trace files.

Channel vectors are rows: ``h`` has shape ``(M,)`` or ``(K, M)``.  Random
numbers come from :class:`numpy.random.Generator`; complex Gaussians are built
from two independent real normals of variance 1/2.
"""

from __future__ import annotations

import math
import os
import struct
from dataclasses import dataclass, field

import numpy as np
from scipy.special import j0

from .errors import ContractError, TraceFormatError

SPEED_OF_LIGHT = 2.99792458e8


def complex_normal(rng: np.random.Generator, shape) -> np.ndarray:
    """i.i.d. CN(0, 1) samples."""
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) * math.sqrt(0.5)


def temporal_coefficient(speed: float, carrier_hz: float, interval_s: float) -> float:
    """Jakes temporal correlation ``J0(2*pi*f_d*T)`` with ``f_d = v*fc/c``.

    ``speed`` is in m/s.
    """
    if speed < 0 or carrier_hz <= 0 or interval_s <= 0:
        raise ContractError("speed must be >= 0, carrier and interval > 0")
    doppler = speed * carrier_hz / SPEED_OF_LIGHT
    return float(min(1.0, max(0.0, j0(2.0 * math.pi * doppler * interval_s))))


def kmh_to_ms(speed_kmh: float) -> float:
    return speed_kmh / 3.6


@dataclass
class GaussMarkovProcess:
    """First-order Gauss-Markov channel ``h[t] = eps*h[t-1] + sqrt(1-eps^2)*g[t]``.

    ``current`` starts as an i.i.d. CN(0, 1) draw, so ``E||h[t]||^2 = M`` for every t.
    """

    epsilon: float
    num_antennas: int
    rng: np.random.Generator
    users: int | None = None
    current: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ContractError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        self._shape = (self.num_antennas,) if self.users is None else (self.users, self.num_antennas)
        self._innovation = math.sqrt(1.0 - self.epsilon**2)
        self.current = complex_normal(self.rng, self._shape)

    def step(self) -> np.ndarray:
        g = complex_normal(self.rng, self._shape)
        self.current = self.epsilon * self.current + self._innovation * g
        return self.current


def gauss_markov_step(process: GaussMarkovProcess) -> np.ndarray:
    return process.step()


@dataclass(frozen=True, eq=False)
class SpatialModel:
    num_antennas: int
    zt: float
    topology: str
    R: np.ndarray = field(repr=False)
    R_half: np.ndarray = field(repr=False)
    min_eigenvalue: float = 0.0  # before clamping


def antenna_positions(M: int, topology: str) -> np.ndarray:
    """Grid coordinates in element spacings; URA antennas are indexed row-major."""
    topology = topology.lower()
    idx = np.arange(M)
    if topology == "ula":
        return np.stack([idx, np.zeros(M, dtype=int)], axis=1).astype(float)
    if topology == "ura":
        side = math.isqrt(M)
        if side * side != M:
            raise ContractError(f"URA needs a square number of antennas, got M={M}")
        return np.stack(np.divmod(idx, side), axis=1).astype(float)
    raise ContractError(f"unknown topology {topology!r}; expected 'ula' or 'ura'")


def exp_correlation_matrix(M: int, zt: float, topology: str = "ula") -> SpatialModel:
    """Exponential model ``r_ij = zt ** d_ij`` with its PSD square root."""
    if not 0.0 <= zt <= 1.0:
        raise ContractError(f"zt must lie in [0, 1], got {zt}")
    pos = antenna_positions(M, topology)
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.hypot(diff[..., 0], diff[..., 1])
    with np.errstate(divide="ignore"):
        R = np.power(zt, dist)  # 0**0 == 1 keeps the unit diagonal when zt == 0
    w, U = np.linalg.eigh(R)
    w_min = float(w.min())
    w = np.where(w < 1e-10 * w.max(), 0.0, w)
    R_half = (U * np.sqrt(w)) @ U.conj().T
    R.setflags(write=False)
    R_half.setflags(write=False)
    return SpatialModel(M, zt, topology.lower(), R, R_half, w_min)


def spatial_channel(model: SpatialModel, rng: np.random.Generator, users: int | None = None) -> np.ndarray:
    """Draw ``h = g @ R_half`` with ``g`` i.i.d. CN(0, 1)."""
    shape = (model.num_antennas,) if users is None else (users, model.num_antennas)
    return complex_normal(rng, shape) @ model.R_half


# Trace files
# -----------
# header : b"TCQTRACE" | uint32 version | uint32 M | uint64 record count   (little endian)
# record : uint32 M | M x complex128 (float64 re, float64 im, little endian)

TRACE_MAGIC = b"TCQTRACE"
TRACE_VERSION = 1
_HEADER = struct.Struct("<8sIIQ")
_RECORD_HEAD = struct.Struct("<I")


def save_channel_trace(path, channels) -> None:
    chans = [np.asarray(h, dtype=np.complex128) for h in channels]
    M = chans[0].shape[-1] if chans else 0
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(TRACE_MAGIC, TRACE_VERSION, M, len(chans)))
        for h in chans:
            if h.ndim != 1:
                raise ContractError("trace records must be 1-D channel vectors")
            fh.write(_RECORD_HEAD.pack(h.size))
            fh.write(h.astype("<c16").tobytes())


def load_channel_trace(path) -> list[np.ndarray]:
    """Read a trace file; an empty file yields an empty list."""
    if os.path.getsize(path) == 0:
        return []
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < _HEADER.size:
        raise TraceFormatError("truncated header")
    magic, version, M, count = _HEADER.unpack_from(data)
    if magic != TRACE_MAGIC:
        raise TraceFormatError(f"bad magic {magic!r}")
    if version != TRACE_VERSION:
        raise TraceFormatError(f"unsupported version {version}")
    out = []
    offset = _HEADER.size
    for i in range(count):
        if offset + _RECORD_HEAD.size > len(data):
            raise TraceFormatError("truncated record header", record=i)
        (m,) = _RECORD_HEAD.unpack_from(data, offset)
        offset += _RECORD_HEAD.size
        if m != M:
            raise TraceFormatError(f"has M={m}, header says M={M}", record=i)
        end = offset + 16 * m
        if end > len(data):
            raise TraceFormatError("truncated payload", record=i)
        out.append(np.frombuffer(data[offset:end], dtype="<c16").astype(np.complex128))
        offset = end
    if offset != len(data):
        raise TraceFormatError(f"{len(data) - offset} trailing bytes after record {count - 1}")
    return out


def save_trace_csv(path, channels) -> None:
    """Text form: one record per line, ``re0,im0,re1,im1,...`` with round-trip precision."""
    with open(path, "w") as fh:
        for h in channels:
            h = np.asarray(h, dtype=np.complex128)
            fh.write(",".join(repr(float(x)) for x in h.view(np.float64)) + "\n")


def load_trace_csv(path) -> list[np.ndarray]:
    out = []
    M = None
    with open(path) as fh:
        for i, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            try:
                vals = np.array([float(x) for x in line.split(",")])
            except ValueError as exc:
                raise TraceFormatError(f"line {i + 1}: {exc}", record=len(out)) from None
            if vals.size % 2:
                raise TraceFormatError(f"line {i + 1}: odd number of values", record=len(out))
            h = vals.view(np.complex128)
            if M is None:
                M = h.size
            elif h.size != M:
                raise TraceFormatError(f"line {i + 1}: has M={h.size}, expected M={M}", record=len(out))
            out.append(h.copy())
    return out
