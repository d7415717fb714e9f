"""Trellis coded quantization of channel direction information (CDI).

The user runs :func:`viterbi_quantize` over per-stage constellations and feeds
back the input bits of the winning path; the base station re-runs the
transition table (:func:`reconstruct`).  :class:`DifferentialSession` keeps the
per-stage centers that both link ends update identically after every feedback
interval.

All functions accept a single vector of shape ``(M,)`` or a batch ``(B, M)`` of
independent vectors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend
from .constellation import (
    differential_scale,
    initial_scale,
    psk_points,
    spatial_scale,
    stage_constellations,
)
from .errors import ContractError
from .trellis import Trellis, bits_to_inputs, inputs_to_bits


def normalize_cdi(h) -> np.ndarray:
    """Return ``h / ||h||`` along the last axis."""
    h = np.asarray(h, dtype=np.complex128)
    with np.errstate(invalid="ignore", over="ignore"):
        norm = np.linalg.norm(h, axis=-1, keepdims=True)
    if np.any(norm == 0) or not np.all(np.isfinite(norm)):
        raise ContractError("cannot normalise a zero or non-finite channel vector")
    return h / norm


@dataclass(frozen=True)
class QuantizationResult:
    bits: np.ndarray
    symbols: np.ndarray
    metric: np.ndarray | float
    points: np.ndarray  # selected absolute constellation point per stage
    reconstructed: np.ndarray


def _as_batch(x):
    x = np.asarray(x)
    return (x[None], True) if x.ndim == 1 else (x, False)


def viterbi_quantize(hbar, trellis: Trellis, constellations) -> QuantizationResult:
    """Minimum-distance trellis path (start state 0) for the unit-norm CDI ``hbar``.

    Args:
        hbar: Normalised channel, ``(M,)`` or ``(B, M)``.
        trellis: Shared transition table.
        constellations: Absolute constellation points per stage, ``(M, L)`` or
            ``(B, M, L)``.
    """
    target, single = _as_batch(np.asarray(hbar, dtype=np.complex128))
    points = np.asarray(constellations, dtype=np.complex128)
    M = target.shape[-1]
    if points.shape[-2:] != (M, trellis.alphabet_size):
        raise ContractError(
            f"constellations shape {points.shape} does not match M={M}, L={trellis.alphabet_size}"
        )
    if points.ndim == 3 and points.shape[0] != target.shape[0]:
        raise ContractError("batch size of constellations and channels differ")
    inputs, symbols, metric = _backend.viterbi(
        target, points, trellis.next_state, trellis.out_symbol, trellis.incoming
    )
    chosen = np.take_along_axis(
        np.broadcast_to(points, target.shape + points.shape[-1:]), symbols[..., None], axis=-1
    )[..., 0]
    result = QuantizationResult(
        bits=inputs_to_bits(inputs, trellis.bits_per_stage),
        symbols=symbols,
        metric=metric,
        points=chosen,
        reconstructed=normalize_cdi(chosen),
    )
    return _unbatch(result) if single else result


def _unbatch(r: QuantizationResult) -> QuantizationResult:
    return QuantizationResult(r.bits[0], r.symbols[0], float(r.metric[0]), r.points[0], r.reconstructed[0])


def _decode_points(bits, trellis: Trellis, constellations):
    bits, single = _as_batch(bits)
    inputs = bits_to_inputs(bits, trellis.bits_per_stage)
    points = np.asarray(constellations, dtype=np.complex128)
    if points.shape[-2:] != (inputs.shape[-1], trellis.alphabet_size):
        raise ContractError(
            f"{bits.shape[-1]} bits imply M={inputs.shape[-1]} stages, "
            f"constellations have shape {points.shape}"
        )
    symbols = _backend.encode(inputs, trellis.next_state, trellis.out_symbol)
    chosen = np.take_along_axis(
        np.broadcast_to(points, symbols.shape + points.shape[-1:]), symbols[..., None], axis=-1
    )[..., 0]
    return (chosen[0] if single else chosen)


def reconstruct(bits, trellis: Trellis, constellations) -> np.ndarray:
    """Base-station side: bits to unit-norm quantized CDI."""
    return normalize_cdi(_decode_points(bits, trellis, constellations))


def quantize_memoryless(h, trellis: Trellis) -> QuantizationResult:
    """One-shot TCQ with PSK scaled by ``1/sqrt(M)`` at every stage."""
    hbar = normalize_cdi(h)
    M = hbar.shape[-1]
    base = psk_points(trellis.alphabet_size)
    return viterbi_quantize(hbar, trellis, np.broadcast_to(initial_scale(M) * base, (M, base.size)))


def quantize_spatial(h, trellis: Trellis) -> tuple[np.ndarray, np.ndarray]:
    """Quantize a spatially correlated channel directly (no decorrelation).

    Returns ``(bits, reconstructed)``.  Reconstruction needs no knowledge of the
    correlation matrix: it is :func:`reconstruct` with the same fixed constellation.
    """
    hbar = normalize_cdi(h)
    M = hbar.shape[-1]
    base = psk_points(trellis.alphabet_size)
    r = viterbi_quantize(hbar, trellis, np.broadcast_to(spatial_scale(M) * base, (M, base.size)))
    return r.bits, r.reconstructed


def spatial_constellations(M: int, trellis: Trellis) -> np.ndarray:
    base = psk_points(trellis.alphabet_size)
    return np.broadcast_to(spatial_scale(M) * base, (M, base.size))


@dataclass
class DifferentialSession:
    """State one link end keeps for differential TCQ.

    ``centers`` holds the absolute constellation point chosen at every stage
    during the previous interval (all zero before the first feedback).  With
    ``users=B`` the session tracks ``B`` independent links in lock step;
    ``centers`` then has shape ``(B, M)``.
    """

    trellis: Trellis
    num_antennas: int
    epsilon: float
    users: int | None = None
    interval_index: int = 0
    centers: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if self.num_antennas < 1:
            raise ContractError("num_antennas must be >= 1")
        self.delta_n = differential_scale(self.epsilon, self.num_antennas)
        self.delta_0 = initial_scale(self.num_antennas)
        self.base_points = psk_points(self.trellis.alphabet_size)
        shape = (self.num_antennas,) if self.users is None else (self.users, self.num_antennas)
        if self.centers is None:
            self.centers = np.zeros(shape, dtype=np.complex128)
        elif np.shape(self.centers) != shape:
            raise ContractError(f"centers must have shape {shape}")

    @property
    def scale(self) -> float:
        return self.delta_0 if self.interval_index == 0 else self.delta_n

    @property
    def bits_per_interval(self) -> int:
        return self.num_antennas * self.trellis.bits_per_stage

    def constellations(self) -> np.ndarray:
        return stage_constellations(self.base_points, self.centers, self.scale)

    def set_epsilon(self, epsilon: float) -> None:
        """Change the temporal statistic.  Both link ends must apply it at the same interval."""
        self.delta_n = differential_scale(epsilon, self.num_antennas)
        self.epsilon = epsilon

    def user_step(self, h) -> tuple[np.ndarray, np.ndarray]:
        """Quantize the current channel; returns ``(bits, reconstructed)``."""
        hbar = normalize_cdi(h)
        if hbar.shape != self.centers.shape:
            raise ContractError(f"channel shape {hbar.shape} does not match session {self.centers.shape}")
        r = viterbi_quantize(hbar, self.trellis, self.constellations())
        self.centers = r.points
        self.interval_index += 1
        return r.bits, r.reconstructed

    def bs_step(self, bits) -> np.ndarray:
        """Mirror of :meth:`user_step` driven only by the received bits."""
        bits = np.asarray(bits)
        if bits.shape != self.centers.shape[:-1] + (self.bits_per_interval,):
            raise ContractError(
                f"expected {self.bits_per_interval} bits per link, got shape {bits.shape}"
            )
        chosen = _decode_points(bits, self.trellis, self.constellations())
        self.centers = chosen
        self.interval_index += 1
        return normalize_cdi(chosen)

    def same_state(self, other: "DifferentialSession") -> bool:
        return (
            self.interval_index == other.interval_index
            and self.scale == other.scale
            and np.array_equal(self.centers, other.centers)
        )


def session_user_step(session: DifferentialSession, h):
    return session.user_step(h)


def session_bs_step(session: DifferentialSession, bits):
    return session.bs_step(bits)


def pack_bits(bits) -> bytes:
    """Byte-pack a feedback bit stream, most significant bit first."""
    return np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="big").tobytes()


def unpack_bits(data: bytes, nbits: int) -> np.ndarray:
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="big")
    if bits.size < nbits:
        raise ContractError(f"{len(data)} bytes hold fewer than {nbits} bits")
    return bits[:nbits]
