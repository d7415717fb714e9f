"""Ungerboeck trellises and the table-driven convolutional coder.

A :class:`Trellis` is a pair of ``(num_states, 2**bits_per_stage)`` lookup
tables.  The quantizer (Viterbi search) and the base-station coder walk the
very same tables, so encoder and decoder agree by construction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import ContractError


@dataclass(frozen=True, eq=False)
class Trellis:
    """Immutable state-transition table.

    Attributes:
        name: Short identifier (``"qpsk"`` or ``"8psk"``).
        next_state: ``next_state[s, v]`` is the state reached from ``s`` on input value ``v``.
        out_symbol: ``out_symbol[s, v]`` is the constellation index emitted on that branch.
        alphabet_size: Number of points L of the source constellation.
    """

    name: str
    next_state: np.ndarray
    out_symbol: np.ndarray
    alphabet_size: int
    incoming: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        ns = np.ascontiguousarray(self.next_state, dtype=np.int64)
        out = np.ascontiguousarray(self.out_symbol, dtype=np.int64)
        if ns.shape != out.shape or ns.ndim != 2:
            raise ContractError("next_state and out_symbol must be equal-shape 2-D tables")
        n, t = ns.shape
        if t & (t - 1):
            raise ContractError("transitions per state must be a power of two")
        if ns.min() < 0 or ns.max() >= n or out.min() < 0 or out.max() >= self.alphabet_size:
            raise ContractError("transition table entries out of range")
        ns.setflags(write=False)
        out.setflags(write=False)
        object.__setattr__(self, "next_state", ns)
        object.__setattr__(self, "out_symbol", out)
        object.__setattr__(self, "incoming", _incoming_edges(ns))

    @property
    def num_states(self) -> int:
        return self.next_state.shape[0]

    @property
    def branches(self) -> int:
        return self.next_state.shape[1]

    @property
    def bits_per_stage(self) -> int:
        return self.branches.bit_length() - 1

    def transitions(self, state: int) -> list[tuple[int, int, int]]:
        """Outgoing branches of ``state`` as ``(input_value, symbol_index, next_state)``."""
        _check_state(self, state)
        return [
            (v, int(self.out_symbol[state, v]), int(self.next_state[state, v]))
            for v in range(self.branches)
        ]

    def __reduce__(self):
        return (_by_name, (self.name,)) if self.name in _BUILDERS else super().__reduce__()


def _incoming_edges(next_state: np.ndarray) -> np.ndarray:
    # Edge id = state * branches + input.  Rows are sorted by predecessor state,
    # which is what makes "first minimum wins" equal to smallest-predecessor tie-breaking.
    n, t = next_state.shape
    lists = [[] for _ in range(n)]
    for s in range(n):
        for v in range(t):
            lists[next_state[s, v]].append(s * t + v)
    width = max(len(x) for x in lists)
    if any(len(x) != width for x in lists):
        raise ContractError("every state must have the same number of incoming branches")
    table = np.array(lists, dtype=np.int64)
    table.setflags(write=False)
    return table


def _check_state(trellis: Trellis, state: int) -> None:
    if not 0 <= state < trellis.num_states:
        raise ContractError(f"state {state} outside [0, {trellis.num_states})")


@lru_cache(maxsize=None)
def build_qpsk_trellis() -> Trellis:
    """4-state, rate 1/2 Ungerboeck trellis over QPSK (one feedback bit per antenna).

    >>> conv_encode(build_qpsk_trellis(), [1, 0, 0]).tolist()
    [2, 1, 2]
    """
    next_state = [[0, 1], [2, 3], [0, 1], [2, 3]]
    out_symbol = [[0, 2], [1, 3], [2, 0], [3, 1]]
    return Trellis("qpsk", np.array(next_state), np.array(out_symbol), 4)


@lru_cache(maxsize=None)
def build_8psk_trellis() -> Trellis:
    """8-state, rate 2/3 Ungerboeck trellis over 8PSK (two feedback bits per antenna).

    Systematic feedback realization of the parity-check polynomials
    ``(h0, h1, h2) = (11, 02, 04)`` octal.  With state ``(p, q, r)`` and input
    bits ``(y2, y1)``, the coded bit is ``y0 = p``, the emitted symbol is
    ``4*y2 + 2*y1 + y0`` (natural set-partition labelling) and the next state
    is ``(q ^ y1, r ^ y2, p)``.  All branches leaving a state share the parity
    of ``p``, i.e. one QPSK subset.
    """
    next_state = np.zeros((8, 4), dtype=np.int64)
    out_symbol = np.zeros((8, 4), dtype=np.int64)
    for s in range(8):
        p, q, r = (s >> 2) & 1, (s >> 1) & 1, s & 1
        for v in range(4):
            y2, y1 = v >> 1, v & 1
            out_symbol[s, v] = 4 * y2 + 2 * y1 + p
            next_state[s, v] = ((q ^ y1) << 2) | ((r ^ y2) << 1) | p
    return Trellis("8psk", next_state, out_symbol, 8)


_BUILDERS = {"qpsk": build_qpsk_trellis, "8psk": build_8psk_trellis}


def _by_name(name: str) -> Trellis:
    return _BUILDERS[name]()


def get_trellis(name: str) -> Trellis:
    try:
        return _by_name(name.lower())
    except KeyError:
        raise ContractError(f"unknown constellation {name!r}; expected one of {sorted(_BUILDERS)}") from None


def transitions(trellis: Trellis, state: int) -> list[tuple[int, int, int]]:
    return trellis.transitions(state)


def bits_to_inputs(bits, bits_per_stage: int) -> np.ndarray:
    """Group a flat bit array (MSB first within a stage) into per-stage input values."""
    b = np.asarray(bits)
    if b.size and (b.min() < 0 or b.max() > 1):
        raise ContractError("bits must be 0/1")
    if b.shape[-1] % bits_per_stage:
        raise ContractError(
            f"bit length {b.shape[-1]} is not a multiple of bits_per_stage={bits_per_stage}"
        )
    grouped = b.reshape(*b.shape[:-1], -1, bits_per_stage).astype(np.int64)
    weights = 1 << np.arange(bits_per_stage - 1, -1, -1, dtype=np.int64)
    return grouped @ weights


def inputs_to_bits(inputs, bits_per_stage: int) -> np.ndarray:
    """Inverse of :func:`bits_to_inputs`; returns ``uint8`` bits."""
    v = np.asarray(inputs, dtype=np.int64)
    shifts = np.arange(bits_per_stage - 1, -1, -1, dtype=np.int64)
    bits = (v[..., None] >> shifts) & 1
    return bits.reshape(*v.shape[:-1], -1).astype(np.uint8)


def conv_encode(trellis: Trellis, bits, start_state: int = 0) -> np.ndarray:
    """Walk the transition table from ``start_state`` and return one symbol index per stage.

    ``bits`` may carry leading batch dimensions; the last axis is the bit stream.
    """
    from ._backend import encode

    _check_state(trellis, start_state)
    inputs = bits_to_inputs(bits, trellis.bits_per_stage)
    flat = np.ascontiguousarray(inputs.reshape(int(np.prod(inputs.shape[:-1])), inputs.shape[-1]))
    symbols = encode(flat, trellis.next_state, trellis.out_symbol, start_state)
    return symbols.reshape(inputs.shape)
