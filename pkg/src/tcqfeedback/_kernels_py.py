"""Pure numpy implementation of the hot kernels.

Vectorised over the batch axis and looping over trellis stages.  Arithmetic is
ordered exactly as in ``_kernels.pyx`` (squared differences of real and
imaginary parts, then one addition onto the survivor metric) so both backends
return bit-identical results.
"""

import numpy as np


def viterbi(target, points, next_state, out_symbol, incoming, start_state=0):
    """Minimum squared-Euclidean-distance trellis path for every row of ``target``.

    Args:
        target: complex128 array ``(B, M)``.
        points: complex128 array ``(B, M, L)``; per-row, per-stage constellations.
        next_state, out_symbol: ``(N, T)`` transition tables.
        incoming: ``(N, I)`` edge ids entering each state, sorted by predecessor.
        start_state: State the path must leave from at stage 0.

    Returns:
        ``(inputs, symbols, metric)`` with shapes ``(B, M)``, ``(B, M)``, ``(B,)``.
    """
    B, M = target.shape
    N, T = next_state.shape
    rows = np.arange(B)
    tr, ti = target.real, target.imag
    pr, pi = points.real, points.imag
    edge_sym = out_symbol.reshape(-1)

    metric = np.full((B, N), np.inf)
    metric[:, start_state] = 0.0
    survivors = np.empty((M, B, N), dtype=np.int64)
    for m in range(M):
        dr = tr[:, m, None] - pr[:, m, edge_sym]
        di = ti[:, m, None] - pi[:, m, edge_sym]
        branch = dr * dr + di * di
        cand = (metric[:, :, None] + branch.reshape(B, N, T)).reshape(B, N * T)
        entering = cand[:, incoming]
        pick = np.argmin(entering, axis=2)
        survivors[m] = incoming[np.arange(N), pick]
        metric = np.take_along_axis(entering, pick[:, :, None], axis=2)[:, :, 0]

    state = np.argmin(metric, axis=1)
    best = metric[rows, state]
    edges = np.empty((B, M), dtype=np.int64)
    for m in range(M - 1, -1, -1):
        e = survivors[m, rows, state]
        edges[:, m] = e
        state = e // T
    return edges % T, edge_sym[edges], best


def encode(inputs, next_state, out_symbol, start_state=0):
    """Table walk: per-stage input values ``(B, M)`` to symbol indices ``(B, M)``."""
    B, M = inputs.shape
    symbols = np.empty((B, M), dtype=np.int64)
    state = np.full(B, start_state, dtype=np.int64)
    for m in range(M):
        v = inputs[:, m]
        symbols[:, m] = out_symbol[state, v]
        state = next_state[state, v]
    return symbols
