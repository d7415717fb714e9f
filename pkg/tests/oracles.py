"""Independent reference implementations used as test oracles.

Nothing here calls the Viterbi kernels: paths are enumerated exhaustively by
walking ``Trellis.transitions`` one stage at a time.
"""

import itertools

import numpy as np


def enumerate_paths(trellis, M):
    """Yield ``(inputs, symbols)`` for every length-``M`` path from state 0."""
    T = trellis.branches
    for inputs in itertools.product(range(T), repeat=M):
        state, symbols = 0, []
        for v in inputs:
            edges = {e[0]: e for e in trellis.transitions(state)}
            _, sym, state = edges[v]
            symbols.append(sym)
        yield inputs, symbols


def brute_force_metric(hbar, trellis, constellations):
    """Minimum squared distance over all trellis paths, plus the arg-min symbols."""
    hbar = np.asarray(hbar)
    M = hbar.shape[0]
    idx = np.arange(M)
    best, best_syms = np.inf, None
    for _, syms in enumerate_paths(trellis, M):
        d = float(np.sum(np.abs(hbar - constellations[idx, syms]) ** 2))
        if d < best:
            best, best_syms = d, syms
    return best, best_syms


def random_cdi(rng, M, users=None):
    shape = (M,) if users is None else (users, M)
    h = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return h / np.linalg.norm(h, axis=-1, keepdims=True)


def path_table(trellis, M):
    """All ``T**M`` symbol sequences from state 0 as an ``(n_paths, M)`` array.

    Built breadth-first from ``Trellis.transitions`` so it shares no code with
    the Viterbi kernels.
    """
    syms = np.zeros((1, 0), dtype=np.int64)
    states = np.zeros(1, dtype=np.int64)
    for _ in range(M):
        new_syms, new_states = [], []
        for v in range(trellis.branches):
            step = np.array([trellis.transitions(int(s))[v][1:] for s in states], dtype=np.int64)
            new_syms.append(np.concatenate([syms, step[:, :1]], axis=1))
            new_states.append(step[:, 1])
        syms, states = np.concatenate(new_syms), np.concatenate(new_states)
    return syms


def exhaustive_metrics(hbar, constellations, table):
    """Minimum distance over every row of ``table`` for each row of ``hbar``."""
    M = table.shape[1]
    codewords = constellations[np.arange(M), table]  # (n_paths, M)
    return np.array([np.min(np.sum(np.abs(h - codewords) ** 2, axis=1)) for h in hbar])
