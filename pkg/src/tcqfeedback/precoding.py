"""Linear multiuser precoders and link metrics.

``H`` matrices hold one user per row (``K x M``); precoders are returned as an
``M x K`` matrix ``W`` whose columns are unit-norm.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import ContractError, DegenerateGeometryError

COND_LIMIT = 1e10


def zf_precoders(H_hat) -> np.ndarray:
    """Normalised columns of ``H^H (H H^H)^-1``."""
    H = np.asarray(H_hat, dtype=np.complex128)
    K, M = H.shape
    if K > M:
        raise ContractError(f"zero forcing needs K <= M, got K={K}, M={M}")
    gram = H @ H.conj().T
    if np.linalg.cond(gram) > COND_LIMIT:
        raise DegenerateGeometryError(
            f"user channels are numerically dependent (cond > {COND_LIMIT:g})", users=range(K)
        )
    # V^H = (H H^H)^-1 H since the Gram matrix is Hermitian
    V = scipy.linalg.cho_solve(scipy.linalg.cho_factor(gram), H).conj().T
    return V / np.linalg.norm(V, axis=0, keepdims=True)


def mf_precoders(H_hat) -> np.ndarray:
    """Matched filter: ``w_k = h_k^H / ||h_k||``."""
    W = np.asarray(H_hat, dtype=np.complex128).conj().T
    norms = np.linalg.norm(W, axis=0, keepdims=True)
    if np.any(norms == 0):
        raise ContractError("matched filter needs non-zero user channels")
    return W / norms


def sinr_per_user(H, W, rho: float) -> np.ndarray:
    """Per-user SINR with uniform power ``rho/K`` against the true channels ``H``."""
    H = np.asarray(H)
    K = H.shape[0]
    if rho <= 0:
        raise ContractError("rho must be positive")
    gains = np.abs(H @ W) ** 2
    signal = np.diag(gains)
    interference = gains.sum(axis=1) - signal
    p = rho / K
    return p * signal / (p * interference + 1.0)


def spectral_efficiency(sinrs) -> float:
    """Sum rate ``sum_k log2(1 + SINR_k)`` in bps/Hz."""
    return float(np.sum(np.log2(1.0 + np.asarray(sinrs))))


def beamforming_gain(h, h_hat, tol: float = 1e-9):
    """``|h h_hat^H|^2`` for a unit-norm beamformer; works row-wise on batches."""
    h_hat = np.asarray(h_hat)
    norms = np.linalg.norm(h_hat, axis=-1)
    if np.any(np.abs(norms - 1.0) > tol):
        raise ContractError("beamformer must have unit norm")
    return np.abs(np.sum(np.asarray(h) * h_hat.conj(), axis=-1)) ** 2


def db(x):
    return 10.0 * np.log10(x)


def from_db(x):
    return 10.0 ** (np.asarray(x) / 10.0)
