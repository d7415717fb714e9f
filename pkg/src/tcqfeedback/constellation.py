"""PSK source constellations, their scale factors and the per-stage transform."""

from __future__ import annotations

import math

import numpy as np

from .errors import ContractError


def psk_points(L: int) -> np.ndarray:
    """Unit-magnitude PSK points; symbol ``k`` sits at angle ``2*pi*k/L``.

    For QPSK this gives ``[1, j, -1, -j]``.
    """
    if L not in (4, 8):
        raise ContractError(f"unsupported constellation size L={L}; expected 4 or 8")
    pts = np.exp(2j * np.pi * np.arange(L) / L)
    # snap the exact axis points so QPSK is exactly [1, j, -1, -j]
    pts.real[np.abs(pts.real) < 1e-15] = 0.0
    pts.imag[np.abs(pts.imag) < 1e-15] = 0.0
    return pts


def _check_antennas(M) -> None:
    if M < 1:
        raise ContractError(f"number of antennas must be >= 1, got {M}")


def initial_scale(M: int) -> float:
    """Scale of the first-interval (memoryless) constellation, ``1/sqrt(M)``."""
    _check_antennas(M)
    return 1.0 / math.sqrt(M)


def spatial_scale(M: int) -> float:
    """Fixed scale used for spatially correlated channels.

    Minimises the mean squared error to a fully correlated normalised channel,
    whose entries all have magnitude ``1/sqrt(M)``.
    """
    _check_antennas(M)
    return 1.0 / math.sqrt(M)


def differential_scale(epsilon: float, M: int) -> float:
    """Scale used after the first feedback interval: ``sqrt(pi * (1 - eps) / (2M))``.

    This is the mean per-entry change of the normalised channel between two
    intervals of a Gauss-Markov process under channel hardening.
    """
    if not 0.0 <= epsilon <= 1.0:
        raise ContractError(f"epsilon must lie in [0, 1], got {epsilon}")
    _check_antennas(M)
    return math.sqrt(math.pi * (1.0 - epsilon) / (2.0 * M))


def transform_point(base, center, scale):
    """Scale ``base`` about the origin then translate it to ``center``.

    Equivalent to the homogeneous product ``Translate(center) @ Scale(scale) @ [re, im, 1]``.
    Works elementwise on arrays.
    """
    return scale * base + center


def stage_constellations(base: np.ndarray, centers: np.ndarray, scale: float) -> np.ndarray:
    """Per-stage constellations ``(..., M, L)`` for centers of shape ``(..., M)``."""
    return transform_point(base, np.asarray(centers)[..., None], scale)
