"""Random vector quantization (RVQ) analysis.

Closed-form expected SINRs for ZF/MF precoding, the RVQ quantization error and
the feedback-bit requirements that show codebook search is infeasible at
massive-MIMO scale, plus a brute-force Monte Carlo RVQ oracle for small M.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import betaln

from .errors import ContractError

MC_MAX_ANTENNAS = 8
MC_MAX_BITS = 12


def zf_expected_sinr(rho: float, q: float) -> float:
    return rho * (q - 1.0)


def mf_expected_sinr(rho: float, K: int, q: float) -> float:
    if K < 1:
        raise ContractError("K must be >= 1")
    return rho * q / (rho * (K - 1) / K + 1.0)


def rvq_error_exact(Nc: int, M: int) -> float:
    """Expected quantization error ``xi = Nc * B(Nc, M/(M-1))`` of an RVQ codebook."""
    if M < 2:
        raise ContractError("RVQ error needs M >= 2")
    if Nc < 1:
        raise ContractError("codebook size must be >= 1")
    return math.exp(math.log(Nc) + betaln(Nc, M / (M - 1.0)))


def rvq_error_bound(b: float, M: int) -> float:
    """Upper bound ``2**(-b/(M-1))`` on the RVQ quantization error."""
    if M < 2 or b < 0:
        raise ContractError("bound needs M >= 2 and b >= 0")
    return 2.0 ** (-b / (M - 1.0))


def rvq_mf_expected_sinr(rho: float, K: int, q: float, xi: float) -> float:
    if not 0.0 <= xi <= 1.0:
        raise ContractError("xi must lie in [0, 1]")
    return rho * q * (1.0 - xi) / (rho / K * (K - 1) + 1.0)


def bits_required_for_loss(M: int, z_db: float) -> float:
    """RVQ bits for a mean MF SINR ``z_db`` below perfect CDI (real valued)."""
    if M < 2:
        raise ContractError("M must be >= 2")
    if z_db <= 0:
        raise ContractError("loss target z must be positive")
    return -(M - 1) * math.log2(1.0 - 10.0 ** (-z_db / 10.0))


def bits_required_unit_sinr(M: int, K: int) -> float:
    """RVQ bits for a mean MF SINR of one at high SNR."""
    if M <= K - 1:
        raise ContractError(f"need M > K - 1, got M={M}, K={K}")
    return -(M - 1) * math.log2(1.0 - (K - 1) / M) + 0.0


def _isotropic(rng, shape):
    v = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def rvq_monte_carlo(M: int, b: int, trials: int, rng: np.random.Generator, chunk: int = 4096):
    """Brute-force ``E[max_c |h c^H|^2]`` over fresh random codebooks of ``2**b`` words.

    Returns ``(mean, standard_error)``.
    """
    if M > MC_MAX_ANTENNAS or b > MC_MAX_BITS:
        raise ContractError(
            f"oracle budget exceeded (M={M} > {MC_MAX_ANTENNAS} or b={b} > {MC_MAX_BITS})"
        )
    if M < 1 or b < 0 or trials < 1:
        raise ContractError("need M >= 1, b >= 0, trials >= 1")
    Nc = 1 << b
    step = max(1, min(chunk, (1 << 22) // (Nc * M)))
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < trials:
        n = min(step, trials - done)
        h = _isotropic(rng, (n, 1, M))
        codebook = _isotropic(rng, (n, Nc, M))
        best = np.max(np.abs(np.sum(h * codebook.conj(), axis=-1)) ** 2, axis=1)
        total += best.sum()
        total_sq += np.square(best).sum()
        done += n
    mean = total / trials
    var = max(total_sq / trials - mean * mean, 0.0) * trials / max(trials - 1, 1)
    return mean, math.sqrt(var / trials)


@dataclass(frozen=True)
class RvqReport:
    M: int
    K: int
    q: float
    rho: float
    z_db: float
    bits: int
    xi: float
    xi_bound: float
    bits_required_loss: float
    bits_required_loss_ceil: int
    codebook_size_loss: int
    bits_required_unit: float
    bits_required_unit_ceil: int
    codebook_size_unit: int
    expected_sinr_zf: float
    expected_sinr_mf: float
    expected_sinr_mf_rvq: float
    mc_mean: float | None = None
    mc_stderr: float | None = None

    def as_dict(self):
        return asdict(self)

    def to_text(self) -> str:
        return "".join(f"{k} = {_fmt(v)}\n" for k, v in self.as_dict().items())


def _fmt(v):
    if v is None:
        return "NA"
    if isinstance(v, float):
        return f"{v:.9g}"
    return str(v)


def rvq_report(M: int, K: int, z_db: float, rho: float = 10.0, bits: int | None = None,
               mc_trials: int = 0, rng: np.random.Generator | None = None) -> RvqReport:
    """Fill every report field; the Monte Carlo oracle runs only when ``mc_trials > 0``.

    ``bits`` is the codebook size (in bits) used for ``xi``; it defaults to the
    unit-SINR requirement rounded up.
    """
    if K < 1 or M < K:
        raise ContractError(f"need M >= K >= 1, got M={M}, K={K}")
    q = M / K
    b_loss = bits_required_for_loss(M, z_db)
    b_unit = bits_required_unit_sinr(M, K)
    ceil_loss = math.ceil(b_loss - 1e-12)
    ceil_unit = math.ceil(b_unit - 1e-12)
    if bits is None:
        bits = ceil_unit
    xi = rvq_error_exact(2**bits, M)
    mc_mean = mc_se = None
    if mc_trials:
        mc_mean, mc_se = rvq_monte_carlo(M, bits, mc_trials, rng or np.random.default_rng(0))
    return RvqReport(
        M=M, K=K, q=q, rho=rho, z_db=z_db, bits=bits,
        xi=xi,
        xi_bound=rvq_error_bound(bits, M),
        bits_required_loss=b_loss,
        bits_required_loss_ceil=ceil_loss,
        codebook_size_loss=2**ceil_loss,
        bits_required_unit=b_unit,
        bits_required_unit_ceil=ceil_unit,
        codebook_size_unit=2**ceil_unit,
        expected_sinr_zf=zf_expected_sinr(rho, q),
        expected_sinr_mf=mf_expected_sinr(rho, K, q),
        expected_sinr_mf_rvq=rvq_mf_expected_sinr(rho, K, q, xi),
        mc_mean=mc_mean,
        mc_stderr=mc_se,
    )
