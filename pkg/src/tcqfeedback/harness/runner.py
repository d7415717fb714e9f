"""Monte Carlo execution of temporal, spatial and RVQ scenarios.

Every trial draws from its own generator, spawned from the master seed with
``numpy.random.SeedSequence(seed).spawn(trials)``.  Trials may run in a process
pool (``TCQFEEDBACK_WORKERS``), and their partial sums are always combined in
trial order, so output is identical for any worker count.
"""

from __future__ import annotations

import dataclasses
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from ..channels import GaussMarkovProcess, exp_correlation_matrix, load_channel_trace, spatial_channel
from ..errors import ConfigError, DegenerateGeometryError
from ..precoding import beamforming_gain, db, mf_precoders, sinr_per_user, zf_precoders
from ..quantizer import (
    DifferentialSession,
    normalize_cdi,
    quantize_memoryless,
    quantize_spatial,
    reconstruct,
    spatial_constellations,
)
from ..rvq import RvqReport, rvq_report
from ..trellis import get_trellis
from .config import ExperimentConfig, with_q

log = logging.getLogger(__name__)

WORKERS_ENV = "TCQFEEDBACK_WORKERS"


@dataclass(frozen=True)
class ResultRecord:
    interval: int
    bf_gain_db: float
    se_zf: float
    se_mf: float
    seed: int
    config_hash: str
    bf_gain: float
    bf_gain_stderr: float
    sinr_zf_mean: float
    sinr_mf_mean: float
    samples: int
    zf_degenerate: int = 0
    sweep_param: str | None = None
    sweep_value: float | None = None


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list
    sinr_samples: np.ndarray | None = None  # (trials, intervals, K, 2) zf/mf, when requested


def trial_generators(seed: int, trials: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(trials)]


def worker_count(workers: int | None = None) -> int:
    if workers is not None:
        return max(1, int(workers))
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        raise ConfigError(f"{WORKERS_ENV} must be an integer") from None


# Per-trial accumulators: rows are intervals, columns are
# bf_sum, bf_sq_sum, se_zf, se_mf, sinr_zf_sum, sinr_mf_sum, zf_degenerate
_NCOLS = 7


def _metrics_row(H, H_hat, rho):
    bf = beamforming_gain(H, H_hat)
    s_mf = sinr_per_user(H, mf_precoders(H_hat), rho)
    try:
        s_zf = sinr_per_user(H, zf_precoders(H_hat), rho)
        degenerate = 0.0
    except DegenerateGeometryError:
        # excluded from the ZF averages and counted in the output, never regularised
        s_zf = np.full(H.shape[0], np.nan)
        degenerate = 1.0
    row = np.array([
        bf.sum(), np.square(bf).sum(),
        np.nansum(np.log2(1.0 + s_zf)), np.log2(1.0 + s_mf).sum(),
        np.nansum(s_zf), s_mf.sum(), degenerate,
    ])
    return row, np.stack([s_zf, s_mf], axis=-1)


@lru_cache(maxsize=4)
def _trace(path: str):
    return load_channel_trace(path)


def _temporal_channels(cfg: ExperimentConfig, trial: int, rng):
    K, M, T = cfg.K, cfg.M, cfg.intervals
    if cfg.channel == "trace":
        records = _trace(cfg.trace_path)
        start = trial * K * T
        block = np.array(records[start:start + K * T]).reshape(K, T, M)
        for t in range(T):
            yield block[:, t, :]
        return
    process = GaussMarkovProcess(cfg.resolved_epsilon, M, rng, users=K)
    yield process.current
    for _ in range(1, T):
        yield process.step()


def _temporal_trial(args):
    cfg, trial, rng = args
    trellis = get_trellis(cfg.constellation)
    acc = np.zeros((cfg.intervals, _NCOLS))
    sinrs = np.zeros((cfg.intervals, cfg.K, 2)) if cfg.dump_sinr else None
    if cfg.scheme == "differential_tcq":
        eps = cfg.resolved_epsilon
        user = DifferentialSession(trellis, cfg.M, eps, users=cfg.K)
        bs = DifferentialSession(trellis, cfg.M, eps, users=cfg.K)
    fixed = spatial_constellations(cfg.M, trellis)
    for t, H in enumerate(_temporal_channels(cfg, trial, rng)):
        if cfg.scheme == "perfect_cdi":
            H_hat = normalize_cdi(H)
        elif cfg.scheme == "memoryless_tcq":
            H_hat = reconstruct(quantize_memoryless(H, trellis).bits, trellis, fixed)
        else:
            bits, _ = user.user_step(H)
            H_hat = bs.bs_step(bits)
            if not user.same_state(bs):
                raise RuntimeError(f"user/BS sessions diverged at trial {trial}, interval {t}")
        acc[t], s = _metrics_row(H, H_hat, cfg.rho)
        if sinrs is not None:
            sinrs[t] = s
    return acc, sinrs


def _spatial_trial(args):
    cfg, trial, rng = args
    trellis = get_trellis(cfg.constellation)
    model = _spatial_model(cfg.M, cfg.zt, cfg.topology)
    H = spatial_channel(model, rng, users=cfg.K)
    if cfg.scheme == "perfect_cdi":
        H_hat = normalize_cdi(H)
    else:
        bits, _ = quantize_spatial(H, trellis)
        H_hat = reconstruct(bits, trellis, spatial_constellations(cfg.M, trellis))
    row, s = _metrics_row(H, H_hat, cfg.rho)
    return row[None], (s[None] if cfg.dump_sinr else None)


@lru_cache(maxsize=8)
def _spatial_model(M, zt, topology):
    return exp_correlation_matrix(M, zt, topology)


def _run_trials(fn, cfg: ExperimentConfig, workers: int | None):
    jobs = [(cfg, i, rng) for i, rng in enumerate(trial_generators(cfg.seed, cfg.trials))]
    n = min(worker_count(workers), cfg.trials)
    if n == 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, jobs, chunksize=max(1, cfg.trials // (4 * n))))


def _aggregate(cfg: ExperimentConfig, outputs) -> ExperimentResult:
    total = np.zeros_like(outputs[0][0])
    for acc, _ in outputs:  # fixed trial order keeps sums reproducible
        total += acc
    n = cfg.trials * cfg.K
    h = cfg.config_hash()
    records = []
    for t, (bf_sum, bf_sq, se_zf, se_mf, s_zf, s_mf, bad) in enumerate(total):
        bf = bf_sum / n
        var = max(bf_sq / n - bf * bf, 0.0) * n / max(n - 1, 1)
        zf_trials = cfg.trials - int(bad)
        records.append(ResultRecord(
            interval=t,
            bf_gain_db=float(db(bf)),
            se_zf=float(se_zf / zf_trials) if zf_trials else float("nan"),
            se_mf=float(se_mf / cfg.trials),
            seed=cfg.seed,
            config_hash=h,
            bf_gain=float(bf),
            bf_gain_stderr=float(np.sqrt(var / n)),
            sinr_zf_mean=float(s_zf / (zf_trials * cfg.K)) if zf_trials else float("nan"),
            sinr_mf_mean=float(s_mf / n),
            samples=n,
            zf_degenerate=int(bad),
        ))
    sinrs = np.stack([s for _, s in outputs]) if cfg.dump_sinr else None
    return ExperimentResult(cfg, records, sinrs)


def run_temporal_experiment(cfg: ExperimentConfig, workers: int | None = None) -> ExperimentResult:
    cfg.validate("temporal")
    if cfg.channel == "trace":
        need = cfg.trials * cfg.K * cfg.intervals
        records = _trace(cfg.trace_path)
        if len(records) < need:
            raise ConfigError(
                f"trace holds {len(records)} records, need trials*K*intervals = {need}"
            )
        if records[0].size != cfg.M:
            raise ConfigError(f"trace has M={records[0].size}, config says M={cfg.M}")
    log.info("temporal %s %s M=%d K=%d eps=%s", cfg.scheme, cfg.constellation, cfg.M, cfg.K,
             cfg.resolved_epsilon)
    return _aggregate(cfg, _run_trials(_temporal_trial, cfg, workers))


def run_spatial_experiment(cfg: ExperimentConfig, workers: int | None = None) -> ExperimentResult:
    cfg.validate("spatial")
    if cfg.intervals != 1:
        cfg = cfg.replace(intervals=1)
    log.info("spatial %s %s M=%d zt=%s %s", cfg.scheme, cfg.constellation, cfg.M, cfg.zt, cfg.topology)
    return _aggregate(cfg, _run_trials(_spatial_trial, cfg, workers))


def run_rvq_report(cfg: ExperimentConfig) -> RvqReport:
    if not cfg.M >= cfg.K >= 1:
        raise ConfigError(f"need M >= K >= 1, got M={cfg.M}, K={cfg.K}")
    if cfg.z_db <= 0:
        raise ConfigError("z must be positive")
    rng = np.random.default_rng(cfg.seed)
    return rvq_report(cfg.M, cfg.K, cfg.z_db, rho=cfg.rho, bits=cfg.bits,
                      mc_trials=cfg.mc_trials, rng=rng)


def run_sweep(cfg: ExperimentConfig, kind: str, workers: int | None = None):
    """Yield ``(param, value, ExperimentResult)`` for each point of ``cfg.sweep``."""
    run = run_temporal_experiment if kind == "temporal" else run_spatial_experiment
    if not cfg.sweep:
        yield None, None, run(cfg, workers)
        return
    name, values = cfg.sweep
    for v in values:
        point = with_q(cfg, v) if name == "q" else cfg.replace(**{name: v})
        result = run(point.replace(sweep=()), workers)
        result.records = [
            dataclasses.replace(r, sweep_param=name, sweep_value=float(v)) for r in result.records
        ]
        yield name, v, result
