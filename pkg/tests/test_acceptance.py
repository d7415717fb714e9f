"""Acceptance suite: one test per criterion, each run at its stated tolerance.

Every test records its verdict in ``conftest.ACCEPTANCE`` so the terminal
summary prints one PASS/FAIL line per criterion even under ``pytest -q``.
"""

import contextlib
import io
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from oracles import exhaustive_metrics, path_table, random_cdi
from tcqfeedback.channels import GaussMarkovProcess
from tcqfeedback.constellation import differential_scale, initial_scale, psk_points
from tcqfeedback.harness.cli import main
from tcqfeedback.harness.config import ExperimentConfig
from tcqfeedback.harness.csvio import write_csv
from tcqfeedback.harness.runner import run_spatial_experiment, run_temporal_experiment
from tcqfeedback.quantizer import DifferentialSession, normalize_cdi, reconstruct, viterbi_quantize
from tcqfeedback.rvq import rvq_error_bound, rvq_error_exact, rvq_monte_carlo
from tcqfeedback.trellis import build_8psk_trellis, build_qpsk_trellis, conv_encode

QPSK, PSK8 = build_qpsk_trellis(), build_8psk_trellis()


def verdict(n, ok, detail):
    ACCEPTANCE[n] = (bool(ok), detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def steady_mean(records, field, lo=50, hi=100):
    return float(np.mean([getattr(r, field) for r in records if lo <= r.interval < hi]))


def test_c01_rvq_bit_formulas():
    t0 = time.perf_counter()
    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(["rvq-report", "--M", "100", "--K", "10", "--z", "3"])
    elapsed = time.perf_counter() - t0
    fields = dict(line.split(" = ") for line in buf.getvalue().splitlines())
    loss = float(fields["bits_required_loss"])
    unit = float(fields["bits_required_unit"])
    ok = code == 0 and abs(loss - 99.34) <= 0.01 and abs(unit - 13.4701) <= 1e-4 and elapsed < 1.0
    verdict(1, ok, f"loss={loss:.4f} unit={unit:.5f} t={elapsed:.2f}s")


def test_c02_rvq_closed_form_vs_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    worst, bound_ok = 0.0, True
    for M in (2, 4, 8):
        for b in (0, 2, 4, 8):
            xi = rvq_error_exact(2**b, M)
            mean, se = rvq_monte_carlo(M, b, 100_000, rng)
            worst = max(worst, abs(mean - (1.0 - xi)) / se)
            bound_ok &= xi <= rvq_error_bound(b, M)
    elapsed = time.perf_counter() - t0
    verdict(2, worst <= 3.0 and bound_ok and elapsed < 120,
            f"max |mc - (1-xi)| = {worst:.2f} se, bound holds={bound_ok}, t={elapsed:.1f}s")


def test_c03_viterbi_exactness():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    worst = 0.0
    for trellis in (QPSK, PSK8):
        base = psk_points(trellis.alphabet_size)
        for M in (4, 6, 8):
            pts = np.broadcast_to(initial_scale(M) * base, (M, base.size))
            hbar = random_cdi(rng, M, users=1000)
            got = viterbi_quantize(hbar, trellis, pts).metric
            want = exhaustive_metrics(hbar, pts, path_table(trellis, M))
            worst = max(worst, float(np.max(np.abs(got - want))))
    example = conv_encode(QPSK, [1, 0, 0]).tolist()
    rec = reconstruct([1, 0, 0], QPSK, np.broadcast_to(psk_points(4) / math.sqrt(3), (3, 4)))
    rec_ok = np.allclose(rec, np.array([-1, 1j, -1]) / math.sqrt(3))
    elapsed = time.perf_counter() - t0
    verdict(3, worst < 1e-12 and example == [2, 1, 2] and rec_ok and elapsed < 60,
            f"max metric gap={worst:.1e} example={example} t={elapsed:.1f}s")


def test_c04_differential_synchronisation():
    t0 = time.perf_counter()
    M, eps = 100, 0.9881
    ok, budgets = True, []
    for trellis in (QPSK, PSK8):
        proc = GaussMarkovProcess(eps, M, np.random.default_rng(4))
        user = DifferentialSession(trellis, M, eps)
        bs = DifferentialSession(trellis, M, eps)
        h = proc.current
        for _ in range(100):
            bits, rec = user.user_step(h)
            ok &= bits.size == M * trellis.bits_per_stage
            ok &= np.array_equal(bs.bs_step(bits), rec)
            ok &= user.same_state(bs)
            h = proc.step()
        budgets.append(bits.size)
    elapsed = time.perf_counter() - t0
    verdict(4, ok and budgets == [M, 2 * M] and elapsed < 10,
            f"bits/interval qpsk={budgets[0]} 8psk={budgets[1]} t={elapsed:.1f}s")


def test_c05_mean_channel_variation():
    t0 = time.perf_counter()
    M, eps = 100, 0.9881
    chains, steps = 100, 1000  # 10^5 Gauss-Markov steps
    proc = GaussMarkovProcess(eps, M, np.random.default_rng(5), users=chains)
    prev = normalize_cdi(proc.current)
    total = 0.0
    for _ in range(steps):
        cur = normalize_cdi(proc.step())
        total += np.abs(prev - cur).sum()
        prev = cur
    d_mean = total / (chains * steps * M)
    target = differential_scale(eps, M)
    rel = abs(d_mean / target - 1.0)
    elapsed = time.perf_counter() - t0
    verdict(5, rel <= 0.02 and abs(target - 0.013672) < 1e-6 and elapsed < 30,
            f"empirical={d_mean:.6f} closed form={target:.6f} rel err={rel:.2%} t={elapsed:.1f}s")


def test_c06_steady_state_sum_rates():
    t0 = time.perf_counter()
    expected = {0.9881: 60.0, 0.9363: 52.0, 0.7895: 39.0}
    got = {}
    for eps in expected:
        cfg = ExperimentConfig(scheme="differential_tcq", constellation="qpsk", M=100, K=10,
                               snr_db=10.0, epsilon=eps, intervals=100, trials=200, seed=6)
        got[eps] = steady_mean(run_temporal_experiment(cfg).records, "se_zf")
    elapsed = time.perf_counter() - t0
    ok = all(abs(got[e] / expected[e] - 1.0) <= 0.15 for e in expected) and elapsed < 1200
    verdict(6, ok, " ".join(f"eps={e}: {got[e]:.1f} (ref {expected[e]:.0f})" for e in expected)
            + f" t={elapsed:.0f}s")


def test_c07_precoding_closed_forms():
    t0 = time.perf_counter()
    cfg = ExperimentConfig(scheme="perfect_cdi", M=100, K=10, snr_db=10.0, epsilon=0.0,
                           intervals=1, trials=1000, seed=7)
    r = run_temporal_experiment(cfg).records[0]
    elapsed = time.perf_counter() - t0
    ok = abs(r.sinr_zf_mean / 90 - 1) <= 0.1 and abs(r.sinr_mf_mean / 10 - 1) <= 0.1 and elapsed < 120
    verdict(7, ok, f"ZF mean SINR={r.sinr_zf_mean:.2f} (90) MF={r.sinr_mf_mean:.3f} (10) t={elapsed:.1f}s")


def _spatial_bf(constellation, topology, zt):
    cfg = ExperimentConfig(scheme="spatial_tcq", channel="spatial", constellation=constellation,
                           topology=topology, zt=zt, M=100, K=1, trials=1000, seed=8)
    r = run_spatial_experiment(cfg).records[0]
    return r.bf_gain, r.bf_gain_stderr


def _greater(a, b, z=1.6449):
    """One-sided test of mean(a) > mean(b) at 95% confidence."""
    return (a[0] - b[0]) / math.hypot(a[1], b[1]) > z


def test_c08_spatial_orderings():
    t0 = time.perf_counter()
    g = {(c, t): _spatial_bf(c, t, 0.99) for c in ("qpsk", "8psk") for t in ("ula", "ura")}
    ula_over_ura = all(_greater(g[c, "ula"], g[c, "ura"]) for c in ("qpsk", "8psk"))
    psk8_over_qpsk = all(_greater(g["8psk", t], g["qpsk", t]) for t in ("ula", "ura"))
    full = _spatial_bf("qpsk", "ula", 1.0)[0]
    elapsed = time.perf_counter() - t0
    detail = (
        "zt=0.99 BF gain "
        + " ".join(f"{c}/{t}={g[c, t][0]:.1f}+-{g[c, t][1]:.1f}" for c, t in g)
        + f"; ULA>URA={ula_over_ura} 8PSK>QPSK={psk8_over_qpsk} zt=1 QPSK ULA={full:.1f} t={elapsed:.0f}s"
    )
    verdict(8, ula_over_ura and psk8_over_qpsk and full >= 50 and elapsed < 300, detail)


def test_c09_tracking_beats_memoryless():
    t0 = time.perf_counter()
    base = ExperimentConfig(constellation="qpsk", M=100, K=1, epsilon=0.9881,
                            intervals=100, trials=1000, seed=9)
    diff = steady_mean(run_temporal_experiment(base.replace(scheme="differential_tcq")).records, "bf_gain")
    mem = steady_mean(run_temporal_experiment(base.replace(scheme="memoryless_tcq")).records, "bf_gain")
    elapsed = time.perf_counter() - t0
    verdict(9, diff > mem and elapsed < 600,
            f"steady BF gain differential={diff:.2f} memoryless={mem:.2f} t={elapsed:.0f}s")


def _csv_bytes(runner, cfg, workers):
    buf = io.StringIO()
    write_csv(runner(cfg, workers=workers).records, buf)
    return buf.getvalue().encode()


def test_c10_determinism():
    temporal = ExperimentConfig(M=100, K=10, epsilon=0.9363, intervals=10, trials=6, seed=10)
    spatial = ExperimentConfig(scheme="spatial_tcq", channel="spatial", zt=0.9, topology="ura",
                               M=64, K=4, trials=12, seed=10)
    same = True
    for runner, cfg in ((run_temporal_experiment, temporal), (run_spatial_experiment, spatial)):
        outputs = [_csv_bytes(runner, cfg, w) for w in (1, 1, 2, 3)]
        same &= all(o == outputs[0] for o in outputs)
    verdict(10, same, f"temporal and spatial CSV identical across reruns and workers 1/2/3: {same}")
