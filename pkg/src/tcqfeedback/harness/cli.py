"""``tcqsim`` command line entry point.

Exit codes: 0 success, 2 configuration error, 3 trace/file parse error,
4 runtime error (e.g. degenerate user geometry), 1 anything else.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from ..channels import (
    GaussMarkovProcess,
    load_channel_trace,
    load_trace_csv,
    save_channel_trace,
    save_trace_csv,
)
from ..errors import ConfigError, DegenerateGeometryError, TcqError, TraceFormatError
from .config import ExperimentConfig, from_mapping, load_config, preset_names, preset_path, read_config_file
from .csvio import emit_csv, emit_sinr_dump, write_csv
from .runner import run_rvq_report, run_sweep, trial_generators

EXIT_CONFIG, EXIT_PARSE, EXIT_RUNTIME = 2, 3, 4

log = logging.getLogger("tcqfeedback")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value scenario file")
    p.add_argument("--preset", help="bundled scenario name (see `tcqsim presets`)")
    p.add_argument("--M", type=int)
    p.add_argument("--K", type=int)
    p.add_argument("--q", type=float, help="users ratio; sets K = M / q")
    p.add_argument("--snr-db", type=float)
    p.add_argument("--constellation", choices=("qpsk", "8psk"))
    p.add_argument("--scheme", choices=("memoryless_tcq", "differential_tcq", "spatial_tcq", "perfect_cdi"))
    p.add_argument("--intervals", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="CSV output path (default: stdout)")
    p.add_argument("--dump-sinr", metavar="PATH", help="write per-sample SINRs for CDF plots")
    p.add_argument("--workers", type=int, help="process pool size (default: $TCQFEEDBACK_WORKERS or 1)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tcqsim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    t = sub.add_parser("temporal", help="Gauss-Markov or trace channel, per-interval metrics")
    _common(t)
    t.add_argument("--epsilon", type=float)
    t.add_argument("--speed-kmh", type=float)
    t.add_argument("--trace", dest="trace_path", help="binary channel trace instead of Gauss-Markov")

    s = sub.add_parser("spatial", help="exponentially correlated channel, single interval")
    _common(s)
    s.add_argument("--zt", type=float)
    s.add_argument("--topology", choices=("ula", "ura"))

    r = sub.add_parser("rvq-report", help="RVQ bit requirements and expected SINRs")
    r.add_argument("--config")
    r.add_argument("--preset")
    r.add_argument("--M", type=int)
    r.add_argument("--K", type=int)
    r.add_argument("--q", type=float)
    r.add_argument("--z", dest="z_db", type=float, help="SINR loss target in dB")
    r.add_argument("--snr-db", type=float)
    r.add_argument("--bits", type=int, help="codebook bits for xi (default: ceil of unit-SINR bits)")
    r.add_argument("--mc-trials", type=int, help="run the brute-force oracle (M <= 8, bits <= 12)")
    r.add_argument("--seed", type=int)
    r.add_argument("--out", help="also write the report as a one-row CSV")

    c = sub.add_parser("trace-convert", help="convert channel traces between CSV text and binary")
    c.add_argument("src", nargs="?", help="input trace (.csv text or binary)")
    c.add_argument("dst", help="output trace (.csv text or binary)")
    c.add_argument("--synthesize", action="store_true",
                   help="ignore SRC and write a Gauss-Markov trace laid out trial-major, user, interval")
    c.add_argument("--M", type=int, default=100)
    c.add_argument("--K", type=int, default=1)
    c.add_argument("--epsilon", type=float, default=0.9881)
    c.add_argument("--intervals", type=int, default=100)
    c.add_argument("--trials", type=int, default=1)
    c.add_argument("--seed", type=int, default=0)

    sub.add_parser("presets", help="list bundled scenario files")
    return parser


def _config_from_args(args) -> ExperimentConfig:
    base = load_config(preset_path(args.preset)) if args.preset else None
    if args.config:
        base = from_mapping(read_config_file(args.config), base)
    overrides = {
        k: v for k, v in vars(args).items()
        if k not in ("command", "config", "preset", "out", "workers", "verbose") and v is not None
    }
    if args.command == "temporal":
        if overrides.get("trace_path"):
            overrides.setdefault("channel", "trace")
        if "epsilon" in overrides:
            overrides["speed_kmh"] = "none"
        elif "speed_kmh" in overrides:
            overrides["epsilon"] = "none"
    if args.command == "spatial":
        overrides["channel"] = "spatial"
        if base is None or base.channel != "spatial":
            overrides.setdefault("scheme", "spatial_tcq")
    return from_mapping(overrides, base)


def _run_experiment(args, kind: str) -> int:
    cfg = _config_from_args(args)
    records = []
    dumps = []
    for _, _, result in run_sweep(cfg, kind, workers=args.workers):
        records.extend(result.records)
        if result.sinr_samples is not None:
            dumps.append(result.sinr_samples)
    if args.out:
        emit_csv(records, args.out)
    else:
        write_csv(records, sys.stdout)
    if cfg.dump_sinr and dumps:
        emit_sinr_dump(np.concatenate(dumps, axis=0), cfg.dump_sinr)
    return 0


def _rvq(args) -> int:
    base = load_config(preset_path(args.preset)) if args.preset else None
    if args.config:
        base = from_mapping(read_config_file(args.config), base)
    overrides = {k: v for k, v in vars(args).items()
                 if k in ("M", "K", "q", "z_db", "snr_db", "bits", "mc_trials", "seed") and v is not None}
    cfg = from_mapping(overrides, base)
    report = run_rvq_report(cfg)
    sys.stdout.write(report.to_text())
    if args.out:
        d = report.as_dict()
        with open(args.out, "w") as fh:
            fh.write(",".join(d) + "\n")
            fh.write(",".join("" if v is None else (f"{v:.9g}" if isinstance(v, float) else str(v))
                              for v in d.values()) + "\n")
    return 0


def _is_csv(path: str) -> bool:
    return path.lower().endswith(".csv")


def _trace_convert(args) -> int:
    if args.synthesize:
        chans = []
        for rng in trial_generators(args.seed, args.trials):
            proc = GaussMarkovProcess(args.epsilon, args.M, rng, users=args.K)
            block = [proc.current.copy()] + [proc.step().copy() for _ in range(args.intervals - 1)]
            arr = np.stack(block, axis=1)  # (K, T, M)
            chans.extend(arr.reshape(-1, args.M))
    else:
        if not args.src:
            raise ConfigError("trace-convert needs SRC unless --synthesize is given")
        chans = load_trace_csv(args.src) if _is_csv(args.src) else load_channel_trace(args.src)
    (save_trace_csv if _is_csv(args.dst) else save_channel_trace)(args.dst, chans)
    print(f"wrote {len(chans)} records to {args.dst}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "presets":
            print("\n".join(preset_names()))
            return 0
        if args.command in ("temporal", "spatial"):
            return _run_experiment(args, args.command)
        if args.command == "rvq-report":
            return _rvq(args)
        return _trace_convert(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TraceFormatError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (DegenerateGeometryError, TcqError, RuntimeError) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
