"""CSV serialisation of result records and SINR sample dumps.

Column order is part of the contract::

    interval, bf_gain_db, se_zf, se_mf, seed, config_hash,
    bf_gain, bf_gain_stderr, sinr_zf_mean, sinr_mf_mean, samples, zf_degenerate
    [, sweep_param, sweep_value]   only when a sweep produced the records

Floats are written with 9 significant digits.  ``zf_degenerate`` counts the
realizations whose quantized user set made ZF undefined; ZF columns average
over the remaining realizations.
"""

from __future__ import annotations

import csv
import dataclasses

from ..errors import TcqError
from .runner import ResultRecord

COLUMNS = (
    "interval", "bf_gain_db", "se_zf", "se_mf", "seed", "config_hash",
    "bf_gain", "bf_gain_stderr", "sinr_zf_mean", "sinr_mf_mean", "samples",
    "zf_degenerate",
)
SWEEP_COLUMNS = ("sweep_param", "sweep_value")

_TYPES = {f.name: f.type for f in dataclasses.fields(ResultRecord)}


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.9g}"
    return str(value)


def _row(record: ResultRecord, columns) -> list[str]:
    return [_fmt(getattr(record, c)) for c in columns]


def write_csv(records, fh) -> None:
    records = list(records)
    columns = COLUMNS + (SWEEP_COLUMNS if any(r.sweep_param for r in records) else ())
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(columns)
    for r in records:
        w.writerow(_row(r, columns))


def emit_csv(records, path) -> None:
    try:
        with open(path, "w", newline="") as fh:
            write_csv(records, fh)
    except OSError as exc:
        raise TcqError(f"cannot write {path}: {exc}") from exc


def _parse(name: str, text: str):
    if text == "":
        return None
    kind = _TYPES[name]
    if kind == "int":
        return int(text)
    if kind == "str" or name in ("config_hash", "sweep_param"):
        return text
    return float(text)


def read_csv(path) -> list[ResultRecord]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if tuple(reader.fieldnames or ())[: len(COLUMNS)] != COLUMNS:
            raise TcqError(f"{path}: unexpected header {reader.fieldnames}")
        return [ResultRecord(**{k: _parse(k, v) for k, v in row.items()}) for row in reader]


def emit_sinr_dump(samples, path) -> None:
    """Per-sample SINRs (linear) for CDF plots: trial, interval, user, sinr_zf, sinr_mf."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("trial", "interval", "user", "sinr_zf", "sinr_mf"))
        trials, intervals, users, _ = samples.shape
        for i in range(trials):
            for t in range(intervals):
                for k in range(users):
                    zf, mf = samples[i, t, k]
                    w.writerow((i, t, k, f"{zf:.9g}", f"{mf:.9g}"))
