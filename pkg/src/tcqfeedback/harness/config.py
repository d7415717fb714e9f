"""Experiment configuration: flat ``key = value`` files plus CLI overrides."""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..channels import kmh_to_ms, temporal_coefficient
from ..errors import ConfigError

SCHEMES = ("memoryless_tcq", "differential_tcq", "spatial_tcq", "perfect_cdi")
CONSTELLATIONS = ("qpsk", "8psk")
CHANNELS = ("gauss_markov", "spatial", "trace")
TOPOLOGIES = ("ula", "ura")
SWEEPABLE = ("q", "K", "M", "zt", "snr_db", "speed_kmh", "epsilon")

_INT_KEYS = {"M", "K", "intervals", "trials", "seed", "bits", "mc_trials"}
_FLOAT_KEYS = {"q", "snr_db", "epsilon", "speed_kmh", "carrier_hz", "interval_s", "zt", "z_db"}
_ALIASES = {"m": "M", "k": "K", "snr": "snr_db", "z": "z_db", "trace": "trace_path"}


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: str = "differential_tcq"
    constellation: str = "qpsk"
    M: int = 100
    K: int = 10
    snr_db: float = 10.0
    channel: str = "gauss_markov"
    epsilon: float | None = None
    speed_kmh: float | None = None
    carrier_hz: float = 2.5e9
    interval_s: float = 5e-3
    zt: float | None = None
    topology: str = "ula"
    trace_path: str | None = None
    intervals: int = 100
    trials: int = 200
    seed: int = 0
    z_db: float = 3.0
    bits: int | None = None
    mc_trials: int = 0
    dump_sinr: str | None = field(default=None, compare=False)
    sweep: tuple = field(default=(), compare=False)

    @property
    def q(self) -> float:
        return self.M / self.K

    @property
    def rho(self) -> float:
        return 10.0 ** (self.snr_db / 10.0)

    @property
    def resolved_epsilon(self) -> float | None:
        if self.epsilon is not None:
            return self.epsilon
        if self.speed_kmh is not None:
            return temporal_coefficient(kmh_to_ms(self.speed_kmh), self.carrier_hz, self.interval_s)
        return None

    def config_hash(self) -> str:
        d = dataclasses.asdict(self)
        for k in ("dump_sinr", "sweep"):
            d.pop(k)
        blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def validate(self, kind: str | None = None) -> "ExperimentConfig":
        """Raise :class:`ConfigError` on any invariant violation; returns ``self``."""
        if self.scheme not in SCHEMES:
            raise ConfigError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if self.constellation not in CONSTELLATIONS:
            raise ConfigError(f"constellation must be one of {CONSTELLATIONS}")
        if self.channel not in CHANNELS:
            raise ConfigError(f"channel must be one of {CHANNELS}")
        if not (self.M >= self.K >= 1):
            raise ConfigError(f"need M >= K >= 1, got M={self.M}, K={self.K}")
        if self.intervals < 1 or self.trials < 1:
            raise ConfigError("intervals and trials must be >= 1")
        if self.epsilon is not None and self.speed_kmh is not None:
            raise ConfigError("give either epsilon or speed_kmh, not both")
        if self.epsilon is not None and not 0 <= self.epsilon <= 1:
            raise ConfigError("epsilon must lie in [0, 1]")
        if self.speed_kmh is not None and self.speed_kmh < 0:
            raise ConfigError("speed must be non-negative")
        if kind == "temporal":
            if self.channel == "spatial":
                raise ConfigError("temporal experiments need a gauss_markov or trace channel")
            if self.scheme == "spatial_tcq":
                raise ConfigError("spatial_tcq belongs to spatial experiments")
            if self.zt is not None:
                raise ConfigError("zt is only valid for the spatial channel")
            if self.channel == "gauss_markov" and self.resolved_epsilon is None:
                raise ConfigError("gauss_markov channel needs epsilon or speed_kmh")
            if self.channel == "trace":
                if self.trace_path is None:
                    raise ConfigError("trace channel needs trace_path")
                if self.scheme == "differential_tcq" and self.resolved_epsilon is None:
                    raise ConfigError("differential TCQ on a trace needs epsilon or speed_kmh for its scale")
        if kind == "spatial":
            if self.channel != "spatial":
                raise ConfigError("spatial experiments need channel = spatial")
            if self.scheme == "differential_tcq":
                raise ConfigError("differential_tcq needs a temporal channel")
            if self.zt is None or not 0 <= self.zt <= 1:
                raise ConfigError("spatial channel needs zt in [0, 1]")
            if self.epsilon is not None or self.speed_kmh is not None:
                raise ConfigError("epsilon/speed are not valid for the spatial channel")
            if self.topology not in TOPOLOGIES:
                raise ConfigError(f"topology must be one of {TOPOLOGIES}")
            if self.topology == "ura" and math.isqrt(self.M) ** 2 != self.M:
                raise ConfigError(f"URA needs a square M, got {self.M}")
        return self


def _coerce(key: str, value):
    if value is None:
        return None
    if isinstance(value, str) and value.strip().lower() in ("", "none", "na"):
        return None
    try:
        if key in _INT_KEYS:
            f = float(value)
            if f != int(f):
                raise ValueError(f"{value!r} is not an integer")
            return int(f)
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError as exc:
        raise ConfigError(f"{key}: {exc}") from None
    return str(value).strip().lower() if key in ("scheme", "constellation", "channel", "topology") else value


def _parse_sweep(text: str) -> tuple:
    parts = str(text).replace(",", " ").split()
    if not parts:
        return ()
    name = _ALIASES.get(parts[0], parts[0])
    if name not in SWEEPABLE:
        raise ConfigError(f"cannot sweep {parts[0]!r}; choose from {SWEEPABLE}")
    if len(parts) < 2:
        raise ConfigError("sweep needs at least one value")
    return (name, tuple(_coerce(name, v) for v in parts[1:]))


def from_mapping(values: dict, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Build a config from string or typed values; ``q`` derives ``K = M / q``."""
    known = {f.name for f in dataclasses.fields(ExperimentConfig)}
    updates = {}
    q = None
    for raw_key, raw in values.items():
        if raw is None:
            continue
        key = _ALIASES.get(raw_key, raw_key)
        if key == "q":
            q = _coerce("q", raw)
            continue
        if key == "sweep":
            updates["sweep"] = raw if isinstance(raw, tuple) else _parse_sweep(raw)
            continue
        if key not in known:
            raise ConfigError(f"unknown configuration key {raw_key!r}")
        updates[key] = _coerce(key, raw)
    cfg = (base or ExperimentConfig()).replace(**updates)
    if q is not None:
        cfg = with_q(cfg, q)
    return cfg


def with_q(cfg: ExperimentConfig, q: float) -> ExperimentConfig:
    if q <= 0:
        raise ConfigError("q must be positive")
    K = cfg.M / q
    if abs(K - round(K)) > 1e-9:
        raise ConfigError(f"q={q} does not divide M={cfg.M} into an integer K")
    return cfg.replace(K=int(round(K)))


def read_config_file(path) -> dict:
    """Read a flat ``key = value`` file (``#`` comments) into a dict of strings."""
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",), interpolation=None)
    parser.optionxform = str
    try:
        parser.read_string("[experiment]\n" + text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return dict(parser["experiment"])


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    cfg = from_mapping(read_config_file(path))
    return from_mapping(overrides or {}, cfg)


def preset_names() -> list[str]:
    folder = resources.files(__package__) / "presets"
    return sorted(p.name[:-4] for p in folder.iterdir() if p.name.endswith(".cfg"))


def preset_path(name: str):
    path = resources.files(__package__) / "presets" / f"{name}.cfg"
    if not path.is_file():
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(preset_names())}")
    return path
