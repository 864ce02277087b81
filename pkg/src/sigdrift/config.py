"""Run configuration: defaults, flat config files, environment, overrides.

Config files are flat ``key = value`` lines (# starts a comment).  Keys
match the RunConfig field names.  Precedence, weakest first: built-in
defaults, SIGDRIFT_SEED, config file, command-line flags.
"""
from __future__ import annotations

import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .datagen import CorpusParams
from .detect import DetectorThresholds
from .errors import ParseError
from .evaluate import ExperimentConfig

ENV_SEED = "SIGDRIFT_SEED"


@dataclass
class RunConfig:
    seed: int = 0
    jobs: int = 0  # 0 means one worker per available core
    grid_length: int = 360
    trial_length: int = 30
    nodes: int = 31
    raw_length: int = 6486
    parameter: str = "throughput"
    similarity_floor: float = 0.60
    distance_ceiling: float = 0.20
    attenuation_ceiling: float = 0.50
    scan_window: int = 6
    cusum_slack: float = 0.5
    cusum_interval: float = 5.0
    snr_segments: int = 6
    snr_mode: str = "segments"
    monitor_fraction: float = 0.2
    n_changed: int = 3000
    n_noisy: int = 3000
    distortion_fraction: float = 0.5
    attenuation_share: float = 0.10
    attenuation_low: float = 0.93
    attenuation_high: float = 0.98
    spike_width: int = 3
    spike_magnitude: float = 7.0
    awgn_db: float = 20.0
    changed_segment: int = 90
    paper_faithful: bool = False
    repeats: int = 30
    sample_sizes: tuple[int, ...] = (1000, 2000, 3000, 4000, 5000)
    detectors: tuple[str, ...] = ("sw", "snr", "cusum")
    sensitivity_levels: tuple[float, ...] = (0.5, 0.25, 0.0)

    def as_dict(self) -> dict:
        payload = asdict(self)
        for key, value in payload.items():
            if isinstance(value, tuple):
                payload[key] = list(value)
        return payload

    def thresholds(self) -> DetectorThresholds:
        return DetectorThresholds(self.similarity_floor, self.distance_ceiling,
                                  self.attenuation_ceiling, self.scan_window)

    def corpus_params(self) -> CorpusParams:
        return CorpusParams(
            nodes=self.nodes,
            raw_length=self.raw_length,
            grid_length=self.grid_length,
            parameter=self.parameter,
            spike_width=self.spike_width,
            spike_magnitude=self.spike_magnitude,
            attenuation_low=self.attenuation_low,
            attenuation_high=self.attenuation_high,
            awgn_db=self.awgn_db,
            attenuation_share=self.attenuation_share,
            changed_segment=self.changed_segment,
            paper_faithful=self.paper_faithful,
        )

    def experiment_config(self) -> ExperimentConfig:
        return ExperimentConfig(
            n_changed=self.n_changed,
            n_noisy=self.n_noisy,
            distortion_fraction=self.distortion_fraction,
            sample_sizes=self.sample_sizes,
            repeats=self.repeats,
            detectors=self.detectors,
            thresholds=self.thresholds(),
            cusum_slack=self.cusum_slack,
            cusum_interval=self.cusum_interval,
            snr_segments=self.snr_segments,
            snr_mode=self.snr_mode,
            monitor_fraction=self.monitor_fraction,
            corpus=self.corpus_params(),
        )

    def effective_jobs(self) -> int:
        return self.jobs if self.jobs > 0 else (os.cpu_count() or 1)


def _coerce(name: str, kind, raw: str):
    raw = raw.strip()
    if kind is int:
        return int(raw)
    if kind is float:
        return float(raw)
    if kind is bool:
        low = raw.lower()
        if low in ("true", "1", "yes", "on"):
            return True
        if low in ("false", "0", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if kind is str:
        return raw
    if kind == tuple[int, ...]:
        return tuple(int(p) for p in raw.split(",") if p.strip())
    if kind == tuple[float, ...]:
        return tuple(float(p) for p in raw.split(",") if p.strip())
    if kind == tuple[str, ...]:
        return tuple(p.strip() for p in raw.split(",") if p.strip())
    raise ValueError(f"unsupported config field type for {name}")


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}
_TYPE_OBJECTS = {
    "int": int, "float": float, "bool": bool, "str": str,
    "tuple[int, ...]": tuple[int, ...],
    "tuple[float, ...]": tuple[float, ...],
    "tuple[str, ...]": tuple[str, ...],
}


def parse_config_file(path) -> dict:
    """Read a flat key = value file into a typed override dict."""
    path = Path(path)
    overrides = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").split("\n"), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ParseError(f"{path}:{lineno}: expected 'key = value'")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ParseError(f"{path}:{lineno}: unknown config key {key!r}")
        kind = _TYPE_OBJECTS.get(_FIELD_TYPES[key], _FIELD_TYPES[key])
        try:
            overrides[key] = _coerce(key, kind, raw)
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
    return overrides


def load_config(config_path=None, cli_overrides: dict | None = None) -> RunConfig:
    """Layer defaults, SIGDRIFT_SEED, the config file, then CLI flags."""
    config = RunConfig()
    env_seed = os.environ.get(ENV_SEED)
    if env_seed is not None:
        try:
            config.seed = int(env_seed)
        except ValueError:
            raise ParseError(f"{ENV_SEED} must be an integer, got {env_seed!r}") from None
    if config_path is not None:
        for key, value in parse_config_file(config_path).items():
            setattr(config, key, value)
    for key, value in (cli_overrides or {}).items():
        if value is not None:
            setattr(config, key, value)
    return config
