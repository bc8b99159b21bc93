"""Experiment configuration: a flat ``key = value`` text file plus overrides."""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Tuple

from ..models import ArrivalModel, ServiceModel, heavy_traffic_gap


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    arrival: str = "exp:1"
    service: str = "exp:1"
    n_values: Tuple[int, ...] = (1000, 10000, 100000)
    replications: int = 2000
    seed: int = 20240601
    scaled_horizon: float = 5.0
    eval_times: Tuple[float, ...] = (1.0, 2.0)
    grid_step: Optional[float] = None
    output_dir: str = "tqlab-out"
    # limit samples per eval time; defaults to `replications`
    limit_samples: Optional[int] = None
    fdd_times: Tuple[float, float] = (1.0, 2.0)
    oracle_instances: int = 1000
    oracle_max_n: int = 50
    equivalence_samples: int = 10000
    control_inflation: float = 1.2
    wrong_beta: float = 0.5
    lln_control_slope_factor: float = 1.1
    min_power_replications: int = 30
    # pass thresholds
    ks_thresholds: Dict[float, float] = field(default_factory=lambda: {1.0: 0.08, 2.0: 0.10})
    ks_default_threshold: float = 0.10
    cov_tolerance: float = 0.1
    variance_ratio_tolerance: float = 0.1
    mean_z_threshold: float = 3.0
    lln_threshold: float = 0.1
    littles_threshold: float = 0.25
    equivalence_threshold: float = 0.033
    identity_tolerance: float = 1e-9

    def __post_init__(self):
        if not self.n_values or any(n < 1 for n in self.n_values):
            raise ConfigError("n_values must be positive")
        if self.replications < 2:
            raise ConfigError("replications must be at least 2")
        if any(not 0 < t <= self.scaled_horizon for t in self.eval_times):
            raise ConfigError("eval_times must lie in (0, scaled_horizon]")
        if not 0 < self.fdd_times[0] < self.fdd_times[1]:
            raise ConfigError("fdd_times must satisfy 0 < t1 < t2")
        self.arrival_model
        self.service_model

    @property
    def arrival_model(self) -> ArrivalModel:
        return ArrivalModel.parse(self.arrival)

    @property
    def service_model(self) -> ServiceModel:
        return ServiceModel.parse(self.service)

    @property
    def step(self) -> float:
        return self.grid_step if self.grid_step is not None else self.scaled_horizon * 2.0 ** -10

    @property
    def n_limit(self) -> int:
        return self.limit_samples if self.limit_samples is not None else self.replications

    def ks_threshold(self, t: float) -> float:
        return self.ks_thresholds.get(float(t), self.ks_default_threshold)

    def gap(self) -> float:
        return heavy_traffic_gap(self.arrival_model, self.service_model)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["ks_thresholds"] = {repr(k): v for k, v in sorted(self.ks_thresholds.items())}
        d["n_values"] = list(self.n_values)
        d["eval_times"] = list(self.eval_times)
        d["fdd_times"] = list(self.fdd_times)
        return d

    def digest(self) -> str:
        """Hash of everything that affects results (the output directory does not)."""
        d = self.to_dict()
        d.pop("output_dir")
        return hashlib.sha256(json.dumps(d, sort_keys=True).encode()).hexdigest()[:16]


def _convert(name: str, raw: str):
    f = {f.name: f for f in dataclasses.fields(ExperimentConfig)}.get(name)
    if f is None:
        raise ConfigError(f"unknown config key {name!r}")
    raw = raw.strip()
    try:
        if name == "ks_thresholds":
            pairs = (item.split(":") for item in raw.split(",") if item.strip())
            return {float(k): float(v) for k, v in pairs}
        if name == "n_values":
            return tuple(int(float(x)) for x in raw.split(",") if x.strip())
        if name in ("eval_times", "fdd_times"):
            return tuple(float(x) for x in raw.split(",") if x.strip())
        if name in ("arrival", "service", "output_dir"):
            return raw
        if name in ("grid_step", "limit_samples") and raw.lower() in ("", "none", "default"):
            return None
        if name in ("replications", "seed", "oracle_instances", "oracle_max_n", "equivalence_samples",
                    "min_power_replications", "limit_samples"):
            return int(float(raw))
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"bad value for {name}: {raw!r}") from exc


def parse_overrides(pairs) -> dict:
    """``["key=value", ...]`` to typed keyword arguments."""
    out = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        if not sep:
            raise ConfigError(f"expected key=value, got {pair!r}")
        key = key.strip()
        out[key] = _convert(key, value)
    return out


def load_config(path=None, **overrides) -> ExperimentConfig:
    """Read a config file (``#`` starts a comment) and apply keyword overrides."""
    values = {}
    if path is not None:
        for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            values[key.strip()] = _convert(key.strip(), value)
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)
