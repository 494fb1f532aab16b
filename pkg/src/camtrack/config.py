"""Structured-text configuration: one key per tunable, flags override file.

The file is TOML with one section per module; every key listed in the
schema below (and nothing else) is accepted. CLI flags use the same
dotted names, so the mapping between file keys and flags is one-to-one.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .classifier import ClassifierParams
from .errors import ConfigError
from .kalman import KalmanParams
from .moments import MomentsParams
from .pipeline_sim import Channel, DEFAULT_CHANNELS, SimConfig
from .tracker import TrackerConfig

# Defaults come from the module dataclasses so they are defined once.
_CLASSIFIER = ClassifierParams()
_KALMAN = KalmanParams()
_MOMENTS = MomentsParams()
_TRACKER = TrackerConfig()
_SIM = SimConfig()

# (type, default) per key; "channels" is a list of name/direction/bpp tables.
_SCHEMA: dict[str, dict[str, tuple[str, Any]]] = {
    "imaging": {
        "matrix": ("str", "bt709"),
    },
    "classifier": {
        "h_t": ("int", _CLASSIFIER.h_t),
        "s_t": ("int", _CLASSIFIER.s_t),
        "v_t": ("int", _CLASSIFIER.v_t),
        "a_t": ("int", _CLASSIFIER.a_t),
        "alpha": ("float", _CLASSIFIER.alpha),
        "beta": ("float", _CLASSIFIER.beta),
        "gamma": ("float", _CLASSIFIER.gamma),
    },
    "kalman": {
        "q": ("float", _KALMAN.q),
        "r": ("float", _KALMAN.r),
        "p0": ("float", _KALMAN.p0),
    },
    "moments": {
        "kernel": ("str", _MOMENTS.kernel),
        "radius_factor": ("float", _MOMENTS.radius_factor),
        "size_cal": ("float", _MOMENTS.size_cal),
    },
    "tracker": {
        "max_iters": ("int", _TRACKER.max_iters),
        "converge_eps": ("float", _TRACKER.converge_eps),
        "size_ratio_t": ("float", _TRACKER.size_ratio_t),
        "workers": ("int", _TRACKER.workers),
        "search_margin": ("float", _TRACKER.search_margin),
        "start_from": ("str", _TRACKER.start_from),
        "mean_over_mask": ("bool", _TRACKER.mean_over_mask),
    },
    "sim": {
        "width": ("int", _SIM.width),
        "height": ("int", _SIM.height),
        "fps": ("float", _SIM.fps),
        "regions": ("int", _SIM.regions),
        "frames_per_region": ("int", _SIM.frames_per_region),
        "group_size": ("int", _SIM.group_size),
        "max_bandwidth": ("float", _SIM.max_bandwidth),
        "overhead": ("float", _SIM.overhead),
        "group_tracking": ("bool", _SIM.group_tracking),
        "channels": ("channels", None),
    },
    "bench": {
        "formats": ("strlist", ["csv", "json", "svg"]),
    },
}


def config_keys() -> list[str]:
    """All dotted keys, for flag generation and docs."""
    return [f"{s}.{k}" for s, keys in _SCHEMA.items() for k in keys]


def _coerce(kind: str, raw: Any, key: str) -> Any:
    try:
        if kind == "int":
            if isinstance(raw, bool):
                raise ValueError("boolean given")
            return int(raw)
        if kind == "float":
            if isinstance(raw, bool):
                raise ValueError("boolean given")
            return float(raw)
        if kind == "bool":
            if isinstance(raw, bool):
                return raw
            text = str(raw).strip().lower()
            if text in ("1", "true", "yes", "on"):
                return True
            if text in ("0", "false", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {raw!r}")
        if kind == "str":
            return str(raw)
        if kind == "strlist":
            if isinstance(raw, str):
                return [p.strip() for p in raw.split(",") if p.strip()]
            return [str(p) for p in raw]
        if kind == "channels":
            return _coerce_channels(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {exc}") from exc
    raise ConfigError(f"unknown schema kind {kind!r} for {key}")


def _coerce_channels(raw: Any) -> tuple[Channel, ...]:
    if raw is None:
        return DEFAULT_CHANNELS
    if isinstance(raw, str):
        # CLI syntax: "name:direction:bpp,name:direction:bpp,..."
        entries = []
        for chunk in raw.split(","):
            name, direction, bpp = chunk.strip().split(":")
            entries.append(Channel(name, direction, int(bpp)))
        return tuple(entries)
    entries = []
    for table in raw:
        entries.append(
            Channel(
                str(table["name"]),
                str(table["direction"]),
                int(table["bits_per_pixel"]),
            )
        )
    return tuple(entries)


@dataclass(eq=False)
class AppConfig:
    """Validated values for every config key, plus module-config builders."""

    values: dict[str, dict[str, Any]] = field(default_factory=dict)

    @classmethod
    def defaults(cls) -> "AppConfig":
        return cls(
            {s: {k: default for k, (_, default) in keys.items()}
             for s, keys in _SCHEMA.items()}
        )

    def set(self, dotted_key: str, raw: Any) -> None:
        if "." not in dotted_key:
            raise ConfigError(f"config key must be section.name: {dotted_key!r}")
        section, key = dotted_key.split(".", 1)
        if section not in _SCHEMA or key not in _SCHEMA[section]:
            raise ConfigError(f"unknown config key {dotted_key!r}")
        kind = _SCHEMA[section][key][0]
        self.values[section][key] = _coerce(kind, raw, dotted_key)

    def get(self, dotted_key: str) -> Any:
        section, key = dotted_key.split(".", 1)
        return self.values[section][key]

    # -- module config builders (each re-validates its own invariants) --

    def classifier_params(self) -> ClassifierParams:
        return ClassifierParams(**self.values["classifier"])

    def kalman_params(self) -> KalmanParams:
        return KalmanParams(**self.values["kalman"])

    def moments_params(self) -> MomentsParams:
        return MomentsParams(**self.values["moments"])

    def tracker_config(self) -> TrackerConfig:
        return TrackerConfig(
            classifier=self.classifier_params(),
            kalman=self.kalman_params(),
            moments=self.moments_params(),
            **self.values["tracker"],
        )

    def sim_config(self) -> SimConfig:
        values = dict(self.values["sim"])
        channels = values.pop("channels")
        return SimConfig(
            channels=channels if channels is not None else DEFAULT_CHANNELS,
            **values,
        )

    @property
    def matrix(self) -> str:
        return self.values["imaging"]["matrix"]

    @property
    def bench_formats(self) -> list[str]:
        return list(self.values["bench"]["formats"])


def load_config(path: Optional[str] = None) -> AppConfig:
    """Defaults, overlaid with the TOML file when given.

    Unknown sections or keys are rejected so typos fail loudly; values
    are validated both here (types) and by the module dataclasses
    (invariants) when the config is built.
    """
    cfg = AppConfig.defaults()
    if path is None:
        return cfg
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    try:
        data = tomllib.loads(p.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{p}: {exc}") from exc
    for section, keys in data.items():
        if section not in _SCHEMA:
            raise ConfigError(f"{p}: unknown config section [{section}]")
        if not isinstance(keys, dict):
            raise ConfigError(f"{p}: [{section}] must be a table")
        for key, raw in keys.items():
            if key not in _SCHEMA[section]:
                raise ConfigError(f"{p}: unknown config key {section}.{key}")
            cfg.set(f"{section}.{key}", raw)
    return cfg
