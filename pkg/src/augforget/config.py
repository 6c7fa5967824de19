"""Run configuration: one flat record of every knob, serialisable as key = value text."""

import dataclasses
from dataclasses import dataclass, fields

from . import augment as aug
from .errors import ConfigError
from .training import METHODS, Method


def _floats(text):
    return tuple(float(v) for v in str(text).split(",") if v.strip())


def _ints(text):
    return tuple(int(v) for v in str(text).split(",") if v.strip())


def _words(text):
    return tuple(v.strip() for v in str(text).split(",") if v.strip())


def _bool_or_auto(text):
    value = str(text).strip().lower()
    if value in ("auto", "none", ""):
        return None
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected true/false/auto, got {text!r}")


def _optional_str(text):
    text = str(text).strip()
    return text or None


_PARSERS = {
    "layer_sizes": _ints,
    "angles": _floats,
    "sigmas": _floats,
    "merge_grid": _floats,
    "methods": _words,
    "cka_methods": _words,
    "synthetic": _bool_or_auto,
    "data_dir": _optional_str,
}


@dataclass
class RunConfig:
    seed: int = 1
    data_dir: str = None
    synthetic: bool = None
    data_seed: int = 0
    pool_size: int = 10_000
    heldout_size: int = 2_000
    test_size: int = 2_000
    layer_sizes: tuple = (784, 256, 128, 10)
    lr: float = 0.05
    batch_size: int = 64
    epochs: int = 5
    epochs_second: int = 3
    transforms: str = aug.format_transform_set(aug.default_transform_set())
    policy: str = "uniform"
    beta: float = 1.0
    policy_refresh: int = 1
    method: str = "vanilla"
    methods: tuple = ("vanilla", "replay", "merge")
    replay_fraction: float = 0.5
    replay_mix: float = 0.5
    merge_p: float = 80.0
    merge_k: int = 100
    base_angle: float = 45.0
    angles: tuple = (45.0, 30.0, 15.0, 0.0, -15.0, -30.0, -45.0)
    sd_batches: int = 10
    sd_reference_size: int = 1000
    sigmas: tuple = (0.0, 0.1, 0.5, 1.0, 2.0, 5.0)
    taylor_samples: int = 100_000
    taylor_dim: int = 10
    taylor_scale: float = 1.0
    cka_t1: str = "rotate:45;rotate:30"
    cka_t2: str = "rotate:-45;rotate:-30"
    cka_methods: tuple = ("vanilla", "replay", "merge")
    probe_size: int = 512
    merge_grid: tuple = (20.0, 40.0, 60.0, 80.0, 100.0)
    out: str = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.seed < 0 or self.data_seed < 0:
            raise ConfigError("seeds must be non-negative")
        if len(self.layer_sizes) < 2 or min(self.layer_sizes) < 1:
            raise ConfigError(f"invalid layer_sizes {self.layer_sizes}")
        if self.lr <= 0 or self.batch_size < 1:
            raise ConfigError("lr must be > 0 and batch_size >= 1")
        if min(self.epochs, self.epochs_second) < 0:
            raise ConfigError("epoch counts must be >= 0")
        if self.policy not in ("uniform", "targeted") or self.beta < 0 or self.policy_refresh < 1:
            raise ConfigError("policy must be uniform|targeted with beta >= 0, refresh >= 1")
        for name in (self.method,) + tuple(self.methods) + tuple(self.cka_methods):
            if name not in METHODS:
                raise ConfigError(f"unknown method {name!r}")
        try:
            self.method_spec()
            for text in (self.transforms, self.cka_t1, self.cka_t2):
                aug.parse_transform_set(text)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.sd_batches < 1 or self.sd_reference_size < 1:
            raise ConfigError("sd_batches and sd_reference_size must be >= 1")
        if not self.sigmas or self.taylor_samples < 1 or self.taylor_dim < 1:
            raise ConfigError("taylor settings need a non-empty sigma grid and positive sizes")
        if any(not 0 < p <= 100 for p in self.merge_grid):
            raise ConfigError("merge_grid entries must lie in (0, 100]")
        if self.probe_size < 2:
            raise ConfigError("probe_size must be >= 2")

    def method_spec(self, name=None, **overrides):
        kw = dict(name=name or self.method, replay_fraction=self.replay_fraction,
                  replay_mix=self.replay_mix, merge_p=self.merge_p, merge_k=self.merge_k)
        kw.update(overrides)
        return Method(**kw)

    def transform_set(self):
        return aug.parse_transform_set(self.transforms)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def to_text(self):
        lines = []
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, tuple):
                value = ",".join(_fmt(v) for v in value)
            elif value is None:
                value = "auto" if f.name == "synthetic" else ""
            elif isinstance(value, bool):
                value = "true" if value else "false"
            else:
                value = _fmt(value)
            lines.append(f"{f.name} = {value}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text, **overrides):
        """Parse key = value lines ('#' comments allowed); ``overrides`` win."""
        values = {}
        for lineno, line in enumerate(text.splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, raw = line.partition("=")
            if not sep:
                raise ConfigError(f"line {lineno}: expected key = value")
            values[key.strip()] = raw.strip()
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls.from_mapping(values)

    @classmethod
    def from_mapping(cls, values):
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            if key not in types:
                raise ConfigError(f"unknown config key {key!r}")
            kwargs[key] = _coerce(key, types[key], raw)
        return cls(**kwargs)


def _fmt(v):
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _coerce(key, typ, raw):
    if not isinstance(raw, str):
        return tuple(raw) if isinstance(raw, list) else raw
    try:
        if key in _PARSERS:
            return _PARSERS[key](raw)
        if typ in (int, "int"):
            return int(raw)
        if typ in (float, "float"):
            return float(raw)
        return _optional_str(raw) if key == "out" else raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc
