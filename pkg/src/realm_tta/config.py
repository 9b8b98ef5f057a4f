"""Run configuration: a flat ``key = value`` text format with documented defaults."""

from __future__ import annotations

import dataclasses
import math
import typing
from dataclasses import dataclass, fields


class ConfigError(ValueError):
    pass


AUTO = "auto"


@dataclass
class RunConfig:
    # data
    n_classes: int = 3
    d_in: int = 2
    n_source: int = 600
    n_target: int = 2000
    n_heldout: int = 2000
    blob_separation: float = 3.0
    corruption: str = "gaussian_noise"
    severity: int = 5
    source_csv: str = ""
    target_csv: str = ""
    seed: int = 7
    # model
    d_feat: int = 32
    feature_scale: float = 0.2
    pretrain_epochs: int = 50
    pretrain_lr: float = 0.1
    pretrain_floor: float = 0.9
    freeze_shift: bool = False
    # strategy
    strategy: str = "REALM"
    use_squared: bool = False
    use_scale_factor: bool = False
    use_div_gate: bool = True
    # optimizer
    lr_theta: float = 0.01
    momentum: float = 0.9
    lr_alpha_lambda: typing.Optional[float] = None  # auto: 2 * lr_theta
    # robust loss
    alpha0: float = 0.15
    lambda0: typing.Optional[float] = None  # auto: 0.4 * ln(n_classes)
    scale_c: float = 1.0
    # diversity gate
    ema_decay: float = 0.9
    d: float = 0.4
    cos_space: str = "centered"
    # collapse detector
    collapse_window: int = 200
    collapse_frac: float = 0.9
    # output
    out_dir: str = "runs"

    @property
    def resolved_lambda0(self) -> float:
        return 0.4 * math.log(self.n_classes) if self.lambda0 is None else self.lambda0

    @property
    def resolved_lr_alpha_lambda(self) -> float:
        return 2.0 * self.lr_theta if self.lr_alpha_lambda is None else self.lr_alpha_lambda

    def replace(self, **changes) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    def to_text(self) -> str:
        return "".join(f"{f.name} = {format_value(getattr(self, f.name))}\n" for f in fields(self))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


_TYPES = typing.get_type_hints(RunConfig)


def format_value(value) -> str:
    if value is None:
        return AUTO
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def parse_value(key: str, text: str):
    if key not in _TYPES:
        raise ConfigError(f"unknown config key {key!r}")
    kind = _TYPES[key]
    text = text.strip()
    optional = typing.get_origin(kind) is typing.Union
    if optional:
        if text.lower() == AUTO:
            return None
        kind = next(a for a in typing.get_args(kind) if a is not type(None))
    try:
        if kind is bool:
            low = text.lower()
            if low in ("true", "1", "yes", "on"):
                return True
            if low in ("false", "0", "no", "off"):
                return False
            raise ValueError(text)
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        return text
    except ValueError:
        raise ConfigError(f"bad value for {key}: {text!r}") from None


def parse_text(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse ``key = value`` lines; ``#`` starts a comment. Unknown keys raise ``ConfigError``."""
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        values[key] = parse_value(key, value)
    return (base or RunConfig()).replace(**values)


def load(path) -> RunConfig:
    with open(path) as fh:
        return parse_text(fh.read())


def apply_overrides(cfg: RunConfig, pairs: list[str]) -> RunConfig:
    """Apply ``['--key', 'value', ...]`` overrides (``--key=value`` also accepted)."""
    changes = {}
    i = 0
    while i < len(pairs):
        tok = pairs[i]
        if not tok.startswith("--"):
            raise ConfigError(f"unexpected argument {tok!r}")
        key = tok[2:].replace("-", "_")
        if "=" in key:
            key, value = key.split("=", 1)
            i += 1
        else:
            if i + 1 >= len(pairs):
                raise ConfigError(f"missing value for {tok}")
            value = pairs[i + 1]
            i += 2
        changes[key] = parse_value(key, value)
    return cfg.replace(**changes)
