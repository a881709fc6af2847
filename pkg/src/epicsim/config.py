"""Scenario configuration and its flat ``dotted.key = value`` text format.

Example::

    # comments start with '#'
    n_agents = 6
    scheme = epic
    link.t_up_steps = 50
    stsi.alpha = 0.9

Unknown keys are errors. Missing keys keep their defaults.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field, fields
from pathlib import Path

from .channel import ChannelParams
from .kinematics import KinematicLimits, Volume, vec3
from .signaling import LinkParams
from .stsi import Scheme, StsiParams


class ConfigError(ValueError):
    """Bad configuration text or a violated configuration invariant."""


@dataclass(frozen=True)
class VolumeSection:
    x_m: float = 1800.0
    y_m: float = 1800.0
    z_m: float = 100.0


@dataclass(frozen=True)
class KinematicsSection:
    v_max: float = 20.0
    a_max: float = 10.0


@dataclass(frozen=True)
class StsiSection:
    alpha: float = 1.0
    tau_stsi_ms: float = 9.73
    tau_stsi_jitter_ms: float = 0.02
    spatial_consistency: bool = False
    d_safe_m: float = 5.0


@dataclass(frozen=True)
class CoordinationSection:
    switch_margin: float = 0.05


@dataclass(frozen=True)
class ScenarioConfig:
    n_agents: int = 6
    n_targets: int = 30
    mission_steps: int = 200
    step_dt: float = 1.0
    inference_hz: float = 100.0
    altitude_m: float = 100.0
    target_speed_mps: float = 10.0
    trials: int = 5
    master_seed: int = 2025
    scheme: Scheme = Scheme.EPIC
    volume: VolumeSection = field(default_factory=VolumeSection)
    kinematics: KinematicsSection = field(default_factory=KinematicsSection)
    channel: ChannelParams = field(default_factory=ChannelParams)
    link: LinkParams = field(default_factory=LinkParams)
    stsi: StsiSection = field(default_factory=StsiSection)
    coordination: CoordinationSection = field(default_factory=CoordinationSection)

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if self.n_agents < 1:
            raise ConfigError("n_agents must be >= 1")
        if self.n_targets < 1:
            raise ConfigError("n_targets must be >= 1")
        if self.mission_steps < 1:
            raise ConfigError("mission_steps must be >= 1")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if not self.step_dt > 0:
            raise ConfigError("step_dt must be > 0")
        if not self.inference_hz > 0:
            raise ConfigError("inference_hz must be > 0")
        ticks = self.inference_hz * self.step_dt
        if abs(ticks - round(ticks)) > 1e-9:
            raise ConfigError("inference_hz * step_dt must be an integer (ticks per step)")
        if not 0 < self.altitude_m <= self.volume.z_m:
            raise ConfigError("altitude_m must lie in (0, volume.z_m]")
        if not self.target_speed_mps >= 0:
            raise ConfigError("target_speed_mps must be >= 0")
        if not 0 <= self.coordination.switch_margin <= 1:
            raise ConfigError("coordination.switch_margin must lie in [0, 1]")
        if min(self.volume.x_m, self.volume.y_m) <= 0:
            raise ConfigError("volume must be nonempty")
        if not 0 <= self.master_seed < 2**64:
            raise ConfigError("master_seed must be a 64-bit unsigned integer")
        # building the derived objects runs their own invariant checks
        try:
            self.stsi_params
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    @property
    def ticks_per_step(self) -> int:
        return int(round(self.inference_hz * self.step_dt))

    @property
    def step_ms(self) -> float:
        return self.step_dt * 1000.0

    @property
    def mission_volume(self) -> Volume:
        return Volume(vec3(), vec3(self.volume.x_m, self.volume.y_m, self.volume.z_m))

    @property
    def limits(self) -> KinematicLimits:
        return KinematicLimits(
            self.kinematics.v_max, self.kinematics.a_max, self.step_dt, self.mission_volume
        )

    @property
    def stsi_params(self) -> StsiParams:
        s = self.stsi
        return StsiParams(
            alpha=s.alpha,
            dt=self.step_dt,
            limits=self.limits,
            tau_stsi_ms=s.tau_stsi_ms,
            tau_stsi_jitter_ms=s.tau_stsi_jitter_ms,
            spatial_consistency=s.spatial_consistency,
            d_safe_m=s.d_safe_m,
        )

    def with_overrides(self, **flat) -> "ScenarioConfig":
        """Copy with dotted-key overrides, e.g. ``{"link.t_up_steps": 50}``."""
        return from_flat({**to_flat(self), **flat})


_SECTIONS = ("volume", "kinematics", "channel", "link", "stsi", "coordination")


def _coerce(value: str, typ, key: str):
    if typ is bool or typ == "bool":
        low = value.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ConfigError(f"{key}: expected a boolean, got {value!r}")
    if typ is int or typ == "int":
        try:
            f = float(value)
        except ValueError:
            raise ConfigError(f"{key}: expected an integer, got {value!r}") from None
        if not f.is_integer():
            raise ConfigError(f"{key}: expected an integer, got {value!r}")
        return int(value) if value.lstrip("+-").isdigit() else int(f)
    if typ is float or typ == "float":
        try:
            f = float(value)
        except ValueError:
            raise ConfigError(f"{key}: expected a number, got {value!r}") from None
        if not math.isfinite(f):
            raise ConfigError(f"{key}: value must be finite")
        return f
    if typ is Scheme or typ == "Scheme":
        try:
            return Scheme(value.lower())
        except ValueError:
            raise ConfigError(f"{key}: scheme must be 'epic' or 'traditional'") from None
    return value


def _field_types(cls) -> dict:
    hints = {}
    for f in fields(cls):
        t = f.type
        hints[f.name] = t.__name__ if isinstance(t, type) else str(t)
    return hints


def known_keys() -> dict[str, str]:
    """Every accepted dotted key mapped to its value type name."""
    out = {}
    for name, typ in _field_types(ScenarioConfig).items():
        if name in _SECTIONS:
            section_cls = {f.name: f.default_factory for f in fields(ScenarioConfig)}[name]
            for sub, subtyp in _field_types(section_cls).items():
                if name == "channel" and sub == "c_light":
                    continue
                out[f"{name}.{sub}"] = subtyp
        else:
            out[name] = typ
    return out


def from_flat(flat: dict) -> ScenarioConfig:
    keys = known_keys()
    top, sections = {}, {s: {} for s in _SECTIONS}
    for key, value in flat.items():
        if key not in keys:
            raise ConfigError(f"unknown config key {key!r}")
        if isinstance(value, str):
            value = _coerce(value, keys[key], key)
        if "." in key:
            sec, sub = key.split(".", 1)
            sections[sec][sub] = value
        else:
            top[key] = value
    defaults = {f.name: f.default_factory for f in fields(ScenarioConfig) if f.name in _SECTIONS}
    try:
        built = {s: dataclasses.replace(defaults[s](), **sections[s]) for s in _SECTIONS}
        return ScenarioConfig(**top, **built)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def to_flat(config: ScenarioConfig) -> dict:
    out = {}
    for key in known_keys():
        if "." in key:
            sec, sub = key.split(".", 1)
            out[key] = getattr(getattr(config, sec), sub)
        else:
            out[key] = getattr(config, key)
    return out


def parse_config(text: str) -> ScenarioConfig:
    flat = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value")
        if key in flat:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
            value = value[1:-1]
        flat[key] = value
    return from_flat(flat)


def load_config(path) -> ScenarioConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, Scheme):
        return value.value
    if isinstance(value, float):
        return repr(value)
    return str(value)


def dump_config(config: ScenarioConfig) -> str:
    return "".join(f"{k} = {format_value(v)}\n" for k, v in to_flat(config).items())
