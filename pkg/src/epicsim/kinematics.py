"""Agent state, first-order motion integration and the kinematic guardrail."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def vec3(x: float = 0.0, y: float = 0.0, z: float = 0.0) -> np.ndarray:
    return np.array([x, y, z], dtype=float)


@dataclass(frozen=True)
class Volume:
    """Axis-aligned mission box, meters."""

    lo: np.ndarray = field(default_factory=lambda: vec3(0.0, 0.0, 0.0))
    hi: np.ndarray = field(default_factory=lambda: vec3(1800.0, 1800.0, 100.0))

    def __post_init__(self):
        object.__setattr__(self, "lo", np.asarray(self.lo, dtype=float))
        object.__setattr__(self, "hi", np.asarray(self.hi, dtype=float))
        if not np.all(self.hi >= self.lo):
            raise ValueError("volume must be nonempty (hi >= lo on every axis)")

    def clamp(self, p: np.ndarray) -> np.ndarray:
        return np.minimum(np.maximum(p, self.lo), self.hi)

    def contains(self, p: np.ndarray, tol: float = 0.0) -> bool:
        return bool(np.all(p >= self.lo - tol) and np.all(p <= self.hi + tol))


@dataclass(frozen=True, eq=False)
class AgentState:
    position: np.ndarray
    velocity: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float))

    def __eq__(self, other):
        if not isinstance(other, AgentState):
            return NotImplemented
        return bool(
            np.array_equal(self.position, other.position)
            and np.array_equal(self.velocity, other.velocity)
        )

    def __repr__(self):
        p = ", ".join(f"{c:g}" for c in self.position)
        v = ", ".join(f"{c:g}" for c in self.velocity)
        return f"AgentState(p=({p}), v=({v}))"


@dataclass(frozen=True)
class KinematicLimits:
    v_max: float = 20.0
    a_max: float = 10.0
    dt: float = 1.0
    volume: Volume = field(default_factory=Volume)

    def __post_init__(self):
        if not self.v_max > 0:
            raise ValueError("v_max must be > 0")
        if not self.a_max > 0:
            raise ValueError("a_max must be > 0")
        if not self.dt > 0:
            raise ValueError("dt must be > 0")


def clamp_manifold(
    proposed_velocity: np.ndarray,
    previous_velocity: np.ndarray,
    limits: KinematicLimits,
) -> np.ndarray:
    """Project a velocity into the reachable set around ``previous_velocity``.

    Sequential clamp: the change relative to ``previous_velocity`` is first
    shrunk radially to ``a_max * dt``, then the result is shrunk radially to
    ``v_max``. Feasible inputs come back unchanged. Both bounds hold whenever
    ``previous_velocity`` itself respects ``v_max``.
    """
    v = np.asarray(proposed_velocity, dtype=float)
    v_prev = np.asarray(previous_velocity, dtype=float)

    step = limits.a_max * limits.dt
    delta = v - v_prev
    d = float(np.sqrt(delta @ delta))
    if d > step:
        v = v_prev + delta * (step / d)

    speed = float(np.sqrt(v @ v))
    if speed > limits.v_max:
        v = v * (limits.v_max / speed)
    return v


def clamp_speed(velocity: np.ndarray, v_max: float) -> np.ndarray:
    v = np.asarray(velocity, dtype=float)
    speed = float(np.sqrt(v @ v))
    if speed > v_max:
        return v * (v_max / speed)
    return v


def integrate(
    state: AgentState, commanded_velocity: np.ndarray, limits: KinematicLimits
) -> AgentState:
    """Advance one step of ``limits.dt`` under a commanded velocity.

    Hitting a wall of the mission volume stops motion along that axis.
    """
    v = clamp_manifold(commanded_velocity, state.velocity, limits)
    raw = state.position + v * limits.dt
    p = limits.volume.clamp(raw)
    hit = p != raw
    if np.any(hit):
        v = np.where(hit, 0.0, v)
    return AgentState(p, v)
