"""Semantic state buffer and the spatio-temporal inference operator.

Each agent keeps one :class:`BeliefEntry` per peer. A delivered packet
re-anchors the entry; between packets the operator damps the anchor
velocity by ``alpha`` per step of age, dead-reckons the position with the
matching geometric series, and passes the velocity through the kinematic
guardrail. The reactive baseline simply holds the anchor.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .kinematics import AgentState, KinematicLimits, clamp_manifold, clamp_speed
from .signaling import AoiCounter, LinkParams, sample_latency_ms


class Scheme(str, enum.Enum):
    EPIC = "epic"
    TRADITIONAL = "traditional"


@dataclass(frozen=True)
class StsiParams:
    alpha: float = 1.0
    dt: float = 1.0
    limits: KinematicLimits = field(default_factory=KinematicLimits)
    tau_stsi_ms: float = 9.73
    tau_stsi_jitter_ms: float = 0.02
    spatial_consistency: bool = False
    d_safe_m: float = 5.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"stsi.alpha must lie in (0, 1], got {self.alpha}")
        if not self.dt > 0:
            raise ValueError("stsi.dt must be > 0")
        if not self.tau_stsi_ms >= 0 or not self.tau_stsi_jitter_ms >= 0:
            raise ValueError("stsi latency parameters must be >= 0")
        if not self.d_safe_m >= 0:
            raise ValueError("stsi.d_safe_m must be >= 0")


@dataclass(frozen=True)
class BeliefEntry:
    anchor_state: AgentState
    anchor_velocity_prev: np.ndarray
    aoi: AoiCounter
    belief: AgentState

    @classmethod
    def fresh(cls, state: AgentState, step: int = 0, v_max: float | None = None) -> "BeliefEntry":
        return apply_packet(
            cls(state, state.velocity, AoiCounter(step, 0), state), state, v_max=v_max
        )


def damping_sum(aoi: int, alpha: float) -> float:
    """Closed form of alpha + alpha**2 + ... + alpha**aoi."""
    if aoi <= 0:
        return 0.0
    if alpha == 1.0:
        return float(aoi)
    return alpha * (1.0 - alpha**aoi) / (1.0 - alpha)


def project_velocity(anchor_v: np.ndarray, aoi: int, alpha: float) -> np.ndarray:
    if aoi < 0:
        raise ValueError("aoi must be >= 0")
    return (alpha**aoi) * np.asarray(anchor_v, dtype=float)


def project_position(
    anchor_p: np.ndarray, anchor_v: np.ndarray, aoi: int, alpha: float, dt: float
) -> np.ndarray:
    if aoi < 0:
        raise ValueError("aoi must be >= 0")
    return np.asarray(anchor_p, dtype=float) + damping_sum(aoi, alpha) * dt * np.asarray(
        anchor_v, dtype=float
    )


def stsi_infer(entry: BeliefEntry, params: StsiParams) -> BeliefEntry:
    """One inference of a stale peer at its current age.

    Position is rebuilt from the anchor on every call rather than
    accumulated, so long silences do not collect rounding drift.
    """
    k = entry.aoi.current
    if k < 1:
        raise ValueError("stsi_infer expects a stale entry (aoi >= 1)")
    anchor = entry.anchor_state
    v = clamp_manifold(
        project_velocity(anchor.velocity, k, params.alpha),
        entry.anchor_velocity_prev,
        params.limits,
    )
    p = project_position(anchor.position, anchor.velocity, k, params.alpha, params.dt)
    p = params.limits.volume.clamp(p)
    return replace(entry, belief=AgentState(p, v), anchor_velocity_prev=v)


def infer_all(entries: Sequence[BeliefEntry], params: StsiParams) -> list[BeliefEntry]:
    """One inference tick over a whole buffer; fresh entries pass through."""
    return [stsi_infer(e, params) if e.aoi.current >= 1 else e for e in entries]


def apply_packet(entry: BeliefEntry, fresh: AgentState, v_max: float | None = None) -> BeliefEntry:
    """Re-anchor on a fresh state and reset the age to zero.

    With ``v_max`` given, the belief velocity is held to the speed limit;
    real agent states already satisfy it, so the belief equals ``fresh``.
    """
    v = fresh.velocity if v_max is None else clamp_speed(fresh.velocity, v_max)
    belief = fresh if v is fresh.velocity else AgentState(fresh.position, v)
    return BeliefEntry(
        anchor_state=fresh,
        anchor_velocity_prev=belief.velocity,
        aoi=AoiCounter(entry.aoi.last_rx_step, 0),
        belief=belief,
    )


def reactive_estimate(entry: BeliefEntry) -> AgentState:
    """Zero-order hold: the baseline acts on the last received state."""
    return entry.anchor_state


def sample_reaction_latency_ms(
    scheme: Scheme | str,
    params: StsiParams,
    link: LinkParams,
    rng: np.random.Generator,
) -> float:
    """Reaction latency of one decision.

    The EPIC draw never reads ``link``; the traditional draw is a link
    latency sample.
    """
    scheme = Scheme(scheme)
    if scheme is Scheme.EPIC:
        return max(params.tau_stsi_ms + params.tau_stsi_jitter_ms * rng.standard_normal(), 0.0)
    return sample_latency_ms(link, rng).latency_ms


def sample_reaction_latencies_ms(
    scheme: Scheme | str,
    params: StsiParams,
    link: LinkParams,
    rng: np.random.Generator,
    n: int,
) -> np.ndarray:
    """Vectorized ``sample_reaction_latency_ms`` with identical stream use."""
    z = rng.standard_normal(n)
    if Scheme(scheme) is Scheme.EPIC:
        return np.maximum(params.tau_stsi_ms + params.tau_stsi_jitter_ms * z, 0.0)
    delta = link.jitter_sigma_ms * z
    if link.jitter_one_sided:
        delta = np.maximum(delta, 0.0)
    return link.tau_base_ms + delta


def separate_beliefs(positions: Sequence[np.ndarray], d_safe: float) -> list[np.ndarray]:
    """Optional spatial-consistency pass over a set of believed positions.

    Any pair closer than ``d_safe`` is pushed apart symmetrically along the
    line joining them until exactly ``d_safe`` apart. Pairs are visited
    once, in index order. Coincident pairs are split along +x.
    """
    out = [np.array(p, dtype=float) for p in positions]
    n = len(out)
    for i in range(n):
        for j in range(i + 1, n):
            diff = out[j] - out[i]
            d = float(np.sqrt(diff @ diff))
            if d >= d_safe:
                continue
            u = diff / d if d > 0 else np.array([1.0, 0.0, 0.0])
            push = 0.5 * (d_safe - d) * u
            out[i] = out[i] - push
            out[j] = out[j] + push
    return out
