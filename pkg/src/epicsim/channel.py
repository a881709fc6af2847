"""Probabilistic air-to-ground channel and the weighted coverage metric.

Mean-path-loss model: the LoS probability is a sigmoid of the elevation
angle and weights the LoS/NLoS excess attenuation in dB. There is no
per-packet LoS draw, so coverage is a deterministic function of positions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .kinematics import AgentState

C_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class ChannelParams:
    a: float = 9.61
    b: float = 0.16
    f_c_hz: float = 6.0e9
    eta_los_db: float = 1.0
    eta_nlos_db: float = 20.0
    p_tx_dbm: float = 20.0
    noise_dbm: float = -110.0
    sinr_threshold_db: float = 0.0
    c_light: float = C_LIGHT

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError("channel.a must be > 0")
        if not self.b > 0:
            raise ValueError("channel.b must be > 0")
        if not self.f_c_hz > 0:
            raise ValueError("channel.f_c_hz must be > 0")
        if not (self.eta_nlos_db >= self.eta_los_db >= 0):
            raise ValueError("channel requires eta_nlos_db >= eta_los_db >= 0")


@dataclass(frozen=True)
class Target:
    position: np.ndarray
    weight: float

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        if not 1.0 <= self.weight <= 5.0:
            raise ValueError(f"target weight {self.weight} outside [1, 5]")
        if self.position[2] != 0.0:
            raise ValueError("targets sit on the ground plane (z = 0)")


def elevation_angle(agent_pos: np.ndarray, target_pos: np.ndarray) -> float:
    """Elevation of the agent seen from the target, degrees in (0, 90]."""
    diff = np.asarray(agent_pos, dtype=float) - np.asarray(target_pos, dtype=float)
    d = float(np.sqrt(diff @ diff))
    if d == 0.0:
        return 90.0
    h = float(diff[2])
    return math.degrees(math.asin(min(1.0, h / d)))


def p_los(theta_deg, params: ChannelParams):
    return 1.0 / (1.0 + params.a * np.exp(-params.b * (theta_deg - params.a)))


def free_space_db(distance_m, params: ChannelParams):
    return 20.0 * np.log10(4.0 * np.pi * params.f_c_hz * distance_m / params.c_light)


def path_loss_db(distance_m, theta_deg, params: ChannelParams, los_probability=None):
    """Average path loss in dB.

    ``los_probability`` overrides the sigmoid, which is how the pure-LoS and
    pure-NLoS bounds are evaluated.
    """
    if np.any(np.asarray(distance_m) <= 0):
        raise ValueError("path loss is singular at zero distance")
    pl = p_los(theta_deg, params) if los_probability is None else los_probability
    return (
        free_space_db(distance_m, params)
        + pl * params.eta_los_db
        + (1.0 - pl) * params.eta_nlos_db
    )


def received_power_dbm(agent: AgentState, target: Target, params: ChannelParams) -> float:
    if not agent.position[2] > 0:
        raise ValueError("agent altitude must be > 0")
    diff = agent.position - target.position
    d = float(np.sqrt(diff @ diff))
    theta = elevation_angle(agent.position, target.position)
    return params.p_tx_dbm - float(path_loss_db(d, theta, params))


def dbm_to_mw(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)


def sinr_db(
    target: Target, agents: Sequence[AgentState], params: ChannelParams
) -> tuple[float, int]:
    """Best-server SINR for one target, with the serving agent index.

    Every agent is tried as the server against the sum of all others plus
    noise; ties go to the lowest index.
    """
    if not agents:
        raise ValueError("sinr_db needs at least one agent")
    p = dbm_to_mw([received_power_dbm(a, target, params) for a in agents])
    noise = float(dbm_to_mw(params.noise_dbm))
    total = float(p.sum())
    best, best_i = -math.inf, 0
    for i, pi in enumerate(p):
        s = pi / ((total - pi) + noise)
        if s > best:
            best, best_i = s, i
    return 10.0 * math.log10(best), best_i


def wce(targets: Sequence[Target], agents: Sequence[AgentState], params: ChannelParams) -> float:
    if not targets:
        raise ValueError("wce needs at least one target")
    w = np.array([t.weight for t in targets], dtype=float)
    if not w.sum() > 0:
        raise ValueError("target weights must sum to a positive value")
    if not agents:
        return 0.0
    covered = np.array(
        [sinr_db(t, agents, params)[0] >= params.sinr_threshold_db for t in targets]
    )
    return float(w[covered].sum() / w.sum())


# Vectorized forms used inside the simulation loop. They evaluate the same
# expressions as the scalar functions above on (agents x targets) grids.


def power_matrix_mw(
    agent_pos: np.ndarray, target_pos: np.ndarray, params: ChannelParams
) -> np.ndarray:
    """Received power in mW, shape (n_agents, n_targets)."""
    agent_pos = np.atleast_2d(np.asarray(agent_pos, dtype=float))
    target_pos = np.atleast_2d(np.asarray(target_pos, dtype=float))
    diff = agent_pos[:, None, :] - target_pos[None, :, :]
    d = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    d = np.maximum(d, 1e-9)
    h = diff[..., 2]
    theta = np.degrees(np.arcsin(np.clip(h / d, -1.0, 1.0)))
    loss = path_loss_db(d, theta, params)
    return dbm_to_mw(params.p_tx_dbm - loss)


def coverage_from_powers(p_mw: np.ndarray, params: ChannelParams) -> np.ndarray:
    """Covered mask per target from a (n_agents, n_targets) power grid.

    The best-SINR server is always the strongest one, so the maximum over
    servers reduces to P_max / (P_total - P_max + noise).
    """
    noise = float(dbm_to_mw(params.noise_dbm))
    pmax = p_mw.max(axis=0)
    total = p_mw.sum(axis=0)
    sinr = pmax / ((total - pmax) + noise)
    return 10.0 * np.log10(sinr) >= params.sinr_threshold_db


def wce_fast(
    agent_pos: np.ndarray, target_pos: np.ndarray, weights: np.ndarray, params: ChannelParams
) -> float:
    if len(agent_pos) == 0:
        return 0.0
    covered = coverage_from_powers(power_matrix_mw(agent_pos, target_pos, params), params)
    return float(weights[covered].sum() / weights.sum())
