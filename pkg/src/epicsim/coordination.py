"""Greedy coverage assignment over believed swarm states.

Every agent runs the same planner over its own view of the swarm. Agents
are placed in index order; agent ``a`` takes the hover point above the
target that maximizes predicted WCE, with agents before it at their
planned hover points and agents after it at their believed positions.
Two agents that disagree about where their peers are can therefore pick
conflicting hover points, which is how stale beliefs cost coverage.

Equal gains go to the hover point nearest the agent's own (believed)
position, then to the lowest target index. An agent that already holds a
target keeps it unless switching gains more than ``switch_margin`` of the
total target weight.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .channel import ChannelParams, Target, dbm_to_mw, power_matrix_mw
from .kinematics import AgentState, KinematicLimits, Volume

ARRIVAL_TOL_M = 0.1


class CoveragePlanner:
    """Greedy planner over hover points one altitude above each target.

    The candidate-to-target power grid is cached and refreshed by
    :meth:`move_targets` when the ground targets move.
    """

    def __init__(
        self,
        targets: Sequence[Target],
        params: ChannelParams,
        altitude: float = 100.0,
        volume: Volume | None = None,
        switch_margin: float = 0.0,
    ):
        self.params = params
        self.altitude = altitude
        self.volume = volume
        self.switch_margin = switch_margin
        self.weights = np.array([t.weight for t in targets], dtype=float)
        self.noise = float(dbm_to_mw(params.noise_dbm))
        self._wsum = float(self.weights.sum())
        self.move_targets(np.array([t.position for t in targets], dtype=float))

    def move_targets(self, target_pos: np.ndarray) -> None:
        self.target_pos = np.asarray(target_pos, dtype=float)
        cand = self.target_pos.copy()
        cand[:, 2] = self.altitude
        if self.volume is not None:
            cand = self.volume.clamp(cand)
        self.candidates = cand
        self.cand_power = power_matrix_mw(cand, self.target_pos, self.params)

    def _scores(self, pmax: np.ndarray, total: np.ndarray) -> np.ndarray:
        sinr = pmax / ((total - pmax) + self.noise)
        with np.errstate(divide="ignore"):
            covered = 10.0 * np.log10(sinr) >= self.params.sinr_threshold_db
        return covered @ self.weights

    def plan(
        self,
        believed_positions: np.ndarray,
        upto: int | None = None,
        keep: int | None = None,
    ) -> list[int]:
        """Target index chosen for agents ``0..upto`` (all agents by default).

        ``keep`` is the target currently held by agent ``upto``; it is
        retained unless another target beats it by more than the margin.
        """
        pos = np.atleast_2d(np.asarray(believed_positions, dtype=float))
        last = len(pos) - 1 if upto is None else upto
        m = self.target_pos.shape[0]
        cur_power = power_matrix_mw(pos, self.target_pos, self.params)
        chosen: list[int] = []
        planned = np.zeros((0, m))
        for a in range(last + 1):
            others = np.vstack([planned, cur_power[a + 1:]])
            base_max = others.max(axis=0) if len(others) else np.zeros(m)
            base_total = others.sum(axis=0) if len(others) else np.zeros(m)
            scores = self._scores(
                np.maximum(base_max[None, :], self.cand_power),
                base_total[None, :] + self.cand_power,
            )
            best = np.flatnonzero(scores == scores.max())
            dist = np.linalg.norm(self.candidates[best] - pos[a], axis=1)
            c = int(best[np.argmin(dist)])
            if a == last and keep is not None:
                if scores[keep] >= scores[c] - self.switch_margin * self._wsum:
                    c = keep
            chosen.append(c)
            planned = np.vstack([planned, self.cand_power[c][None, :]])
        return chosen

    def predicted_wce(self, positions: np.ndarray) -> float:
        p = power_matrix_mw(np.atleast_2d(positions), self.target_pos, self.params)
        return float(self._scores(p.max(axis=0), p.sum(axis=0)) / self._wsum)


def assign_targets(
    believed_states: Sequence[AgentState],
    targets: Sequence[Target],
    params: ChannelParams,
    altitude: float = 100.0,
    volume: Volume | None = None,
) -> dict[int, np.ndarray]:
    """Hover waypoint for every agent from one greedy pass."""
    if not believed_states or not targets:
        raise ValueError("assign_targets needs at least one agent and one target")
    planner = CoveragePlanner(targets, params, altitude, volume)
    pos = np.array([s.position for s in believed_states])
    return {i: planner.candidates[c].copy() for i, c in enumerate(planner.plan(pos))}


def velocity_command(state: AgentState, waypoint: np.ndarray, limits: KinematicLimits) -> np.ndarray:
    delta = np.asarray(waypoint, dtype=float) - state.position
    dist = float(np.sqrt(delta @ delta))
    if dist < ARRIVAL_TOL_M:
        return np.zeros(3)
    speed = min(limits.v_max, dist / limits.dt)
    return delta * (speed / dist)
