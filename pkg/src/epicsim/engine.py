"""Dual-loop swarm simulation: scenarios, the per-step loop, trials and sweeps.

One coordination step lasts ``step_dt`` seconds and holds
``inference_hz * step_dt`` inference ticks. Broadcasts go out at the start
of the step, packets due by the last tick are delivered, and the final
tick's beliefs feed the decision. Physics and coordination update once
per step.

Random streams are keyed by (trial seed, purpose), so the scenario, every
sender's link draws and the reaction-latency draws are the same for both
schemes of a trial and do not shift when an unrelated parameter changes.
"""

from __future__ import annotations

import hashlib
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .channel import Target, wce_fast
from .config import ScenarioConfig
from .coordination import CoveragePlanner, velocity_command
from .kinematics import AgentState, integrate, vec3
from .signaling import (
    AoiCounter,
    PacketQueue,
    aoi_update,
    enqueue_and_deliver,
    sample_latency_ms,
    silence_gate,
)
from .stsi import (
    BeliefEntry,
    Scheme,
    apply_packet,
    reactive_estimate,
    sample_reaction_latencies_ms,
    separate_beliefs,
    stsi_infer,
)

log = logging.getLogger(__name__)

STREAM_SCENARIO = 0
STREAM_REACTION = 1
STREAM_LINK = 2  # sender j uses (STREAM_LINK, j)


def derive_trial_seed(master_seed: int, trial: int) -> int:
    """Stable 64-bit seed for one trial of a run."""
    digest = hashlib.blake2b(f"epicsim:{master_seed}:{trial}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def stream(trial_seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(trial_seed, spawn_key=key))


@dataclass
class TickMetrics:
    step: int
    wce: float
    aoi: list[int]
    reaction_latency_ms: list[float]
    scheme: Scheme
    belief_error_m: float = 0.0

    @property
    def max_aoi(self) -> int:
        return max(self.aoi) if self.aoi else 0

    @property
    def mean_reaction_latency_ms(self) -> float:
        return float(np.mean(self.reaction_latency_ms))


@dataclass
class TrialSummary:
    trial: int
    seed: int
    scheme: Scheme
    wce_mean: float
    wce_std: float
    latency_mean: float
    latency_std: float
    decisions: int
    config: ScenarioConfig = field(repr=False, compare=False)
    ticks: list[TickMetrics] = field(default_factory=list, repr=False, compare=False)


@dataclass
class World:
    config: ScenarioConfig
    scheme: Scheme
    trial_seed: int
    agents: list[AgentState]
    targets: list[Target]
    planner: CoveragePlanner
    buffers: list[list[BeliefEntry]]
    queue: PacketQueue
    link_rngs: list[np.random.Generator]
    reaction_rng: np.random.Generator
    last_cmd: list[np.ndarray]
    target_vel: np.ndarray
    waypoints: list[int | None] = field(default_factory=list)
    heard: list[bool] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.agents)


def init_scenario(config: ScenarioConfig, trial_seed: int, scheme: Scheme | str | None = None) -> World:
    """Uniform agents at mission altitude (at rest) and uniform weighted ground targets."""
    scheme = Scheme(scheme) if scheme is not None else config.scheme
    rng = stream(trial_seed, STREAM_SCENARIO)
    vol = config.volume
    xy = rng.uniform([0.0, 0.0], [vol.x_m, vol.y_m], size=(config.n_agents, 2))
    agents = [AgentState(vec3(x, y, config.altitude_m), vec3()) for x, y in xy]
    txy = rng.uniform([0.0, 0.0], [vol.x_m, vol.y_m], size=(config.n_targets, 2))
    weights = rng.integers(1, 6, size=config.n_targets)
    heading = rng.uniform(0.0, 2.0 * np.pi, size=config.n_targets)
    target_vel = config.target_speed_mps * np.stack(
        [np.cos(heading), np.sin(heading), np.zeros_like(heading)], axis=1
    )
    targets = [Target(vec3(x, y, 0.0), float(w)) for (x, y), w in zip(txy, weights)]

    n = config.n_agents
    v_max = config.kinematics.v_max
    # the deployment plan is common knowledge, so every buffer starts fresh
    buffers = [[BeliefEntry.fresh(agents[j], 0, v_max=v_max) for j in range(n)] for _ in range(n)]
    return World(
        config=config,
        scheme=scheme,
        trial_seed=trial_seed,
        agents=agents,
        targets=targets,
        planner=CoveragePlanner(
            targets,
            config.channel,
            config.altitude_m,
            config.mission_volume,
            config.coordination.switch_margin,
        ),
        buffers=buffers,
        queue=PacketQueue(),
        link_rngs=[stream(trial_seed, STREAM_LINK, j) for j in range(n)],
        reaction_rng=stream(trial_seed, STREAM_REACTION),
        last_cmd=[vec3() for _ in range(n)],
        target_vel=target_vel,
        waypoints=[None] * n,
        heard=[True] * n,
    )


def _communicate(world: World, step: int) -> None:
    cfg = world.config
    t0 = step * cfg.step_ms
    for j, state in enumerate(world.agents):
        if silence_gate(step, j, cfg.link):
            tau = sample_latency_ms(cfg.link, world.link_rngs[j]).latency_ms
            world.queue.push(j, state, step, t0, tau)

    last_tick_ms = t0 + (cfg.ticks_per_step - 1) * (cfg.step_ms / cfg.ticks_per_step)
    v_max = cfg.kinematics.v_max
    world.heard = [False] * world.n
    for pkt in enqueue_and_deliver(world.queue, last_tick_ms):
        for i in range(world.n):
            if i == pkt.sender:
                continue
            world.heard[i] = True
            entry = apply_packet(world.buffers[i][pkt.sender], pkt.state, v_max=v_max)
            # age counts from generation, so a packet held up past its
            # step boundary arrives already stale
            aoi = aoi_update(AoiCounter(pkt.sent_step, 0), step, received=False)
            world.buffers[i][pkt.sender] = replace(entry, aoi=aoi)


def _age_and_infer(world: World, step: int) -> None:
    params = world.config.stsi_params
    for i, row in enumerate(world.buffers):
        for j, entry in enumerate(row):
            if j == i:
                continue
            if entry.aoi.last_rx_step + entry.aoi.current != step:
                entry = replace(entry, aoi=aoi_update(entry.aoi, step, received=False))
            if world.scheme is Scheme.EPIC and entry.aoi.current >= 1:
                entry = stsi_infer(entry, params)
            row[j] = entry


def believed_positions(world: World, i: int) -> np.ndarray:
    """Agent ``i``'s view of the swarm: its own true position plus peer beliefs."""
    rows = []
    for j in range(world.n):
        entry = world.buffers[i][j]
        if j == i:
            rows.append(world.agents[i].position)
        elif world.scheme is Scheme.EPIC:
            rows.append(entry.belief.position)
        else:
            rows.append(reactive_estimate(entry).position)
    pos = np.array(rows)
    cfg = world.config
    if world.scheme is Scheme.EPIC and cfg.stsi.spatial_consistency:
        peers = [j for j in range(world.n) if j != i]
        moved = separate_beliefs([pos[j] for j in peers], cfg.stsi.d_safe_m)
        for j, p in zip(peers, moved):
            pos[j] = cfg.mission_volume.clamp(p)
    return pos


def _belief_error(world: World) -> float:
    worst = 0.0
    for i, row in enumerate(world.buffers):
        view = believed_positions(world, i)
        for j in range(world.n):
            if j == i:
                continue
            worst = max(worst, float(np.linalg.norm(view[j] - world.agents[j].position)))
    return worst


def _move_targets(world: World) -> None:
    """Ground targets drift at constant speed and bounce off the volume walls."""
    cfg = world.config
    pos = world.planner.target_pos + world.target_vel * cfg.step_dt
    hi = np.array([cfg.volume.x_m, cfg.volume.y_m, 0.0])
    for axis in (0, 1):
        low, high = pos[:, axis] < 0.0, pos[:, axis] > hi[axis]
        pos[low, axis] = -pos[low, axis]
        pos[high, axis] = 2.0 * hi[axis] - pos[high, axis]
        world.target_vel[low | high, axis] *= -1.0
    world.planner.move_targets(np.clip(pos, 0.0, hi))


def update_beliefs(world: World, step: int) -> None:
    """Communication loop then inference loop for one step."""
    _communicate(world, step)
    _age_and_infer(world, step)


def belief_error(world: World) -> float:
    """Largest distance between any believed peer position and the truth."""
    return _belief_error(world)


def run_step(world: World, step: int) -> TickMetrics:
    cfg = world.config
    update_beliefs(world, step)
    error = _belief_error(world)

    latencies = sample_reaction_latencies_ms(
        world.scheme, cfg.stsi_params, cfg.link, world.reaction_rng, world.n
    )
    limits = cfg.limits
    new_agents = []
    for i, state in enumerate(world.agents):
        # the reactive baseline only re-plans when a packet lands
        if world.scheme is Scheme.EPIC or world.heard[i] or world.waypoints[i] is None:
            view = believed_positions(world, i)
            choice = world.planner.plan(view, upto=i, keep=world.waypoints[i])[i]
            world.waypoints[i] = choice
        cmd = velocity_command(state, world.planner.candidates[world.waypoints[i]], limits)
        # the previous command stays in force until the reaction completes
        lag = min(latencies[i] / cfg.step_ms, 1.0)
        applied = lag * world.last_cmd[i] + (1.0 - lag) * cmd
        world.last_cmd[i] = cmd
        new_agents.append(integrate(state, applied, limits))
    world.agents = new_agents
    if cfg.target_speed_mps > 0:
        _move_targets(world)

    pos = np.array([a.position for a in world.agents])
    wce = wce_fast(pos, world.planner.target_pos, world.planner.weights, cfg.channel)
    aoi = [row[j].aoi.current for i, row in enumerate(world.buffers) for j in range(world.n) if j != i]
    return TickMetrics(step, wce, aoi, [float(x) for x in latencies], world.scheme, error)


def run_trial(config: ScenarioConfig, trial: int, scheme: Scheme | str | None = None) -> TrialSummary:
    scheme = Scheme(scheme) if scheme is not None else config.scheme
    seed = derive_trial_seed(config.master_seed, trial)
    world = init_scenario(config, seed, scheme)
    ticks = [run_step(world, k) for k in range(config.mission_steps)]
    log.debug("trial %d (%s) done, pending packets: %d", trial, scheme.value, len(world.queue))
    wces = np.array([t.wce for t in ticks])
    lats = np.concatenate([t.reaction_latency_ms for t in ticks])
    return TrialSummary(
        trial=trial,
        seed=seed,
        scheme=scheme,
        wce_mean=float(wces.mean()),
        wce_std=float(wces.std()),
        latency_mean=float(lats.mean()),
        latency_std=float(lats.std()),
        decisions=int(lats.size),
        config=config,
        ticks=ticks,
    )


def _run_unit(args):
    config, trial, scheme = args
    return run_trial(config, trial, scheme)


def _map(units: Sequence[tuple], workers: int) -> list[TrialSummary]:
    if workers <= 1 or len(units) <= 1:
        return [_run_unit(u) for u in units]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_unit, units))


def run_trials(
    config: ScenarioConfig, scheme: Scheme | str | None = None, workers: int = 1
) -> list[TrialSummary]:
    """All trials of one configuration, ordered by trial index."""
    units = [(config, t, scheme) for t in range(config.trials)]
    return _map(units, workers)


SWEEP_KEYS = {"t_up": "link.t_up_steps", "jitter_sigma": "link.jitter_sigma_ms"}


@dataclass
class SweepRow:
    parameter: str
    value: float
    scheme: Scheme
    summary: TrialSummary


def sweep(
    config: ScenarioConfig,
    parameter: str,
    values: Iterable[float],
    schemes: Sequence[Scheme | str] = (Scheme.EPIC, Scheme.TRADITIONAL),
    workers: int = 1,
) -> list[SweepRow]:
    """Cross product of values x schemes x trials.

    Every (value, scheme) cell reuses the same trial seeds, so scheme gaps
    at one value are paired comparisons.
    """
    if parameter not in SWEEP_KEYS:
        raise ValueError(f"unknown sweep parameter {parameter!r}; expected one of {sorted(SWEEP_KEYS)}")
    values = list(values)
    if not values:
        raise ValueError("sweep needs at least one value")
    key = SWEEP_KEYS[parameter]
    units, labels = [], []
    for v in values:
        cfg = config.with_overrides(**{key: int(v) if parameter == "t_up" else float(v)})
        for s in schemes:
            s = Scheme(s)
            for t in range(cfg.trials):
                units.append((cfg, t, s))
                labels.append((v, s))
    results = _map(units, workers)
    return [SweepRow(parameter, v, s, r) for (v, s), r in zip(labels, results)]
