"""Stochastic signaling plane: link latency, silence schedule, delivery queue, AoI."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .kinematics import AgentState


@dataclass(frozen=True)
class LinkParams:
    tau_base_ms: float = 150.0
    jitter_sigma_ms: float = 20.0
    jitter_one_sided: bool = True
    t_up_steps: int = 10

    def __post_init__(self):
        if not self.tau_base_ms >= 0:
            raise ValueError("link.tau_base_ms must be >= 0")
        if not self.jitter_sigma_ms >= 0:
            raise ValueError("link.jitter_sigma_ms must be >= 0")
        if int(self.t_up_steps) != self.t_up_steps or self.t_up_steps < 0:
            raise ValueError("link.t_up_steps must be an integer >= 0")


@dataclass(frozen=True)
class LinkSample:
    tau_base_ms: float
    jitter_ms: float

    @property
    def latency_ms(self) -> float:
        return self.tau_base_ms + self.jitter_ms


def sample_latency_ms(params: LinkParams, rng: np.random.Generator) -> LinkSample:
    # A draw is consumed even when sigma is zero so streams stay aligned
    # across a jitter sweep.
    delta = params.jitter_sigma_ms * rng.standard_normal()
    if params.jitter_one_sided:
        delta = max(delta, 0.0)
    return LinkSample(params.tau_base_ms, float(delta))


def sample_latencies_ms(params: LinkParams, rng: np.random.Generator, n: int) -> np.ndarray:
    """Vectorized ``sample_latency_ms``; same stream consumption per draw."""
    delta = params.jitter_sigma_ms * rng.standard_normal(n)
    if params.jitter_one_sided:
        delta = np.maximum(delta, 0.0)
    return params.tau_base_ms + delta


def silence_period(params: LinkParams) -> int:
    return max(int(params.t_up_steps), 1)


def silence_gate(step: int, peer: int, params: LinkParams) -> bool:
    """True when ``peer`` is allowed to transmit at ``step``.

    Each peer transmits once per period, at a phase set by its id so that
    peers do not all fall silent together.
    """
    if step < 0:
        raise ValueError("step must be >= 0")
    period = silence_period(params)
    return step % period == peer % period


@dataclass(frozen=True)
class Packet:
    sender: int
    state: AgentState
    sent_step: int
    sent_ms: float
    deliver_at_ms: float


@dataclass
class PacketQueue:
    """Delayed-delivery queue with per-sender FIFO repair.

    A packet can never overtake an earlier one from the same sender: its
    delivery time is raised to the sender's previous delivery time when
    the sampled latency would reorder them.
    """

    _heap: list = field(default_factory=list)
    _last_deliver: dict = field(default_factory=dict)
    _seq: int = 0
    sent: int = 0
    delivered: int = 0

    def __len__(self):
        return len(self._heap)

    def push(self, sender: int, state: AgentState, sent_step: int, sent_ms: float,
             latency_ms: float) -> Packet:
        at = sent_ms + latency_ms
        prev = self._last_deliver.get(sender)
        if prev is not None and at < prev:
            at = prev
        self._last_deliver[sender] = at
        pkt = Packet(sender, state, sent_step, sent_ms, at)
        # seq keeps same-sender same-time packets in send order
        heapq.heappush(self._heap, (at, sender, self._seq, pkt))
        self._seq += 1
        self.sent += 1
        return pkt

    def pending(self) -> list[Packet]:
        return [item[3] for item in sorted(self._heap)]


def enqueue_and_deliver(queue: PacketQueue, now_ms: float) -> list[Packet]:
    """Pop every packet due at or before ``now_ms``, ordered by (time, sender)."""
    out = []
    heap = queue._heap
    while heap and heap[0][0] <= now_ms:
        out.append(heapq.heappop(heap)[3])
    queue.delivered += len(out)
    return out


@dataclass(frozen=True)
class AoiCounter:
    last_rx_step: int = 0
    current: int = 0


def aoi_update(counter: AoiCounter, step: int, received: bool) -> AoiCounter:
    if step < counter.last_rx_step:
        raise ValueError("AoI cannot move backwards in time")
    if received:
        return AoiCounter(step, 0)
    return AoiCounter(counter.last_rx_step, step - counter.last_rx_step)

