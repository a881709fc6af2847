import math

import numpy as np
import pytest

from epicsim.kinematics import AgentState, vec3
from epicsim.signaling import (
    AoiCounter,
    LinkParams,
    PacketQueue,
    aoi_update,
    enqueue_and_deliver,
    sample_latencies_ms,
    sample_latency_ms,
    silence_gate,
)

S = AgentState(vec3(), vec3())


def test_zero_jitter_is_exact(rng):
    p = LinkParams(jitter_sigma_ms=0.0)
    assert all(sample_latency_ms(p, rng).latency_ms == 150.0 for _ in range(100))


def test_half_normal_mean():
    rng = np.random.default_rng(0)
    x = sample_latencies_ms(LinkParams(), rng, 1_000_000)
    assert x.mean() == pytest.approx(150 + 20 / math.sqrt(2 * math.pi), abs=0.1)
    assert x.min() >= 150.0


def test_two_sided_mean():
    rng = np.random.default_rng(0)
    x = sample_latencies_ms(LinkParams(jitter_one_sided=False), rng, 1_000_000)
    assert x.mean() == pytest.approx(150.0, abs=0.1)


def test_scalar_and_vector_draws_agree():
    p = LinkParams()
    r = np.random.default_rng(5)
    a = [sample_latency_ms(p, r).latency_ms for _ in range(50)]
    b = sample_latencies_ms(p, np.random.default_rng(5), 50)
    np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)


def test_silence_schedule():
    assert all(silence_gate(k, 3, LinkParams(t_up_steps=1)) for k in range(20))
    p = LinkParams(t_up_steps=10)
    assert [k for k in range(35) if silence_gate(k, 0, p)] == [0, 10, 20, 30]
    assert [k for k in range(35) if silence_gate(k, 13, p)] == [3, 13, 23, 33]


def test_aoi_peaks_at_period_minus_one():
    p = LinkParams(t_up_steps=50)
    counter, peak = AoiCounter(0, 0), 0
    for k in range(200):
        counter = aoi_update(counter, k, received=silence_gate(k, 0, p))
        peak = max(peak, counter.current)
    assert peak == 49


def test_aoi_examples():
    assert aoi_update(AoiCounter(10, 0), 14, False).current == 4
    assert aoi_update(AoiCounter(10, 3), 14, True) == AoiCounter(14, 0)
    assert aoi_update(AoiCounter(0, 0), 50, False).current == 50
    with pytest.raises(ValueError):
        aoi_update(AoiCounter(10, 0), 9, False)


def test_queue_threshold():
    q = PacketQueue()
    assert enqueue_and_deliver(q, 1e9) == []
    q.push(0, S, 0, 0.0, 100.0)
    q.push(1, S, 0, 0.0, 120.0)
    out = enqueue_and_deliver(q, 110.0)
    assert [p.sender for p in out] == [0]
    assert len(q) == 1


def test_fifo_repair():
    q = PacketQueue()
    first = q.push(0, S, 0, 0.0, 200.0)
    second = q.push(0, S, 1, 50.0, 100.0)
    assert first.deliver_at_ms == 200.0
    assert second.deliver_at_ms == 200.0
    out = enqueue_and_deliver(q, 200.0)
    assert [p.sent_step for p in out] == [0, 1]


def test_packet_conservation(rng):
    q, p = PacketQueue(), LinkParams(jitter_sigma_ms=300.0)
    for k in range(200):
        for j in range(4):
            q.push(j, S, k, k * 1000.0, sample_latency_ms(p, rng).latency_ms)
        enqueue_and_deliver(q, k * 1000.0 + 990.0)
        assert q.sent == q.delivered + len(q)


def test_link_validation():
    with pytest.raises(ValueError):
        LinkParams(jitter_sigma_ms=-5)
    with pytest.raises(ValueError):
        LinkParams(t_up_steps=2.5)
