import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epicsim.kinematics import AgentState, KinematicLimits, Volume, vec3
from epicsim.signaling import AoiCounter, LinkParams
from epicsim.stsi import (
    BeliefEntry,
    Scheme,
    StsiParams,
    apply_packet,
    damping_sum,
    infer_all,
    project_position,
    project_velocity,
    reactive_estimate,
    sample_reaction_latencies_ms,
    sample_reaction_latency_ms,
    separate_beliefs,
    stsi_infer,
)

WIDE = Volume(vec3(-1e7, -1e7, -1e7), vec3(1e7, 1e7, 1e7))


def stale(p, v, k, v_prev=None):
    s = AgentState(np.asarray(p, float), np.asarray(v, float))
    return BeliefEntry(s, s.velocity if v_prev is None else np.asarray(v_prev, float), AoiCounter(0, k), s)


def test_project_velocity_examples():
    np.testing.assert_array_equal(project_velocity(vec3(2, 0, 0), 17, 1.0), [2, 0, 0])
    np.testing.assert_allclose(project_velocity(vec3(10, 0, 0), 2, 0.5), [2.5, 0, 0])
    np.testing.assert_array_equal(project_velocity(vec3(3, 4, 5), 0, 0.3), [3, 4, 5])


def test_project_position_examples():
    np.testing.assert_allclose(project_position(vec3(), vec3(2, 0, 0), 3, 1.0, 0.1), [0.6, 0, 0])
    np.testing.assert_allclose(project_position(vec3(), vec3(10, 0, 0), 2, 0.5, 1.0), [7.5, 0, 0])
    np.testing.assert_array_equal(project_position(vec3(1, 2, 3), vec3(9, 9, 9), 0, 0.5, 1.0), [1, 2, 3])


def test_damping_sum_matches_loop():
    for alpha in (0.1, 0.5, 0.9, 1.0):
        for k in range(0, 30):
            assert damping_sum(k, alpha) == pytest.approx(sum(alpha**i for i in range(1, k + 1)), rel=1e-12)


def test_guardrail_on_infeasible_anchor():
    params = StsiParams(limits=KinematicLimits(volume=WIDE))
    out = stsi_infer(stale((0, 0, 50), (0, 30, 0), 1, v_prev=(0, 20, 0)), params)
    assert np.linalg.norm(out.belief.velocity) == pytest.approx(20.0)


def test_infer_requires_stale_entry():
    with pytest.raises(ValueError):
        stsi_infer(stale((0, 0, 0), (1, 0, 0), 0), StsiParams())


def dead_reckon(p, v, k, dt):
    for _ in range(k):
        p = p + v * dt
    return p


@settings(max_examples=300, deadline=None)
@given(
    p=st.lists(st.floats(-1e4, 1e4), min_size=3, max_size=3),
    v=st.lists(st.floats(-11, 11), min_size=3, max_size=3),
    k=st.integers(1, 50),
)
def test_alpha_one_matches_dead_reckoning(p, v, k):
    params = StsiParams(alpha=1.0, limits=KinematicLimits(volume=WIDE))
    p, v = np.array(p), np.array(v)
    out = stsi_infer(stale(p, v, k), params)
    np.testing.assert_allclose(out.belief.position, dead_reckon(p, v, k, 1.0), rtol=0, atol=1e-9)
    np.testing.assert_array_equal(out.belief.velocity, v)


@settings(max_examples=300, deadline=None)
@given(
    alpha=st.floats(0.01, 0.99),
    v=st.lists(st.floats(-20, 20), min_size=3, max_size=3),
    k=st.integers(1, 500),
)
def test_damped_drift_bound(alpha, v, k):
    params = StsiParams(alpha=alpha, limits=KinematicLimits(v_max=100, volume=WIDE))
    v = np.array(v)
    out = stsi_infer(stale(vec3(), v, k), params)
    bound = alpha / (1 - alpha) * np.linalg.norm(v) * params.dt
    assert np.linalg.norm(out.belief.position) <= bound + 1e-9


def test_apply_packet_resets():
    e = stale((5, 5, 50), (1, 0, 0), 12)
    fresh = AgentState(vec3(9, 9, 60), vec3(0, 2, 0))
    out = apply_packet(e, fresh)
    assert out.belief == fresh and out.aoi.current == 0
    second = AgentState(vec3(1, 1, 1), vec3(0, 0, 1))
    assert apply_packet(out, second).belief == second


def test_packet_then_one_silent_step():
    params = StsiParams(limits=KinematicLimits(volume=WIDE))
    fresh = AgentState(vec3(100, 0, 50), vec3(4, -3, 0))
    e = apply_packet(stale((0, 0, 0), (0, 0, 0), 7), fresh)
    e = BeliefEntry(e.anchor_state, e.anchor_velocity_prev, AoiCounter(0, 1), e.belief)
    out = stsi_infer(e, params)
    np.testing.assert_allclose(out.belief.position, [104, -3, 50])
    np.testing.assert_allclose(out.belief.velocity, [4, -3, 0])


def test_reactive_baseline_freezes():
    e = stale((5, 5, 100), (3, 0, 0), 40)
    np.testing.assert_array_equal(reactive_estimate(e).position, [5, 5, 100])


def test_baseline_error_vs_epic_under_constant_velocity():
    params = StsiParams(limits=KinematicLimits(volume=WIDE))
    p0, v = vec3(0, 0, 50), vec3(20, 0, 0)
    truth = p0 + 10 * v
    e = stale(p0, v, 10)
    assert np.linalg.norm(reactive_estimate(e).position - truth) == pytest.approx(200.0)
    assert np.linalg.norm(stsi_infer(e, params).belief.position - truth) == pytest.approx(0.0, abs=1e-12)


def test_fresh_entry_schemes_agree():
    e = BeliefEntry.fresh(AgentState(vec3(1, 2, 3), vec3(4, 5, 6)))
    assert reactive_estimate(e) == e.belief


def test_epic_latency_ignores_link():
    params = StsiParams()
    calm = sample_reaction_latency_ms("epic", params, LinkParams(jitter_sigma_ms=0), np.random.default_rng(3))
    stormy = sample_reaction_latency_ms("epic", params, LinkParams(jitter_sigma_ms=100), np.random.default_rng(3))
    assert calm == stormy
    x = sample_reaction_latencies_ms(Scheme.EPIC, params, LinkParams(jitter_sigma_ms=100), np.random.default_rng(1), 100_000)
    assert x.mean() == pytest.approx(9.73, abs=0.001)
    exact = StsiParams(tau_stsi_jitter_ms=0.0)
    assert set(sample_reaction_latencies_ms(Scheme.EPIC, exact, LinkParams(), np.random.default_rng(1), 100)) == {9.73}


def test_traditional_latency_follows_link():
    x = sample_reaction_latencies_ms("traditional", StsiParams(), LinkParams(), np.random.default_rng(1), 100_000)
    assert 150.0 <= x.mean() <= 160.0
    assert x.min() >= 150.0


def test_scalar_and_vector_reaction_draws_agree():
    for scheme in Scheme:
        r = np.random.default_rng(9)
        a = [sample_reaction_latency_ms(scheme, StsiParams(), LinkParams(), r) for _ in range(20)]
        b = sample_reaction_latencies_ms(scheme, StsiParams(), LinkParams(), np.random.default_rng(9), 20)
        np.testing.assert_allclose(a, b, rtol=0, atol=1e-12)


def test_infer_all_passes_fresh_entries():
    params = StsiParams(limits=KinematicLimits(volume=WIDE))
    entries = [stale((0, 0, 0), (1, 0, 0), 0), stale((0, 0, 0), (1, 0, 0), 3)]
    out = infer_all(entries, params)
    assert out[0] is entries[0]
    np.testing.assert_allclose(out[1].belief.position, [3, 0, 0])


def test_separate_beliefs():
    out = separate_beliefs([vec3(0, 0, 50), vec3(1, 0, 50), vec3(100, 0, 50)], 5.0)
    assert np.linalg.norm(out[1] - out[0]) == pytest.approx(5.0)
    np.testing.assert_array_equal(out[2], [100, 0, 50])
    same = separate_beliefs([vec3(), vec3()], 2.0)
    np.testing.assert_allclose(same[1] - same[0], [2, 0, 0])


def test_params_validate():
    for bad in (0.0, 1.2, -0.5):
        with pytest.raises(ValueError):
            StsiParams(alpha=bad)
