import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epicsim.channel import (
    ChannelParams,
    Target,
    dbm_to_mw,
    elevation_angle,
    free_space_db,
    p_los,
    path_loss_db,
    power_matrix_mw,
    received_power_dbm,
    sinr_db,
    wce,
    wce_fast,
)
from epicsim.kinematics import AgentState, vec3

P = ChannelParams()


def los_oracle(theta, a=9.61, b=0.16):
    return 1.0 / (1.0 + a * math.exp(-b * (theta - a)))


def test_defaults():
    assert (P.a, P.b, P.f_c_hz, P.p_tx_dbm, P.noise_dbm, P.sinr_threshold_db) == (
        9.61, 0.16, 6e9, 20.0, -110.0, 0.0,
    )


@pytest.mark.parametrize(
    "agent, expected",
    [((0, 0, 100), 90.0), ((100, 0, 100), 45.0), ((0, 173.2050808, 100), 30.0), ((0, 0, 0), 90.0)],
)
def test_elevation(agent, expected):
    assert elevation_angle(np.array(agent, float), vec3()) == pytest.approx(expected, abs=1e-6)


def test_p_los_values():
    assert p_los(90.0, P) == pytest.approx(0.999975, abs=1e-6)
    assert p_los(0.0, P) == pytest.approx(los_oracle(0.0), rel=1e-12)
    assert p_los(0.0, P) == pytest.approx(0.021873, abs=1e-6)
    assert p_los(P.a, P) == 1.0 / (1.0 + P.a)


def test_path_loss_values():
    fs = 20 * math.log10(4 * math.pi * 6e9 * 100 / 299_792_458)
    assert free_space_db(100.0, P) == pytest.approx(fs, rel=1e-12)
    assert free_space_db(100.0, P) == pytest.approx(88.01, abs=0.01)
    assert path_loss_db(100.0, 45.0, P, los_probability=1.0) == pytest.approx(89.01, abs=0.01)
    assert path_loss_db(100.0, 45.0, P, los_probability=0.0) == pytest.approx(108.01, abs=0.01)
    with pytest.raises(ValueError):
        path_loss_db(0.0, 90.0, P)


def test_received_power():
    a = AgentState(vec3(0, 0, 100), vec3())
    t = Target(vec3(), 1.0)
    expected = 20.0 - (free_space_db(100.0, P) + los_oracle(90.0) * 1 + (1 - los_oracle(90.0)) * 20)
    assert received_power_dbm(a, t, P) == pytest.approx(expected, rel=1e-12)


def _agent_at_power(p_dbm, target=vec3()):
    """Agent overhead of ``target`` at the height giving received power ``p_dbm``."""
    lo, hi = 1e-3, 1e7
    for _ in range(200):
        mid = math.sqrt(lo * hi)
        if received_power_dbm(AgentState(vec3(0, 0, mid), vec3()), Target(target, 1.0), P) > p_dbm:
            lo = mid
        else:
            hi = mid
    return AgentState(vec3(0, 0, lo), vec3())


def test_sinr_single_and_three_agents():
    t = Target(vec3(), 1.0)
    s, i = sinr_db(t, [_agent_at_power(-69.01)], P)
    assert s == pytest.approx(40.99, abs=1e-6) and i == 0
    agents = [_agent_at_power(x) for x in (-60.0, -70.0, -80.0)]
    s, i = sinr_db(t, agents, P)
    assert i == 0
    assert s == pytest.approx(10 * math.log10(1e-6 / (1e-7 + 1e-8 + 1e-11)), abs=1e-6)


def test_sinr_equal_agents_is_zero_db():
    t = Target(vec3(), 1.0)
    a = AgentState(vec3(0, 0, 100), vec3())
    s, i = sinr_db(t, [a, a], P)
    p = float(dbm_to_mw(received_power_dbm(a, t, P)))
    assert s == pytest.approx(10 * math.log10(p / (p + 1e-11)), abs=1e-9)
    assert abs(s) < 1e-3
    assert i == 0


def test_wce_examples():
    near = AgentState(vec3(0, 0, 100), vec3())
    heavy = Target(vec3(), 5.0)
    light = Target(vec3(1e7, 0, 0), 1.0)
    assert wce([heavy], [near], P) == 1.0
    assert wce([heavy, light], [near], P) == pytest.approx(5 / 6)
    assert wce([light], [near], P) == 0.0
    assert wce([heavy], [], P) == 0.0
    with pytest.raises(ValueError):
        wce([], [near], P)


def test_target_validation():
    with pytest.raises(ValueError):
        Target(vec3(), 0.5)
    with pytest.raises(ValueError):
        Target(vec3(0, 0, 1), 1.0)


@settings(max_examples=300, deadline=None)
@given(d=st.floats(1.0, 1e5), theta=st.floats(0.0, 90.0))
def test_path_loss_between_bounds(d, theta):
    pl = path_loss_db(d, theta, P)
    assert path_loss_db(d, theta, P, 1.0) - 1e-9 <= pl <= path_loss_db(d, theta, P, 0.0) + 1e-9


def test_vectorized_matches_scalar(rng):
    for _ in range(20):
        n = int(rng.integers(1, 6))
        agents = [AgentState(np.r_[rng.uniform(0, 1800, 2), rng.uniform(20, 100)], vec3()) for _ in range(n)]
        targets = [Target(np.r_[rng.uniform(0, 1800, 2), 0.0], float(rng.integers(1, 6))) for _ in range(8)]
        pos = np.array([a.position for a in agents])
        tpos = np.array([t.position for t in targets])
        w = np.array([t.weight for t in targets])
        pm = power_matrix_mw(pos, tpos, P)
        for j, t in enumerate(targets):
            for i, a in enumerate(agents):
                assert pm[i, j] == pytest.approx(float(dbm_to_mw(received_power_dbm(a, t, P))), rel=1e-9)
        assert wce_fast(pos, tpos, w, P) == pytest.approx(wce(targets, agents, P), abs=1e-12)
