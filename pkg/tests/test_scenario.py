import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats

from patient_hetnet.channel import ChannelParams, noise_power_mw, received_power_mw
from patient_hetnet.scenario import (
    Scenario,
    ScenarioConfig,
    generate,
    load_scenario,
    max_rbs_per_user,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
)


def test_default_shape_and_flags():
    sc = generate(ScenarioConfig(), 1)
    assert sc.omega.shape == (10, 5, 2)
    assert sc.omega.size == 100
    assert np.all(sc.omega > 0)
    assert sc.op_flags.tolist() == [False] * 7 + [True] * 3
    assert sc.sigma == noise_power_mw(ChannelParams())
    assert sc.seed == 1


def test_same_seed_same_scenario():
    a, b = generate(ScenarioConfig(), 99), generate(ScenarioConfig(), 99)
    assert a == b
    assert np.array_equal(a.omega, b.omega)
    assert not np.array_equal(a.omega, generate(ScenarioConfig(), 100).omega)


def test_omega_matches_channel_model():
    cfg = ScenarioConfig()
    sc = generate(cfg, 5)
    rng = np.random.default_rng(5)
    d = rng.uniform(40, 100, size=(10, 2))
    g = rng.standard_exponential(size=(10, 5, 2))
    for k, n, b in [(0, 0, 0), (3, 4, 1), (9, 2, 0)]:
        expected = received_power_mw(cfg.channel, 17, d[k, b], g[k, n, b])
        assert sc.omega[k, n, b] == pytest.approx(expected, rel=1e-12)


def test_degenerate_distance_without_fading():
    sc = generate(ScenarioConfig(distance_range=(50, 50), fading=False), 3)
    for b in range(2):
        assert np.all(sc.omega[:, :, b] == sc.omega[0, 0, b])


@pytest.mark.parametrize("cap, per_rb, expected", [(23, 17, 3), (20, 20, 1), (30, 20, 10)])
def test_max_rbs(cap, per_rb, expected):
    cfg = ScenarioConfig(tx_per_rb=per_rb, max_power_per_connection=cap)
    assert max_rbs_per_user(cfg) == expected


@pytest.mark.parametrize("kwargs", [
    dict(num_normal=10),
    dict(num_users=11),
    dict(distance_range=(0, 100)),
    dict(distance_range=(100, 40)),
    dict(max_power_per_connection=10),
])
def test_invalid_config(kwargs):
    with pytest.raises(ValueError):
        ScenarioConfig(**kwargs)


def test_distances_uniform_ks():
    cfg = ScenarioConfig()
    d = np.concatenate([generate(cfg, s).distances.ravel() for s in range(10_000)])
    assert d.min() >= 40 and d.max() <= 100
    assert stats.kstest(d, stats.uniform(loc=40, scale=60).cdf).pvalue > 0.01


@settings(max_examples=25, deadline=None)
@given(st.integers(min_value=0, max_value=2**63 - 1))
def test_linear_in_tx_power(seed):
    base = generate(ScenarioConfig(tx_per_rb=17), seed)
    # +10 log10(2) dB doubles the linear power
    double = generate(ScenarioConfig(tx_per_rb=17 + 10 * np.log10(2)), seed)
    assert np.allclose(double.omega, 2 * base.omega, rtol=1e-12)


def test_default_slots_equal_users():
    cfg = ScenarioConfig()
    assert cfg.num_pbs * cfg.rbs_per_pbs == cfg.num_users


def test_json_roundtrip(tmp_path):
    sc = generate(ScenarioConfig(), 12345678901234)
    path = tmp_path / "s.json"
    save_scenario(sc, path)
    back = load_scenario(path)
    assert back == sc
    assert np.array_equal(back.omega, sc.omega)
    assert json.loads(path.read_text())["seed"] == 12345678901234
    assert scenario_from_dict(scenario_to_dict(sc)) == sc


def test_arrays_read_only():
    sc = generate(ScenarioConfig(), 0)
    with pytest.raises(ValueError):
        sc.omega[0, 0, 0] = 1.0


def test_scenario_validation():
    cfg = ScenarioConfig(num_pbs=2, rbs_per_pbs=1, num_users=2, num_normal=1)
    good = np.ones((2, 1, 2))
    with pytest.raises(ValueError):
        Scenario(cfg, good, 0.0, [False, True])
    with pytest.raises(ValueError):
        Scenario(cfg, good, 1.0, [True, True])
    with pytest.raises(ValueError):
        Scenario(cfg, -good, 1.0, [False, True])
    with pytest.raises(ValueError):
        Scenario(cfg, np.ones((2, 2, 2)), 1.0, [False, True])
