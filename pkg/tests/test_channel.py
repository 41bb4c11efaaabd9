import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from patient_hetnet.channel import (
    ChannelParams,
    dbm_to_mw,
    mw_to_dbm,
    noise_power_mw,
    path_loss_db,
    rayleigh_power_gain,
    received_power_mw,
)

DEFAULT = ChannelParams()


@pytest.mark.parametrize("dbm, mw", [(0, 1.0), (23, 199.526), (17, 50.119)])
def test_dbm_to_mw(dbm, mw):
    assert dbm_to_mw(dbm) == pytest.approx(mw, abs=5e-4)


@pytest.mark.parametrize("mw, dbm, tol", [(1, 0.0, 1e-12), (100, 20.0, 1e-12), (50.119, 17.0, 1e-3)])
def test_mw_to_dbm(mw, dbm, tol):
    assert mw_to_dbm(mw) == pytest.approx(dbm, abs=tol)


@pytest.mark.parametrize("bad", [0.0, -1.0, float("nan")])
def test_mw_to_dbm_rejects_nonpositive(bad):
    with pytest.raises(ValueError):
        mw_to_dbm(bad)
    with pytest.raises(ValueError):
        mw_to_dbm(np.array([1.0, bad]))


def test_dbm_to_mw_rejects_nonfinite():
    with pytest.raises(ValueError):
        dbm_to_mw(float("inf"))


@pytest.mark.parametrize("d, pl, tol", [(1000, 140.7, 1e-12), (100, 104.0, 1e-9), (40, 89.3956, 1e-4)])
def test_path_loss(d, pl, tol):
    assert path_loss_db(DEFAULT, d) == pytest.approx(pl, abs=tol)


def test_path_loss_rejects_nonpositive_distance():
    with pytest.raises(ValueError):
        path_loss_db(DEFAULT, 0)


def test_noise_power():
    # -162 + 10 log10(1.8e5) = -109.447 dBm
    assert mw_to_dbm(noise_power_mw(DEFAULT)) == pytest.approx(-109.447, abs=5e-4)
    assert noise_power_mw(DEFAULT) == pytest.approx(1.136e-11, rel=1e-3)
    assert noise_power_mw(ChannelParams(rb_bandwidth=1.0)) == pytest.approx(10 ** -16.2, rel=1e-12)
    assert noise_power_mw(ChannelParams(noise_density=0.0, rb_bandwidth=10.0)) == pytest.approx(10.0, rel=1e-12)


def test_params_validation():
    with pytest.raises(ValueError):
        ChannelParams(pl_slope=0)
    with pytest.raises(ValueError):
        ChannelParams(rb_bandwidth=-1)


def test_rayleigh_moments_and_median():
    g = rayleigh_power_gain(np.random.default_rng(7), 10**6)
    # 3 sigma of the sample mean of a unit exponential is 3e-3
    assert abs(g.mean() - 1.0) < 3e-3
    assert abs(np.mean(g <= math.log(2)) - 0.5) < 0.01
    assert np.all(g > 0)


def test_rayleigh_deterministic():
    a = rayleigh_power_gain(np.random.default_rng(3), 50)
    b = rayleigh_power_gain(np.random.default_rng(3), 50)
    assert np.array_equal(a, b)
    assert isinstance(rayleigh_power_gain(np.random.default_rng(3)), float)


def test_received_power():
    assert received_power_mw(DEFAULT, 17, 100, 1.0) == pytest.approx(10 ** -8.7, rel=1e-9)
    assert received_power_mw(DEFAULT, 17, 100, 1.0) == pytest.approx(1.995e-9, rel=1e-3)
    for d in (40, 63.5, 100):
        assert received_power_mw(DEFAULT, 17, d, 0.5) == pytest.approx(0.5 * received_power_mw(DEFAULT, 17, d, 1.0))
    p = received_power_mw(DEFAULT, -300, 100, 1.0)
    assert 0 <= p < 1e-30


def test_received_power_rejects_zero_gain():
    with pytest.raises(ValueError):
        received_power_mw(DEFAULT, 17, 100, 0.0)


@given(st.floats(min_value=1e-15, max_value=1e6))
def test_dbm_roundtrip(p):
    assert dbm_to_mw(mw_to_dbm(p)) == pytest.approx(p, rel=1e-12)


@given(st.floats(min_value=1.0, max_value=5000.0), st.floats(min_value=1.001, max_value=3.0))
def test_monotone_in_distance(d, factor):
    assert path_loss_db(DEFAULT, d * factor) > path_loss_db(DEFAULT, d)
    assert received_power_mw(DEFAULT, 17, d * factor, 1.0) < received_power_mw(DEFAULT, 17, d, 1.0)


@given(
    st.floats(min_value=-200, max_value=0),
    st.floats(min_value=1.0, max_value=1e8),
)
def test_noise_positive(density, bandwidth):
    assert noise_power_mw(ChannelParams(noise_density=density, rb_bandwidth=bandwidth)) > 0


def test_vectorized():
    d = np.array([40.0, 100.0, 1000.0])
    assert np.allclose(path_loss_db(DEFAULT, d), [path_loss_db(DEFAULT, x) for x in d])
    assert np.allclose(dbm_to_mw(np.array([0.0, 20.0])), [1.0, 100.0])
