"""Radio-link primitives for the pico tier.

Power quantities are plain floats: dBm at the boundaries, milliwatts for
every SINR computation. The path-loss model is a log-distance law whose
intercept and slope are configurable (defaults are the common urban
pico-cell constants 140.7 + 36.7 log10(d_km)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChannelParams",
    "dbm_to_mw",
    "mw_to_dbm",
    "path_loss_db",
    "noise_power_mw",
    "rayleigh_power_gain",
    "received_power_mw",
]


@dataclass(frozen=True)
class ChannelParams:
    """Constants of the link budget.

    Attributes:
        pl_intercept: path loss at 1 km, dB.
        pl_slope: path-loss increase per decade of distance, dB.
        noise_density: thermal noise density, dBm/Hz.
        rb_bandwidth: bandwidth of one resource block, Hz.
    """

    pl_intercept: float = 140.7
    pl_slope: float = 36.7
    noise_density: float = -162.0
    rb_bandwidth: float = 180e3

    def __post_init__(self):
        if not self.pl_slope > 0:
            raise ValueError(f"pl_slope must be positive, got {self.pl_slope}")
        if not self.rb_bandwidth > 0:
            raise ValueError(f"rb_bandwidth must be positive, got {self.rb_bandwidth}")
        for name in ("pl_intercept", "noise_density"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")


def dbm_to_mw(x):
    """Convert dBm to milliwatts. Accepts scalars or arrays."""
    if np.ndim(x) == 0:
        x = float(x)
        if not math.isfinite(x):
            raise ValueError(f"power in dBm must be finite, got {x}")
        return 10.0 ** (x / 10.0)
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise ValueError("power in dBm must be finite")
    return np.power(10.0, x / 10.0)


def mw_to_dbm(p):
    """Convert milliwatts to dBm; ``p`` must be strictly positive."""
    if np.ndim(p) == 0:
        p = float(p)
        if not p > 0:
            raise ValueError(f"power in mW must be positive, got {p}")
        return 10.0 * math.log10(p)
    p = np.asarray(p, dtype=float)
    if not np.all(p > 0):
        raise ValueError("power in mW must be positive")
    return 10.0 * np.log10(p)


def path_loss_db(params: ChannelParams, distance):
    """Log-distance path loss in dB for ``distance`` in meters."""
    d = np.asarray(distance, dtype=float)
    if not np.all(d > 0):
        raise ValueError("distance must be positive")
    pl = params.pl_intercept + params.pl_slope * np.log10(d / 1000.0)
    return float(pl) if pl.ndim == 0 else pl


def noise_power_mw(params: ChannelParams) -> float:
    """AWGN power over one resource block, in mW."""
    return dbm_to_mw(params.noise_density + 10.0 * math.log10(params.rb_bandwidth))


def rayleigh_power_gain(rng: np.random.Generator, size=None):
    """Draw unit-mean exponential power gains (Rayleigh amplitude fading).

    Zero draws, which the exponential sampler can in principle return, are
    replaced by the smallest positive double so gains stay strictly positive.
    """
    g = rng.standard_exponential(size)
    return np.maximum(g, np.finfo(float).tiny) if size is not None else max(float(g), np.finfo(float).tiny)


def received_power_mw(params: ChannelParams, tx_dbm, distance, gain):
    """Power received at the base station: tx minus path loss, scaled by fading."""
    g = np.asarray(gain, dtype=float)
    if not np.all(g > 0):
        raise ValueError("fading gain must be positive")
    rx_dbm = np.asarray(tx_dbm, dtype=float) - path_loss_db(params, distance)
    p = np.power(10.0, rx_dbm / 10.0) * g
    return float(p) if p.ndim == 0 else p
