"""Random pico-tier network instances.

A :class:`Scenario` holds the received-power tensor ``omega`` with shape
``(K, N, B)``: ``omega[k, n, b]`` is the power (mW) that PBS ``b`` receives
from user ``k`` transmitting on resource block ``n``. Every user reaches
every PBS, which is what makes a co-channel user on another PBS an
interferer.

Users are indexed from 0 in arrays; the last ``K - NU`` users are the
outpatients (users NU+1..K in 1-based numbering).
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .channel import ChannelParams, dbm_to_mw, noise_power_mw, received_power_mw

__all__ = [
    "ScenarioConfig",
    "Scenario",
    "generate",
    "max_rbs_per_user",
    "scenario_to_dict",
    "scenario_from_dict",
    "save_scenario",
    "load_scenario",
]


@dataclass(frozen=True)
class ScenarioConfig:
    """Network dimensions and radio constants.

    ``num_mbs`` and ``rbs_per_mbs`` describe the macro tier for reference
    only; spectrum partitioning keeps it out of the optimization.
    """

    num_pbs: int = 2
    rbs_per_pbs: int = 5
    num_users: int = 10
    num_normal: int = 7
    distance_range: tuple[float, float] = (40.0, 100.0)
    tx_per_rb: float = 17.0
    max_power_per_connection: float = 23.0
    channel: ChannelParams = field(default_factory=ChannelParams)
    fading: bool = True
    num_mbs: int = 1
    rbs_per_mbs: int = 10

    def __post_init__(self):
        object.__setattr__(self, "distance_range", tuple(float(d) for d in self.distance_range))
        lo, hi = self.distance_range
        if self.num_pbs < 1 or self.rbs_per_pbs < 1 or self.num_users < 1:
            raise ValueError("num_pbs, rbs_per_pbs and num_users must be >= 1")
        if not 0 <= self.num_normal < self.num_users:
            raise ValueError(
                f"num_normal must satisfy 0 <= NU < K, got NU={self.num_normal}, K={self.num_users}"
            )
        if self.num_pbs * self.rbs_per_pbs < self.num_users:
            raise ValueError(
                f"{self.num_pbs}x{self.rbs_per_pbs} slots cannot give each of "
                f"{self.num_users} users a resource block"
            )
        if not (0 < lo <= hi and math.isfinite(hi)):
            raise ValueError(f"invalid distance_range {self.distance_range}")
        if max_rbs_per_user(self) < 1:
            raise ValueError("max_power_per_connection is below the per-RB transmit power")

    @property
    def num_outpatients(self) -> int:
        return self.num_users - self.num_normal

    @property
    def shape(self) -> tuple[int, int, int]:
        """``(K, N, B)``, the shape of ``Scenario.omega``."""
        return (self.num_users, self.rbs_per_pbs, self.num_pbs)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["distance_range"] = list(self.distance_range)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioConfig":
        d = dict(d)
        if "channel" in d:
            d["channel"] = ChannelParams(**d["channel"])
        if "distance_range" in d:
            d["distance_range"] = tuple(d["distance_range"])
        return cls(**d)


def max_rbs_per_user(config: ScenarioConfig) -> int:
    """Number of RBs a user can drive at ``tx_per_rb`` within its power cap."""
    ratio = dbm_to_mw(config.max_power_per_connection) / dbm_to_mw(config.tx_per_rb)
    # guard against 10**(x/10) rounding just below an exact integer ratio
    return int(math.floor(ratio * (1 + 1e-12)))


@dataclass(frozen=True, eq=False)
class Scenario:
    """One randomized network instance.

    Attributes:
        config: the generating configuration.
        omega: received powers in mW, shape ``(K, N, B)``.
        sigma: noise power per RB in mW (identical for every slot).
        op_flags: boolean mask of outpatients, shape ``(K,)``.
        seed: seed the instance was drawn from (``None`` for hand-built ones).
        distances: user-to-PBS distances in meters, shape ``(K, B)``.
    """

    config: ScenarioConfig
    omega: np.ndarray
    sigma: float
    op_flags: np.ndarray
    seed: int | None = None
    distances: np.ndarray | None = None

    def __post_init__(self):
        omega = np.array(self.omega, dtype=float)
        if omega.shape != self.config.shape:
            raise ValueError(f"omega has shape {omega.shape}, expected {self.config.shape}")
        if not np.all(omega > 0) or not np.all(np.isfinite(omega)):
            raise ValueError("omega entries must be finite and positive")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        flags = np.array(self.op_flags, dtype=bool)
        if flags.shape != (self.config.num_users,):
            raise ValueError("op_flags must have one entry per user")
        if int(flags.sum()) != self.config.num_outpatients:
            raise ValueError("number of op_flags set must equal K - NU")
        omega.setflags(write=False)
        flags.setflags(write=False)
        object.__setattr__(self, "omega", omega)
        object.__setattr__(self, "op_flags", flags)
        object.__setattr__(self, "sigma", float(self.sigma))
        if self.distances is not None:
            dist = np.array(self.distances, dtype=float)
            dist.setflags(write=False)
            object.__setattr__(self, "distances", dist)

    @property
    def snr(self) -> np.ndarray:
        """Interference-free SINR ``omega / sigma``, shape ``(K, N, B)``."""
        return self.omega / self.sigma

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            self.config == other.config
            and self.sigma == other.sigma
            and self.seed == other.seed
            and np.array_equal(self.omega, other.omega)
            and np.array_equal(self.op_flags, other.op_flags)
            and (
                (self.distances is None and other.distances is None)
                or (
                    self.distances is not None
                    and other.distances is not None
                    and np.array_equal(self.distances, other.distances)
                )
            )
        )


def generate(config: ScenarioConfig, seed: int) -> Scenario:
    """Draw a scenario: i.i.d. uniform distances per (user, PBS), Rayleigh
    gains per (user, RB, PBS).

    Distances are drawn before gains, so two configurations that differ only
    in power levels share the same geometry and fading for a given seed.
    """
    K, N, B = config.shape
    rng = np.random.default_rng(seed)
    lo, hi = config.distance_range
    distances = rng.uniform(lo, hi, size=(K, B)) if hi > lo else np.full((K, B), lo)
    if config.fading:
        gains = rng.standard_exponential(size=(K, N, B))
        gains = np.maximum(gains, np.finfo(float).tiny)
    else:
        gains = np.ones((K, N, B))
    omega = received_power_mw(config.channel, config.tx_per_rb, distances[:, None, :], gains)
    op_flags = np.arange(K) >= config.num_normal
    return Scenario(
        config=config,
        omega=omega,
        sigma=noise_power_mw(config.channel),
        op_flags=op_flags,
        seed=seed,
        distances=distances,
    )


def scenario_to_dict(scenario: Scenario) -> dict:
    d = {
        "config": scenario.config.to_dict(),
        "seed": scenario.seed,
        "op_flags": [bool(f) for f in scenario.op_flags],
        "sigma": scenario.sigma,
        "omega": scenario.omega.tolist(),
    }
    if scenario.distances is not None:
        d["distances"] = scenario.distances.tolist()
    return d


def scenario_from_dict(d: dict) -> Scenario:
    return Scenario(
        config=ScenarioConfig.from_dict(d["config"]),
        omega=np.array(d["omega"], dtype=float),
        sigma=float(d["sigma"]),
        op_flags=np.array(d["op_flags"], dtype=bool),
        seed=d.get("seed"),
        distances=None if d.get("distances") is None else np.array(d["distances"], dtype=float),
    )


def save_scenario(scenario: Scenario, path) -> None:
    """Write a scenario as JSON. Floats use Python's shortest round-trip repr."""
    Path(path).write_text(json.dumps(scenario_to_dict(scenario), indent=1) + "\n")


def load_scenario(path) -> Scenario:
    return scenario_from_dict(json.loads(Path(path).read_text()))


def with_config(scenario: Scenario, **changes) -> Scenario:
    """Copy of ``scenario`` with some config fields replaced (omega unchanged)."""
    return replace(scenario, config=replace(scenario.config, **changes))
