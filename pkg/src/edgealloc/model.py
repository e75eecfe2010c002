"""Domain types, wireless channel model, and random scenario generation.

All internal math is in linear SI units: bits, bits/s, seconds, Hz, watts.
dBm values are converted to watts at construction time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace, asdict

import numpy as np

C_LIGHT = 299_792_458.0  # speed of light, m/s
REFERENCE_DISTANCE_M = 1.0


def dbm_to_watts(dbm: float) -> float:
    """Convert a dBm power level to linear watts."""
    return 10.0 ** ((dbm - 30.0) / 10.0)


def watts_to_dbm(watts: float) -> float:
    """Convert linear watts to dBm."""
    if watts <= 0:
        raise ValueError(f"power must be positive, got {watts}")
    return 10.0 * math.log10(watts) + 30.0


@dataclass(frozen=True)
class ChannelParams:
    """Link-budget parameters shared by every node in a scenario.

    Attributes:
        bandwidth_hz: channel bandwidth B in Hz.
        tx_power_w: source transmit power in watts (20 dBm = 0.1 W).
        noise_psd_dbm_hz: noise power spectral density in dBm/Hz; the noise
            power is ``10**((psd - 30)/10) * bandwidth_hz`` watts.
        carrier_freq_hz: carrier frequency in Hz.
        pathloss_exponent: log-distance path-loss exponent, >= 2
            (2 = free space).
    """

    bandwidth_hz: float = 10e6
    tx_power_w: float = 0.1
    noise_psd_dbm_hz: float = -174.0
    carrier_freq_hz: float = 2.1e9
    pathloss_exponent: float = 2.0

    def __post_init__(self):
        for name in ("bandwidth_hz", "tx_power_w", "carrier_freq_hz"):
            v = getattr(self, name)
            if not math.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be a positive finite number, got {v}")
        if not math.isfinite(self.noise_psd_dbm_hz):
            raise ValueError("noise_psd_dbm_hz must be finite")
        if not math.isfinite(self.pathloss_exponent) or self.pathloss_exponent < 2.0:
            raise ValueError(
                f"pathloss_exponent must be >= 2, got {self.pathloss_exponent}"
            )
        if self.noise_power_w <= 0:
            raise ValueError("noise power must be strictly positive")

    @property
    def noise_power_w(self) -> float:
        """Noise power over the full bandwidth, in watts."""
        return dbm_to_watts(self.noise_psd_dbm_hz) * self.bandwidth_hz


def channel_gain(distance_m: float, channel: ChannelParams) -> float:
    """Log-distance power gain at ``distance_m`` meters.

    Free-space gain at the 1 m reference distance, decaying as
    ``(d0/d)**pathloss_exponent``.  Strictly positive and strictly
    decreasing in distance.
    """
    if not distance_m > 0:
        raise ValueError(f"distance_m must be positive, got {distance_m}")
    wavelength_term = C_LIGHT / (4.0 * math.pi * channel.carrier_freq_hz * REFERENCE_DISTANCE_M)
    ref_gain = wavelength_term * wavelength_term
    return ref_gain * (REFERENCE_DISTANCE_M / distance_m) ** channel.pathloss_exponent


def compute_rate(gain: float, channel: ChannelParams) -> float:
    """Achievable data rate in bits/s for a link with the given power gain."""
    if not gain > 0:
        raise ValueError(f"gain must be positive, got {gain}")
    snr = gain * channel.tx_power_w / channel.noise_power_w
    return channel.bandwidth_hz * math.log2(1.0 + snr)


def gain_for_rate(rate_bps: float, channel: ChannelParams) -> float:
    """Inverse of :func:`compute_rate`: the gain that yields ``rate_bps``."""
    if not rate_bps > 0:
        raise ValueError(f"rate_bps must be positive, got {rate_bps}")
    snr = 2.0 ** (rate_bps / channel.bandwidth_hz) - 1.0
    return snr * channel.noise_power_w / channel.tx_power_w


def distance_for_gain(gain: float, channel: ChannelParams) -> float:
    """Inverse of :func:`channel_gain`: the distance that yields ``gain``."""
    if not gain > 0:
        raise ValueError(f"gain must be positive, got {gain}")
    wavelength_term = C_LIGHT / (4.0 * math.pi * channel.carrier_freq_hz * REFERENCE_DISTANCE_M)
    ref_gain = wavelength_term * wavelength_term
    return REFERENCE_DISTANCE_M * (ref_gain / gain) ** (1.0 / channel.pathloss_exponent)


@dataclass(frozen=True)
class Task:
    """One unit of offloadable work: arrival index (1-based) and size in bits."""

    index: int
    size_bits: float

    def __post_init__(self):
        if self.index < 1:
            raise ValueError(f"task index must be >= 1, got {self.index}")
        if not self.size_bits > 0:
            raise ValueError(f"size_bits must be positive, got {self.size_bits}")


@dataclass(frozen=True)
class EdgeNode:
    """A neighboring compute node reachable over one wireless link.

    ``rate_bps`` is the link data rate and ``cpu_bps`` the compute speed,
    both in bits/s, so a task of ``d`` bits costs ``d/rate_bps`` to ship
    and ``d/cpu_bps`` to process.
    """

    id: int
    distance_m: float
    gain: float
    rate_bps: float
    cpu_bps: float

    def __post_init__(self):
        if self.id < 1:
            raise ValueError(f"node id must be >= 1, got {self.id}")
        for name in ("distance_m", "gain", "rate_bps", "cpu_bps"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def unit_latency_s(self) -> float:
        """Seconds needed per bit to both transmit and compute: 1/r + 1/f."""
        return 1.0 / self.rate_bps + 1.0 / self.cpu_bps


@dataclass(frozen=True)
class Scenario:
    """A full problem instance: ordered tasks, node fleet, and a time budget."""

    tasks: tuple[Task, ...]
    nodes: tuple[EdgeNode, ...]
    t_tot_s: float
    channel: ChannelParams
    seed: int = 0

    def __post_init__(self):
        if len(self.tasks) < 1:
            raise ValueError("scenario needs at least one task")
        if len(self.nodes) < 1:
            raise ValueError("scenario needs at least one node")
        for pos, task in enumerate(self.tasks, start=1):
            if task.index != pos:
                raise ValueError("task indices must be consecutive starting at 1")
        ids = [n.id for n in self.nodes]
        if len(set(ids)) != len(ids):
            raise ValueError("node ids must be unique")
        # t_tot = 0 is a legal degenerate budget (nothing fits); negatives are not.
        if not self.t_tot_s >= 0 or not math.isfinite(self.t_tot_s):
            raise ValueError(f"t_tot_s must be finite and >= 0, got {self.t_tot_s}")

    @property
    def load_warning(self) -> bool:
        """True when some task alone would blow the budget on some node.

        The analysis assumes each task's normalized load
        ``(1/r + 1/f) * d / t_tot`` stays below 1; generation does not
        enforce that, it only flags it here so sweeps can filter or report.
        """
        if self.t_tot_s == 0:
            return True
        worst = max(n.unit_latency_s for n in self.nodes)
        biggest = max(t.size_bits for t in self.tasks)
        return worst * biggest / self.t_tot_s >= 1.0

    def check_rate_consistency(self, rel_tol: float = 1e-9) -> None:
        """Raise ValueError unless every node's rate matches its gain."""
        for node in self.nodes:
            expected = compute_rate(node.gain, self.channel)
            if not math.isclose(node.rate_bps, expected, rel_tol=rel_tol):
                raise ValueError(
                    f"node {node.id}: rate {node.rate_bps} inconsistent with "
                    f"gain (expected {expected})"
                )

    def to_json(self, indent: int | None = 2) -> str:
        doc = {
            "t_tot_s": self.t_tot_s,
            "seed": self.seed,
            "channel": asdict(self.channel),
            "tasks": [asdict(t) for t in self.tasks],
            "nodes": [asdict(n) for n in self.nodes],
        }
        return json.dumps(doc, indent=indent)

    @classmethod
    def from_json(cls, text: str, validate_rates: bool = True) -> "Scenario":
        doc = json.loads(text)
        scenario = cls(
            tasks=tuple(Task(**t) for t in doc["tasks"]),
            nodes=tuple(EdgeNode(**n) for n in doc["nodes"]),
            t_tot_s=doc["t_tot_s"],
            channel=ChannelParams(**doc["channel"]),
            seed=doc.get("seed", 0),
        )
        if validate_rates:
            scenario.check_rate_consistency()
        return scenario


def _check_range(name, lo, hi):
    if lo > hi:
        raise ValueError(f"{name}: inverted range ({lo}, {hi})")
    if not lo > 0:
        raise ValueError(f"{name}: lower bound must be positive, got {lo}")


@dataclass(frozen=True)
class ScenarioConfig:
    """Distribution parameters for random scenario generation.

    Defaults follow the standard experiment setup: 10 tasks of 50-100 Mbit,
    10 nodes at 10-100 m with compute speeds of 1e8-5e8 bits/s.
    """

    n_tasks: int = 10
    n_nodes: int = 10
    t_tot_s: float = 1.0
    distance_range_m: tuple[float, float] = (10.0, 100.0)
    task_size_range_bits: tuple[float, float] = (50e6, 100e6)
    cpu_range_bps: tuple[float, float] = (1e8, 5e8)
    channel: ChannelParams = field(default_factory=ChannelParams)

    def __post_init__(self):
        if self.n_tasks < 1 or self.n_nodes < 1:
            raise ValueError("n_tasks and n_nodes must be >= 1")
        if not self.t_tot_s >= 0:
            raise ValueError(f"t_tot_s must be >= 0, got {self.t_tot_s}")
        _check_range("distance_range_m", *self.distance_range_m)
        _check_range("task_size_range_bits", *self.task_size_range_bits)
        _check_range("cpu_range_bps", *self.cpu_range_bps)

    def with_overrides(self, **kwargs) -> "ScenarioConfig":
        return replace(self, **kwargs)


def generate_scenario(config: ScenarioConfig, seed: int) -> Scenario:
    """Draw a random scenario; a pure function of (config, seed).

    Draw order is part of the determinism contract: node distances first,
    then node compute speeds, then task sizes, all uniform over their
    configured ranges.
    """
    rng = np.random.default_rng(seed)
    distances = rng.uniform(*config.distance_range_m, size=config.n_nodes)
    cpus = rng.uniform(*config.cpu_range_bps, size=config.n_nodes)
    sizes = rng.uniform(*config.task_size_range_bits, size=config.n_tasks)

    nodes = []
    for j in range(config.n_nodes):
        g = channel_gain(float(distances[j]), config.channel)
        nodes.append(
            EdgeNode(
                id=j + 1,
                distance_m=float(distances[j]),
                gain=g,
                rate_bps=compute_rate(g, config.channel),
                cpu_bps=float(cpus[j]),
            )
        )
    tasks = tuple(Task(index=i + 1, size_bits=float(sizes[i])) for i in range(config.n_tasks))
    return Scenario(
        tasks=tasks,
        nodes=tuple(nodes),
        t_tot_s=config.t_tot_s,
        channel=config.channel,
        seed=int(seed) & 0xFFFFFFFFFFFFFFFF,
    )
