"""Routing metrics: ETX, ETT, WCETT and the switching-cost aware MCR.

``INFINITE_METRIC`` marks unusable links. It orders above every finite value
and any sum or weighted combination containing it stays infinite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Hashable, Mapping, Sequence

INFINITE_METRIC = math.inf


def _check_prob(name: str, p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {p}")


@dataclass(frozen=True)
class LossPair:
    p_f: float
    p_r: float

    def __post_init__(self) -> None:
        _check_prob("p_f", self.p_f)
        _check_prob("p_r", self.p_r)


def error_prob(lp: LossPair) -> float:
    """Probability that a data frame or its acknowledgement is lost."""
    return 1.0 - (1.0 - lp.p_f) * (1.0 - lp.p_r)


def etx(p: float) -> float:
    _check_prob("p", p)
    if p >= 1.0:
        return INFINITE_METRIC
    return 1.0 / (1.0 - p)


def ett(etx_value: float, size_bits: float, bandwidth_bps: float) -> float:
    if bandwidth_bps <= 0:
        raise ValueError("bandwidth must be > 0")
    if etx_value == INFINITE_METRIC:
        return INFINITE_METRIC
    return etx_value * size_bits / bandwidth_bps


@dataclass(frozen=True)
class HopSpec:
    """One hop of a path. ``usage`` maps each local interface/channel to its busy fraction."""

    etx: float
    size_bits: float
    bandwidth_bps: float
    channel: Hashable
    usage: Mapping[Hashable, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.size_bits <= 0 or self.bandwidth_bps <= 0:
            raise ValueError("size_bits and bandwidth_bps must be > 0")
        for k, u in self.usage.items():
            _check_prob(f"usage[{k!r}]", u)

    @property
    def ett(self) -> float:
        return ett(self.etx, self.size_bits, self.bandwidth_bps)


@dataclass(frozen=True)
class PathSpec:
    hops: tuple[HopSpec, ...]

    def __post_init__(self) -> None:
        if not self.hops:
            raise ValueError("a path needs at least one hop")

    @classmethod
    def of(cls, hops: Sequence[HopSpec]) -> "PathSpec":
        return cls(tuple(hops))


def channel_sums(path: PathSpec) -> dict[Hashable, float]:
    """ETT summed per channel (the per-channel load term)."""
    sums: dict[Hashable, float] = {}
    for hop in path.hops:
        sums[hop.channel] = sums.get(hop.channel, 0.0) + hop.ett
    return sums


def _weighted(beta: float, total: float, bottleneck: float) -> float:
    if not 0.0 <= beta <= 1.0:
        raise ValueError(f"beta must lie in [0, 1], got {beta}")
    if math.isinf(total) or math.isinf(bottleneck):
        return INFINITE_METRIC
    return (1.0 - beta) * total + beta * bottleneck


def wcett(path: PathSpec, beta: float) -> float:
    total = sum(h.ett for h in path.hops)
    return _weighted(beta, total, max(channel_sums(path).values()))


def switching_cost(hop: HopSpec, switching_delay_s: float) -> float:
    p_switch = sum(u for ch, u in hop.usage.items() if ch != hop.channel)
    return p_switch * switching_delay_s


def mcr(path: PathSpec, beta: float, switching_delay_s: float) -> float:
    total = sum(h.ett + switching_cost(h, switching_delay_s) for h in path.hops)
    return _weighted(beta, total, max(channel_sums(path).values()))
