"""Capacity and interference model.

Throughput of a multi-hop path is computed analytically::

    C_base * min over links of  share(link) * adjacent(link) * coupling(relay)

``share`` is ``1/|contention set|`` for co-channel links within carrier-sense
range of each other, ``adjacent`` is the penalty from partially overlapping
channels used nearby, and ``coupling`` the penalty at a relay whose ingress and
egress radios sit close together on the node's antenna axis.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .core import Band, Channel, Topology, channel_separation_mhz, INCOMPARABLE

DirectedLink = tuple[int, int]


class Protocol(enum.Enum):
    TCP = "tcp"
    UDP = "udp"

    @classmethod
    def parse(cls, value: "Protocol | str") -> "Protocol":
        if isinstance(value, Protocol):
            return value
        v = str(value).lower().replace("like", "")
        try:
            return cls(v)
        except ValueError:
            raise ValueError(f"unknown protocol {value!r}") from None


class OverlapKind(enum.Enum):
    CO_CHANNEL = "co-channel"
    ADJACENT = "adjacent"
    ORTHOGONAL = "orthogonal"


@dataclass(frozen=True)
class OverlapClass:
    kind: OverlapKind
    separation_mhz: int | None = None


class Curve:
    """Piecewise-linear multiplier curve, clamped at both ends."""

    def __init__(self, points: Iterable[tuple[float, float]], monotone: bool = False):
        pts = sorted((float(x), float(y)) for x, y in points)
        if not pts:
            raise ValueError("curve needs at least one point")
        xs = [p[0] for p in pts]
        if len(set(xs)) != len(xs):
            raise ValueError("curve x values must be distinct")
        ys = [p[1] for p in pts]
        if any(y < 0.0 or y > 1.0 for y in ys):
            raise ValueError("curve multipliers must lie in [0, 1]")
        if monotone and any(b < a for a, b in zip(ys, ys[1:])):
            raise ValueError("curve must be monotone non-decreasing")
        self.points = tuple(pts)
        self._x = np.array(xs)
        self._y = np.array(ys)

    def __call__(self, x: float) -> float:
        return float(np.interp(x, self._x, self._y))

    def __repr__(self) -> str:
        return f"Curve({list(self.points)!r})"


# Orthogonality sweeps: mean UDP throughput of a 3-station chain whose two
# links use the given channel pair, normalized by the orthogonal reference.
_B24_SWEEP_UDP = {5: 3.55, 10: 3.42, 15: 3.47, 20: 5.18, 25: 6.85}
_B24_REFERENCE = 7.08
_B5_SWEEP_UDP = {20: 4.97, 40: 6.59, 60: 6.82, 80: 8.17, 100: 9.45, 120: 9.76}
_B5_REFERENCE = 9.76

# Antenna separation sweep, channels 1/11, TCP means (Mbps) per distance (cm).
_COUPLING_TCP = {0: 2.31, 5: 2.95, 10: 3.36, 15: 3.47, 20: 4.60, 25: 5.44, 30: 5.59}


def default_adjacent_curves() -> dict[Band, Curve]:
    return {
        Band.B24: Curve((d, v / _B24_REFERENCE) for d, v in _B24_SWEEP_UDP.items()),
        Band.B5: Curve((d, v / _B5_REFERENCE) for d, v in _B5_SWEEP_UDP.items()),
    }


def default_coupling_curve() -> Curve:
    ref = _COUPLING_TCP[30]
    return Curve(((d, v / ref) for d, v in _COUPLING_TCP.items()), monotone=True)


def default_baselines() -> dict[tuple[Band, Protocol], float]:
    # Single-hop saturation throughput (Mbps): 12 Mbps PHY at 5 GHz, 11 Mbps at 2.4 GHz.
    return {
        (Band.B5, Protocol.UDP): 9.93,
        (Band.B5, Protocol.TCP): 8.82,
        (Band.B24, Protocol.UDP): 7.37,
        (Band.B24, Protocol.TCP): 6.35,
    }


@dataclass
class RadioParams:
    alpha_header_bits: float = 320.0
    beta_payload_bits: float = 11680.0
    # 802.11b basic access, short preamble, 1500-byte MSDU at 11 Mbps.
    t_difs: float = 50.0
    t_sifs: float = 10.0
    t_bo: float = 310.0
    t_rts: float = 0.0
    t_cts: float = 0.0
    t_ack: float = 106.0
    t_data: float = 1207.3
    ack_rate_mbps: float = 1.0
    orthogonality_threshold_mhz: dict[Band, float] = field(
        default_factory=lambda: {Band.B24: 25.0, Band.B5: 120.0}
    )
    adjacent_degradation: dict[Band, Curve] = field(default_factory=default_adjacent_curves)
    coupling: Curve = field(default_factory=default_coupling_curve)
    baselines: dict[tuple[Band, Protocol], float] = field(default_factory=default_baselines)
    per_packet_overhead_ms: float = 1.0
    partial_stack_overhead_ms: float = 0.28
    hop_latency_ms: float = 0.9

    def __post_init__(self) -> None:
        for name in ("t_difs", "t_sifs", "t_bo", "t_rts", "t_cts", "t_ack", "t_data"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be >= 0")
        if self.per_packet_overhead_ms < 0 or self.hop_latency_ms < 0:
            raise ValueError("latency parameters must be >= 0")

    def baseline(self, band: Band, protocol: Protocol) -> float:
        return self.baselines[(band, protocol)]


def tmt_app(tmt_mac_bps: float, alpha_bits: float, beta_bits: float) -> float:
    """Application-level throughput once ``alpha_bits`` of upper-layer headers ride on each datagram."""
    if beta_bits <= 0:
        raise ValueError("datagram length must be > 0")
    if alpha_bits < 0 or tmt_mac_bps < 0:
        raise ValueError("header length and MAC throughput must be >= 0")
    return beta_bits / (alpha_bits + beta_bits) * tmt_mac_bps


def delay_sdu_s(params: RadioParams, include_cts: bool = True) -> float:
    total = (
        params.t_difs
        + params.t_sifs
        + params.t_bo
        + params.t_rts
        + (params.t_cts if include_cts else 0.0)
        + params.t_ack
        + params.t_data
    )
    return total * 1e-6


def tmt_mac(params: RadioParams, msdu_size_bits: float, include_cts: bool = True) -> float:
    """MAC-level maximum throughput in bps.

    ``include_cts=False`` reproduces the printed delay formula, which leaves
    the CTS interval out of the sum.
    """
    delay = delay_sdu_s(params, include_cts)
    if delay <= 0:
        raise ValueError("total SDU delay must be > 0")
    return msdu_size_bits / delay


def classify_overlap(a: Channel, b: Channel, params: RadioParams | None = None) -> OverlapClass:
    params = params or RadioParams()
    sep = channel_separation_mhz(a, b)
    if sep is INCOMPARABLE:
        return OverlapClass(OverlapKind.ORTHOGONAL, None)
    if sep == 0:
        return OverlapClass(OverlapKind.CO_CHANNEL, 0)
    if sep >= params.orthogonality_threshold_mhz[a.band]:
        return OverlapClass(OverlapKind.ORTHOGONAL, sep)
    return OverlapClass(OverlapKind.ADJACENT, sep)


def gupta_kumar_bound(n_nodes: int, w_bps: float, mode: str = "random2d", alpha: float | None = None) -> float:
    """Per-node throughput bound shape with the Theta constants set to 1.

    ``mode`` is ``"random3d"`` (W/sqrt(n ln n)), ``"random2d"`` (W/sqrt(n)) or
    ``"arbitrary"`` (W/(alpha sqrt(n)), alpha > 2).
    """
    if n_nodes < 2:
        raise ValueError("need at least 2 nodes")
    mode = mode.lower()
    if mode == "random3d":
        return w_bps / math.sqrt(n_nodes * math.log(n_nodes))
    if mode == "random2d":
        return w_bps / math.sqrt(n_nodes)
    if mode == "arbitrary":
        if alpha is None or alpha <= 2:
            raise ValueError("arbitrary networks need an attenuation exponent alpha > 2")
        return w_bps / (alpha * math.sqrt(n_nodes))
    raise ValueError(f"unknown mode {mode!r}")


class UnassignedLinkError(ValueError):
    pass


class DisconnectedPathError(ValueError):
    pass


@dataclass(frozen=True)
class ContentionSet:
    channel: Channel
    links: tuple[DirectedLink, ...]

    def __len__(self) -> int:
        return len(self.links)

    def __contains__(self, link: object) -> bool:
        return link in self.links


def _links_in_range(topology: Topology, l1: DirectedLink, l2: DirectedLink) -> bool:
    return any(topology.in_interference_range(x, y) for x in l1 for y in l2)


def _checked(assignment: Mapping[DirectedLink, Channel | None]) -> dict[DirectedLink, Channel]:
    out = {}
    for link, ch in assignment.items():
        if ch is None:
            raise UnassignedLinkError(f"link {link} has no channel")
        out[link] = ch
    return out


def contention_sets(
    topology: Topology, channel_assignment: Mapping[DirectedLink, Channel | None]
) -> list[ContentionSet]:
    """Partition the active links into groups sharing one channel's airtime."""
    assignment = _checked(channel_assignment)
    links = sorted(assignment)
    parent = {l: l for l in links}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, a in enumerate(links):
        for b in links[i + 1:]:
            if assignment[a] == assignment[b] and _links_in_range(topology, a, b):
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[max(ra, rb)] = min(ra, rb)
    groups: dict[DirectedLink, list[DirectedLink]] = {}
    for l in links:
        groups.setdefault(find(l), []).append(l)
    return [ContentionSet(assignment[root], tuple(members)) for root, members in sorted(groups.items())]


def adjacent_factor(
    topology: Topology,
    assignment: Mapping[DirectedLink, Channel],
    link: DirectedLink,
    params: RadioParams,
) -> float:
    """Worst multiplier caused by partially overlapping channels used near ``link``."""
    own = assignment[link]
    factor = 1.0
    for other, ch in assignment.items():
        if other == link or not _links_in_range(topology, link, other):
            continue
        ov = classify_overlap(own, ch, params)
        if ov.kind is OverlapKind.ADJACENT:
            factor = min(factor, params.adjacent_degradation[own.band](ov.separation_mhz))
    return factor


def path_links(path: Sequence[int]) -> list[DirectedLink]:
    return [(path[i], path[i + 1]) for i in range(len(path) - 1)]


def path_throughput(
    topology: Topology,
    channel_assignment: Mapping[DirectedLink, Channel | None],
    path: Sequence[int],
    params: RadioParams,
    protocol: Protocol | str = Protocol.UDP,
    interfaces: Mapping[DirectedLink, tuple[int, int]] | None = None,
) -> float:
    """Saturation throughput (Mbps) of ``path``.

    Every entry of ``channel_assignment`` counts as an active link competing for
    airtime; links of ``path`` must be present. ``interfaces`` optionally gives
    ``(egress iface id, ingress iface id)`` per link; otherwise the first data
    interface tuned to the link's channel is assumed at each end.
    """
    protocol = Protocol.parse(protocol)
    if len(path) < 2:
        raise DisconnectedPathError("a path needs at least two nodes")
    links = path_links(path)
    for u, v in links:
        if not topology.adjacent(u, v):
            raise DisconnectedPathError(f"nodes {u} and {v} are not adjacent")
    assignment = _checked(channel_assignment)
    for link in links:
        if link not in assignment:
            raise UnassignedLinkError(f"path link {link} has no channel")
    sets = contention_sets(topology, assignment)
    size = {l: len(cs) for cs in sets for l in cs.links}

    coupling = {l: 1.0 for l in links}

    def iface(node_id: int, link: DirectedLink, end: int):
        node = topology.node(node_id)
        if interfaces is not None and link in interfaces:
            wanted = interfaces[link][end]
            return next(i for i in node.interfaces if i.id == wanted)
        found = node.interface_on(assignment[link])
        if found is None:
            raise DisconnectedPathError(f"node {node_id} has no radio on {assignment[link]}")
        return found

    for k in range(1, len(path) - 1):
        relay = path[k]
        l_in, l_out = links[k - 1], links[k]
        rx = iface(relay, l_in, 1)
        tx = iface(relay, l_out, 0)
        if rx.id != tx.id:
            c = params.coupling(abs(rx.antenna_position_cm - tx.antenna_position_cm))
            coupling[l_in] = min(coupling[l_in], c)
            coupling[l_out] = min(coupling[l_out], c)

    share = min(
        adjacent_factor(topology, assignment, l, params) / size[l] * coupling[l] for l in links
    )
    band = assignment[links[0]].band
    return params.baseline(band, protocol) * share
