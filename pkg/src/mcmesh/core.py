"""Domain model: channels, interfaces, nodes, links and topologies.

Addresses are opaque integers. The scheme is fixed so that runs are
reproducible and collision-free::

    ip  = 10.<node_id // 256>.<node_id % 256>.<interface_id + 1>
    mac = 02:00:<node_id (4 bytes, big endian)> with the low byte
          replaced by interface_id

Every node keeps exactly one signaling interface and one or more data
interfaces.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence


class TopologyError(ValueError):
    """Raised when a scenario description violates a topology invariant."""


class Band(enum.Enum):
    B24 = "b24"
    B5 = "b5"

    @classmethod
    def parse(cls, value: "Band | str") -> "Band":
        if isinstance(value, Band):
            return value
        key = str(value).lower().replace(".", "").replace("ghz", "")
        aliases = {"b24": cls.B24, "24": cls.B24, "b5": cls.B5, "5": cls.B5}
        try:
            return aliases[key]
        except KeyError:
            raise TopologyError(f"unknown band {value!r}") from None


# 802.11b channels usable by the hardware (1..11) and the 802.11a set.
BAND24_CHANNELS: tuple[int, ...] = tuple(range(1, 12))
BAND5_CHANNELS: tuple[int, ...] = (36, 40, 44, 48, 52, 56, 60, 64, 149, 153, 157, 161, 165)


def band_channels(band: Band) -> tuple[int, ...]:
    return BAND24_CHANNELS if band is Band.B24 else BAND5_CHANNELS


def center_frequency(band: Band, index: int) -> int:
    """Center frequency in MHz of channel ``index`` in ``band``."""
    if index not in band_channels(band):
        raise TopologyError(f"channel {index} is not a valid {band.value} channel")
    if band is Band.B24:
        return 2412 + 5 * (index - 1)
    return 5000 + 5 * index


@dataclass(frozen=True)
class Channel:
    band: Band
    index: int

    def __post_init__(self) -> None:
        center_frequency(self.band, self.index)

    @property
    def center_frequency(self) -> int:
        return center_frequency(self.band, self.index)

    @classmethod
    def b24(cls, index: int) -> "Channel":
        return cls(Band.B24, index)

    @classmethod
    def b5(cls, index: int) -> "Channel":
        return cls(Band.B5, index)

    def sort_key(self) -> tuple[str, int]:
        return (self.band.value, self.index)

    def __str__(self) -> str:
        return f"{self.band.value}:{self.index}"


class Incomparable:
    """Marker returned when two channels live in different bands."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "INCOMPARABLE"


INCOMPARABLE = Incomparable()


def channel_separation_mhz(a: Channel, b: Channel) -> int | Incomparable:
    if a.band is not b.band:
        return INCOMPARABLE
    return abs(a.center_frequency - b.center_frequency)


class Role(enum.Enum):
    SIGNALING = "signaling"
    DATA = "data"


def make_ip(node_id: int, interface_id: int) -> int:
    return (10 << 24) | ((node_id & 0xFFFF) << 8) | ((interface_id + 1) & 0xFF)


def make_mac(node_id: int, interface_id: int) -> int:
    return (0x02 << 40) | ((node_id & 0xFFFFFFFF) << 8) | (interface_id & 0xFF)


def format_ip(address: int) -> str:
    return ".".join(str((address >> shift) & 0xFF) for shift in (24, 16, 8, 0))


def format_mac(address: int) -> str:
    return ":".join(f"{(address >> shift) & 0xFF:02x}" for shift in range(40, -8, -8))


@dataclass
class Interface:
    id: int
    name: str
    role: Role
    channel: Channel
    ip_address: int
    mac_address: int
    rate_mbps: float = 12.0
    antenna_position_cm: float = 0.0

    def __post_init__(self) -> None:
        if self.rate_mbps <= 0:
            raise TopologyError(f"interface {self.name}: rate_mbps must be > 0")


@dataclass
class Node:
    node_id: int
    interfaces: list[Interface]
    position: tuple[float, float] = (0.0, 0.0)

    @property
    def signaling(self) -> Interface:
        return next(i for i in self.interfaces if i.role is Role.SIGNALING)

    @property
    def data_interfaces(self) -> list[Interface]:
        return [i for i in self.interfaces if i.role is Role.DATA]

    def data_channels(self) -> list[Channel]:
        return [i.channel for i in self.data_interfaces]

    def interface_on(self, channel: Channel) -> Interface | None:
        """First data interface tuned to ``channel``."""
        for iface in self.data_interfaces:
            if iface.channel == channel:
                return iface
        return None


def link_key(a: int, b: int) -> tuple[int, int]:
    """Canonical undirected link key."""
    return (a, b) if a < b else (b, a)


@dataclass
class Topology:
    nodes: list[Node] = field(default_factory=list)
    adjacency: set[tuple[int, int]] = field(default_factory=set)
    # None means every pair of nodes is within carrier-sense range.
    interference_pairs: set[tuple[int, int]] | None = None

    def __post_init__(self) -> None:
        self._by_id = {n.node_id: n for n in self.nodes}

    def node(self, node_id: int) -> Node:
        return self._by_id[node_id]

    @property
    def node_ids(self) -> list[int]:
        return [n.node_id for n in self.nodes]

    def neighbors(self, node_id: int) -> list[int]:
        out = []
        for a, b in self.adjacency:
            if a == node_id:
                out.append(b)
            elif b == node_id:
                out.append(a)
        return sorted(out)

    def adjacent(self, a: int, b: int) -> bool:
        return link_key(a, b) in self.adjacency

    def in_interference_range(self, a: int, b: int) -> bool:
        if a == b:
            return True
        if self.interference_pairs is None:
            return True
        key = link_key(a, b)
        return key in self.interference_pairs or key in self.adjacency

    def links(self) -> list[tuple[int, int]]:
        return sorted(self.adjacency)


@dataclass(frozen=True)
class InterfaceSpec:
    name: str
    role: Role
    channel: Channel
    rate_mbps: float = 12.0
    antenna_position_cm: float = 0.0


@dataclass(frozen=True)
class NodeSpec:
    node_id: int
    interfaces: tuple[InterfaceSpec, ...]
    position: tuple[float, float] = (0.0, 0.0)


@dataclass(frozen=True)
class TopologySpec:
    nodes: tuple[NodeSpec, ...] = ()
    links: tuple[tuple[int, int], ...] = ()
    interference: tuple[tuple[int, int], ...] | None = None


def build_topology(spec: TopologySpec) -> Topology:
    """Validate ``spec`` and build a :class:`Topology` with generated addresses."""
    seen: set[int] = set()
    nodes: list[Node] = []
    for ns in spec.nodes:
        if ns.node_id in seen:
            raise TopologyError(f"duplicate node id {ns.node_id}")
        seen.add(ns.node_id)
        roles = [i.role for i in ns.interfaces]
        if roles.count(Role.SIGNALING) != 1:
            raise TopologyError(
                f"node {ns.node_id}: expected exactly one signaling interface, "
                f"found {roles.count(Role.SIGNALING)}"
            )
        if Role.DATA not in roles:
            raise TopologyError(f"node {ns.node_id}: at least one data interface is required")
        ifaces = []
        for idx, ispec in enumerate(ns.interfaces):
            ifaces.append(
                Interface(
                    id=idx,
                    name=ispec.name,
                    role=ispec.role,
                    channel=ispec.channel,
                    ip_address=make_ip(ns.node_id, idx),
                    mac_address=make_mac(ns.node_id, idx),
                    rate_mbps=ispec.rate_mbps,
                    antenna_position_cm=ispec.antenna_position_cm,
                )
            )
        nodes.append(Node(ns.node_id, ifaces, tuple(ns.position)))

    def check_pair(a: int, b: int, what: str) -> tuple[int, int]:
        for x in (a, b):
            if x not in seen:
                raise TopologyError(f"{what} ({a}, {b}) references unknown node {x}")
        if a == b:
            raise TopologyError(f"{what} ({a}, {b}) is a self-loop")
        return link_key(a, b)

    adjacency = {check_pair(a, b, "link") for a, b in spec.links}
    interference = None
    if spec.interference is not None:
        interference = {check_pair(a, b, "interference pair") for a, b in spec.interference}
        interference |= adjacency
    return Topology(nodes, adjacency, interference)


def chain_spec(
    n: int,
    data_channels: Sequence[Channel],
    signaling: Channel | None = None,
    antenna_positions: Sequence[float] | None = None,
    rate_mbps: float = 12.0,
    spacing_m: float = 2.0,
) -> TopologySpec:
    """Linear chain 0-1-...-(n-1); every node carries the same interface set."""
    return grid_like_spec(
        n,
        [(i, i + 1) for i in range(n - 1)],
        data_channels,
        signaling=signaling,
        antenna_positions=antenna_positions,
        rate_mbps=rate_mbps,
        positions=[(i * spacing_m, 0.0) for i in range(n)],
    )


def grid_like_spec(
    n: int,
    links: Iterable[tuple[int, int]],
    data_channels: Sequence[Channel],
    signaling: Channel | None = None,
    antenna_positions: Sequence[float] | None = None,
    rate_mbps: float = 12.0,
    positions: Sequence[tuple[float, float]] | None = None,
) -> TopologySpec:
    signaling = signaling or Channel.b24(6)
    if antenna_positions is None:
        antenna_positions = [30.0 * k for k in range(len(data_channels))]
    nodes = []
    for i in range(n):
        ifaces = [InterfaceSpec("wlan0", Role.SIGNALING, signaling, rate_mbps)]
        for k, ch in enumerate(data_channels):
            ifaces.append(
                InterfaceSpec(f"ath{k}", Role.DATA, ch, rate_mbps, float(antenna_positions[k]))
            )
        pos = positions[i] if positions is not None else (float(i), 0.0)
        nodes.append(NodeSpec(i, tuple(ifaces), pos))
    return TopologySpec(tuple(nodes), tuple(links))


@dataclass(frozen=True)
class PacketRecord:
    src: int
    dst: int
    size_bytes: int
    flow_id: int = 0
    kind: str = "data"

    KINDS = ("data", "hello", "tc", "mid", "hna", "negotiation")

    def __post_init__(self) -> None:
        if self.size_bytes <= 0:
            raise ValueError("size_bytes must be > 0")
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown packet kind {self.kind!r}")


def address_book(topology: Topology) -> Mapping[int, tuple[int, int]]:
    """Map every interface address to ``(node_id, interface_id)``."""
    return {
        iface.ip_address: (node.node_id, iface.id)
        for node in topology.nodes
        for iface in node.interfaces
    }
