"""Channel negotiation between neighboring nodes.

Each link has a client (the lower node id) and a server. Every round the
client scans, ships its quality list to the server, the server scans too,
merges both lists keeping the worst value per channel, and picks the allowed
channel whose surrounding window is quietest. The client then switches only
when the gain clears a dBm threshold, and both ends hand a
:class:`NegotiationPacket` to their bond.

Quality values are interference levels in dBm: larger means a stronger
interferer, hence a worse channel.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

from .core import Band, Channel, Topology, band_channels, link_key

FLOOR_DBM = -100.0


class NegotiationError(ValueError):
    pass


@dataclass(frozen=True)
class QualityList:
    band: Band
    values: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.values) != len(band_channels(self.band)):
            raise NegotiationError("quality list does not cover the band")
        for v in self.values:
            if not FLOOR_DBM <= v <= 0.0:
                raise NegotiationError(f"quality {v} dBm outside [{FLOOR_DBM}, 0]")

    @classmethod
    def floor(cls, band: Band) -> "QualityList":
        return cls(band, (FLOOR_DBM,) * len(band_channels(band)))

    @classmethod
    def from_levels(cls, band: Band, levels: Mapping[int, float]) -> "QualityList":
        """Build from ``{channel index: dBm}``; unlisted channels sit at the floor."""
        chans = band_channels(band)
        unknown = set(levels) - set(chans)
        if unknown:
            raise NegotiationError(f"channels {sorted(unknown)} not in band {band.value}")
        return cls(band, tuple(max(FLOOR_DBM, float(levels.get(c, FLOOR_DBM))) for c in chans))

    def position(self, channel: int) -> int:
        return band_channels(self.band).index(channel)

    def __getitem__(self, channel: int) -> float:
        return self.values[self.position(channel)]


@dataclass(frozen=True)
class NegotiationPacket:
    dir_ip: int
    mac: int
    channel: int
    channel_meu: int

    def __post_init__(self) -> None:
        if self.channel < 0:
            raise NegotiationError("channel must be >= 0")


@dataclass
class NegotiationParams:
    allowed_channels: tuple[int, ...] = (1, 11)
    window_halfwidth: int = 4
    switch_threshold_dbm: float = 3.0
    refresh_weight: float = 0.0
    round_period_s: float = 10.0
    separacio: int = 1
    timeout_s: float = 1.0

    def __post_init__(self) -> None:
        if self.window_halfwidth < 0:
            raise NegotiationError("window_halfwidth must be >= 0")
        if self.switch_threshold_dbm < 0:
            raise NegotiationError("switch_threshold_dbm must be >= 0")
        if not 0.0 <= self.refresh_weight <= 1.0:
            raise NegotiationError("refresh_weight must lie in [0, 1]")
        if self.separacio < 1:
            raise NegotiationError("separacio must be >= 1")


def initial_assignment(
    topology: Topology,
    allowed_channels: Sequence[int],
    pinned: Mapping[tuple[int, int], int] | None = None,
) -> dict[tuple[int, int], int]:
    """Alternating start-up assignment.

    Links are visited in ``(min id, max id)`` order; each takes the allowed
    channel least used by already assigned links touching either endpoint,
    lowest channel on ties. ``pinned`` links keep their given channel.
    """
    if not allowed_channels:
        raise NegotiationError("no allowed channels")
    allowed = sorted(set(allowed_channels))
    pinned = {link_key(*k): v for k, v in (pinned or {}).items()}
    out: dict[tuple[int, int], int] = {}
    for link in topology.links():
        if link in pinned:
            out[link] = pinned[link]
            continue
        used = {c: 0 for c in allowed}
        for other, ch in out.items():
            if ch in used and set(other) & set(link):
                used[ch] += 1
        out[link] = min(allowed, key=lambda c: (used[c], c))
    return out


def merge_quality(a: QualityList, b: QualityList) -> QualityList:
    if a.band is not b.band:
        raise NegotiationError("cannot merge quality lists of different bands")
    return QualityList(a.band, tuple(max(x, y) for x, y in zip(a.values, b.values)))


def ponderate_quality(q_new: QualityList, q_old: QualityList, refresh_weight: float) -> QualityList:
    """Blend ``q_new`` and ``q_old`` linearly in the dBm domain."""
    if not 0.0 <= refresh_weight <= 1.0:
        raise NegotiationError("refresh_weight must lie in [0, 1]")
    if q_new.band is not q_old.band:
        raise NegotiationError("band mismatch")
    w = refresh_weight
    return QualityList(q_new.band, tuple(n * w + o * (1 - w) for n, o in zip(q_new.values, q_old.values)))


def window_score(q: QualityList, channel: int, halfwidth: int = 4) -> float:
    """Strongest interferer within ``halfwidth`` band positions of ``channel``."""
    pos = q.position(channel)
    lo = max(0, pos - halfwidth)
    hi = min(len(q.values) - 1, pos + halfwidth)
    return max(q.values[lo:hi + 1])


def candidates(q: QualityList, params: NegotiationParams) -> list[int]:
    chans = band_channels(q.band)
    stepped = chans[:: params.separacio]
    return [c for c in stepped if c in params.allowed_channels]


def select_channel(q: QualityList, params: NegotiationParams) -> int:
    """Allowed channel with the quietest window; the earliest wins ties."""
    cands = candidates(q, params)
    if not cands:
        raise NegotiationError("no allowed channel in band")
    best, best_score = cands[0], window_score(q, cands[0], params.window_halfwidth)
    for c in cands[1:]:
        s = window_score(q, c, params.window_halfwidth)
        if s < best_score:
            best, best_score = c, s
    return best


KEEP = "keep"
SWITCH = "switch"


def decide_switch(
    current_channel: int,
    proposed_channel: int,
    q_current_dbm: float,
    q_proposed_dbm: float,
    params: NegotiationParams,
) -> str:
    if proposed_channel == current_channel:
        return KEEP
    if q_current_dbm - q_proposed_dbm >= params.switch_threshold_dbm:
        return SWITCH
    return KEEP


ScanProvider = Callable[[int, float], QualityList]


@dataclass(frozen=True)
class Interferer:
    """External transmitter active on ``channel`` in ``[time_on, time_off)``.

    ``nodes`` limits which nodes can hear it; ``None`` means every node.
    """

    time_on: float
    time_off: float
    channel: int
    level_dbm: float
    band: Band = Band.B24
    nodes: frozenset[int] | None = None

    def active(self, t: float) -> bool:
        return self.time_on <= t < self.time_off

    def audible(self, node_id: int) -> bool:
        return self.nodes is None or node_id in self.nodes


class InterfererScan:
    """Default scan provider: the loudest audible external interferer per channel.

    Transmissions of the mesh itself never show up in a scan.
    """

    def __init__(self, band: Band, interferers: Iterable[Interferer] = ()):
        self.band = band
        self.interferers = [i for i in interferers if i.band is band]

    def __call__(self, node_id: int, t: float) -> QualityList:
        levels: dict[int, float] = {}
        for i in self.interferers:
            if i.active(t) and i.audible(node_id):
                levels[i.channel] = max(levels.get(i.channel, FLOOR_DBM), i.level_dbm)
        return QualityList.from_levels(self.band, levels)


@dataclass
class PeerLink:
    peer_id: int
    peer_ip: int
    channel: int
    allowed: tuple[int, ...]
    peer_mac: int | None = None
    last_quality: QualityList | None = None


@dataclass
class NegotiationAgent:
    """Negotiation state of one node: one :class:`PeerLink` per neighbor."""

    node_id: int
    address: int
    mac: int
    band: Band
    links: dict[int, PeerLink] = field(default_factory=dict)
    responsive: bool = True

    def packet_for(self, peer_id: int, channel_meu: int | None = None) -> NegotiationPacket:
        link = self.links[peer_id]
        return NegotiationPacket(
            dir_ip=link.peer_ip,
            mac=link.peer_mac or 0,
            channel=link.channel,
            channel_meu=link.channel if channel_meu is None else channel_meu,
        )


def exchange_macs(client: NegotiationAgent, server: NegotiationAgent) -> bool:
    """Swap data-interface MACs; ``False`` when the server does not answer."""
    if not server.responsive:
        return False
    server.links[client.node_id].peer_mac = client.mac
    client.links[server.node_id].peer_mac = server.mac
    return True


@dataclass
class ServerReply:
    channel: int
    merged: QualityList


def params_for(link: PeerLink, params: NegotiationParams) -> NegotiationParams:
    return NegotiationParams(
        allowed_channels=link.allowed,
        window_halfwidth=params.window_halfwidth,
        switch_threshold_dbm=params.switch_threshold_dbm,
        refresh_weight=params.refresh_weight,
        round_period_s=params.round_period_s,
        separacio=params.separacio,
        timeout_s=params.timeout_s,
    )


def server_select(
    server: NegotiationAgent,
    client_id: int,
    q_client: QualityList,
    scan: ScanProvider,
    params: NegotiationParams,
    now: float,
) -> ServerReply:
    link = server.links[client_id]
    q_server = scan(server.node_id, now)
    merged = merge_quality(q_client, q_server)
    if params.refresh_weight > 0 and link.last_quality is not None:
        merged = ponderate_quality(merged, link.last_quality, params.refresh_weight)
    link.last_quality = merged
    return ServerReply(select_channel(merged, params_for(link, params)), merged)


def client_decide(client: NegotiationAgent, server_id: int, reply: ServerReply, params: NegotiationParams) -> str:
    link = client.links[server_id]
    hw = params.window_halfwidth
    decision = decide_switch(
        link.channel,
        reply.channel,
        window_score(reply.merged, link.channel, hw),
        window_score(reply.merged, reply.channel, hw),
        params,
    )
    if decision == SWITCH:
        link.channel = reply.channel
    return decision


def run_round(
    node: NegotiationAgent,
    peers: Mapping[int, NegotiationAgent | None],
    scan: ScanProvider,
    params: NegotiationParams,
    now: float,
) -> list[NegotiationPacket]:
    """One synchronous round with ``node`` acting as client toward each peer.

    The server side is updated with the agreed channel. A peer that is missing
    or silent yields a packet with channel 0, which the bond ignores.
    """
    out = []
    for peer_id in sorted(node.links):
        link = node.links[peer_id]
        server = peers.get(peer_id)
        before = link.channel
        if server is None or not server.responsive:
            out.append(NegotiationPacket(link.peer_ip, link.peer_mac or 0, 0, before))
            continue
        if link.peer_mac is None:
            exchange_macs(node, server)
        q_client = scan(node.node_id, now)
        reply = server_select(server, node.node_id, q_client, scan, params, now)
        client_decide(node, peer_id, reply, params)
        server.links[node.node_id].channel = link.channel
        out.append(node.packet_for(peer_id, channel_meu=before))
    return out
