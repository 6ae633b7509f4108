"""Virtual interface that masters a node's data radios.

The bond keeps the latest negotiation packet per neighbor and, for every
outgoing packet, rotates its slave ring until the current slave is tuned to
the channel negotiated for the next hop.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .core import Channel, Interface, Node, PacketRecord, Role
from .negotiation import NegotiationPacket

log = logging.getLogger(__name__)


class BondingError(ValueError):
    pass


@dataclass
class BondState:
    master_id: str
    slaves: list[Interface]
    unified_mac: int
    unified_ip: int
    current: int = 0
    channel_meu: Channel | None = None
    packet_store: dict[int, NegotiationPacket] = field(default_factory=dict)
    switches: int = 0
    fallbacks: int = 0
    probes: int = 0
    xmits: int = 0

    def __post_init__(self) -> None:
        if self.channel_meu is None:
            self.channel_meu = self.current_slave.channel

    @property
    def current_slave(self) -> Interface:
        return self.slaves[self.current]


def enslave(node: Node, data_interfaces: list[Interface] | None = None, master_id: str = "bond0") -> BondState:
    """Create the bond; it takes its MAC and IP from the first slave."""
    if data_interfaces is None:
        data_interfaces = node.data_interfaces
    if not data_interfaces:
        raise BondingError(f"node {node.node_id}: nothing to enslave")
    ids = [i.id for i in data_interfaces]
    if len(set(ids)) != len(ids):
        raise BondingError(f"node {node.node_id}: interface enslaved twice")
    for iface in data_interfaces:
        if iface.role is not Role.DATA:
            raise BondingError(f"{iface.name} is not a data interface")
    first = data_interfaces[0]
    return BondState(master_id, list(data_interfaces), first.mac_address, first.ip_address)


def add_slave(bond: BondState, iface: Interface) -> None:
    if any(s.id == iface.id for s in bond.slaves):
        raise BondingError(f"{iface.name} is already enslaved to {bond.master_id}")
    bond.slaves.append(iface)


def store_packet(bond: BondState, pkt: NegotiationPacket) -> None:
    bond.packet_store[pkt.dir_ip] = pkt


def xmit_select(bond: BondState, packet: PacketRecord | None, next_hop_address: int) -> Interface:
    """Pick the slave that carries ``packet`` to ``next_hop_address``."""
    bond.xmits += 1
    pack = bond.packet_store.get(next_hop_address)
    if pack is None or pack.channel == 0 or pack.channel == bond.channel_meu.index:
        return bond.current_slave
    target = None
    for step in range(len(bond.slaves)):
        bond.probes += 1
        idx = (bond.current + step) % len(bond.slaves)
        if bond.slaves[idx].channel.index == pack.channel:
            target = idx
            break
    if target is None:
        bond.fallbacks += 1
        log.debug("%s: channel %d not tuned on any slave", bond.master_id, pack.channel)
        return bond.current_slave
    bond.current = target
    bond.channel_meu = bond.slaves[target].channel
    bond.switches += 1
    return bond.current_slave
