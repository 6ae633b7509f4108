import pytest
from hypothesis import given, strategies as st

from mcmesh.bonding import BondingError, add_slave, enslave, store_packet, xmit_select
from mcmesh.core import Channel, PacketRecord, build_topology, chain_spec
from mcmesh.negotiation import NegotiationPacket

PEER = 0x0A000101


def node_with(*chans):
    topo = build_topology(chain_spec(2, [Channel.b24(c) for c in chans]))
    return topo.node(0)


def test_two_slaves_cursor_on_first():
    node = node_with(1, 11)
    bond = enslave(node)
    assert [s.channel.index for s in bond.slaves] == [1, 11]
    assert bond.current_slave.channel == Channel.b24(1)
    assert bond.channel_meu == Channel.b24(1)
    assert bond.unified_mac == node.data_interfaces[0].mac_address
    assert bond.unified_ip == node.data_interfaces[0].ip_address


def test_single_slave_always_used():
    bond = enslave(node_with(1))
    store_packet(bond, NegotiationPacket(PEER, 0, 11, 1))
    assert xmit_select(bond, None, PEER) is bond.slaves[0]
    assert bond.fallbacks == 1 and bond.switches == 0


def test_enslave_errors():
    node = node_with(1, 11)
    bond = enslave(node)
    with pytest.raises(BondingError):
        add_slave(bond, node.data_interfaces[1])
    with pytest.raises(BondingError):
        enslave(node, [node.signaling])
    with pytest.raises(BondingError):
        enslave(node, [node.data_interfaces[0]] * 2)
    with pytest.raises(BondingError):
        enslave(node, [])


def test_packet_store_roundtrip_and_overwrite():
    bond = enslave(node_with(1, 11))
    p1 = NegotiationPacket(PEER, 7, 11, 1)
    store_packet(bond, p1)
    assert bond.packet_store[PEER] == p1
    p2 = NegotiationPacket(PEER, 7, 1, 11)
    store_packet(bond, p2)
    assert bond.packet_store[PEER] == p2
    late = NegotiationPacket(0x0A0009FF, 9, 11, 11)
    store_packet(bond, late)
    assert bond.packet_store[late.dir_ip] == late


def test_same_channel_no_rotation():
    bond = enslave(node_with(1, 11))
    store_packet(bond, NegotiationPacket(PEER, 0, 1, 1))
    assert xmit_select(bond, PacketRecord(0, 1, 100), PEER) is bond.slaves[0]
    assert bond.switches == 0 and bond.probes == 0


def test_rotation_to_negotiated_channel():
    bond = enslave(node_with(1, 11))
    store_packet(bond, NegotiationPacket(PEER, 0, 11, 1))
    chosen = xmit_select(bond, PacketRecord(0, 1, 100), PEER)
    assert chosen.channel == Channel.b24(11)
    assert bond.channel_meu == Channel.b24(11)
    assert bond.switches == 1


def test_channel_zero_is_ignored():
    bond = enslave(node_with(1, 11))
    store_packet(bond, NegotiationPacket(PEER, 0, 0, 1))
    assert xmit_select(bond, None, PEER) is bond.slaves[0]
    assert bond.switches == 0


def test_unknown_neighbor_uses_current_slave():
    bond = enslave(node_with(1, 11))
    assert xmit_select(bond, None, PEER) is bond.current_slave


@given(st.lists(st.tuples(st.integers(0, 3), st.sampled_from([0, 1, 6, 11, 3])), max_size=40))
def test_bond_invariants_hold_under_any_packet_sequence(ops):
    bond = enslave(node_with(1, 6, 11))
    peers = [PEER + k for k in range(4)]
    for peer_idx, ch in ops:
        store_packet(bond, NegotiationPacket(peers[peer_idx], 0, ch, 1))
        chosen = xmit_select(bond, None, peers[peer_idx])
        assert chosen in bond.slaves
        assert 0 <= bond.current < len(bond.slaves)
        assert bond.channel_meu == bond.current_slave.channel
        if ch in (1, 6, 11):
            assert chosen.channel.index == ch
