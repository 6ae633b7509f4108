import math
from collections import deque

import networkx as nx
import pytest
from hypothesis import HealthCheck, given, settings, strategies as st

from mcmesh.acceptance import random_scenario
from mcmesh.core import Band, Channel, grid_like_spec
from mcmesh.olsr import (
    LOST,
    RECEIVED,
    US,
    WILL_ALWAYS,
    WILL_NEVER,
    LinkTuple,
    LinkType,
    MsgType,
    NeighborStatus,
    NeighborTuple,
    OlsrMessage,
    OlsrNode,
    OlsrParams,
    RouteEntry,
    TcPayload,
    TwoHopTuple,
    hysteresis_update,
    remap_routes,
)
from mcmesh.scenarios import chain_scenario
from mcmesh.radio import Protocol
from mcmesh.sim import Scenario, Simulator, run

T0 = 10 * US
FAR = 10**12
HOP_ONLY = OlsrParams(link_quality_level=0)


def hello_round(a: OlsrNode, b: OlsrNode, now: int) -> None:
    b.process_hello(a.emit_hello(now), "wlan0", now)
    a.process_hello(b.emit_hello(now), "wlan0", now)


def hand_node(sym, two_hop, params=HOP_ONLY, willingness=None):
    """Node 0 with symmetric neighbors ``sym`` and two-hop pairs ``(neighbor, target)``."""
    node = OlsrNode(0, params)
    for n in sym:
        node.links[n] = LinkTuple("wlan0", n, sym_until=FAR, asym_until=FAR,
                                  window=deque([1], maxlen=20), nlq=1.0)
        node.neighbors[n] = NeighborTuple(n, NeighborStatus.SYM, (willingness or {}).get(n, 3))
    for n, t in two_hop:
        node.two_hop[(n, t)] = TwoHopTuple(n, t, FAR)
    return node


# -- link sensing ----------------------------------------------------------------------


def test_handshake_goes_asym_then_sym():
    a, b = OlsrNode(1), OlsrNode(2)
    b.process_hello(a.emit_hello(T0), "wlan0", T0)
    assert b.links[1].is_asym(T0) and not b.links[1].is_sym(T0)
    hello_b = b.emit_hello(T0)
    assert hello_b.payload.blocks[0].link_type is LinkType.ASYM
    a.process_hello(hello_b, "wlan0", T0)
    assert a.links[2].is_sym(T0)
    b.process_hello(a.emit_hello(T0), "wlan0", T0)
    assert b.links[1].is_sym(T0)
    assert a.routes[2].hop_count == 1 and b.routes[1].next_hop == 1


def test_link_expires_after_validity():
    a, b = OlsrNode(1), OlsrNode(2)
    hello_round(a, b, T0)
    hello_round(a, b, T0)
    later = T0 + int(OlsrParams().hello_validity * US) + 1
    a.expire(later)
    assert 2 not in a.links and 2 not in a.neighbors


def test_malformed_hello_counted_and_ignored():
    node = OlsrNode(1)
    bad = OlsrMessage(MsgType.HELLO, 2, 1, US, payload="garbage")
    assert node.process_hello(bad, "wlan0", T0) is False
    assert node.counters["malformed"] == 1 and not node.links


def test_own_hello_ignored():
    node = OlsrNode(1)
    assert node.process_hello(node.emit_hello(T0), "wlan0", T0) is False
    assert not node.links


def test_hello_seq_gaps_lower_link_quality():
    a, b = OlsrNode(1), OlsrNode(2)
    for k in range(4):
        msg = a.emit_hello(T0 + k)
        if k != 2:
            b.process_hello(msg, "wlan0", T0 + k)
    assert b.links[1].lq == pytest.approx(3 / 4)


def test_etx_from_lq_and_nlq():
    link = LinkTuple("wlan0", 5, window=deque([1, 1, 0, 1], maxlen=20), nlq=0.5)
    assert link.etx == pytest.approx(1 / (0.75 * 0.5))
    assert LinkTuple("wlan0", 5).etx == math.inf


# -- hysteresis --------------------------------------------------------------------------


def test_hysteresis_promotes_above_high_threshold():
    params = OlsrParams(use_hysteresis=True)
    link = LinkTuple("wlan0", 1, quality=0.79, pending=True, lost=False)
    out = hysteresis_update(link, RECEIVED, params)
    assert out.quality == pytest.approx(0.811)
    assert not out.pending


def test_hysteresis_demotes_below_low_threshold():
    params = OlsrParams(use_hysteresis=True)
    out = hysteresis_update(LinkTuple("wlan0", 1, quality=0.31), LOST, params)
    assert out.quality == pytest.approx(0.279)
    assert out.lost and out.pending


@given(st.floats(0, 1), st.lists(st.booleans(), max_size=30))
def test_hysteresis_quality_stays_in_unit_interval(q0, events):
    params = OlsrParams(use_hysteresis=True)
    link = LinkTuple("wlan0", 1, quality=q0)
    for received in events:
        link = hysteresis_update(link, RECEIVED if received else LOST, params)
        assert 0.0 <= link.quality <= 1.0


# -- MPR selection -----------------------------------------------------------------------


def test_mpr_picks_the_only_provider_and_best_cover():
    node = hand_node([1, 2, 3], [(1, 10), (2, 10), (2, 11), (3, 11)])
    assert node.select_mprs(T0) == {2}


def test_mpr_coverage_two_requires_two_providers():
    node = hand_node([1, 2, 3], [(1, 10), (2, 10), (2, 11), (3, 11)], OlsrParams(mpr_coverage=2))
    mprs = node.select_mprs(T0)
    assert {1, 2} <= mprs and {2, 3} <= mprs


def test_willingness_never_and_always():
    node = hand_node([1, 2], [(1, 10), (2, 10)], willingness={1: WILL_NEVER, 2: 3})
    assert node.select_mprs(T0) == {2}
    node = hand_node([1, 2, 3], [(1, 10)], willingness={3: WILL_ALWAYS})
    assert node.select_mprs(T0) == {1, 3}


def test_no_two_hop_means_no_mpr():
    assert hand_node([1, 2], []).select_mprs(T0) == set()


@st.composite
def neighborhoods(draw):
    sym = list(range(1, draw(st.integers(1, 6)) + 1))
    targets = list(range(100, 100 + draw(st.integers(0, 8))))
    pairs = draw(st.lists(st.tuples(st.sampled_from(sym), st.sampled_from(targets or [100])), max_size=20))
    if not targets:
        pairs = []
    will = draw(st.fixed_dictionaries({n: st.sampled_from([0, 3, 7]) for n in sym}))
    k = draw(st.integers(1, 3))
    return sym, pairs, will, k


@given(neighborhoods())
def test_mpr_set_covers_every_strict_two_hop_node(hood):
    sym, pairs, will, k = hood
    node = hand_node(sym, pairs, OlsrParams(mpr_coverage=k), willingness=will)
    mprs = node.select_mprs(T0)
    assert mprs <= set(sym)
    assert all(will[n] != WILL_NEVER for n in mprs)
    for t in {t for _, t in pairs}:
        providers = {n for n, tt in pairs if tt == t and will[n] != WILL_NEVER}
        assert len(providers & mprs) >= min(k, len(providers))


# -- TC processing -----------------------------------------------------------------------


def tc(orig, seq, ansn, nbrs, ttl=255):
    return OlsrMessage(MsgType.TC, orig, seq, 15 * US, TcPayload(ansn, tuple((n, 1.0) for n in nbrs)), ttl=ttl)


def test_tc_installs_topology_and_rejects_stale_ansn():
    node = hand_node([1], [(1, 5)])
    changed, _ = node.process_tc(tc(5, 1, 10, [1, 6]), sender=1, now=T0)
    assert changed and (6, 5) in node.topology
    assert node.routes[6].hop_count == 3
    node.process_tc(tc(5, 2, 9, [7]), sender=1, now=T0)
    assert node.counters["stale_tc"] == 1 and (7, 5) not in node.topology
    node.process_tc(tc(5, 3, 11, [7]), sender=1, now=T0)
    assert (7, 5) in node.topology and (6, 5) not in node.topology


def test_tc_duplicates_dropped():
    node = hand_node([1], [])
    node.process_tc(tc(5, 1, 1, [1]), 1, T0)
    assert node.process_tc(tc(5, 1, 1, [1]), 1, T0) == (False, False)
    assert node.counters["duplicates"] == 1


def test_tc_forwarding_rules():
    node = hand_node([1, 2], [])
    assert node.process_tc(tc(5, 1, 1, [1]), 1, T0)[1] is False
    node.mpr_selectors[1] = FAR
    assert node.process_tc(tc(5, 2, 1, [1]), 1, T0)[1] is True
    assert node.process_tc(tc(5, 3, 1, [1], ttl=1), 1, T0)[1] is False
    flood = hand_node([1], [], OlsrParams(full_flooding=True, link_quality_level=0))
    assert flood.process_tc(tc(5, 1, 1, [1]), 1, T0)[1] is True


def test_tc_from_non_neighbor_not_applied():
    node = hand_node([1], [])
    node.process_tc(tc(5, 1, 1, [9]), sender=4, now=T0)
    assert not node.topology


def test_message_dump_is_one_line():
    a = OlsrNode(0x0A000001)
    line = a.emit_hello(T0).dump()
    assert "\n" not in line and line.startswith("HELLO orig=10.0.0.1")


def test_params_from_config():
    p = OlsrParams.from_config({"HelloInterval": 1.0, "UseHysteresis": "yes", "MprCoverage": 3})
    assert p.hello_interval == 1.0 and p.use_hysteresis and p.mpr_coverage == 3
    with pytest.raises(ValueError):
        OlsrParams.from_config({"Bogus": 1})
    with pytest.raises(ValueError):
        OlsrParams(tc_redundancy=3)
    with pytest.raises(ValueError):
        OlsrParams(hyst_thr_low=0.9, hyst_thr_high=0.5)


# -- whole-network routing ------------------------------------------------------------------


def network_graph(sim: Simulator) -> nx.Graph:
    g = nx.Graph()
    g.add_nodes_from(sim.topo.node_ids)
    g.add_edges_from(sim.topo.links())
    return g


slow = settings(max_examples=12, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@slow
@given(st.integers(0, 10_000))
def test_hop_count_routes_match_bfs(seed):
    sim = Simulator(random_scenario(seed, HOP_ONLY))
    sim.run()
    g = network_graph(sim)
    for n in sim.topo.node_ids:
        lengths = nx.single_source_shortest_path_length(g, n)
        routes = sim.olsr[n].routes
        got = {sim.node_of_sig[d]: r for d, r in routes.items()}
        assert set(got) == set(lengths) - {n}
        for d, r in got.items():
            assert r.hop_count == lengths[d]
            nh = sim.node_of_sig[r.next_hop]
            assert g.has_edge(n, nh) and lengths[d] == 1 + nx.shortest_path_length(g, nh, d)


@slow
@given(st.integers(0, 10_000))
def test_etx_routes_match_dijkstra(seed):
    sim = Simulator(random_scenario(seed, OlsrParams(), loss=0.2))
    sim.run()
    end = int(sim.sc.horizon_s * US)
    for eng in sim.olsr.values():
        eng.recompute(end)
        g = nx.DiGraph()
        for u, nbrs in eng.edges(end).items():
            for v, w in nbrs.items():
                g.add_edge(u, v, weight=w)
        dist = nx.single_source_dijkstra_path_length(g, eng.main_address)
        for d, r in eng.routes.items():
            assert r.metric == pytest.approx(dist[d], rel=1e-9)


def test_lossy_links_give_etx_above_hop_count():
    sim = Simulator(random_scenario(3, OlsrParams(), loss=0.2))
    sim.run()
    metrics = [(r.metric, r.hop_count) for eng in sim.olsr.values() for r in eng.routes.values()]
    assert metrics and any(m > h + 0.1 for m, h in metrics)
    assert all(m >= h - 1e-9 for m, h in metrics)


def test_mpr_flooding_beats_full_flooding():
    # Two rows of relays between a sender and its two-hop ring.
    links = [(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (2, 5), (3, 5), (3, 6), (4, 7), (5, 7), (6, 7),
             (1, 2), (2, 3)]
    spec = grid_like_spec(8, links, [Channel.b5(36)])
    sc = Scenario("mesh", Band.B5, spec, [], olsr=HOP_ONLY, horizon_s=40.0)
    mpr = run(sc)
    full = run(Scenario("mesh", Band.B5, spec, [], olsr=OlsrParams(link_quality_level=0, full_flooding=True),
                        horizon_s=40.0))
    assert 0 < mpr.forwards["tc"] < full.forwards["tc"]


def test_five_node_chain_route_and_remap():
    sc = chain_scenario("c5", Band.B5, (36, 64, 36, 64), Protocol.UDP)
    sim = Simulator(sc)
    st_ = sim.run()
    far = st_.routes[0][sim.bond_addr[4]]
    assert far.hop_count == 4
    assert far.next_hop == sim.bond_addr[1]
    assert far.egress_interface == "bond0"


# -- remapping ---------------------------------------------------------------------------


def test_remap_examples():
    routes = {1: RouteEntry(1, 1, 1), 2: RouteEntry(2, 1, 2), 9: RouteEntry(9, 1, 2)}
    dropped = []
    out = remap_routes(routes, {1: 101, 2: 102}, dropped=dropped)
    assert out == {101: RouteEntry(101, 101, 1, "bond0"), 102: RouteEntry(102, 101, 2, "bond0")}
    assert dropped == [routes[9]]


def test_remap_keeps_hna_destinations():
    routes = {500: RouteEntry(500, 1, 2, netmask=0xFFFFFF00)}
    out = remap_routes(routes, {1: 101})
    assert out[500].next_hop == 101 and out[500].destination == 500


@given(st.dictionaries(st.integers(1, 20), st.integers(1, 20), max_size=8))
def test_remap_is_idempotent(hops):
    mapping = {a: a + 1000 for a in range(1, 21)}
    routes = {d: RouteEntry(d, nh, 1) for d, nh in hops.items()}
    once = remap_routes(routes, mapping)
    assert remap_routes(once, mapping) == once
    assert all(r.destination > 1000 and r.next_hop > 1000 for r in once.values())
