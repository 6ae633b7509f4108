import json

import pytest
from hypothesis import given, settings, strategies as st

from mcmesh.core import Band, Channel, chain_spec, grid_like_spec
from mcmesh.negotiation import Interferer, NegotiationParams
from mcmesh.radio import Protocol, RadioParams
from mcmesh.report import results_csv
from mcmesh.scenarios import chain_scenario, square_scenario
from mcmesh.sim import (
    EventQueue,
    Flow,
    LinkEvent,
    RandomInterferers,
    Scenario,
    ScenarioError,
    Simulator,
    latency_ms,
    measure_flow,
    run,
)


def two_node(flows=(), **kw):
    return Scenario("pair", Band.B5, chain_spec(2, [Channel.b5(36)]), list(flows), **kw)


# -- event queue --------------------------------------------------------------------------


def test_event_queue_orders_by_time_then_insertion():
    q = EventQueue()
    q.push(5, "b")
    q.push(1, "a")
    q.push(5, "c")
    assert [q.pop().kind for _ in range(3)] == ["a", "b", "c"]


def test_event_queue_rejects_past_events():
    q = EventQueue()
    q.push(10, "x")
    q.pop()
    with pytest.raises(ValueError):
        q.push(5, "late")


@given(st.lists(st.integers(0, 1000), max_size=50))
def test_event_queue_pops_non_decreasing(times):
    q = EventQueue()
    for t in times:
        q.push(t, "e")
    out = [q.pop().time for _ in range(len(q))]
    assert out == sorted(times)


# -- validation ---------------------------------------------------------------------------


def test_flow_validation():
    with pytest.raises(ScenarioError):
        Flow(0, 0)
    with pytest.raises(ScenarioError):
        Flow(0, 1, duration_s=0)
    with pytest.raises(ScenarioError):
        Flow(0, 1, offered_mbps=-1)


def test_scenario_validation():
    with pytest.raises(ScenarioError):
        two_node(stack="kernel")
    with pytest.raises(ScenarioError):
        two_node([Flow(0, 1, start_s=60, duration_s=30)], horizon_s=70)
    with pytest.raises(ScenarioError):
        two_node(link_loss={(0, 1): 1.5})


def test_unknown_pinned_link_rejected():
    with pytest.raises(ScenarioError):
        Simulator(two_node(link_channels={(0, 5): 36}))


def test_pinned_channel_must_be_tuned():
    with pytest.raises(ScenarioError):
        Simulator(two_node(link_channels={(0, 1): 64}))


# -- behavior ----------------------------------------------------------------------------------


def test_no_flows_still_exchanges_control_traffic():
    st_ = run(two_node(horizon_s=10))
    assert st_.flows == []
    assert st_.messages["hello"] > 0


def test_single_link_saturation():
    st_ = run(two_node([Flow(0, 1)], horizon_s=65))
    assert st_.flows[0].mbps == pytest.approx(9.93, rel=0.02)


def test_seed_does_not_change_deterministic_model():
    sc = two_node([Flow(0, 1)], horizon_s=65)
    assert run(sc, seed=1).flows[0].mbps == run(sc, seed=99).flows[0].mbps


def test_two_channel_chain_saturation():
    st_ = run(chain_scenario("c3", Band.B5, (36, 64), Protocol.UDP))
    assert st_.flows[0].mbps == pytest.approx(9.88, rel=0.01)


def test_offered_load_below_capacity_is_delivered():
    st_ = run(chain_scenario("c3", Band.B5, (36, 64), Protocol.UDP, offered_mbps=1.0))
    assert st_.flows[0].mbps == pytest.approx(1.0)


def test_mid_run_channel_change_gives_time_weighted_average():
    spec = chain_spec(3, [Channel.b24(1), Channel.b24(11)], antenna_positions=[0.0, 30.0])
    jam = Interferer(40.0, 1e9, 1, -30.0, nodes=frozenset({0, 1}))
    sc = Scenario("jam", Band.B24, spec, [Flow(0, 2)], negotiation=NegotiationParams(),
                  interferers=[jam], horizon_s=65)
    st_ = run(sc)
    assert st_.channel_history[(0, 1)] == [(0.0, 1), (45.0, 11)]
    # 15 s on two orthogonal channels, then 15 s with both hops on channel 11.
    assert st_.flows[0].mbps == pytest.approx((7.37 * 15 + 7.37 / 2 * 15) / 30)


def test_tcp_below_udp():
    udp = run(chain_scenario("u", Band.B5, (36, 36), Protocol.UDP)).flows[0].mbps
    tcp = run(chain_scenario("t", Band.B5, (36, 36), Protocol.TCP)).flows[0].mbps
    assert tcp < udp


def test_square_pinned_path():
    st_ = run(square_scenario("sq", Band.B5, 36, 64, (0, 1, 2)))
    assert st_.flows[0].mbps == pytest.approx(9.93, rel=0.02)


def test_link_failure_reroutes_around_square():
    # Stale two-hop tuples only age out after their validity, hence the long horizon.
    links = [(0, 1), (1, 2), (2, 3), (0, 3)]
    spec = grid_like_spec(4, links, [Channel.b5(36)])
    sc = Scenario("fail", Band.B5, spec, [], link_events=[LinkEvent(5.0, (0, 1), False)], horizon_s=120)
    sim = Simulator(sc)
    sim.run()
    route = sim.olsr[0].routes[sim.sig_addr[1]]
    assert sim.node_of_sig[route.next_hop] == 3 and route.hop_count == 3


def test_measure_flow_matches_run_result():
    sc = chain_scenario("c4", Band.B5, (36, 36, 36), Protocol.UDP)
    sim = Simulator(sc)
    st_ = sim.run()
    assert measure_flow(sc.flows[0], sim) == pytest.approx(st_.flows[0].mbps)


def test_random_interferers_depend_on_seed_only():
    spec = chain_spec(3, [Channel.b24(1), Channel.b24(11)])
    sc = Scenario("rnd", Band.B24, spec, [Flow(0, 2)], negotiation=NegotiationParams(),
                  random_interferers=RandomInterferers(4, (1, 6, 11)), horizon_s=65)
    a = Simulator(sc, seed=7).interferers
    assert a == Simulator(sc, seed=7).interferers
    assert a != Simulator(sc, seed=8).interferers
    assert results_csv([run(sc, seed=7)]) == results_csv([run(sc, seed=7)])


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 1000))
def test_same_seed_same_bytes(seed):
    sc = chain_scenario("det", Band.B24, (1, 11, 1), Protocol.TCP)
    assert results_csv([run(sc, seed=seed)]) == results_csv([run(sc, seed=seed)])


def test_trace_lines_are_recorded_in_order():
    st_ = run(two_node([Flow(0, 1, start_s=5, duration_s=5)], horizon_s=12), trace=True)
    assert st_.trace
    times = [json.loads(line)["t_us"] for line in st_.trace]
    assert times == sorted(times)


# -- latency ------------------------------------------------------------------------------------


@pytest.mark.parametrize("stack, expected", [("bare", 1.8), ("routing_bonding", 2.08), ("full", 2.8)])
def test_latency_per_stack(stack, expected):
    assert latency_ms(2, RadioParams(), stack) == pytest.approx(expected)


def test_full_stack_adds_about_one_millisecond():
    lat = {s: run(chain_scenario("l", Band.B5, (36, 64), Protocol.UDP, stack=s, offered_mbps=0.1)).flows[0].latency_ms
           for s in ("bare", "full")}
    assert 0.8 <= lat["full"] - lat["bare"] <= 1.3
