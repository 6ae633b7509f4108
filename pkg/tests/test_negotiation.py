import pytest
from hypothesis import given, strategies as st

from mcmesh.core import Band, Channel, band_channels, build_topology, chain_spec, grid_like_spec
from mcmesh.negotiation import (
    FLOOR_DBM,
    KEEP,
    SWITCH,
    Interferer,
    InterfererScan,
    NegotiationAgent,
    NegotiationError,
    NegotiationPacket,
    NegotiationParams,
    PeerLink,
    QualityList,
    decide_switch,
    exchange_macs,
    initial_assignment,
    merge_quality,
    ponderate_quality,
    run_round,
    select_channel,
    window_score,
)
from mcmesh.sim import Scenario, run

levels = st.floats(FLOOR_DBM, 0.0, allow_nan=False)


def qualities(band):
    n = len(band_channels(band))
    return st.lists(levels, min_size=n, max_size=n).map(lambda v: QualityList(band, tuple(v)))


any_quality = st.sampled_from(list(Band)).flatmap(qualities)


def pair_of_qualities(k):
    return st.sampled_from(list(Band)).flatmap(lambda b: st.tuples(*[qualities(b)] * k))


def oracle(q, allowed, hw):
    chans = band_channels(q.band)
    best, best_score = None, None
    for c in chans:
        if c not in allowed:
            continue
        i = chans.index(c)
        score = max(q.values[max(0, i - hw): i + hw + 1])
        if best is None or score < best_score:
            best, best_score = c, score
    return best


# -- initial assignment ---------------------------------------------------------------


def test_initial_assignment_chain_alternates():
    topo = build_topology(chain_spec(3, [Channel.b24(1), Channel.b24(11)]))
    assert initial_assignment(topo, [1, 11]) == {(0, 1): 1, (1, 2): 11}


def test_initial_assignment_single_link_takes_lowest():
    topo = build_topology(chain_spec(2, [Channel.b24(1), Channel.b24(11)]))
    assert initial_assignment(topo, [11, 1]) == {(0, 1): 1}


def test_initial_assignment_square_alternates():
    spec = grid_like_spec(4, [(0, 1), (1, 2), (2, 3), (0, 3)], [Channel.b24(1), Channel.b24(11)])
    got = initial_assignment(build_topology(spec), [1, 11])
    # Walking the ring 0-1-2-3-0 alternates 1/11/1/11.
    assert [got[(0, 1)], got[(1, 2)], got[(2, 3)], got[(0, 3)]] == [1, 11, 1, 11]


def test_initial_assignment_respects_pins():
    topo = build_topology(chain_spec(3, [Channel.b24(1), Channel.b24(11)]))
    assert initial_assignment(topo, [1, 11], pinned={(1, 0): 11}) == {(0, 1): 11, (1, 2): 1}


def test_initial_assignment_needs_channels():
    topo = build_topology(chain_spec(2, [Channel.b24(1)]))
    with pytest.raises(NegotiationError):
        initial_assignment(topo, [])


# -- quality lists ----------------------------------------------------------------------


def test_quality_list_validation():
    with pytest.raises(NegotiationError):
        QualityList(Band.B24, (FLOOR_DBM,) * 3)
    with pytest.raises(NegotiationError):
        QualityList(Band.B24, (5.0,) + (FLOOR_DBM,) * 10)
    with pytest.raises(NegotiationError):
        QualityList.from_levels(Band.B24, {14: -30.0})


def test_merge_example():
    a = QualityList.from_levels(Band.B24, {1: -90.0, 2: -40.0})
    b = QualityList.from_levels(Band.B24, {1: -50.0, 2: -80.0})
    m = merge_quality(a, b)
    assert (m[1], m[2]) == (-50.0, -40.0)


@given(pair_of_qualities(3))
def test_merge_semilattice(qs):
    a, b, c = qs
    assert merge_quality(a, b) == merge_quality(b, a)
    assert merge_quality(merge_quality(a, b), c) == merge_quality(a, merge_quality(b, c))
    assert merge_quality(a, a) == a
    assert merge_quality(a, QualityList.floor(a.band)) == a


def test_merge_rejects_band_mismatch():
    with pytest.raises(NegotiationError):
        merge_quality(QualityList.floor(Band.B24), QualityList.floor(Band.B5))


def test_ponderate_examples():
    new = QualityList.from_levels(Band.B24, {1: -40.0})
    old = QualityList.from_levels(Band.B24, {1: -60.0})
    assert ponderate_quality(new, old, 0.5)[1] == pytest.approx(-50.0)
    assert ponderate_quality(new, old, 1.0) == new
    assert ponderate_quality(new, old, 0.0) == old
    with pytest.raises(NegotiationError):
        ponderate_quality(new, old, 1.5)


@given(pair_of_qualities(2), st.floats(0, 1))
def test_ponderate_stays_between_inputs(qs, w):
    new, old = qs
    out = ponderate_quality(new, old, w)
    for n, o, v in zip(new.values, old.values, out.values):
        assert min(n, o) - 1e-9 <= v <= max(n, o) + 1e-9


# -- channel selection -------------------------------------------------------------------


def test_flat_quality_picks_first_allowed():
    params = NegotiationParams(allowed_channels=(1, 11))
    assert select_channel(QualityList.floor(Band.B24), params) == 1


def test_interference_low_in_band_selects_11():
    q = QualityList.from_levels(Band.B24, {c: -30.0 for c in (1, 2, 3, 4)})
    assert window_score(q, 1) == -30.0
    assert window_score(q, 11) == FLOOR_DBM
    assert select_channel(q, NegotiationParams(allowed_channels=(1, 11))) == 11


def test_no_allowed_channel_in_band():
    with pytest.raises(NegotiationError):
        select_channel(QualityList.floor(Band.B5), NegotiationParams(allowed_channels=(1, 11)))


@given(any_quality, st.data(), st.integers(0, 5))
def test_select_channel_matches_exhaustive_oracle(q, data, hw):
    chans = band_channels(q.band)
    allowed = data.draw(st.lists(st.sampled_from(chans), min_size=1, unique=True))
    params = NegotiationParams(allowed_channels=tuple(allowed), window_halfwidth=hw)
    assert select_channel(q, params) == oracle(q, allowed, hw)


@given(any_quality, st.integers(0, 5))
def test_selected_channel_is_allowed_and_quietest(q, hw):
    allowed = band_channels(q.band)[::2]
    params = NegotiationParams(allowed_channels=allowed, window_halfwidth=hw)
    c = select_channel(q, params)
    assert c in allowed
    assert all(window_score(q, c, hw) <= window_score(q, o, hw) for o in allowed)


def test_separacio_steps_through_band():
    q = QualityList.floor(Band.B24)
    params = NegotiationParams(allowed_channels=(2, 3, 4), separacio=2)
    assert select_channel(q, params) == 3


# -- switch decision --------------------------------------------------------------------


@pytest.mark.parametrize("cur, prop, qc, qp, expected", [
    (1, 1, -30, -90, KEEP),
    (1, 11, -40, -50, SWITCH),
    (1, 11, -40, -41, KEEP),
    (1, 11, -40, -43, SWITCH),
])
def test_decide_switch(cur, prop, qc, qp, expected):
    assert decide_switch(cur, prop, qc, qp, NegotiationParams()) == expected


@given(levels, st.floats(-2.999, 2.999))
def test_gain_below_threshold_never_switches(a, gain):
    assert decide_switch(1, 11, a, a - gain, NegotiationParams()) == KEEP


def test_params_validation():
    with pytest.raises(NegotiationError):
        NegotiationParams(window_halfwidth=-1)
    with pytest.raises(NegotiationError):
        NegotiationParams(refresh_weight=2.0)
    with pytest.raises(NegotiationError):
        NegotiationParams(separacio=0)
    with pytest.raises(NegotiationError):
        NegotiationPacket(1, 2, -1, 1)


# -- protocol rounds -----------------------------------------------------------------


def agents_for_chain(n, channel=1):
    agents = {i: NegotiationAgent(i, 1000 + i, 2000 + i, Band.B24) for i in range(n)}
    for i in range(n - 1):
        agents[i].links[i + 1] = PeerLink(i + 1, 1000 + i + 1, channel, (1, 11))
        agents[i + 1].links[i] = PeerLink(i, 1000 + i, channel, (1, 11))
    return agents


def test_two_node_exchange_fills_both_packets():
    agents = agents_for_chain(2)
    assert exchange_macs(agents[0], agents[1])
    assert agents[0].links[1].peer_mac == 2001 and agents[1].links[0].peer_mac == 2000
    pkts = run_round(agents[0], agents, InterfererScan(Band.B24), NegotiationParams(), 0.0)
    assert pkts == [NegotiationPacket(1001, 2001, 1, 1)]


def test_silent_peer_yields_channel_zero():
    agents = agents_for_chain(2)
    agents[1].responsive = False
    assert not exchange_macs(agents[0], agents[1])
    pkts = run_round(agents[0], agents, InterfererScan(Band.B24), NegotiationParams(), 0.0)
    assert pkts[0].channel == 0


def test_middle_node_negotiates_with_both_neighbors():
    agents = agents_for_chain(3)
    scan = InterfererScan(Band.B24, [Interferer(0, 100, 1, -30.0, nodes=frozenset({1}))])
    pkts = run_round(agents[1], agents, scan, NegotiationParams(), 5.0)
    assert [p.dir_ip for p in pkts] == [1000, 1002]
    assert all(p.channel == 11 and p.channel_meu == 1 for p in pkts)
    assert agents[0].links[1].channel == agents[2].links[1].channel == 11


def test_interferer_scan_windows_and_scope():
    i = Interferer(10, 20, 3, -45.0, nodes=frozenset({0}))
    scan = InterfererScan(Band.B24, [i, Interferer(0, 100, 36, -20.0, band=Band.B5)])
    assert scan(0, 15)[3] == -45.0
    assert scan(1, 15)[3] == FLOOR_DBM
    assert scan(0, 20)[3] == FLOOR_DBM


# -- end-to-end behavior inside the simulator -----------------------------------------------


def negotiation_scenario(interferers, horizon=45.0):
    spec = chain_spec(2, [Channel.b24(1), Channel.b24(11)], antenna_positions=[0.0, 30.0])
    return Scenario("neg", Band.B24, spec, [], negotiation=NegotiationParams(), interferers=interferers,
                    horizon_s=horizon)


def test_quiet_world_keeps_initial_assignment():
    st_ = run(negotiation_scenario([]))
    assert st_.channel_history[(0, 1)] == [(0.0, 1)]


def test_injected_interferer_moves_link_and_it_stays():
    sc = negotiation_scenario([Interferer(12.0, 30.0, 1, -30.0, nodes=frozenset({0, 1}))], horizon=60.0)
    hist = run(sc).channel_history[(0, 1)]
    assert hist == [(0.0, 1), (15.0, 11)]
