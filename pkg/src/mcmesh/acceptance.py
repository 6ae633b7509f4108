"""Acceptance criteria as executable checks.

``run_all()`` evaluates every criterion and returns one :class:`Criterion`
per check; ``mcmesh reproduce acceptance`` prints them. The graph oracles here
(BFS, Bellman-Ford) are written independently of the routing engine.
"""

from __future__ import annotations

import math
import random
from collections import deque
from dataclasses import dataclass, replace
from typing import Callable

from .core import Band, Channel, grid_like_spec, chain_spec
from .metrics import HopSpec, PathSpec, etx, mcr, wcett
from .negotiation import (
    FLOOR_DBM,
    Interferer,
    NegotiationParams,
    QualityList,
    merge_quality,
    select_channel,
)
from .core import band_channels
from .olsr import OlsrParams
from .radio import Protocol
from .report import results_csv
from .scenarios import builtin_scenarios, chain_scenario
from .sim import Flow, Scenario, Simulator, run

US = 1_000_000


@dataclass
class Criterion:
    number: int
    title: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} C{self.number:<2} {self.title}: {self.detail}"


def _rel(a: float, b: float) -> float:
    return abs(a - b) / abs(b)


def _mbps(band: Band, chans: tuple[int, ...], proto: Protocol, antenna_cm: float = 30.0) -> float:
    return run(chain_scenario("acc", band, chans, proto, antenna_cm)).flows[0].mbps


# -- 1..7: throughput model against the measured tables ---------------------------


def c1_udp_chain() -> Criterion:
    measured = {2: 9.93, 3: 5.01, 4: 3.25, 5: 2.43}
    parts, ok = [], True
    for n, p in measured.items():
        m = _mbps(Band.B5, (36,) * (n - 1), Protocol.UDP)
        exact = math.isclose(m, 9.93 / (n - 1), rel_tol=1e-12)
        good = exact and _rel(m, p) <= 0.06
        ok &= good
        parts.append(f"n={n} {m:.4f} vs {p} ({_rel(m, p) * 100:.2f}%)")
    return Criterion(1, "single-channel chain, UDP, 5 GHz", ok, "; ".join(parts))


def c2_tcp_chain() -> Criterion:
    measured = {2: 8.82, 3: 4.39, 4: 2.90, 5: 2.18}
    parts, ok = [], True
    for n, p in measured.items():
        m = _mbps(Band.B5, (36,) * (n - 1), Protocol.TCP)
        ok &= _rel(m, p) <= 0.08
        parts.append(f"n={n} {m:.4f} vs {p} ({_rel(m, p) * 100:.2f}%)")
    return Criterion(2, "single-channel chain, TCP, 5 GHz", ok, "; ".join(parts))


def c3_two_channel_chain() -> Criterion:
    base = _mbps(Band.B5, (36,), Protocol.UDP)
    m = _mbps(Band.B5, (36, 64), Protocol.UDP)
    ok = m >= 0.99 * base and _rel(m, 9.88) <= 0.03
    return Criterion(3, "two-channel 3-station chain, UDP", ok,
                     f"{m:.4f} Mbps, {m / base:.4f} of single hop, {_rel(m, 9.88) * 100:.2f}% from 9.88")


def c4_improvement_factor() -> Criterion:
    factors = {}
    for n in (3, 4, 5):
        one = _mbps(Band.B5, (36,) * (n - 1), Protocol.UDP)
        two = _mbps(Band.B5, tuple((36, 64)[k % 2] for k in range(n - 1)), Protocol.UDP)
        factors[n] = two / one
    ok = all(1.5 - 1e-9 <= f <= 2.0 + 1e-9 for f in factors.values())
    ok &= factors[3] > factors[4] and factors[5] > factors[4]
    detail = ", ".join(f"n={n}: {f:.3f}" for n, f in factors.items())
    return Criterion(4, "two-channel improvement factor and parity", ok, detail)


def c5_b5_orthogonality() -> Criterion:
    same = _mbps(Band.B5, (36, 36), Protocol.UDP)
    optimum = _mbps(Band.B5, (36, 64), Protocol.UDP)
    sweep = [(o, _mbps(Band.B5, (36, o), Protocol.UDP)) for o in (40, 44, 48, 52, 56, 60)]
    first, last = sweep[0][1], sweep[-1][1]
    mono = all(b[1] >= a[1] - 1e-12 for a, b in zip(sweep, sweep[1:]))
    ok = _rel(first, same) <= 0.10 and mono and _rel(last, optimum) <= 0.05
    return Criterion(5, "5 GHz orthogonality sweep", ok,
                     f"(36,40)={first:.3f} vs same-channel {same:.3f}; monotone={mono}; "
                     f"(36,60)={last:.3f} vs optimum {optimum:.3f}")


def c6_b24_anomaly() -> Criterion:
    pair = _mbps(Band.B24, (1, 3), Protocol.TCP)
    same = _mbps(Band.B24, (1, 1), Protocol.TCP)
    ok = pair < same and pair < 3.22
    return Criterion(6, "2.4 GHz adjacent-channel anomaly", ok,
                     f"(1,3) TCP {pair:.3f} < same-channel {same:.3f} and < 3.22")


def c7_coupling() -> Criterion:
    at0 = _mbps(Band.B24, (1, 11), Protocol.TCP, 0.0)
    at25 = _mbps(Band.B24, (1, 11), Protocol.TCP, 25.0)
    at30 = _mbps(Band.B24, (1, 11), Protocol.TCP, 30.0)
    ok = at0 / at30 <= 0.45 and at25 / at30 >= 0.90
    return Criterion(7, "antenna coupling at the relay", ok,
                     f"0 cm ratio {at0 / at30:.3f} (<= 0.45), 25 cm ratio {at25 / at30:.3f} (>= 0.90)")


# -- 8: negotiation ------------------------------------------------------------------------


def oracle_select(values: list[float], chans: tuple[int, ...], allowed: list[int], hw: int) -> int:
    best, best_score = None, None
    for c in chans:
        if c not in allowed:
            continue
        p = chans.index(c)
        score = max(v for k, v in enumerate(values) if abs(k - p) <= hw)
        if best_score is None or score < best_score:
            best, best_score = c, score
    return best


def random_quality(rng: random.Random, band: Band) -> QualityList:
    n = len(band_channels(band))
    return QualityList(band, tuple(float(rng.choice([FLOOR_DBM, rng.randint(-100, 0)])) for _ in range(n)))


def c8_negotiation(cases: int = 1000) -> Criterion:
    rng = random.Random(8)
    mismatches = 0
    for _ in range(cases):
        band = rng.choice([Band.B24, Band.B5])
        chans = band_channels(band)
        allowed = sorted(rng.sample(chans, rng.randint(1, len(chans))))
        hw = rng.randint(0, 5)
        q = random_quality(rng, band)
        got = select_channel(q, NegotiationParams(allowed_channels=tuple(allowed), window_halfwidth=hw))
        if got != oracle_select(list(q.values), chans, allowed, hw):
            mismatches += 1
    laws = True
    for _ in range(200):
        band = rng.choice([Band.B24, Band.B5])
        a, b, c = (random_quality(rng, band) for _ in range(3))
        laws &= merge_quality(a, b) == merge_quality(b, a)
        laws &= merge_quality(merge_quality(a, b), c) == merge_quality(a, merge_quality(b, c))
        laws &= merge_quality(a, a) == a
        laws &= merge_quality(a, QualityList.floor(band)) == a

    # Constant interference: at most one switch per link.
    const = [Interferer(0.0, 1e9, 1, -40.0, Band.B24), Interferer(0.0, 1e9, 9, -70.0, Band.B24)]
    sc = _negotiation_chain(3, const, horizon=200.0)
    st = run(sc)
    flaps = max(len(h) - 1 for h in st.channel_history.values())

    # Injected interferer on a channel-1 link moves it to 11 within one round.
    inj_t = 12.0
    sc = _negotiation_chain(2, [Interferer(inj_t, 1e9, 1, -30.0, Band.B24, frozenset({0, 1}))], horizon=40.0)
    hist = run(sc).channel_history[(0, 1)]
    switched = [t for t, ch in hist[1:] if ch == 11]
    prompt = bool(switched) and switched[0] - inj_t <= sc.negotiation.round_period_s
    ok = mismatches == 0 and laws and flaps <= 1 and prompt
    return Criterion(8, "negotiation properties", ok,
                     f"oracle mismatches {mismatches}/{cases}; semilattice laws {laws}; "
                     f"max switches per link {flaps}; injected switch at {switched[:1]} s")


def _negotiation_chain(n: int, interferers: list[Interferer], horizon: float) -> Scenario:
    spec = chain_spec(n, [Channel.b24(1), Channel.b24(11)], antenna_positions=[0.0, 30.0])
    return Scenario("negotiation", Band.B24, spec, [], negotiation=NegotiationParams(allowed_channels=(1, 11)),
                    interferers=interferers, horizon_s=horizon)


# -- 9: routing ----------------------------------------------------------------------------


def random_connected_links(rng: random.Random, n: int, extra_p: float = 0.25) -> list[tuple[int, int]]:
    links = set()
    for v in range(1, n):
        links.add((rng.randrange(v), v))
    for a in range(n):
        for b in range(a + 1, n):
            if rng.random() < extra_p:
                links.add((a, b))
    return sorted(links)


def random_scenario(seed: int, olsr: OlsrParams | None = None, loss: float = 0.0,
                    horizon: float = 30.0) -> Scenario:
    rng = random.Random(seed)
    n = rng.randint(2, 10)
    links = random_connected_links(rng, n)
    spec = grid_like_spec(n, links, [Channel.b5(36)])
    link_loss = {l: loss for l in links} if loss else {}
    return Scenario(f"random{seed}", Band.B5, spec, [], olsr=olsr or OlsrParams(), link_loss=link_loss,
                    horizon_s=horizon, seed=seed)


def bfs_oracle(adj: dict[int, set[int]], src: int) -> dict[int, tuple[int, int]]:
    """``dest -> (hops, lowest first hop among shortest paths)``."""
    def dist_from(s: int) -> dict[int, int]:
        d = {s: 0}
        dq = deque([s])
        while dq:
            u = dq.popleft()
            for v in adj[u]:
                if v not in d:
                    d[v] = d[u] + 1
                    dq.append(v)
        return d

    d_src = dist_from(src)
    out = {}
    per_nbr = {nb: dist_from(nb) for nb in adj[src]}
    for dest, h in d_src.items():
        if dest == src:
            continue
        first = min(nb for nb in adj[src] if per_nbr[nb].get(dest, math.inf) == h - 1)
        out[dest] = (h, first)
    return out


def bellman_ford(graph: dict[int, dict[int, float]], src: int) -> dict[int, float]:
    nodes = set(graph) | {v for e in graph.values() for v in e}
    dist = {v: math.inf for v in nodes}
    dist[src] = 0.0
    for _ in range(len(nodes)):
        changed = False
        for u, edges in graph.items():
            for v, w in edges.items():
                if dist[u] + w < dist[v] - 1e-15:
                    dist[v] = dist[u] + w
                    changed = True
        if not changed:
            break
    return dist


def check_routes_hop(sim: Simulator) -> int:
    """Number of route entries disagreeing with the BFS oracle on the true topology."""
    topo = sim.topo
    adj = {n: set(topo.neighbors(n)) for n in topo.node_ids}
    bad = 0
    for n in topo.node_ids:
        eng = sim.olsr[n]
        want = bfs_oracle(adj, n)
        got = {sim.node_of_sig[d]: (r.hop_count, sim.node_of_sig[r.next_hop]) for d, r in eng.routes.items()}
        bad += sum(1 for d in set(want) | set(got) if want.get(d) != got.get(d))
    return bad


def check_routes_etx(sim: Simulator, now: int) -> int:
    bad = 0
    for n, eng in sim.olsr.items():
        eng.recompute(now)
        g = eng.edges(now)
        dist = bellman_ford(g, eng.main_address)
        for d, r in eng.routes.items():
            if r.netmask is not None:
                continue
            best_nh = {
                nb for nb, w in g.get(eng.main_address, {}).items()
                if math.isclose(w + bellman_ford(g, nb).get(d, math.inf) if nb != d else w,
                                dist[d], rel_tol=1e-9)
            }
            if not math.isclose(r.metric, dist[d], rel_tol=1e-9) or r.next_hop not in best_nh:
                bad += 1
        reachable = {d for d, c in dist.items() if d != eng.main_address and c < math.inf}
        bad += len(reachable ^ {d for d, r in eng.routes.items() if r.netmask is None})
    return bad


def mpr_cover_violations(sim: Simulator, now: int) -> int:
    bad = 0
    for eng in sim.olsr.values():
        k = eng.params.mpr_coverage
        sym = set(eng.sym_neighbors(now))
        targets = {t for (n, t) in eng.two_hop if n in sym and t != eng.main_address and t not in sym}
        for t in targets:
            providers = {n for (n, tt) in eng.two_hop if tt == t and n in sym}
            if len(providers & eng.mpr_set) < min(k, len(providers)):
                bad += 1
    return bad


def c9_olsr(topologies: int = 50) -> Criterion:
    hop_bad = etx_bad = cover_bad = econ_bad = 0
    handshake_late = 0
    hp = OlsrParams(link_quality_level=0)
    limit = 2 * hp.hello_interval + 0.001
    for seed in range(topologies):
        sc = random_scenario(seed, hp)
        sim = Simulator(sc)
        st = sim.run()
        end = int(sc.horizon_s * US)
        hop_bad += check_routes_hop(sim)
        cover_bad += mpr_cover_violations(sim, end)
        for link in sim.topo.links():
            if st.sym_at.get(link, math.inf) > limit + 1e-9:
                handshake_late += 1
        full = run(replace(sc, olsr=replace(hp, full_flooding=True)))
        if st.forwards.get("tc", 0) > full.forwards.get("tc", 0):
            econ_bad += 1
        lossy = Simulator(random_scenario(seed, OlsrParams(), loss=0.15))
        lossy.run()
        etx_bad += check_routes_etx(lossy, end)
    ok = not (hop_bad or etx_bad or cover_bad or econ_bad or handshake_late)
    return Criterion(9, "routing properties", ok,
                     f"{topologies} topologies: BFS mismatches {hop_bad}, ETX mismatches {etx_bad}, "
                     f"MPR cover violations {cover_bad}, flooding economy violations {econ_bad}, "
                     f"late handshakes {handshake_late}")


# -- 10: metrics -----------------------------------------------------------------------


def c10_metrics() -> Criterion:
    p = 0.5
    series = sum(k * p ** (k - 1) * (1 - p) for k in range(1, 200))
    etx_ok = abs(etx(p) - 2.0) < 1e-6 and abs(etx(p) - series) < 1e-6
    rng = random.Random(10)
    endpoints = mcr_ok = diversity = True
    for _ in range(500):
        hops = [HopSpec(rng.uniform(1, 4), 8000, rng.choice([6e6, 12e6]), rng.choice("ab"),
                        {"a": rng.random() * 0.5, "b": rng.random() * 0.5}) for _ in range(rng.randint(1, 5))]
        path = PathSpec.of(hops)
        total = sum(h.ett for h in hops)
        per = {}
        for h in hops:
            per[h.channel] = per.get(h.channel, 0.0) + h.ett
        endpoints &= wcett(path, 0.0) == total and wcett(path, 1.0) == max(per.values())
        beta = rng.random()
        mcr_ok &= mcr(path, beta, 0.0) == wcett(path, beta)
        e1, e2 = rng.uniform(1, 3), rng.uniform(1, 3)
        same = PathSpec.of([HopSpec(e1, 8000, 6e6, 1), HopSpec(e2, 8000, 6e6, 1)])
        mixed = PathSpec.of([HopSpec(e1, 8000, 6e6, 1), HopSpec(e2, 8000, 6e6, 2)])
        b = rng.uniform(0.01, 1.0)
        diversity &= wcett(mixed, b) < wcett(same, b)
    ok = etx_ok and endpoints and mcr_ok and diversity
    return Criterion(10, "metric identities", ok,
                     f"etx(0.5)={etx(0.5)} series={series:.9f}; beta endpoints {endpoints}; "
                     f"mcr(delay=0)=wcett {mcr_ok}; channel diversity {diversity}")


# -- 11..13: stack ------------------------------------------------------------------------


def c11_remap(scenarios: list[Scenario] | None = None) -> Criterion:
    scenarios = builtin_scenarios() if scenarios is None else scenarios
    leaks = total = 0
    for sc in scenarios:
        st = run(sc)
        for table in st.routes.values():
            for r in table.values():
                total += 1
                if (r.destination in st.signaling_addresses or r.next_hop in st.signaling_addresses
                        or r.egress_interface != "bond0"):
                    leaks += 1
    ok = leaks == 0 and total > 0
    return Criterion(11, "route remapping", ok,
                     f"{total} routes over {len(scenarios)} scenarios, {leaks} reference signaling")


def c12_determinism(scenarios: list[Scenario] | None = None) -> Criterion:
    scenarios = builtin_scenarios() if scenarios is None else scenarios
    differ = [sc.name for sc in scenarios if results_csv([run(sc)]) != results_csv([run(sc)])]
    return Criterion(12, "determinism", not differ,
                     f"{len(scenarios)} scenarios run twice, {len(differ)} differ {differ[:3]}")


def c13_latency() -> Criterion:
    lat = {}
    for stack in ("bare", "full"):
        sc = chain_scenario("lat", Band.B5, (36, 64), Protocol.UDP, stack=stack, offered_mbps=0.1)
        lat[stack] = run(sc).flows[0].latency_ms
    delta = lat["full"] - lat["bare"]
    return Criterion(13, "latency accounting", 0.8 <= delta <= 1.3,
                     f"bare {lat['bare']:.3f} ms, full {lat['full']:.3f} ms, delta {delta:.3f} ms")


CRITERIA: list[Callable[[], Criterion]] = [
    c1_udp_chain, c2_tcp_chain, c3_two_channel_chain, c4_improvement_factor, c5_b5_orthogonality,
    c6_b24_anomaly, c7_coupling, c8_negotiation, c9_olsr, c10_metrics, c11_remap,
    c12_determinism, c13_latency,
]


def run_all() -> list[Criterion]:
    return [c() for c in CRITERIA]
