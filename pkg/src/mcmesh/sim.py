"""Deterministic discrete-event simulator.

Time is kept in integer microseconds. Events pop in ``(time, seq)`` order and
``seq`` is a global counter, so equal-time events run in scheduling order.

Control traffic (HELLO/TC/MID/HNA and negotiation) travels over the
signaling channel with a fixed propagation delay and optional per-link loss.
Data flows are not simulated frame by frame: each flow's rate is the radio
model's saturation throughput for its current path, and the simulator
integrates that rate between the instants where routes, channel assignments
or the set of active flows change.
"""

from __future__ import annotations

import heapq
import json
import logging
import math
import random
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping

from .bonding import BondState, enslave, store_packet, xmit_select
from .core import (
    Band,
    Channel,
    PacketRecord,
    Topology,
    TopologySpec,
    build_topology,
    link_key,
)
from .negotiation import (
    SWITCH,
    Interferer,
    InterfererScan,
    NegotiationAgent,
    NegotiationPacket,
    NegotiationParams,
    PeerLink,
    ScanProvider,
    client_decide,
    exchange_macs,
    initial_assignment,
    params_for,
    server_select,
)
from .olsr import MsgType, OlsrMessage, OlsrNode, OlsrParams, RouteTable, remap_routes, seconds
from .radio import DisconnectedPathError, Protocol, RadioParams, path_throughput

log = logging.getLogger(__name__)

US = 1_000_000
PROPAGATION_US = 1_000
PHASE_QUANTUM_US = 10_000
FLOW_TICK_US = 100_000
PACKET_BYTES = 1470

STACKS = ("bare", "routing_bonding", "full")


class ScenarioError(ValueError):
    pass


@dataclass(frozen=True)
class Flow:
    src: int
    dst: int
    protocol: Protocol = Protocol.UDP
    start_s: float = 30.0
    duration_s: float = 30.0
    offered_mbps: float | None = None  # None = saturate
    path: tuple[int, ...] | None = None
    name: str = ""

    def __post_init__(self) -> None:
        if self.duration_s <= 0:
            raise ScenarioError("flow duration must be > 0")
        if self.start_s < 0:
            raise ScenarioError("flow start must be >= 0")
        if self.offered_mbps is not None and self.offered_mbps <= 0:
            raise ScenarioError("offered load must be > 0")
        if self.src == self.dst:
            raise ScenarioError("flow source and destination coincide")

    @property
    def label(self) -> str:
        return self.name or f"{self.src}->{self.dst}"


@dataclass(frozen=True)
class RandomInterferers:
    count: int
    channels: tuple[int, ...]
    level_dbm: tuple[float, float] = (-60.0, -30.0)
    duration_s: tuple[float, float] = (5.0, 20.0)


@dataclass(frozen=True)
class LinkEvent:
    time_s: float
    link: tuple[int, int]
    up: bool


@dataclass
class Scenario:
    name: str
    band: Band
    topology: TopologySpec
    flows: list[Flow] = field(default_factory=list)
    radio: RadioParams = field(default_factory=RadioParams)
    olsr: OlsrParams = field(default_factory=OlsrParams)
    negotiation: NegotiationParams | None = None
    link_channels: dict[tuple[int, int], int] = field(default_factory=dict)
    link_loss: dict[tuple[int, int], float] = field(default_factory=dict)
    interferers: list[Interferer] = field(default_factory=list)
    random_interferers: RandomInterferers | None = None
    link_events: list[LinkEvent] = field(default_factory=list)
    hna: dict[int, tuple[tuple[int, int], ...]] = field(default_factory=dict)
    stack: str = "full"
    seed: int = 1
    horizon_s: float = 70.0
    reps: int = 1
    negotiation_start_s: float = 5.0

    def __post_init__(self) -> None:
        if self.stack not in STACKS:
            raise ScenarioError(f"stack must be one of {STACKS}")
        if self.horizon_s <= 0:
            raise ScenarioError("horizon must be > 0")
        if self.reps < 1:
            raise ScenarioError("reps must be >= 1")
        for f in self.flows:
            if f.start_s + f.duration_s > self.horizon_s + 1e-9:
                raise ScenarioError(f"flow {f.label} ends after the horizon")
        for link, p in self.link_loss.items():
            if not 0.0 <= p <= 1.0:
                raise ScenarioError(f"loss on link {link} must lie in [0, 1]")


@dataclass(order=True)
class Event:
    time: int
    seq: int
    kind: str = field(compare=False)
    data: tuple = field(compare=False, default=())


class EventQueue:
    def __init__(self) -> None:
        self._heap: list[Event] = []
        self._seq = 0
        self.now = 0

    def push(self, time: int, kind: str, *data) -> Event:
        if time < self.now:
            raise ValueError(f"event {kind} scheduled in the past ({time} < {self.now})")
        ev = Event(time, self._seq, kind, data)
        self._seq += 1
        heapq.heappush(self._heap, ev)
        return ev

    def pop(self) -> Event:
        ev = heapq.heappop(self._heap)
        self.now = ev.time
        return ev

    def __len__(self) -> int:
        return len(self._heap)

    def peek_time(self) -> int | None:
        return self._heap[0].time if self._heap else None


@dataclass
class FlowResult:
    flow: Flow
    mbps: float
    latency_ms: float
    switches: int
    delivered_mbit: float
    offered_mbit: float


@dataclass
class RunStats:
    scenario: str
    seed: int
    flows: list[FlowResult] = field(default_factory=list)
    bond_switches: dict[int, int] = field(default_factory=dict)
    bond_fallbacks: dict[int, int] = field(default_factory=dict)
    channel_history: dict[tuple[int, int], list[tuple[float, int]]] = field(default_factory=dict)
    messages: dict[str, int] = field(default_factory=dict)
    forwards: dict[str, int] = field(default_factory=dict)
    diagnostics: list[str] = field(default_factory=list)
    routes: dict[int, RouteTable] = field(default_factory=dict)
    signaling_addresses: frozenset[int] = frozenset()
    full_routes_at: float | None = None
    sym_at: dict[tuple[int, int], float] = field(default_factory=dict)
    trace: list[str] = field(default_factory=list)


def latency_ms(hops: int, params: RadioParams, stack: str) -> float:
    """Mean one-way packet latency along ``hops`` hops."""
    base = hops * params.hop_latency_ms
    if stack == "full":
        return base + params.per_packet_overhead_ms
    if stack == "routing_bonding":
        return base + params.partial_stack_overhead_ms
    return base


class Simulator:
    def __init__(self, scenario: Scenario, seed: int | None = None, trace: bool = False):
        self.sc = scenario
        self.seed = scenario.seed if seed is None else seed
        self.rng = random.Random(self.seed)
        self.topo: Topology = build_topology(scenario.topology)
        self.q = EventQueue()
        self.trace_on = trace
        self.stats = RunStats(scenario.name, self.seed)
        self.down: set[tuple[int, int]] = set()

        ids = self.topo.node_ids
        self.sig_addr = {n: self.topo.node(n).signaling.ip_address for n in ids}
        self.bonds: dict[int, BondState] = {n: enslave(self.topo.node(n)) for n in ids}
        self.bond_addr = {n: b.unified_ip for n, b in self.bonds.items()}
        self.node_of_bond = {a: n for n, a in self.bond_addr.items()}
        self.node_of_sig = {a: n for n, a in self.sig_addr.items()}
        self.addr_map = {self.sig_addr[n]: self.bond_addr[n] for n in ids}
        self.stats.signaling_addresses = frozenset(self.sig_addr.values())

        self.olsr = {
            n: OlsrNode(self.sig_addr[n], scenario.olsr,
                        interface=self.topo.node(n).signaling.name,
                        extra_addresses=[i.ip_address for i in self.topo.node(n).data_interfaces],
                        hna_networks=scenario.hna.get(n, ()))
            for n in ids
        }
        self.tables: dict[int, RouteTable] = {n: {} for n in ids}

        self.link_channel = self._initial_channels()
        for link, ch in self.link_channel.items():
            self.stats.channel_history[link] = [(0.0, ch)]
        self.agents = self._build_agents()
        self._publish_all(0)

        interferers = list(scenario.interferers) + self._random_interferers()
        self.scan: ScanProvider = InterfererScan(scenario.band, interferers)
        self.interferers = interferers

        self.rates: dict[int, float] = {}
        self.latency: dict[int, float] = {}
        self.acc_mbit = [0.0] * len(scenario.flows)
        self.acc_lat = [0.0] * len(scenario.flows)
        self.acc_lat_time = [0.0] * len(scenario.flows)
        self.flow_switches = [0] * len(scenario.flows)
        self.last_refresh = 0
        self.active: set[int] = set()

    # -- setup -----------------------------------------------------------
    def _allowed(self, link: tuple[int, int]) -> tuple[int, ...]:
        a, b = link
        ca = {c.index for c in self.topo.node(a).data_channels() if c.band is self.sc.band}
        cb = {c.index for c in self.topo.node(b).data_channels() if c.band is self.sc.band}
        return tuple(sorted(ca & cb))

    def _initial_channels(self) -> dict[tuple[int, int], int]:
        pinned = {link_key(*k): v for k, v in self.sc.link_channels.items()}
        for link, ch in pinned.items():
            if link not in self.topo.adjacency:
                raise ScenarioError(f"channel given for unknown link {link}")
            if ch not in self._allowed(link):
                raise ScenarioError(f"link {link}: channel {ch} not tuned on both ends")
        common = None
        for link in self.topo.links():
            allowed = set(self._allowed(link))
            if not allowed:
                raise ScenarioError(f"link {link}: endpoints share no data channel")
            common = allowed if common is None else common & allowed
        if not self.topo.links():
            return {}
        if self.sc.negotiation is not None and self.sc.negotiation.allowed_channels:
            wanted = set(self.sc.negotiation.allowed_channels)
            if common and wanted & common:
                common &= wanted
        base = initial_assignment(self.topo, sorted(common) or [0], pinned)
        out = {}
        for link, ch in base.items():
            allowed = self._allowed(link)
            out[link] = ch if ch in allowed else allowed[0]
        return out

    def _build_agents(self) -> dict[int, NegotiationAgent]:
        agents = {}
        for n in self.topo.node_ids:
            node = self.topo.node(n)
            agent = NegotiationAgent(n, self.bond_addr[n], self.bonds[n].unified_mac, self.sc.band)
            for peer in self.topo.neighbors(n):
                link = link_key(n, peer)
                agent.links[peer] = PeerLink(peer, self.bond_addr[peer], self.link_channel[link],
                                             self._allowed(link))
            agents[n] = agent
        return agents

    def _random_interferers(self) -> list[Interferer]:
        spec = self.sc.random_interferers
        if spec is None:
            return []
        out = []
        ids = self.topo.node_ids
        for _ in range(spec.count):
            on = self.rng.uniform(0.0, self.sc.horizon_s)
            dur = self.rng.uniform(*spec.duration_s)
            ch = self.rng.choice(spec.channels)
            lvl = round(self.rng.uniform(*spec.level_dbm), 1)
            scope = frozenset(self.rng.sample(ids, k=max(1, len(ids) // 2)))
            out.append(Interferer(round(on, 3), round(on + dur, 3), ch, lvl, self.sc.band, scope))
        return out

    def _publish(self, node: int, peer: int, channel: int, before: int) -> None:
        pkt = NegotiationPacket(self.bond_addr[peer], self.bonds[peer].unified_mac, channel, before)
        store_packet(self.bonds[node], pkt)

    def _publish_all(self, now: int) -> None:
        for (a, b), ch in self.link_channel.items():
            self._publish(a, b, ch, ch)
            self._publish(b, a, ch, ch)

    # -- tracing / counters -----------------------------------------------
    def _trace(self, now: int, kind: str, **fields) -> None:
        if self.trace_on:
            rec = {"t_us": now, "event": kind, **fields}
            self.stats.trace.append(json.dumps(rec, sort_keys=True))

    def _count(self, table: dict[str, int], kind: str) -> None:
        table[kind] = table.get(kind, 0) + 1

    # -- control plane -------------------------------------------------------
    def _link_up(self, a: int, b: int) -> bool:
        return link_key(a, b) not in self.down

    def _broadcast(self, sender: int, msg: OlsrMessage, now: int) -> None:
        self._count(self.stats.messages, msg.msg_type.value.lower())
        self._trace(now, "send", node=sender, msg=msg.dump())
        for peer in self.topo.neighbors(sender):
            if not self._link_up(sender, peer):
                continue
            p = self.sc.link_loss.get(link_key(sender, peer), 0.0)
            if p > 0 and self.rng.random() < p:
                continue
            self.q.push(now + PROPAGATION_US, "deliver", peer, sender, msg)

    def _deliver(self, node: int, sender: int, msg: OlsrMessage, now: int) -> None:
        eng = self.olsr[node]
        sender_addr = self.sig_addr[sender]
        if msg.msg_type is MsgType.HELLO:
            changed = eng.process_hello(msg, eng.interface, now)
            forward = False
            self._note_sym(node, sender, now)
        elif msg.msg_type is MsgType.TC:
            changed, forward = eng.process_tc(msg, sender_addr, now)
        else:
            changed, forward = eng.process_flooded(msg, sender_addr, now)
        if forward:
            self._count(self.stats.forwards, msg.msg_type.value.lower())
            self._broadcast(node, msg.forwarded(), now)
        if changed:
            self._install_routes(node, now)

    def _note_sym(self, a: int, b: int, now: int) -> None:
        key = link_key(a, b)
        if key in self.stats.sym_at:
            return
        la = self.olsr[a].links.get(self.sig_addr[b])
        lb = self.olsr[b].links.get(self.sig_addr[a])
        if la and lb and la.is_sym(now) and lb.is_sym(now):
            self.stats.sym_at[key] = now / US

    def _install_routes(self, node: int, now: int) -> None:
        dropped: list = []
        self.tables[node] = remap_routes(self.olsr[node].routes, self.addr_map, dropped=dropped)
        for r in dropped:
            self.stats.diagnostics.append(f"t={now / US:.3f} node {node}: unmapped route to {r.destination}")
        if self.stats.full_routes_at is None and self._all_routes():
            self.stats.full_routes_at = now / US
        self._refresh(now)

    def _all_routes(self) -> bool:
        ids = self.topo.node_ids
        return all(
            self.bond_addr[d] in self.tables[s] for s in ids for d in ids if s != d
        )

    def _timer(self, node: int, kind: str, now: int) -> None:
        eng = self.olsr[node]
        p = self.sc.olsr
        if kind == "hello":
            msg, period = eng.emit_hello(now), p.hello_interval
        elif kind == "tc":
            msg, period = eng.emit_tc(now), p.tc_interval
        elif kind == "mid":
            msg, period = eng.emit_mid(now), p.mid_interval
        else:
            msg, period = eng.emit_hna(now), p.hna_interval
        if msg is not None:
            self._broadcast(node, msg, now)
        # Expiry can change routes even without incoming traffic.
        if eng.recompute(now):
            self._install_routes(node, now)
        self.q.push(now + seconds(period), "timer", node, kind)

    # -- negotiation -----------------------------------------------------------
    def _negotiate(self, now: int) -> None:
        params = self.sc.negotiation
        t = now / US
        for link in self.topo.links():
            client_id, server_id = link
            client, server = self.agents[client_id], self.agents[server_id]
            before = self.link_channel[link]
            if not self._link_up(*link) or not server.responsive:
                self._trace(now, "negotiation_timeout", link=list(link))
                self._publish(client_id, server_id, 0, before)
                continue
            if client.links[server_id].peer_mac is None:
                exchange_macs(client, server)
            q_client = self.scan(client_id, t)
            reply = server_select(server, client_id, q_client, self.scan, params, t)
            decision = client_decide(client, server_id, reply, params)
            ch = client.links[server_id].channel
            server.links[client_id].channel = ch
            self._count(self.stats.messages, "negotiation")
            self._trace(now, "negotiation", link=list(link), proposed=reply.channel,
                        decision=decision, channel=ch)
            if decision == SWITCH:
                self.link_channel[link] = ch
                self.stats.channel_history[link].append((t, ch))
            self._publish(client_id, server_id, ch, before)
            self._publish(server_id, client_id, ch, before)
        self._refresh(now)
        self.q.push(now + seconds(params.round_period_s), "negotiate")

    # -- data plane ----------------------------------------------------------------
    def route_path(self, src: int, dst: int) -> list[int] | None:
        path = [src]
        target = self.bond_addr[dst]
        cur = src
        for _ in range(len(self.topo.nodes)):
            if cur == dst:
                return path
            r = self.tables[cur].get(target)
            if r is None:
                return None
            nxt = self.node_of_bond.get(r.next_hop)
            if nxt is None or nxt in path or not self.topo.adjacent(cur, nxt):
                return None
            path.append(nxt)
            cur = nxt
        return path if cur == dst else None

    def flow_path(self, flow: Flow) -> list[int] | None:
        if flow.path is not None:
            p = list(flow.path)
            if all(self.topo.adjacent(a, b) and self._link_up(a, b) for a, b in zip(p, p[1:])):
                return p
            return None
        p = self.route_path(flow.src, flow.dst)
        if p is None:
            return None
        if not all(self._link_up(a, b) for a, b in zip(p, p[1:])):
            return None
        return p

    def _hop_radios(self, path: list[int], flow: Flow) -> dict | None:
        """Ask each sender's bond which slave carries the flow to the next hop."""
        out = {}
        for u, v in zip(path, path[1:]):
            pkt = PacketRecord(self.bond_addr[flow.src], self.bond_addr[flow.dst], PACKET_BYTES)
            tx = xmit_select(self.bonds[u], pkt, self.bond_addr[v])
            rx = self.topo.node(v).interface_on(tx.channel)
            if rx is None:
                return None
            out[(u, v)] = (tx.channel, (tx.id, rx.id))
        return out

    def measure_flow(self, flow: Flow, radios: Mapping | None = None, path: list[int] | None = None) -> float:
        """Instantaneous rate of ``flow`` alone on its current path."""
        path = path if path is not None else self.flow_path(flow)
        if path is None:
            return 0.0
        radios = radios if radios is not None else self._hop_radios(path, flow)
        if radios is None:
            return 0.0
        assign = {l: ch for l, (ch, _) in radios.items()}
        ifaces = {l: ids for l, (_, ids) in radios.items()}
        cap = path_throughput(self.topo, assign, path, self.sc.radio, flow.protocol, ifaces)
        return cap if flow.offered_mbps is None else min(flow.offered_mbps, cap)

    def _refresh(self, now: int) -> None:
        """Integrate the current rates up to ``now`` and recompute them."""
        self._accumulate(now)
        flows = self.sc.flows
        paths: dict[int, list[int]] = {}
        radios: dict[int, dict] = {}
        for i in sorted(self.active):
            p = self.flow_path(flows[i])
            if p is None:
                self.stats.diagnostics.append(f"t={now / US:.3f} flow {flows[i].label}: no route")
                continue
            r = self._hop_radios(p, flows[i])
            if r is None:
                self.stats.diagnostics.append(f"t={now / US:.3f} flow {flows[i].label}: untuned hop")
                continue
            paths[i], radios[i] = p, r
        assign: dict[tuple[int, int], Channel] = {}
        ifaces: dict[tuple[int, int], tuple[int, int]] = {}
        for i in sorted(radios):
            for l, (ch, ids) in radios[i].items():
                assign.setdefault(l, ch)
                ifaces.setdefault(l, ids)
        new_rates, new_lat = {}, {}
        for i, p in paths.items():
            f = flows[i]
            try:
                cap = path_throughput(self.topo, assign, p, self.sc.radio, f.protocol, ifaces)
            except DisconnectedPathError as exc:
                self.stats.diagnostics.append(f"t={now / US:.3f} flow {f.label}: {exc}")
                continue
            new_rates[i] = cap if f.offered_mbps is None else min(f.offered_mbps, cap)
            new_lat[i] = latency_ms(len(p) - 1, self.sc.radio, self.sc.stack)
        if new_rates != self.rates:
            self._trace(now, "rates", rates={flows[i].label: round(r, 6) for i, r in sorted(new_rates.items())})
        self.rates, self.latency = new_rates, new_lat

    def _accumulate(self, now: int) -> None:
        dt = (now - self.last_refresh) / US
        if dt > 0:
            for i, r in self.rates.items():
                self.acc_mbit[i] += r * dt
                self.acc_lat[i] += self.latency[i] * dt
                self.acc_lat_time[i] += dt
        self.last_refresh = now

    def _tick(self, i: int, now: int) -> None:
        """Push one sample data packet (and its ack for TCP) through the bonds."""
        if i not in self.active:
            return
        f = self.sc.flows[i]
        path = self.flow_path(f)
        if path is not None:
            hops = list(zip(path, path[1:]))
            if f.protocol is Protocol.TCP:
                hops += [(v, u) for u, v in reversed(hops)]
            for u, v in hops:
                bond = self.bonds[u]
                before = bond.switches
                xmit_select(bond, PacketRecord(self.bond_addr[u], self.bond_addr[v], PACKET_BYTES), self.bond_addr[v])
                self.flow_switches[i] += bond.switches - before
        self.q.push(now + FLOW_TICK_US, "tick", i)

    # -- main loop --------------------------------------------------------------------
    def _schedule_start(self) -> None:
        p = self.sc.olsr
        for n in self.topo.node_ids:
            for kind, period in (("hello", p.hello_interval), ("tc", p.tc_interval),
                                 ("mid", p.mid_interval), ("hna", p.hna_interval)):
                slots = max(1, seconds(period) // PHASE_QUANTUM_US)
                self.q.push(self.rng.randrange(slots) * PHASE_QUANTUM_US, "timer", n, kind)
        if self.sc.negotiation is not None:
            self.q.push(seconds(self.sc.negotiation_start_s), "negotiate")
        for i, f in enumerate(self.sc.flows):
            self.q.push(seconds(f.start_s), "flow_start", i)
            self.q.push(seconds(f.start_s + f.duration_s), "flow_stop", i)
        for ev in self.sc.link_events:
            self.q.push(seconds(ev.time_s), "link", link_key(*ev.link), ev.up)
        for itf in self.interferers:
            for t, on in ((itf.time_on, True), (itf.time_off, False)):
                if t <= self.sc.horizon_s:
                    self.q.push(seconds(t), "interferer", itf.channel, on)

    def run(self) -> RunStats:
        horizon = seconds(self.sc.horizon_s)
        self._schedule_start()
        while self.q and self.q.peek_time() <= horizon:
            ev = self.q.pop()
            now = ev.time
            if ev.kind == "timer":
                self._timer(*ev.data, now)
            elif ev.kind == "deliver":
                node, sender, msg = ev.data
                if self._link_up(node, sender):
                    self._deliver(node, sender, msg, now)
            elif ev.kind == "negotiate":
                self._negotiate(now)
            elif ev.kind == "flow_start":
                self.active.add(ev.data[0])
                self._refresh(now)
                self.q.push(now, "tick", ev.data[0])
            elif ev.kind == "flow_stop":
                self._refresh(now)
                self.active.discard(ev.data[0])
                self._refresh(now)
            elif ev.kind == "tick":
                self._tick(ev.data[0], now)
            elif ev.kind == "link":
                link, up = ev.data
                (self.down.discard if up else self.down.add)(link)
                self._trace(now, "link", link=list(link), up=up)
                self._refresh(now)
            elif ev.kind == "interferer":
                self._trace(now, "interferer", channel=ev.data[0], on=ev.data[1])
        self._accumulate(horizon)
        return self._finish()

    def _finish(self) -> RunStats:
        st = self.stats
        for i, f in enumerate(self.sc.flows):
            delivered = self.acc_mbit[i]
            lat = self.acc_lat[i] / self.acc_lat_time[i] if self.acc_lat_time[i] > 0 else math.nan
            offered = math.inf if f.offered_mbps is None else f.offered_mbps * f.duration_s
            st.flows.append(FlowResult(f, delivered / f.duration_s, lat, self.flow_switches[i], delivered, offered))
        st.bond_switches = {n: b.switches for n, b in self.bonds.items()}
        st.bond_fallbacks = {n: b.fallbacks for n, b in self.bonds.items()}
        st.routes = {n: dict(t) for n, t in self.tables.items()}
        return st


def run(scenario: Scenario, seed: int | None = None, horizon_s: float | None = None,
        trace: bool = False) -> RunStats:
    """Execute ``scenario`` once and return its statistics."""
    if horizon_s is not None and horizon_s != scenario.horizon_s:
        from dataclasses import replace

        scenario = replace(scenario, horizon_s=horizon_s)
    return Simulator(scenario, seed=seed, trace=trace).run()


def measure_flow(flow: Flow, world: Simulator) -> float:
    return world.measure_flow(flow)
