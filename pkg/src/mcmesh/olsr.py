"""Proactive link-state routing engine in the OLSR family.

One :class:`OlsrNode` per station. The engine is a pure state machine: the
simulator hands it messages and timer ticks, the engine returns messages to
broadcast. All times are integer microseconds.

Debug dump format (one line per message)::

    <TYPE> orig=<addr> seq=<n> ttl=<n> hops=<n> vtime=<s> <payload>

where ``<payload>`` is ``blocks=[LINK/NEIGH:addr(lq,nlq),...]`` for HELLO,
``ansn=<n> adv=[addr(etx),...]`` for TC, ``ifaces=[...]`` for MID and
``nets=[net/mask,...]`` for HNA.
"""

from __future__ import annotations

import enum
import heapq
import logging
import math
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping

from .core import format_ip

log = logging.getLogger(__name__)

US = 1_000_000


def seconds(t: float) -> int:
    return int(round(t * US))


class MsgType(enum.Enum):
    HELLO = "HELLO"
    TC = "TC"
    MID = "MID"
    HNA = "HNA"


class LinkType(enum.Enum):
    ASYM = "ASYM"
    SYM = "SYM"
    LOST = "LOST"


class NeighType(enum.Enum):
    NOT_NEIGH = "NOT"
    SYM_NEIGH = "SYM"
    MPR_NEIGH = "MPR"


WILL_NEVER = 0
WILL_DEFAULT = 3
WILL_ALWAYS = 7


@dataclass(frozen=True)
class HelloEntry:
    address: int
    lq: float = 1.0
    nlq: float = 1.0


@dataclass(frozen=True)
class HelloBlock:
    link_type: LinkType
    neigh_type: NeighType
    entries: tuple[HelloEntry, ...]


@dataclass(frozen=True)
class HelloPayload:
    willingness: int
    hello_seq: int
    blocks: tuple[HelloBlock, ...] = ()


@dataclass(frozen=True)
class TcPayload:
    ansn: int
    neighbors: tuple[tuple[int, float], ...]


@dataclass(frozen=True)
class MidPayload:
    addresses: tuple[int, ...]


@dataclass(frozen=True)
class HnaPayload:
    networks: tuple[tuple[int, int], ...]


@dataclass(frozen=True)
class OlsrMessage:
    msg_type: MsgType
    originator: int
    msg_seq: int
    vtime_us: int
    payload: object
    ttl: int = 255
    hop_count: int = 0

    def forwarded(self) -> "OlsrMessage":
        return replace(self, ttl=self.ttl - 1, hop_count=self.hop_count + 1)

    def dump(self) -> str:
        head = (
            f"{self.msg_type.value} orig={format_ip(self.originator)} seq={self.msg_seq} "
            f"ttl={self.ttl} hops={self.hop_count} vtime={self.vtime_us / US:g}"
        )
        p = self.payload
        if isinstance(p, HelloPayload):
            items = [
                f"{b.link_type.value}/{b.neigh_type.value}:{format_ip(e.address)}({e.lq:.2f},{e.nlq:.2f})"
                for b in p.blocks
                for e in b.entries
            ]
            body = f"will={p.willingness} blocks=[{','.join(items)}]"
        elif isinstance(p, TcPayload):
            body = f"ansn={p.ansn} adv=[{','.join(f'{format_ip(a)}({c:.2f})' for a, c in p.neighbors)}]"
        elif isinstance(p, MidPayload):
            body = f"ifaces=[{','.join(format_ip(a) for a in p.addresses)}]"
        elif isinstance(p, HnaPayload):
            body = f"nets=[{','.join(f'{format_ip(n)}/{format_ip(m)}' for n, m in p.networks)}]"
        else:
            body = "payload=?"
        return f"{head} {body}"


@dataclass(frozen=True)
class OlsrParams:
    hello_interval: float = 2.0
    hello_validity: float = 40.0
    tc_interval: float = 3.0
    tc_validity: float = 15.0
    mid_interval: float = 5.0
    mid_validity: float = 15.0
    hna_interval: float = 5.0
    hna_validity: float = 15.0
    tc_redundancy: int = 2
    mpr_coverage: int = 1
    link_quality_level: int = 2
    link_quality_win_size: int = 20
    use_hysteresis: bool = False
    hyst_scaling: float = 0.10
    hyst_thr_high: float = 0.80
    hyst_thr_low: float = 0.30
    willingness: int = WILL_DEFAULT
    emit_mid: bool = False
    full_flooding: bool = False

    # olsrd-style configuration keys.
    CONFIG_NAMES = {
        "HelloInterval": "hello_interval",
        "HelloValidityTime": "hello_validity",
        "TcInterval": "tc_interval",
        "TcValidityTime": "tc_validity",
        "MidInterval": "mid_interval",
        "MidValidityTime": "mid_validity",
        "HnaInterval": "hna_interval",
        "HnaValidityTime": "hna_validity",
        "TcRedundancy": "tc_redundancy",
        "MprCoverage": "mpr_coverage",
        "LinkQualityLevel": "link_quality_level",
        "LinkQualityWinSize": "link_quality_win_size",
        "UseHysteresis": "use_hysteresis",
        "HystScaling": "hyst_scaling",
        "HystThrHigh": "hyst_thr_high",
        "HystThrLow": "hyst_thr_low",
        "Willingness": "willingness",
    }

    def __post_init__(self) -> None:
        if self.mpr_coverage < 1:
            raise ValueError("MprCoverage must be >= 1")
        if self.tc_redundancy not in (0, 1, 2):
            raise ValueError("TcRedundancy must be 0, 1 or 2")
        if self.link_quality_level not in (0, 1, 2):
            raise ValueError("LinkQualityLevel must be 0, 1 or 2")
        if self.link_quality_win_size < 1:
            raise ValueError("LinkQualityWinSize must be >= 1")
        if not 0.0 < self.hyst_scaling < 1.0:
            raise ValueError("HystScaling must lie in (0, 1)")
        if not 0.0 <= self.hyst_thr_low <= self.hyst_thr_high <= 1.0:
            raise ValueError("need 0 <= HystThrLow <= HystThrHigh <= 1")
        for name in ("hello_interval", "tc_interval", "mid_interval", "hna_interval"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")

    @classmethod
    def from_config(cls, values: Mapping[str, object]) -> "OlsrParams":
        """Accept either olsrd-style names (``HelloInterval``) or field names."""
        kwargs = {}
        for key, value in values.items():
            name = cls.CONFIG_NAMES.get(key, key)
            if name not in cls.__dataclass_fields__ or name == "CONFIG_NAMES":
                raise ValueError(f"unknown OLSR parameter {key!r}")
            if isinstance(value, str) and value.lower() in ("yes", "no"):
                value = value.lower() == "yes"
            kwargs[name] = value
        return cls(**kwargs)


@dataclass
class LinkTuple:
    local_iface: str
    neighbor_address: int
    sym_until: int = -1
    asym_until: int = -1
    quality: float = 0.0
    pending: bool = False
    lost: bool = False
    window: deque = field(default_factory=lambda: deque(maxlen=20))
    last_hello_seq: int | None = None
    nlq: float = 0.0

    def is_sym(self, now: int) -> bool:
        return self.sym_until >= now and not self.pending and not self.lost

    def is_asym(self, now: int) -> bool:
        return self.asym_until >= now and not self.is_sym(now)

    def expires(self) -> int:
        return max(self.sym_until, self.asym_until)

    @property
    def lq(self) -> float:
        if not self.window:
            return 0.0
        return sum(self.window) / len(self.window)

    @property
    def etx(self) -> float:
        d = self.lq * self.nlq
        return math.inf if d <= 0 else 1.0 / d


class NeighborStatus(enum.Enum):
    NOT_SYM = "NOT_SYM"
    SYM = "SYM"


@dataclass
class NeighborTuple:
    main_address: int
    status: NeighborStatus
    willingness: int = WILL_DEFAULT


@dataclass
class TwoHopTuple:
    neighbor: int
    two_hop: int
    expires: int
    etx: float = 1.0


@dataclass
class TopologyTuple:
    destination: int
    last_hop: int
    ansn: int
    expires: int
    etx: float = 1.0


@dataclass(frozen=True)
class RouteEntry:
    destination: int
    next_hop: int
    hop_count: int
    egress_interface: str = "wlan0"
    metric: float = 0.0
    netmask: int | None = None


RouteTable = dict[int, RouteEntry]


class Received:
    pass


class Lost:
    pass


RECEIVED = Received()
LOST = Lost()


def hysteresis_update(link: LinkTuple, event: Received | Lost, params: OlsrParams) -> LinkTuple:
    """Exponential link-quality update with the high/low threshold rule."""
    s = params.hyst_scaling
    if isinstance(event, Received):
        q = (1 - s) * link.quality + s
    else:
        q = (1 - s) * link.quality
    pending, lost = link.pending, link.lost
    if q > params.hyst_thr_high:
        pending, lost = False, False
    elif q < params.hyst_thr_low:
        pending, lost = True, True
    return replace(link, quality=q, pending=pending, lost=lost)


def _wrap_newer(a: int, b: int) -> bool:
    """``a`` is newer than ``b`` in 16-bit sequence space."""
    return a != b and ((a - b) & 0xFFFF) < 0x8000


class OlsrNode:
    def __init__(
        self,
        main_address: int,
        params: OlsrParams | None = None,
        interface: str = "wlan0",
        extra_addresses: Iterable[int] = (),
        hna_networks: Iterable[tuple[int, int]] = (),
    ):
        self.main_address = main_address
        self.params = params or OlsrParams()
        self.interface = interface
        self.extra_addresses = tuple(extra_addresses)
        self.hna_networks = tuple(hna_networks)
        self.links: dict[int, LinkTuple] = {}
        self.neighbors: dict[int, NeighborTuple] = {}
        self.two_hop: dict[tuple[int, int], TwoHopTuple] = {}
        self.mpr_set: set[int] = set()
        self.mpr_selectors: dict[int, int] = {}
        self.topology: dict[tuple[int, int], TopologyTuple] = {}
        self.latest_ansn: dict[int, int] = {}
        self.duplicates: dict[tuple[int, int], int] = {}
        self.mid_set: dict[int, tuple[int, int]] = {}
        self.hna_set: dict[tuple[int, int, int], int] = {}
        self.routes: RouteTable = {}
        self._msg_seq = 0
        self._hello_seq = 0
        self._ansn = 0
        self._advertised: frozenset[int] | None = None
        self._sent_empty_tc = True
        self.counters = {"malformed": 0, "uncoverable": 0, "stale_tc": 0, "duplicates": 0}

    # -- helpers -------------------------------------------------------
    def _next_seq(self) -> int:
        self._msg_seq = (self._msg_seq + 1) & 0xFFFF
        return self._msg_seq

    def sym_neighbors(self, now: int) -> list[int]:
        return sorted(a for a, l in self.links.items() if l.is_sym(now))

    def _link_cost(self, link: LinkTuple) -> float:
        if self.params.link_quality_level == 2:
            return link.etx
        return 1.0

    def _refresh_neighbors(self, now: int) -> None:
        for addr, link in self.links.items():
            nb = self.neighbors.setdefault(addr, NeighborTuple(addr, NeighborStatus.NOT_SYM))
            nb.status = NeighborStatus.SYM if link.is_sym(now) else NeighborStatus.NOT_SYM
        for addr in list(self.neighbors):
            if addr not in self.links:
                del self.neighbors[addr]

    def expire(self, now: int) -> None:
        """Drop every tuple whose validity has run out."""
        for addr in [a for a, l in self.links.items() if l.expires() < now]:
            del self.links[addr]
        self._refresh_neighbors(now)
        sym = set(self.sym_neighbors(now))
        for k in [k for k, t in self.two_hop.items() if t.expires < now or k[0] not in sym]:
            del self.two_hop[k]
        for k in [k for k, t in self.mpr_selectors.items() if t < now or k not in sym]:
            del self.mpr_selectors[k]
        for k in [k for k, t in self.topology.items() if t.expires < now]:
            del self.topology[k]
        for k in [k for k, t in self.duplicates.items() if t < now]:
            del self.duplicates[k]
        for k in [k for k, t in self.hna_set.items() if t < now]:
            del self.hna_set[k]
        for k in [k for k, (_, t) in self.mid_set.items() if t < now]:
            del self.mid_set[k]

    # -- HELLO -----------------------------------------------------------
    def emit_hello(self, now: int) -> OlsrMessage:
        self.expire(now)
        groups: dict[tuple[LinkType, NeighType], list[HelloEntry]] = {}
        for addr in sorted(self.links):
            link = self.links[addr]
            if link.is_sym(now):
                lt = LinkType.SYM
            elif link.lost:
                lt = LinkType.LOST
            else:
                lt = LinkType.ASYM
            if addr in self.mpr_set and lt is LinkType.SYM:
                nt = NeighType.MPR_NEIGH
            elif lt is LinkType.SYM:
                nt = NeighType.SYM_NEIGH
            else:
                nt = NeighType.NOT_NEIGH
            groups.setdefault((lt, nt), []).append(HelloEntry(addr, link.lq, link.nlq))
        blocks = tuple(
            HelloBlock(lt, nt, tuple(entries))
            for (lt, nt), entries in sorted(groups.items(), key=lambda kv: (kv[0][0].value, kv[0][1].value))
        )
        self._hello_seq = (self._hello_seq + 1) & 0xFFFF
        payload = HelloPayload(self.params.willingness, self._hello_seq, blocks)
        return OlsrMessage(MsgType.HELLO, self.main_address, self._next_seq(),
                           seconds(self.params.hello_validity), payload, ttl=1)

    @staticmethod
    def _valid_hello(msg: OlsrMessage) -> bool:
        p = msg.payload
        if not isinstance(p, HelloPayload):
            return False
        for b in p.blocks:
            if not isinstance(b, HelloBlock) or not isinstance(b.link_type, LinkType):
                return False
            if not isinstance(b.neigh_type, NeighType):
                return False
            for e in b.entries:
                if not isinstance(e, HelloEntry) or not isinstance(e.address, int) or e.address < 0:
                    return False
                if not (0.0 <= e.lq <= 1.0 and 0.0 <= e.nlq <= 1.0):
                    return False
        return True

    def _record_reception(self, link: LinkTuple, hello_seq: int) -> None:
        missed = 0
        if link.last_hello_seq is not None:
            missed = ((hello_seq - link.last_hello_seq) & 0xFFFF) - 1
            missed = max(0, min(missed, link.window.maxlen or missed))
        for _ in range(missed):
            link.window.append(0)
            if self.params.use_hysteresis:
                self.links[link.neighbor_address] = link = hysteresis_update(link, LOST, self.params)
        link.window.append(1)
        link.last_hello_seq = hello_seq
        if self.params.use_hysteresis:
            self.links[link.neighbor_address] = hysteresis_update(link, RECEIVED, self.params)

    def process_hello(self, msg: OlsrMessage, arrival_iface: str, now: int) -> bool:
        """Apply a received HELLO. Returns True when routes changed."""
        if msg.msg_type is not MsgType.HELLO or not self._valid_hello(msg):
            self.counters["malformed"] += 1
            return False
        sender = msg.originator
        if sender == self.main_address:
            return False
        p: HelloPayload = msg.payload
        link = self.links.get(sender)
        if link is None:
            link = LinkTuple(arrival_iface, sender,
                             window=deque(maxlen=self.params.link_quality_win_size),
                             pending=self.params.use_hysteresis)
            self.links[sender] = link
        self._record_reception(link, p.hello_seq)
        link = self.links[sender]
        link.asym_until = max(link.asym_until, now + msg.vtime_us)

        me = self.main_address
        for b in p.blocks:
            for e in b.entries:
                if e.address != me:
                    continue
                if b.link_type is LinkType.LOST:
                    link.sym_until = now - 1
                else:
                    link.sym_until = now + msg.vtime_us
                    link.asym_until = max(link.asym_until, link.sym_until)
                link.nlq = e.lq
                if b.neigh_type is NeighType.MPR_NEIGH:
                    self.mpr_selectors[sender] = now + msg.vtime_us
                else:
                    self.mpr_selectors.pop(sender, None)

        nb = self.neighbors.setdefault(sender, NeighborTuple(sender, NeighborStatus.NOT_SYM))
        nb.willingness = p.willingness
        self._refresh_neighbors(now)

        if link.is_sym(now):
            for b in p.blocks:
                for e in b.entries:
                    if e.address == me:
                        continue
                    key = (sender, e.address)
                    if b.neigh_type in (NeighType.SYM_NEIGH, NeighType.MPR_NEIGH):
                        cost = 1.0 / (e.lq * e.nlq) if e.lq * e.nlq > 0 else math.inf
                        self.two_hop[key] = TwoHopTuple(sender, e.address, now + msg.vtime_us, cost)
                    else:
                        self.two_hop.pop(key, None)
        return self.recompute(now)

    # -- MPR -------------------------------------------------------------
    def select_mprs(self, now: int) -> set[int]:
        sym = self.sym_neighbors(now)
        sym_set = set(sym)
        will = {a: self.neighbors[a].willingness if a in self.neighbors else WILL_DEFAULT for a in sym}
        reach: dict[int, set[int]] = {a: set() for a in sym}
        strict2: set[int] = set()
        for (n, t) in self.two_hop:
            if n not in sym_set or t == self.main_address or t in sym_set:
                continue
            if will[n] == WILL_NEVER:
                continue
            reach[n].add(t)
            strict2.add(t)
        uncoverable = {t for (n, t) in self.two_hop
                       if t != self.main_address and t not in sym_set and t not in strict2}
        if uncoverable:
            self.counters["uncoverable"] += len(uncoverable)
            log.debug("%s: two-hop nodes without usable neighbor: %s", format_ip(self.main_address),
                      [format_ip(t) for t in sorted(uncoverable)])

        k = self.params.mpr_coverage
        providers = {t: {n for n in sym if t in reach[n]} for t in strict2}
        need = {t: min(k, len(providers[t])) for t in strict2}
        mpr = {n for n in sym if will[n] == WILL_ALWAYS}
        for t in sorted(strict2):
            if len(providers[t]) <= k:
                mpr |= providers[t]

        def deficit(t: int) -> int:
            return need[t] - len(providers[t] & mpr)

        while True:
            open_t = {t for t in strict2 if deficit(t) > 0}
            if not open_t:
                break
            best = min(
                (n for n in sym if n not in mpr and reach[n] & open_t),
                key=lambda n: (-will[n], -len(reach[n] & open_t), -len(reach[n]), n),
            )
            mpr.add(best)
        return mpr

    # -- TC --------------------------------------------------------------
    def _advertised_set(self, now: int) -> list[int]:
        sym = self.sym_neighbors(now)
        if self.params.tc_redundancy == 2:
            return sym
        chosen = set(self.mpr_selectors)
        if self.params.tc_redundancy == 1:
            chosen |= self.mpr_set
        return sorted(a for a in chosen if a in sym)

    def emit_tc(self, now: int) -> OlsrMessage | None:
        self.expire(now)
        adv = self._advertised_set(now)
        frozen = frozenset(adv)
        if frozen != self._advertised:
            if self._advertised is not None or frozen:
                self._ansn = (self._ansn + 1) & 0xFFFF
            self._advertised = frozen
        if not adv:
            # One empty TC after losing the last advertised neighbor.
            if self._sent_empty_tc:
                return None
            self._sent_empty_tc = True
        else:
            self._sent_empty_tc = False
        nbrs = tuple((a, self._link_cost(self.links[a])) for a in adv)
        return OlsrMessage(MsgType.TC, self.main_address, self._next_seq(),
                           seconds(self.params.tc_validity), TcPayload(self._ansn, nbrs))

    def _is_duplicate(self, msg: OlsrMessage, now: int) -> bool:
        key = (msg.originator, msg.msg_seq)
        if key in self.duplicates and self.duplicates[key] >= now:
            self.counters["duplicates"] += 1
            return True
        self.duplicates[key] = now + seconds(30.0)
        return False

    def _should_forward(self, msg: OlsrMessage, sender: int, now: int) -> bool:
        if msg.ttl <= 1:
            return False
        if sender not in self.sym_neighbors(now):
            return False
        if self.params.full_flooding:
            return True
        return self.mpr_selectors.get(sender, -1) >= now

    def process_tc(self, msg: OlsrMessage, sender: int, now: int) -> tuple[bool, bool]:
        """Apply a TC heard from neighbor ``sender``.

        Returns ``(routes_changed, forward)``; the caller rebroadcasts
        ``msg.forwarded()`` when ``forward`` is true.
        """
        if msg.msg_type is not MsgType.TC or not isinstance(msg.payload, TcPayload):
            self.counters["malformed"] += 1
            return False, False
        if msg.originator == self.main_address or self._is_duplicate(msg, now):
            return False, False
        forward = self._should_forward(msg, sender, now)
        if sender not in self.sym_neighbors(now):
            return False, forward
        p: TcPayload = msg.payload
        orig = msg.originator
        last = self.latest_ansn.get(orig)
        if last is not None and _wrap_newer(last, p.ansn):
            self.counters["stale_tc"] += 1
            return False, forward
        self.latest_ansn[orig] = p.ansn
        for key in [k for k, t in self.topology.items() if t.last_hop == orig and t.ansn != p.ansn]:
            del self.topology[key]
        for dest, cost in p.neighbors:
            self.topology[(dest, orig)] = TopologyTuple(dest, orig, p.ansn, now + msg.vtime_us, cost)
        return self.recompute(now), forward

    # -- MID / HNA -------------------------------------------------------
    def emit_mid(self, now: int) -> OlsrMessage | None:
        if not self.params.emit_mid or not self.extra_addresses:
            return None
        return OlsrMessage(MsgType.MID, self.main_address, self._next_seq(),
                           seconds(self.params.mid_validity), MidPayload(self.extra_addresses))

    def emit_hna(self, now: int) -> OlsrMessage | None:
        if not self.hna_networks:
            return None
        return OlsrMessage(MsgType.HNA, self.main_address, self._next_seq(),
                           seconds(self.params.hna_validity), HnaPayload(self.hna_networks))

    def process_flooded(self, msg: OlsrMessage, sender: int, now: int) -> tuple[bool, bool]:
        """MID and HNA share the default flooding rule."""
        if msg.originator == self.main_address or self._is_duplicate(msg, now):
            return False, False
        forward = self._should_forward(msg, sender, now)
        if sender not in self.sym_neighbors(now):
            return False, forward
        expiry = now + msg.vtime_us
        if msg.msg_type is MsgType.MID and isinstance(msg.payload, MidPayload):
            for a in msg.payload.addresses:
                self.mid_set[a] = (msg.originator, expiry)
        elif msg.msg_type is MsgType.HNA and isinstance(msg.payload, HnaPayload):
            for net, mask in msg.payload.networks:
                self.hna_set[(net, mask, msg.originator)] = expiry
        else:
            self.counters["malformed"] += 1
            return False, False
        return self.recompute(now), forward

    # -- routing ---------------------------------------------------------
    def edges(self, now: int) -> dict[int, dict[int, float]]:
        """Weighted directed graph known to this node."""
        lq = self.params.link_quality_level == 2
        g: dict[int, dict[int, float]] = {self.main_address: {}}

        def add(u: int, v: int, w: float) -> None:
            if u == v or math.isinf(w):
                return
            w = w if lq else 1.0
            cur = g.setdefault(u, {}).get(v)
            if cur is None or w < cur:
                g[u][v] = w

        sym = self.sym_neighbors(now)
        for a in sym:
            add(self.main_address, a, self.links[a].etx)
        for (n, t), tup in self.two_hop.items():
            if n in sym:
                add(n, t, tup.etx)
        for (dest, last), tup in self.topology.items():
            add(last, dest, tup.etx)
        return g

    def compute_routes(self, now: int) -> RouteTable:
        g = self.edges(now)
        src = self.main_address
        best: dict[int, tuple[float, int, int]] = {}
        heap: list[tuple[float, int, int, int]] = []
        for v, w in g.get(src, {}).items():
            heapq.heappush(heap, (w, v, v, 1))
        done: set[int] = {src}
        while heap:
            cost, nh, u, hops = heapq.heappop(heap)
            if u in done:
                continue
            done.add(u)
            best[u] = (cost, nh, hops)
            for v, w in g.get(u, {}).items():
                if v not in done:
                    heapq.heappush(heap, (cost + w, nh, v, hops + 1))
        routes: RouteTable = {
            d: RouteEntry(d, nh, hops, self.interface, cost) for d, (cost, nh, hops) in best.items()
        }
        hna_best: dict[tuple[int, int], tuple[float, int]] = {}
        for (net, mask, gw) in sorted(self.hna_set):
            if gw not in routes:
                continue
            cand = (routes[gw].metric, gw)
            if (net, mask) not in hna_best or cand < hna_best[(net, mask)]:
                hna_best[(net, mask)] = cand
        for (net, mask), (_, gw) in sorted(hna_best.items()):
            if net in routes:
                continue
            r = routes[gw]
            routes[net] = RouteEntry(net, r.next_hop, r.hop_count, self.interface, r.metric, mask)
        return routes

    def recompute(self, now: int) -> bool:
        self.expire(now)
        self.mpr_set = self.select_mprs(now)
        new = self.compute_routes(now)
        changed = new != self.routes
        self.routes = new
        return changed


def remap_routes(
    routes: Mapping[int, RouteEntry],
    mapping: Mapping[int, int],
    interface_map: Mapping[str, str] | None = None,
    dropped: list[RouteEntry] | None = None,
) -> RouteTable:
    """Rewrite signaling addresses and interfaces to their bond counterparts.

    Addresses already in the image of ``mapping`` are left alone, which makes
    the function idempotent. HNA destinations are kept verbatim. Entries that
    reference an unmapped address are dropped and appended to ``dropped``.
    """
    interface_map = {"wlan0": "bond0"} if interface_map is None else interface_map
    image = set(mapping.values())

    def conv(a: int) -> int | None:
        if a in mapping:
            return mapping[a]
        return a if a in image else None

    out: RouteTable = {}
    for key in sorted(routes):
        r = routes[key]
        nh = conv(r.next_hop)
        dst = r.destination if r.netmask is not None else conv(r.destination)
        if nh is None or dst is None:
            log.warning("dropping route to %s via %s: no bond address", format_ip(r.destination),
                        format_ip(r.next_hop))
            if dropped is not None:
                dropped.append(r)
            continue
        iface = interface_map.get(r.egress_interface, r.egress_interface)
        out[dst] = replace(r, destination=dst, next_hop=nh, egress_interface=iface)
    return out
