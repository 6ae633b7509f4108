"""Built-in reproductions of the measured testbed tables.

Each table maps to one or more :class:`Check` rows. A check runs a scenario,
takes one flow metric and compares it with the measured mean. Scenario tables
compare absolute values; sweep tables compare values normalized by the
series reference (the widest channel pair, or the 30 cm antenna spacing).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable, Sequence

from .core import Band, Channel, TopologySpec, chain_spec, grid_like_spec
from .radio import Protocol, RadioParams
from .sim import Flow, RunStats, Scenario, run

UDP_TOLERANCE_PCT = 6.0
TCP_TOLERANCE_PCT = 8.0
LATENCY_TOLERANCE_PCT = 10.0

FLOW_START_S = 30.0
FLOW_DURATION_S = 30.0
HORIZON_S = 65.0

B5_A, B5_B = 36, 64
B24_A, B24_B = 1, 11


def chain_scenario(
    name: str,
    band: Band,
    link_channels: Sequence[int],
    protocol: Protocol = Protocol.UDP,
    antenna_cm: float = 30.0,
    stack: str = "full",
    offered_mbps: float | None = None,
    reps: int = 1,
) -> Scenario:
    """Chain with one link per entry of ``link_channels``.

    Every node carries one radio per distinct channel; the second radio sits
    ``antenna_cm`` away from the first on the node's antenna axis.
    """
    distinct = sorted(set(link_channels))
    n = len(link_channels) + 1
    chans = [Channel(band, c) for c in distinct]
    spec = chain_spec(n, chans, antenna_positions=[k * antenna_cm for k in range(len(chans))])
    pinned = {(i, i + 1): c for i, c in enumerate(link_channels)}
    flow = Flow(0, n - 1, protocol, FLOW_START_S, FLOW_DURATION_S, offered_mbps)
    return Scenario(name, band, spec, [flow], link_channels=pinned, stack=stack,
                    horizon_s=HORIZON_S, reps=reps)


def square_scenario(name: str, band: Band, a: int, b: int, path: Sequence[int],
                    protocol: Protocol = Protocol.UDP) -> Scenario:
    """Four nodes on a square, 0-1-2-3-0, talking across the diagonal 0 -> 2."""
    links = [(0, 1), (1, 2), (2, 3), (0, 3)]
    positions = [(0.0, 0.0), (2.0, 0.0), (2.0, 2.0), (0.0, 2.0)]
    spec = grid_like_spec(4, links, [Channel(band, a), Channel(band, b)], positions=positions)
    pinned = {(0, 1): a, (1, 2): b, (2, 3): a, (0, 3): b}
    flow = Flow(0, 2, protocol, FLOW_START_S, FLOW_DURATION_S, path=tuple(path))
    return Scenario(name, band, spec, [flow], link_channels=pinned, horizon_s=HORIZON_S)


@lru_cache(maxsize=None)
def _cached_run(key: tuple) -> RunStats:
    return run(_BUILDERS[key[0]](*key[1:]))


_BUILDERS: dict[str, Callable[..., Scenario]] = {}


def _builder(fn: Callable[..., Scenario]) -> Callable[..., Scenario]:
    _BUILDERS[fn.__name__] = fn
    return fn


@_builder
def chain(band_value: str, channels: tuple[int, ...], proto: str, antenna_cm: float = 30.0,
          stack: str = "full", offered: float | None = None) -> Scenario:
    band = Band(band_value)
    label = "-".join(map(str, channels))
    return chain_scenario(f"chain{len(channels) + 1}_{band_value}_{label}_{proto}", band, channels,
                          Protocol(proto), antenna_cm, stack, offered)


@_builder
def square(band_value: str, a: int, b: int, path: tuple[int, ...], proto: str) -> Scenario:
    return square_scenario(f"square_{band_value}_{'-'.join(map(str, path))}_{proto}", Band(band_value),
                           a, b, path, Protocol(proto))


@dataclass(frozen=True)
class Check:
    label: str
    key: tuple
    measured: float
    tolerance_pct: float
    metric: str = "mbps"  # or "latency_ms"
    ref_key: tuple | None = None
    ref_measured: float | None = None

    def build(self) -> Scenario:
        return _BUILDERS[self.key[0]](*self.key[1:])

    def _value(self, key: tuple) -> float:
        stats = _cached_run(key)
        return getattr(stats.flows[0], self.metric)

    def evaluate(self, tolerance_pct: float | None = None) -> "CheckResult":
        tol = self.tolerance_pct if tolerance_pct is None else tolerance_pct
        model = self._value(self.key)
        measured = self.measured
        if self.ref_key is not None:
            model = model / self._value(self.ref_key)
            measured = measured / self.ref_measured
        err = abs(model - measured) / abs(measured) * 100.0
        return CheckResult(self, model, measured, err, err <= tol + 1e-9, tol)


@dataclass(frozen=True)
class CheckResult:
    check: Check
    model: float
    measured: float
    error_pct: float
    passed: bool
    tolerance_pct: float

    def line(self) -> str:
        kind = "ratio" if self.check.ref_key is not None else self.check.metric
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{verdict} {self.check.label:<34} {kind:<10} model={self.model:8.4f} "
                f"measured={self.measured:8.4f} err={self.error_pct:5.2f}% tol={self.tolerance_pct:g}%")


@dataclass(frozen=True)
class Table:
    table_id: str
    title: str
    checks: tuple[Check, ...] = field(default_factory=tuple)


def _tol(proto: str) -> float:
    return UDP_TOLERANCE_PCT if proto == "udp" else TCP_TOLERANCE_PCT


def _pair_checks(label: str, key_of: Callable[[str], tuple], tcp: float, udp: float,
                 udp_tol: float | None = None) -> tuple[Check, ...]:
    return (
        Check(f"{label} tcp", key_of("tcp"), tcp, _tol("tcp")),
        Check(f"{label} udp", key_of("udp"), udp, udp_tol or _tol("udp")),
    )


def _tables() -> dict[str, Table]:
    t: dict[str, Table] = {}

    def add(tid: str, title: str, checks: Sequence[Check]) -> None:
        t[tid] = Table(tid, title, tuple(checks))

    # Latency with and without the routing/bonding stack, 3-station chain, ping-like load.
    lat = []
    for stack, measured in (("bare", 1.80), ("routing_bonding", 2.08), ("full", 2.95)):
        lat.append(Check(f"latency {stack}", ("chain", "b5", (B5_A, B5_B), "udp", 30.0, stack, 0.1),
                         measured, LATENCY_TOLERANCE_PCT, metric="latency_ms"))
    add("6.1", "packet latency per stack", lat)

    single = {
        "b5": {2: (8.82, 9.93), 3: (4.39, 5.01), 4: (2.90, 3.25), 5: (2.18, 2.43)},
        "b24": {2: (6.35, 7.37), 3: (3.22, 3.71), 4: (2.10, 2.56), 5: (1.61, 1.93)},
    }
    ids = {"b5": ("6.2", "6.3", "6.4", "6.5"), "b24": ("6.6", "6.7", "6.8", "6.9")}
    for band, rows in single.items():
        ch = B5_A if band == "b5" else B24_A
        for tid, (n, (tcp, udp)) in zip(ids[band], rows.items()):
            chans = (ch,) * (n - 1)
            add(tid, f"{n} stations, one channel, {band}",
                _pair_checks(f"{band} n={n} 1ch", lambda p, c=chans, b=band: ("chain", b, c, p), tcp, udp))

    two = {
        "b5": (B5_A, B5_B, {
            "6.10": ("3 stations", (0, 1), 8.32, 9.88),
            "6.11": ("4 stations case I", (0, 1, 0), 4.37, 4.87),
            "6.12": ("4 stations case II", (0, 1, 1), 4.44, 4.81),
            "6.13": ("5 stations", (0, 1, 0, 1), 4.42, 5.02),
        }, {"6.14": ((0, 1, 2), 8.17, 9.68), "6.15": ((0, 3, 2), 8.08, 9.90)}),
        "b24": (B24_A, B24_B, {
            "6.16": ("3 stations", (0, 1), 5.17, 6.63),
            "6.17": ("4 stations case I", (0, 1, 0), 3.00, 3.80),
            "6.18": ("4 stations case II", (0, 1, 1), 3.05, 3.75),
            "6.19": ("5 stations", (0, 1, 0, 1), 2.77, 3.37),
        }, {"6.20": ((0, 1, 2), 3.26, 5.11), "6.21": ((0, 3, 2), 4.02, 5.11)}),
    }
    for band, (a, b, chains, squares) in two.items():
        for tid, (title, pattern, tcp, udp) in chains.items():
            chans = tuple((a, b)[k] for k in pattern)
            udp_tol = 3.0 if tid == "6.10" else None
            add(tid, f"{title}, two channels, {band}",
                _pair_checks(f"{band} {title} 2ch", lambda p, c=chans, bb=band: ("chain", bb, c, p),
                             tcp, udp, udp_tol))
        for k, (tid, (path, tcp, udp)) in enumerate(squares.items(), start=1):
            add(tid, f"square, two channels, path {k}, {band}",
                _pair_checks(f"{band} square path {k}", lambda p, pa=path, bb=band: ("square", bb, a, b, pa, p),
                             tcp, udp))

    # Orthogonality sweeps; values normalized by the widest pair of the series.
    b5_sweep = {"6.22": (40, 4.35, 4.97), "6.23": (44, 5.67, 6.59), "6.24": (48, 6.12, 6.82),
                "6.25": (52, 6.63, 8.17), "6.26": (56, 7.24, 9.45), "6.27": (60, 8.17, 9.76)}
    b24_sweep = {"6.28": (2, 3.03, 3.55), "6.29": (3, 2.58, 3.42), "6.30": (4, 2.73, 3.47),
                 "6.31": (5, 3.41, 5.18), "6.32": (6, 5.53, 6.85)}
    for band, base, sweep, ref_id in (("b5", 36, b5_sweep, "6.27"), ("b24", 1, b24_sweep, "6.32")):
        ref_ch, ref_tcp, ref_udp = sweep[ref_id]
        for tid, (other, tcp, udp) in sweep.items():
            checks = []
            for proto, measured, ref_measured in (("tcp", tcp, ref_tcp), ("udp", udp, ref_udp)):
                checks.append(Check(
                    f"{band} ({base},{other}) {proto}", ("chain", band, (base, other), proto), measured,
                    _tol(proto), ref_key=("chain", band, (base, ref_ch), proto), ref_measured=ref_measured))
            add(tid, f"channels {base} and {other}", checks)

    # Antenna separation at the relay; normalized by the 30 cm column.
    distances = (0, 5, 10, 15, 20, 25, 30)
    coupling = {
        "6.33": (11, "tcp", (2.31, 2.95, 3.36, 3.47, 4.60, 5.44, 5.59)),
        "6.34": (11, "udp", (2.87, 3.54, 4.01, 4.20, 5.74, 6.42, 6.79)),
        "6.35": (6, "tcp", (2.58, 2.63, 3.58, 3.64, 3.84, 5.04, 5.25)),
        "6.36": (6, "udp", (3.11, 3.12, 4.06, 4.16, 4.41, 6.89, 6.97)),
    }
    for tid, (other, proto, values) in coupling.items():
        ref_key = ("chain", "b24", (1, other), proto, 30.0)
        checks = [
            Check(f"b24 (1,{other}) {d}cm {proto}", ("chain", "b24", (1, other), proto, float(d)), v,
                  _tol(proto), ref_key=ref_key, ref_measured=values[-1])
            for d, v in zip(distances[:-1], values[:-1])
        ]
        add(tid, f"antenna separation, channels 1 and {other}, {proto}", checks)
    return t


TABLES: dict[str, Table] = _tables()


def table_ids() -> list[str]:
    return sorted(TABLES, key=lambda s: tuple(int(x) for x in s.split(".")))


def scenario_tables() -> list[str]:
    return [tid for tid in table_ids() if int(tid.split(".")[1]) <= 21]


def builtin_scenarios() -> list[Scenario]:
    """One scenario per distinct check key, in table order."""
    seen, out = set(), []
    for tid in table_ids():
        for c in TABLES[tid].checks:
            for key in (c.key, c.ref_key):
                if key is not None and key not in seen:
                    seen.add(key)
                    out.append(_BUILDERS[key[0]](*key[1:]))
    return out


def sweep_orthogonality(band: Band, protocol: Protocol = Protocol.UDP,
                        radio: RadioParams | None = None) -> list[tuple[int, int, float]]:
    """``(other channel, separation MHz, Mbps)`` for a 3-station chain with one link fixed."""
    base = 36 if band is Band.B5 else 1
    others = (36, 40, 44, 48, 52, 56, 60) if band is Band.B5 else tuple(range(1, 7))
    out = []
    for other in others:
        chans = (base, other)
        sc = chain_scenario(f"ortho_{band.value}_{other}", band, chans, protocol)
        if radio is not None:
            sc = replace(sc, radio=radio)
        sep = abs(Channel(band, other).center_frequency - Channel(band, base).center_frequency)
        out.append((other, sep, run(sc).flows[0].mbps))
    return out


def sweep_coupling(band: Band, protocol: Protocol = Protocol.TCP, other: int | None = None,
                   distances: Sequence[float] = (0, 5, 10, 15, 20, 25, 30),
                   radio: RadioParams | None = None) -> list[tuple[float, float, float]]:
    """``(distance cm, Mbps, ratio to the largest distance)`` at the relay of a 2-channel chain."""
    if band is Band.B24:
        pair = (1, other or 11)
    else:
        pair = (36, other or 64)
    vals = []
    for d in distances:
        sc = chain_scenario(f"coupling_{band.value}_{d:g}", band, pair, protocol, antenna_cm=float(d))
        if radio is not None:
            sc = replace(sc, radio=radio)
        vals.append((float(d), run(sc).flows[0].mbps))
    ref = vals[-1][1]
    return [(d, v, v / ref if ref > 0 else 0.0) for d, v in vals]
