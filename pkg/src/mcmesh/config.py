"""YAML scenario files.

Every error carries the line of the offending node, e.g.
``chain.yaml:14: flows[0].protocol: unknown protocol 'sctp'``.

Schema (all sections but ``topology`` optional)::

    name: chain3_2ch
    band: b5                      # b24 | b5
    topology:
      chain: {n: 3, channels: [36, 60], antenna_cm: [0, 30]}
      # or an explicit node list:
      # signaling: 6              # signaling channel (2.4 GHz), default 6
      # nodes:
      #   - {id: 0, position: [0, 0], interfaces:
      #       [{name: ath0, channel: 36, antenna_cm: 0}]}
      links:                      # required with ``nodes``; optional with ``chain``
        - [0, 1]
        - {a: 1, b: 2, channel: 60, loss: 0.1}
      interference: all           # or a list of node pairs
    radio: {hop_latency_ms: 0.9, coupling_curve: {0: 0.41, 30: 1.0}, ...}
    olsr: {HelloInterval: 2.0, MprCoverage: 1, LinkQualityLevel: 2, ...}
    negotiation: {enabled: true, allowed_channels: [1, 11], round_period_s: 10, start_s: 5}
    flows:
      - {src: 0, dst: 2, protocol: udp, start: 30, duration: 30, load: saturate, path: [0, 1, 2]}
    interferers:
      - {time_on: 20, time_off: 60, channel: 1, level_dbm: -30, nodes: [0, 1]}
    random_interferers: {count: 3, channels: [1, 6, 11], level_dbm: [-60, -30], duration: [5, 20]}
    events:
      - {time: 45, link: [1, 2], state: down}
    hna:
      - {node: 0, network: 192.168.10.0, netmask: 255.255.255.0}
    run: {seed: 1, horizon: 70, reps: 10, stack: full}
"""

from __future__ import annotations

import ipaddress
from pathlib import Path
from typing import Any

import yaml

from .core import Band, Channel, InterfaceSpec, NodeSpec, Role, TopologyError, TopologySpec, chain_spec
from .negotiation import Interferer, NegotiationError, NegotiationParams
from .olsr import OlsrParams
from .radio import Curve, Protocol, RadioParams
from .sim import Flow, LinkEvent, RandomInterferers, Scenario, ScenarioError


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None, source: str = "<config>"):
        self.line = line
        self.source = source
        where = f"{source}:{line}" if line is not None else source
        super().__init__(f"{where}: {message}")


class LDict(dict):
    line: int = 0
    key_lines: dict


class LList(list):
    line: int = 0
    item_lines: list


def _convert(loader: yaml.SafeLoader, node: yaml.Node) -> Any:
    line = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        out = LDict()
        out.line, out.key_lines = line, {}
        for k, v in node.value:
            key = loader.construct_object(k, deep=True)
            out[key] = _convert(loader, v)
            out.key_lines[key] = v.start_mark.line + 1
        return out
    if isinstance(node, yaml.SequenceNode):
        out = LList(_convert(loader, v) for v in node.value)
        out.line, out.item_lines = line, [v.start_mark.line + 1 for v in node.value]
        return out
    return loader.construct_object(node, deep=True)


def load_yaml(text: str, source: str = "<config>") -> Any:
    loader = yaml.SafeLoader(text)
    try:
        node = loader.get_single_node()
        if node is None:
            raise ConfigError("empty document", None, source)
        return _convert(loader, node)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        raise ConfigError(f"YAML syntax error: {getattr(exc, 'problem', exc)}",
                          mark.line + 1 if mark else None, source) from None
    finally:
        loader.dispose()


class _Reader:
    """Typed accessors that raise line-precise errors."""

    def __init__(self, source: str):
        self.source = source

    def fail(self, msg: str, line: int | None) -> ConfigError:
        return ConfigError(msg, line, self.source)

    def line_of(self, parent: Any, key: Any) -> int | None:
        if isinstance(parent, LDict):
            return parent.key_lines.get(key, parent.line)
        if isinstance(parent, LList) and isinstance(key, int) and key < len(parent.item_lines):
            return parent.item_lines[key]
        return getattr(parent, "line", None)

    def mapping(self, parent: Any, key: Any, path: str, required: bool = False) -> LDict:
        val = parent.get(key) if isinstance(parent, dict) else None
        if val is None:
            if required:
                raise self.fail(f"{path}: missing required section", getattr(parent, "line", None))
            d = LDict()
            d.line, d.key_lines = getattr(parent, "line", 0), {}
            return d
        if not isinstance(val, dict):
            raise self.fail(f"{path}: expected a mapping", self.line_of(parent, key))
        return val

    def seq(self, parent: Any, key: Any, path: str) -> LList:
        val = parent.get(key)
        if val is None:
            out = LList()
            out.line, out.item_lines = getattr(parent, "line", 0), []
            return out
        if not isinstance(val, list):
            raise self.fail(f"{path}: expected a list", self.line_of(parent, key))
        return val

    def number(self, parent: Any, key: Any, path: str, default: Any = None, integer: bool = False,
               minimum: float | None = None) -> Any:
        val = parent.get(key, default) if isinstance(parent, dict) else parent[key]
        line = self.line_of(parent, key)
        if val is None:
            raise self.fail(f"{path}: missing required value", line)
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise self.fail(f"{path}: expected a number, got {val!r}", line)
        if integer and not float(val).is_integer():
            raise self.fail(f"{path}: expected an integer, got {val!r}", line)
        if minimum is not None and val < minimum:
            raise self.fail(f"{path}: must be >= {minimum}", line)
        return int(val) if integer else float(val)

    def check_keys(self, d: LDict, allowed: set[str], path: str) -> None:
        for k in d:
            if k not in allowed:
                raise self.fail(f"{path}: unknown key {k!r}", self.line_of(d, k))


def _channel(r: _Reader, band: Band, value: Any, path: str, line: int | None) -> Channel:
    try:
        if isinstance(value, str) and ":" in value:
            b, idx = value.split(":", 1)
            return Channel(Band.parse(b), int(idx))
        if isinstance(value, bool) or not isinstance(value, int):
            raise TopologyError(f"bad channel {value!r}")
        return Channel(band, value)
    except (TopologyError, ValueError) as exc:
        raise r.fail(f"{path}: {exc}", line) from None


def _pair(r: _Reader, parent: Any, idx: Any, path: str) -> tuple[int, int]:
    val = parent[idx]
    line = r.line_of(parent, idx)
    if not (isinstance(val, list) and len(val) == 2 and all(isinstance(x, int) and not isinstance(x, bool) for x in val)):
        raise r.fail(f"{path}: expected a pair of node ids", line)
    return int(val[0]), int(val[1])


def _address(r: _Reader, value: Any, path: str, line: int | None) -> int:
    try:
        return int(ipaddress.IPv4Address(str(value)))
    except ValueError:
        raise r.fail(f"{path}: bad IPv4 address {value!r}", line) from None


def _topology(r: _Reader, doc: LDict, band: Band):
    t = r.mapping(doc, "topology", "topology", required=True)
    r.check_keys(t, {"chain", "nodes", "links", "interference", "signaling"}, "topology")
    sig_line = r.line_of(t, "signaling")
    signaling = _channel(r, Band.B24, t.get("signaling", 6), "topology.signaling", sig_line)
    link_channels: dict[tuple[int, int], int] = {}
    link_loss: dict[tuple[int, int], float] = {}
    links: list[tuple[int, int]] = []
    raw_links = r.seq(t, "links", "topology.links")
    for i, item in enumerate(raw_links):
        path = f"topology.links[{i}]"
        if isinstance(item, dict):
            r.check_keys(item, {"a", "b", "channel", "loss"}, path)
            a = r.number(item, "a", f"{path}.a", integer=True)
            b = r.number(item, "b", f"{path}.b", integer=True)
            if "channel" in item:
                ch = _channel(r, band, item["channel"], f"{path}.channel", r.line_of(item, "channel"))
                link_channels[(a, b)] = ch.index
            if "loss" in item:
                p = r.number(item, "loss", f"{path}.loss")
                if not 0.0 <= p <= 1.0:
                    raise r.fail(f"{path}.loss: must lie in [0, 1]", r.line_of(item, "loss"))
                link_loss[(min(a, b), max(a, b))] = p
        else:
            a, b = _pair(r, raw_links, i, path)
        links.append((a, b))

    if ("chain" in t) == ("nodes" in t):
        raise r.fail("topology: give exactly one of 'chain' or 'nodes'", t.line)
    if "chain" in t:
        c = r.mapping(t, "chain", "topology.chain")
        r.check_keys(c, {"n", "channels", "antenna_cm", "rate_mbps", "spacing_m"}, "topology.chain")
        n = r.number(c, "n", "topology.chain.n", integer=True, minimum=2)
        chans_raw = r.seq(c, "channels", "topology.chain.channels")
        if not chans_raw:
            raise r.fail("topology.chain.channels: at least one data channel required", c.line)
        chans = [_channel(r, band, v, f"topology.chain.channels[{i}]", r.line_of(chans_raw, i))
                 for i, v in enumerate(chans_raw)]
        ant = None
        if "antenna_cm" in c:
            ant_raw = r.seq(c, "antenna_cm", "topology.chain.antenna_cm")
            ant = [r.number(ant_raw, i, f"topology.chain.antenna_cm[{i}]") for i in range(len(ant_raw))]
            if len(ant) != len(chans):
                raise r.fail("topology.chain.antenna_cm: one position per data channel", ant_raw.line)
        spec = chain_spec(n, chans, signaling=signaling, antenna_positions=ant,
                          rate_mbps=r.number(c, "rate_mbps", "topology.chain.rate_mbps", 12.0),
                          spacing_m=r.number(c, "spacing_m", "topology.chain.spacing_m", 2.0))
        if links:
            spec = TopologySpec(spec.nodes, tuple(links))
    else:
        nodes = []
        raw_nodes = r.seq(t, "nodes", "topology.nodes")
        for i, nd in enumerate(raw_nodes):
            path = f"topology.nodes[{i}]"
            if not isinstance(nd, dict):
                raise r.fail(f"{path}: expected a mapping", r.line_of(raw_nodes, i))
            r.check_keys(nd, {"id", "position", "interfaces"}, path)
            nid = r.number(nd, "id", f"{path}.id", integer=True, minimum=0)
            pos = (0.0, 0.0)
            if "position" in nd:
                p = r.seq(nd, "position", f"{path}.position")
                if len(p) != 2:
                    raise r.fail(f"{path}.position: expected [x, y]", p.line)
                pos = (r.number(p, 0, f"{path}.position[0]"), r.number(p, 1, f"{path}.position[1]"))
            ifaces = [InterfaceSpec("wlan0", Role.SIGNALING, signaling)]
            raw_if = r.seq(nd, "interfaces", f"{path}.interfaces")
            for k, itf in enumerate(raw_if):
                ip = f"{path}.interfaces[{k}]"
                if not isinstance(itf, dict):
                    raise r.fail(f"{ip}: expected a mapping", r.line_of(raw_if, k))
                r.check_keys(itf, {"name", "channel", "antenna_cm", "rate_mbps"}, ip)
                ch = _channel(r, band, itf.get("channel"), f"{ip}.channel", r.line_of(itf, "channel"))
                ifaces.append(InterfaceSpec(
                    str(itf.get("name", f"ath{k}")), Role.DATA, ch,
                    r.number(itf, "rate_mbps", f"{ip}.rate_mbps", 12.0),
                    r.number(itf, "antenna_cm", f"{ip}.antenna_cm", 30.0 * k),
                ))
            nodes.append(NodeSpec(nid, tuple(ifaces), pos))
        spec = TopologySpec(tuple(nodes), tuple(links))
    inter = t.get("interference", "all")
    if inter != "all":
        il = r.seq(t, "interference", "topology.interference")
        pairs = tuple(_pair(r, il, i, f"topology.interference[{i}]") for i in range(len(il)))
        spec = TopologySpec(spec.nodes, spec.links, pairs)
    return spec, link_channels, link_loss


def _curve(r: _Reader, d: Any, path: str, line: int | None, monotone: bool = False) -> Curve:
    if not isinstance(d, dict) or not d:
        raise r.fail(f"{path}: expected a non-empty mapping x: multiplier", line)
    try:
        return Curve(((float(k), float(v)) for k, v in d.items()), monotone=monotone)
    except (TypeError, ValueError) as exc:
        raise r.fail(f"{path}: {exc}", line) from None


def _radio(r: _Reader, doc: LDict) -> RadioParams:
    d = r.mapping(doc, "radio", "radio")
    scalars = {"per_packet_overhead_ms", "partial_stack_overhead_ms", "hop_latency_ms"}
    r.check_keys(d, scalars | {"orthogonality_threshold_mhz", "adjacent_curve", "coupling_curve", "baselines"}, "radio")
    params = RadioParams()
    for k in scalars & set(d):
        setattr(params, k, r.number(d, k, f"radio.{k}", minimum=0))
    if "orthogonality_threshold_mhz" in d:
        m = r.mapping(d, "orthogonality_threshold_mhz", "radio.orthogonality_threshold_mhz")
        for b in m:
            params.orthogonality_threshold_mhz[_band(r, b, r.line_of(m, b))] = r.number(
                m, b, f"radio.orthogonality_threshold_mhz.{b}", minimum=0)
    if "adjacent_curve" in d:
        m = r.mapping(d, "adjacent_curve", "radio.adjacent_curve")
        for b in m:
            params.adjacent_degradation[_band(r, b, r.line_of(m, b))] = _curve(
                r, m[b], f"radio.adjacent_curve.{b}", r.line_of(m, b))
    if "coupling_curve" in d:
        params.coupling = _curve(r, d["coupling_curve"], "radio.coupling_curve",
                                 r.line_of(d, "coupling_curve"), monotone=True)
    if "baselines" in d:
        m = r.mapping(d, "baselines", "radio.baselines")
        for b in m:
            band = _band(r, b, r.line_of(m, b))
            per = r.mapping(m, b, f"radio.baselines.{b}")
            for proto in per:
                try:
                    p = Protocol.parse(proto)
                except ValueError as exc:
                    raise r.fail(f"radio.baselines.{b}: {exc}", r.line_of(per, proto)) from None
                params.baselines[(band, p)] = r.number(per, proto, f"radio.baselines.{b}.{proto}", minimum=0)
    return params


def _band(r: _Reader, value: Any, line: int | None) -> Band:
    try:
        return Band.parse(value)
    except TopologyError as exc:
        raise r.fail(str(exc), line) from None


def _flows(r: _Reader, doc: LDict) -> list[Flow]:
    out = []
    raw = r.seq(doc, "flows", "flows")
    for i, f in enumerate(raw):
        path = f"flows[{i}]"
        if not isinstance(f, dict):
            raise r.fail(f"{path}: expected a mapping", r.line_of(raw, i))
        r.check_keys(f, {"src", "dst", "protocol", "start", "duration", "load", "path", "name"}, path)
        try:
            proto = Protocol.parse(f.get("protocol", "udp"))
        except ValueError as exc:
            raise r.fail(f"{path}.protocol: {exc}", r.line_of(f, "protocol")) from None
        load = f.get("load", "saturate")
        offered = None
        if load != "saturate":
            offered = r.number(f, "load", f"{path}.load")
        fpath = None
        if "path" in f:
            p = r.seq(f, "path", f"{path}.path")
            fpath = tuple(r.number(p, k, f"{path}.path[{k}]", integer=True) for k in range(len(p)))
        try:
            out.append(Flow(
                r.number(f, "src", f"{path}.src", integer=True),
                r.number(f, "dst", f"{path}.dst", integer=True),
                proto,
                r.number(f, "start", f"{path}.start", 30.0, minimum=0),
                r.number(f, "duration", f"{path}.duration", 30.0),
                offered,
                fpath,
                str(f.get("name", "")),
            ))
        except ScenarioError as exc:
            raise r.fail(f"{path}: {exc}", r.line_of(raw, i)) from None
    return out


def parse_scenario(text: str, source: str = "<config>") -> Scenario:
    doc = load_yaml(text, source)
    r = _Reader(source)
    if not isinstance(doc, LDict):
        raise r.fail("top level must be a mapping", 1)
    r.check_keys(doc, {"name", "band", "topology", "radio", "olsr", "negotiation", "flows",
                       "interferers", "random_interferers", "events", "hna", "run"}, "top level")
    band = _band(r, doc.get("band", "b5"), r.line_of(doc, "band"))
    spec, link_channels, link_loss = _topology(r, doc, band)
    radio = _radio(r, doc)

    olsr_d = r.mapping(doc, "olsr", "olsr")
    try:
        olsr = OlsrParams.from_config(dict(olsr_d))
    except (TypeError, ValueError) as exc:
        raise r.fail(f"olsr: {exc}", olsr_d.line) from None

    neg = None
    nd = r.mapping(doc, "negotiation", "negotiation")
    r.check_keys(nd, {"enabled", "allowed_channels", "window_halfwidth", "switch_threshold_dbm",
                      "refresh_weight", "round_period_s", "separacio", "timeout_s", "start_s"}, "negotiation")
    neg_start = 5.0
    if nd.get("enabled", False):
        kwargs = {k: v for k, v in nd.items() if k not in ("enabled", "start_s")}
        if "allowed_channels" in kwargs:
            kwargs["allowed_channels"] = tuple(kwargs["allowed_channels"])
        else:
            kwargs["allowed_channels"] = ()
        try:
            neg = NegotiationParams(**kwargs)
        except (TypeError, NegotiationError) as exc:
            raise r.fail(f"negotiation: {exc}", nd.line) from None
        neg_start = r.number(nd, "start_s", "negotiation.start_s", 5.0, minimum=0)

    interferers = []
    raw_i = r.seq(doc, "interferers", "interferers")
    for i, it in enumerate(raw_i):
        path = f"interferers[{i}]"
        if not isinstance(it, dict):
            raise r.fail(f"{path}: expected a mapping", r.line_of(raw_i, i))
        r.check_keys(it, {"time_on", "time_off", "channel", "level_dbm", "nodes"}, path)
        ch = _channel(r, band, it.get("channel"), f"{path}.channel", r.line_of(it, "channel"))
        level = r.number(it, "level_dbm", f"{path}.level_dbm")
        if not -100.0 <= level <= 0.0:
            raise r.fail(f"{path}.level_dbm: must lie in [-100, 0]", r.line_of(it, "level_dbm"))
        nodes = None
        if "nodes" in it:
            ns = r.seq(it, "nodes", f"{path}.nodes")
            nodes = frozenset(r.number(ns, k, f"{path}.nodes[{k}]", integer=True) for k in range(len(ns)))
        interferers.append(Interferer(r.number(it, "time_on", f"{path}.time_on", 0.0),
                                      r.number(it, "time_off", f"{path}.time_off", 1e9),
                                      ch.index, level, ch.band, nodes))

    rnd = None
    if "random_interferers" in doc:
        rd = r.mapping(doc, "random_interferers", "random_interferers")
        r.check_keys(rd, {"count", "channels", "level_dbm", "duration"}, "random_interferers")
        chans = r.seq(rd, "channels", "random_interferers.channels")
        if not chans:
            raise r.fail("random_interferers.channels: at least one channel", rd.line)
        idx = tuple(_channel(r, band, c, f"random_interferers.channels[{k}]", r.line_of(chans, k)).index
                    for k, c in enumerate(chans))

        def span(key: str, default: tuple[float, float]) -> tuple[float, float]:
            if key not in rd:
                return default
            s = r.seq(rd, key, f"random_interferers.{key}")
            if len(s) != 2:
                raise r.fail(f"random_interferers.{key}: expected [low, high]", s.line)
            return (r.number(s, 0, f"random_interferers.{key}[0]"), r.number(s, 1, f"random_interferers.{key}[1]"))

        rnd = RandomInterferers(r.number(rd, "count", "random_interferers.count", integer=True, minimum=0),
                                idx, span("level_dbm", (-60.0, -30.0)), span("duration", (5.0, 20.0)))

    events = []
    raw_e = r.seq(doc, "events", "events")
    for i, ev in enumerate(raw_e):
        path = f"events[{i}]"
        if not isinstance(ev, dict):
            raise r.fail(f"{path}: expected a mapping", r.line_of(raw_e, i))
        r.check_keys(ev, {"time", "link", "state"}, path)
        state = ev.get("state", "down")
        if state not in ("up", "down"):
            raise r.fail(f"{path}.state: expected up or down", r.line_of(ev, "state"))
        events.append(LinkEvent(r.number(ev, "time", f"{path}.time", minimum=0),
                                _pair(r, ev, "link", f"{path}.link"), state == "up"))

    hna: dict[int, tuple[tuple[int, int], ...]] = {}
    raw_h = r.seq(doc, "hna", "hna")
    for i, h in enumerate(raw_h):
        path = f"hna[{i}]"
        if not isinstance(h, dict):
            raise r.fail(f"{path}: expected a mapping", r.line_of(raw_h, i))
        r.check_keys(h, {"node", "network", "netmask"}, path)
        node = r.number(h, "node", f"{path}.node", integer=True)
        net = _address(r, h.get("network"), f"{path}.network", r.line_of(h, "network"))
        mask = _address(r, h.get("netmask", "255.255.255.0"), f"{path}.netmask", r.line_of(h, "netmask"))
        hna[node] = hna.get(node, ()) + ((net, mask),)

    run_d = r.mapping(doc, "run", "run")
    r.check_keys(run_d, {"seed", "horizon", "reps", "stack"}, "run")
    try:
        sc = Scenario(
            name=str(doc.get("name", Path(source).stem)),
            band=band,
            topology=spec,
            flows=_flows(r, doc),
            radio=radio,
            olsr=olsr,
            negotiation=neg,
            link_channels=link_channels,
            link_loss=link_loss,
            interferers=interferers,
            random_interferers=rnd,
            link_events=events,
            hna=hna,
            stack=str(run_d.get("stack", "full")),
            seed=r.number(run_d, "seed", "run.seed", 1, integer=True),
            horizon_s=r.number(run_d, "horizon", "run.horizon", 70.0),
            reps=r.number(run_d, "reps", "run.reps", 1, integer=True, minimum=1),
            negotiation_start_s=neg_start,
        )
    except ScenarioError as exc:
        raise r.fail(str(exc), doc.line) from None
    _validate_ids(r, sc, doc)
    return sc


def _validate_ids(r: _Reader, sc: Scenario, doc: LDict) -> None:
    from .core import build_topology

    try:
        topo = build_topology(sc.topology)
    except TopologyError as exc:
        raise r.fail(f"topology: {exc}", r.line_of(doc, "topology")) from None
    ids = set(topo.node_ids)
    raw = doc.get("flows") or []
    for i, f in enumerate(sc.flows):
        for n in (f.src, f.dst) + (f.path or ()):
            if n not in ids:
                raise r.fail(f"flows[{i}]: unknown node {n}", r.line_of(raw, i))
    for link in sc.link_channels:
        if (min(link), max(link)) not in topo.adjacency:
            raise r.fail(f"topology.links: channel for unknown link {link}", r.line_of(doc, "topology"))


def load_scenario(path: str | Path) -> Scenario:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read: {exc.strerror}", None, str(p)) from None
    return parse_scenario(text, str(p))


def describe(sc: Scenario) -> str:
    """Human-readable resolved configuration (used by ``--dry-run``)."""
    topo_lines = []
    for n in sc.topology.nodes:
        ifs = ", ".join(f"{i.name}={i.channel}@{i.antenna_position_cm:g}cm" for i in n.interfaces)
        topo_lines.append(f"  node {n.node_id}: {ifs}")
    flows = [f"  {f.label}: {f.protocol.value} start={f.start_s:g}s dur={f.duration_s:g}s "
             f"load={'saturate' if f.offered_mbps is None else f'{f.offered_mbps:g}Mbps'}"
             + (f" path={list(f.path)}" if f.path else "") for f in sc.flows]
    neg = "off" if sc.negotiation is None else (
        f"allowed={list(sc.negotiation.allowed_channels)} period={sc.negotiation.round_period_s:g}s "
        f"threshold={sc.negotiation.switch_threshold_dbm:g}dB")
    return "\n".join([
        f"scenario: {sc.name}",
        f"band: {sc.band.value}",
        "nodes:", *topo_lines,
        f"links: {[list(l) for l in sc.topology.links]}",
        f"link channels: {dict(sorted(sc.link_channels.items()))}",
        "flows:", *(flows or ["  (none)"]),
        f"negotiation: {neg}",
        f"interferers: {len(sc.interferers)}",
        f"run: seed={sc.seed} horizon={sc.horizon_s:g}s reps={sc.reps} stack={sc.stack}",
    ])
