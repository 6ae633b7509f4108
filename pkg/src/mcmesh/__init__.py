"""Multi-channel wireless mesh simulator with OLSR routing, channel negotiation and interface bonding."""

from .core import Band, Channel, Topology, TopologySpec, build_topology, chain_spec
from .radio import Protocol, RadioParams, path_throughput
from .sim import Flow, RunStats, Scenario, run

__all__ = [
    "Band",
    "Channel",
    "Flow",
    "Protocol",
    "RadioParams",
    "RunStats",
    "Scenario",
    "Topology",
    "TopologySpec",
    "build_topology",
    "chain_spec",
    "path_throughput",
    "run",
]

__version__ = "0.1.0"
