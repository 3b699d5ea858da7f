"""Capacity workbench for networks with edge-restricted adversaries."""

from .netcore import (
    AdversaryModel,
    Alphabet,
    Edge,
    EdgeCut,
    Network,
    Scenario,
    enumerate_edge_cuts,
    immediate_predecessors,
    load_description,
    precedes,
    validate_network,
)

__all__ = [
    "AdversaryModel",
    "Alphabet",
    "Edge",
    "EdgeCut",
    "Network",
    "Scenario",
    "enumerate_edge_cuts",
    "immediate_predecessors",
    "load_description",
    "precedes",
    "validate_network",
]
__version__ = "0.1.0"
