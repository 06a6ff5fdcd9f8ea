"""Symbolic Fock-space simulation of linear-optical Bell-like state discrimination."""
from . import elements, protocols
from ._accel import backend, set_backend
from .circuits import Circuit, Propagation, compose, parse_circuit, serialize_circuit
from .detection import DetectionEvent, DetectorSpec, enumerate_events, event_table
from .discrimination import DiscriminationReport, analyze, closed_form
from .errors import BellDiscError
from .fock import Mode, Monomial, PhotonState, inner_product, normal_form, product, state, tensor
from .optimizer import OptimizeResult, ReckNetwork, optimize, realize

__version__ = "0.1.0"

__all__ = [
    "BellDiscError",
    "Circuit",
    "DetectionEvent",
    "DetectorSpec",
    "DiscriminationReport",
    "Mode",
    "Monomial",
    "OptimizeResult",
    "PhotonState",
    "Propagation",
    "ReckNetwork",
    "analyze",
    "backend",
    "closed_form",
    "compose",
    "elements",
    "enumerate_events",
    "event_table",
    "inner_product",
    "normal_form",
    "optimize",
    "parse_circuit",
    "product",
    "protocols",
    "realize",
    "serialize_circuit",
    "set_backend",
    "state",
    "tensor",
]
