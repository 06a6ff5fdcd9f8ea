"""Prebuilt protocol instances: input states, circuits and detector models."""
from __future__ import annotations

import json
from importlib import resources
from typing import Mapping

from ..circuits import Circuit, parse_circuit
from ..errors import ParameterError
from ..fock import PhotonState
from . import ancilla, baseline, hyper, sfg, timebin
from ._base import LITERAL_IDS, PROTOCOL_IDS, ProtocolInstance, amplitude_residual, check_angle

__all__ = [
    "PROTOCOL_IDS",
    "LITERAL_IDS",
    "ProtocolInstance",
    "amplitude_residual",
    "build",
    "literal_output",
    "ancilla_instance",
    "golden_circuit",
]

MODES = ("circuit", "literal")


def _angles(params: Mapping, *names: str) -> list[float]:
    out = []
    for n in names:
        if n not in params or params[n] is None:
            raise ParameterError(f"missing parameter {n!r}")
        out.append(check_angle(n, params[n]))
    return out


def _theta(params: Mapping) -> float:
    if params.get("theta") is None and params.get("theta1") is not None:
        return check_angle("theta1", params["theta1"])
    return _angles(params, "theta")[0]


def build(pid: str, params: Mapping | None = None, mode: str = "circuit", **kw) -> ProtocolInstance:
    """Wire up a protocol.

    Args:
        pid: One of :data:`PROTOCOL_IDS`.
        params: ``theta`` for single-angle protocols; ``theta1``/``theta2``
            for ``sfg`` and ``ancilla`` (plus ``pairs`` for the latter).
            Keyword arguments are merged in.
        mode: ``circuit`` or ``literal`` (literal only for :data:`LITERAL_IDS`).

    Raises:
        ParameterError: Unknown id or mode, or angles outside (0, pi/2).
    """
    p = {**(params or {}), **kw}
    if pid not in PROTOCOL_IDS:
        raise ParameterError(f"unknown protocol {pid!r}")
    if mode not in MODES:
        raise ParameterError(f"unknown mode {mode!r}")
    if mode == "literal" and pid not in LITERAL_IDS:
        raise ParameterError(f"protocol {pid!r} has no tabulated outputs")
    if pid in hyper._FAMILIES:
        return hyper.build(pid, _theta(p), mode)
    if pid == "timebin":
        return timebin.build(_theta(p), mode)
    if pid == "baseline":
        return baseline.build(_theta(p))
    if pid == "sfg":
        t1, t2 = _angles(p, "theta1", "theta2")
        return sfg.build(t1, t2)
    t1, t2 = _angles(p, "theta1", "theta2")
    return ancilla_instance(t1, t2, p.get("pairs", 1))


def ancilla_instance(theta1: float, theta2: float, pairs: int = 1) -> ProtocolInstance:
    """Ancilla-assisted instance with one or two ancilla layers."""
    theta1 = check_angle("theta1", theta1)
    theta2 = check_angle("theta2", theta2)
    if pairs not in (1, 2):
        raise ParameterError(f"pairs must be 1 or 2, got {pairs!r}")
    return ancilla.build(theta1, theta2, int(pairs))


def literal_output(pid: str, index: int, params: Mapping | float) -> PhotonState:
    """Tabulated output expansion of input ``index`` (1-based).

    For the hyperentangled protocols this is the state just before the final
    polarization split; for ``timebin`` it is the detected state.
    """
    if pid not in LITERAL_IDS:
        raise ParameterError(f"no tabulated outputs for protocol {pid!r}")
    if index not in (1, 2, 3, 4):
        raise ParameterError(f"state index must be 1..4, got {index!r}")
    theta = check_angle("theta", params) if not isinstance(params, Mapping) else _theta(params)
    if pid == "timebin":
        return timebin.literal_output(index, theta)
    return hyper.literal_output(pid, index, theta)


GOLDEN = {
    "hyper_momentum": {"theta": 0.4},
    "hyper_polarization": {"theta": 0.4},
    "hyper_oam": {"theta": 0.4},
    "timebin": {"theta": 0.3},
    "ancilla": {"theta1": 0.3, "theta2": 0.9, "pairs": 1},
    "sfg": {"theta1": 0.3, "theta2": 1.1},
    "baseline": {"theta": 0.7853981633974483},
}


def default_circuit(pid: str) -> Circuit:
    """Circuit of a builtin at its reference parameters (the golden-file content)."""
    p = GOLDEN[pid]
    if pid == "timebin":
        return timebin.circuit(p["theta"])
    return build(pid, p).circuit


def golden_circuit(pid: str) -> Circuit:
    """Load the shipped circuit document for a builtin."""
    if pid not in GOLDEN:
        raise ParameterError(f"unknown protocol {pid!r}")
    text = resources.files("belldisc").joinpath("data", f"{pid}.json").read_text()
    return parse_circuit(text)


def golden_document(pid: str) -> dict:
    return json.loads(resources.files("belldisc").joinpath("data", f"{pid}.json").read_text())
