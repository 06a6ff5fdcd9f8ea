"""Complete Bell-like analysis with sum-frequency generation.

A type-I crystal converts the HH/VV pair states into a single doubled photon,
a dichroic mirror separates it from the untouched fundamental pair, and a
type-II crystal converts the HV/VH states. One wave plate per output then maps
each of the four states onto its own polarization detector.
"""
from __future__ import annotations

import math

from .. import elements as el
from ..circuits import Circuit
from ..detection import DetectorSpec
from ..fock import PhotonState, state
from ._base import ProtocolInstance

DETECTORS = DetectorSpec(("path", "pol"))


def inputs(theta1: float, theta2: float) -> list[PhotonState]:
    s1, c1 = math.sin(theta1), math.cos(theta1)
    s2, c2 = math.sin(theta2), math.cos(theta2)

    def two(x, p, y, q):
        return state((x, [f"1:{p[0]}", f"2:{p[1]}"]), (y, [f"1:{q[0]}", f"2:{q[1]}"]))
    return [two(s1, "HH", c1, "VV"), two(c1, "HH", -s1, "VV"), two(s2, "HV", c2, "VH"), two(c2, "HV", -s2, "VH")]


def circuit(theta1: float, theta2: float) -> Circuit:
    return Circuit([
        el.sfg("I", ("1", "2"), "3"),
        el.dichroic_router(("1", "2", "3"), {"d": "a", "f": "b"}),
        el.sfg("II", ("b1", "b2"), "b3"),
        el.hwp("a3", theta1 / 2),
        el.hwp("b3", math.pi / 4 - theta2 / 2),
    ], name="sfg")


def build(theta1: float, theta2: float) -> ProtocolInstance:
    ids = [f"psi{k}" for k in range(1, 5)]
    return ProtocolInstance(
        id="sfg",
        params={"theta1": theta1, "theta2": theta2},
        inputs=tuple(zip(ids, inputs(theta1, theta2))),
        circuit=circuit(theta1, theta2),
        detectors=DETECTORS,
    )
