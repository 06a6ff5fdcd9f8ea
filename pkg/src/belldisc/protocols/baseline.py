"""Reference analyzer: one balanced beam splitter and polarization detectors, no ancilla."""
from __future__ import annotations

import math

from .. import elements as el
from ..circuits import Circuit
from ..detection import DetectorSpec
from ..fock import PhotonState, state
from ._base import ProtocolInstance
from .hyper import detector_split

DETECTORS = DetectorSpec(("path",))


def inputs(theta: float) -> list[PhotonState]:
    s, c = math.sin(theta), math.cos(theta)

    def two(x, p, y, q):
        return state((x, [f"a1:{p[0]}", f"b2:{p[1]}"]), (y, [f"a1:{q[0]}", f"b2:{q[1]}"]))
    return [two(s, "HV", c, "VH"), two(c, "HV", -s, "VH"), two(s, "HH", c, "VV"), two(c, "HH", -s, "VV")]


def circuit() -> Circuit:
    # Both photons meet on one beam splitter; outputs keep the input path names.
    return Circuit([el.beam_splitter("a1", "b2", 0.5), detector_split(("a1", "b2"))], name="baseline")


def build(theta: float) -> ProtocolInstance:
    ids = [f"psi{k}" for k in range(1, 5)]
    return ProtocolInstance(
        id="baseline",
        params={"theta": theta},
        inputs=tuple(zip(ids, inputs(theta))),
        circuit=circuit(),
        detectors=DETECTORS,
    )
