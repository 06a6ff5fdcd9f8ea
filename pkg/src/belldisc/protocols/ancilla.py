"""Bell-like dual-rail states assisted by entangled ancilla photons.

System photons live in modes ``a1..a4``; each ancilla layer adds a
GHZ-like block on fresh modes (``a5..a8`` for the first pair, ``a9..a16``
for the second). Odd-indexed and even-indexed modes are interfered in two
separate butterfly networks: balanced beam splitters at every stride except
the last, whose transmission is ``cos^2(phi)`` with ``phi = pi/4`` on the odd
class and ``phi = theta2`` on the even class. Detectors resolve photon number
per mode.
"""
from __future__ import annotations

import math

from .. import elements as el
from ..circuits import Circuit
from ..detection import DetectorSpec
from ..fock import PhotonState, product, state
from ._base import ProtocolInstance

DETECTORS = DetectorSpec(("path",))
MAX_PAIRS = 2


def n_modes(pairs: int) -> int:
    return 4 + 4 * (2 ** pairs - 1)


def _modes(idx) -> list[str]:
    return [f"a{i}" for i in idx]


def ancilla_state(theta1: float, pairs: int) -> PhotonState:
    s1, c1 = math.sin(theta1), math.cos(theta1)
    anc = state((s1, _modes((5, 7))), (c1, _modes((6, 8))))
    if pairs == 2:
        anc = product(anc, state((s1, _modes((9, 11, 13, 15))), (c1, _modes((10, 12, 14, 16)))))
    return anc


def inputs(theta1: float, theta2: float, pairs: int) -> list[PhotonState]:
    s1, c1 = math.sin(theta1), math.cos(theta1)
    s2, c2 = math.sin(theta2), math.cos(theta2)
    system = [
        state((s2, _modes((1, 4))), (c2, _modes((2, 3)))),
        state((c2, _modes((1, 4))), (-s2, _modes((2, 3)))),
        state((s1, _modes((1, 3))), (c1, _modes((2, 4)))),
        state((c1, _modes((1, 3))), (-s1, _modes((2, 4)))),
    ]
    anc = ancilla_state(theta1, pairs)
    return [product(k, anc) for k in system]


def circuit(theta2: float, pairs: int) -> Circuit:
    total = n_modes(pairs)
    elems = []
    for parity, phi in ((1, math.pi / 4), (0, theta2)):
        idx = [m for m in range(1, total + 1) if m % 2 == parity]
        size = len(idx)
        stride = size // 2
        while stride >= 1:
            t = math.cos(phi) ** 2 if stride == 1 else 0.5
            for i in range(size):
                if (i // stride) % 2 == 0:
                    elems.append(el.beam_splitter(f"a{idx[i]}", f"a{idx[i + stride]}", t))
            stride //= 2
    return Circuit(elems, name=f"ancilla_pairs{pairs}")


def build(theta1: float, theta2: float, pairs: int) -> ProtocolInstance:
    ids = [f"Gamma{k}" for k in range(1, 5)]
    return ProtocolInstance(
        id="ancilla",
        params={"theta1": theta1, "theta2": theta2, "pairs": pairs},
        inputs=tuple(zip(ids, inputs(theta1, theta2, pairs))),
        circuit=circuit(theta2, pairs),
        detectors=DETECTORS,
        meta={"topology": "parity butterfly (assumed)"},
    )
