"""Bell-like polarization/path states analysed with a second entangled degree of freedom.

Three variants share the same shape: four Bell-like states in one degree of
freedom, tensored with a fixed maximally entangled state in another, sent
through a short linear network and number-resolving detectors placed after a
polarization split. Each variant ships the tabulated output expansion (just
before the final split) used by literal mode.
"""
from __future__ import annotations

import math

from .. import elements as el
from ..circuits import Circuit
from ..detection import DetectorSpec
from ..fock import PhotonState, state, tensor
from ._base import ProtocolInstance

R2 = math.sqrt(2.0)
PATH_DETECTORS = DetectorSpec(("path",))


def detector_split(paths) -> el.PolarizingBS:
    """Send each path's H and V light to its own detector path, e.g. ``b1`` -> ``b1H``/``b1V``."""
    routes = []
    for p in paths:
        routes += [(f"{p}:H", f"{p}H:H"), (f"{p}:V", f"{p}V:V")]
    return el.polarizing_bs(routes, in_paths=list(paths))


def _pair(p1: str, p2: str, pols: str, coef: float, oam: str | None = None):
    suffix = f":{oam}" if oam else ""
    return (coef, [f"{p1}:{pols[0]}{suffix}", f"{p2}:{pols[1]}{suffix}"])


def _pol_bell(s: float, c: float, paths=("1", "2")) -> list[PhotonState]:
    """The four polarization Bell-like states in the standard order."""
    def two(x, p, y, q):
        return state(_pair(*paths, p, x), _pair(*paths, q, y))
    return [two(s, "HH", c, "VV"), two(c, "HH", -s, "VV"), two(s, "HV", c, "VH"), two(c, "HV", -s, "VH")]


# -- momentum -------------------------------------------------------------

def momentum_inputs(theta: float) -> list[PhotonState]:
    s, c = math.sin(theta), math.cos(theta)
    r = 1 / R2
    pol = state((r, ["1:H", "2:V"]), (r, ["1:V", "2:H"]))
    paths = [
        state((s, ["a1", "a2"]), (c, ["b1", "b2"])),
        state((c, ["a1", "a2"]), (-s, ["b1", "b2"])),
        state((s, ["a1", "b2"]), (c, ["b1", "a2"])),
        state((c, ["a1", "b2"]), (-s, ["b1", "a2"])),
    ]
    return [tensor(k, pol) for k in paths]


def momentum_circuit(theta: float) -> Circuit:
    c = math.cos(theta)
    body = [
        el.hwp("b1", math.pi / 4),
        el.hwp("b2", math.pi / 4),
        el.beam_splitter("a1", "b1", 0.5),
        el.beam_splitter("a2", "b2", c * c),
    ]
    return Circuit(body + [detector_split(("a1", "b1", "a2", "b2"))], name="hyper_momentum")


def momentum_literal(index: int, theta: float) -> PhotonState:
    S, C = math.sin(2 * theta), math.cos(2 * theta)

    def both(p1, p2, coef, flip=False):
        pols = ("HH", "VV") if flip else ("HV", "VH")
        return [_pair(p1, p2, pols[0], coef), _pair(p1, p2, pols[1], coef)]

    table = {
        1: both("a1", "a2", S / 2) + both("a1", "b2", -C / 2) + both("b1", "b2", 0.5),
        2: both("a1", "a2", C / 2) + both("a1", "b2", S / 2) + both("b1", "a2", 0.5),
        3: both("a1", "a2", 0.5, True) + both("b1", "a2", -C / 2, True) + both("b1", "b2", -S / 2, True),
        4: both("a1", "b2", -0.5, True) + both("b1", "a2", S / 2, True) + both("b1", "b2", -C / 2, True),
    }
    return state(*table[index])


# -- polarization ---------------------------------------------------------

def polarization_inputs(theta: float) -> list[PhotonState]:
    r = 1 / R2
    mom = state((r, ["a1", "b2"]), (r, ["b1", "a2"]))
    return [tensor(p, mom) for p in _pol_bell(math.sin(theta), math.cos(theta))]


def _cnot(pairs) -> el.PolarizingBS:
    routes = []
    for x, y in pairs:
        routes += [(f"{x}:H", f"{x}:H"), (f"{y}:H", f"{y}:H"), (f"{x}:V", f"{y}:V"), (f"{y}:V", f"{x}:V")]
    return el.polarizing_bs(routes)


def _first_photon_rotation(theta: float, x: str, y: str) -> list[el.ElementOp]:
    """Split photon 1 by polarization, rotate each arm, recombine and drop one port."""
    hx, hy, vx, vy = f"h{x}", f"h{y}", f"v{x}", f"v{y}"
    return [
        el.polarizing_bs([(f"{x}:H", f"{hx}:H"), (f"{x}:V", f"{vx}:V"),
                          (f"{y}:H", f"{hy}:H"), (f"{y}:V", f"{vy}:V")]),
        el.hwp(hx, theta / 2),
        el.hwp(hy, theta / 2),
        el.hwp(vx, math.pi / 4 - theta / 2),
        el.hwp(vy, math.pi / 4 - theta / 2),
        el.beam_splitter(hx, vx, 0.5),
        el.beam_splitter(hy, vy, 0.5),
        el.discard(vx, vy),
        el.polarizing_bs([(hx, x), (hy, y)]),
    ]


def polarization_circuit(theta: float) -> Circuit:
    body = [_cnot([("a1", "b1"), ("a2", "b2")])]
    body += _first_photon_rotation(theta, "a1", "b1")
    body += [el.hwp("a2", theta / 2), el.hwp("b2", theta / 2)]
    return Circuit(body + [detector_split(("a1", "b1", "a2", "b2"))], name="hyper_polarization")


def _mirror(rows, first, second, oam=None):
    """Same polarization terms on both path pairings ``first`` and ``second``."""
    out = []
    for pols, coef in rows:
        out.append(_pair(*first, pols, coef, oam))
        out.append(_pair(*second, pols, coef, oam))
    return out


def polarization_literal(index: int, theta: float) -> PhotonState:
    s, c = math.sin(theta), math.cos(theta)
    C2, c3, s3 = math.cos(2 * theta), math.cos(3 * theta), math.sin(3 * theta)
    cross, same = (("a1", "b2"), ("b1", "a2")), (("a1", "a2"), ("b1", "b2"))
    table = {
        1: _mirror([("HH", s / R2 + s * C2 / R2), ("HV", -c / (2 * R2) - c3 / (2 * R2)), ("VV", s / R2)], *cross),
        2: _mirror([("HH", c / (2 * R2) + c3 / (2 * R2)), ("HV", s / R2 + s * C2 / R2), ("VH", s / R2)], *cross),
        3: _mirror([("HH", c / R2), ("VH", s / (2 * R2) - s3 / (2 * R2)), ("VV", -c / (2 * R2) + c3 / (2 * R2))], *same),
        4: _mirror([("HV", -c / R2), ("VH", c / (2 * R2) - c3 / (2 * R2)), ("VV", s / (2 * R2) - s3 / (2 * R2))], *same),
    }
    return state(*table[index])


# -- orbital angular momentum ---------------------------------------------

def oam_inputs(theta: float) -> list[PhotonState]:
    r = 1 / R2
    oam = state((r, ["1:-:+1", "2:-:-1"]), (r, ["1:-:-1", "2:-:+1"]))
    return [tensor(p, oam) for p in _pol_bell(math.sin(theta), math.cos(theta))]


def oam_circuit(theta: float) -> Circuit:
    body = [
        el.hologram(1, {"+1": "u1", "-1": "d1"}),
        el.hologram(2, {"+1": "u2", "-1": "d2"}),
        el.hwp("u2", math.pi / 4),
        el.hwp("d2", math.pi / 4),
        _cnot([("u1", "d1"), ("u2", "d2")]),
    ]
    body += _first_photon_rotation(theta, "u1", "d1")
    body += [el.hwp("u2", theta / 2), el.hwp("d2", theta / 2)]
    return Circuit(body + [detector_split(("u1", "d1", "u2", "d2"))], name="hyper_oam")


def oam_literal(index: int, theta: float) -> PhotonState:
    s, c = math.sin(theta), math.cos(theta)
    C2, c3, s3 = math.cos(2 * theta), math.cos(3 * theta), math.sin(3 * theta)
    same, cross = (("u1", "u2"), ("d1", "d2")), (("d1", "u2"), ("u1", "d2"))
    table = {
        1: _mirror([("HH", c / R2), ("VH", s / (2 * R2) - s3 / (2 * R2)), ("VV", -c / (2 * R2) + c3 / (2 * R2))], *same, oam="0"),
        2: _mirror([("HV", -c / R2), ("VH", c / (2 * R2) - c3 / (2 * R2)), ("VV", s / (2 * R2) - s3 / (2 * R2))], *same, oam="0"),
        3: _mirror([("HH", s / R2 + s * C2 / R2), ("HV", -c / (2 * R2) - c3 / (2 * R2)), ("VV", s / R2)], *cross, oam="0"),
        4: _mirror([("HH", c / (2 * R2) + c3 / (2 * R2)), ("HV", s / (2 * R2) + s3 / (2 * R2)), ("VH", s / R2)], *cross, oam="0"),
    }
    return state(*table[index])


_FAMILIES = {
    "hyper_momentum": ("Theta", momentum_inputs, momentum_circuit, momentum_literal),
    "hyper_polarization": ("Xi", polarization_inputs, polarization_circuit, polarization_literal),
    "hyper_oam": ("Pi", oam_inputs, oam_circuit, oam_literal),
}


def literal_output(pid: str, index: int, theta: float) -> PhotonState:
    return _FAMILIES[pid][3](index, theta)


def build(pid: str, theta: float, mode: str) -> ProtocolInstance:
    prefix, inputs, circuit, literal = _FAMILIES[pid]
    circ = circuit(theta)
    ids = [f"{prefix}{k}" for k in range(1, 5)]
    lit = tuple(literal(k, theta) for k in range(1, 5)) if mode == "literal" else ()
    return ProtocolInstance(
        id=pid,
        params={"theta": theta},
        inputs=tuple(zip(ids, inputs(theta))),
        circuit=circ,
        detectors=PATH_DETECTORS,
        mode=mode,
        literal_cut=len(circ) - 1,
        literal=lit,
    )
