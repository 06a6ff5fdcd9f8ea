"""Optical elements: linear mode maps and two-photon rewrite rules.

Linear elements are written over mode *patterns*. A pattern fixes some labels
(path, polarization, ...) and leaves the rest as wildcards, so a beam splitter
bound to paths ``a1``/``b1`` acts identically on every polarization, OAM and
time tag travelling in those paths. The element matrix is the map between
patterns; column ``j`` is the image of input pattern ``j``.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import BindingError, ContractError, ParameterError, RoutingError
from .fock import Mode, Monomial, PhotonState, normal_form, substitute

UNITARY_TOL = 1e-12

_FIELDS = ("path", "pol", "oam", "tag", "band")


@dataclass(frozen=True)
class Pattern:
    """Partial mode label; ``None`` fields match anything and are kept on rewrite."""

    path: str | None = None
    pol: str | None = None
    oam: str | None = None
    tag: str | None = None
    band: str | None = None

    @classmethod
    def parse(cls, text: "str | Pattern | Mode") -> "Pattern":
        if isinstance(text, Pattern):
            return text
        if isinstance(text, Mode):
            return cls(**dataclasses.asdict(text))
        parts = text.split(":")
        if len(parts) > 5:
            raise BindingError(f"bad pattern {text!r}")
        parts += ["*"] * (5 - len(parts))
        vals = [None if p == "*" else p for p in parts]
        return cls(*vals)

    def matches(self, m: Mode) -> bool:
        return all(v is None or getattr(m, f) == v for f, v in zip(_FIELDS, self.values()))

    def rewrite(self, m: Mode) -> Mode:
        changes = {f: v for f, v in zip(_FIELDS, self.values()) if v is not None}
        return m.replace(**changes) if changes else m

    def values(self):
        return (self.path, self.pol, self.oam, self.tag, self.band)

    def label(self) -> str:
        vals = ["*" if v is None else v for v in self.values()]
        while len(vals) > 1 and vals[-1] == "*":
            vals.pop()
        return ":".join(vals)

    def __str__(self) -> str:
        return self.label()


def _check_contractive(mat: np.ndarray, what: str) -> None:
    sv = np.linalg.svd(mat, compute_uv=False) if mat.size else np.zeros(0)
    if sv.size and sv.max() > 1 + UNITARY_TOL:
        raise ParameterError(f"{what}: singular value {sv.max():.6g} exceeds 1")


def is_unitary(mat: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    mat = np.asarray(mat, dtype=complex)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        return False
    return bool(np.abs(mat @ mat.conj().T - np.eye(mat.shape[0])).max() <= tol)


def _encode_matrix(mat: np.ndarray) -> dict:
    return {"re": mat.real.tolist(), "im": mat.imag.tolist()}


def _decode_matrix(obj) -> np.ndarray:
    if isinstance(obj, dict):
        return np.asarray(obj["re"], float) + 1j * np.asarray(obj.get("im", 0.0), float)
    return np.asarray(obj, dtype=complex)


class ElementOp:
    """Base class. Subclasses set ``kind`` and implement ``apply``/``to_dict``."""

    kind: str = ""
    loss_point: bool = False

    def apply(self, s: PhotonState) -> PhotonState:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __eq__(self, other) -> bool:
        return isinstance(other, ElementOp) and self.to_dict() == other.to_dict()

    def __hash__(self) -> int:
        return hash(repr(self.to_dict()))

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.to_dict()})"


class LinearElement(ElementOp):
    """A linear map between mode patterns."""

    unitary_kind = True

    def __init__(self, inputs: Sequence, matrix, outputs: Sequence | None = None):
        self.inputs = tuple(Pattern.parse(p) for p in inputs)
        self.outputs = self.inputs if outputs is None else tuple(Pattern.parse(p) for p in outputs)
        self.matrix = np.asarray(matrix, dtype=complex)
        if self.matrix.shape != (len(self.outputs), len(self.inputs)):
            raise BindingError(
                f"{self.kind}: matrix {self.matrix.shape} vs {len(self.outputs)}x{len(self.inputs)} patterns"
            )
        if self.unitary_kind:
            if not is_unitary(self.matrix):
                raise ParameterError(f"{self.kind}: matrix is not unitary")
        else:
            _check_contractive(self.matrix, self.kind)
            self.loss_point = not is_unitary(self.matrix)

    def _column(self, m: Mode) -> int | None:
        hit = None
        for j, p in enumerate(self.inputs):
            if p.matches(m):
                if hit is not None:
                    raise BindingError(f"{self.kind}: mode {m} matches patterns {self.inputs[hit]} and {p}")
                hit = j
        return hit

    def image(self, m: Mode):
        cache = self.__dict__.setdefault("_images", {})
        if m in cache:
            return cache[m]
        j = self._column(m)
        if j is None:
            img = None
        else:
            col = self.matrix[:, j]
            img = [(self.outputs[i].rewrite(m), col[i]) for i in range(len(self.outputs)) if col[i] != 0]
        cache[m] = img
        return img

    def apply(self, s: PhotonState) -> PhotonState:
        return substitute(s, self.image)


class BeamSplitter(LinearElement):
    kind = "bs"

    def __init__(self, mode_a, mode_b, transmission: float):
        t = float(transmission)
        if not 0.0 <= t <= 1.0:
            raise ParameterError(f"transmission {t} outside [0, 1]")
        self.transmission = t
        r, q = math.sqrt(t), math.sqrt(1.0 - t)
        super().__init__([mode_a, mode_b], [[r, q], [q, -r]])

    def to_dict(self) -> dict:
        return {"kind": self.kind, "a": self.inputs[0].label(), "b": self.inputs[1].label(), "t": self.transmission}


class HalfWavePlate(LinearElement):
    kind = "hwp"

    def __init__(self, h_mode, v_mode, plate_angle: float):
        h, v = Pattern.parse(h_mode), Pattern.parse(v_mode)
        if h.pol != "H" or v.pol != "V":
            raise BindingError("half-wave plate needs an H pattern and a V pattern")
        if (h.path, h.oam, h.tag, h.band) != (v.path, v.oam, v.tag, v.band):
            raise BindingError("half-wave plate patterns must differ only in polarization")
        self.plate_angle = float(plate_angle)
        rot = 2.0 * self.plate_angle
        c, s = math.cos(rot), math.sin(rot)
        super().__init__([h, v], [[c, s], [s, -c]])

    def to_dict(self) -> dict:
        return {"kind": self.kind, "h": self.inputs[0].label(), "v": self.inputs[1].label(), "angle": self.plate_angle}


class PhaseShift(LinearElement):
    kind = "phase"

    def __init__(self, mode, phi: float):
        self.phi = float(phi)
        super().__init__([mode], [[np.exp(1j * self.phi)]])

    def to_dict(self) -> dict:
        return {"kind": self.kind, "mode": self.inputs[0].label(), "phi": self.phi}


class PolarizingBS(LinearElement):
    """Polarization-dependent router: relabels each bound input pattern.

    Covers the detection PBS, the PBS used as a path CNOT, branch splitting
    and lossless merges of time-separated branches. Any mode travelling in
    one of ``in_paths`` that matches no route raises :class:`RoutingError`.
    """

    kind = "pbs"

    def __init__(self, routes, in_paths: Sequence[str] | None = None):
        items = list(routes.items()) if isinstance(routes, Mapping) else [tuple(r) for r in routes]
        ins = [Pattern.parse(a) for a, _ in items]
        outs = [Pattern.parse(b) for _, b in items]
        if len(set(ins)) != len(ins):
            raise BindingError("input pattern bound twice")
        if len(set(outs)) != len(outs):
            raise BindingError("two inputs routed onto the same output pattern")
        self.in_paths = tuple(in_paths) if in_paths is not None else tuple(sorted({p.path for p in ins if p.path}))
        super().__init__(ins, np.eye(len(ins)), outs)

    def image(self, m: Mode):
        img = super().image(m)
        if img is None and m.path in self.in_paths:
            raise RoutingError(f"pbs: no route for mode {m}")
        return img

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "routes": [[a.label(), b.label()] for a, b in zip(self.inputs, self.outputs)],
            "in_paths": list(self.in_paths),
        }


class Hologram(LinearElement):
    """Forked hologram: OAM +1/-1 of one photon is turned into a path label, OAM -> 0."""

    kind = "hologram"

    def __init__(self, photon_index: int, oam_to_path: Mapping[str, str], path: str | None = None):
        self.photon_index = int(photon_index)
        self.bindings = {str(k): str(v) for k, v in oam_to_path.items()}
        if set(self.bindings) != {"+1", "-1"}:
            raise BindingError("hologram bindings must cover OAM +1 and -1")
        self.path = path if path is not None else str(self.photon_index)
        ins = [Pattern(path=self.path, oam=o) for o in ("+1", "-1")]
        outs = [Pattern(path=self.bindings[o], oam="0") for o in ("+1", "-1")]
        super().__init__(ins, np.eye(2), outs)

    def image(self, m: Mode):
        img = super().image(m)
        if img is None and m.path == self.path:
            raise RoutingError(f"hologram: photon {self.photon_index} has OAM {m.oam!r}")
        return img

    def to_dict(self) -> dict:
        return {"kind": self.kind, "photon": self.photon_index, "bindings": dict(self.bindings), "path": self.path}


class Delay(LinearElement):
    """Birefringent delay: untagged photons of one path and polarization gain a time tag."""

    kind = "delay"

    def __init__(self, path: str, pol: str, tag: str):
        if tag not in ("th", "tv"):
            raise ParameterError(f"delay tag must be 'th' or 'tv', got {tag!r}")
        self.path_label, self.pol, self.tag = path, pol, tag
        super().__init__([Pattern(path=path, pol=pol)], [[1.0]], [Pattern(tag=tag)])

    def image(self, m: Mode):
        img = super().image(m)
        if img is not None and m.tag != "-":
            raise ContractError(f"delay: mode {m} already carries tag {m.tag!r}")
        return img

    def to_dict(self) -> dict:
        return {"kind": self.kind, "path": self.path_label, "pol": self.pol, "tag": self.tag}


class DichroicRouter(LinearElement):
    """Routes photons by frequency band: new path = band prefix + photon index."""

    kind = "dichroic"

    def __init__(self, paths: Sequence[str], freq_to_prefix: Mapping[str, str]):
        self.paths = tuple(paths)
        self.freq_to_prefix = dict(freq_to_prefix)
        if set(self.freq_to_prefix) != {"f", "d"}:
            raise BindingError("dichroic router needs bindings for bands 'f' and 'd'")
        ins, outs = [], []
        for p in self.paths:
            k = Mode(p).photon
            if k is None:
                raise BindingError(f"path {p!r} has no photon index")
            for band, prefix in sorted(self.freq_to_prefix.items()):
                ins.append(Pattern(path=p, band=band))
                outs.append(Pattern(path=f"{prefix}{k}", band=band))
        super().__init__(ins, np.eye(len(ins)), outs)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "paths": list(self.paths), "bands": dict(self.freq_to_prefix)}


class EffectiveMap(LinearElement):
    """Arbitrary contractive map; the norm it removes is counted as discarded."""

    kind = "effective"
    unitary_kind = False

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "in": [p.label() for p in self.inputs],
            "out": [p.label() for p in self.outputs],
            "matrix": _encode_matrix(self.matrix),
        }


class TimeCoalesce(ElementOp):
    """Erase time tags of photon pairs that both picked up the same delay.

    Pairs tagged (th, th) or (tv, tv) are indistinguishable in creation time
    and lose their tags; mixed pairs keep them. Amplitudes of monomials that
    become equal add coherently, so the squared norm is not conserved.
    """

    kind = "coalesce"

    def apply(self, s: PhotonState) -> PhotonState:
        acc: dict[Monomial, complex] = {}
        for mon, c in s.terms.items():
            if mon.photon_number != 2:
                raise ContractError(f"coalesce expects two-photon terms, got {mon.photon_number}")
            a, b = mon.modes
            if a.tag != "-" and a.tag == b.tag:
                mon = normal_form([a.replace(tag="-"), b.replace(tag="-")])
            acc[mon] = acc.get(mon, 0) + c
        return PhotonState(acc)

    def to_dict(self) -> dict:
        return {"kind": self.kind}


_SFG_RULES = {
    "I": {("H", "H"): "V", ("V", "V"): "H"},
    "II": {("V", "H"): "V", ("H", "V"): "H"},
}


class SFG(ElementOp):
    """Unit-efficiency sum-frequency generation on the photon pair in ``in_paths``.

    A matching pair (polarizations of the photons in the two input paths)
    becomes one frequency-doubled photon in ``out_path``; everything else
    passes through.
    """

    def __init__(self, sfg_type: str, in_paths=("1", "2"), out_path: str = "3"):
        if sfg_type not in _SFG_RULES:
            raise ParameterError(f"SFG type must be 'I' or 'II', got {sfg_type!r}")
        self.sfg_type = sfg_type
        self.in_paths = tuple(in_paths)
        self.out_path = out_path
        self.kind = "sfg"

    def _convert(self, mon: Monomial) -> Monomial | None:
        p1, p2 = self.in_paths
        first = [m for m in mon.modes if m.path == p1 and m.band == "f"]
        second = [m for m in mon.modes if m.path == p2 and m.band == "f"]
        if len(first) != 1 or len(second) != 1:
            return None
        out_pol = _SFG_RULES[self.sfg_type].get((first[0].pol, second[0].pol))
        if out_pol is None:
            return None
        rest = list(mon.modes)
        rest.remove(first[0])
        rest.remove(second[0])
        return normal_form(rest + [Mode(self.out_path, out_pol, band="d")])

    def apply(self, s: PhotonState) -> PhotonState:
        acc: dict[Monomial, complex] = {}
        for mon, c in s.terms.items():
            new = self._convert(mon) or mon
            acc[new] = acc.get(new, 0) + c
        return PhotonState(acc)

    def to_dict(self) -> dict:
        return {"kind": "sfg", "type": self.sfg_type, "in": list(self.in_paths), "out": self.out_path}


# Constructors named after the operations they model.

def beam_splitter(mode_a, mode_b, transmission: float) -> BeamSplitter:
    return BeamSplitter(mode_a, mode_b, transmission)


def half_wave_plate(h_mode, v_mode, plate_angle: float) -> HalfWavePlate:
    return HalfWavePlate(h_mode, v_mode, plate_angle)


def hwp(path: str, plate_angle: float) -> HalfWavePlate:
    """Half-wave plate on both polarizations of one path."""
    return HalfWavePlate(Pattern(path=path, pol="H"), Pattern(path=path, pol="V"), plate_angle)


def phase_shift(mode, phi: float) -> PhaseShift:
    return PhaseShift(mode, phi)


def polarizing_bs(routes, in_paths=None) -> PolarizingBS:
    return PolarizingBS(routes, in_paths)


def hologram(photon_index: int, oam_to_path: Mapping[str, str], path: str | None = None) -> Hologram:
    return Hologram(photon_index, oam_to_path, path)


def delay(path: str, pol: str, tag: str) -> Delay:
    return Delay(path, pol, tag)


def time_coalesce(s: PhotonState | None = None):
    """Return the coalescing element, or apply it directly when given a state."""
    el = TimeCoalesce()
    return el if s is None else el.apply(s)


def sfg(kind: str, in_paths=("1", "2"), out_path: str = "3") -> SFG:
    return SFG(kind, in_paths, out_path)


def dichroic_router(paths: Sequence[str], freq_to_prefix: Mapping[str, str]) -> DichroicRouter:
    return DichroicRouter(paths, freq_to_prefix)


def effective_map(matrix, inputs: Sequence, outputs: Sequence | None = None) -> EffectiveMap:
    return EffectiveMap(inputs, matrix, outputs)


def discard(*paths: str) -> EffectiveMap:
    """Drop every photon in ``paths`` (an unrecorded output arm)."""
    return EffectiveMap([Pattern(path=p) for p in paths], np.zeros((len(paths), len(paths))))


def element_from_dict(d: Mapping) -> ElementOp:
    """Inverse of ``ElementOp.to_dict``; raises KeyError/ValueError on bad input."""
    kind = d["kind"]
    if kind == "bs":
        return BeamSplitter(d["a"], d["b"], d["t"])
    if kind == "hwp":
        return HalfWavePlate(d["h"], d["v"], d["angle"])
    if kind == "phase":
        return PhaseShift(d["mode"], d["phi"])
    if kind == "pbs":
        return PolarizingBS([tuple(r) for r in d["routes"]], d.get("in_paths"))
    if kind == "hologram":
        return Hologram(d["photon"], d["bindings"], d.get("path"))
    if kind == "delay":
        return Delay(d["path"], d["pol"], d["tag"])
    if kind == "coalesce":
        return TimeCoalesce()
    if kind == "dichroic":
        return DichroicRouter(d["paths"], d["bands"])
    if kind == "sfg":
        return SFG(d["type"], tuple(d.get("in", ("1", "2"))), d.get("out", "3"))
    if kind == "effective":
        return EffectiveMap(d["in"], _decode_matrix(d["matrix"]), d.get("out"))
    raise ValueError(f"unknown element kind {kind!r}")
