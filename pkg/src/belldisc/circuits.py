"""Ordered element composition, loss accounting and the circuit JSON format."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Sequence

from .elements import ElementOp, LinearElement, element_from_dict
from .errors import BellDiscError, ParseError
from .fock import PhotonState, compile_substitution, substitute_many

SCHEMA_VERSION = 1

_REQUIRED = {
    "bs": ("a", "b", "t"),
    "hwp": ("h", "v", "angle"),
    "phase": ("mode", "phi"),
    "pbs": ("routes",),
    "hologram": ("photon", "bindings"),
    "delay": ("path", "pol", "tag"),
    "coalesce": (),
    "dichroic": ("paths", "bands"),
    "sfg": ("type",),
    "effective": ("in", "matrix"),
}


@dataclass(frozen=True)
class Propagation:
    """Result of running a circuit on one state.

    Attributes:
        state: Output state (unnormalised).
        discarded: Initial minus final squared norm.
        lost: Squared norm removed at loss points only. Differs from
            ``discarded`` when a non-unitary rewrite (time coalescing)
            changes the norm without removing photons.
    """

    state: PhotonState
    discarded: float
    lost: float


@dataclass(frozen=True)
class Circuit:
    elements: tuple[ElementOp, ...] = ()
    loss_points: tuple[int, ...] = field(default=None)  # type: ignore[assignment]
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if self.loss_points is None:
            pts = tuple(i for i, e in enumerate(self.elements) if e.loss_point)
            object.__setattr__(self, "loss_points", pts)
        else:
            object.__setattr__(self, "loss_points", tuple(sorted(set(self.loss_points))))

    def __len__(self) -> int:
        return len(self.elements)

    def __getitem__(self, idx):
        if isinstance(idx, slice):
            return Circuit(self.elements[idx], name=self.name)
        return self.elements[idx]

    def __add__(self, other: "Circuit") -> "Circuit":
        off = len(self.elements)
        return Circuit(
            self.elements + other.elements,
            self.loss_points + tuple(i + off for i in other.loss_points),
            self.name,
        )

    def _runs(self):
        """Split into maximal runs of loss-free linear elements and single others."""
        run: list[int] = []
        for i, el in enumerate(self.elements):
            if isinstance(el, LinearElement) and i not in self.loss_points:
                run.append(i)
                continue
            if run:
                yield run
                run = []
            yield [i]
        if run:
            yield run

    def propagate(self, s: PhotonState) -> Propagation:
        start = s.squared_norm()
        lost = 0.0
        for run in self._runs():
            lossy = run[0] in self.loss_points
            before = s.squared_norm() if lossy else 0.0
            try:
                if len(run) == 1:
                    s = self.elements[run[0]].apply(s)
                else:
                    s = self._substitute(run, s)
            except BellDiscError as exc:
                i = run[getattr(exc, "stage", 0)] if len(run) > 1 else run[0]
                err = type(exc)(f"element {i} ({self.elements[i].kind}): {exc}")
                err.element_index = i
                raise err from exc
            if lossy:
                lost += before - s.squared_norm()
        return Propagation(s, start - s.squared_norm(), lost)

    def _substitute(self, run: list[int], s: PhotonState) -> PhotonState:
        # A plan depends only on the run and the modes it must cover; keep one
        # per run and widen it when a state brings modes it has not seen.
        cache = self.__dict__.setdefault("_plans", {})
        key = tuple(run)
        universe = s.packed()[0]
        images = [self.elements[i].image for i in run]
        seen, plan = cache.get(key, (frozenset(), None))
        if plan is None or not seen.issuperset(universe):
            seen = seen | frozenset(universe)
            plan = compile_substitution(sorted(seen), images)
            cache[key] = (seen, plan)
        return substitute_many(s, images, plan)

    def apply(self, s: PhotonState) -> tuple[PhotonState, float]:
        """Run the circuit; returns (output state, discarded probability)."""
        p = self.propagate(s)
        return p.state, p.discarded

    def to_dict(self) -> dict:
        d: dict[str, Any] = {"schema_version": SCHEMA_VERSION}
        if self.name:
            d["name"] = self.name
        d["elements"] = [e.to_dict() for e in self.elements]
        d["loss_points"] = list(self.loss_points)
        return d


def apply(c: Circuit, s: PhotonState) -> tuple[PhotonState, float]:
    return c.apply(s)


def serialize_circuit(c: Circuit, indent: int | None = 2) -> str:
    return json.dumps(c.to_dict(), indent=indent, sort_keys=False)


def circuit_from_dict(doc: Any) -> Circuit:
    if not isinstance(doc, dict):
        raise ParseError("document must be an object")
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ParseError(f"unsupported schema_version {version!r}", "$.schema_version")
    elems = doc.get("elements")
    if not isinstance(elems, list):
        raise ParseError("'elements' must be a list", "$.elements")
    parsed = []
    for i, e in enumerate(elems):
        where = f"$.elements[{i}]"
        if not isinstance(e, dict):
            raise ParseError("element must be an object", where)
        kind = e.get("kind")
        if kind not in _REQUIRED:
            raise ParseError(f"unknown kind {kind!r}", f"{where}.kind")
        for key in _REQUIRED[kind]:
            if key not in e:
                raise ParseError(f"missing field {key!r}", f"{where}.{key}")
        try:
            parsed.append(element_from_dict(e))
        except (BellDiscError, ValueError, TypeError, KeyError) as exc:
            raise ParseError(str(exc), where) from exc
    loss = doc.get("loss_points")
    if loss is not None:
        if not isinstance(loss, list) or not all(isinstance(i, int) and 0 <= i < len(parsed) for i in loss):
            raise ParseError("loss_points must list element indices", "$.loss_points")
    name = doc.get("name", "")
    if not isinstance(name, str):
        raise ParseError("name must be a string", "$.name")
    return Circuit(tuple(parsed), None if loss is None else tuple(loss), name)


def parse_circuit(text: str) -> Circuit:
    """Parse a circuit document; raises :class:`ParseError` with a JSON path."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg} at line {exc.lineno}") from exc
    return circuit_from_dict(doc)


def compose(parts: Sequence[Circuit], name: str = "") -> Circuit:
    out = Circuit(name=name)
    for p in parts:
        out = out + p
    return Circuit(out.elements, out.loss_points, name)
