"""Unambiguous discrimination: event partition, success probabilities, closed forms."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .detection import DetectorSpec, event_matrix
from .errors import DomainError, InputError
from .fock import PhotonState

TAU_ZERO = 1e-12
TAU_POS = 1e-10


@dataclass
class DiscriminationReport:
    """Event table and unambiguous partition for a set of candidate states.

    ``table[e][i]`` is P(event e | state i), conditioned on the photons
    surviving every loss point (see ``lost``). ``raw_table`` holds the
    unconditioned values.
    """

    inputs: list[str]
    priors: list[float]
    events: list[str]
    table: np.ndarray
    raw_table: np.ndarray
    lost: list[float]
    unambiguous_map: dict[str, str]
    per_state_success: list[float]
    success_probability: float
    raw_success: float
    meta: dict = field(default_factory=dict)

    def unambiguous_events(self, state_id: str) -> list[str]:
        return [e for e, i in self.unambiguous_map.items() if i == state_id]

    def to_dict(self) -> dict:
        return {
            "inputs": list(self.inputs),
            "priors": list(self.priors),
            "success_probability": self.success_probability,
            "raw_success": self.raw_success,
            "per_state_success": dict(zip(self.inputs, self.per_state_success)),
            "lost": dict(zip(self.inputs, self.lost)),
            "unambiguous_map": dict(self.unambiguous_map),
            "events": [
                {"event": e, "probabilities": dict(zip(self.inputs, map(float, row)))}
                for e, row in zip(self.events, self.table)
            ],
            "meta": dict(self.meta),
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["event", *self.inputs, "unambiguous_for"])
        for e, row in zip(self.events, self.table):
            w.writerow([e, *(f"{p:.15g}" for p in row), self.unambiguous_map.get(e, "")])
        return buf.getvalue()


def classify(table: np.ndarray, tau_zero: float = TAU_ZERO, tau_pos: float = TAU_POS) -> np.ndarray:
    """Index of the state each event identifies, or -1 when ambiguous/dead."""
    table = np.asarray(table, float)
    n_ev, n_st = table.shape if table.size else (0, 0)
    out = np.full(n_ev, -1, dtype=int)
    if n_st == 0:
        return out
    pos = table > tau_pos
    small = table < tau_zero
    ok = (pos.sum(axis=1) == 1) & (small.sum(axis=1) == n_st - 1)
    out[ok] = np.argmax(pos[ok], axis=1)
    return out


def analyze(
    outputs: Sequence[tuple[str, PhotonState]],
    detectors: DetectorSpec,
    priors: Sequence[float] | None = None,
    lost: Sequence[float] | None = None,
    tau_zero: float = TAU_ZERO,
    tau_pos: float = TAU_POS,
) -> DiscriminationReport:
    """Build the event table and unambiguous partition.

    Args:
        outputs: ``(state id, output state)`` pairs.
        detectors: Detector model used to group monomials into events.
        priors: Prior per state; uniform when omitted.
        lost: Probability removed at loss points for each state. Event
            probabilities are conditioned on survival, i.e. divided by
            ``1 - lost``. Omit for loss-free circuits.
        tau_zero: Below this a probability counts as zero.
        tau_pos: Above this a probability counts as a signature.

    Raises:
        InputError: Duplicate ids, bad priors or bad loss values.
    """
    ids = [str(i) for i, _ in outputs]
    if len(set(ids)) != len(ids):
        raise InputError(f"duplicate state ids in {ids}")
    n = len(ids)
    if priors is None:
        priors = [1.0 / n] * n if n else []
    priors = [float(p) for p in priors]
    if len(priors) != n or any(p < 0 for p in priors) or (n and abs(sum(priors) - 1) > 1e-12):
        raise InputError("priors must be non-negative, one per state, summing to 1")
    lost = [0.0] * n if lost is None else [float(x) for x in lost]
    if len(lost) != n or any(not (-1e-12 <= x < 1) for x in lost):
        raise InputError("lost must hold one value in [0, 1) per state")

    events, raw = event_matrix([s for _, s in outputs], detectors, labels=True)
    kept = np.array([1.0 - x for x in lost])
    table = raw / kept if n else raw
    owner = classify(table, tau_zero, tau_pos)

    pri = np.asarray(priors)
    per_state = np.zeros(n)
    raw_per_state = np.zeros(n)
    umap = {}
    for e, i in enumerate(owner):
        if i >= 0:
            per_state[i] += table[e, i]
            raw_per_state[i] += raw[e, i]
            umap[events[e]] = ids[i]
    return DiscriminationReport(
        inputs=ids,
        priors=priors,
        events=events,
        table=table,
        raw_table=raw,
        lost=lost,
        unambiguous_map=umap,
        per_state_success=per_state.tolist(),
        success_probability=float(pri @ per_state) if n else 0.0,
        raw_success=float(pri @ raw_per_state) if n else 0.0,
        meta={"detectors": detectors.to_dict(), "tau_zero": tau_zero, "tau_pos": tau_pos},
    )


def _check_open(name: str, value: float) -> None:
    if not (0.0 < value < math.pi / 2):
        raise DomainError(f"{name}={value} outside (0, pi/2)")


CLOSED_FORMS = ("hyper_momentum", "hyper_polarization", "hyper_oam", "timebin",
                "ancilla", "ancilla_general", "ancilla_equal", "sfg", "baseline")


def closed_form(protocol: str, theta: float | None = None, theta1: float | None = None,
                theta2: float | None = None) -> float:
    """Success probability predicted by the analytic expression for a protocol.

    Single-parameter protocols read ``theta``. ``ancilla_general`` needs both
    ``theta1`` and ``theta2``, ``ancilla_equal`` reads ``theta2`` (or
    ``theta``), and ``ancilla`` picks between them by whether the two
    parameters coincide. ``sfg`` checks whichever angles are given.

    Raises:
        DomainError: A parameter outside (0, pi/2), or the degenerate
            time-bin point pi/4.
    """
    if protocol in ("hyper_momentum", "hyper_polarization", "hyper_oam"):
        _check_open("theta", theta)
        return 0.5
    if protocol == "baseline":
        _check_open("theta", theta)
        return 0.5 if math.isclose(theta, math.pi / 4, abs_tol=1e-12) else 0.0
    if protocol == "timebin":
        _check_open("theta", theta)
        if math.isclose(theta, math.pi / 4, abs_tol=1e-12):
            raise DomainError("time-bin formula excludes theta = pi/4")
        return (1.0 + math.sin(theta) ** 2) / 4.0
    if protocol == "sfg":
        for nm, v in (("theta1", theta1), ("theta2", theta2), ("theta", theta)):
            if v is not None:
                _check_open(nm, v)
        return 1.0
    if protocol == "ancilla":
        t1 = theta1 if theta1 is not None else theta
        t2 = theta2 if theta2 is not None else t1
        if t1 is not None and math.isclose(t1, t2, abs_tol=1e-12):
            return closed_form("ancilla_equal", theta2=t2)
        return closed_form("ancilla_general", theta1=t1, theta2=t2)
    if protocol == "ancilla_general":
        if theta1 is None or theta2 is None:
            raise DomainError("ancilla_general needs theta1 and theta2")
        _check_open("theta1", theta1)
        _check_open("theta2", theta2)
        c4 = math.cos(4 * theta2)
        return (-2 * c4 - math.cos(2 * theta1) * (c4 + 3) + 6) / 32.0
    if protocol == "ancilla_equal":
        t2 = theta2 if theta2 is not None else theta
        if t2 is None:
            raise DomainError("ancilla_equal needs theta2")
        _check_open("theta2", t2)
        return math.sin(t2) ** 2 * (7 * math.cos(2 * t2) + math.cos(4 * t2) + 10) / 16.0
    raise DomainError(f"no closed form for protocol {protocol!r}")
