"""Shared protocol plumbing: the instance type and parameter checks."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from ..circuits import Circuit, Propagation
from ..detection import DetectorSpec
from ..discrimination import DiscriminationReport, analyze
from ..errors import ParameterError
from ..fock import Monomial, PhotonState

PROTOCOL_IDS = (
    "hyper_momentum",
    "hyper_polarization",
    "hyper_oam",
    "timebin",
    "ancilla",
    "sfg",
    "baseline",
)
LITERAL_IDS = ("hyper_momentum", "hyper_polarization", "hyper_oam", "timebin")


def check_angle(name: str, value) -> float:
    try:
        v = float(value)
    except (TypeError, ValueError):
        raise ParameterError(f"{name} must be a real number, got {value!r}") from None
    if not (0.0 < v < math.pi / 2):
        raise ParameterError(f"{name}={v} outside (0, pi/2)")
    return v


@dataclass(frozen=True)
class ProtocolInstance:
    """A fully wired protocol: input states, circuit, detectors.

    In ``literal`` mode the circuit elements before ``literal_cut`` are
    skipped and the tabulated output expansions are fed to the remainder.

    Attributes:
        id: Protocol identifier.
        params: Angles (and pair count for the ancilla protocol).
        inputs: ``(state id, input state)`` pairs.
        circuit: Full circuit from inputs to detectors.
        detectors: Detector model.
        mode: ``"circuit"`` or ``"literal"``.
        literal_cut: Index of the first element applied in literal mode.
        literal: Tabulated outputs at the cut (literal mode only).
        meta: Free-form notes, e.g. reconstruction status.
    """

    id: str
    params: dict
    inputs: tuple[tuple[str, PhotonState], ...]
    circuit: Circuit
    detectors: DetectorSpec
    mode: str = "circuit"
    literal_cut: int = 0
    literal: tuple[PhotonState, ...] = ()
    meta: dict = field(default_factory=dict)

    @property
    def ids(self) -> list[str]:
        return [i for i, _ in self.inputs]

    def propagate(self) -> list[Propagation]:
        if self.mode == "literal":
            tail = self.circuit[self.literal_cut:]
            out = []
            for (_, src), lit in zip(self.inputs, self.literal):
                p = tail.propagate(lit)
                # discarded is measured against the true input, not the tabulated state
                out.append(Propagation(p.state, src.squared_norm() - p.state.squared_norm(), p.lost))
            return out
        return [self.circuit.propagate(s) for _, s in self.inputs]

    def cut_outputs(self, conditioned: bool = True) -> list[tuple[str, PhotonState]]:
        """Circuit-mode states at the point where the tabulated outputs apply.

        Args:
            conditioned: Rescale by ``1/sqrt(1 - lost)`` so each state is
                conditioned on surviving the loss points, as tabulated.
        """
        head = self.circuit[:self.literal_cut]
        out = []
        for i, s in self.inputs:
            p = head.propagate(s)
            scale = 1.0 / math.sqrt(1.0 - p.lost) if conditioned and p.lost > 0 else 1.0
            out.append((i, p.state * scale))
        return out

    def outputs(self) -> list[tuple[str, PhotonState]]:
        return [(i, p.state) for i, p in zip(self.ids, self.propagate())]

    def analyze(self, priors: Sequence[float] | None = None) -> DiscriminationReport:
        props = self.propagate()
        rep = analyze(
            [(i, p.state) for i, p in zip(self.ids, props)],
            self.detectors,
            priors=priors,
            lost=[max(p.lost, 0.0) for p in props],
        )
        rep.meta.update(
            protocol=self.id,
            params=dict(self.params),
            mode=self.mode,
            discarded=dict(zip(self.ids, (p.discarded for p in props))),
            **self.meta,
        )
        return rep


def amplitude_residual(out: PhotonState, ref: PhotonState) -> float:
    """Largest amplitude mismatch after removing the best global phase."""
    keys: list[Monomial] = sorted(set(out.terms) | set(ref.terms), key=lambda m: m.modes)
    a = np.array([out[k] for k in keys], complex)
    b = np.array([ref[k] for k in keys], complex)
    overlap = np.vdot(b, a)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.max(np.abs(a - phase * b))) if keys else 0.0
