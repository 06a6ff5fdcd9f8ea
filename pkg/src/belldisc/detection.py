"""Photon-number-resolving detection: events and their probabilities."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .elements import Pattern
from .errors import SpecError
from .fock import Mode, Monomial, PhotonState, row_weights

RESOLVABLE = ("path", "pol", "tag", "band")


@dataclass(frozen=True)
class DetectorSpec:
    """Which labels the detectors resolve and, optionally, named detectors.

    Args:
        resolved: Labels the detectors distinguish. ``path`` is always
            resolved; ``tag`` turns on arrival-time resolution.
        detectors: Optional ``(name, pattern)`` pairs. When given, each
            photon must match exactly one pattern; otherwise the detector
            id is built from the path and (if resolved) the polarization.
    """

    resolved: tuple[str, ...] = ("path", "pol")
    detectors: tuple[tuple[str, Pattern], ...] = ()

    def __post_init__(self):
        bad = set(self.resolved) - set(RESOLVABLE)
        if bad:
            raise SpecError(f"unknown resolved labels {sorted(bad)}")
        object.__setattr__(self, "resolved", tuple(self.resolved))
        object.__setattr__(
            self, "detectors", tuple((str(n), Pattern.parse(p)) for n, p in self.detectors)
        )

    @classmethod
    def named(cls, detectors: Mapping[str, str] | Iterable[tuple[str, str]], resolved=("path", "pol")):
        items = detectors.items() if isinstance(detectors, Mapping) else detectors
        return cls(tuple(resolved), tuple(items))

    def detector_of(self, m: Mode) -> str:
        if self.detectors:
            hits = [n for n, p in self.detectors if p.matches(m)]
            if len(hits) != 1:
                what = "no detector" if not hits else f"detectors {hits}"
                raise SpecError(f"mode {m.label()} reaches {what}")
            return hits[0]
        name = m.path
        if "pol" in self.resolved and m.pol != "-":
            name += m.pol
        if "band" in self.resolved and m.band == "d":
            name += "~d"
        return name

    def arrival_of(self, m: Mode) -> str:
        return m.tag if "tag" in self.resolved else "-"

    def to_dict(self) -> dict:
        d: dict = {"resolved": list(self.resolved)}
        if self.detectors:
            d["detectors"] = {n: p.label() for n, p in self.detectors}
        return d


@dataclass(frozen=True, order=True)
class DetectionEvent:
    """Per-photon clicks: sorted ``(detector, arrival tag)`` pairs."""

    clicks: tuple[tuple[str, str], ...]

    @property
    def photon_number(self) -> int:
        return len(self.clicks)

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for det, _ in self.clicks:
            out[det] = out.get(det, 0) + 1
        return out

    def arrival(self, detector: str) -> str:
        """'same' if every photon in ``detector`` carries one tag, else 'delayed'."""
        tags = {t for d, t in self.clicks if d == detector}
        return "same" if len(tags) <= 1 else "delayed"

    def __str__(self) -> str:
        return event_label(self.clicks)


def event_of(mon: Monomial, spec: DetectorSpec) -> DetectionEvent:
    clicks = sorted((spec.detector_of(m), spec.arrival_of(m)) for m in mon.modes)
    return DetectionEvent(tuple(clicks))


_TAGS = ("-", "th", "tv")


def _fragment(det: str, tags: tuple[str, ...]) -> str:
    n = len(tags)
    if n == 1:
        return det if tags[0] == "-" else f"{det}@{tags[0]}"
    if len(set(tags)) > 1:
        return f"{det}(x{n},delay)"
    return f"{det}(x{n})" if tags[0] == "-" else f"{det}(x{n})@{tags[0]}"


def _click_codes(states: Sequence[PhotonState], spec: DetectorSpec):
    """Integer click code per universe mode of each state, plus detector names.

    Codes are ``detector_rank * 3 + tag_rank`` with detectors ranked by name,
    so sorted code rows order events like sorted click tuples.
    """
    packs = [s.packed() for s in states]
    clicks: dict[Mode, tuple[str, str]] = {}
    for universe, groups in packs:
        used = set()
        for rows, _ in groups.values():
            used.update(np.unique(rows).tolist())
        for i in used:
            m = universe[i]
            if m not in clicks:
                clicks[m] = (spec.detector_of(m), spec.arrival_of(m))
    names = sorted({d for d, _ in clicks.values()})
    rank = {d: k for k, d in enumerate(names)}
    codes = []
    for universe, _ in packs:
        c = np.zeros(len(universe), np.int64)
        for i, m in enumerate(universe):
            if m in clicks:
                d, t = clicks[m]
                c[i] = rank[d] * len(_TAGS) + _TAGS.index(t)
        codes.append(c)
    return packs, codes, names


def event_matrix(states: Sequence[PhotonState], spec: DetectorSpec, labels: bool = False):
    """Vectorised event table.

    Args:
        states: Output states, one column each.
        spec: Detector model.
        labels: Return rendered event strings instead of click tuples.

    Returns:
        ``(events, matrix)`` where ``events`` is ordered by photon number
        then lexicographically, and ``matrix[e, i]`` is the probability of
        event ``e`` for state ``i``.
    """
    packs, codes, names = _click_codes(states, spec)
    by_n: dict[int, list] = {}
    for col, ((_, groups), code) in enumerate(zip(packs, codes)):
        for n, (rows, vals) in groups.items():
            if rows.shape[0] == 0:
                continue
            probs = np.abs(vals) ** 2 * row_weights(rows)
            by_n.setdefault(n, []).append((np.sort(code[rows], axis=1), probs, col))
    base = max(len(names), 1) * len(_TAGS)
    events: list[tuple[tuple[str, str], ...]] = []
    blocks = []
    for n in sorted(by_n):
        weights = base ** np.arange(n - 1, -1, -1, dtype=np.int64)
        parts = by_n[n]
        keys = np.concatenate([c @ weights for c, _, _ in parts])
        probs = np.concatenate([p for _, p, _ in parts])
        cols = np.concatenate([np.full(p.size, k) for _, p, k in parts])
        rows_all = np.concatenate([c for c, _, _ in parts])
        uniq, first, inverse = np.unique(keys, return_index=True, return_inverse=True)
        block = np.zeros((uniq.size, len(states)))
        np.add.at(block, (inverse.ravel(), cols), probs)
        blocks.append(block)
        rows_u = rows_all[first]
        if labels:
            events.extend(_labels_from_codes(rows_u, names))
        else:
            for row in rows_u.tolist():
                events.append(tuple((names[c // len(_TAGS)], _TAGS[c % len(_TAGS)]) for c in row))
    matrix = np.vstack(blocks) if blocks else np.zeros((0, len(states)))
    return events, matrix


def _labels_from_codes(rows: np.ndarray, names: list[str]) -> list[str]:
    k = len(_TAGS)
    dets = rows // k
    cache: dict[tuple[int, ...], str] = {}
    out = []
    for row, drow in zip(rows.tolist(), dets.tolist()):
        parts = []
        i = 0
        while i < len(row):
            j = i + 1
            while j < len(row) and drow[j] == drow[i]:
                j += 1
            seg = tuple(row[i:j])
            frag = cache.get(seg)
            if frag is None:
                frag = cache[seg] = _fragment(names[drow[i]], tuple(_TAGS[c % k] for c in seg))
            parts.append(frag)
            i = j
        out.append("+".join(parts))
    return out


def event_label(clicks: tuple[tuple[str, str], ...]) -> str:
    """Render a click tuple the same way as ``str(DetectionEvent(clicks))``."""
    parts = []
    i = 0
    while i < len(clicks):
        det = clicks[i][0]
        j = i
        while j < len(clicks) and clicks[j][0] == det:
            j += 1
        parts.append(_fragment(det, tuple(t for _, t in clicks[i:j])))
        i = j
    return "+".join(parts)


def enumerate_events(s: PhotonState, spec: DetectorSpec) -> list[tuple[DetectionEvent, float]]:
    """Group monomials by detection event and sum their bosonic weights.

    Probabilities add up to ``s.squared_norm()``.
    """
    events, matrix = event_matrix([s], spec)
    return [(DetectionEvent(e), float(p)) for e, p in zip(events, matrix[:, 0])]


def event_table(states: Sequence[PhotonState], spec: DetectorSpec):
    """Union of events over several states, with one probability column each."""
    events, matrix = event_matrix(states, spec)
    return [DetectionEvent(e) for e in events], matrix.tolist()
