"""Few-photon states as polynomials in creation operators.

A state is a finite sum ``sum_M c_M * M |0>`` where each monomial ``M`` is a
multiset of modes. Amplitudes are the polynomial coefficients, not occupation
ket amplitudes, so every probability carries the bosonic weight
``prod_m n_m!`` of the monomial.
"""
from __future__ import annotations

import dataclasses
import functools
import math
import re
from dataclasses import dataclass
from types import MappingProxyType
from typing import Callable, Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import kernels
from .errors import BellDiscError, BindingError, CapacityError, ShapeError

MAX_PHOTONS = 8
MAX_MODES = 32
PRUNE = 1e-14

POLARIZATIONS = ("H", "V", "-")
OAM_VALUES = ("+1", "-1", "0", "-")
TIME_TAGS = ("-", "th", "tv")
BANDS = ("f", "d")

_PHOTON_RE = re.compile(r"^(.*?)(\d+)$")


@dataclass(frozen=True, order=True)
class Mode:
    """One bosonic mode, labelled by path, polarization, OAM, time tag and band.

    ``"-"`` marks an absent degree of freedom. Band is ``"f"`` (fundamental)
    or ``"d"`` (frequency doubled). The trailing digits of ``path`` name the
    photon the mode belongs to; a path made only of digits means "photon k,
    path not specified" and is how single-DOF factors are written before
    :func:`tensor` joins them.
    """

    path: str
    pol: str = "-"
    oam: str = "-"
    tag: str = "-"
    band: str = "f"

    def __post_init__(self):
        if not self.path or ":" in self.path:
            raise ValueError(f"bad path label {self.path!r}")
        if self.pol not in POLARIZATIONS:
            raise ValueError(f"bad polarization {self.pol!r}")
        if self.oam not in OAM_VALUES:
            raise ValueError(f"bad OAM value {self.oam!r}")
        if self.tag not in TIME_TAGS:
            raise ValueError(f"bad time tag {self.tag!r}")
        if self.band not in BANDS:
            raise ValueError(f"bad band {self.band!r}")

    @property
    def photon(self) -> int | None:
        m = _PHOTON_RE.match(self.path)
        return int(m.group(2)) if m else None

    @property
    def path_prefix(self) -> str:
        m = _PHOTON_RE.match(self.path)
        return m.group(1) if m else self.path

    def replace(self, **changes) -> "Mode":
        return dataclasses.replace(self, **changes)

    def label(self) -> str:
        return ":".join((self.path, self.pol, self.oam, self.tag, self.band))

    @classmethod
    def parse(cls, text: str) -> "Mode":
        """Parse ``"path:pol:oam:tag:band"``; trailing fields may be omitted."""
        parts = text.split(":")
        if not 1 <= len(parts) <= 5:
            raise ValueError(f"bad mode label {text!r}")
        parts += ["-"] * (5 - len(parts))
        path, pol, oam, tag, band = parts
        return cls(path, pol, oam, tag, "f" if band == "-" else band)

    def __str__(self) -> str:
        s = self.path
        if self.pol != "-":
            s += self.pol
        if self.oam != "-":
            s += f"[l={self.oam}]"
        if self.tag != "-":
            s += f"@{self.tag}"
        if self.band == "d":
            s += "(2w)"
        return s


def as_mode(m: Mode | str) -> Mode:
    return m if isinstance(m, Mode) else Mode.parse(m)


@dataclass(frozen=True)
class Monomial:
    """Sorted multiset of modes: one product of creation operators."""

    modes: tuple[Mode, ...]

    @property
    def photon_number(self) -> int:
        return len(self.modes)

    def counts(self) -> dict[Mode, int]:
        out: dict[Mode, int] = {}
        for m in self.modes:
            out[m] = out.get(m, 0) + 1
        return out

    @functools.cached_property
    def weight(self) -> int:
        """Bosonic norm factor prod n_m! of this monomial."""
        w = 1
        for n in self.counts().values():
            w *= math.factorial(n)
        return w

    def __iter__(self) -> Iterator[Mode]:
        return iter(self.modes)

    def __len__(self) -> int:
        return len(self.modes)

    def __str__(self) -> str:
        parts = []
        for m, n in self.counts().items():
            parts.append(f"{m}^{n}" if n > 1 else str(m))
        return "*".join(parts)


def normal_form(modes: Iterable[Mode | str]) -> Monomial:
    ms = tuple(sorted(as_mode(m) for m in modes))
    if not 1 <= len(ms) <= MAX_PHOTONS:
        raise CapacityError(f"monomial with {len(ms)} photons (supported 1..{MAX_PHOTONS})")
    return Monomial(ms)


def row_weights(rows: np.ndarray) -> np.ndarray:
    """Bosonic weights prod n_m! for a (terms, n) array of sorted mode indices."""
    w = np.ones(rows.shape[0])
    run = np.ones(rows.shape[0])
    for k in range(1, rows.shape[1]):
        run = np.where(rows[:, k] == rows[:, k - 1], run + 1, 1.0)
        w *= run
    return w


class PhotonState:
    """Immutable superposition of monomials with complex amplitudes.

    A state is backed either by a ``{Monomial: amplitude}`` dict or by packed
    arrays (a sorted mode list plus, per photon number, an index array and an
    amplitude vector). Large intermediate states stay packed; the dict is
    built on first access to :attr:`terms`.
    """

    __slots__ = ("_terms", "_packed", "_norm")

    def __init__(self, terms: Mapping[Monomial, complex] | None = None):
        clean = {}
        for mon, c in (terms or {}).items():
            c = complex(c)
            if abs(c) >= PRUNE:
                clean[mon] = c
        n_modes = len({m for mon in clean for m in mon.modes})
        if n_modes > MAX_MODES:
            raise CapacityError(f"state spans {n_modes} modes (max {MAX_MODES})")
        self._terms = MappingProxyType(clean)
        self._packed = None
        self._norm = None

    @classmethod
    def from_packed(cls, universe: Sequence[Mode], groups: Mapping[int, tuple[np.ndarray, np.ndarray]]):
        """Wrap packed arrays; rows must be sorted and amplitudes already pruned."""
        used = set()
        for rows, _ in groups.values():
            used.update(np.unique(rows).tolist())
        if len(used) > MAX_MODES:
            raise CapacityError(f"state spans {len(used)} modes (max {MAX_MODES})")
        obj = cls.__new__(cls)
        obj._terms = None
        obj._packed = (tuple(universe), {n: g for n, g in groups.items() if g[0].shape[0]})
        obj._norm = None
        return obj

    def packed(self) -> tuple[tuple[Mode, ...], dict[int, tuple[np.ndarray, np.ndarray]]]:
        """Packed view ``(universe, {n: (rows, amplitudes)})``."""
        if self._packed is None:
            universe = tuple(sorted(self.modes()))
            index = {m: i for i, m in enumerate(universe)}
            groups: dict[int, list] = {}
            for mon, c in self._terms.items():
                groups.setdefault(mon.photon_number, []).append(([index[m] for m in mon.modes], c))
            self._packed = (universe, {
                n: (np.array([r for r, _ in g], np.int64), np.array([c for _, c in g], np.complex128))
                for n, g in groups.items()
            })
        return self._packed

    @classmethod
    def from_terms(cls, terms: Iterable[tuple[complex, Sequence[Mode | str]]]) -> "PhotonState":
        acc: dict[Monomial, complex] = {}
        for c, modes in terms:
            mon = normal_form(modes)
            acc[mon] = acc.get(mon, 0) + c
        return cls(acc)

    @property
    def terms(self) -> Mapping[Monomial, complex]:
        if self._terms is None:
            universe, groups = self._packed
            acc = {}
            for rows, vals in groups.values():
                for row, v in zip(rows.tolist(), vals.tolist()):
                    acc[Monomial(tuple(universe[j] for j in row))] = v
            self._terms = MappingProxyType(acc)
        return self._terms

    def __iter__(self):
        return iter(self.terms.items())

    def __len__(self) -> int:
        if self._terms is None:
            return sum(rows.shape[0] for rows, _ in self._packed[1].values())
        return len(self._terms)

    def __bool__(self) -> bool:
        return len(self) > 0

    def __getitem__(self, mon: Monomial | Sequence[Mode | str]) -> complex:
        if not isinstance(mon, Monomial):
            mon = normal_form(mon)
        return self.terms.get(mon, 0j)

    def modes(self) -> set[Mode]:
        if self._terms is None:
            universe, groups = self._packed
            used = set()
            for rows, _ in groups.values():
                used.update(np.unique(rows).tolist())
            return {universe[i] for i in used}
        return {m for mon in self._terms for m in mon.modes}

    def __add__(self, other: "PhotonState") -> "PhotonState":
        return add(self, other)

    def __sub__(self, other: "PhotonState") -> "PhotonState":
        return add(self, scale(other, -1))

    def __neg__(self) -> "PhotonState":
        return scale(self, -1)

    def __mul__(self, z: complex) -> "PhotonState":
        return scale(self, z)

    __rmul__ = __mul__

    def squared_norm(self) -> float:
        if self._norm is None:
            if self._terms is None:
                self._norm = float(sum(
                    np.sum(np.abs(vals) ** 2 * row_weights(rows)) for rows, vals in self._packed[1].values()
                ))
            else:
                self._norm = float(sum(abs(c) ** 2 * mon.weight for mon, c in self._terms.items()))
        return self._norm

    def __repr__(self) -> str:
        if not self:
            return "PhotonState(0)"
        body = " + ".join(f"({c:.6g})*{mon}" for mon, c in sorted(self.terms.items(), key=lambda kv: kv[0].modes))
        return f"PhotonState({body})"


def state(*terms: tuple[complex, Sequence[Mode | str]]) -> PhotonState:
    """Shorthand: ``state((0.6, ["a1", "a2"]), (0.8, ["b1", "b2"]))``."""
    return PhotonState.from_terms(terms)


def add(s: PhotonState, t: PhotonState) -> PhotonState:
    acc = dict(s.terms)
    for mon, c in t.terms.items():
        acc[mon] = acc.get(mon, 0) + c
    return PhotonState(acc)


def scale(s: PhotonState, z: complex) -> PhotonState:
    return PhotonState({mon: c * z for mon, c in s.terms.items()})


def product(s: PhotonState, t: PhotonState) -> PhotonState:
    """Operator product: monomials are concatenated, amplitudes multiplied."""
    acc: dict[Monomial, complex] = {}
    for ms, cs in s.terms.items():
        for mt, ct in t.terms.items():
            mon = normal_form(ms.modes + mt.modes)
            acc[mon] = acc.get(mon, 0) + cs * ct
    return PhotonState(acc)


def _merge_labels(a: Mode, b: Mode) -> Mode:
    if a.path_prefix and b.path_prefix and a.path != b.path:
        raise BindingError(f"conflicting paths {a.path!r} and {b.path!r}")
    path = a.path if a.path_prefix else b.path
    fields = {}
    for name in ("pol", "oam", "tag"):
        x, y = getattr(a, name), getattr(b, name)
        if x != "-" and y != "-" and x != y:
            raise BindingError(f"conflicting {name} labels {x!r} and {y!r}")
        fields[name] = x if x != "-" else y
    if a.band != b.band:
        raise BindingError(f"conflicting bands {a.band!r} and {b.band!r}")
    return Mode(path, band=a.band, **fields)


def _merge_monomials(ms: Monomial, mt: Monomial) -> Monomial:
    by_photon: dict[int, Mode] = {}
    loose: list[Mode] = []
    for m in ms.modes:
        k = m.photon
        if k is None or k in by_photon:
            loose.append(m)
        else:
            by_photon[k] = m
    out = list(loose)
    for m in mt.modes:
        k = m.photon
        if k is not None and k in by_photon:
            out.append(_merge_labels(by_photon.pop(k), m))
        else:
            out.append(m)
    out.extend(by_photon.values())
    return normal_form(out)


def tensor(s: PhotonState, t: PhotonState) -> PhotonState:
    """Join two descriptions of the same photons degree of freedom by degree of freedom.

    Modes of the two factors that belong to the same photon (same trailing
    index in the path label) are fused into one mode carrying the labels of
    both, so ``a1 (x) h1`` becomes the single mode ``(a1, H)``. Photons that
    appear on one side only are multiplied in unchanged, which makes
    ``tensor`` a plain product for factors describing different photons.
    """
    acc: dict[Monomial, complex] = {}
    for ms, cs in s.terms.items():
        for mt, ct in t.terms.items():
            mon = _merge_monomials(ms, mt)
            acc[mon] = acc.get(mon, 0) + cs * ct
    return PhotonState(acc)


def inner_product(s: PhotonState, t: PhotonState) -> complex:
    small, big = (s, t) if len(s) <= len(t) else (t, s)
    total = 0j
    for mon, c in small.terms.items():
        d = big.terms.get(mon)
        if d is None:
            continue
        cs, ct = (c, d) if small is s else (d, c)
        total += cs.conjugate() * ct * mon.weight
    return total


def squared_norm(s: PhotonState) -> float:
    return s.squared_norm()


def max_abs_diff(s: PhotonState, t: PhotonState) -> float:
    """Largest amplitude difference over the union of monomials."""
    keys = set(s.terms) | set(t.terms)
    return max((abs(s[k] - t[k]) for k in keys), default=0.0)


ImageFn = Callable[[Mode], "Sequence[tuple[Mode, complex]] | None"]


def substitute(s: PhotonState, image: ImageFn) -> PhotonState:
    """Replace each creation operator by a linear combination and expand.

    ``image(mode)`` returns ``[(out_mode, coeff), ...]`` or ``None`` to leave
    the mode untouched. An empty list annihilates the mode (a discarded arm).
    """
    return substitute_many(s, [image])


def compile_substitution(in_modes: Iterable[Mode], images: Sequence[ImageFn]):
    """Precompute the sparse stage tables used by :func:`substitute_many`.

    The result depends only on the input mode set and the image functions,
    so callers that push several states with the same modes can reuse it.
    """
    reach = set(in_modes)
    tables: list[dict[Mode, object]] = []
    for fn in images:
        tab: dict[Mode, object] = {}
        new = set()
        for m in reach:
            try:
                img = fn(m)
            except BellDiscError as exc:  # deferred until the mode is known to be present
                tab[m] = exc
                continue
            if img is not None:
                img = [(o, complex(c)) for o, c in img if c != 0]
                tab[m] = img
                new.update(o for o, _ in img)
        tables.append(tab)
        reach |= new
    universe = sorted(reach)
    base = max(len(universe), 1)
    if base > kernels.MAX_KEY_BASE:
        raise CapacityError(f"substitution touches {base} modes")
    index = {m: i for i, m in enumerate(universe)}

    csr = []
    for tab in tables:
        ptr = np.zeros(base + 1, np.int64)
        outs, cfs, failed = [], [], {}
        for i, m in enumerate(universe):
            img = tab.get(m)
            if isinstance(img, Exception):
                failed[i] = img
                img = []
            elif img is None:
                img = [(m, 1.0)]
            ptr[i + 1] = ptr[i] + len(img)
            outs.extend(index[o] for o, _ in img)
            cfs.extend(c for _, c in img)
        csr.append((ptr, np.asarray(outs, np.int64), np.asarray(cfs, np.complex128), failed))
    return universe, index, csr


def substitute_many(s: PhotonState, images: Sequence[ImageFn], plan=None) -> PhotonState:
    """Apply several substitutions in turn without leaving packed-array form.

    Equivalent to calling :func:`substitute` once per entry but cheaper for
    many-photon states, since monomials are only turned back into objects at
    the end. An exception raised by ``images[k]`` for a mode that is actually
    present at stage ``k`` is re-raised with a ``stage`` attribute.

    Args:
        s: Input state.
        images: Image functions, applied in order.
        plan: Optional result of :func:`compile_substitution` for the modes of ``s``.
    """
    if not s or not images:
        return s
    in_universe, in_groups = s.packed()
    universe, index, csr = plan if plan is not None else compile_substitution(in_universe, images)
    base = max(len(universe), 1)
    remap = np.array([index[m] for m in in_universe], np.int64)

    out_groups = {}
    for n, (rows, vals) in sorted(in_groups.items()):
        rows = remap[rows]
        for stage, (ptr, img_out, img_coef, failed) in enumerate(csr):
            if rows.shape[0] == 0:
                break
            if failed:
                present = set(np.unique(rows).tolist())
                for i, exc in failed.items():
                    if i in present:
                        exc.stage = stage
                        raise exc
            keys, vals = kernels.expand(rows, vals, ptr, img_out, img_coef, base)
            keys, vals = kernels.reduce_terms(keys, vals, PRUNE)
            rows = kernels.decode_keys(keys, n, base)
        out_groups[n] = (rows, vals)
    return PhotonState.from_packed(universe, out_groups)


def apply_mode_map(
    s: PhotonState,
    modes: Sequence[Mode | str],
    matrix,
    out_modes: Sequence[Mode | str] | None = None,
) -> PhotonState:
    """Apply a linear map given as columns over an ordered mode list.

    Column ``j`` of ``matrix`` is the image of ``modes[j]`` expanded over
    ``out_modes`` (defaults to ``modes``). Modes outside ``modes`` pass
    through unchanged.
    """
    modes = [as_mode(m) for m in modes]
    outs = modes if out_modes is None else [as_mode(m) for m in out_modes]
    mat = np.asarray(matrix, dtype=np.complex128)
    if mat.ndim != 2 or mat.shape != (len(outs), len(modes)):
        raise ShapeError(f"matrix shape {mat.shape} does not match {len(outs)}x{len(modes)} binding")
    if len(set(modes)) != len(modes):
        raise ShapeError("duplicate modes in binding")
    column = {m: j for j, m in enumerate(modes)}

    def image(m: Mode):
        j = column.get(m)
        if j is None:
            return None
        return [(outs[i], mat[i, j]) for i in range(len(outs)) if mat[i, j] != 0]

    return substitute(s, image)
