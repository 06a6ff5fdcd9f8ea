"""Bell-like polarization states analysed with arrival-time correlations.

Each photon's H and V components take different routes: a balanced beam
splitter with delay ``th`` for H, an unbalanced one with delay ``tv`` for V,
a wave plate per arm, and recombination onto detectors A and B. Pairs that
picked up the same delay are indistinguishable in time and coalesce.

The network's unbalanced transmission and wave-plate settings are not fully
pinned down, so :func:`fit` searches them against the tabulated outputs and
reports the residual; circuit mode is flagged ``unverified`` when it is large.
"""
from __future__ import annotations

import functools
import itertools
import math

import numpy as np
from scipy.optimize import least_squares

from .. import elements as el
from ..circuits import Circuit
from ..detection import DetectorSpec
from ..fock import Mode, Monomial, PhotonState, normal_form, state
from ._base import ProtocolInstance

VERIFY_TOL = 1e-6

DETECTORS = DetectorSpec.named(
    {"Ah1": "A1:H", "Av1": "A1:V", "Bh2": "B2:H", "Bv2": "B2:V"},
    resolved=("path", "pol", "tag"),
)


def inputs(theta: float) -> list[PhotonState]:
    s, c = math.sin(theta), math.cos(theta)

    def two(x, p, y, q):
        return state((x, [f"x1:{p[0]}", f"x2:{p[1]}"]), (y, [f"x1:{q[0]}", f"x2:{q[1]}"]))
    return [two(s, "HV", c, "VH"), two(c, "HV", -s, "VH"), two(s, "HH", c, "VV"), two(c, "HH", -s, "VV")]


def circuit(theta: float, transmission: float | None = None, h_angle: float | None = None,
            v_angle: float = math.pi / 8) -> Circuit:
    """The time-bin network.

    Args:
        theta: State parameter.
        transmission: Transmission of the V-arm beam splitter (default cos^2 theta).
        h_angle: Plate angle in the H arms (default theta/2).
        v_angle: Plate angle in the V arms.
    """
    t = math.cos(theta) ** 2 if transmission is None else transmission
    ha = theta / 2 if h_angle is None else h_angle
    return Circuit([
        el.polarizing_bs([("x1:H", "xh1:H"), ("x1:V", "xv1:V"), ("x2:H", "xh2:H"), ("x2:V", "xv2:V")]),
        el.beam_splitter("xh1", "xh2", 0.5),
        el.beam_splitter("xv1", "xv2", t),
        el.delay("xh1", "H", "th"),
        el.delay("xh2", "H", "th"),
        el.delay("xv1", "V", "tv"),
        el.delay("xv2", "V", "tv"),
        el.hwp("xh1", ha),
        el.hwp("xh2", ha),
        el.hwp("xv1", v_angle),
        el.hwp("xv2", v_angle),
        el.polarizing_bs([
            ("xh1:*:*:th", "A1:*:*:th"), ("xv1:*:*:tv", "A1:*:*:tv"),
            ("xh2:*:*:th", "B2:*:*:th"), ("xv2:*:*:tv", "B2:*:*:tv"),
        ]),
        el.time_coalesce(),
    ], name="timebin")


_DET = {"1": "A1", "2": "B2"}


def _m(code: str) -> str:
    """'h1th' -> 'A1:H:-:th'; 'v2' -> 'B2:V'."""
    pol, k, tag = code[0].upper(), code[1], code[2:] or "-"
    return f"{_DET[k]}:{pol}:-:{tag}"


def _terms(*rows) -> PhotonState:
    return state(*[(coef, [_m(a), _m(b)]) for coef, a, b in rows])


def literal_output(index: int, theta: float) -> PhotonState:
    s, c = math.sin(theta), math.cos(theta)
    C2 = math.cos(2 * theta)
    if index == 1:
        return _terms(
            (c / 2, "h1th", "h1tv"), (-c / 2, "h1th", "v1tv"), (s / 2, "v1th", "h1tv"), (-s / 2, "v1th", "v1tv"),
            (-c * C2 / 2, "h2th", "h1tv"), (c * C2 / 2, "h2th", "v1tv"),
            (-s * C2 / 2, "v2th", "h1tv"), (s * C2 / 2, "v2th", "v1tv"),
            (-c * c * s, "h2th", "h2tv"), (c * c * s, "h2th", "v2tv"),
            (-s * s * c, "v2th", "h2tv"), (s * s * c, "v2th", "v2tv"),
        )
    if index == 2:
        return _terms(
            (-c / 2, "h1th", "h2tv"), (-c / 2, "h1th", "v2tv"), (s / 2, "v1th", "h2tv"), (-s / 2, "v1th", "v2tv"),
            (c * C2 / 2, "h2th", "h2tv"), (-c * C2 / 2, "h2th", "v2tv"),
            (s * C2 / 2, "v2th", "h2tv"), (-s * C2 / 2, "v2th", "v2tv"),
            (-c * c * s, "h2th", "h1tv"), (c * c * s, "h2th", "v1tv"),
            (-s * s * c, "v2th", "h1tv"), (s * s * c, "v2th", "v1tv"),
        )
    if index == 3:
        d = s * s * c - c * c * s
        return _terms(
            (s * c * c, "h1", "h1"), (-s * c * c, "h2", "h2"), (s / 2, "v1", "v1"), (-s / 2, "v2", "v2"),
            (d, "h1", "v1"), (-d, "h2", "v2"),
            (-c * C2 / 2, "h1", "h2"), (c * C2 / 2, "h1", "v2"), (c * C2 / 2, "v1", "h2"), (-c * C2 / 2, "v1", "v2"),
        )
    if index == 4:
        e = s * s * c + c * c * s
        return _terms(
            (c * C2 / 2, "h1", "h1"), (-c * C2 / 2, "h2", "h2"), (e, "h1", "v1"), (-e, "h2", "v2"),
            (s * C2 / 2, "h1", "h2"), (-s * C2 / 2, "h1", "v2"), (-s * C2 / 2, "v1", "h2"), (s * C2 / 2, "v1", "v2"),
        )
    raise KeyError(index)


def _output_basis() -> list[Monomial]:
    """Every two-photon monomial the network can emit, in a fixed order."""
    modes = [Mode(p, pol, tag=t) for p in ("A1", "B2") for pol in ("H", "V") for t in ("-", "th", "tv")]
    return [normal_form(pair) for pair in itertools.combinations_with_replacement(modes, 2)]


def _residual_vector(outs: list[PhotonState], refs: list[PhotonState], basis: list[Monomial]) -> np.ndarray:
    """Amplitude differences after aligning each state's global phase."""
    parts = []
    for out, ref in zip(outs, refs):
        a = np.array([out[k] for k in basis], complex)
        b = np.array([ref[k] for k in basis], complex)
        ov = np.vdot(b, a)
        if abs(ov) > 0:
            a = a * (np.conj(ov) / abs(ov))
        diff = a - b
        parts += [diff.real, diff.imag]
    return np.concatenate(parts)


@functools.lru_cache(maxsize=256)
def fit(theta: float) -> dict:
    """Fit the V-arm transmission and both plate angles to the tabulated outputs.

    A robust (Cauchy) fit first flags amplitudes that no setting reproduces;
    those are then excluded and the rest refit by ordinary least squares.

    Returns:
        Dict with the fitted ``transmission``, ``h_angle``, ``v_angle``, the
        maximum absolute amplitude ``residual`` over all terms, the number of
        ``outliers`` excluded from the refit and a ``verified`` flag.
    """
    ins = inputs(theta)
    refs = [literal_output(k, theta) for k in range(1, 5)]
    basis = _output_basis()

    def resid(x):
        c = circuit(theta, float(np.clip(x[0], 0.0, 1.0)), x[1], x[2])
        return _residual_vector([c.apply(s)[0] for s in ins], refs, basis)

    bounds = ([0.0, -math.pi, -math.pi], [1.0, math.pi, math.pi])
    tol = dict(xtol=1e-15, ftol=1e-15, gtol=1e-15)
    x0 = np.array([math.cos(theta) ** 2, theta / 2, math.pi / 8])
    rough = least_squares(resid, x0, bounds=bounds, loss="cauchy", f_scale=1e-3, **tol)
    keep = np.abs(resid(rough.x)) <= 1e-3
    sol = least_squares(lambda x: resid(x)[keep], rough.x, bounds=bounds, **tol)
    r = resid(sol.x)
    residual = float(np.max(np.abs(r)))
    return {
        "transmission": float(sol.x[0]),
        "h_angle": float(sol.x[1]),
        "v_angle": float(sol.x[2]),
        "residual": residual,
        "inlier_residual": float(np.max(np.abs(r[keep]), initial=0.0)),
        "outliers": int((~keep).sum()),
        "verified": residual <= VERIFY_TOL,
    }


def build(theta: float, mode: str) -> ProtocolInstance:
    ids = [f"psi{k}" for k in range(1, 5)]
    meta: dict = {}
    if mode == "circuit":
        f = fit(theta)
        circ = circuit(theta, f["transmission"], f["h_angle"], f["v_angle"])
        meta["reconstruction"] = {"status": "verified" if f["verified"] else "unverified", **f}
        lit = ()
    else:
        circ = circuit(theta)
        lit = tuple(literal_output(k, theta) for k in range(1, 5))
    return ProtocolInstance(
        id="timebin",
        params={"theta": theta},
        inputs=tuple(zip(ids, inputs(theta))),
        circuit=circ,
        detectors=DETECTORS,
        mode=mode,
        literal_cut=len(circ),
        literal=lit,
        meta=meta,
    )
