"""Search over triangular beam-splitter meshes for unambiguous discrimination.

The search never works on the strict success directly, since that objective
jumps whenever an event crosses a threshold. It maximises a smooth surrogate
instead: for each event, the best prior-weighted probability minus ``lam``
times the probability mass of every competing state. ``lam`` is raised step
by step from 0, so early stages behave like minimum-error discrimination and
later ones punish ambiguous events. A least-squares polish then drives the
cross-state leakage of the nearly unambiguous events to zero. The returned
value is always the strict one, recomputed through
:func:`belldisc.discrimination.analyze`.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares, minimize

from . import elements as el
from ._accel import max_threads
from .detection import DetectorSpec
from .discrimination import TAU_POS, TAU_ZERO, analyze, classify
from .errors import ParameterError
from .fock import Mode, PhotonState, state
from .kernels import pair_probabilities

LAMBDAS = (0.0, 2.0, 8.0, 32.0, 128.0)
POLISH_SHARE = 0.45
DEFAULT_RESTARTS = 20
SIMPLEX_TOL = 1e-9


def mesh_pairs(n_modes: int) -> list[tuple[int, int]]:
    """Nearest-neighbour beam-splitter positions of the triangular mesh."""
    return [(j, j + 1) for i in range(n_modes - 1) for j in range(n_modes - 2, i - 1, -1)]


@dataclass(frozen=True)
class ReckNetwork:
    """Triangular mesh of N(N-1)/2 beam splitters with phases.

    ``params`` holds the transmissions, then one phase per beam splitter
    (applied to its first input), then one output phase per mode.
    """

    n_modes: int
    params: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))

    @staticmethod
    def n_params(n_modes: int) -> int:
        k = n_modes * (n_modes - 1) // 2
        return 2 * k + n_modes

    @classmethod
    def from_angles(cls, n_modes: int, angles: Sequence[float], out_phases: Sequence[float] | None = None):
        """Build from unconstrained angles: transmission ``cos^2(x)`` then phases."""
        k = n_modes * (n_modes - 1) // 2
        angles = np.asarray(angles, float)
        t = np.cos(angles[:k]) ** 2
        out = np.zeros(n_modes) if out_phases is None else np.asarray(out_phases, float)
        return cls(n_modes, tuple(np.concatenate([t, angles[k:2 * k], out])))

    def transmissions(self) -> tuple[float, ...]:
        return self.params[: self.n_modes * (self.n_modes - 1) // 2]

    def to_dict(self) -> dict:
        return {"n_modes": self.n_modes, "params": list(self.params)}


def _mesh_matrix(n: int, t: np.ndarray, phases: np.ndarray, out_phases: np.ndarray) -> np.ndarray:
    u = np.eye(n, dtype=complex)
    for k, (a, b) in enumerate(mesh_pairs(n)):
        st, sr = math.sqrt(t[k]), math.sqrt(1.0 - t[k])
        ph = np.exp(1j * phases[k])
        ra, rb = u[a].copy(), u[b].copy()
        u[a] = st * ph * ra + sr * rb
        u[b] = sr * ph * ra - st * rb
    return np.exp(1j * out_phases)[:, None] * u


def realize(net: ReckNetwork) -> np.ndarray:
    """Unitary of the mesh; column j is the image of input mode j.

    Raises:
        ParameterError: Wrong parameter count or a transmission outside [0, 1].
    """
    n = net.n_modes
    if n < 1:
        raise ParameterError("n_modes must be positive")
    if len(net.params) != ReckNetwork.n_params(n):
        raise ParameterError(f"expected {ReckNetwork.n_params(n)} parameters for {n} modes, got {len(net.params)}")
    k = n * (n - 1) // 2
    p = np.asarray(net.params, float)
    t = p[:k]
    if np.any(t < 0) or np.any(t > 1):
        raise ParameterError("transmissions must lie in [0, 1]")
    return _mesh_matrix(n, t, p[k:2 * k], p[2 * k:])


def bell_like_states(theta: float) -> list[PhotonState]:
    """The four path-encoded Bell-like states on modes a1, b1, a2, b2."""
    s, c = math.sin(theta), math.cos(theta)
    return [
        state((s, ["a1", "a2"]), (c, ["b1", "b2"])),
        state((c, ["a1", "a2"]), (-s, ["b1", "b2"])),
        state((s, ["a1", "b2"]), (c, ["b1", "a2"])),
        state((c, ["a1", "b2"]), (-s, ["b1", "a2"])),
    ]


class _Problem:
    """Event-table evaluator for a fixed set of inputs on a fixed mode list."""

    def __init__(self, inputs: Sequence[PhotonState], modes: Sequence[Mode], priors: np.ndarray):
        self.inputs = list(inputs)
        self.modes = list(modes)
        self.n = len(self.modes)
        self.priors = priors
        self.k = self.n * (self.n - 1) // 2
        self.real = all(abs(c.imag) < 1e-15 for s in self.inputs for c in s.terms.values())
        self.two_photon = all(
            mon.photon_number == 2 for s in self.inputs for mon in s.terms
        )
        if self.two_photon:
            index = {m: i for i, m in enumerate(self.modes)}
            mats = np.zeros((len(self.inputs), self.n, self.n), complex)
            for si, s in enumerate(self.inputs):
                for mon, c in s.terms.items():
                    p, q = sorted(index[m] for m in mon.modes)
                    mats[si, p, q] += c
            self.mats = mats

    def unitary(self, x: np.ndarray) -> np.ndarray:
        return _mesh_matrix(self.n, np.cos(x[: self.k]) ** 2, x[self.k:], np.zeros(self.n))

    def table(self, x: np.ndarray) -> np.ndarray:
        """(events, states) probability table."""
        u = self.unitary(x)
        if self.two_photon:
            return pair_probabilities(u, self.mats).T
        return analyze(self._outputs(u), self.detectors()).raw_table

    def detectors(self) -> DetectorSpec:
        """One number-resolving detector per mesh mode."""
        return DetectorSpec.named([(m.label(), el.Pattern.parse(m)) for m in self.modes])

    def _outputs(self, u: np.ndarray):
        op = el.effective_map(u, self.modes)
        return [(str(i), op.apply(s)) for i, s in enumerate(self.inputs)]

    def surrogate(self, table: np.ndarray, lam: float) -> float:
        w = table * self.priors
        best = w.max(axis=1)
        return float(np.sum(np.maximum(best - lam * (w.sum(axis=1) - best), 0.0)))

    def strict(self, table: np.ndarray) -> float:
        owner = classify(table)
        ok = owner >= 0
        return float(np.sum(table[ok, owner[ok]] * self.priors[owner[ok]]))


class _Budget(Exception):
    pass


def _restart(problem: _Problem, x0: np.ndarray, budget: int) -> dict:
    """One restart: simplex stages with rising penalty, then a leakage polish.

    For real input amplitudes only the transmissions are searched (all
    phases zero), which halves the dimension; complex inputs search both.
    """
    used = 0
    k = problem.k
    free = k if problem.real else 2 * k

    def table(y):
        nonlocal used
        if used >= budget:
            raise _Budget
        used += 1
        return problem.table(full(y))

    def full(y):
        return y if free == 2 * k else np.concatenate([y, np.zeros(k)])

    y = np.asarray(x0, float)[:free]
    best_y, best_val = y, -1.0
    try:
        best_val = problem.strict(table(y))
        stage_budget = int(budget * (1 - POLISH_SHARE)) // len(LAMBDAS)
        for lam in LAMBDAS:
            if stage_budget < 2:
                break
            y = minimize(lambda z: -problem.surrogate(table(z), lam), y, method="Nelder-Mead",
                         options={"maxfev": stage_budget, "xatol": SIMPLEX_TOL,
                                  "fatol": SIMPLEX_TOL, "adaptive": True}).x
        t = table(y)
        val = problem.strict(t)
        if val > best_val:
            best_y, best_val = y, val
        w = t * problem.priors
        owner = np.argmax(w, axis=1)
        top = w.max(axis=1)
        near = (top - 8.0 * (w.sum(axis=1) - top) > 0) & (top > 1e-4)
        leak = np.ones_like(t, bool)
        leak[np.arange(t.shape[0]), owner] = False
        leak &= near[:, None]
        remaining = budget - used
        if leak.any() and remaining > free + 1:
            pol = least_squares(
                lambda z: np.sqrt(np.abs(table(z)[leak])),
                y, method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                max_nfev=max(1, remaining // (free + 1) - 1),
            )
            val = problem.strict(table(pol.x))
            if val > best_val:
                best_y, best_val = pol.x, val
    except _Budget:
        pass
    return {"x": full(best_y), "success": max(best_val, 0.0), "evaluations": used}


@dataclass
class OptimizeResult:
    """Best network found, its strict success and the per-restart trace.

    Unpacks as ``(network, success, trace)``.
    """

    network: ReckNetwork
    success: float
    trace: list[dict]
    evaluations: int
    modes: list[str]
    seed: int | None
    meta: dict = field(default_factory=dict)

    def __iter__(self):
        return iter((self.network, self.success, self.trace))

    def to_dict(self) -> dict:
        return {
            "success": self.success,
            "network": self.network.to_dict(),
            "modes": list(self.modes),
            "evaluations": self.evaluations,
            "seed": self.seed,
            "trace": self.trace,
            "meta": dict(self.meta),
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def _mode_list(inputs: Sequence[PhotonState], n_modes: int) -> list[Mode]:
    used = sorted({m for s in inputs for m in s.modes()})
    if len(used) > n_modes:
        raise ParameterError(f"inputs occupy {len(used)} modes, more than n_modes={n_modes}")
    taken = {m.path for m in used}
    extra, k = [], 0
    while len(used) + len(extra) < n_modes:
        k += 1
        if f"o{k}" not in taken:
            extra.append(Mode(f"o{k}"))
    return used + extra


def optimize(
    inputs: Sequence[PhotonState],
    n_modes: int,
    priors: Sequence[float] | None = None,
    budget: int = 10_000,
    seed: int | None = 0,
    restarts: int = DEFAULT_RESTARTS,
    threads: int | None = None,
) -> OptimizeResult:
    """Search the mesh parameters for the best unambiguous success.

    Args:
        inputs: Candidate states (at least two).
        n_modes: Mesh size; vacuum modes ``o1, o2, ...`` pad the input modes.
        priors: State priors, uniform by default.
        budget: Total event-table evaluations across all restarts.
        seed: Seed for the uniformly drawn restart points.
        restarts: Number of restarts (capped by ``budget``).
        threads: Worker threads; defaults to ``BELLDISC_THREADS``.

    Returns:
        :class:`OptimizeResult`; ``success`` comes from a fresh
        :func:`~belldisc.discrimination.analyze` of the best network.

    Raises:
        ParameterError: ``budget < 1``, too few modes or bad priors.
    """
    if budget < 1:
        raise ParameterError("budget must be at least 1")
    if len(inputs) < 2:
        raise ParameterError("need at least two input states")
    n = len(inputs)
    pri = np.full(n, 1.0 / n) if priors is None else np.asarray(priors, float)
    if pri.shape != (n,) or np.any(pri < 0) or abs(pri.sum() - 1) > 1e-12:
        raise ParameterError("priors must be non-negative, one per state, summing to 1")
    modes = _mode_list(inputs, n_modes)
    problem = _Problem(inputs, modes, pri)
    dim = 2 * problem.k

    restarts = max(1, min(restarts, budget))
    rng = np.random.default_rng(seed)
    starts = rng.uniform(0.0, math.pi, size=(restarts, dim))
    shares = [budget // restarts + (1 if i < budget % restarts else 0) for i in range(restarts)]

    workers = max(1, min(threads or max_threads(), restarts))
    if workers == 1:
        runs = [_restart(problem, x0, b) for x0, b in zip(starts, shares)]
    else:
        with ThreadPoolExecutor(workers) as pool:
            runs = list(pool.map(lambda a: _restart(problem, *a), zip(starts, shares)))

    trace, best, best_i = [], -1.0, 0
    for i, r in enumerate(runs):
        if r["success"] > best:
            best, best_i = r["success"], i
        trace.append({"restart": i, "success": r["success"], "evaluations": r["evaluations"],
                      "best_so_far": best})
    x = runs[best_i]["x"]
    net = ReckNetwork.from_angles(len(modes), x)
    u = realize(net)
    rep = analyze(problem._outputs(u), problem.detectors(), priors=list(pri))
    return OptimizeResult(
        network=net,
        success=rep.success_probability,
        trace=trace,
        evaluations=sum(r["evaluations"] for r in runs),
        modes=[m.label() for m in modes],
        seed=seed,
        meta={"search_success": best, "restarts": restarts, "tau_zero": TAU_ZERO, "tau_pos": TAU_POS},
    )
