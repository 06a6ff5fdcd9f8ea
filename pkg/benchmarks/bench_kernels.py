"""Compare the numba kernels against their numpy fallbacks.

Usage::

    python benchmarks/bench_kernels.py [--repeat N]

Each case is warmed up once per backend (so JIT compilation is excluded) and
then timed as the best of ``--repeat`` runs.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from belldisc import _accel, kernels, protocols
from belldisc.optimizer import ReckNetwork, realize


def _expand_case(rng: np.random.Generator):
    n_modes, n = 16, 4
    rows = np.sort(rng.integers(0, n_modes, size=(400, n)), axis=1)
    coeffs = rng.normal(size=400) + 1j * rng.normal(size=400)
    counts = rng.integers(1, 5, size=n_modes)
    ptr = np.r_[0, np.cumsum(counts)]
    out = rng.integers(0, n_modes, size=ptr[-1])
    coef = rng.normal(size=ptr[-1]) + 1j * rng.normal(size=ptr[-1])
    return lambda: kernels.expand(rows, coeffs, ptr, out, coef, n_modes)


def _pair_case(rng: np.random.Generator):
    n = 8
    k = n * (n - 1) // 2
    u = realize(ReckNetwork(n, np.concatenate([rng.uniform(0, 1, k), rng.uniform(0, 6, k + n)])))
    mats = np.triu(rng.normal(size=(4, n, n)) + 1j * rng.normal(size=(4, n, n)))
    return lambda: kernels.pair_probabilities(u, mats)


def _protocol_case(pid: str, params: dict):
    return lambda: protocols.build(pid, params).analyze()


CASES = {
    "expand (400 monomials, 16 modes)": _expand_case,
    "pair_probabilities (8 modes)": _pair_case,
    "analyze hyper_polarization": lambda rng: _protocol_case("hyper_polarization", {"theta": 0.4}),
    "analyze ancilla, 2 pairs": lambda rng: _protocol_case("ancilla", {"theta1": 0.3, "theta2": 0.9, "pairs": 2}),
}


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()

    backends = ["numpy"] + (["numba"] if _accel.HAVE_NUMBA else [])
    before = _accel.backend()
    print(f"{'case':<36}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) == 2 else ""))
    try:
        for name, make in CASES.items():
            fn = make(np.random.default_rng(0))
            row = []
            for b in backends:
                _accel.set_backend(b)
                fn()  # warm-up
                row.append(best_of(fn, args.repeat))
            line = f"{name:<36}" + "".join(f"{t * 1e3:>10.2f}ms" for t in row)
            if len(row) == 2:
                line += f"{row[0] / row[1]:>11.1f}x"
            print(line)
    finally:
        _accel.set_backend(before)


if __name__ == "__main__":
    main()
