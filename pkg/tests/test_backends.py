"""The numba kernels and their numpy fallbacks must agree."""
import math

import numpy as np
import pytest

from belldisc import _accel, kernels, protocols
from belldisc.optimizer import ReckNetwork, realize

pytestmark = pytest.mark.skipif(not _accel.HAVE_NUMBA, reason="numba not installed")


@pytest.fixture
def restore_backend():
    before = _accel.backend()
    yield
    _accel.set_backend(before)


def _run(name, fn):
    _accel.set_backend(name)
    return fn()


def _reduced(keys, vals):
    return kernels.reduce_terms(keys, vals, 0.0)


@pytest.mark.parametrize("seed", range(10))
def test_expand_agrees(restore_backend, seed):
    rng = np.random.default_rng(seed)
    n_modes, n = 7, int(rng.integers(1, 6))
    rows = np.sort(rng.integers(0, n_modes, size=(12, n)), axis=1)
    coeffs = rng.normal(size=12) + 1j * rng.normal(size=12)
    counts = rng.integers(0, 4, size=n_modes)
    ptr = np.r_[0, np.cumsum(counts)]
    out = rng.integers(0, n_modes, size=ptr[-1])
    coef = rng.normal(size=ptr[-1]) + 1j * rng.normal(size=ptr[-1])
    args = (rows, coeffs, ptr, out, coef, n_modes)
    ka, va = _reduced(*_run("numba", lambda: kernels.expand(*args)))
    kb, vb = _reduced(*_run("numpy", lambda: kernels.expand(*args)))
    assert np.array_equal(ka, kb)
    assert np.abs(va - vb).max(initial=0.0) < 1e-12


@pytest.mark.parametrize("n", [2, 4, 6])
def test_pair_probabilities_agree(restore_backend, n):
    rng = np.random.default_rng(n)
    k = n * (n - 1) // 2
    u = realize(ReckNetwork(n, np.concatenate([rng.uniform(0, 1, k), rng.uniform(0, 6, k + n)])))
    mats = np.triu(rng.normal(size=(3, n, n)) + 1j * rng.normal(size=(3, n, n)))
    a = _run("numba", lambda: kernels.pair_probabilities(u, mats))
    b = _run("numpy", lambda: kernels.pair_probabilities(u, mats))
    assert np.abs(a - b).max() < 1e-12


@pytest.mark.parametrize("pid,params", [
    ("hyper_polarization", {"theta": 0.4}),
    ("timebin", {"theta": 0.3}),
    ("ancilla", {"theta1": 0.3, "theta2": 0.9, "pairs": 2}),
])
def test_protocol_reports_agree(restore_backend, pid, params):
    a = _run("numba", lambda: protocols.build(pid, params).analyze())
    b = _run("numpy", lambda: protocols.build(pid, params).analyze())
    assert a.events == b.events and a.unambiguous_map == b.unambiguous_map
    assert np.abs(a.table - b.table).max() < 1e-12
    assert math.isclose(a.success_probability, b.success_probability, abs_tol=1e-12)


def test_set_backend_validation(restore_backend):
    with pytest.raises(ValueError):
        _accel.set_backend("cuda")
