import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from belldisc import elements as el
from belldisc.detection import DetectorSpec, event_table
from belldisc.errors import ParameterError
from belldisc.fock import Mode
from belldisc.optimizer import ReckNetwork, bell_like_states, mesh_pairs, optimize, realize


def test_mesh_has_triangular_count():
    for n in range(2, 7):
        assert len(mesh_pairs(n)) == n * (n - 1) // 2
    assert ReckNetwork.n_params(4) == 16


def test_two_mode_balanced_splitter():
    u = realize(ReckNetwork(2, [0.5, 0.0, 0.0, 0.0]))
    r = 1 / math.sqrt(2)
    assert np.allclose(u, [[r, r], [r, -r]], atol=1e-15)


def test_full_transmission_is_signed_identity():
    k = 6
    u = realize(ReckNetwork(4, [1.0] * k + [0.0] * (k + 4)))
    assert np.allclose(np.abs(u), np.eye(4))
    assert np.allclose(u @ u.conj().T, np.eye(4), atol=1e-12)


@settings(max_examples=200)
@given(st.integers(2, 6), st.integers(0, 2**32 - 1))
def test_realized_mesh_is_unitary(n, seed):
    rng = np.random.default_rng(seed)
    k = n * (n - 1) // 2
    params = np.concatenate([rng.uniform(0, 1, k), rng.uniform(0, 2 * math.pi, k + n)])
    u = realize(ReckNetwork(n, params))
    assert np.abs(u @ u.conj().T - np.eye(n)).max() < 1e-10


def test_realize_rejects_bad_parameters():
    with pytest.raises(ParameterError):
        realize(ReckNetwork(3, [0.5] * 5))
    with pytest.raises(ParameterError):
        realize(ReckNetwork(2, [1.5, 0, 0, 0]))


def _independent_success(res, inputs):
    """Recompute strict success from the returned parameters without optimizer internals."""
    u = realize(res.network)
    modes = [Mode.parse(m) for m in res.modes]
    op = el.effective_map(u, modes)
    spec = DetectorSpec.named([(m.label(), el.Pattern.parse(m)) for m in modes])
    _, table = event_table([op.apply(s) for s in inputs], spec)
    total = 0.0
    for row in table:
        pos = [i for i, p in enumerate(row) if p > 1e-10]
        if len(pos) == 1 and all(p < 1e-12 for i, p in enumerate(row) if i != pos[0]):
            total += row[pos[0]] / len(inputs)
    return total


def test_budget_one_returns_single_candidate():
    inputs = bell_like_states(0.5)
    res = optimize(inputs, 4, budget=1, seed=3)
    assert res.evaluations == 1 and len(res.trace) == 1
    assert 0.0 <= res.success <= 1.0
    assert res.success == pytest.approx(_independent_success(res, inputs), abs=1e-12)


def test_deterministic_and_monotone_trace():
    inputs = bell_like_states(0.4)
    a = optimize(inputs, 4, budget=600, seed=11, restarts=4)
    b = optimize(inputs, 4, budget=600, seed=11, restarts=4)
    assert a.to_json() == b.to_json()
    best = [t["best_so_far"] for t in a.trace]
    assert best == sorted(best) and best[-1] == a.meta["search_success"]
    assert a.evaluations <= 600


def test_threads_do_not_change_result():
    inputs = bell_like_states(0.6)
    a = optimize(inputs, 4, budget=400, seed=5, restarts=4, threads=1)
    b = optimize(inputs, 4, budget=400, seed=5, restarts=4, threads=3)
    assert a.network == b.network and a.success == b.success


def test_self_consistency_and_serialization():
    inputs = bell_like_states(math.pi / 4)
    res = optimize(inputs, 4, budget=2000, seed=0)
    assert res.success == pytest.approx(_independent_success(res, inputs), abs=1e-12)
    doc = json.loads(res.to_json())
    assert len(doc["network"]["params"]) == ReckNetwork.n_params(4)
    net, success, trace = res
    assert net == res.network and success == res.success and trace == res.trace


def test_vacuum_padding_and_errors():
    inputs = bell_like_states(0.5)
    res = optimize(inputs, 5, budget=50, seed=0, restarts=2)
    assert res.modes[-1] == Mode("o1").label()
    with pytest.raises(ParameterError):
        optimize(inputs, 3, budget=10)
    with pytest.raises(ParameterError):
        optimize(inputs, 4, budget=0)
    with pytest.raises(ParameterError):
        optimize(inputs, 4, priors=[1.0, 0.0, 0.0], budget=10)
