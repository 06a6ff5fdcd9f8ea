import math

import numpy as np
import pytest

from belldisc import protocols
from belldisc.errors import ParameterError
from belldisc.fock import inner_product, state
from belldisc.protocols import amplitude_residual, literal_output

THETAS = np.random.default_rng(20).uniform(0.05, 1.52, 8)


def _signatures(rep):
    out = {}
    for ev, sid in rep.unambiguous_map.items():
        out.setdefault(sid, set()).add(ev)
    return out


@pytest.mark.parametrize("pid", protocols.PROTOCOL_IDS)
def test_inputs_orthonormal(pid):
    inst = protocols.build(pid, {"theta": 0.4, "theta1": 0.4, "theta2": 0.9})
    states = [s for _, s in inst.inputs]
    for i, s in enumerate(states):
        assert abs(s.squared_norm() - 1) < 1e-12
        for t in states[:i]:
            assert abs(inner_product(s, t)) < 1e-12


def test_momentum_literal_equals_circuit_at_0_7():
    inst = protocols.build("hyper_momentum", {"theta": 0.7})
    for k, (_, s) in enumerate(inst.cut_outputs()):
        assert amplitude_residual(s, literal_output("hyper_momentum", k + 1, 0.7)) < 1e-10


@pytest.mark.parametrize("pid", ["hyper_momentum", "hyper_polarization", "hyper_oam"])
def test_tabulated_outputs_match_circuit(pid):
    for th in THETAS:
        inst = protocols.build(pid, {"theta": th})
        for k, (_, s) in enumerate(inst.cut_outputs()):
            assert amplitude_residual(s, literal_output(pid, k + 1, th)) < 1e-10


def test_polarization_tabulated_first_state_terms():
    th = 0.37
    s, c = math.sin(th), math.cos(th)
    lit = literal_output("hyper_polarization", 1, th)
    r2 = math.sqrt(2)
    # Ten printed terms collapse onto six distinct monomials.
    assert len(lit) == 6
    assert lit[["a1:H", "b2:H"]] == pytest.approx(s / r2 + s * math.cos(2 * th) / r2)
    assert lit[["a1:H", "b2:V"]] == pytest.approx(-c / (2 * r2) - math.cos(3 * th) / (2 * r2))
    assert lit[["b1:V", "a2:V"]] == pytest.approx(s / r2)
    assert lit.squared_norm() == pytest.approx(1.0)


def test_loss_is_half_for_single_arm_recording():
    inst = protocols.build("hyper_polarization", {"theta": 0.5})
    assert all(p.lost == pytest.approx(0.5) for p in inst.propagate())


@pytest.mark.parametrize("mode", ["circuit", "literal"])
def test_momentum_signatures(mode):
    rep = protocols.build("hyper_momentum", {"theta": 0.6}, mode=mode).analyze()
    assert _signatures(rep) == {
        "Theta1": {"b1V+b2H", "b1H+b2V"},
        "Theta2": {"a2H+b1V", "a2V+b1H"},
        "Theta3": {"a1H+a2H", "a1V+a2V"},
        "Theta4": {"a1H+b2H", "a1V+b2V"},
    }


@pytest.mark.parametrize("mode", ["circuit", "literal"])
def test_oam_signatures(mode):
    rep = protocols.build("hyper_oam", {"theta": 0.6}, mode=mode).analyze()
    assert _signatures(rep) == {
        "Pi1": {"u1H+u2H", "d1H+d2H"},
        "Pi2": {"u1H+u2V", "d1H+d2V"},
        "Pi3": {"d2V+u1V", "d1V+u2V"},
        "Pi4": {"d2H+u1V", "d1V+u2H"},
    }


def test_polarization_signatures_follow_tabulated_terms():
    sig = _signatures(protocols.build("hyper_polarization", {"theta": 0.6}).analyze())
    assert sig["Xi1"] == {"a2V+b1V", "a1V+b2V"}
    assert sig["Xi4"] == {"a1H+a2V", "b1H+b2V"}
    # These two come straight from the monomials of the tabulated expansions.
    assert sig["Xi2"] == {"a1V+b2H", "a2H+b1V"}
    assert sig["Xi3"] == {"a1H+a2H", "b1H+b2H"}


def test_timebin_literal_third_state_double_v_terms():
    th = 0.6
    lits = [literal_output("timebin", k, th) for k in range(1, 5)]
    vv1, vv2 = ["A1:V", "A1:V"], ["B2:V", "B2:V"]
    assert lits[2][vv1] == pytest.approx(math.sin(th) / 2)
    assert lits[2][vv2] == pytest.approx(-math.sin(th) / 2)
    for k in (0, 1, 3):
        assert lits[k][vv1] == 0 and lits[k][vv2] == 0


@pytest.mark.parametrize("mode", ["circuit", "literal"])
def test_timebin_signatures(mode):
    th = 0.45
    rep = protocols.build("timebin", {"theta": th}, mode=mode).analyze()
    sig = _signatures(rep)
    assert set(sig) == {"psi1", "psi2", "psi3"}
    assert rep.per_state_success[3] == pytest.approx(0.0, abs=1e-12)
    for ev in sig["psi1"]:
        assert "B" not in ev and ("delay" in ev or ("@th" in ev and "@tv" in ev))
    assert sig["psi3"] == {"Av1(x2)", "Bv2(x2)"}
    assert rep.success_probability == pytest.approx((1 + math.sin(th) ** 2) / 4, abs=1e-9)


def test_timebin_reconstruction_is_flagged():
    inst = protocols.build("timebin", {"theta": 0.3})
    rec = inst.meta["reconstruction"]
    assert rec["status"] == "unverified" and rec["outliers"] == 1
    assert rec["inlier_residual"] < 1e-10
    assert rec["transmission"] == pytest.approx(math.cos(0.3) ** 2, abs=1e-8)


@pytest.mark.parametrize("t1,t2", [(0.3, 1.1), (1.2, 0.2), (0.8, 0.8)])
def test_sfg_single_detector_signatures(t1, t2):
    rep = protocols.build("sfg", {"theta1": t1, "theta2": t2}).analyze()
    assert rep.success_probability == pytest.approx(1.0, abs=1e-12)
    assert rep.unambiguous_map == {"a3H": "psi1", "a3V": "psi2", "b3H": "psi3", "b3V": "psi4"}


@pytest.mark.parametrize("t1,t2", [(0.3, 0.9), (0.7, 0.4), (1.2, 0.6)])
def test_ancilla_unequal_angles(t1, t2):
    rep = protocols.build("ancilla", {"theta1": t1, "theta2": t2}).analyze()
    assert set(rep.unambiguous_map.values()) == {"Gamma1", "Gamma2", "Gamma4"}
    idx = {sid: k for k, sid in enumerate(rep.inputs)}
    for ev, row in zip(rep.events, rep.table):
        owner = rep.unambiguous_map.get(ev)
        if owner:
            assert np.delete(row, idx[owner]).max() < 1e-12


def test_ancilla_bell_point_classifies_all_four():
    q = math.pi / 4
    rep = protocols.build("ancilla", {"theta1": q, "theta2": q}).analyze()
    assert set(rep.unambiguous_map.values()) == {"Gamma1", "Gamma2", "Gamma3", "Gamma4"}
    assert rep.success_probability == pytest.approx(0.75)


def test_ancilla_two_pairs_mode_count():
    inst = protocols.ancilla_instance(0.3, 0.9, pairs=2)
    assert len({m for _, s in inst.inputs for m in s.modes()}) == 16
    with pytest.raises(ParameterError):
        protocols.ancilla_instance(0.3, 0.9, pairs=3)


def test_baseline():
    assert protocols.build("baseline", {"theta": math.pi / 4}).analyze().success_probability == pytest.approx(0.5)
    assert protocols.build("baseline", {"theta": 0.3}).analyze().success_probability == pytest.approx(0.0)


@pytest.mark.parametrize("pid,params,mode", [
    ("nope", {"theta": 0.3}, "circuit"),
    ("sfg", {"theta1": 0.3, "theta2": 0.3}, "literal"),
    ("hyper_oam", {"theta": 0.3}, "dense"),
    ("hyper_oam", {"theta": 0.0}, "circuit"),
    ("hyper_oam", {"theta": math.pi / 2}, "circuit"),
    ("sfg", {"theta1": 0.3}, "circuit"),
])
def test_build_errors(pid, params, mode):
    with pytest.raises(ParameterError):
        protocols.build(pid, params, mode=mode)


def test_literal_output_errors():
    with pytest.raises(ParameterError):
        literal_output("ancilla", 1, 0.3)
    with pytest.raises(ParameterError):
        literal_output("timebin", 5, 0.3)


def test_literal_mode_discarded_is_against_unit_input():
    rep = protocols.build("timebin", {"theta": 0.3}, mode="literal").analyze()
    for col, sid in enumerate(rep.inputs):
        assert rep.raw_table[:, col].sum() + rep.meta["discarded"][sid] == pytest.approx(1.0, abs=1e-12)


def test_amplitude_residual_ignores_global_phase():
    s = state((0.6, ["a1"]), (0.8, ["b1"]))
    assert amplitude_residual(s * 1j, s) < 1e-15
