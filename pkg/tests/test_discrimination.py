import math

import numpy as np
import pytest

from belldisc.detection import DetectorSpec
from belldisc.discrimination import CLOSED_FORMS, analyze, classify, closed_form
from belldisc.errors import DomainError, InputError
from belldisc.fock import state


def test_classify_thresholds():
    table = np.array([
        [0.5, 0.0, 0.0],
        [0.5, 1e-13, 0.0],
        [0.5, 1e-11, 0.0],
        [0.0, 0.0, 0.0],
        [0.2, 0.3, 0.0],
    ])
    assert classify(table).tolist() == [0, 0, -1, -1, -1]


def test_analyze_orthogonal_single_photon_states():
    outs = [("x", state((1.0, ["a1"]))), ("y", state((1.0, ["b1"])))]
    rep = analyze(outs, DetectorSpec(("path",)))
    assert rep.success_probability == pytest.approx(1.0)
    assert rep.unambiguous_map == {"a1": "x", "b1": "y"}


def test_analyze_overlapping_states_and_priors():
    r = 1 / math.sqrt(2)
    outs = [("x", state((1.0, ["a1"]))), ("y", state((r, ["a1"]), (r, ["b1"])))]
    rep = analyze(outs, DetectorSpec(("path",)), priors=[0.25, 0.75])
    assert rep.unambiguous_map == {"b1": "y"}
    assert rep.per_state_success == pytest.approx([0.0, 0.5])
    assert rep.success_probability == pytest.approx(0.375)


def test_lost_conditions_on_survival():
    outs = [("x", state((math.sqrt(0.5), ["a1"]))), ("y", state((math.sqrt(0.5), ["b1"])))]
    rep = analyze(outs, DetectorSpec(("path",)), lost=[0.5, 0.5])
    assert rep.success_probability == pytest.approx(1.0)
    assert rep.raw_success == pytest.approx(0.5)


@pytest.mark.parametrize("kw", [
    {"priors": [0.5, 0.6]},
    {"priors": [1.0]},
    {"priors": [-0.5, 1.5]},
    {"lost": [1.0, 0.0]},
])
def test_analyze_input_errors(kw):
    outs = [("x", state((1.0, ["a1"]))), ("y", state((1.0, ["b1"])))]
    with pytest.raises(InputError):
        analyze(outs, DetectorSpec(), **kw)


def test_duplicate_ids():
    with pytest.raises(InputError):
        analyze([("x", state((1.0, ["a1"])))] * 2, DetectorSpec())


def test_report_serialization():
    rep = analyze([("x", state((1.0, ["a1:H"]))), ("y", state((1.0, ["b1:V"])))], DetectorSpec())
    d = rep.to_dict()
    assert d["success_probability"] == 1.0 and d["unambiguous_map"] == {"a1H": "x", "b1V": "y"}
    assert rep.to_csv().splitlines()[0] == "event,x,y,unambiguous_for"
    assert '"success_probability": 1.0' in rep.to_json()


def test_closed_forms_hand_values():
    q = math.pi / 4
    assert closed_form("hyper_momentum", 0.3) == 0.5
    assert closed_form("timebin", 0.3) == pytest.approx((1 + math.sin(0.3) ** 2) / 4)
    assert closed_form("sfg", theta1=0.2, theta2=1.0) == 1.0
    assert closed_form("baseline", q) == 0.5 and closed_form("baseline", 0.3) == 0.0
    # Both ancilla expressions evaluated by hand at pi/4.
    assert closed_form("ancilla_general", theta1=q, theta2=q) == pytest.approx(0.25, abs=1e-15)
    assert closed_form("ancilla_equal", theta2=q) == pytest.approx(0.28125, abs=1e-15)
    assert closed_form("ancilla", theta1=0.3, theta2=0.3) == closed_form("ancilla_equal", theta2=0.3)
    assert closed_form("ancilla", theta1=0.3, theta2=0.9) == closed_form("ancilla_general", theta1=0.3, theta2=0.9)
    assert "ancilla" in CLOSED_FORMS


def test_ancilla_general_formula_independent_evaluation():
    t1, t2 = 0.3, 0.9
    expected = (-2 * math.cos(4 * t2) - math.cos(2 * t1) * (math.cos(4 * t2) + 3) + 6) / 32
    assert closed_form("ancilla_general", theta1=t1, theta2=t2) == pytest.approx(expected, abs=1e-15)


@pytest.mark.parametrize("args", [("timebin", math.pi / 4), ("timebin", 0.0), ("hyper_oam", 1.6), ("baseline", -0.1)])
def test_closed_form_domain(args):
    with pytest.raises(DomainError):
        closed_form(*args)
