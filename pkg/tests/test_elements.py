import math

import numpy as np
import pytest

from belldisc import elements as el
from belldisc.errors import BindingError, ContractError, ParameterError, RoutingError
from belldisc.fock import state

R2 = 1 / math.sqrt(2)


def test_beam_splitter_convention():
    bs = el.beam_splitter("a1", "b1", 0.5)
    out = bs.apply(state((1.0, ["a1"])))
    assert out[["a1"]] == pytest.approx(R2) and out[["b1"]] == pytest.approx(R2)
    out = bs.apply(state((1.0, ["b1"])))
    assert out[["a1"]] == pytest.approx(R2) and out[["b1"]] == pytest.approx(-R2)


def test_beam_splitter_hong_ou_mandel():
    out = el.beam_splitter("a1", "b1", 0.5).apply(state((1.0, ["a1", "b1"])))
    assert abs(out[["a1", "b1"]]) < 1e-15
    assert out[["a1", "a1"]] == pytest.approx(0.5) and out[["b1", "b1"]] == pytest.approx(-0.5)


def test_beam_splitter_acts_on_every_polarization():
    out = el.beam_splitter("a1", "b1", 0.25).apply(state((1.0, ["a1:V"])))
    assert out[["a1:V"]] == pytest.approx(0.5) and out[["b1:V"]] == pytest.approx(math.sqrt(0.75))


def test_hwp_convention():
    a = 0.2
    th = 2 * a
    out = el.hwp("a1", a).apply(state((1.0, ["a1:H"])))
    assert out[["a1:H"]] == pytest.approx(math.cos(th)) and out[["a1:V"]] == pytest.approx(math.sin(th))
    out = el.hwp("a1", a).apply(state((1.0, ["a1:V"])))
    assert out[["a1:H"]] == pytest.approx(math.sin(th)) and out[["a1:V"]] == pytest.approx(-math.cos(th))


def test_hwp_at_45_degrees_swaps_polarization():
    out = el.hwp("b1", math.pi / 4).apply(state((1.0, ["b1:H", "a2:H"])))
    assert out[["b1:V", "a2:H"]] == pytest.approx(1.0)


def test_phase_shift():
    out = el.phase_shift("a1:H", 0.3).apply(state((1.0, ["a1:H", "a1:V"])))
    assert out[["a1:H", "a1:V"]] == pytest.approx(np.exp(0.3j))


def test_pbs_routes_and_rejects_unrouted():
    pbs = el.polarizing_bs([("a1:H", "x1:H"), ("a1:V", "y1:V")])
    out = pbs.apply(state((1.0, ["a1:H", "a1:V"])))
    assert out[["x1:H", "y1:V"]] == pytest.approx(1.0)
    with pytest.raises(RoutingError):
        pbs.apply(state((1.0, ["a1:-"])))


def test_pbs_rejects_colliding_outputs():
    with pytest.raises(BindingError):
        el.polarizing_bs([("a1:H", "x1:H"), ("b1:H", "x1:H")])


def test_hologram_moves_oam_to_path():
    holo = el.hologram(1, {"+1": "u1", "-1": "d1"})
    out = holo.apply(state((1.0, ["1:H:+1", "2:V:-1"])))
    assert out[["u1:H:0", "2:V:-1"]] == pytest.approx(1.0)
    with pytest.raises(RoutingError):
        holo.apply(state((1.0, ["1:H:0"])))


def test_delay_tags_and_refuses_double_delay():
    d = el.delay("x1", "H", "th")
    out = d.apply(state((1.0, ["x1:H", "x2:V"])))
    assert out[["x1:H:-:th", "x2:V"]] == pytest.approx(1.0)
    with pytest.raises(ContractError):
        d.apply(state((1.0, ["x1:H:-:tv"])))
    with pytest.raises(ParameterError):
        el.delay("x1", "H", "tx")


def test_time_coalesce_merges_equal_delays_only():
    s = state((0.5, ["A1:H:-:th", "A1:H:-:th"]), (0.5, ["A1:H", "A1:H"]), (0.5, ["A1:H:-:th", "B2:V:-:tv"]))
    out = el.time_coalesce(s)
    assert out[["A1:H", "A1:H"]] == pytest.approx(1.0)
    assert out[["A1:H:-:th", "B2:V:-:tv"]] == pytest.approx(0.5)


@pytest.mark.parametrize("kind,pols,out_pol", [("I", "HH", "V"), ("I", "VV", "H"), ("II", "VH", "V"), ("II", "HV", "H")])
def test_sfg_rules(kind, pols, out_pol):
    out = el.sfg(kind).apply(state((1.0, [f"1:{pols[0]}", f"2:{pols[1]}"])))
    assert out[[f"3:{out_pol}:-:-:d"]] == pytest.approx(1.0)


def test_sfg_passes_non_matching_pairs():
    s = state((1.0, ["1:H", "2:V"]))
    assert el.sfg("I").apply(s)[["1:H", "2:V"]] == pytest.approx(1.0)


def test_dichroic_router_by_band():
    r = el.dichroic_router(["3", "1"], {"d": "a", "f": "b"})
    out = r.apply(state((1.0, ["3:H:-:-:d", "1:V"])))
    assert out[["a3:H:-:-:d", "b1:V"]] == pytest.approx(1.0)


def test_effective_map_must_be_contractive():
    with pytest.raises(ParameterError):
        el.effective_map([[1.5]], ["a1"])
    m = el.effective_map([[0.6]], ["a1"])
    assert m.loss_point


def test_discard_removes_photons():
    out = el.discard("b1").apply(state((R2, ["a1"]), (R2, ["b1"])))
    assert out.squared_norm() == pytest.approx(0.5)


def test_bad_parameters():
    with pytest.raises(ParameterError):
        el.beam_splitter("a1", "b1", 1.2)
    with pytest.raises(ParameterError):
        el.sfg("III")


@pytest.mark.parametrize("element", [
    el.beam_splitter("a1", "b1", 0.3),
    el.hwp("a1", 0.1),
    el.phase_shift("a1:H", 0.4),
    el.polarizing_bs([("a1:H", "x1:H"), ("a1:V", "y1:V")]),
    el.hologram(2, {"+1": "u2", "-1": "d2"}),
    el.delay("x1", "V", "tv"),
    el.time_coalesce(),
    el.sfg("II", ("b1", "b2"), "b3"),
    el.dichroic_router(["1"], {"d": "a", "f": "b"}),
    el.effective_map([[0.5, 0], [0, 0.5]], ["a1:H", "a1:V"]),
])
def test_serialization_round_trip(element):
    assert el.element_from_dict(element.to_dict()) == element
