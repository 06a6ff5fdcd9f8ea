import math

import numpy as np
import pytest

from belldisc.errors import CapacityError
from belldisc.fock import (
    MAX_MODES,
    MAX_PHOTONS,
    Mode,
    PhotonState,
    inner_product,
    max_abs_diff,
    normal_form,
    product,
    row_weights,
    state,
    tensor,
)


def test_mode_parse_and_label_round_trip():
    m = Mode.parse("a1:H")
    assert m == Mode("a1", "H")
    assert m.label() == "a1:H:-:-:f"
    assert Mode.parse(m.label()) == m
    assert m.photon == 1 and m.path_prefix == "a"
    assert str(Mode("u2", "V", "+1", "th", "d")) == "u2V[l=+1]@th(2w)"


@pytest.mark.parametrize("bad", ["a1:X", "a1:H:+2", "a1:H:-:tq", "a1:H:-:-:z", ":H", "a:b:c:d:e:f"])
def test_mode_rejects_bad_labels(bad):
    with pytest.raises(ValueError):
        Mode.parse(bad)


def test_normal_form_is_order_independent():
    assert normal_form(["b1", "a1"]) == normal_form(["a1", "b1"])


def test_bosonic_weight_in_norm():
    # (a^dag)^2 |0> has squared norm 2.
    assert state((1.0, ["a1", "a1"])).squared_norm() == pytest.approx(2.0)
    assert normal_form(["a1", "a1", "a1", "b1"]).weight == 6


def test_row_weights_matches_monomial_weight():
    rows = np.array([[0, 0, 1], [0, 1, 2], [2, 2, 2]])
    assert row_weights(rows).tolist() == [2.0, 1.0, 6.0]


def test_like_terms_combine_and_prune():
    s = state((0.5, ["a1", "b1"]), (0.5, ["b1", "a1"]), (1e-16, ["a2", "b2"]))
    assert len(s) == 1 and s[["a1", "b1"]] == pytest.approx(1.0)
    assert not (s - s)


def test_inner_product_uses_bosonic_weight():
    s = state((1.0, ["a1", "a1"]))
    t = state((1j, ["a1", "a1"]), (1.0, ["a1", "b1"]))
    assert inner_product(s, t) == pytest.approx(2j)
    assert inner_product(t, s) == pytest.approx(-2j)


def test_tensor_joins_factors_per_photon():
    pol = state((1 / math.sqrt(2), ["1:H", "2:V"]), (1 / math.sqrt(2), ["1:V", "2:H"]))
    path = state((1.0, ["a1", "b2"]))
    t = tensor(path, pol)
    assert t[["a1:H", "b2:V"]] == pytest.approx(1 / math.sqrt(2))
    assert t.squared_norm() == pytest.approx(1.0)


def test_product_multiplies_polynomials():
    s = product(state((1.0, ["a1"])), state((1.0, ["a1"])))
    assert s[["a1", "a1"]] == pytest.approx(1.0)
    assert s.squared_norm() == pytest.approx(2.0)


def test_capacity_limits():
    with pytest.raises(CapacityError):
        normal_form([f"a{i}" for i in range(MAX_PHOTONS + 1)])
    many = {normal_form([f"m{i}"]): 1.0 for i in range(MAX_MODES + 1)}
    with pytest.raises(CapacityError):
        PhotonState(many)


def test_packed_round_trip():
    s = state((0.6, ["a1:H", "b2:V"]), (0.8j, ["a1:V", "a1:V"]))
    universe, groups = s.packed()
    back = PhotonState.from_packed(universe, groups)
    assert max_abs_diff(s, back) == 0
    assert back.squared_norm() == pytest.approx(s.squared_norm())
