from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from heckegraph.algebra import enumerate_gl, local_ring, make_field, mat_inv, mat_mul
from heckegraph.subgroups import (
    EnumerationBoundError,
    SubgroupLabel,
    closure,
    enumerate_members,
    left_subgroup_for_mode,
    membership,
    pgl_hypothesis,
    subgroup_order,
    with_center,
)
from _util import datum

R22 = local_ring(make_field(2), 2)
LABELS2 = ["1", "U", "U-", "T", "B", "B-", "Z", "G", "Z.U", "Z.U-", "Z.1"]
LABELS3 = ["1", "U", "T", "B", "B-", "P(1)", "P-(2)", "L(1)", "U(2)", "U-(1)", "Z.U"]


def test_counts_over_F2_depth2():
    # U: one free entry (4); B: units^2 * 4; T: units^2; Z.U: scalar units * U
    want = {"U": 4, "B": 16, "T": 4, "Z.U": 8, "Z": 2, "1": 1}
    for lab, n in want.items():
        assert len(enumerate_members(SubgroupLabel.parse(lab), R22, 2)) == n


@pytest.mark.parametrize("lab", LABELS2)
@pytest.mark.parametrize("q,depth", [(2, 1), (3, 1), (2, 2)])
def test_order_formula_matches_enumeration_n2(lab, q, depth):
    R = local_ring(make_field(*{2: (2, 1), 3: (3, 1)}[q]), depth)
    L = SubgroupLabel.parse(lab)
    members = enumerate_members(L, R, 2)
    assert len(members) == subgroup_order(L, R, 2)
    pred = membership(L, R, 2)
    inside = [g for g in enumerate_gl(R, 2) if pred(g)]
    assert sorted(inside) == sorted(members)


@pytest.mark.parametrize("lab", LABELS3)
def test_order_formula_matches_enumeration_n3(lab):
    R = local_ring(make_field(2), 1)
    L = SubgroupLabel.parse(lab)
    assert len(enumerate_members(L, R, 3)) == subgroup_order(L, R, 3)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(LABELS2), st.data())
def test_members_form_a_group(lab, data):
    R = local_ring(make_field(3), 1)
    L = SubgroupLabel.parse(lab)
    members = enumerate_members(L, R, 2)
    pred = membership(L, R, 2)
    a = data.draw(st.sampled_from(members))
    b = data.draw(st.sampled_from(members))
    assert pred(mat_mul(R, 2, a, b))
    assert pred(mat_inv(R, 2, a))


def test_closure_of_generators():
    R = local_ring(make_field(3), 1)
    gens = [(1, 1, 0, 1), (2, 0, 0, 1), (1, 0, 0, 2)]
    assert closure(gens, R, 2) == enumerate_members(SubgroupLabel("B"), R, 2)


def test_label_parse_and_normalize():
    for text in LABELS2 + LABELS3:
        L = SubgroupLabel.parse(text)
        assert SubgroupLabel.parse(str(L)) == L
    assert SubgroupLabel.parse("P(1)").normalized(2) == SubgroupLabel("B")
    assert SubgroupLabel.parse("Z.1").normalized(2) == SubgroupLabel("Z")
    assert with_center(SubgroupLabel("B")).normalized(2) == SubgroupLabel("B")
    assert left_subgroup_for_mode(SubgroupLabel("U"), "PGL2") == SubgroupLabel("U", None, True)
    assert left_subgroup_for_mode(SubgroupLabel("U"), "GL2") == SubgroupLabel("U")
    with pytest.raises(ValueError):
        SubgroupLabel.parse("P(2)").normalized(2)
    with pytest.raises(ValueError):
        SubgroupLabel.parse("Q")


def test_enumeration_bound():
    with pytest.raises(EnumerationBoundError):
        enumerate_members(SubgroupLabel("G"), local_ring(make_field(3), 3), 2, bound=1000)


def test_pgl_hypothesis():
    R = local_ring(make_field(3), 1)
    for lab in ("U", "B", "T", "1", "U-", "Z"):
        assert pgl_hypothesis(SubgroupLabel.parse(lab), R)


def test_datum_validation():
    D = datum(3, [("t-2", 1, "B"), ("t", 1, "U")])
    assert [e.point.label for e in D.entries] == ["t", "t+1"]
    assert D.degree == 2 and D.x_ramified
    with pytest.raises(ValueError):
        datum(3, [("t-1", 1, "B"), ("t+2", 1, "U")])
    with pytest.raises(ValueError):
        datum(3, [("t", 0, "B")])
    assert not datum(3, [("t", 1, "G")]).x_ramified
    assert datum(2, [("t^2+t+1", 2, "B")]).degree == 4
