from __future__ import annotations

import random
from collections import Counter

import pytest

from heckegraph.algebra import mat_mul2
from heckegraph.graph import (
    EdgeEngine,
    VertexMap,
    build_graph,
    check_covering,
    check_out_degree,
    check_pgl_descent,
    cusp_threshold,
    forget_map,
    graph_to_dot,
    graph_to_json,
    identify_change_of_ramification,
    modifications,
)
from heckegraph.moduli import BundleType, aut_generators
from heckegraph.subgroups import enumerate_members, left_subgroup_for_mode
from _util import datum

# (q, ramification, x, mode)
OUT_DEGREE = [
    (2, [], "t", "PGL2"),
    (3, [], "t", "PGL2"),
    (2, [("t", 1, "U")], "t", "PGL2"),
    (2, [("t", 2, "U")], "t", "PGL2"),
    (3, [("t", 1, "B")], "t", "PGL2"),
    (3, [("t", 1, "T"), ("t-1", 1, "U")], "t", "PGL2"),
    (2, [("t", 1, "1"), ("t+1", 1, "B")], "t", "PGL2"),
    (3, [("t-1", 1, "B")], "t", "PGL2"),
    (2, [("t", 1, "B-")], "t", "PGL2"),
    (4, [("t+1", 1, "B")], "t+1", "PGL2"),
    (2, [], "t^2+t+1", "PGL2"),
    (2, [("t", 1, "U")], "t^2+t+1", "PGL2"),
    (2, [("t", 1, "U")], "t", "GL2"),
    (3, [("t", 1, "B")], "t-1", "GL2"),
]


@pytest.mark.parametrize("q,ram,x,mode", OUT_DEGREE)
def test_out_degree(q, ram, x, mode):
    D = datum(q, ram, x, mode)
    G = build_graph(D, D.degree + 3 if mode == "PGL2" else 2)
    rep = check_out_degree(G)
    assert rep["ok"], rep["violations"][:3]
    assert rep["checked"] > 0
    ramified = any(p == x for p, _, _ in ram)
    qx = q ** D.x.degree
    assert rep["expected"] == (qx if ramified else qx + 1)


def test_modification_count():
    D = datum(3, [])
    for n in range(4):
        assert len(modifications(BundleType(n), D.x)) == 4
    D2 = datum(2, [], "t^2+t+1")
    assert len(modifications(BundleType(2), D2.x)) == 5


LIFT_CONFIGS = [
    (3, [("t", 1, "B"), ("t-1", 1, "U")], "t"),
    (2, [("t", 2, "U"), ("t+1", 1, "B")], "t"),
    (3, [("t", 1, "T"), ("t-1", 1, "B")], "t-1"),
]


@pytest.mark.parametrize("q,ram,x", LIFT_CONFIGS)
def test_edges_independent_of_lift(q, ram, x):
    D = datum(q, ram, x)
    base = EdgeEngine(D)
    sp = base.space
    rng = random.Random(7)
    lefts = [enumerate_members(left_subgroup_for_mode(e.label, D.mode), t.ring, 2)
             for e, t in zip(D.entries, sp.tables)]

    def lift(v):
        # a global automorphism acts on every point simultaneously
        gens = aut_generators(v.bundle, D)
        a, b = rng.choice(gens), rng.choice(gens)
        out = []
        for i, (t, g) in enumerate(zip(sp.tables, v.level)):
            m = mat_mul2(t.ring, rng.choice(lefts[i]), g)
            out.append(mat_mul2(t.ring, mat_mul2(t.ring, m, a[i]), b[i]))
        return out

    other = EdgeEngine(D, sp, lift=lift)
    for n in range(D.degree + 3):
        for v in sp.vertices(BundleType(n)):
            assert other.out_edges(v) == base.out_edges(v)


def test_export_is_deterministic():
    D = datum(3, [("t", 1, "B"), ("t-1", 1, "U")])
    a = build_graph(D, 4)
    b = build_graph(D, 4)
    assert graph_to_json(a) == graph_to_json(b)
    assert graph_to_dot(a) == graph_to_dot(b)
    js = graph_to_json(a)
    assert len({v["key"] for v in js["vertices"]}) == len(js["vertices"])
    assert graph_to_dot(a).count("->") == len(js["edges"])


def test_covering_positive():
    D = datum(3, [("t", 1, "B"), ("t-1", 1, "U"), ("t-2", 1, "B")])
    S = D.restrict([D.entries[0].point, D.entries[1].point])
    w = D.degree + 4
    rep = check_covering(forget_map(build_graph(D, w), build_graph(S, w)))
    assert rep["is_covering"] and rep["disjoint"]
    assert rep["checked"] >= 10


def test_covering_negative_torus():
    # forgetting a unipotent level over a torus level breaks the in-edge bijection
    D = datum(3, [("t", 1, "T"), ("t-1", 1, "U")])
    S = D.restrict([D.entries[0].point])
    rep = check_covering(forget_map(build_graph(D, 8), build_graph(S, 8)))
    assert not rep["is_covering"]
    assert rep["violations"]


def test_covering_detects_scrambled_map():
    D = datum(3, [("t", 1, "B"), ("t-1", 1, "U"), ("t-2", 1, "B")])
    S = D.restrict([D.entries[0].point, D.entries[1].point])
    w = D.degree + 4
    G, H = build_graph(D, w), build_graph(S, w)
    vm = forget_map(G, H)
    thr = cusp_threshold(D)
    high = [v for v in G.vertices if v.bundle.gap == thr + 1]
    targets = sorted({vm.mapping[v] for v in high})
    assert len(targets) >= 2
    bad = dict(vm.mapping)
    src = next(v for v in high if vm.mapping[v] == targets[0])
    bad[src] = targets[1]
    assert not check_covering(VertexMap(G, H, bad))["is_covering"]


def test_forget_map_rejects_mismatch():
    D = datum(3, [("t", 1, "B"), ("t-1", 1, "U")])
    E = datum(3, [("t", 1, "B"), ("t-1", 1, "B")])
    with pytest.raises(ValueError):
        forget_map(build_graph(D, 3), build_graph(E, 3))


@pytest.mark.parametrize("q,ram,x", [
    (2, [("t", 1, "U")], "t"),
    (3, [("t", 1, "B"), ("t-1", 1, "U")], "t"),
    (3, [("t-1", 1, "T")], "t"),
    (2, [("t", 2, "U"), ("t+1", 1, "B")], "t"),
])
def test_pgl_descent(q, ram, x):
    D = datum(q, ram, x)
    rep = check_pgl_descent(D, D.degree + 3)
    assert rep["ok"], rep["violations"][:2]
    assert rep["checked"] > 0


@pytest.mark.parametrize("q,small,big", [
    (3, [("t", 1, "U"), ("t-1", 1, "1")], [("t", 1, "U"), ("t-1", 1, "B")]),
    (2, [("t", 1, "B"), ("t+1", 1, "U")], [("t", 1, "B"), ("t+1", 1, "B")]),
    (3, [("t", 1, "U"), ("t-1", 1, "U-")], [("t", 1, "U"), ("t-1", 1, "G")]),
    (2, [("t+1", 1, "1")], [("t+1", 1, "T")]),
])
def test_change_of_ramification(q, small, big):
    D1, D2 = datum(q, small), datum(q, big)
    w = D1.degree + 3
    G1, G2 = build_graph(D1, w), build_graph(D2, w)
    rep = identify_change_of_ramification(G1, G2)
    assert rep["ok"], rep["violations"][:2]
    assert rep["checked"] > 0


def test_change_of_ramification_needs_same_cosets():
    # G at x is unramified, so the coset representatives at x differ
    D1 = datum(2, [("t", 1, "U")])
    D2 = datum(2, [("t", 1, "G")])
    with pytest.raises(ValueError):
        identify_change_of_ramification(build_graph(D1, 3), build_graph(D2, 3))


def test_multiplicities_sum_over_window():
    D = datum(2, [("t", 1, "U")])
    G = build_graph(D, 5)
    inc = G.in_edges()
    total_in = sum(sum(c.values()) for c in inc.values())
    total_out = sum(sum(c.values()) for c in G.edges.values())
    assert total_in == total_out
    assert isinstance(next(iter(inc.values())), Counter)
