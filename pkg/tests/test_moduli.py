from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from heckegraph.algebra import mat_mul2
from heckegraph.moduli import (
    INF,
    BundleType,
    LevelSpace,
    aut_generators,
    aut_signature,
    level_from_coordinates,
    normalize_bundle,
    projective_coordinates,
)
from heckegraph.subgroups import enumerate_members, left_subgroup_for_mode
from _util import datum

CONFIGS = [
    (2, [("t", 1, "U")]),
    (3, [("t", 1, "B"), ("t-1", 1, "U")]),
    (2, [("t", 2, "U"), ("t+1", 1, "B")]),
    (3, [("t", 1, "T"), ("t-1", 1, "U")]),
    (4, [("t+1", 1, "B"), ("t+a", 1, "B")]),
    (2, [("t^2+t+1", 1, "B")]),
]


def test_bundle_types():
    assert normalize_bundle(-1, 3, "PGL2") == BundleType(4, 0)
    assert normalize_bundle(-1, 3, "GL2") == BundleType(3, -1)
    assert BundleType(3, 0).tag("PGL2") == "E_3"
    assert BundleType(0, -2).tag("GL2") == "O(0)+O(-2)"
    with pytest.raises(ValueError):
        BundleType(0, 1)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(CONFIGS), st.integers(0, 5), st.data())
def test_canonical_invariant_under_both_actions(cfg, gap, data):
    D = datum(*cfg)
    sp = LevelSpace(D)
    bundle = BundleType(gap, 0)
    level = [data.draw(st.sampled_from(t.G)) for t in sp.tables]
    v = sp.canonical(bundle, level)
    # left multiplication by the level group
    moved = []
    for e, t, g in zip(D.entries, sp.tables, level):
        H = enumerate_members(left_subgroup_for_mode(e.label, D.mode), t.ring, 2)
        moved.append(mat_mul2(t.ring, data.draw(st.sampled_from(H)), g))
    assert sp.canonical(bundle, moved) == v
    # right multiplication by an automorphism
    gens = aut_generators(bundle, D)
    a = data.draw(st.sampled_from(gens))
    shifted = [mat_mul2(t.ring, g, a[i]) for i, (t, g) in enumerate(zip(sp.tables, level))]
    w = sp.canonical(bundle, shifted)
    assert w == v and w.tag == v.tag


def test_canonical_rep_is_orbit_minimum():
    D = datum(3, [("t", 1, "B"), ("t-1", 1, "B")])
    sp = LevelSpace(D)
    for gap in range(3):
        b = BundleType(gap, 0)
        for v in sp.vertices(b):
            assert sp.canonical(b, v.level).level == v.level


def test_signatures_saturate():
    D = datum(3, [("t", 1, "B"), ("t-1", 1, "B"), ("t-2", 1, "B")])
    assert aut_signature(BundleType(0), D) == ("square",)
    assert aut_signature(BundleType(1), D) == ("split", 1)
    assert aut_signature(BundleType(7), D) == aut_signature(BundleType(2), D) == ("split", 2)


def test_level_counts_match_text():
    # three B points over F_4: 9 classes over E_1 and 5 over E_0
    D = datum(4, [("t+1", 1, "B"), ("t+a", 1, "B"), ("t+a+1", 1, "B")])
    sp = LevelSpace(D)
    assert sp.orbit_count(BundleType(1)) == 9
    assert sp.orbit_count(BundleType(0)) == 5
    assert sp.orbit_count(BundleType(4)) == 8
    # torus at x: T(k) \ P^1(k) has three points on cusp bundles
    T = LevelSpace(datum(3, [("t", 1, "T")]))
    assert [T.orbit_count(BundleType(n)) for n in range(4)] == [1, 3, 3, 3]


def test_unipotent_level_counts():
    # U at depth d: q^(d-1) s-type classes plus id-type classes on cusp bundles
    sp = LevelSpace(datum(2, [("t", 1, "U")]))
    assert [sp.orbit_count(BundleType(n)) for n in range(3)] == [1, 2, 2]


def test_projective_coordinates_roundtrip():
    D = datum(3, [("t-1", 1, "B"), ("t-2", 1, "B")])
    sp = LevelSpace(D)
    for coords in [(INF, INF), (0, INF), (1, 2), (0, 0)]:
        level = level_from_coordinates(coords, D)
        got = projective_coordinates(sp.canonical(BundleType(5), level), D)
        assert len(got) == 2
        v = sp.canonical(BundleType(5), level)
        assert sp.canonical(BundleType(5), level_from_coordinates(got, D)) == v
    with pytest.raises(ValueError):
        projective_coordinates(sp.vertices(BundleType(0))[0], datum(2, [("t", 1, "U")]))


def _mobius_datum(q, ram, x, c):
    """Move infinity to the point c with s = 1/(t - c); rational points only (q prime)."""
    def image(label):
        y = 0 if label == "t" else (-int(label[2:]) if label[1] == "+" else int(label[2:])) % q
        s = pow((y - c) % q, q - 2, q)
        return "t" if s == 0 else f"t-{s}"
    return datum(q, [(image(p), d, h) for p, d, h in ram], image(x))


def _nx(G):
    import networkx as nx
    g = nx.DiGraph()
    for v in G.vertices:
        g.add_node(v, bundle=v.bundle, boundary=v in G.boundary)
    for v, outs in G.edges.items():
        for w, m in outs.items():
            g.add_edge(v, w, mult=m)
    return g


@pytest.mark.parametrize("q,ram,x,c", [
    (3, [("t", 1, "B"), ("t-1", 1, "U")], "t", 2),
    (3, [("t", 1, "T"), ("t-1", 1, "B")], "t-1", 2),
    (5, [("t", 1, "U"), ("t-1", 1, "1")], "t", 3),
    (3, [("t", 2, "U")], "t", 1),
])
def test_chart_choice_does_not_change_graph(q, ram, x, c):
    # a Moebius change of coordinate moving infinity into the affine line gives a
    # different trivialization of every O(n) near D, hence different representatives
    import networkx as nx
    from heckegraph.graph import build_graph

    D = datum(q, ram, x)
    E = _mobius_datum(q, ram, x, c)
    assert E.points != D.points
    A, B = _nx(build_graph(D, 4)), _nx(build_graph(E, 4))
    assert nx.is_isomorphic(A, B, node_match=lambda a, b: a == b, edge_match=lambda a, b: a == b)


def test_isomorphism_check_separates_data():
    import networkx as nx
    from heckegraph.graph import build_graph

    A = _nx(build_graph(datum(3, [("t", 1, "B"), ("t-1", 1, "U")]), 4))
    B = _nx(build_graph(datum(3, [("t", 1, "B"), ("t-1", 1, "1")]), 4))
    same = dict(node_match=lambda a, b: a == b, edge_match=lambda a, b: a == b)
    assert not nx.is_isomorphic(A, B, **same)
    assert nx.is_isomorphic(A, A.copy(), **same)
