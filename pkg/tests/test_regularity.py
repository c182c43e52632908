from __future__ import annotations

import random

import pytest

from heckegraph.algebra import mat_mul2
from heckegraph.graph import build_graph, forget_map
from heckegraph.regularity import (
    check_fibers,
    cusp_level_count,
    double_coset_transversal,
    is_regular,
    local_torus_set,
    torus,
    torus_group,
)
from heckegraph.subgroups import SubgroupLabel, enumerate_members, left_subgroup_for_mode
from heckegraph.algebra import enumerate_gl
from _util import datum

INVARIANCE = [
    (3, [("t", 1, "T")]),
    (3, [("t", 1, "U"), ("t-1", 1, "B")]),
    (2, [("t", 2, "U")]),
    (3, [("t", 1, "1")]),
    (4, [("t", 1, "T")]),
]


@pytest.mark.parametrize("q,ram", INVARIANCE)
def test_torus_invariant_constant_on_double_cosets(q, ram):
    D = datum(q, ram)
    rng = random.Random(q * 31 + len(ram))
    for e in D.entries:
        R = e.ring()
        G = enumerate_gl(R, 2)
        B = enumerate_members(SubgroupLabel("B"), R, 2)
        H = enumerate_members(left_subgroup_for_mode(e.label, D.mode), R, 2)
        for _ in range(25):
            tau = rng.choice(G)
            moved = mat_mul2(R, mat_mul2(R, rng.choice(B), tau), rng.choice(H))
            assert local_torus_set(e, tau, D.mode) == local_torus_set(e, moved, D.mode)


def test_torus_group_is_subgroup():
    D = datum(4, [("t", 1, "T"), ("t+1", 1, "U")])
    F = D.field
    for combo in [(e_tau, u_tau) for e_tau in double_coset_transversal(D.entries[0], D.mode)
                  for u_tau in double_coset_transversal(D.entries[1], D.mode)]:
        T = torus_group(D, combo)
        assert (1, 1) in T.elements
        for a in T.elements:
            for b in T.elements:
                assert (F.mul_table[a[0]][b[0]], F.mul_table[a[1]][b[1]]) in T.elements
    assert len(torus(F)) == 9


def test_regularity_examples():
    assert is_regular(datum(3, [("t", 1, "U")])).regular
    assert is_regular(datum(2, [("t", 2, "U"), ("t+1", 1, "B")])).regular
    # T at x: the invariant differs between the torus-fixed and generic double cosets
    rep = is_regular(datum(3, [("t", 1, "T")]))
    assert not rep.regular and rep.witness is not None
    # over F_2 the torus is trivial and every datum is regular
    assert is_regular(datum(2, [("t", 1, "T")])).regular


def test_transversal_sizes():
    assert len(double_coset_transversal(datum(3, [("t", 1, "B")]).entries[0], "PGL2")) == 2
    assert len(double_coset_transversal(datum(3, [("t", 1, "G")]).entries[0], "PGL2")) == 1
    assert len(double_coset_transversal(datum(3, [("t", 1, "T")]).entries[0], "PGL2")) == 3


def test_cusp_level_counts():
    # B at one point: two cusp levels; U at depth 1 over F_q: q - 1 + 1 classes modulo Z T
    assert cusp_level_count(datum(3, [("t", 1, "B")])) == 2
    assert cusp_level_count(datum(2, [("t", 1, "U")])) == 2


FIBERS = [
    (3, [("t", 1, "B"), ("t-1", 1, "U"), ("t-2", 1, "B")], 2),
    (2, [("t", 1, "U"), ("t+1", 1, "B")], 1),
    (3, [("t", 1, "U"), ("t-1", 1, "1")], 1),
    (2, [("t", 1, "B"), ("t^2+t+1", 1, "B")], 1),
    (3, [("t", 1, "B"), ("t-1", 1, "T")], 1),
]


@pytest.mark.parametrize("q,ram,keep", FIBERS)
def test_fiber_sizes(q, ram, keep):
    D = datum(q, ram)
    S = D.restrict([e.point for e in D.entries[:keep]])
    w = D.degree + 4
    rep = check_fibers(forget_map(build_graph(D, w), build_graph(S, w)))
    assert rep["ok"], rep["violations"][:3]
    assert rep["checked"] >= 4


MONODROMY = [
    (3, [("t", 1, "U"), ("t-1", 1, "B"), ("t-2", 1, "B")], 2),
    (3, [("t", 1, "U"), ("t-1", 1, "B"), ("t-2", 1, "1")], 2),
    (2, [("t", 1, "U"), ("t+1", 1, "B"), ("t^2+t+1", 1, "B")], 2),
    (3, [("t", 2, "U"), ("t-1", 1, "B")], 1),
]


def _cover(q, ram, keep):
    from heckegraph.graph import cusp_threshold

    D = datum(q, ram)
    S = D.restrict([e.point for e in D.entries[:keep]])
    w = cusp_threshold(D) + 3
    return forget_map(build_graph(D, w), build_graph(S, w))


@pytest.mark.parametrize("q,ram,keep", MONODROMY)
def test_monodromy_within_torus_orbits(q, ram, keep):
    from heckegraph.regularity import check_monodromy

    rep = check_monodromy(_cover(q, ram, keep))
    assert rep["ok"] and rep["checked"] > 0


def test_monodromy_check_catches_stray_endpoint(monkeypatch):
    import heckegraph.graph as graph
    from heckegraph.regularity import check_monodromy

    vm = _cover(3, [("t", 1, "U"), ("t-1", 1, "B"), ("t-2", 1, "1")], 2)
    real = graph.loop_monodromy

    def fake(vm_, threshold):
        out = real(vm_, threshold)
        fib = vm_.fibers()
        for v in sorted(out["orbits"]):
            others = [u for u in fib[vm_.mapping[v]] if u not in out["orbits"][v] and u in out["orbits"]]
            if others:
                out["orbits"][v] = sorted(out["orbits"][v] + others)
                break
        return out

    monkeypatch.setattr(graph, "loop_monodromy", fake)
    rep = check_monodromy(vm)
    assert not rep["ok"] and rep["violations"]


def test_open_loop_witness():
    from heckegraph.graph import VertexMap, check_covering, cusp_threshold, loop_monodromy

    G = build_graph(datum(2, [("t", 1, "U")]), 7)
    thr = cusp_threshold(G.datum)
    ident = {v: v for v in G.vertices}
    assert loop_monodromy(VertexMap(G, G, ident), thr)["witness"] is None
    assert check_covering(VertexMap(G, G, ident))["disjoint"]
    # glue two vertices of one cusp component: the lifted loop no longer closes
    high = sorted(v for v in G.vertices if v.bundle.gap > thr)
    a = high[0]
    b = next(u for u in high if u != a and (u in G.edges[a] or a in G.edges[u]))
    glued = dict(ident)
    glued[b] = a
    loop = loop_monodromy(VertexMap(G, G, glued), thr)["witness"]
    assert loop is not None and loop[0] == loop[-1] and len(loop) >= 2


def test_non_regular_torus_fibers_differ():
    # T at x is not regular for q = 3: fibres over its cusp levels have two sizes
    D = datum(3, [("t", 1, "T"), ("t-1", 1, "U")])
    S = D.restrict([D.entries[0].point])
    fib = forget_map(build_graph(D, 8), build_graph(S, 8)).fibers()
    assert sorted({len(f) for w, f in fib.items() if w.bundle.gap >= 2}) == [2, 4]
