"""The torus invariant T_D(tau), regularity of ramification data, fibre sizes."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Sequence

from .algebra import enumerate_gl, mat_inv, mat_mul2
from .subgroups import (
    RamificationDatum,
    RamPoint,
    SubgroupLabel,
    enumerate_members,
    left_subgroup_for_mode,
    membership,
)

TorusElement = tuple  # (a, b) field codes of F_q, meaning diag(a, b)


@dataclass(frozen=True)
class TorusSubgroup:
    elements: frozenset

    def __len__(self):
        return len(self.elements)

    def sorted(self) -> list[TorusElement]:
        return sorted(self.elements)


def torus(F) -> list[TorusElement]:
    return [(a, b) for a in range(1, F.q) for b in range(1, F.q)]


def _embedded(entry: RamPoint, t: TorusElement) -> tuple[int, int, int, int]:
    emb = entry.point.embed
    return (emb[t[0]], 0, 0, emb[t[1]])


def _left_label(entry: RamPoint, mode: str) -> SubgroupLabel:
    return left_subgroup_for_mode(entry.label, mode)


def local_torus_set(entry: RamPoint, tau: Sequence[int], mode: str) -> frozenset:
    """{t in T(k) : t in tau H tau^-1 U(O)}, by scanning u in U(O)."""
    R = entry.ring()
    pred = membership(_left_label(entry, mode), R, 2)
    tinv = mat_inv(R, 2, tau)
    out = set()
    for t in torus(entry.point.base):
        tm = _embedded(entry, t)
        for c in range(R.size):
            u_inv = (1, R.neg(c), 0, 1)
            m = mat_mul2(R, mat_mul2(R, mat_mul2(R, tinv, tm), u_inv), tau)
            if pred(m):
                out.add(t)
                break
    return frozenset(out)


def torus_group(datum: RamificationDatum, tau: Sequence[Sequence[int]], points=None) -> TorusSubgroup:
    """T_D(tau) over the given points (default: all points of the datum)."""
    entries = datum.entries if points is None else [datum.at(p) for p in points]
    group = set(torus(datum.field))
    for e, t in zip(entries, tau):
        group &= local_torus_set(e, t, datum.mode)
    return TorusSubgroup(frozenset(group))


def double_coset_transversal(entry: RamPoint, mode: str) -> list[tuple[int, ...]]:
    """Representatives of B(O) \\ G(O) / H(O), each the least element of its class."""
    R = entry.ring()
    G = enumerate_gl(R, 2)
    index = {g: i for i, g in enumerate(G)}
    B = enumerate_members(SubgroupLabel("B"), R, 2)
    H = enumerate_members(_left_label(entry, mode), R, 2)
    seen = [False] * len(G)
    reps = []
    for i, g in enumerate(G):
        if seen[i]:
            continue
        reps.append(g)
        left = {mat_mul2(R, b, g) for b in B}
        for a in left:
            for h in H:
                seen[index[mat_mul2(R, a, h)]] = True
    return reps


@dataclass
class RegularityReport:
    regular: bool
    common: TorusSubgroup | None
    witness: tuple | None
    transversal_sizes: list[int]


def is_regular(datum: RamificationDatum, points=None) -> RegularityReport:
    entries = list(datum.entries) if points is None else [datum.at(p) for p in points]
    if not entries:
        return RegularityReport(True, TorusSubgroup(frozenset(torus(datum.field))), None, [])
    per_point = []
    for e in entries:
        per_point.append([(tau, local_torus_set(e, tau, datum.mode)) for tau in
                          double_coset_transversal(e, datum.mode)])
    full = frozenset(torus(datum.field))
    first = None
    for combo in product(*per_point):
        grp = full
        for _, s in combo:
            grp = grp & s
        taus = tuple(t for t, _ in combo)
        if first is None:
            first = (taus, grp)
        elif grp != first[1]:
            return RegularityReport(False, None, (first[0], taus), [len(p) for p in per_point])
    return RegularityReport(True, TorusSubgroup(first[1]), None, [len(p) for p in per_point])


def _unipotent_generators(entry: RamPoint) -> list[tuple[int, ...]]:
    R = entry.ring()
    F = R.field
    gens = []
    for i in range(R.depth):
        for j in range(F.e):
            gens.append((1, R.mul(F.p**j, R.pi_power(i)), 0, 1))
    return gens


def double_coset_count(datum: RamificationDatum, points, torus_part) -> int:
    """|L(O_D1) \\ G(O_D1) / T' U(O_D1)| with T' given as a list of torus elements.

    U(O_D1) is generated pointwise by 1 + c pi^i E_12 with c in an F_p-basis,
    independently at each point, and T' acts diagonally through constants.
    """
    entries = [datum.at(p) for p in points]
    if not entries:
        return 1
    from .moduli import PointTables

    tables = [PointTables(e, _left_label(e, datum.mode)) for e in entries]
    sizes = [t.ncosets for t in tables]
    gens = []
    for t in torus_part:
        gens.append([tab.right_perm(_embedded(e, t)) for tab, e in zip(tables, entries)])
    ident = [list(range(s)) for s in sizes]
    for k, e in enumerate(entries):
        for u in _unipotent_generators(e):
            perm = [p[:] for p in ident]
            perm[k] = tables[k].right_perm(u)
            gens.append(perm)
    radix = []
    m = 1
    for s in reversed(sizes):
        radix.append(m)
        m *= s
    radix.reverse()

    def decode(i):
        out = []
        for r in radix:
            out.append(i // r)
            i %= r
        return out

    seen = bytearray(m)
    orbits = 0
    for start in range(m):
        if seen[start]:
            continue
        orbits += 1
        seen[start] = 1
        stack = [start]
        while stack:
            cur = decode(stack.pop())
            for g in gens:
                nxt = sum(p[c] * r for p, c, r in zip(g, cur, radix))
                if not seen[nxt]:
                    seen[nxt] = 1
                    stack.append(nxt)
    return orbits


def predicted_fiber_size(datum: RamificationDatum, d2_points, tau_d2) -> int:
    """Fibre of the map forgetting the points outside d2_points, over a cusp vertex
    whose D2-level g has tau = g^-1 (one matrix per point of d2_points)."""
    d2 = list(d2_points)
    d1 = [p for p in datum.points if p not in set(d2)]
    T = torus_group(datum, tau_d2, d2) if d2 else TorusSubgroup(frozenset(torus(datum.field)))
    return double_coset_count(datum, d1, T.sorted())


def cusp_level_count(datum: RamificationDatum) -> int:
    """|L(O_D) \\ G(O_D) / T(k) U(O_D)|: the number of levels on a cusp bundle."""
    return double_coset_count(datum, datum.points, torus(datum.field))


def check_fibers(vm) -> dict:
    """Compare forget_map fibre sizes over cusp vertices with the double-coset count.

    A base vertex counts as cusp once the automorphism image is all of
    T(k) U(O_D) for the source datum, i.e. its gap is at least deg D - 1.
    """
    src, dst = vm.source.datum, vm.target.datum
    low = max(1, src.degree - 1)
    fib = vm.fibers()
    rows, bad = [], []
    for v in vm.target.vertices:
        if v.bundle.gap < low:
            continue
        tau = [mat_inv(e.ring(), 2, g) for e, g in zip(dst.entries, v.level)]
        want = predicted_fiber_size(src, dst.points, tau)
        got = len(fib.get(v, []))
        rows.append((v, got, want))
        if got != want:
            bad.append({"vertex": vm.target.key(v), "fiber": got, "predicted": want})
    return {"ok": not bad, "checked": len(rows), "sizes": sorted({w for _, _, w in rows}),
            "violations": bad}


def check_monodromy(vm, threshold: int | None = None) -> dict:
    """Loop lifts of the forgetful covering stay inside torus orbits.

    With D2' the target datum minus its x-part, a lifted loop based at v may
    only end at v with its forgotten levels multiplied by some t in T_{D2'}(tau).
    """
    from .graph import cusp_threshold, loop_monodromy

    src, dst = vm.source.datum, vm.target.datum
    if threshold is None:
        threshold = cusp_threshold(src)
    kept = set(dst.points)
    forgotten = [i for i, p in enumerate(src.points) if p not in kept]
    prime = [i for i, p in enumerate(dst.points) if p != dst.x]
    mono = loop_monodromy(vm, threshold)
    space = vm.source.space
    checked, moved, bad = 0, 0, []
    for v, ends in mono["orbits"].items():
        base = vm.mapping[v]
        tau = [mat_inv(dst.entries[i].ring(), 2, base.level[i]) for i in prime]
        T = torus_group(dst, tau, [dst.entries[i].point for i in prime]) if prime \
            else TorusSubgroup(frozenset(torus(src.field)))
        orbit = set()
        for t in T.elements:
            level = list(v.level)
            for i in forgotten:
                e = src.entries[i]
                level[i] = mat_mul2(e.ring(), level[i], _embedded(e, t))
            orbit.add(space.canonical(v.bundle, level))
        checked += 1
        moved += len(ends) > 1
        stray = [u for u in ends if u not in orbit]
        if stray:
            bad.append({"vertex": vm.source.key(v), "endpoint": vm.source.key(stray[0]), "torus": len(T)})
    return {"ok": not bad, "checked": checked, "nontrivial": moved, "open_loop": mono["witness"],
            "violations": bad}
