"""Vertices of Hecke graphs over P^1: bundle types and canonical level structures.

A level structure on O(n1)+O(n2) is a class in L \\ G(O_D) / A where L is the
left subgroup of the mode (H, or Z.H for PGL2) and A is the image of the
automorphism group of the bundle.  Each point of D contributes the finite set
of left cosets L_y \\ G(O_y); A acts on the product of these sets and the
canonical representative of an orbit is its least element in the canonical
order, which is the lexicographically least tuple of per-point coset minima.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .algebra import (
    FieldElement,
    LocalRing,
    enumerate_gl,
    mat_key,
    mat_mul2,
)
from .subgroups import (
    DEFAULT_BOUND,
    EnumerationBoundError,
    RamificationDatum,
    RamPoint,
    SubgroupLabel,
    enumerate_members,
    left_subgroup_for_mode,
)


@dataclass(frozen=True, order=True)
class BundleType:
    n1: int
    n2: int = 0

    def __post_init__(self):
        if self.n1 < self.n2:
            raise ValueError("bundle type needs n1 >= n2")

    @property
    def gap(self) -> int:
        return self.n1 - self.n2

    def tag(self, mode: str) -> str:
        if mode == "PGL2":
            return f"E_{self.gap}"
        return f"O({self.n1})+O({self.n2})"

    def to_json(self) -> list[int]:
        return [self.n1, self.n2]


def normalize_bundle(a: int, b: int, mode: str) -> BundleType:
    hi, lo = max(a, b), min(a, b)
    if mode == "PGL2":
        return BundleType(hi - lo, 0)
    return BundleType(hi, lo)


@dataclass(frozen=True, order=True)
class Vertex:
    bundle: BundleType
    orbit: int
    level: tuple = field(compare=False)
    tag: str = field(compare=False, default="")

    def key(self, mode: str) -> str:
        return f"{self.bundle.tag(mode)}|{self.tag}"


class PointTables:
    """Left cosets L_y \\ G(O_y) at one ramification point."""

    def __init__(self, entry: RamPoint, left: SubgroupLabel, bound: int = DEFAULT_BOUND):
        self.entry = entry
        self.ring: LocalRing = entry.ring()
        R = self.ring
        G = enumerate_gl(R, 2)
        if len(G) > bound:
            raise EnumerationBoundError(f"|GL2({R})| = {len(G)} exceeds bound")
        self.G = G
        self.index = {g: i for i, g in enumerate(G)}
        H = enumerate_members(left, R, 2, bound)
        coset_of = [-1] * len(G)
        reps = []
        # G is sorted, so the first unassigned element is its coset minimum and
        # coset ids come out ordered by their minima.
        for i, g in enumerate(G):
            if coset_of[i] >= 0:
                continue
            c = len(reps)
            reps.append(i)
            for h in H:
                coset_of[self.index[mat_mul2(R, h, g)]] = c
        self.coset_of = coset_of
        self.reps = reps
        self._perm_cache: dict[tuple, list[int]] = {}

    @property
    def ncosets(self) -> int:
        return len(self.reps)

    def coset(self, g: Sequence[int]) -> int:
        return self.coset_of[self.index[tuple(g)]]

    def right_perm(self, a: Sequence[int]) -> list[int]:
        a = tuple(a)
        perm = self._perm_cache.get(a)
        if perm is None:
            R, G = self.ring, self.G
            perm = [self.coset_of[self.index[mat_mul2(R, G[r], a)]] for r in self.reps]
            self._perm_cache[a] = perm
        return perm

    def rep(self, c: int) -> tuple[int, ...]:
        return self.G[self.reps[c]]

    def format(self, g: Sequence[int]) -> str:
        f = self.ring.format
        return f"[[{f(g[0])},{f(g[1])}],[{f(g[2])},{f(g[3])}]]"


def aut_signature(bundle: BundleType, datum: RamificationDatum):
    """Bundles with equal signature have equal automorphism images on D."""
    gap = bundle.gap
    if gap == 0:
        return ("square",)
    return ("split", min(gap, max(datum.degree - 1, 0)))


def aut_generators(bundle: BundleType, datum: RamificationDatum) -> list[tuple[tuple[int, ...], ...]]:
    """Generators of the image of Aut(bundle) in GL2(O_D), one matrix per point."""
    F = datum.field
    zeta = next(a for a in range(1, F.q) if _order(F, a) == F.q - 1)
    basis = [F.p**i for i in range(F.e)]  # F_p-basis of F_q as field codes
    entries = datum.entries
    consts = []  # constant matrices over F_q, as 4-tuples of F_q codes
    consts.append((zeta, 0, 0, 1))
    consts.append((1, 0, 0, zeta))
    gens = [tuple(_embed_const(e, m) for e in entries) for m in consts]
    sig = aut_signature(bundle, datum)
    if sig[0] == "square":
        for b in basis:
            gens.append(tuple(_embed_const(e, (1, b, 0, 1)) for e in entries))
        gens.append(tuple(_embed_const(e, (0, 1, 1, 0)) for e in entries))
    else:
        top = sig[1]
        for j in range(top + 1):
            for b in basis:
                poly = (0,) * j + (b,)
                gens.append(tuple((1, e.point.expand(poly, e.depth), 0, 1) for e in entries))
    return gens


def _order(F, a: int) -> int:
    k, x = 1, a
    while x != 1:
        x = F.mul_table[x][a]
        k += 1
    return k


def _embed_const(entry: RamPoint, m: Sequence[int]) -> tuple[int, ...]:
    # constants of F_q land in the pi^0 coefficient of O_y
    emb = entry.point.embed
    return tuple(emb[c] for c in m)


class LevelSpace:
    """Canonical level structures for one ramification datum and mode."""

    def __init__(self, datum: RamificationDatum, mode: str | None = None, bound: int = DEFAULT_BOUND):
        self.datum = datum
        self.mode = mode or datum.mode
        self.bound = bound
        self.tables = [PointTables(e, left_subgroup_for_mode(e.label, self.mode), bound)
                       for e in datum.entries]
        self.radix = []
        m = 1
        for t in reversed(self.tables):
            self.radix.append(m)
            m *= t.ncosets
        self.radix.reverse()
        self.size = m
        if m > bound:
            raise EnumerationBoundError(f"product of coset spaces has {m} elements")
        self._orbits: dict[tuple, tuple[list[int], list[int]]] = {}

    # product indices ---------------------------------------------------------
    def encode(self, cosets: Sequence[int]) -> int:
        return sum(c * r for c, r in zip(cosets, self.radix))

    def decode(self, idx: int) -> list[int]:
        out = []
        for t, r in zip(self.tables, self.radix):
            out.append(idx // r)
            idx %= r
        return out

    def _orbit_data(self, bundle: BundleType):
        sig = aut_signature(bundle, self.datum)
        data = self._orbits.get(sig)
        if data is not None:
            return data
        gens = aut_generators(bundle, self.datum)
        perms = [[t.right_perm(g[i]) for i, t in enumerate(self.tables)] for g in gens]
        orbit_of = [-1] * self.size
        mins = []
        for start in range(self.size):
            if orbit_of[start] >= 0:
                continue
            oid = len(mins)
            mins.append(start)
            orbit_of[start] = oid
            stack = [start]
            while stack:
                cur = self.decode(stack.pop())
                for perm in perms:
                    nxt = self.encode([p[c] for p, c in zip(perm, cur)])
                    if orbit_of[nxt] < 0:
                        orbit_of[nxt] = oid
                        stack.append(nxt)
        data = (orbit_of, mins)
        self._orbits[sig] = data
        return data

    def orbit_count(self, bundle: BundleType) -> int:
        return len(self._orbit_data(bundle)[1])

    def _vertex(self, bundle: BundleType, oid: int, mins: list[int]) -> Vertex:
        cos = self.decode(mins[oid])
        level = tuple(t.rep(c) for t, c in zip(self.tables, cos))
        tag = ";".join(t.format(g) for t, g in zip(self.tables, level)) or "*"
        return Vertex(bundle, oid, level, tag)

    def vertex_from_cosets(self, bundle: BundleType, cosets: Sequence[int]) -> Vertex:
        orbit_of, mins = self._orbit_data(bundle)
        return self._vertex(bundle, orbit_of[self.encode(cosets)], mins)

    def orbit_id(self, bundle: BundleType, cosets: Sequence[int]) -> int:
        return self._orbit_data(bundle)[0][self.encode(cosets)]

    def canonical(self, bundle: BundleType, level: Sequence[Sequence[int]]) -> Vertex:
        """Vertex of the class of level (one code tuple per point, in datum order)."""
        cos = [t.coset(g) for t, g in zip(self.tables, level)]
        return self.vertex_from_cosets(bundle, cos)

    def vertices(self, bundle: BundleType) -> list[Vertex]:
        orbit_of, mins = self._orbit_data(bundle)
        return [self._vertex(bundle, i, mins) for i in range(len(mins))]

    def vertex(self, bundle: BundleType, oid: int) -> Vertex:
        return self._vertex(bundle, oid, self._orbit_data(bundle)[1])


# convenience wrappers matching the operation names --------------------------------

def aut_image(bundle: BundleType, datum: RamificationDatum):
    return aut_generators(bundle, datum)


def canonical_level(level, bundle: BundleType, datum: RamificationDatum, mode: str | None = None) -> Vertex:
    return LevelSpace(datum, mode).canonical(bundle, level)


def enumerate_vertices(bundle: BundleType, datum: RamificationDatum, mode: str | None = None) -> list[Vertex]:
    return LevelSpace(datum, mode).vertices(bundle)


INF = "inf"


def projective_coordinates(v: Vertex, datum: RamificationDatum) -> tuple:
    """Per point, the class of the row (0,1).g in P^1(k_z), as 'inf' or a field element."""
    for e in datum.entries:
        if e.label.normalized(2).kind != "B" or e.depth != 1:
            raise ValueError("projective coordinates need B-ramification of depth 1 everywhere")
    out = []
    for e, g in zip(datum.entries, v.level):
        K = e.point.residue
        v1, v2 = g[2], g[3]
        if v1 == 0:
            out.append(INF)
        else:
            out.append(FieldElement(K, K.mul_table[v2][K.inv_table[v1]]))
    return tuple(out)


def level_from_coordinates(coords: Sequence, datum: RamificationDatum) -> tuple:
    """Depth-one matrices with second row [1:v] (or [0:1] for 'inf')."""
    level = []
    for e, v in zip(datum.entries, coords):
        if v == INF:
            level.append((1, 0, 0, 1))
        else:
            code = v.code if isinstance(v, FieldElement) else int(v)
            level.append((0, 1, 1, code))
    return tuple(level)
