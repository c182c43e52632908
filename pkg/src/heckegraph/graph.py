"""Hecke graphs on P^1: modifications, level transport, edges and graph checks."""
from __future__ import annotations

from collections import Counter, defaultdict, deque
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

from .algebra import (
    FiniteField,
    Point,
    local_ring,
    mat_mul2,
    poly_add,
    poly_degree,
    poly_format,
    poly_mul,
    poly_scale,
    poly_shift,
    poly_sub,
    poly_trim,
)
from .local_hecke import LocalHeckeDatum, UNRAMIFIED, classify, coset_reps
from .moduli import BundleType, LevelSpace, Vertex, normalize_bundle
from .subgroups import RamificationDatum


# --- modifications ---------------------------------------------------------------

Poly = tuple  # field codes, low degree first


@dataclass(frozen=True)
class ModificationMatrix:
    """Columns span a subsheaf of colength one at x; target is its splitting type."""

    entries: tuple[Poly, Poly, Poly, Poly]
    target: BundleType
    line: str

    def format(self, F: FiniteField) -> str:
        a, b, c, d = (poly_format(F, e) for e in self.entries)
        return f"[[{a},{b}],[{c},{d}]]"


def _shift_degree(col: Sequence[Poly], shifts: Sequence[int]) -> int:
    return max(poly_degree(e) - s for e, s in zip(col, shifts) if poly_trim(e))


def _leading(col: Sequence[Poly], shifts: Sequence[int], delta: int) -> list[int]:
    out = []
    for e, s in zip(col, shifts):
        k = s + delta
        e = poly_trim(e)
        out.append(e[k] if 0 <= k < len(e) else 0)
    return out


def column_reduce(F: FiniteField, cols: list[list[Poly]], shifts: Sequence[int]):
    """Shifted column reduction of a 2 x 2 polynomial matrix.

    On exit the leading coefficient vectors are independent, so the column
    module splits as O(-delta_1) + O(-delta_2) inside O(n1) + O(n2).
    """
    cols = [list(c) for c in cols]
    while True:
        deltas = [_shift_degree(c, shifts) for c in cols]
        L = [_leading(c, shifts, d) for c, d in zip(cols, deltas)]
        det = F.add_table[F.mul_table[L[0][0]][L[1][1]]][F.neg_table[F.mul_table[L[0][1]][L[1][0]]]]
        if det:
            return cols, deltas
        hi, lo = (0, 1) if deltas[0] >= deltas[1] else (1, 0)
        # L[hi] = alpha * L[lo]
        k = next(i for i in range(2) if L[lo][i])
        alpha = F.mul_table[L[hi][k]][F.inv_table[L[lo][k]]]
        sh = deltas[hi] - deltas[lo]
        cols[hi] = [poly_sub(F, a, poly_shift(poly_scale(F, alpha, b), sh)) for a, b in zip(cols[hi], cols[lo])]


def modifications(bundle: BundleType, x: Point, mode: str = "PGL2") -> list[ModificationMatrix]:
    """One modification per line in the fibre at x (q^deg x + 1 of them)."""
    F = x.base
    px = x.coeffs
    shifts = (bundle.n1, bundle.n2)
    lines = []
    for low in product(range(F.q), repeat=x.degree):
        c = poly_trim(low)
        lines.append((poly_format(F, c), [[px, ()], [c, (1,)]]))
    lines.append(("inf", [[(1,), ()], [(), px]]))
    out = []
    for name, cols in lines:
        cols, deltas = column_reduce(F, cols, shifts)
        a, b = -deltas[0], -deltas[1]
        if a + b != bundle.n1 + bundle.n2 - x.degree:
            raise AssertionError("modification has the wrong degree")
        if a < b:
            cols, (a, b) = cols[::-1], (b, a)
        ent = (cols[0][0], cols[1][0], cols[0][1], cols[1][1])
        out.append(ModificationMatrix(tuple(poly_trim(e) for e in ent), normalize_bundle(a, b, mode), name))
    return out


def _expand_matrix(sigma: ModificationMatrix, z: Point, depth: int) -> tuple[int, ...]:
    return tuple(z.expand(e, depth) for e in sigma.entries)


def transport(level: Sequence[Sequence[int]], sigma: ModificationMatrix, datum: RamificationDatum,
              skip: Point | None = None) -> tuple:
    """Right-multiply each point's level matrix by the expansion of sigma there."""
    out = []
    for e, g in zip(datum.entries, level):
        if skip is not None and e.point == skip:
            out.append(tuple(g))
            continue
        R = e.ring()
        s = _expand_matrix(sigma, e.point, e.depth)
        if not R.is_unit(R.sub(R.mul(s[0], s[3]), R.mul(s[1], s[2]))):
            raise ValueError(f"modification is not invertible at {e.point.label}")
        out.append(mat_mul2(R, g, s))
    return tuple(out)


# --- edges ----------------------------------------------------------------------------

class EdgeEngine:
    """Computes out-edges of vertices for one datum and mode, with caches."""

    def __init__(self, datum: RamificationDatum, space: LevelSpace | None = None, lift=None):
        self.datum = datum
        self.mode = datum.mode
        self.space = space or LevelSpace(datum)
        self.x = datum.x
        self.lift = lift
        self._mods: dict[BundleType, list] = {}
        ex = datum.at(datum.x)
        self.x_index = None
        self.taus = None
        # the full group at x carries a one-point level set; skip it
        self.trivial_x = None
        if ex is not None and not datum.x_ramified:
            self.trivial_x = list(datum.points).index(datum.x)
        if ex is not None and datum.x_ramified:
            lh = LocalHeckeDatum(2, 1, datum.q, datum.x.degree, ex.depth, ex.label)
            case = classify(ex.label, 2, 1, ex.depth)
            if case == UNRAMIFIED:
                raise AssertionError("unexpected unramified case")
            self.case = case
            self.x_index = list(datum.points).index(datum.x)
            self.x_depth = ex.depth
            self.work = local_ring(datum.x.residue, ex.depth + 1)
            self.taus = [t.entries for t in coset_reps(lh)[1]]

    def mods(self, bundle: BundleType):
        m = self._mods.get(bundle)
        if m is None:
            m = []
            for s in modifications(bundle, self.x, self.mode):
                local = []
                for i, e in enumerate(self.datum.entries):
                    if i == self.trivial_x:
                        local.append((1, 0, 0, 1))
                    elif i == self.x_index:
                        local.append(_expand_matrix(s, e.point, e.depth + 1))
                    else:
                        local.append(_expand_matrix(s, e.point, e.depth))
                m.append((s, local))
            self._mods[bundle] = m
        return m

    def out_edges(self, v: Vertex) -> Counter:
        """Counter mapping (target bundle, orbit id) to multiplicity."""
        space = self.space
        tables = space.tables
        out = Counter()
        mods = self.mods(v.bundle)
        level = v.level
        if self.lift is not None:
            level = self.lift(v)
        if self.x_index is None:
            for s, local in mods:
                cos = [t.coset(mat_mul2(t.ring, g, a)) for t, g, a in zip(tables, level, local)]
                out[(s.target, space.orbit_id(s.target, cos))] += 1
            return out
        xi, d, W = self.x_index, self.x_depth, self.work
        q = W.q
        top = q**d
        a_x = level[xi]  # zero extension: codes are unchanged
        for tau in self.taus:
            ta = mat_mul2(W, tau, a_x)
            hits = []
            for s, local in mods:
                m = mat_mul2(W, ta, local[xi])
                if m[0] % q or m[1] % q:
                    continue
                b = (m[0] // q, m[1] // q, m[2] % top, m[3] % top)
                hits.append((s, local, b))
            if len(hits) != 1:
                raise AssertionError(f"{len(hits)} modifications survive for one coset representative")
            s, local, b = hits[0]
            Rd = tables[xi].ring
            if not Rd.is_unit(Rd.sub(Rd.mul(b[0], b[3]), Rd.mul(b[1], b[2]))):
                raise AssertionError("target level is not invertible")
            cos = []
            for i, (t, g, a) in enumerate(zip(tables, level, local)):
                cos.append(t.coset(b) if i == xi else t.coset(mat_mul2(t.ring, g, a)))
            out[(s.target, space.orbit_id(s.target, cos))] += 1
        return out


def edges_from(v: Vertex, datum: RamificationDatum, space: LevelSpace | None = None) -> Counter:
    eng = EdgeEngine(datum, space)
    return Counter({eng.space.vertex(b, o): m for (b, o), m in eng.out_edges(v).items()})


# --- graphs ---------------------------------------------------------------------------

@dataclass
class HeckeGraph:
    datum: RamificationDatum
    window: int
    vertices: list[Vertex]
    edges: dict[Vertex, Counter]
    boundary: set = field(default_factory=set)
    space: LevelSpace | None = None

    @property
    def mode(self) -> str:
        return self.datum.mode

    @property
    def q(self) -> int:
        return self.datum.q

    def interior(self) -> list[Vertex]:
        return [v for v in self.vertices if v not in self.boundary]

    def out_degree(self, v: Vertex) -> int:
        return sum(self.edges[v].values())

    def expected_out_degree(self) -> int:
        qx = self.q**self.datum.x.degree
        return qx if self.datum.x_ramified else qx + 1

    def key(self, v: Vertex) -> str:
        return v.key(self.mode)

    def in_edges(self) -> dict[Vertex, Counter]:
        inc: dict[Vertex, Counter] = defaultdict(Counter)
        for v, outs in self.edges.items():
            for w, m in outs.items():
                inc[w][v] += m
        return inc


def bundles_in_window(mode: str, window: int) -> list[BundleType]:
    if mode == "PGL2":
        return [BundleType(n, 0) for n in range(window + 1)]
    # GL2: splitting types with 0 <= n1 - n2 <= window and -window <= n2 <= 0
    return [BundleType(n2 + g, n2) for n2 in range(-window, 1) for g in range(window + 1)]


def build_graph(datum: RamificationDatum, window: int, space: LevelSpace | None = None) -> HeckeGraph:
    space = space or LevelSpace(datum)
    eng = EdgeEngine(datum, space)
    bundles = bundles_in_window(datum.mode, window)
    inside = set(bundles)
    vertices = [v for b in bundles for v in space.vertices(b)]
    vertices.sort()
    edges: dict[Vertex, Counter] = {}
    boundary = set()
    for v in vertices:
        outs = Counter()
        for (b, o), m in eng.out_edges(v).items():
            if b in inside:
                outs[space.vertex(b, o)] += m
            else:
                boundary.add(v)
        edges[v] = outs
    return HeckeGraph(datum, window, vertices, edges, boundary, space)


def check_out_degree(G: HeckeGraph) -> dict:
    want = G.expected_out_degree()
    bad = [{"vertex": G.key(v), "out": G.out_degree(v)} for v in G.interior() if G.out_degree(v) != want]
    return {"ok": not bad, "expected": want, "checked": len(G.interior()), "violations": bad}


# --- vertex maps ------------------------------------------------------------------------

@dataclass
class VertexMap:
    source: HeckeGraph
    target: HeckeGraph
    mapping: dict[Vertex, Vertex]

    def fibers(self) -> dict[Vertex, list[Vertex]]:
        fib: dict[Vertex, list[Vertex]] = defaultdict(list)
        for v, w in self.mapping.items():
            fib[w].append(v)
        return fib


def forget_map(G: HeckeGraph, H: HeckeGraph) -> VertexMap:
    """Forget the levels at points of G's datum that are not in H's datum."""
    dG, dH = G.datum, H.datum
    if dG.mode != dH.mode or dG.x != dH.x or dG.field is not dH.field:
        raise ValueError("graphs must share field, mode and Hecke point")
    pos = []
    for e in dH.entries:
        f = dG.at(e.point)
        if f is None or f.depth != e.depth or f.label.normalized(2) != e.label.normalized(2):
            raise ValueError(f"{e.point.label} is not ramified the same way in the source")
        pos.append(list(dG.points).index(e.point))
    if dG.at(dG.x) is not None and dH.at(dH.x) is None:
        raise ValueError("the forgotten part must not contain the Hecke point")
    mapping = {}
    for v in G.vertices:
        mapping[v] = H.space.canonical(v.bundle, [v.level[i] for i in pos])
    return VertexMap(G, H, mapping)


def cusp_threshold(datum: RamificationDatum) -> int:
    """Least bundle gap above which the covering statements apply."""
    return 2 * datum.degree - 2 + datum.x.degree


def check_covering(vm: VertexMap, threshold: int | None = None) -> dict:
    """Surjectivity and the two edge bijections above the threshold, plus disjointness.

    A vertex v of the source is checked when its gap exceeds the threshold and
    neither v nor its image sits on the window boundary.  Out-bijection: the
    out-edge multiset of v pushed forward equals the out-edges of its image.
    In-bijection: for every edge w -> f(v) downstairs, the multiplicity of edges
    into v from the fibre of w equals the downstairs multiplicity.
    """
    G, H = vm.source, vm.target
    if threshold is None:
        threshold = cusp_threshold(G.datum)
    f = vm.mapping
    violations = []
    image = set(f.values())
    considered = [w for w in H.vertices if w.bundle.gap > threshold and w not in H.boundary]
    for w in considered:
        if w not in image:
            violations.append({"kind": "not-surjective", "vertex": H.key(w)})
    inG = G.in_edges()
    inH = H.in_edges()
    checked = 0
    for v in G.vertices:
        if v.bundle.gap <= threshold or v in G.boundary:
            continue
        w = f[v]
        if w in H.boundary:
            continue
        checked += 1
        pushed = Counter()
        for u, m in G.edges[v].items():
            pushed[f[u]] += m
        if pushed != H.edges[w]:
            violations.append({"kind": "out-edges", "vertex": G.key(v),
                               "up": {H.key(a): m for a, m in sorted(pushed.items())},
                               "down": {H.key(a): m for a, m in sorted(H.edges[w].items())}})
        pulled = Counter()
        for u, m in inG.get(v, {}).items():
            pulled[f[u]] += m
        down_in = Counter({a: m for a, m in inH.get(w, {}).items()
                           if not (a.bundle.gap <= threshold)})
        pulled = Counter({a: m for a, m in pulled.items() if not (a.bundle.gap <= threshold)})
        if pulled != down_in:
            violations.append({"kind": "in-edges", "vertex": G.key(v),
                               "up": {H.key(a): m for a, m in sorted(pulled.items())},
                               "down": {H.key(a): m for a, m in sorted(down_in.items())}})
    is_cov = not violations
    mono = loop_monodromy(vm, threshold)
    rep = {"is_covering": is_cov, "disjoint": is_cov and mono["witness"] is None, "checked": checked,
           "threshold": threshold, "violations": violations}
    if mono["witness"] is not None:
        rep["open_loop"] = mono["witness"]
    return rep


def loop_monodromy(vm: VertexMap, threshold: int) -> dict:
    """Lift loops of the base cusp region breadth-first and record where they end.

    Edges are walked in both directions.  For a lift v of a base vertex b, the
    endpoints of lifted loops at b are exactly the lifts of b reachable from v
    inside the cusp region.  Returns {orbits: v -> sorted endpoints, witness},
    where witness is a base loop (as vertex keys) whose lift does not close up.
    """
    G, H = vm.source, vm.target
    f = vm.mapping
    region = {v for v in G.vertices if v.bundle.gap > threshold}
    adj: dict[Vertex, set] = defaultdict(set)
    for v in region:
        for u in G.edges[v]:
            if u in region:
                adj[v].add(u)
                adj[u].add(v)
    orbits: dict[Vertex, list] = {}
    witness = None
    seen = set()
    for s in sorted(region):
        if s in seen:
            continue
        parent = {s: None}
        dq = deque([s])
        seen.add(s)
        comp = []
        while dq:
            v = dq.popleft()
            comp.append(v)
            for u in sorted(adj[v]):
                if u not in seen:
                    seen.add(u)
                    parent[u] = v
                    dq.append(u)
        over: dict[Vertex, list] = defaultdict(list)
        for v in comp:
            over[f[v]].append(v)
        for b, lifts in over.items():
            lifts.sort()
            for v in lifts:
                orbits[v] = lifts
            if witness is None and len(lifts) > 1:
                witness = _loop_between(parent, lifts[0], lifts[1], H, f)
    return {"orbits": orbits, "witness": witness}


def _loop_between(parent, a, b, H, f) -> list[str]:
    """Project the tree path a -> b of the cover: a base loop lifting from a to b."""
    def up(v):
        path = []
        while v is not None:
            path.append(v)
            v = parent[v]
        return path
    pa, pb = up(a), up(b)
    common = set(pa) & set(pb)
    ia = next(i for i, v in enumerate(pa) if v in common)
    ib = pb.index(pa[ia])
    path = pa[:ia + 1] + list(reversed(pb[:ib]))
    return [H.key(f[v]) for v in path]


def identity_map(G: HeckeGraph) -> VertexMap:
    return VertexMap(G, G, {v: v for v in G.vertices})


# --- change of ramification -----------------------------------------------------------

def identify_change_of_ramification(G1: HeckeGraph, G2: HeckeGraph) -> dict:
    """Check that enlarging the level groups fuses vertices and keeps edges.

    Both data must have the same points and depths, with the same coset
    representatives at x.  For every vertex a of G2 and every lift of a in G1,
    the out-edges of the lift pushed down equal the out-edges of a.
    """
    d1, d2 = G1.datum, G2.datum
    if d1.points != d2.points or d1.x != d2.x or d1.mode != d2.mode:
        raise ValueError("data must share points, Hecke point and mode")
    e1 = EdgeEngine(d1, G1.space)
    e2 = EdgeEngine(d2, G2.space)
    if (e1.taus is None) != (e2.taus is None) or (e1.taus is not None and e1.taus != e2.taus):
        raise ValueError("coset representatives at x differ; the proposition does not apply")
    for a, b in zip(d1.entries, d2.entries):
        if a.depth != b.depth:
            raise ValueError("depths differ")
    mapping = {v: G2.space.canonical(v.bundle, v.level) for v in G1.vertices}
    vm = VertexMap(G1, G2, mapping)
    fib = vm.fibers()
    violations = []
    checked = 0
    interior2 = set(G2.interior())
    for a in G2.vertices:
        if a not in fib:
            violations.append({"kind": "not-surjective", "vertex": G2.key(a)})
            continue
        if a not in interior2:
            continue
        for lift in fib[a]:
            if lift in G1.boundary:
                continue
            checked += 1
            pushed = Counter()
            for u, m in G1.edges[lift].items():
                pushed[mapping[u]] += m
            if pushed != G2.edges[a]:
                violations.append({"kind": "edges", "vertex": G2.key(a), "lift": G1.key(lift)})
    return {"ok": not violations, "checked": checked,
            "fused": len(G1.vertices) - len(G2.vertices), "violations": violations}


# --- PGL descent ------------------------------------------------------------------------

def check_pgl_descent(datum: RamificationDatum, window: int) -> dict:
    """Compare a GL2 window graph with the PGL2 graph edge-multiset exactly.

    Each PGL2 vertex (E_n, g) is lifted to (O(n)+O, g) with the GL2 class of g;
    its GL2 out-edges, projected by twisting and passing to Z.H classes, must
    equal its PGL2 out-edges.
    """
    gl = datum.with_mode("GL2")
    pgl = datum.with_mode("PGL2")
    sp_gl = LevelSpace(gl)
    sp_pgl = LevelSpace(pgl)
    eng_gl = EdgeEngine(gl, sp_gl)
    P = build_graph(pgl, window, sp_pgl)
    violations = []
    checked = 0
    for v in P.interior():
        lift = sp_gl.canonical(BundleType(v.bundle.n1, 0), v.level)
        pushed = Counter()
        for (b, o), m in eng_gl.out_edges(lift).items():
            w = sp_gl.vertex(b, o)
            pushed[sp_pgl.canonical(BundleType(b.gap, 0), w.level)] += m
        checked += 1
        if pushed != P.edges[v]:
            violations.append({"vertex": P.key(v),
                               "gl": {P.key(a): m for a, m in sorted(pushed.items())},
                               "pgl": {P.key(a): m for a, m in sorted(P.edges[v].items())}})
    fused = 0
    for n in range(window + 1):
        fused += sp_gl.orbit_count(BundleType(n, 0)) - sp_pgl.orbit_count(BundleType(n, 0))
    return {"ok": not violations, "checked": checked, "gl_classes_fused": fused, "violations": violations}


# --- export ---------------------------------------------------------------------------------

def graph_to_json(G: HeckeGraph) -> dict:
    keys = {v: G.key(v) for v in G.vertices}
    verts = []
    for v in G.vertices:
        verts.append({"key": keys[v], "bundle": v.bundle.to_json(),
                      "level": [[G.space.tables[i].ring.digits(c) for c in g] for i, g in enumerate(v.level)],
                      "boundary": v in G.boundary})
    edges = []
    for v in G.vertices:
        for w, m in sorted(G.edges[v].items()):
            edges.append({"src": keys[v], "dst": keys[w], "mult": m})
    d = G.datum
    return {"mode": d.mode, "q": d.q, "x": d.x.label, "datum": d.describe(), "window": G.window,
            "vertices": verts, "edges": edges}


def graph_to_dot(G: HeckeGraph) -> str:
    lines = ["digraph hecke {"]
    ids = {}
    for i, v in enumerate(G.vertices):
        ids[v] = f"v{i}"
        label = f"{v.bundle.tag(G.mode)} | {v.tag}".replace('"', '\\"')
        style = ", style=dashed" if v in G.boundary else ""
        lines.append(f'  v{i} [label="{label}"{style}];')
    for v in G.vertices:
        for w, m in sorted(G.edges[v].items()):
            lines.append(f'  {ids[v]} -> {ids[w]} [label="{m}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
