"""Eigenspace dimensions of Hecke graphs through cusp propagation.

The graph is cut into a finite core and cusp layers by bundle gap.  Values of
an eigenfunction on the core and on the propagating part of the first layer
determine it everywhere, so the eigenspace is the kernel of the core system
[M - lambda I | A] in the unknowns (core values, first-layer values).
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

from .graph import HeckeGraph
from .moduli import Vertex

IPoly = tuple  # integer coefficients, low degree first


# --- integer polynomials -------------------------------------------------------------

def ptrim(a) -> IPoly:
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    return tuple(a)


def padd(a: IPoly, b: IPoly) -> IPoly:
    n = max(len(a), len(b))
    return ptrim((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n))


def pneg(a: IPoly) -> IPoly:
    return tuple(-c for c in a)


def psub(a: IPoly, b: IPoly) -> IPoly:
    return padd(a, pneg(b))


def pmul(a: IPoly, b: IPoly) -> IPoly:
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return ptrim(out)


def pdiv_exact(a: IPoly, b: IPoly) -> IPoly:
    """a / b over Z[lambda]; raises if the division is not exact."""
    a = list(ptrim(a))
    b = ptrim(b)
    if not b:
        raise ZeroDivisionError("division by the zero polynomial")
    if not a:
        return ()
    quot = [0] * (len(a) - len(b) + 1)
    lead = b[-1]
    while len(a) >= len(b) and a:
        c, r = divmod(a[-1], lead)
        if r:
            raise ArithmeticError("inexact polynomial division")
        k = len(a) - len(b)
        quot[k] = c
        for i, y in enumerate(b):
            a[k + i] -= c * y
        a = list(ptrim(a))
    if a:
        raise ArithmeticError("inexact polynomial division")
    return ptrim(quot)


def peval(a: IPoly, x) -> Fraction:
    r = Fraction(0)
    for c in reversed(a):
        r = r * x + c
    return r


def pcontent(a: IPoly) -> int:
    g = 0
    for c in a:
        g = gcd(g, c)
    return g


def pprimitive(a: IPoly) -> IPoly:
    a = ptrim(a)
    if not a:
        return a
    g = pcontent(a)
    if a[-1] < 0:
        g = -g
    return tuple(c // g for c in a)


def pgcd(a: IPoly, b: IPoly) -> IPoly:
    """Primitive gcd over Z[lambda] via primitive pseudo-remainders."""
    a, b = pprimitive(a), pprimitive(b)
    while b:
        r = list(a)
        while len(r) >= len(b) and r:
            k = len(r) - len(b)
            lc = r[-1]
            r = [c * b[-1] for c in r]
            for i, y in enumerate(b):
                r[k + i] -= lc * y
            r = list(ptrim(r))
        a, b = b, pprimitive(tuple(r))
    return pprimitive(a)


# --- polynomial matrices and rank ------------------------------------------------------

@dataclass
class PolyMatrix:
    rows: list[list[IPoly]]

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.rows), (len(self.rows[0]) if self.rows else 0)

    @classmethod
    def from_lists(cls, rows) -> "PolyMatrix":
        return cls([[ptrim(e) if isinstance(e, (tuple, list)) else ptrim((e,)) for e in row] for row in rows])

    def specialize(self, x) -> list[list[Fraction]]:
        return [[peval(e, x) for e in row] for row in self.rows]

    def degree(self) -> int:
        return max((len(e) - 1 for row in self.rows for e in row), default=-1)


def bareiss_rank(M: PolyMatrix) -> tuple[int, IPoly]:
    """Fraction-free elimination over Z[lambda].

    Pivot choice: columns left to right, and within a column the lowest row
    index holding a nonzero entry.  Returns the rank and the last pivot, which
    is (up to sign) the minor on the pivot rows and columns.
    """
    A = [list(r) for r in M.rows]
    m, n = M.shape
    prev: IPoly = (1,)
    rank = 0
    for c in range(n):
        if rank == m:
            break
        piv = next((r for r in range(rank, m) if A[r][c]), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        p = A[rank][c]
        for r in range(rank + 1, m):
            a_rc = A[r][c]
            row = A[r]
            top = A[rank]
            for j in range(c + 1, n):
                t = pmul(p, row[j])
                if a_rc and top[j]:
                    t = psub(t, pmul(a_rc, top[j]))
                row[j] = pdiv_exact(t, prev) if t else ()
            row[c] = ()
        prev = p
        rank += 1
    return rank, prev


_PRIMES = (2305843009213693951, 4611686018427387847, 9223372036854775783, 1152921504606846883)


def _rank_mod_p(rows: list[list[int]], p: int) -> int:
    A = [[x % p for x in r] for r in rows]
    m = len(A)
    n = len(A[0]) if A else 0
    rank = 0
    for c in range(n):
        piv = next((r for r in range(rank, m) if A[r][c]), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        inv = pow(A[rank][c], p - 2, p)
        top = A[rank]
        for r in range(rank + 1, m):
            f = A[r][c]
            if f:
                f = f * inv % p
                row = A[r]
                for j in range(c, n):
                    if top[j]:
                        row[j] = (row[j] - f * top[j]) % p
        rank += 1
        if rank == m:
            break
    return rank


def rank_over_Qlambda(M: PolyMatrix, seed: int = 0) -> int:
    """Rank over Q(lambda).

    Any specialization at an integer point, reduced mod a prime, gives a lower
    bound; the row and column counts give an upper bound.  When the two meet
    the answer is certified; otherwise fall back to fraction-free elimination.
    """
    m, n = M.shape
    if m == 0 or n == 0:
        return 0
    full = min(m, n)
    rng = random.Random(seed)
    for p in _PRIMES[:2]:
        x = rng.randrange(1, p)
        rows = [[_peval_mod(e, x, p) for e in row] for row in M.rows]
        if _rank_mod_p(rows, p) == full:
            return full
    return bareiss_rank(M)[0]


def _peval_mod(a: IPoly, x: int, p: int) -> int:
    r = 0
    for c in reversed(a):
        r = (r * x + c) % p
    return r


def rank_rational(rows: list[list[Fraction]]) -> int:
    """Exact rank of a rational matrix, certified through a modular bound first."""
    m = len(rows)
    n = len(rows[0]) if rows else 0
    if m == 0 or n == 0:
        return 0
    den = 1
    for r in rows:
        for x in r:
            den = den * Fraction(x).denominator // gcd(den, Fraction(x).denominator)
    ints = [[int(Fraction(x) * den) for x in r] for r in rows]
    full = min(m, n)
    if _rank_mod_p(ints, _PRIMES[0]) == full:
        return full
    return _integer_bareiss_rank(ints)


def _integer_bareiss_rank(A: list[list[int]]) -> int:
    A = [r[:] for r in A]
    m, n = len(A), len(A[0])
    prev, rank = 1, 0
    for c in range(n):
        piv = next((r for r in range(rank, m) if A[r][c]), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        p = A[rank][c]
        top = A[rank]
        for r in range(rank + 1, m):
            row = A[r]
            f = row[c]
            for j in range(c + 1, n):
                row[j] = (p * row[j] - f * top[j]) // prev
            row[c] = 0
        prev = p
        rank += 1
        if rank == m:
            break
    return rank


# --- layering ----------------------------------------------------------------------------

class LayeringError(ValueError):
    pass


@dataclass
class Layering:
    layer: dict[Vertex, int]
    core: list[Vertex]
    first: list[Vertex]
    propagating: dict[int, list[Vertex]]
    M: list[list[int]]
    A: list[list[int]]
    checked_layers: int
    width: int


def layer_of(gap: int, deg_D: int, r: int) -> int:
    """Layer index i with r*i < gap + 2 - deg D <= r*(i+1), clamped below at 0."""
    val = gap + 2 - deg_D
    if val <= r:
        return 0
    return (val - 1) // r


def layering(G: HeckeGraph, min_layers: int = 3) -> Layering:
    if G.mode != "PGL2":
        raise LayeringError("layering is defined for PGL2 window graphs")
    d = G.datum
    r = d.x.degree
    layer = {v: layer_of(v.bundle.gap, d.degree, r) for v in G.vertices}
    top = max(layer.values())
    # Layers containing boundary vertices are incomplete.
    complete = [i for i in range(top + 1)
                if not any(layer[v] == i and v in G.boundary for v in G.vertices)]
    last = 0
    while last + 1 in complete:
        last += 1
    if last < min_layers:
        raise LayeringError(f"window {G.window} gives only {last} complete cusp layers")
    up = {}
    for v in G.vertices:
        up[v] = [w for w in G.edges[v] if layer[w] > layer[v]]
    prop = {i: [v for v in G.vertices if layer[v] == i and up[v]] for i in range(1, last + 1)}
    nonprop = {i: [v for v in G.vertices if layer[v] == i and not up[v]] for i in range(1, last + 1)}
    core = [v for v in G.vertices if layer[v] == 0] + nonprop[1]
    core_set = set(core)
    p1 = prop[1]
    p1_set = set(p1)
    for v in core:
        for w in G.edges[v]:
            if w not in core_set and w not in p1_set:
                raise LayeringError(f"core vertex {G.key(v)} has an edge to {G.key(w)} outside core and layer 1")
    for i in range(1, last):
        nxt = set(prop[i + 1]) | set(nonprop[i + 1])
        for v in prop[i]:
            for w in up[v]:
                if w not in nxt:
                    raise LayeringError(f"up-edge {G.key(v)} -> {G.key(w)} skips a layer")
        # values on non-propagating vertices follow from strictly lower layers
        for v in nonprop[i + 1]:
            for w in G.edges[v]:
                if layer[w] > i:
                    raise LayeringError(f"non-propagating {G.key(v)} reaches {G.key(w)}")
        block = [[G.edges[v].get(w, 0) for w in prop[i + 1]] for v in prop[i]]
        if len(prop[i]) != len(prop[i + 1]) or rank_rational(block) != len(prop[i]):
            raise LayeringError(f"propagation block between layers {i} and {i + 1} is not invertible")
    idx = {v: k for k, v in enumerate(core)}
    jdx = {v: k for k, v in enumerate(p1)}
    M = [[0] * len(core) for _ in core]
    A = [[0] * len(p1) for _ in core]
    for v in core:
        for w, m in G.edges[v].items():
            if w in idx:
                M[idx[v]][idx[w]] += m
            else:
                A[idx[v]][jdx[w]] += m
    return Layering(layer, core, p1, prop, M, A, last, r)


def core_system(L: Layering) -> PolyMatrix:
    rows = []
    for i, row in enumerate(L.M):
        out = []
        for j, m in enumerate(row):
            out.append(ptrim((m, -1)) if i == j else ptrim((m,)))
        out.extend(ptrim((a,)) for a in L.A[i])
        rows.append(out)
    return PolyMatrix(rows)


def generic_eigendim(L: Layering) -> int:
    n = len(L.core) + len(L.first)
    return n - rank_over_Qlambda(core_system(L))


def eigendim_at(L: Layering, lam) -> int:
    lam = Fraction(lam)
    rows = []
    for i, row in enumerate(L.M):
        rows.append([Fraction(m) - (lam if i == j else 0) for j, m in enumerate(row)] +
                    [Fraction(a) for a in L.A[i]])
    n = len(L.core) + len(L.first)
    return n - rank_rational(rows)


# --- exceptional polynomial --------------------------------------------------------------

def _rref(vectors: list[list[Fraction]], n: int):
    """Reduced row echelon basis of the span (pivot -> row)."""
    basis: dict[int, list[Fraction]] = {}
    for v in vectors:
        v = list(v)
        for p, row in basis.items():
            if v[p]:
                f = v[p]
                v = [a - f * b for a, b in zip(v, row)]
        piv = next((k for k in range(n) if v[k]), None)
        if piv is None:
            continue
        inv = 1 / v[piv]
        v = [a * inv for a in v]
        for p, row in basis.items():
            if row[piv]:
                f = row[piv]
                basis[p] = [a - f * b for a, b in zip(row, v)]
        basis[piv] = v
    return basis


def _charpoly_fraction(M: list[list[Fraction]]) -> IPoly:
    """Characteristic polynomial det(lambda I - M) via the Hessenberg form."""
    n = len(M)
    H = [row[:] for row in M]
    for k in range(n - 2):
        piv = next((i for i in range(k + 1, n) if H[i][k]), None)
        if piv is None:
            continue
        if piv != k + 1:
            H[k + 1], H[piv] = H[piv], H[k + 1]
            for row in H:
                row[k + 1], row[piv] = row[piv], row[k + 1]
        for i in range(k + 2, n):
            if H[i][k]:
                f = H[i][k] / H[k + 1][k]
                H[i] = [a - f * b for a, b in zip(H[i], H[k + 1])]
                for row in H:
                    row[k + 1] += f * row[i]
    polys: list[list[Fraction]] = [[Fraction(1)]]
    for m in range(1, n + 1):
        # p_m = (lambda - h_mm) p_{m-1} - sum_i h_{i,m} prod h_{j,j-1} p_{i-1}
        prev = polys[m - 1]
        cur = [Fraction(0)] + prev
        for i, c in enumerate(prev):
            cur[i] -= H[m - 1][m - 1] * c
        prod = Fraction(1)
        for i in range(m - 1, 0, -1):
            prod *= H[i][i - 1]
            coef = prod * H[i - 1][m - 1]
            if coef:
                for k, c in enumerate(polys[i - 1]):
                    cur[k] -= coef * c
        polys.append(cur)
    res = polys[n]
    if any(c.denominator != 1 for c in res):
        raise ArithmeticError("characteristic polynomial of an integer matrix must be integral")
    return ptrim(int(c) for c in res)


def exceptional_polynomial(L: Layering) -> IPoly:
    """gcd of the maximal minors of [M - lambda I | A].

    This gcd is the characteristic polynomial of M acting on Q^n modulo the
    span of A, MA, M^2 A, ... (the part of the core not reached from the
    first layer).  Its roots are exactly the lambda where the rank drops.
    """
    n = len(L.core)
    if n == 0:
        return (1,)
    cols = [[Fraction(L.A[i][j]) for i in range(n)] for j in range(len(L.first))]
    basis = _rref(cols, n)
    frontier = list(basis.values())
    while frontier:
        new = []
        for v in frontier:
            w = [sum(L.M[i][k] * v[k] for k in range(n) if v[k]) for i in range(n)]
            before = len(basis)
            basis = _extend(basis, w, n)
            if len(basis) > before:
                new.append(w)
        frontier = new
        if len(basis) == n:
            break
    if len(basis) == n:
        return (1,)
    free = [k for k in range(n) if k not in basis]
    # matrix of M on the quotient, in the coordinates of the free positions
    Q = []
    for a in free:
        col = [Fraction(L.M[i][a]) for i in range(n)]
        for p, row in basis.items():
            if col[p]:
                f = col[p]
                col = [x - f * y for x, y in zip(col, row)]
        Q.append([col[b] for b in free])
    Qm = [[Q[j][i] for j in range(len(free))] for i in range(len(free))]
    cp = _charpoly_fraction(Qm)
    return pprimitive(cp)


def _extend(basis: dict[int, list[Fraction]], v, n: int):
    v = [Fraction(a) for a in v]
    for p, row in basis.items():
        if v[p]:
            f = v[p]
            v = [a - f * b for a, b in zip(v, row)]
    piv = next((k for k in range(n) if v[k]), None)
    if piv is None:
        return basis
    inv = 1 / v[piv]
    v = [a * inv for a in v]
    for p in list(basis):
        row = basis[p]
        if row[piv]:
            f = row[piv]
            basis[p] = [a - f * b for a, b in zip(row, v)]
    basis[piv] = v
    return basis


# --- reports -------------------------------------------------------------------------------

def random_lambdas(count: int, seed: int) -> list[Fraction]:
    """Non-integer rationals; a monic integer polynomial has only integer
    rational roots, so these avoid every rational exceptional value."""
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        den = rng.randint(2, 97)
        num = rng.randint(-500, 500)
        f = Fraction(num, den)
        if f.denominator != 1 and f not in out:
            out.append(f)
    return out


def eigen_report(G: HeckeGraph, formula_dim: int | None = None, samples: int = 5, seed: int = 0) -> dict:
    L = layering(G)
    gen = generic_eigendim(L)
    exc = exceptional_polynomial(L)
    pts = [{"lambda": str(lam), "dim": eigendim_at(L, lam)} for lam in random_lambdas(samples, seed)]
    return {"generic_dim": gen, "formula_dim": formula_dim, "exceptional_polynomial": list(exc),
            "samples": pts, "core_size": len(L.core), "first_layer": len(L.first),
            "layers_checked": L.checked_layers}


def formula_dim(datum) -> int | None:
    """Closed-form generic dimension, where one is known (P^1, so |Pic0| = 1)."""
    from .regularity import cusp_level_count, double_coset_count

    r = datum.x.degree
    q = datum.q
    if not datum.x_ramified:
        return r * cusp_level_count(datum)
    ex = datum.at(datum.x)
    kind = ex.label.normalized(2).kind
    others = [p for p in datum.points if p != datum.x]
    if kind in ("U", "1"):
        factor = (q**r - 1) * q ** (r * (ex.depth - 1)) // (q - 1)
        return r * factor * double_coset_count(datum, others, [])
    if kind == "B" and not others:
        return r
    return None


def unramified_eigendim(G: HeckeGraph, pic0: int = 1) -> dict:
    """Generic dimension against r * |Pic0| * |H \\ G(O_D) / T(k) U(O_D)|."""
    from .regularity import cusp_level_count

    d = G.datum
    if d.x_ramified:
        raise ValueError("the Hecke point must not be ramified")
    L = layering(G)
    gen = generic_eigendim(L)
    formula = d.x.degree * pic0 * cusp_level_count(d)
    return {"generic_dim": gen, "formula_dim": formula, "match": gen == formula}
