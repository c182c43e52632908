"""Coset representatives for the local Hecke double coset at the Hecke point.

Write K for the level group at x (the preimage of H(O/pi^d) in GL_n(O)) and
Delta = diag(pi I_r, I_{n-r}).  The double coset K Delta K splits into right
cosets tau Delta K with tau running over K / S, where S = K cap Delta K Delta^-1.
Everything is computed at precision d + 1, which sees every congruence
involved.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

from .algebra import (
    FiniteField,
    LocalRing,
    Mat,
    enumerate_gl,
    gl_order,
    local_ring,
    make_field,
    mat_det,
    mat_identity,
    mat_inv,
    mat_mul,
    mat_reduce,
)
from .subgroups import (
    DEFAULT_BOUND,
    EnumerationBoundError,
    SubgroupLabel,
    enumerate_members,
    membership,
    subgroup_order,
)

UPPER = "upper"
LOWER = "lower"
UNRAMIFIED = "unramified"


class UnsupportedSubgroupError(ValueError):
    pass


@dataclass(frozen=True)
class LocalHeckeDatum:
    n: int
    r: int
    q: int
    deg_x: int
    depth: int
    label: SubgroupLabel

    def __post_init__(self):
        if not 1 <= self.r < self.n:
            raise ValueError("need 1 <= r < n")
        if self.depth < 0:
            raise ValueError("depth must be >= 0")

    @property
    def residue_field(self) -> FiniteField:
        from .algebra import prime_power

        p, e = prime_power(self.q)
        return make_field(p, e * self.deg_x)

    @property
    def ring(self) -> LocalRing:
        """Working ring O / pi^(d+1)."""
        return local_ring(self.residue_field, self.depth + 1)

    @property
    def case(self) -> str:
        return classify(self.label, self.n, self.r, self.depth)

    def to_json(self) -> dict:
        return {"n": self.n, "r": self.r, "q": self.q, "deg_x": self.deg_x, "d": self.depth,
                "H": str(self.label)}


def classify(label: SubgroupLabel, n: int, r: int, depth: int) -> str:
    if depth == 0:
        return UNRAMIFIED
    lab = label.normalized(n)
    kind = lab.kind
    if kind == "G":
        return UNRAMIFIED
    if kind in ("U", "B"):
        return UPPER
    if kind in ("P", "Ur"):
        if lab.r == r:
            return UPPER
        raise UnsupportedSubgroupError(f"{lab} is not between U and P for block type ({r},{n - r})")
    if kind in ("U-", "B-", "1", "Z", "T"):
        return LOWER
    if kind in ("P-", "Ur-", "L"):
        if lab.r == r:
            return LOWER
        raise UnsupportedSubgroupError(f"{lab} is not covered for block type ({r},{n - r})")
    raise UnsupportedSubgroupError(str(lab))


def _upper_right(n: int, r: int):
    return [(i, j) for i in range(r) for j in range(r, n)]


def _unramified_reps(n: int, r: int, R: LocalRing) -> list[tuple[int, ...]]:
    """One tau per (n-r)-dimensional subspace of k^n, via Schubert cells."""
    q = R.field.q
    reps = []
    for J in itertools.combinations(range(n), n - r):
        Jc = [i for i in range(n) if i not in J]
        free = [(j, i) for j in J for i in Jc if i > j]
        for vals in itertools.product(range(q), repeat=len(free)):
            cols = [[1 if k == i else 0 for k in range(n)] for i in Jc]
            coef = dict(zip(free, vals))
            for j in J:
                v = [0] * n
                v[j] = 1
                for i in Jc:
                    if i > j:
                        v[i] = coef[(j, i)]
                cols.append(v)
            reps.append(tuple(cols[c][row] for row in range(n) for c in range(n)))
    return reps


def coset_reps(datum: LocalHeckeDatum) -> tuple[str, list[Mat]]:
    """(case tag, representatives tau over O/pi^(d+1))."""
    n, r, R = datum.n, datum.r, datum.ring
    case = datum.case
    if case == UNRAMIFIED:
        return case, [Mat(R, n, A) for A in _unramified_reps(n, r, R)]
    shift = R.pi_power(datum.depth) if case == LOWER else 1
    slots = _upper_right(n, r)
    reps = []
    for vals in itertools.product(range(R.field.q), repeat=len(slots)):
        A = list(mat_identity(n))
        for (i, j), c in zip(slots, vals):
            A[i * n + j] = R.mul(c, shift)
        reps.append(Mat(R, n, tuple(A)))
    return case, reps


def expected_count(datum: LocalHeckeDatum) -> int:
    q = datum.q**datum.deg_x
    if datum.case == UNRAMIFIED:
        # Gaussian binomial [n choose r]_q
        num = den = 1
        for i in range(datum.r):
            num *= q ** (datum.n - i) - 1
            den *= q ** (i + 1) - 1
        return num // den
    return q ** (datum.r * (datum.n - datum.r))


def in_delta_conjugate(M: Mat, datum: LocalHeckeDatum) -> bool:
    """Block-congruence test for M in K cap Delta K Delta^-1 (M assumed in K)."""
    need = 1 if datum.case in (UPPER, UNRAMIFIED) else datum.depth + 1
    R, n = M.ring, M.n
    return all(R.valuation(M.entries[i * n + j]) >= need for i, j in _upper_right(n, datum.r))


# --- brute-force oracle -----------------------------------------------------------

class _DirectMembership:
    """Membership in K and in S decided from the definitions, without the block
    congruences: reduce mod pi^d and test H, then conjugate by Delta and test
    integrality and H again."""

    def __init__(self, datum: LocalHeckeDatum):
        self.datum = datum
        self.R = datum.ring
        self.d = datum.depth
        if self.d > 0 and datum.case != UNRAMIFIED:
            self.Rd = local_ring(self.R.field, self.d)
            self.pred = membership(datum.label, self.Rd, datum.n)
        else:
            self.Rd = None
            self.pred = None

    def in_K(self, A: Sequence[int]) -> bool:
        if self.pred is None:
            return True
        return self.pred(mat_reduce(self.R, A, self.d))

    def in_S(self, A: Sequence[int]) -> bool:
        if not self.in_K(A):
            return False
        n, r, R = self.datum.n, self.datum.r, self.R
        q = R.q
        conj = []
        for i in range(n):
            for j in range(n):
                a = A[i * n + j]
                e = (1 if j < r else 0) - (1 if i < r else 0)
                if e == -1:
                    if a % q:
                        return False  # not integral
                    conj.append(a // q)
                elif e == 1:
                    conj.append(R.mul(a, q))
                else:
                    conj.append(a)
        if self.pred is None:
            return True
        return self.pred(mat_reduce(R, conj, self.d))


def oracle_size(datum: LocalHeckeDatum) -> int:
    """Number of elements the oracle scans, from group orders (no enumeration)."""
    kq = datum.q**datum.deg_x
    n, r = datum.n, datum.r
    if datum.case == UNRAMIFIED:
        return gl_order(kq, n)
    Rd = local_ring(datum.residue_field, datum.depth)
    base = subgroup_order(datum.label, Rd, n)
    if datum.case == LOWER:
        base *= kq ** (r * (n - r))
    return base


def _scan_set(datum: LocalHeckeDatum, bound: int):
    """Representatives of K-bar / N for a subgroup N of S (checked separately).

    upper: N = 1 + pi^d M_n, reps are lifts of H(O/pi^d).
    lower: N = 1 + pi^d {Y : Y12 = 0}, reps are lifts times 1 + pi^d E_C.
    unramified: all of GL_n(k).
    """
    n, r, R = datum.n, datum.r, datum.ring
    if datum.case == UNRAMIFIED:
        k = local_ring(R.field, 1)
        if n == 2:
            return enumerate_gl(k, 2)
        return [A for A in itertools.product(range(k.size), repeat=n * n) if k.is_unit(mat_det(k, n, A))]
    Rd = local_ring(R.field, datum.depth)
    base = enumerate_members(datum.label, Rd, n, bound)
    if datum.case == UPPER:
        return base
    pd = R.pi_power(datum.depth)
    slots = _upper_right(n, r)
    shifts = []
    for vals in itertools.product(range(R.field.q), repeat=len(slots)):
        A = list(mat_identity(n))
        for (i, j), c in zip(slots, vals):
            A[i * n + j] = R.mul(c, pd)
        shifts.append(tuple(A))
    return [mat_mul(R, n, h, u) for h in base for u in shifts]


def _kernel_generators(datum: LocalHeckeDatum) -> list[tuple[int, ...]]:
    n, r, R = datum.n, datum.r, datum.ring
    if datum.case == UNRAMIFIED:
        return []
    pd = R.pi_power(datum.depth)
    skip = set(_upper_right(n, r)) if datum.case == LOWER else set()
    basis = [R.field.p**i for i in range(R.field.e)]  # F_p-basis of k
    gens = []
    for i in range(n):
        for j in range(n):
            if (i, j) in skip:
                continue
            for b in basis:
                A = list(mat_identity(n))
                A[i * n + j] = R.add(A[i * n + j], R.mul(b, pd))
                gens.append(tuple(A))
    return gens


@dataclass
class OracleReport:
    count: int
    disjoint: bool
    covers: bool
    reps_in_K: bool
    kernel_in_S: bool
    scanned: int
    index: int

    @property
    def ok(self) -> bool:
        return self.disjoint and self.covers and self.reps_in_K and self.kernel_in_S


def oracle_verify(datum: LocalHeckeDatum, bound: int = 3 * 10**5) -> OracleReport:
    """Check the representatives against membership computed from definitions.

    The scan set is a transversal of K-bar/N for a subgroup N of S.  Since
    every coset tau S is then a union of N-cosets, the index [K : S] equals
    |scan| / |scan cap S|; disjoint representatives cover K exactly when their
    number equals that index.
    """
    size = oracle_size(datum)
    if size > bound:
        raise EnumerationBoundError(f"oracle would scan {size} elements (bound {bound})")
    n, R = datum.n, datum.ring
    _, reps = coset_reps(datum)
    taus = [t.entries for t in reps]
    mem = _DirectMembership(datum)
    reps_in_K = all(mem.in_K(t) for t in taus)
    kernel_in_S = all(mem.in_S(g) for g in _kernel_generators(datum))
    inverses = [mat_inv(R, n, t) for t in taus]
    disjoint = True
    for i, ti in enumerate(inverses):
        for j in range(len(taus)):
            if i != j and mem.in_S(mat_mul(R, n, ti, taus[j])):
                disjoint = False
    scan = _scan_set(datum, bound)
    if len(scan) != size:
        raise AssertionError(f"scan set has {len(scan)} elements, expected {size}")
    inside = sum(1 for A in scan if mem.in_S(A))
    index = len(scan) // inside if inside and len(scan) % inside == 0 else 0
    covers = disjoint and reps_in_K and index == len(taus)
    return OracleReport(len(taus), disjoint, covers, reps_in_K, kernel_in_S, len(scan), index)
