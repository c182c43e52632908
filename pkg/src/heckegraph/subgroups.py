"""Standard subgroups of GL_n over truncated local rings, and ramification data."""
from __future__ import annotations

import builtins
import itertools
import re
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Sequence

from .algebra import (
    FiniteField,
    LocalRing,
    Mat,
    Point,
    enumerate_gl,
    local_ring,
    mat_det,
    mat_identity,
    mat_key,
    mat_mul,
)

DEFAULT_BOUND = 10**7

# Kinds without a block index; the block kinds carry r.
SIMPLE_KINDS = ("1", "U", "U-", "T", "B", "B-", "Z", "G")
BLOCK_KINDS = ("P", "P-", "Ur", "Ur-", "L")
_BLOCK_NAMES = {"P": "P", "P-": "P-", "Ur": "U", "Ur-": "U-", "L": "L"}
# Kinds whose members all have every diagonal entry equal to 1.
_UNIPOTENT = {"1", "U", "U-", "Ur", "Ur-"}
_CONTAINS_CENTER = {"T", "B", "B-", "Z", "G", "P", "P-", "L"}


class EnumerationBoundError(RuntimeError):
    pass


@dataclass(frozen=True)
class SubgroupLabel:
    kind: str
    r: int | None = None
    with_center: bool = False

    def __post_init__(self):
        if self.kind in SIMPLE_KINDS:
            if self.r is not None:
                raise ValueError(f"subgroup {self.kind} takes no block index")
        elif self.kind in BLOCK_KINDS:
            if self.r is None or self.r < 1:
                raise ValueError(f"subgroup {self.kind} needs a block index r >= 1")
        else:
            raise ValueError(f"unknown subgroup kind {self.kind!r}")

    @classmethod
    def parse(cls, text: str) -> "SubgroupLabel":
        s = text.strip().replace(" ", "")
        center = False
        for prefix in ("Z.", "Z*", "Z·"):
            if s.startswith(prefix) and len(s) > len(prefix):
                center, s = True, s[len(prefix):]
        m = re.fullmatch(r"(P-?|U-?|L)\((\d+)\)", s)
        if m:
            name, r = m.group(1), int(m.group(2))
            kind = {"P": "P", "P-": "P-", "U": "Ur", "U-": "Ur-", "L": "L"}[name]
            return cls(kind, r, center)
        aliases = {"Trivial": "1", "Full": "G", "Uminus": "U-", "Bminus": "B-"}
        s = aliases.get(s, s)
        if s not in SIMPLE_KINDS:
            raise ValueError(f"unknown subgroup label {text!r}")
        return cls(s, None, center)

    def __str__(self) -> str:
        base = f"{_BLOCK_NAMES[self.kind]}({self.r})" if self.r is not None else self.kind
        return ("Z." + base) if self.with_center else base

    def normalized(self, n: int) -> "SubgroupLabel":
        """Collapse block kinds that coincide with simple ones for n = 2, and
        drop a center modifier that is absorbed."""
        kind, r = self.kind, self.r
        if r is not None and r >= n:
            raise ValueError(f"block index {r} out of range for n={n}")
        if n == 2 and r == 1:
            kind, r = {"P": "B", "P-": "B-", "Ur": "U", "Ur-": "U-", "L": "T"}[kind], None
        center = self.with_center and kind not in _CONTAINS_CENTER
        if center and kind == "1":
            kind, center = "Z", False
        return SubgroupLabel(kind, r, center)

    @property
    def contains_center(self) -> bool:
        return self.with_center or self.kind in _CONTAINS_CENTER


def with_center(label: SubgroupLabel) -> SubgroupLabel:
    return SubgroupLabel(label.kind, label.r, True)


def left_subgroup_for_mode(label: SubgroupLabel, mode: str, n: int = 2) -> SubgroupLabel:
    if mode == "GL2":
        return label.normalized(n)
    if mode == "PGL2":
        return with_center(label).normalized(n)
    raise ValueError(f"unknown mode {mode!r}")


def _block(i: int, j: int, r: int) -> tuple[int, int]:
    return (0 if i < r else 1, 0 if j < r else 1)


def _entry_rule(kind: str, r: int | None, n: int, i: int, j: int) -> str:
    """'zero', 'one', 'any' or 'pair' (scalar diagonal) for the entry (i, j)."""
    diag = i == j
    if kind == "G":
        return "any"
    if kind == "1":
        return "one" if diag else "zero"
    if kind == "Z":
        return "scalar" if diag else "zero"
    if kind == "T":
        return "any" if diag else "zero"
    if kind == "U":
        return "one" if diag else ("any" if i < j else "zero")
    if kind == "U-":
        return "one" if diag else ("any" if i > j else "zero")
    if kind == "B":
        return "any" if i <= j else "zero"
    if kind == "B-":
        return "any" if i >= j else "zero"
    bi, bj = _block(i, j, r)
    if kind == "P":
        return "zero" if (bi, bj) == (1, 0) else "any"
    if kind == "P-":
        return "zero" if (bi, bj) == (0, 1) else "any"
    if kind == "L":
        return "any" if bi == bj else "zero"
    if kind in ("Ur", "Ur-"):
        if bi == bj:
            return "one" if diag else "zero"
        allowed = (0, 1) if kind == "Ur" else (1, 0)
        return "any" if (bi, bj) == allowed else "zero"
    raise ValueError(kind)


@lru_cache(maxsize=None)
def _rules(kind: str, r: int | None, n: int) -> tuple[str, ...]:
    return tuple(_entry_rule(kind, r, n, i, j) for i in range(n) for j in range(n))


def _plain_predicate(kind: str, r: int | None, n: int) -> Callable[[Sequence[int]], bool]:
    rules = _rules(kind, r, n)
    checks = [(k, rule) for k, rule in builtins.enumerate(rules) if rule != "any"]
    diag = [i * n + i for i in range(n)]

    def pred(A: Sequence[int]) -> bool:
        for k, rule in checks:
            a = A[k]
            if rule == "zero":
                if a:
                    return False
            elif rule == "one":
                if a != 1:
                    return False
        if kind == "Z":
            d0 = A[0]
            return all(A[k] == d0 for k in diag)
        return True

    return pred


def membership(label: SubgroupLabel, R: LocalRing, n: int) -> Callable[[Sequence[int]], bool]:
    """Predicate on row-major code tuples of invertible n x n matrices over R."""
    label = label.normalized(n)
    pred = _plain_predicate(label.kind, label.r, n)
    if not label.with_center:
        return pred
    # Center modifier only survives normalization for unipotent kinds, whose
    # members have last diagonal entry 1; so the scalar is forced.
    last = n * n - 1

    def pred_center(A: Sequence[int]) -> bool:
        z = A[last]
        if not R.is_unit(z):
            return False
        zi = R.inv(z)
        return pred([R.mul(zi, a) for a in A])

    return pred_center


def contains(label: SubgroupLabel, M: Mat) -> bool:
    return membership(label, M.ring, M.n)(M.entries)


def candidate_count(label: SubgroupLabel, R: LocalRing, n: int) -> int:
    label = label.normalized(n)
    total = 1
    for rule in _rules(label.kind, label.r, n):
        if rule == "any":
            total *= R.size
    if label.kind == "Z":
        total *= R.size
    if label.with_center:
        total *= R.size
    return total


def subgroup_order(label: SubgroupLabel, R: LocalRing, n: int) -> int:
    """|H(R)| from the block structure, without enumerating."""
    from .algebra import gl_order

    label = label.normalized(n)
    q, d = R.q, R.depth
    size, units = R.size, R.size - R.size // q
    kind, r = label.kind, label.r

    def gl(m):
        return gl_order(q, m, d)

    order = {
        "1": 1,
        "Z": units,
        "T": units**n,
        "U": size ** (n * (n - 1) // 2),
        "U-": size ** (n * (n - 1) // 2),
        "B": units**n * size ** (n * (n - 1) // 2),
        "B-": units**n * size ** (n * (n - 1) // 2),
        "G": gl(n),
    }.get(kind)
    if order is None:
        levi = gl(r) * gl(n - r)
        off = size ** (r * (n - r))
        order = {"P": levi * off, "P-": levi * off, "L": levi, "Ur": off, "Ur-": off}[kind]
    if label.with_center:
        order *= units  # only unipotent kinds keep the modifier
    return order


def enumerate_members(label: SubgroupLabel, R: LocalRing, n: int = 2,
                      bound: int = DEFAULT_BOUND) -> list[tuple[int, ...]]:
    """All members as code tuples, sorted canonically."""
    label = label.normalized(n)
    cnt = subgroup_order(label, R, n)
    if cnt > bound or candidate_count(label, R, n) > 20 * bound:
        raise EnumerationBoundError(f"{label} over {R}: {cnt} members exceed bound {bound}")
    if label.kind == "G" and n == 2:
        return enumerate_gl(R, 2)
    rules = _rules(label.kind, label.r, n)
    choices = []
    for rule in rules:
        if rule == "zero":
            choices.append((0,))
        elif rule == "one":
            choices.append((1,))
        elif rule == "scalar":
            choices.append(None)
        else:
            choices.append(range(R.size))
    out = set()
    if label.kind == "Z":
        for u in R.units():
            out.add(tuple(u if c is None else 0 for c in choices))
    else:
        for A in itertools.product(*choices):
            if R.is_unit(mat_det(R, n, A)):
                out.add(A)
    if label.with_center:
        units = R.units()
        out = {tuple(R.mul(u, a) for a in A) for A in out for u in units}
    return sorted(out, key=lambda A: mat_key(R, A))


def enumerate(label: SubgroupLabel, R: LocalRing, n: int = 2, bound: int = DEFAULT_BOUND) -> list[Mat]:
    return [Mat(R, n, A) for A in enumerate_members(label, R, n, bound)]


def closure(gens: Sequence[Sequence[int]], R: LocalRing, n: int, bound: int = DEFAULT_BOUND):
    """Subgroup generated by gens (breadth-first closure under right multiplication)."""
    ident = mat_identity(n)
    seen = {ident}
    frontier = [ident]
    gens = [tuple(g) for g in gens]
    while frontier:
        nxt = []
        for A in frontier:
            for g in gens:
                B = mat_mul(R, n, A, g)
                if B not in seen:
                    seen.add(B)
                    nxt.append(B)
                    if len(seen) > bound:
                        raise EnumerationBoundError("closure exceeds bound")
        frontier = nxt
    return sorted(seen, key=lambda A: mat_key(R, A))


# --- ramification data ---------------------------------------------------------

MODES = ("GL2", "PGL2")


@dataclass(frozen=True)
class RamPoint:
    point: Point
    depth: int
    label: SubgroupLabel

    def ring(self) -> LocalRing:
        return self.point.ring(self.depth)


@dataclass(frozen=True)
class RamificationDatum:
    field: FiniteField
    x: Point
    entries: tuple[RamPoint, ...] = ()
    mode: str = "PGL2"
    extras: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        seen = set()
        for e in self.entries:
            if e.point.base is not self.field:
                raise ValueError("ramification point over a different field")
            if e.point in seen:
                raise ValueError(f"duplicate ramification point {e.point.label}")
            if e.depth < 1:
                raise ValueError("depth must be >= 1")
            seen.add(e.point)
            e.label.normalized(2)
        if self.x.base is not self.field:
            raise ValueError("Hecke point over a different field")
        # Fixed internal order of the points keeps every output deterministic.
        object.__setattr__(self, "entries", tuple(sorted(self.entries, key=lambda e: e.point)))
        if self.mode == "PGL2":
            ex = self.at(self.x)
            if ex is not None and not pgl_hypothesis(ex.label, ex.ring()):
                raise ValueError(f"H^x = {ex.label} violates the PGL2 descent hypothesis")

    @property
    def q(self) -> int:
        return self.field.q

    @property
    def degree(self) -> int:
        return sum(e.depth * e.point.degree for e in self.entries)

    @property
    def points(self) -> tuple[Point, ...]:
        return tuple(e.point for e in self.entries)

    def at(self, y: Point) -> RamPoint | None:
        for e in self.entries:
            if e.point == y:
                return e
        return None

    @property
    def x_ramified(self) -> bool:
        e = self.at(self.x)
        return e is not None and e.label.normalized(2).kind != "G"

    def restrict(self, points: Sequence[Point]) -> "RamificationDatum":
        keep = set(points)
        return RamificationDatum(self.field, self.x, tuple(e for e in self.entries if e.point in keep),
                                 self.mode)

    def with_mode(self, mode: str) -> "RamificationDatum":
        return RamificationDatum(self.field, self.x, self.entries, mode)

    def replace(self, y: Point, label: SubgroupLabel) -> "RamificationDatum":
        return RamificationDatum(self.field, self.x,
                                 tuple(RamPoint(e.point, e.depth, label) if e.point == y else e
                                       for e in self.entries), self.mode)

    def describe(self) -> list[dict]:
        return [{"point": e.point.label, "depth": e.depth, "subgroup": str(e.label)} for e in self.entries]


def pgl_hypothesis(label: SubgroupLabel, R: LocalRing, bound: int = 10**6) -> bool:
    """H contains the center, or some diagonal entry is 1 on all of H."""
    pred = membership(label, R, 2)
    if all(pred((u, 0, 0, u)) for u in R.units()):
        return True
    members = enumerate_members(label, R, 2, bound)
    return any(all(A[3 * i] == 1 for A in members) for i in range(2))
