"""Exact arithmetic over finite fields, truncated local rings and matrices over them.

Elements are encoded as non-negative integers so that hot loops can work on
plain ints and tuples:

* an element of F_{p^e} is the integer whose base-p digits (low first) are its
  coefficients in the power basis of the defining polynomial;
* an element of k[pi]/(pi^d) is sum c_i * |k|^i, with c_i the codes of its
  coefficients.  Reducing precision is ``code % |k|**d'`` and lifting by zero
  extension leaves the code unchanged.

The wrapper classes (FieldElement, LocalRingElement, Mat) give an operator
based interface on top of that encoding.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence


class NotAUnitError(ArithmeticError):
    """Raised when inverting a non-unit ring element or a singular matrix."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def prime_power(q: int) -> tuple[int, int]:
    """Return (p, e) with q = p**e, or raise ValueError."""
    if q < 2:
        raise ValueError(f"{q} is not a prime power")
    p = 2
    while q % p:
        p += 1
    e, r = 0, q
    while r % p == 0:
        r //= p
        e += 1
    if r != 1:
        raise ValueError(f"{q} is not a prime power")
    return p, e


# --- polynomials over F_p, coefficient lists low degree first ---------------

def _trim(c: list[int]) -> list[int]:
    while c and c[-1] == 0:
        c.pop()
    return c


def _fp_polymod(a: Sequence[int], b: Sequence[int], p: int) -> list[int]:
    a = _trim([x % p for x in a])
    b = _trim([x % p for x in b])
    inv_lead = pow(b[-1], p - 2, p)
    while len(a) >= len(b):
        f = a[-1] * inv_lead % p
        shift = len(a) - len(b)
        for i, c in enumerate(b):
            a[shift + i] = (a[shift + i] - f * c) % p
        _trim(a)
    return a


def is_irreducible_fp(poly: Sequence[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree 1..deg/2."""
    deg = len(poly) - 1
    for k in range(1, deg // 2 + 1):
        for low in itertools.product(range(p), repeat=k):
            if not _fp_polymod(poly, list(low) + [1], p):
                return False
    return True


def least_irreducible(p: int, e: int) -> tuple[int, ...]:
    # itertools.product is lexicographic with the first slot most significant,
    # which is exactly the low-degree-first order on coefficient vectors.
    for low in itertools.product(range(p), repeat=e):
        poly = tuple(low) + (1,)
        if is_irreducible_fp(poly, p):
            return poly
    raise AssertionError("no irreducible polynomial found")


class FiniteField:
    """F_{p^e} with full addition and multiplication tables."""

    def __init__(self, p: int, e: int, modulus: Sequence[int]):
        if not is_prime(p):
            raise ValueError(f"characteristic {p} is not prime")
        if len(modulus) != e + 1 or modulus[-1] != 1:
            raise ValueError("modulus must be monic of degree e")
        if not is_irreducible_fp(modulus, p):
            raise ValueError(f"{tuple(modulus)} is reducible over F_{p}")
        self.p, self.e = p, e
        self.modulus = tuple(modulus)
        self.q = q = p**e
        digits = [self._digits(a) for a in range(q)]
        self.add_table = [[self._code([(x + y) % p for x, y in zip(digits[a], digits[b])])
                           for b in range(q)] for a in range(q)]
        self.neg_table = [self._code([(-x) % p for x in digits[a]]) for a in range(q)]
        self.mul_table = [[self._code(self._mulmod(digits[a], digits[b])) for b in range(q)]
                          for a in range(q)]
        self.inv_table = [0] * q
        for a in range(1, q):
            row = self.mul_table[a]
            self.inv_table[a] = row.index(1)
        self.sortkey = [self._code(list(reversed(digits[a]))) for a in range(q)]

    def _digits(self, a: int) -> list[int]:
        out = []
        for _ in range(self.e):
            out.append(a % self.p)
            a //= self.p
        return out

    def _code(self, digits: Sequence[int]) -> int:
        c = 0
        for d in reversed(digits):
            c = c * self.p + d
        return c

    def _mulmod(self, a: Sequence[int], b: Sequence[int]) -> list[int]:
        prod = [0] * (2 * self.e - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    prod[i + j] += x * y
        return (_fp_polymod(prod, self.modulus, self.p) + [0] * self.e)[: self.e]

    def __repr__(self) -> str:
        return f"FiniteField(p={self.p}, e={self.e}, modulus={self.modulus})"

    def __reduce__(self):
        return (make_field, (self.p, self.e))

    def elements(self) -> list["FieldElement"]:
        return [FieldElement(self, a) for a in range(self.q)]

    def __call__(self, value) -> "FieldElement":
        if isinstance(value, FieldElement):
            return value
        if isinstance(value, int):
            return FieldElement(self, value % self.p)
        return FieldElement(self, self._code([int(c) % self.p for c in value]))

    def coeffs(self, a: int) -> tuple[int, ...]:
        return tuple(self._digits(a))

    def pow(self, a: int, k: int) -> int:
        r = 1
        for _ in range(k):
            r = self.mul_table[r][a]
        return r

    def from_int(self, n: int) -> int:
        return n % self.p

    def format(self, a: int, var: str = "a") -> str:
        if self.e == 1:
            return str(a)
        terms = []
        for i, c in enumerate(self._digits(a)):
            if c == 0:
                continue
            mono = "" if i == 0 else (var if i == 1 else f"{var}^{i}")
            if not mono:
                terms.append(str(c))
            else:
                terms.append(mono if c == 1 else f"{c}*{mono}")
        return "+".join(terms) if terms else "0"


@lru_cache(maxsize=None)
def make_field(p: int, e: int = 1) -> FiniteField:
    """The field F_{p^e} defined by the lexicographically least irreducible."""
    if not is_prime(p):
        raise ValueError(f"characteristic {p} is not prime")
    if e < 1:
        raise ValueError("extension degree must be >= 1")
    return FiniteField(p, e, least_irreducible(p, e))


def field_of_order(q: int) -> FiniteField:
    return make_field(*prime_power(q))


@dataclass(frozen=True)
class FieldElement:
    field: FiniteField
    code: int

    @property
    def coeffs(self) -> tuple[int, ...]:
        return self.field.coeffs(self.code)

    def _other(self, o) -> int:
        if isinstance(o, FieldElement):
            if o.field is not self.field:
                raise ValueError("elements of different fields")
            return o.code
        return self.field.from_int(o)

    def __add__(self, o):
        return FieldElement(self.field, self.field.add_table[self.code][self._other(o)])

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, self.field.neg_table[self.code])

    def __sub__(self, o):
        return self + (-FieldElement(self.field, self._other(o)))

    def __mul__(self, o):
        return FieldElement(self.field, self.field.mul_table[self.code][self._other(o)])

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        if self.code == 0:
            raise NotAUnitError("zero has no inverse")
        return FieldElement(self.field, self.field.inv_table[self.code])

    def __truediv__(self, o):
        return self * FieldElement(self.field, self._other(o)).inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        return FieldElement(self.field, self.field.pow(self.code, k))

    def __eq__(self, o):
        if isinstance(o, int):
            return self.code == self.field.from_int(o)
        return isinstance(o, FieldElement) and o.field is self.field and o.code == self.code

    def __hash__(self):
        return hash((self.field.p, self.field.e, self.code))

    def __repr__(self):
        return f"FieldElement({self.field.format(self.code)})"


# --- truncated local rings ---------------------------------------------------

class LocalRing:
    """k[pi]/(pi^d) over a finite field k, elements encoded as ints."""

    def __init__(self, field: FiniteField, depth: int):
        if depth < 1:
            raise ValueError("depth must be >= 1")
        self.field = field
        self.depth = depth
        self.q = field.q
        self.size = field.q**depth
        self._mul: dict[int, int] = {}
        self._add: dict[int, int] = {}
        self._inv: dict[int, int] = {}
        fk = field.sortkey
        q, d = self.q, depth
        # Reversing the digit string makes int comparison agree with the
        # low-degree-first lexicographic order.
        keys = []
        for a in range(self.size):
            k, x = 0, a
            for _ in range(d):
                k = k * q + fk[x % q]
                x //= q
            keys.append(k)
        self.sortkey = keys

    def __repr__(self) -> str:
        return f"LocalRing(F_{self.q}, depth={self.depth})"

    def __reduce__(self):
        return (local_ring, (self.field, self.depth))

    def digits(self, a: int) -> list[int]:
        q = self.q
        out = []
        for _ in range(self.depth):
            out.append(a % q)
            a //= q
        return out

    def code(self, digits: Sequence[int]) -> int:
        c = 0
        for x in reversed(list(digits)[: self.depth]):
            c = c * self.q + x
        return c

    def add(self, a: int, b: int) -> int:
        key = a * self.size + b
        r = self._add.get(key)
        if r is None:
            at = self.field.add_table
            da, db = self.digits(a), self.digits(b)
            r = self.code([at[x][y] for x, y in zip(da, db)])
            self._add[key] = r
        return r

    def neg(self, a: int) -> int:
        nt = self.field.neg_table
        return self.code([nt[x] for x in self.digits(a)])

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        key = a * self.size + b
        r = self._mul.get(key)
        if r is None:
            at, mt = self.field.add_table, self.field.mul_table
            da, db = self.digits(a), self.digits(b)
            out = [0] * self.depth
            for i, x in enumerate(da):
                if x:
                    for j in range(self.depth - i):
                        y = db[j]
                        if y:
                            out[i + j] = at[out[i + j]][mt[x][y]]
            r = self.code(out)
            self._mul[key] = r
        return r

    def is_unit(self, a: int) -> bool:
        return a % self.q != 0

    def valuation(self, a: int) -> int:
        """pi-adic valuation, with depth standing in for +infinity."""
        v = 0
        while v < self.depth and a % self.q == 0:
            a //= self.q
            v += 1
        return v

    def inv(self, a: int) -> int:
        r = self._inv.get(a)
        if r is not None:
            return r
        if not self.is_unit(a):
            raise NotAUnitError("element is not a unit")
        # Newton iteration x <- x(2 - a x), doubling the precision each step.
        x = self.field.inv_table[a % self.q]
        two = self.field.from_int(2)
        prec = 1
        while prec < self.depth:
            ax = self.mul(a, x)
            x = self.mul(x, self.sub(two, ax))
            prec *= 2
        self._inv[a] = x
        return x

    def pi_power(self, k: int) -> int:
        return self.q**k if k < self.depth else 0

    def reduce(self, a: int, depth: int) -> int:
        return a % (self.q**depth)

    def units(self) -> list[int]:
        return [a for a in range(self.size) if a % self.q]

    def __call__(self, coeffs) -> "LocalRingElement":
        if isinstance(coeffs, int):
            return LocalRingElement(self, self.field.from_int(coeffs))
        codes = [c.code if isinstance(c, FieldElement) else int(c) for c in coeffs]
        return LocalRingElement(self, self.code(codes))

    def format(self, a: int) -> str:
        terms = []
        for i, c in enumerate(self.digits(a)):
            if c == 0:
                continue
            s = self.field.format(c)
            if self.field.e > 1 and "+" in s and i > 0:
                s = f"({s})"
            if i == 0:
                terms.append(s)
            else:
                mono = "pi" if i == 1 else f"pi^{i}"
                terms.append(mono if s == "1" else f"{s}*{mono}")
        return "+".join(terms) if terms else "0"


@lru_cache(maxsize=None)
def local_ring(field: FiniteField, depth: int) -> LocalRing:
    return LocalRing(field, depth)


@dataclass(frozen=True)
class LocalRingElement:
    ring: LocalRing
    code: int

    @property
    def coeffs(self) -> tuple[FieldElement, ...]:
        return tuple(FieldElement(self.ring.field, c) for c in self.ring.digits(self.code))

    def _other(self, o) -> int:
        if isinstance(o, LocalRingElement):
            if o.ring is not self.ring:
                raise ValueError("elements of different rings")
            return o.code
        if isinstance(o, FieldElement):
            return o.code
        return self.ring.field.from_int(o)

    def __add__(self, o):
        return LocalRingElement(self.ring, self.ring.add(self.code, self._other(o)))

    __radd__ = __add__

    def __sub__(self, o):
        return LocalRingElement(self.ring, self.ring.sub(self.code, self._other(o)))

    def __neg__(self):
        return LocalRingElement(self.ring, self.ring.neg(self.code))

    def __mul__(self, o):
        return LocalRingElement(self.ring, self.ring.mul(self.code, self._other(o)))

    __rmul__ = __mul__

    def is_unit(self) -> bool:
        return self.ring.is_unit(self.code)

    def invert(self) -> "LocalRingElement":
        return LocalRingElement(self.ring, self.ring.inv(self.code))

    def reduce(self, depth: int) -> "LocalRingElement":
        return LocalRingElement(local_ring(self.ring.field, depth), self.ring.reduce(self.code, depth))

    def __eq__(self, o):
        if isinstance(o, int):
            return self.code == self.ring.field.from_int(o)
        return isinstance(o, LocalRingElement) and o.ring is self.ring and o.code == self.code

    def __hash__(self):
        return hash((self.ring.q, self.ring.depth, self.code))

    def __repr__(self):
        return f"LocalRingElement({self.ring.format(self.code)})"


# --- matrices over local rings, as row-major tuples of codes ------------------

def mat_identity(n: int) -> tuple[int, ...]:
    return tuple(1 if i == j else 0 for i in range(n) for j in range(n))


def mat_mul(R: LocalRing, n: int, A: Sequence[int], B: Sequence[int]) -> tuple[int, ...]:
    mul, add = R.mul, R.add
    out = []
    for i in range(n):
        row = A[i * n:(i + 1) * n]
        for j in range(n):
            s = 0
            for k in range(n):
                a = row[k]
                if a:
                    b = B[k * n + j]
                    if b:
                        s = add(s, mul(a, b))
            out.append(s)
    return tuple(out)


def mat_mul2(R: LocalRing, A: Sequence[int], B: Sequence[int]) -> tuple[int, int, int, int]:
    mul, add = R.mul, R.add
    a, b, c, d = A
    e, f, g, h = B
    return (add(mul(a, e), mul(b, g)), add(mul(a, f), mul(b, h)),
            add(mul(c, e), mul(d, g)), add(mul(c, f), mul(d, h)))


def mat_det(R: LocalRing, n: int, A: Sequence[int]) -> int:
    if n == 1:
        return A[0]
    if n == 2:
        return R.sub(R.mul(A[0], A[3]), R.mul(A[1], A[2]))
    # Laplace expansion along the first row; n stays tiny here.
    total = 0
    for j in range(n):
        if A[j] == 0:
            continue
        minor = [A[i * n + k] for i in range(1, n) for k in range(n) if k != j]
        term = R.mul(A[j], mat_det(R, n - 1, minor))
        total = R.add(total, term) if j % 2 == 0 else R.sub(total, term)
    return total


def mat_inv(R: LocalRing, n: int, A: Sequence[int]) -> tuple[int, ...]:
    if n == 2:
        dinv = R.inv(mat_det(R, 2, A))
        a, b, c, d = A
        return (R.mul(d, dinv), R.mul(R.neg(b), dinv), R.mul(R.neg(c), dinv), R.mul(a, dinv))
    # Gauss-Jordan; over a local ring an invertible matrix always has a unit
    # pivot available in the current column.
    M = [list(A[i * n:(i + 1) * n]) + [1 if i == j else 0 for j in range(n)] for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n) if R.is_unit(M[r][col])), None)
        if piv is None:
            raise NotAUnitError("matrix is not invertible")
        M[col], M[piv] = M[piv], M[col]
        inv = R.inv(M[col][col])
        M[col] = [R.mul(x, inv) for x in M[col]]
        for r in range(n):
            if r != col and M[r][col]:
                f = M[r][col]
                M[r] = [R.sub(x, R.mul(f, y)) for x, y in zip(M[r], M[col])]
    return tuple(x for row in M for x in row[n:])


def mat_reduce(R: LocalRing, A: Sequence[int], depth: int) -> tuple[int, ...]:
    m = R.q**depth
    return tuple(a % m for a in A)


def mat_key(R: LocalRing, A: Sequence[int]) -> tuple[int, ...]:
    sk = R.sortkey
    return tuple(sk[a] for a in A)


def mat_is_invertible(R: LocalRing, n: int, A: Sequence[int]) -> bool:
    return R.is_unit(mat_det(R, n, A))


def enumerate_gl(R: LocalRing, n: int) -> list[tuple[int, ...]]:
    """All of GL_n(R), sorted by the canonical order."""
    out = []
    if n == 2:
        # Build row by row: first row must be unimodular.
        elems = range(R.size)
        for a in elems:
            for b in elems:
                if not (R.is_unit(a) or R.is_unit(b)):
                    continue
                for c in elems:
                    for d in elems:
                        if R.is_unit(R.sub(R.mul(a, d), R.mul(b, c))):
                            out.append((a, b, c, d))
    else:
        for A in itertools.product(range(R.size), repeat=n * n):
            if mat_is_invertible(R, n, A):
                out.append(A)
    out.sort(key=lambda A: mat_key(R, A))
    return out


def gl_order(field_size: int, n: int, depth: int = 1) -> int:
    q = field_size
    order = 1
    for i in range(n):
        order *= q**n - q**i
    return order * q ** (n * n * (depth - 1))


@dataclass(frozen=True)
class Mat:
    """Square matrix over a LocalRing."""

    ring: LocalRing
    n: int
    entries: tuple[int, ...]

    @classmethod
    def from_rows(cls, ring: LocalRing, rows) -> "Mat":
        n = len(rows)
        flat = []
        for row in rows:
            for x in row:
                if isinstance(x, LocalRingElement):
                    flat.append(x.code)
                elif isinstance(x, FieldElement):
                    flat.append(x.code)
                else:
                    flat.append(ring.field.from_int(x))
        return cls(ring, n, tuple(flat))

    @classmethod
    def identity(cls, ring: LocalRing, n: int) -> "Mat":
        return cls(ring, n, mat_identity(n))

    def __getitem__(self, ij) -> LocalRingElement:
        i, j = ij
        return LocalRingElement(self.ring, self.entries[i * self.n + j])

    def __mul__(self, o: "Mat") -> "Mat":
        if o.ring is not self.ring or o.n != self.n:
            raise ValueError("incompatible matrices")
        return Mat(self.ring, self.n, mat_mul(self.ring, self.n, self.entries, o.entries))

    def det(self) -> LocalRingElement:
        return LocalRingElement(self.ring, mat_det(self.ring, self.n, self.entries))

    def is_invertible(self) -> bool:
        return self.ring.is_unit(mat_det(self.ring, self.n, self.entries))

    def inverse(self) -> "Mat":
        return Mat(self.ring, self.n, mat_inv(self.ring, self.n, self.entries))

    def reduce(self, depth: int) -> "Mat":
        return Mat(local_ring(self.ring.field, depth), self.n, mat_reduce(self.ring, self.entries, depth))

    def key(self) -> tuple[int, ...]:
        return mat_key(self.ring, self.entries)

    def __lt__(self, o: "Mat") -> bool:
        return self.key() < o.key()

    def to_json(self) -> list:
        R = self.ring
        return [[R.digits(self.entries[i * self.n + j]) for j in range(self.n)] for i in range(self.n)]

    def __repr__(self):
        rows = ["[" + ", ".join(self.ring.format(self.entries[i * self.n + j]) for j in range(self.n)) + "]"
                for i in range(self.n)]
        return "Mat[" + ", ".join(rows) + "]"


# --- polynomials over F_q (tuples of field codes, low degree first) ----------

def poly_trim(c: Iterable[int]) -> tuple[int, ...]:
    c = list(c)
    while c and c[-1] == 0:
        c.pop()
    return tuple(c)


def poly_add(F: FiniteField, a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    n = max(len(a), len(b))
    a = list(a) + [0] * (n - len(a))
    b = list(b) + [0] * (n - len(b))
    return poly_trim(F.add_table[x][y] for x, y in zip(a, b))


def poly_scale(F: FiniteField, c: int, a: Sequence[int]) -> tuple[int, ...]:
    return poly_trim(F.mul_table[c][x] for x in a)


def poly_sub(F: FiniteField, a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    return poly_add(F, a, [F.neg_table[x] for x in b])


def poly_mul(F: FiniteField, a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    if not a or not b:
        return ()
    out = [0] * (len(a) + len(b) - 1)
    at, mt = F.add_table, F.mul_table
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] = at[out[i + j]][mt[x][y]]
    return poly_trim(out)


def poly_shift(a: Sequence[int], k: int) -> tuple[int, ...]:
    return tuple([0] * k + list(a)) if a else ()


def poly_divmod(F: FiniteField, a: Sequence[int], b: Sequence[int]):
    b = poly_trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    r = list(poly_trim(a))
    quot = [0] * max(len(r) - len(b) + 1, 0)
    inv_lead = F.inv_table[b[-1]]
    while len(r) >= len(b):
        f = F.mul_table[r[-1]][inv_lead]
        k = len(r) - len(b)
        quot[k] = f
        for i, c in enumerate(b):
            r[k + i] = F.add_table[r[k + i]][F.neg_table[F.mul_table[f][c]]]
        r = list(poly_trim(r))
    return poly_trim(quot), tuple(r)


def poly_degree(a: Sequence[int]) -> int:
    a = poly_trim(a)
    return len(a) - 1 if a else -1


def poly_eval(F: FiniteField, a: Sequence[int], x: int) -> int:
    r = 0
    for c in reversed(a):
        r = F.add_table[F.mul_table[r][x]][c]
    return r


def poly_format(F: FiniteField, a: Sequence[int], var: str = "t") -> str:
    a = poly_trim(a)
    if not a:
        return "0"
    terms = []
    for i in range(len(a) - 1, -1, -1):
        c = a[i]
        if c == 0:
            continue
        cs = F.format(c)
        if F.e > 1 and "+" in cs and i > 0:
            cs = f"({cs})"
        if i == 0:
            terms.append(cs)
            continue
        mono = var if i == 1 else f"{var}^{i}"
        terms.append(mono if cs == "1" else f"{cs}*{mono}")
    return "+".join(terms)


def is_irreducible_fq(F: FiniteField, poly: Sequence[int]) -> bool:
    poly = poly_trim(poly)
    deg = len(poly) - 1
    if deg < 1:
        return False
    for k in range(1, deg // 2 + 1):
        for low in itertools.product(range(F.q), repeat=k):
            if not poly_divmod(F, poly, tuple(low) + (1,))[1]:
                return False
    return True


def monic_irreducibles(F: FiniteField, degree: int) -> list[tuple[int, ...]]:
    out = []
    for low in itertools.product(range(F.q), repeat=degree):
        poly = tuple(low) + (1,)
        if is_irreducible_fq(F, poly):
            out.append(poly)
    return out


# --- points of the affine line and local expansions ---------------------------

class Point:
    """A closed point of P^1 other than infinity, given by its monic irreducible.

    The residue field is F_{q^deg}.  F_q is embedded by sending the power-basis
    generator to the least root of its modulus, and the point is represented by
    the least root theta of its polynomial; the uniformizer is t - theta.
    """

    def __init__(self, base: FiniteField, coeffs: Sequence[int]):
        coeffs = poly_trim(coeffs)
        if len(coeffs) < 2 or coeffs[-1] != 1:
            raise ValueError("a point is given by a monic polynomial of degree >= 1")
        if not is_irreducible_fq(base, coeffs):
            raise ValueError(f"{poly_format(base, coeffs)} is not irreducible over F_{base.q}")
        self.base = base
        self.coeffs = tuple(coeffs)
        self.degree = len(coeffs) - 1
        if self.degree == 1:
            self.residue = base
            self.embed = list(range(base.q))
        else:
            K = make_field(base.p, base.e * self.degree)
            self.residue = K
            if base.e == 1:
                self.embed = list(range(base.q))
            else:
                mod = base.modulus
                gen = min(b for b in range(K.q) if poly_eval(K, mod, b) == 0)
                powers = [1]
                for _ in range(base.e - 1):
                    powers.append(K.mul_table[powers[-1]][gen])
                emb = []
                for a in range(base.q):
                    s = 0
                    for c, pw in zip(base.coeffs(a), powers):
                        s = K.add_table[s][K.mul_table[c][pw]]
                    emb.append(s)
                self.embed = emb
        K = self.residue
        lifted = [self.embed[c] for c in self.coeffs]
        self.root = min(b for b in range(K.q) if poly_eval(K, lifted, b) == 0)

    @property
    def label(self) -> str:
        return poly_format(self.base, self.coeffs)

    def ring(self, depth: int) -> LocalRing:
        return local_ring(self.residue, depth)

    def expand(self, f: Sequence[int], depth: int) -> int:
        """Code of the image of f in k_z[pi]/(pi^depth), pi = t - theta."""
        K = self.residue
        g = [self.embed[c] for c in poly_trim(f)]
        out = []
        for _ in range(depth):
            # synthetic division by (t - theta)
            if not g:
                out.append(0)
                continue
            acc = 0
            quot = [0] * (len(g) - 1)
            for i in range(len(g) - 1, -1, -1):
                acc = K.add_table[K.mul_table[acc][self.root]][g[i]]
                if i > 0:
                    quot[i - 1] = acc
            out.append(acc)
            g = quot
        return local_ring(K, depth).code(out)

    def __eq__(self, o):
        return isinstance(o, Point) and o.base is self.base and o.coeffs == self.coeffs

    def __hash__(self):
        return hash((self.base.q, self.coeffs))

    def __lt__(self, o: "Point"):
        return (self.degree, [self.base.sortkey[c] for c in self.coeffs]) < \
               (o.degree, [o.base.sortkey[c] for c in o.coeffs])

    def __repr__(self):
        return f"Point({self.label})"


def rational_point(F: FiniteField, a: int) -> Point:
    """The point t = a, with a a field code."""
    return Point(F, (F.neg_table[a], 1))


def expand_at(f, z: Point, d: int) -> LocalRingElement:
    """Image of the polynomial f (field codes or FieldElements, low first) at z."""
    codes = [c.code if isinstance(c, FieldElement) else int(c) for c in f]
    return LocalRingElement(z.ring(d), z.expand(codes, d))


def parse_polynomial(F: FiniteField, text: str, var: str = "t", gen: str = "a") -> tuple[int, ...]:
    """Parse an expression such as 't^2+t+1' or '(a+1)*t + a' over F.

    ``gen`` names the power-basis generator of F for non-prime fields.
    """
    import sympy

    t, a = sympy.symbols(f"{var} {gen}")
    try:
        expr = sympy.sympify(text.replace("^", "**"), locals={var: t, gen: a})
    except (sympy.SympifyError, SyntaxError, TypeError) as exc:
        raise ValueError(f"cannot parse polynomial {text!r}") from exc
    if expr.free_symbols - {t, a}:
        raise ValueError(f"unexpected symbols in {text!r}")
    if a in expr.free_symbols and F.e == 1:
        raise ValueError(f"generator {gen!r} is meaningless over a prime field")
    poly = sympy.Poly(sympy.expand(expr), t, a)
    coeffs: dict[int, list[int]] = {}
    for (i, j), c in poly.terms():
        if not c.is_integer:
            raise ValueError(f"non-integer coefficient in {text!r}")
        slot = coeffs.setdefault(i, [])
        slot.extend([0] * (j + 1 - len(slot)))
        slot[j] += int(c)
    out = [0] * (max(coeffs) + 1 if coeffs else 0)
    for i, acoeffs in coeffs.items():
        red = _fp_polymod(acoeffs, F.modulus, F.p) if F.e > 1 else [acoeffs[0] % F.p]
        red = (red + [0] * F.e)[: F.e]
        out[i] = F._code(red)
    return poly_trim(out)


def parse_point(F: FiniteField, text: str) -> Point:
    return Point(F, parse_polynomial(F, text))
