"""Finite field towers F_p ⊂ F_{p^e1} ⊂ ... with exact arithmetic.

Elements are stored as integer codes.  At a level of degree k over a base
of order Qb, the element c_0 + c_1 X + ... + c_{k-1} X^{k-1} has code
sum(code(c_j) * Qb**j).  Two consequences we lean on everywhere:

* integer order of codes is the canonical element order (0 < 1 < x < x+1 in F_4),
* a subfield element keeps its code when viewed in a larger field of the
  same tower, so embeddings along a tower are free.

The base-p digits of a code are the flattened coefficient vector over F_p,
which makes addition digit-wise and every map we build F_p-linear in a
transparent way.
"""
from __future__ import annotations

import threading
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from sympy import factorint, isprime

from .errors import DivisionByZero, LevelMismatch, NotIrreducible, NotPrime

# fields with at most this many elements get a dense multiplication table
TABLE_LIMIT = 1024

_FIELDS: dict[str, "Field"] = {}
_LOCK = threading.Lock()


def _signature(p: int, levels: Sequence[tuple[int, tuple[int, ...]]]) -> str:
    parts = [f"p={p}"]
    for k, mod in levels:
        parts.append(f"deg={k}:" + ",".join(str(c) for c in mod))
    return ";".join(parts)


class Field:
    """One level of a tower.  Shared between towers with the same prefix."""

    def __init__(self, p: int, levels: tuple, base: "Field | None"):
        self.p = p
        self.level = len(levels)
        self.base = base
        self.key = _signature(p, levels)
        if base is None:
            self.degree = 1
            self.modulus: tuple[int, ...] = ()
            self.order = p
            self.e = 1
        else:
            k, mod = levels[-1]
            self.degree = k
            self.modulus = tuple(mod)
            self.order = base.order ** k
            self.e = base.e * k
        self._table = None
        self._inv_table = None
        self._frob = None

    # -- identity -------------------------------------------------------
    def __repr__(self):
        return f"Field(F_{self.order}, level={self.level}, sig='{self.key}')"

    def __eq__(self, other):
        return isinstance(other, Field) and other.key == self.key

    def __hash__(self):
        return hash(self.key)

    def __reduce__(self):
        return (field_from_signature, (self.key,))

    @property
    def tower(self) -> "FieldTower":
        return FieldTower.from_signature(self.key)

    @property
    def base_order(self) -> int:
        return self.base.order if self.base is not None else 1

    def is_subfield_of(self, other: "Field") -> bool:
        """True when self is a level of other's tower (so codes embed unchanged)."""
        if self.p != other.p or self.level > other.level:
            return False
        return other.key == self.key or other.key.startswith(self.key + ";")

    def chain(self) -> list["Field"]:
        out, f = [], self
        while f is not None:
            out.append(f)
            f = f.base
        return out[::-1]

    def element(self, code: int) -> "FieldElement":
        return FieldElement(self, code)

    def elements(self):
        return (FieldElement(self, c) for c in range(self.order))

    # -- coefficient views ----------------------------------------------
    def coeffs(self, a: int) -> list[int]:
        """Coefficients of a over the level below, low to high."""
        if self.base is None:
            return [a]
        qb = self.base.order
        out = []
        for _ in range(self.degree):
            a, r = divmod(a, qb)
            out.append(r)
        return out

    def from_coeffs(self, cs: Sequence[int]) -> int:
        if self.base is None:
            return int(cs[0]) % self.p if len(cs) else 0
        qb = self.base.order
        code = 0
        for c in reversed(list(cs)):
            code = code * qb + int(c)
        return code

    def digits(self, a: int) -> list[int]:
        p = self.p
        out = []
        for _ in range(self.e):
            a, r = divmod(a, p)
            out.append(r)
        return out

    def from_digits(self, ds: Sequence[int]) -> int:
        code = 0
        for d in reversed(list(ds)):
            code = code * self.p + int(d)
        return code

    # -- scalar arithmetic ----------------------------------------------
    def add(self, a: int, b: int) -> int:
        p = self.p
        if p == 2:
            return a ^ b
        if self.base is None:
            return (a + b) % p
        res, m = 0, 1
        for _ in range(self.e):
            a, da = divmod(a, p)
            b, db = divmod(b, p)
            res += ((da + db) % p) * m
            m *= p
        return res

    def neg(self, a: int) -> int:
        p = self.p
        if p == 2:
            return a
        if self.base is None:
            return (-a) % p
        res, m = 0, 1
        for _ in range(self.e):
            a, da = divmod(a, p)
            res += ((-da) % p) * m
            m *= p
        return res

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if self.base is None:
            return (a * b) % self.p
        if self.order <= TABLE_LIMIT:
            return int(self.table[a, b])
        if self.p == 2 and self.base.base is None:
            return self._mul_gf2(a, b)
        return self._mul_poly(a, b)

    def _mul_gf2(self, a: int, b: int) -> int:
        # carry-less product, then reduction by the modulus bit pattern
        r = 0
        while b:
            if b & 1:
                r ^= a
            a <<= 1
            b >>= 1
        k = self.degree
        mbits = self._modbits
        for s in range(r.bit_length() - 1, k - 1, -1):
            if r >> s & 1:
                r ^= mbits << (s - k)
        return r

    @property
    def _modbits(self) -> int:
        return sum(c << j for j, c in enumerate(self.modulus))

    def _mul_poly(self, a: int, b: int) -> int:
        B = self.base
        k = self.degree
        ca, cb = self.coeffs(a), self.coeffs(b)
        prod = [0] * (2 * k - 1)
        for i, x in enumerate(ca):
            if x == 0:
                continue
            for j, y in enumerate(cb):
                if y:
                    prod[i + j] = B.add(prod[i + j], B.mul(x, y))
        mod = self.modulus
        for s in range(2 * k - 2, k - 1, -1):
            c = prod[s]
            if c:
                for j in range(k):
                    if mod[j]:
                        prod[s - k + j] = B.sub(prod[s - k + j], B.mul(c, mod[j]))
        return self.from_coeffs(prod[:k])

    def pow(self, a: int, n: int) -> int:
        if n < 0:
            return self.pow(self.inv(a), -n)
        result = 1
        while n:
            if n & 1:
                result = self.mul(result, a)
            n >>= 1
            if n:
                a = self.mul(a, a)
        return result

    def inv(self, a: int) -> int:
        if a == 0:
            raise DivisionByZero("inverse of zero")
        if self.order <= TABLE_LIMIT:
            return int(self.inv_table[a])
        return self.pow(a, self.order - 2)

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def frobenius(self, a: int, j: int = 1) -> int:
        """a ** (Qb ** j) with Qb the order of the level below."""
        if self.base is None:
            return a
        j %= self.degree
        if j == 0:
            return a
        if self.order <= TABLE_LIMIT or (self.p == 2 and self.base.base is None):
            return self.pow(a, self.base.order ** j)
        # Frobenius is linear over the level below: use images of the powers of X
        images = self._frob_images
        B = self.base
        for _ in range(j):
            acc = [0] * self.degree
            for c, img in zip(self.coeffs(a), images):
                if c:
                    acc = [B.add(x, B.mul(c, y)) for x, y in zip(acc, img)]
            a = self.from_coeffs(acc)
        return a

    @property
    def _frob_images(self):
        if self._frob is None:
            qb = self.base.order
            # qb**j is the code of X^j for j < degree
            self._frob = [self.coeffs(self.pow(qb ** j, qb)) for j in range(self.degree)]
        return self._frob

    # -- tables and vectorised arithmetic --------------------------------
    @property
    def table(self) -> np.ndarray:
        if self._table is None:
            with _LOCK:
                if self._table is None:
                    Q = self.order
                    a = np.repeat(np.arange(Q, dtype=np.int64), Q)
                    b = np.tile(np.arange(Q, dtype=np.int64), Q)
                    t = self._mul_array_raw(a, b).reshape(Q, Q)
                    self._table = t.astype(np.int32 if Q > 255 else np.int16)
        return self._table

    @property
    def inv_table(self) -> np.ndarray:
        if self._inv_table is None:
            t = self.table
            inv = np.zeros(self.order, dtype=np.int64)
            rows, cols = np.nonzero(t == 1)
            inv[rows] = cols
            self._inv_table = inv
        return self._inv_table

    def add_array(self, A, B):
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        p = self.p
        if p == 2:
            return A ^ B
        if self.base is None:
            return (A + B) % p
        res = np.zeros(np.broadcast(A, B).shape, dtype=np.int64)
        m = 1
        for _ in range(self.e):
            res += (((A // m) % p + (B // m) % p) % p) * m
            m *= p
        return res

    def neg_array(self, A):
        A = np.asarray(A, dtype=np.int64)
        p = self.p
        if p == 2:
            return A
        if self.base is None:
            return (-A) % p
        res = np.zeros_like(A)
        m = 1
        for _ in range(self.e):
            res += ((-((A // m) % p)) % p) * m
            m *= p
        return res

    def mul_array(self, A, B):
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        if self.base is None:
            return (A * B) % self.p
        if self.order <= TABLE_LIMIT:
            return self.table[A, B].astype(np.int64)
        return self._mul_array_raw(A, B)

    def _mul_array_raw(self, A, B):
        if self.base is None:
            return (A * B) % self.p
        Bf = self.base
        k, qb = self.degree, Bf.order
        A, B = np.broadcast_arrays(A, B)
        ca = [(A // qb ** j) % qb for j in range(k)]
        cb = [(B // qb ** j) % qb for j in range(k)]
        prod = [np.zeros(A.shape, dtype=np.int64) for _ in range(2 * k - 1)]
        for i in range(k):
            for j in range(k):
                prod[i + j] = Bf.add_array(prod[i + j], Bf.mul_array(ca[i], cb[j]))
        mod = self.modulus
        for s in range(2 * k - 2, k - 1, -1):
            c = prod[s]
            for j in range(k):
                if mod[j]:
                    prod[s - k + j] = Bf.add_array(
                        prod[s - k + j], Bf.neg_array(Bf.mul_array(c, mod[j]))
                    )
        out = np.zeros(A.shape, dtype=np.int64)
        for j in reversed(range(k)):
            out = out * qb + prod[j]
        return out

    def pow_array(self, A, n: int):
        A = np.asarray(A, dtype=np.int64)
        result = np.ones(A.shape, dtype=np.int64)
        while n:
            if n & 1:
                result = self.mul_array(result, A)
            n >>= 1
            if n:
                A = self.mul_array(A, A)
        return result

    def digits_array(self, A):
        """(..., e) array of base-p digits, low first."""
        A = np.asarray(A, dtype=np.int64)
        p = self.p
        return np.stack([(A // p ** j) % p for j in range(self.e)], axis=-1)

    def from_digits_array(self, D):
        D = np.asarray(D, dtype=np.int64)
        w = self.p ** np.arange(self.e, dtype=np.int64)
        return (D * w).sum(axis=-1)


def field_from_signature(key: str) -> Field:
    return FieldTower.from_signature(key).top


class FieldElement:
    """A field element: a level of a tower plus its integer code."""

    __slots__ = ("field", "code")

    def __init__(self, field: Field, code: int):
        code = int(code)
        if not 0 <= code < field.order:
            raise ValueError(f"code {code} out of range for {field!r}")
        self.field = field
        self.code = code

    @property
    def tower(self) -> "FieldTower":
        return self.field.tower

    @property
    def level(self) -> int:
        return self.field.level

    @property
    def coeffs(self) -> tuple["FieldElement", ...]:
        """Coefficient vector over the level below (the element itself at level 0)."""
        f = self.field
        if f.base is None:
            return (self,)
        return tuple(FieldElement(f.base, c) for c in f.coeffs(self.code))

    def nested(self):
        """Fully nested coefficient vector down to F_p."""
        f = self.field
        if f.base is None:
            return self.code
        return tuple(FieldElement(f.base, c).nested() for c in f.coeffs(self.code))

    def _other(self, other) -> int:
        if isinstance(other, FieldElement):
            if other.field == self.field:
                return other.code
            if other.field.is_subfield_of(self.field):
                return other.code
            raise LevelMismatch(f"{other.field!r} vs {self.field!r}")
        if isinstance(other, int):
            return other % self.field.p  # integers act through the prime field
        return NotImplemented

    def _wrap(self, code: int) -> "FieldElement":
        return FieldElement(self.field, code)

    def __add__(self, other):
        return self._wrap(self.field.add(self.code, self._other(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return self._wrap(self.field.sub(self.code, self._other(other)))

    def __rsub__(self, other):
        return self._wrap(self.field.sub(self._other(other), self.code))

    def __mul__(self, other):
        return self._wrap(self.field.mul(self.code, self._other(other)))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._wrap(self.field.div(self.code, self._other(other)))

    def __neg__(self):
        return self._wrap(self.field.neg(self.code))

    def __pow__(self, n: int):
        return self._wrap(self.field.pow(self.code, n))

    def inv(self) -> "FieldElement":
        return self._wrap(self.field.inv(self.code))

    def frobenius(self, j: int = 1) -> "FieldElement":
        return self._wrap(self.field.frobenius(self.code, j))

    def __bool__(self):
        return self.code != 0

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.field == other.field and self.code == other.code
        if isinstance(other, int):
            return self.code == other % self.field.p and self.code < self.field.p
        return NotImplemented

    def __hash__(self):
        return hash((self.field.key, self.code))

    def __repr__(self):
        return f"<F_{self.field.order} code={self.code}>"


# module-level functional API, mirroring the element operators
def add(a: FieldElement, b: FieldElement) -> FieldElement:
    _same(a, b)
    return a + b


def sub(a: FieldElement, b: FieldElement) -> FieldElement:
    _same(a, b)
    return a - b


def mul(a: FieldElement, b: FieldElement) -> FieldElement:
    _same(a, b)
    return a * b


def neg(a: FieldElement) -> FieldElement:
    return -a


def inv(a: FieldElement) -> FieldElement:
    return a.inv()


def pow(a: FieldElement, n: int) -> FieldElement:  # noqa: A001
    return a ** n


def frobenius(a: FieldElement, j: int) -> FieldElement:
    return a.frobenius(j)


def _same(a: FieldElement, b: FieldElement):
    if a.field != b.field:
        raise LevelMismatch(f"{a.field!r} vs {b.field!r}")


class FieldTower:
    """A prime field plus a chain of explicit monic irreducible extensions."""

    def __init__(self, p: int, levels: Iterable[tuple[int, Sequence[int]]] = (), _checked=False):
        p = int(p)
        if p < 2 or not isprime(p):
            raise NotPrime(f"{p} is not prime")
        self.p = p
        self.levels: tuple[tuple[int, tuple[int, ...]], ...] = tuple(
            (int(k), tuple(int(c) for c in mod)) for k, mod in levels
        )
        fields = [_get_field(p, (), None)]
        for i, (k, mod) in enumerate(self.levels):
            prev = fields[-1]
            if k < 1 or len(mod) != k + 1 or mod[-1] != 1:
                raise NotIrreducible(f"level {i + 1}: modulus must be monic of degree {k}")
            if any(not 0 <= c < prev.order for c in mod):
                raise ValueError(f"level {i + 1}: coefficient out of range")
            key = _signature(p, self.levels[: i + 1])
            if key not in _FIELDS and not _checked:
                if not is_irreducible(UniPoly(prev, mod)):
                    raise NotIrreducible(f"level {i + 1}: modulus {list(mod)} is reducible")
            fields.append(_get_field(p, self.levels[: i + 1], prev))
        self._fields = fields

    @classmethod
    def from_signature(cls, sig: str) -> "FieldTower":
        return _tower_from_signature(sig.strip())

    @property
    def height(self) -> int:
        return len(self.levels)

    @property
    def top(self) -> Field:
        return self._fields[-1]

    def field(self, level: int) -> Field:
        if not 0 <= level < len(self._fields):
            raise LevelMismatch(f"tower has no level {level}")
        return self._fields[level]

    def cardinality(self, level: int | None = None) -> int:
        return self.field(self.height if level is None else level).order

    def signature(self, level: int | None = None) -> str:
        return self.field(self.height if level is None else level).key

    def element(self, code: int, level: int | None = None) -> FieldElement:
        return self.field(self.height if level is None else level).element(code)

    def __eq__(self, other):
        return isinstance(other, FieldTower) and other.signature() == self.signature()

    def __hash__(self):
        return hash(self.signature())

    def __repr__(self):
        return f"FieldTower('{self.signature()}')"


def _get_field(p, levels, base) -> Field:
    key = _signature(p, levels)
    f = _FIELDS.get(key)
    if f is None:
        with _LOCK:
            f = _FIELDS.get(key)
            if f is None:
                f = Field(p, tuple(levels), base)
                _FIELDS[key] = f
    return f


@lru_cache(maxsize=None)
def _tower_from_signature(sig: str) -> FieldTower:
    from .errors import MalformedInput

    parts = sig.split(";")
    if not parts[0].startswith("p="):
        raise MalformedInput(f"bad tower signature {sig!r}")
    try:
        p = int(parts[0][2:])
        levels = []
        for part in parts[1:]:
            head, _, body = part.partition(":")
            if not head.startswith("deg="):
                raise ValueError(part)
            levels.append((int(head[4:]), [int(c) for c in body.split(",")]))
    except ValueError as exc:
        raise MalformedInput(f"bad tower signature {sig!r}: {exc}") from None
    return FieldTower(p, levels)


# ---------------------------------------------------------------------------
# univariate polynomials over a level
# ---------------------------------------------------------------------------
class UniPoly:
    """Polynomial over a Field, coefficient codes low to high, no trailing zeros."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: Field, coeffs: Iterable[int] = ()):
        cs = [int(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.field = field
        self.coeffs = tuple(cs)

    @property
    def degree(self) -> float | int:
        return len(self.coeffs) - 1 if self.coeffs else float("-inf")

    @property
    def level(self) -> int:
        return self.field.level

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_monic(self) -> bool:
        return bool(self.coeffs) and self.coeffs[-1] == 1

    def lead(self) -> int:
        return self.coeffs[-1] if self.coeffs else 0

    def __eq__(self, other):
        return isinstance(other, UniPoly) and other.field == self.field and other.coeffs == self.coeffs

    def __hash__(self):
        return hash((self.field.key, self.coeffs))

    def __repr__(self):
        return f"UniPoly(F_{self.field.order}, {list(self.coeffs)})"

    def coeff(self, j: int) -> int:
        return self.coeffs[j] if 0 <= j < len(self.coeffs) else 0

    def __add__(self, other: "UniPoly") -> "UniPoly":
        F = self.field
        n = max(len(self.coeffs), len(other.coeffs))
        return UniPoly(F, [F.add(self.coeff(i), other.coeff(i)) for i in range(n)])

    def __sub__(self, other: "UniPoly") -> "UniPoly":
        F = self.field
        n = max(len(self.coeffs), len(other.coeffs))
        return UniPoly(F, [F.sub(self.coeff(i), other.coeff(i)) for i in range(n)])

    def __neg__(self):
        return UniPoly(self.field, [self.field.neg(c) for c in self.coeffs])

    def __mul__(self, other: "UniPoly") -> "UniPoly":
        F = self.field
        if not self.coeffs or not other.coeffs:
            return UniPoly(F)
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    if b:
                        out[i + j] = F.add(out[i + j], F.mul(a, b))
        return UniPoly(F, out)

    def scale(self, c: int) -> "UniPoly":
        return UniPoly(self.field, [self.field.mul(c, a) for a in self.coeffs])

    def divmod(self, other: "UniPoly") -> tuple["UniPoly", "UniPoly"]:
        F = self.field
        if other.is_zero():
            raise DivisionByZero("polynomial division by zero")
        r = list(self.coeffs)
        dq = len(other.coeffs) - 1
        inv_lead = F.inv(other.lead())
        q = [0] * max(len(r) - dq, 0)
        for s in range(len(r) - 1, dq - 1, -1):
            c = r[s]
            if c == 0:
                continue
            c = F.mul(c, inv_lead)
            q[s - dq] = c
            for j, m in enumerate(other.coeffs):
                if m:
                    r[s - dq + j] = F.sub(r[s - dq + j], F.mul(c, m))
        return UniPoly(F, q), UniPoly(F, r[:dq])

    def __mod__(self, other: "UniPoly") -> "UniPoly":
        return self.divmod(other)[1]

    def monic(self) -> "UniPoly":
        if self.is_zero():
            return self
        return self.scale(self.field.inv(self.lead()))

    def powmod(self, n: int, mod: "UniPoly") -> "UniPoly":
        result = UniPoly(self.field, [1]) % mod
        base = self % mod
        while n:
            if n & 1:
                result = (result * base) % mod
            n >>= 1
            if n:
                base = (base * base) % mod
        return result

    def __call__(self, x):
        """Evaluate at a FieldElement of a field containing the coefficients."""
        return evaluate(self, x)


def evaluate(z: UniPoly, x: FieldElement) -> FieldElement:
    G = x.field
    if not (z.field == G or z.field.is_subfield_of(G)):
        raise LevelMismatch(f"cannot evaluate poly over {z.field!r} at a point of {G!r}")
    acc = 0
    for c in reversed(z.coeffs):
        acc = G.add(G.mul(acc, x.code), c)
    return FieldElement(G, acc)


def poly_gcd(a: UniPoly, b: UniPoly) -> UniPoly:
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


def X(field: Field) -> UniPoly:
    return UniPoly(field, [0, 1])


def is_irreducible(f: UniPoly) -> bool:
    """Rabin's test over the coefficient field of f."""
    if f.is_zero() or f.degree < 1:
        return False
    f = f.monic()
    k = int(f.degree)
    if k == 1:
        return True
    F = f.field
    Q = F.order
    x = X(F)
    powers = [x % f]  # powers[i] = X^(Q^i) mod f
    for _ in range(k):
        powers.append(powers[-1].powmod(Q, f))
    if powers[k] != x % f:
        return False
    for r in factorint(k):
        g = poly_gcd(f, powers[k // r] - x)
        if g.degree != 0:
            return False
    return True


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------
def prime_field(p: int) -> FieldTower:
    return FieldTower(p)


@lru_cache(maxsize=None)
def least_irreducible(field_key: str, k: int) -> tuple[int, ...]:
    """Least monic irreducible of degree k over a field, as coefficient codes."""
    F = field_from_signature(field_key)
    Q = F.order
    for n in range(Q ** k):
        cs = []
        m = n
        for _ in range(k):
            m, r = divmod(m, Q)
            cs.append(r)
        if k > 1 and cs[0] == 0:
            continue
        f = UniPoly(F, cs + [1])
        if is_irreducible(f):
            return tuple(cs + [1])
    raise AssertionError("no irreducible polynomial found")  # cannot happen


def extend(tower: FieldTower, k: int, modulus: UniPoly | Sequence[int] | None = None) -> FieldTower:
    top = tower.top
    if modulus is None:
        mod = least_irreducible(top.key, int(k))
        return FieldTower(tower.p, tower.levels + ((int(k), mod),), _checked=True)
    if isinstance(modulus, UniPoly):
        if modulus.field != top:
            raise LevelMismatch("modulus must have coefficients in the top level")
        mod = modulus.coeffs
    else:
        mod = tuple(int(c) for c in modulus)
    if len(mod) != k + 1 or mod[-1] != 1:
        raise NotIrreducible(f"modulus must be monic of degree {k}")
    return FieldTower(tower.p, tower.levels + ((int(k), tuple(mod)),))


def canonical_field(q: int) -> Field:
    """The canonical field with q elements: F_p, or its least-modulus extension."""
    fac = factorint(q)
    if len(fac) != 1:
        raise NotPrime(f"{q} is not a prime power")
    (p, e), = fac.items()
    t = prime_field(p)
    if e > 1:
        t = extend(t, e)
    return t.top


def extension_field(base: Field, k: int) -> Field:
    """Canonical degree-k extension of a field (same tower prefix)."""
    if k == 1:
        return base
    return extend(base.tower, k).top


def subfield_below(F: Field) -> Field:
    if F.base is None:
        raise LevelMismatch("prime field has no level below")
    return F.base


# ---------------------------------------------------------------------------
# linear algebra over a level, normal bases, lift/substitute
# ---------------------------------------------------------------------------
def rank(F: Field, rows: Sequence[Sequence[int]]) -> int:
    m = [list(r) for r in rows]
    rk = 0
    ncols = len(m[0]) if m else 0
    for c in range(ncols):
        piv = next((i for i in range(rk, len(m)) if m[i][c]), None)
        if piv is None:
            continue
        m[rk], m[piv] = m[piv], m[rk]
        iv = F.inv(m[rk][c])
        m[rk] = [F.mul(iv, x) for x in m[rk]]
        for i in range(len(m)):
            if i != rk and m[i][c]:
                f = m[i][c]
                m[i] = [F.sub(x, F.mul(f, y)) for x, y in zip(m[i], m[rk])]
        rk += 1
    return rk


@lru_cache(maxsize=None)
def _normal_code(key: str) -> int:
    F = field_from_signature(key)
    k = F.degree
    for a in range(1, F.order):
        rows = [F.coeffs(F.frobenius(a, i)) for i in range(k)]
        if rank(F.base, rows) == k:
            return a
    raise AssertionError("no normal element")  # cannot happen


def normal_basis_generator(tower: FieldTower | Field, level: int | None = None) -> FieldElement:
    F = tower if isinstance(tower, Field) else tower.field(tower.height if level is None else level)
    if F.base is None:
        raise LevelMismatch("normal basis needs level >= 1")
    return FieldElement(F, _normal_code(F.key))


def element_to_unipoly(e: FieldElement) -> UniPoly:
    F = e.field
    if F.base is None:
        raise LevelMismatch("lift needs level >= 1")
    return UniPoly(F.base, F.coeffs(e.code))


def unipoly_to_element(z: UniPoly, tower: FieldTower | Field, level: int | None = None) -> FieldElement:
    F = tower if isinstance(tower, Field) else tower.field(tower.height if level is None else level)
    if F.base is None or z.field != F.base:
        raise LevelMismatch("polynomial must live over the level below")
    r = z % UniPoly(F.base, F.modulus)
    return FieldElement(F, F.from_coeffs(list(r.coeffs) + [0] * (F.degree - len(r.coeffs))))
