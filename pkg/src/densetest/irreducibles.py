"""Counting and locally explicit access to monic irreducibles of degree t over F_q.

A vector lam in F_q^t of period t combined with a normal basis
alpha, alpha^q, ..., alpha^{q^{t-1}} of F_{q^t} gives an element beta whose
minimal polynomial has degree t.  The vectors (0^k, s) where s avoids k
consecutive zeros all have period t, and Select() walks them in a fixed
recursive order without enumerating.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from functools import lru_cache

from sympy import divisors, factorint

from .errors import Exhausted, IndexOutOfRange
from .gf import (
    Field,
    FieldElement,
    UniPoly,
    canonical_field,
    extension_field,
    normal_basis_generator,
)


def _mobius(n: int) -> int:
    fac = factorint(n)
    if any(e > 1 for e in fac.values()):
        return 0
    return -1 if len(fac) % 2 else 1


def count_irreducibles(q: int, k: int) -> int:
    """N_q(k) by Moebius inversion."""
    if q < 2 or k < 1:
        raise ValueError("need q >= 2 and k >= 1")
    total = sum(_mobius(k // r) * q ** r for r in divisors(k))
    assert total % k == 0
    return total // k


@lru_cache(maxsize=None)
def _m_table(q: int, k: int, n: int) -> tuple[int, ...]:
    M = []
    for i in range(n + 1):
        if i < k:
            M.append(q ** i)
        elif i == k:
            M.append(q ** k - 1)
        else:
            M.append(q * M[i - 1] - (q - 1) * M[i - k - 1])
    return tuple(M)


def count_no_zero_run(q: int, k: int, n: int) -> int:
    """M(k, n): length-n vectors over F_q with no k consecutive zeros."""
    if k < 1 or n < 0:
        raise ValueError("need k >= 1 and n >= 0")
    return _m_table(q, k, n)[n]


def select_k(q: int, t: int) -> int:
    """k = ceil(log_q t) + 1, computed in integers."""
    k = 0
    while q ** k < t:
        k += 1
    return k + 1


def select(q: int, k: int, n: int, m: int) -> list[int]:
    """The m-th (0-based) vector of S(k, n) in the recursive block order.

    Blocks are {0}^{i-1} x {alpha_j} x S(k, n-i) for i = 1..min(k, n), with the
    nonzero elements alpha_1 < ... < alpha_{q-1} being codes 1..q-1.  When n < k
    the all-zero vector closes the order.
    """
    M = _m_table(q, k, n)
    if not 0 <= m < M[n]:
        raise IndexOutOfRange(f"m={m} outside 0..{M[n] - 1}")
    out: list[int] = []
    while n > 0:
        for i in range(1, min(k, n) + 1):
            block = (q - 1) * M[n - i]
            if m < block:
                # j2 within the block: the sub-blocks have equal size M[n-i]
                j, m = divmod(m, M[n - i])
                out.extend([0] * (i - 1))
                out.append(j + 1)
                n -= i
                break
            m -= block
        else:
            out.extend([0] * n)  # the trailing all-zero vector (n < k only)
            n = 0
    return out


@dataclass(frozen=True)
class PeriodVector:
    q: int
    t: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if len(self.entries) != self.t or not has_period_t(self.entries):
            raise ValueError("vector does not have period t")


def has_period_t(v) -> bool:
    v = tuple(v)
    t = len(v)
    return len({v[i:] + v[:i] for i in range(t)}) == t


def select_capacity(q: int, t: int) -> int:
    """Number of valid indices for select_period_vector."""
    k = select_k(q, t)
    if t < k + 1:
        return 0
    n = t - k
    return count_no_zero_run(q, k, n) - (1 if n < k else 0)


def select_period_vector(q: int, t: int, m: int) -> PeriodVector:
    k = select_k(q, t)
    if t < k + 1:
        raise IndexOutOfRange(f"t={t} too small for k={k}")
    cap = select_capacity(q, t)
    if not 0 <= m < cap:
        raise IndexOutOfRange(f"m={m} outside 0..{cap - 1}")
    return PeriodVector(q, t, tuple([0] * k + select(q, k, t - k, m)))


def _is_orbit_min(v) -> bool:
    v = tuple(v)
    return all(v <= v[i:] + v[:i] for i in range(1, len(v)))


@dataclass(frozen=True)
class IrreducibleRecord:
    index: int
    poly: UniPoly
    root: FieldElement
    vector: tuple[int, ...] = ()


def _base(q) -> Field:
    return q if isinstance(q, Field) else canonical_field(int(q))


@lru_cache(maxsize=None)
def _conjugates(key_t: str) -> tuple[int, ...]:
    from .gf import field_from_signature

    F = field_from_signature(key_t)
    a = normal_basis_generator(F).code
    return tuple(F.frobenius(a, i) for i in range(F.degree))


def _record_from_vector(base: Field, t: int, lam, index: int) -> IrreducibleRecord:
    F = extension_field(base, t)
    conj = _conjugates(F.key)
    beta = 0
    for c, a in zip(lam, conj):
        if c:
            beta = F.add(beta, F.mul(c, a))
    # f = prod (X - beta^{q^i}) over F_{q^t}; its coefficients land in F_q
    coeffs = [1]
    b = beta
    for _ in range(t):
        nb = F.neg(b)
        new = [0] * (len(coeffs) + 1)
        for j, c in enumerate(coeffs):
            new[j + 1] = F.add(new[j + 1], c)
            new[j] = F.add(new[j], F.mul(c, nb))
        coeffs = new
        b = F.frobenius(b, 1)
    if b != beta:
        raise AssertionError("Frobenius orbit did not close")
    if any(c >= base.order for c in coeffs):
        raise AssertionError("product of conjugates left the base field")
    return IrreducibleRecord(index, UniPoly(base, coeffs), FieldElement(F, beta), tuple(lam))


def nth_irreducible_capacity(q, t: int) -> int:
    Q = _base(q).order
    return Q ** (t - 2) // (2 * t) if t >= 2 else 0


def nth_irreducible(q, t: int, m: int) -> IrreducibleRecord:
    """The m-th irreducible of degree t in the Select order (one per Frobenius orbit)."""
    base = _base(q)
    if m < 0:
        raise IndexOutOfRange(f"m={m} is negative")
    # the guaranteed capacity is nth_irreducible_capacity; indices past it are
    # served while the Select order still has orbit representatives
    lam = _nth_orbit_min(base.order, t, m)
    return _record_from_vector(base, t, lam, m)


_ORBITS: dict[tuple[int, int], tuple[list, list]] = {}
_ORBIT_LOCK = threading.Lock()


def _nth_orbit_min(q: int, t: int, m: int) -> tuple[int, ...]:
    # walk Select indices in order, counting only orbit representatives;
    # progress is memoised per (q, t) so repeated calls stay cheap
    with _ORBIT_LOCK:
        found, cursor = _ORBITS.setdefault((q, t), ([], [0]))
        cap = select_capacity(q, t)
        while len(found) <= m:
            if cursor[0] >= cap:
                raise IndexOutOfRange("Select order ran out of orbit representatives")
            v = select_period_vector(q, t, cursor[0]).entries
            cursor[0] += 1
            if _is_orbit_min(v):
                found.append(v)
        return found[m]


def first_m_irreducibles(q, t: int, m: int) -> list[IrreducibleRecord]:
    """First m distinct irreducibles met while scanning F_q^t lexicographically.

    The scan covers the first min(2tm, q^t) vectors.
    """
    base = _base(q)
    Q = base.order
    limit = min(2 * t * m, Q ** t)
    out: list[IrreducibleRecord] = []
    seen = set()
    for code in range(limit):
        lam = []
        c = code
        for _ in range(t):
            c, r = divmod(c, Q)
            lam.append(r)
        lam = lam[::-1]  # first coordinate most significant
        if not has_period_t(lam):
            continue
        rec = _record_from_vector(base, t, lam, len(out))
        if rec.poly.coeffs in seen:
            continue
        seen.add(rec.poly.coeffs)
        out.append(rec)
        if len(out) == m:
            return out
    raise Exhausted(f"only {len(out)} distinct irreducibles among the first {limit} vectors")


def irreducible_roots(q, k: int, count: int) -> tuple[list[IrreducibleRecord], str]:
    """count distinct irreducibles of degree k with a root each; reports the sourcing path."""
    base = _base(q)
    if count <= nth_irreducible_capacity(base, k):
        return [nth_irreducible(base, k, i) for i in range(count)], "nth"
    if k == 1:
        F = base
        if count > F.order:
            raise Exhausted("not enough linear polynomials")
        recs = [
            IrreducibleRecord(i, UniPoly(F, [F.neg(i), 1]), FieldElement(F, i), (i,))
            for i in range(count)
        ]
        return recs, "linear"
    return first_m_irreducibles(base, k, count), "first"

