"""Brute-force ground truth for the tester property.

Every map we build is F_p-linear and every polynomial is linear in its
coefficients, so for a fixed assignment a the values f(a) and f(l_i(a)) of all
polynomials f at once come from one F_p matrix product C @ G_a.  That is the
main path.  `is_tester_naive` walks (f, a, i) one at a time through `apply` and
exists only to cross-check it.
"""
from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .errors import BudgetExceeded, LevelMismatch
from .gf import Field, FieldElement, UniPoly
from .tester import EvaluationNode, PolyClass, PolySpace, Tester

DEFAULT_BUDGET = 10 ** 7
_BLOCK = 1 << 23  # float64 cells per matmul chunk


def default_budget() -> int:
    env = os.environ.get("DENSETEST_BUDGET")
    return int(float(env)) if env else DEFAULT_BUDGET


# ---------------------------------------------------------------------------
# polynomials
# ---------------------------------------------------------------------------
def monomial_basis(family: str, n: int, d: int, cap: int | None = None) -> list[tuple[int, ...]]:
    """Exponent vectors.  HLF uses d blocks of n variables, one variable per block."""
    if family == "HLF":
        out = []
        for choice in itertools.product(range(n), repeat=d):
            e = [0] * (n * d)
            for b, j in enumerate(choice):
                e[b * n + j] = 1
            out.append(tuple(e))
        return out
    out = []
    for deg in range(0 if family == "P" else d, d + 1):
        for combo in itertools.combinations_with_replacement(range(n), deg):
            e = [0] * n
            for j in combo:
                e[j] += 1
            if cap is not None and max(e, default=0) > cap:
                continue
            out.append(tuple(e))
    return out


def num_variables(family: str, n: int, d: int) -> int:
    return n * d if family == "HLF" else n


@dataclass(frozen=True)
class MultiPoly:
    family: str
    n: int
    d: int
    field: Field
    terms: tuple[tuple[tuple[int, ...], int], ...]  # (exponents, coefficient code)

    def as_dict(self) -> dict:
        return dict(self.terms)

    def __call__(self, a):
        return eval_poly(self, a)

    def describe(self) -> str:
        parts = []
        for e, c in self.terms:
            mono = "*".join(f"x{j}" + (f"^{k}" if k > 1 else "") for j, k in enumerate(e) if k)
            parts.append(f"{c}" + (f"*{mono}" if mono else ""))
        return " + ".join(parts) or "0"

    def to_json(self) -> dict:
        return {"family": self.family, "n": self.n, "d": self.d,
                "terms": [[list(e), c] for e, c in self.terms]}


def eval_poly(f: MultiPoly, a: Sequence) -> FieldElement:
    """Evaluate at field elements (all in one field containing the coefficients)."""
    a = list(a)
    if len(a) != num_variables(f.family, f.n, f.d):
        raise ValueError("assignment length does not match the class")
    G = a[0].field
    for x in a:
        if x.field != G:
            raise LevelMismatch("assignment mixes fields")
    if not f.field.is_subfield_of(G):
        raise LevelMismatch("coefficients do not embed in the assignment field")
    acc = 0
    for e, c in f.terms:
        term = c
        for x, k in zip(a, e):
            if k:
                term = G.mul(term, G.pow(x.code, k))
        acc = G.add(acc, term)
    return FieldElement(G, acc)


def _poly_from_row(family, n, d, K: Field, basis, coeff_codes) -> MultiPoly:
    terms = tuple((e, int(c)) for e, c in zip(basis, coeff_codes) if c)
    return MultiPoly(family, n, d, K, terms)


def _coefficient_rows(K: Field, M: int, cap: int, seed: int) -> tuple[np.ndarray, bool]:
    """Coefficient codes (rows x M) of nonzero polynomials: all of them, or a seeded sample."""
    Qk = K.order
    total = Qk ** M - 1
    if total <= cap:
        idx = np.arange(1, total + 1, dtype=np.int64)
        rows = np.stack([(idx // Qk ** j) % Qk for j in range(M)], axis=1)
        return rows, True
    rng = np.random.default_rng(seed)
    rows = rng.integers(0, Qk, size=(cap, M), dtype=np.int64)
    zero = ~rows.any(axis=1)
    while zero.any():
        rows[zero] = rng.integers(0, Qk, size=(int(zero.sum()), M), dtype=np.int64)
        zero = ~rows.any(axis=1)
    return rows, False


def enumerate_class(K: Field, n: int, d: int, family: str, cap: int = 10 ** 6,
                    seed: int = 0, variable_degree_cap: int | None = None) -> Iterator[MultiPoly]:
    basis = monomial_basis(family, n, d, variable_degree_cap)
    rows, _ = _coefficient_rows(K, len(basis), cap, seed)
    for r in rows:
        yield _poly_from_row(family, n, d, K, basis, r)


def class_size(K: Field, n: int, d: int, family: str, variable_degree_cap=None) -> int:
    return K.order ** len(monomial_basis(family, n, d, variable_degree_cap)) - 1


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------
@dataclass
class Grid:
    n: int | None = None  # variables (per block for HLF); None -> class n or 2
    poly_cap: int = 10 ** 6
    point_cap: int = 10 ** 6
    exact: bool | None = None  # True: insist on exhaustive; None: exhaustive when affordable
    budget: int | None = None
    seed: int = 0
    pclass: PolyClass | None = None  # defaults to the tester's class


@dataclass
class Witness:
    poly: MultiPoly
    assignment: tuple[int, ...]
    failing: list[int]

    def to_json(self) -> dict:
        return {"poly": self.poly.to_json(), "poly_text": self.poly.describe(),
                "assignment": list(self.assignment), "failing_indices": self.failing[:256],
                "failing_count": len(self.failing)}


@dataclass
class VerificationReport:
    verdict: bool
    worst_failure: Fraction
    declared_epsilon: Fraction
    exact: bool
    witness: Witness | None
    counts: dict = field(default_factory=dict)
    seed: int = 0
    n: int = 0
    family: str = "P"
    notes: list = field(default_factory=list)

    @property
    def measured_density(self) -> Fraction:
        return 1 - self.worst_failure

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "worst_failure": {"num": self.worst_failure.numerator, "den": self.worst_failure.denominator},
            "declared_epsilon": {"num": self.declared_epsilon.numerator,
                                 "den": self.declared_epsilon.denominator},
            "exact": self.exact,
            "witness": self.witness.to_json() if self.witness else None,
            "counts": self.counts,
            "seed": self.seed,
            "n": self.n,
            "family": self.family,
            "notes": self.notes,
        }


# ---------------------------------------------------------------------------
# linearisation helpers
# ---------------------------------------------------------------------------
def map_matrices(t: Tester, block: int) -> np.ndarray:
    """(size, e_S, e_T) F_p matrices of the block-th maps, row j = image of p^j."""
    S, T = t.source, t.target
    p = S.p
    out = np.zeros((t.size, S.e, T.e), dtype=np.int64)
    basis = [p ** j for j in range(S.e)]
    for i in range(t.size):
        m = t.map_at(i)[block]
        for j, b in enumerate(basis):
            out[i, j] = T.digits(m.apply(b))
    return out


def _check_fields(t: Tester, K: Field):
    S, T = t.source, t.target
    if not isinstance(S, Field) or not isinstance(T, Field):
        raise LevelMismatch("the linear path needs field source and target")
    if not (K.is_subfield_of(S) and K.is_subfield_of(T)):
        raise LevelMismatch("class coefficients must embed in source and target")


def _var_blocks(t: Tester, family: str, n: int, d: int) -> list[int]:
    nv = num_variables(family, n, d)
    if t.blocks == 1:
        return [0] * nv
    if family == "HLF" and t.blocks == d:
        return [j // n for j in range(nv)]
    raise LevelMismatch(f"tester with {t.blocks} blocks cannot act on {family} with d={d}")


def _assignment_batches(S: Field, nv: int, count_exh: int, exhaustive: bool, n_points: int,
                        seed: int, batch: int):
    Qs = S.order
    if exhaustive:
        for lo in range(0, count_exh, batch):
            idx = np.arange(lo, min(lo + batch, count_exh), dtype=np.int64)
            yield np.stack([(idx // Qs ** j) % Qs for j in range(nv)], axis=1)
    else:
        rng = np.random.default_rng(seed + 1)
        done = 0
        while done < n_points:
            b = min(batch, n_points - done)
            yield rng.integers(0, Qs, size=(b, nv), dtype=np.int64)
            done += b


def _monomial_values(F: Field, A: np.ndarray, basis) -> list[np.ndarray]:
    """Values of each monomial; A has variables on the last axis."""
    vals = []
    cache: dict = {}
    for e in basis:
        v = np.ones(A.shape[:-1], dtype=np.int64)
        for j, k in enumerate(e):
            if k:
                key = (j, k)
                if key not in cache:
                    cache[key] = F.pow_array(A[..., j], k)
                v = F.mul_array(v, cache[key])
        vals.append(v)
    return vals


def _design_rows(F: Field, K: Field, mvals: list[np.ndarray]) -> np.ndarray:
    """G rows indexed (monomial, F_p-basis element of K): digits of b_k * m(x)."""
    p = F.p
    rows = []
    for v in mvals:
        for k in range(K.e):
            rows.append(F.digits_array(F.mul_array(p ** k, v)))
    return np.stack(rows, axis=0)  # (M*eK, ..., e_F)


def _digit_matrix(K: Field, coeff_rows: np.ndarray) -> np.ndarray:
    """Polynomials as F_p rows: coefficient codes -> digits laid out (monomial, k)."""
    D = K.digits_array(coeff_rows)  # (N, M, eK)
    return D.reshape(D.shape[0], -1).astype(np.float64)


# ---------------------------------------------------------------------------
# the oracle
# ---------------------------------------------------------------------------
def _resolve(t: Tester, grid: Grid):
    cls = grid.pclass or t.pclass
    K = cls.field or t.class_field()
    family = cls.family
    d = cls.d
    n = grid.n or cls.n or 2
    return cls, K, family, d, n


def is_tester(t: Tester, grid: Grid | None = None, **kw) -> VerificationReport:
    grid = grid or Grid(**kw)
    if not isinstance(t.target, Field):
        return is_tester_naive(t, grid)
    cls, K, family, d, n = _resolve(t, grid)
    _check_fields(t, K)
    S, T = t.source, t.target
    p = S.p
    basis = monomial_basis(family, n, d, cls.variable_degree_cap)
    M = len(basis)
    nv = num_variables(family, n, d)
    vblocks = _var_blocks(t, family, n, d)
    budget = grid.budget if grid.budget is not None else default_budget()

    n_polys_all = K.order ** M - 1
    n_points_all = S.order ** nv
    poly_exh = n_polys_all <= grid.poly_cap
    point_exh = n_points_all <= grid.point_cap
    n_polys = n_polys_all if poly_exh else grid.poly_cap
    n_points = n_points_all if point_exh else grid.point_cap
    evals = n_polys * n_points * (t.size + 1)
    if grid.exact:
        if not (poly_exh and point_exh):
            raise BudgetExceeded("exact mode needs both enumerations to be exhaustive; raise the caps")
        if evals > budget:
            raise BudgetExceeded(f"{evals} evaluations exceed the budget {budget}")
    elif evals > budget:
        # sample points so that the work fits the budget
        point_exh = False
        n_points = max(1, min(n_points, budget // (n_polys * (t.size + 1))))
        evals = n_polys * n_points * (t.size + 1)
    exact = poly_exh and point_exh

    rows, _ = _coefficient_rows(K, M, n_polys if not poly_exh else n_polys_all + 1, grid.seed)
    C = _digit_matrix(K, rows)  # (N, M*eK)

    mats = {b: map_matrices(t, b) for b in set(vblocks)}
    per_point = max(1, n_polys * t.size * T.e)
    batch = max(1, min(4096, _BLOCK // per_point))
    pchunk = n_polys if per_point <= _BLOCK else max(1, _BLOCK // (t.size * T.e))

    worst_num = -1
    witness = None
    nonzero_pairs = 0
    for A in _assignment_batches(S, nv, n_points_all, point_exh, n_points, grid.seed, batch):
        B = A.shape[0]
        # f(a): rows (monomial, k) x (B, e_S)
        G0 = _design_rows(S, K, _monomial_values(S, A, basis))
        G0 = G0.reshape(G0.shape[0], -1).astype(np.float64)
        # f(l_i(a)): images of every variable under every map
        imgs = np.empty((B, t.size, nv), dtype=np.int64)
        for j in range(nv):
            D = S.digits_array(A[:, j])  # (B, e_S)
            dig = np.einsum("bs,ist->bit", D, mats[vblocks[j]]) % p
            imgs[:, :, j] = T.from_digits_array(dig)
        G1 = _design_rows(T, K, _monomial_values(T, imgs, basis))  # (MK, B, size, e_T)
        G1 = G1.reshape(G1.shape[0], -1).astype(np.float64)
        for lo in range(0, C.shape[0], pchunk):
            Cc = C[lo: lo + pchunk]
            fnz = (np.remainder(Cc @ G0, p).reshape(len(Cc), B, S.e) != 0).any(axis=2)
            van = (np.remainder(Cc @ G1, p).reshape(len(Cc), B, t.size, T.e) == 0).all(axis=3)
            zeros = van.sum(axis=2)
            zeros = np.where(fnz, zeros, -1)
            nonzero_pairs += int(fnz.sum())
            k = int(zeros.argmax())
            pi, bi = divmod(k, B)
            if zeros[pi, bi] > worst_num:
                worst_num = int(zeros[pi, bi])
                poly = _poly_from_row(family, n, d, K, basis, rows[lo + pi])
                witness = Witness(poly, tuple(int(x) for x in A[bi]),
                                  [int(i) for i in np.nonzero(van[pi, bi])[0]])
    worst = Fraction(max(worst_num, 0), t.size)
    verdict = worst <= t.epsilon
    notes = [f"n-limited: checked n={n} variables" + (" per block" if family == "HLF" else "")]
    if not exact:
        notes.append("sampled: not an exhaustive verdict")
    counts = {"polynomials": int(n_polys), "assignments": int(n_points),
              "nonzero_pairs": nonzero_pairs, "evaluations": int(evals),
              "poly_exhaustive": poly_exh, "point_exhaustive": point_exh}
    return VerificationReport(verdict, worst, t.epsilon, exact, witness if worst_num > 0 else None,
                              counts, grid.seed, n, family, notes)


def measured_density(t: Tester, grid: Grid | None = None, **kw) -> Fraction:
    return is_tester(t, grid, **kw).measured_density


def failure_profile(t: Tester, grid: Grid | None = None, **kw) -> np.ndarray:
    """Boolean (pairs x size) table: entry is True when map i kills a pair (f, a) with f(a) != 0.

    Exhaustive only; used by the exhaustive tester search.
    """
    grid = grid or Grid(**kw)
    cls, K, family, d, n = _resolve(t, grid)
    _check_fields(t, K)
    S, T = t.source, t.target
    p = S.p
    basis = monomial_basis(family, n, d, cls.variable_degree_cap)
    nv = num_variables(family, n, d)
    vblocks = _var_blocks(t, family, n, d)
    n_points = S.order ** nv
    rows, exh = _coefficient_rows(K, len(basis), 10 ** 12, 0)
    C = _digit_matrix(K, rows)
    mats = {b: map_matrices(t, b) for b in set(vblocks)}
    out = []
    for A in _assignment_batches(S, nv, n_points, True, n_points, 0, 256):
        B = A.shape[0]
        G0 = _design_rows(S, K, _monomial_values(S, A, basis)).reshape(C.shape[1], -1).astype(np.float64)
        imgs = np.empty((B, t.size, nv), dtype=np.int64)
        for j in range(nv):
            dig = np.einsum("bs,ist->bit", S.digits_array(A[:, j]), mats[vblocks[j]]) % p
            imgs[:, :, j] = T.from_digits_array(dig)
        G1 = _design_rows(T, K, _monomial_values(T, imgs, basis)).reshape(C.shape[1], -1).astype(np.float64)
        fnz = (np.remainder(C @ G0, p).reshape(len(C), B, S.e) != 0).any(axis=2)
        van = (np.remainder(C @ G1, p).reshape(len(C), B, t.size, T.e) == 0).all(axis=3)
        out.append(van[fnz])
    return np.concatenate(out, axis=0) if out else np.zeros((0, t.size), dtype=bool)


# ---------------------------------------------------------------------------
# independent second implementation: (f outer, a inner, one map at a time)
# ---------------------------------------------------------------------------
def _eval_on_values(f: MultiPoly, vals: list):
    """f at values that are field codes (via field) or UniPolys (polynomial ring)."""
    if isinstance(vals[0], UniPoly):
        R = vals[0].field
        acc = UniPoly(R)
        for e, c in f.terms:
            term = UniPoly(R, [c])
            for v, k in zip(vals, e):
                for _ in range(k):
                    term = term * v
            acc = acc + term
        return acc
    raise TypeError


def is_tester_naive(t: Tester, grid: Grid | None = None, **kw) -> VerificationReport:
    grid = grid or Grid(**kw)
    cls, K, family, d, n = _resolve(t, grid)
    S = t.source
    basis = monomial_basis(family, n, d, cls.variable_degree_cap)
    nv = num_variables(family, n, d)
    vblocks = _var_blocks(t, family, n, d)
    rows, poly_exh = _coefficient_rows(K, len(basis), grid.poly_cap, grid.seed)
    n_points_all = S.order ** nv
    point_exh = n_points_all <= grid.point_cap
    if point_exh:
        points = list(itertools.product(range(S.order), repeat=nv))
    else:
        rng = np.random.default_rng(grid.seed + 1)
        points = [tuple(int(x) for x in r) for r in rng.integers(0, S.order, size=(grid.point_cap, nv))]
    tuples = [t.map_at(i) for i in range(t.size)]
    worst_num, witness, pairs = -1, None, 0
    for r in rows:  # polynomial outer loop
        f = _poly_from_row(family, n, d, K, basis, r)
        for a in points:
            fa = eval_poly(f, [FieldElement(S, x) for x in a])
            if not fa:
                continue
            pairs += 1
            failing = []
            for i, tup in enumerate(tuples):
                imgs = [tup[vblocks[j]].apply(a[j]) for j in range(nv)]
                if isinstance(t.target, Field):
                    v = eval_poly(f, [FieldElement(t.target, x) for x in imgs])
                    if not v:
                        failing.append(i)
                else:
                    if _eval_on_values(f, imgs).is_zero():
                        failing.append(i)
            if len(failing) > worst_num:
                worst_num = len(failing)
                witness = Witness(f, tuple(a), failing)
    worst = Fraction(max(worst_num, 0), t.size)
    exact = poly_exh and point_exh
    counts = {"polynomials": len(rows), "assignments": len(points), "nonzero_pairs": pairs,
              "poly_exhaustive": poly_exh, "point_exhaustive": point_exh}
    return VerificationReport(worst <= t.epsilon, worst, t.epsilon, exact,
                              witness if worst_num > 0 else None, counts, grid.seed, n, family,
                              ["naive path"])


# ---------------------------------------------------------------------------
# accelerated path for evaluation testers: count roots of F(X) = f(z_1, ..., z_n)
# ---------------------------------------------------------------------------
def evaluation_root_failure(t: Tester, grid: Grid | None = None, **kw) -> Fraction:
    """Worst failure of an evaluation tester by univariate root counting.

    With z_j the lift of a_j, map i kills (f, a) exactly when beta_i is a root
    of F = f(z_1, ..., z_n); the point at infinity kills it when the
    coefficient of X^(d(t-1)) vanishes (homogeneous classes).
    """
    grid = grid or Grid(**kw)
    node = t.node
    if not isinstance(node, EvaluationNode) or not isinstance(t.source, Field):
        raise TypeError("root counting needs an evaluation tester on a field")
    cls, K, family, d, n = _resolve(t, grid)
    if node.infinity and family == "P":
        raise TypeError("the point at infinity needs a homogeneous class")
    S = t.source
    T = S.base
    basis = monomial_basis(family, n, d, cls.variable_degree_cap)
    nv = num_variables(family, n, d)
    rows, _ = _coefficient_rows(K, len(basis), grid.poly_cap, grid.seed)
    top = d * (S.degree - 1)
    worst = -1
    for a in itertools.product(range(S.order), repeat=nv):
        z = [UniPoly(T, S.coeffs(x)) for x in a]
        # powers of each lifted coordinate, then each monomial as a polynomial
        monos = []
        for e in basis:
            m = UniPoly(T, [1])
            for zj, k in zip(z, e):
                for _ in range(k):
                    m = m * zj
            monos.append(m)
        for r in rows:
            fa = 0
            for e, c in zip(basis, r):
                if c:
                    term = int(c)
                    for x, k in zip(a, e):
                        if k:
                            term = S.mul(term, S.pow(x, k))
                    fa = S.add(fa, term)
            if fa == 0:
                continue
            F = UniPoly(T)
            for m, c in zip(monos, r):
                if c:
                    F = F + m.scale(int(c))
            roots = 0
            for beta in range(node.finite):
                acc = 0
                for c in reversed(F.coeffs):
                    acc = T.add(T.mul(acc, beta), c)
                roots += acc == 0
            if node.infinity and F.coeff(top) == 0:
                roots += 1
            worst = max(worst, roots)
    return Fraction(max(worst, 0), t.size)
