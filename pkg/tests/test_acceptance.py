"""Acceptance suite: ten criteria, one summary line each (see conftest.py).

The heavy exhaustive runs set their own evaluation budget; the default budget
would otherwise turn them into sampled runs.
"""
import itertools
import json
import math
import random
import time
from fractions import Fraction

import mpmath
import pytest
from sympy import ZZ
from sympy.polys.galoistools import gf_irreducible_p

from densetest import bounds, serialize
from densetest.cli import main
from densetest.constructions import (
    build,
    crt_reduction_tester,
    evaluation_tester,
    plan,
    t1_declared_epsilon,
    t1_pipeline,
)
from densetest.gf import FieldElement, canonical_field, extension_field, is_irreducible
from densetest.irreducibles import (
    count_irreducibles,
    count_no_zero_run,
    has_period_t,
    nth_irreducible,
    select_capacity,
    select_period_vector,
)
from densetest.tester import Chain, Dot, Lift, PolyClass, PolySpace, compose, explicit_tester, product
from densetest.verify import Grid, is_tester

criterion = pytest.mark.criterion

# every tester built below is collected here for the bound sweep
_BUILT = []


def _keep(t, note):
    _BUILT.append((t, note))
    return t


# ---------------------------------------------------------------------------
@criterion(1, "tight small-field tester (q=7, t=2, d=2, eps=1/2)")
def test_criterion_1(record_property):
    start = time.perf_counter()
    L, p = build(7, 2, 2, Fraction(1, 2))
    _keep(L, "c1")
    assert p.route == "DirectEval"
    assert L.size == 4 == math.ceil(Fraction(2, 1) / Fraction(1, 2))
    assert bounds.size_lower_bound(7, 2, 2, Fraction(1, 2)).value == 4
    rep = is_tester(L, Grid(n=2, exact=True, budget=2 * 10 ** 9))
    assert rep.exact
    assert rep.counts["polynomials"] == 7 ** 6 - 1
    assert rep.counts["assignments"] == 49 ** 2
    assert rep.worst_failure == Fraction(1, 2)
    elapsed = time.perf_counter() - start
    assert elapsed < 300
    record_property("detail", f"size {L.size}, worst failure {rep.worst_failure} (exact)")


# ---------------------------------------------------------------------------
@criterion(2, "infeasibility gates and the x^2+x witness over F_4 -> F_2")
def test_criterion_2(record_property):
    start = time.perf_counter()
    assert plan(2, 2, 3, Fraction(1, 2), "P").route == "Unconstructible"
    assert plan(2, 3, 3, Fraction(1, 2), "HP").route == "Unconstructible"
    S = canonical_field(4)
    F = S.base
    sp = PolySpace(F, 1)
    maps = [Chain.of(Lift(S), Dot(w, sp)) for w in itertools.product(range(2), repeat=2)]
    assert len(maps) == 4  # every F_2-linear map F_4 -> F_2, the zero map included
    # f = x^2 + x is nonzero at alpha but vanishes on every image in F_2
    alpha = 2
    assert S.add(S.mul(alpha, alpha), alpha) != 0
    for m in maps:
        v = m.apply(alpha)
        assert F.add(F.mul(v, v), v) == 0
    cls = PolyClass("P", 1, 2, F)
    families = 0
    for size in range(1, 9):
        for fam in itertools.combinations_with_replacement(range(4), size):
            L = explicit_tester(S, F, [(maps[i],) for i in fam], Fraction(size - 1, size), cls)
            rep = is_tester(L, Grid(n=1))
            assert rep.exact and not rep.verdict
            assert rep.worst_failure == 1
            families += 1
    assert time.perf_counter() - start < 60
    record_property("detail", f"{families} families rejected, witness x^2+x")


# ---------------------------------------------------------------------------
@criterion(3, "irreducible counts and nth_irreducible")
def test_criterion_3(record_property):
    start = time.perf_counter()
    for q in (2, 3, 5):
        for k in range(1, 7):
            brute = sum(1 for code in range(q ** k)
                        if gf_irreducible_p([1] + [(code // q ** j) % q for j in range(k)], q, ZZ))
            assert count_irreducibles(q, k) == brute
    times = []
    for q, t, count in ((2, 8, 4), (5, 4, 3)):
        seen = set()
        for m in range(count):
            s = time.perf_counter()
            rec = nth_irreducible(q, t, m)
            times.append(time.perf_counter() - s)
            f = rec.poly
            assert f.degree == t and f.is_monic() and is_irreducible(f)
            G = rec.root.field
            acc = 0
            for c in reversed(f.coeffs):
                acc = G.add(G.mul(acc, rec.root.code), c)
            assert acc == 0
            seen.add(f.coeffs)
        assert len(seen) == count
    assert time.perf_counter() - start < 120
    record_property("detail", f"max nth_irreducible call {max(times) * 1e3:.1f} ms")


# ---------------------------------------------------------------------------
@criterion(4, "select procedure and the no-zero-run recurrence")
def test_criterion_4(record_property):
    start = time.perf_counter()
    q, t, k = 2, 8, 4
    cap = select_capacity(q, t)
    assert cap == count_no_zero_run(q, k, t - k)
    got = [select_period_vector(q, t, m).entries for m in range(cap)]
    assert len(set(got)) == cap
    want = {(0,) * k + s for s in itertools.product(range(q), repeat=t - k)
            if not any(s[i:i + k] == (0,) * k for i in range(t - 2 * k + 1))}
    assert set(got) == want
    assert all(has_period_t(v) for v in got)
    for q in (2, 3):
        for k in range(1, 4):
            for n in range(0, 11):
                brute = sum(1 for v in itertools.product(range(q), repeat=n)
                            if not any(v[i:i + k] == (0,) * k for i in range(n - k + 1)))
                assert count_no_zero_run(q, k, n) == brute
    assert time.perf_counter() - start < 60
    record_property("detail", f"{cap} vectors, bijective")


# ---------------------------------------------------------------------------
@criterion(5, "CRT route (q=3, t=3, k=2, d=2, eps1=5/6) composed with F_9 -> F_3")
def test_criterion_5(record_property):
    start = time.perf_counter()
    F3 = canonical_field(3)
    outer = crt_reduction_tester(F3, 3, 2, 2, Fraction(5, 6))
    inner = evaluation_tester(F3, 2, 2, 3)
    C = _keep(compose(outer, inner), "c5")
    assert outer.size == 3
    assert C.size == 3 * inner.size
    rep = is_tester(C, Grid(n=2, exact=True, budget=10 ** 8))
    assert rep.exact and rep.counts["assignments"] == 27 ** 2
    assert rep.worst_failure <= C.epsilon
    assert time.perf_counter() - start < 600
    record_property("detail", f"size {C.size}, worst {rep.worst_failure} <= declared {C.epsilon}")


# ---------------------------------------------------------------------------
def _compose_pairs():
    out = []
    for q, d, r_in, r_out in ((3, 1, 5, 3), (3, 2, 9, 3), (5, 1, 4, 3), (4, 1, 16, 2), (2, 1, 3, 2)):
        F = canonical_field(q)
        a = evaluation_tester(extension_field(F, 2), 2, d, r_in)
        b = evaluation_tester(F, 2, d, r_out)
        out.append((a, b))
    return out


def _product_pairs():
    out = []
    for q, r1, r2, n in ((3, 2, 3, 2), (3, 3, 3, 2), (4, 3, 4, 1), (5, 2, 5, 1), (7, 4, 6, 1)):
        out.append((evaluation_tester(q, 2, 1, r1), evaluation_tester(q, 2, 1, r2), n))
    return out


@criterion(6, "composition and product laws on 10 pairs")
def test_criterion_6(record_property):
    start = time.perf_counter()
    checked = 0
    for a, b in _compose_pairs():
        C = _keep(compose(a, b), "c6 compose")
        bound = 1 - (1 - a.epsilon) * (1 - b.epsilon)
        assert C.epsilon == bound
        assert C.flags.symmetric == (a.flags.symmetric and b.flags.symmetric) == True  # noqa: E712
        rep = is_tester(C, Grid(n=1, exact=True, budget=10 ** 8))
        assert rep.worst_failure <= bound
        checked += 1
    for x, y, n in _product_pairs():
        P = _keep(product(x, y), "c6 product")
        bound = 1 - (1 - x.epsilon) * (1 - y.epsilon)
        assert P.epsilon == bound
        assert x.flags.symmetric and y.flags.symmetric and not P.flags.symmetric
        rep = is_tester(P, Grid(n=n, exact=True, budget=10 ** 8))
        assert rep.worst_failure <= bound
        checked += 1
    assert checked == 10
    assert time.perf_counter() - start < 600
    record_property("detail", "5 compositions and 5 products within their bounds")


# ---------------------------------------------------------------------------
@criterion(7, "small-q multilinear pipeline at q=2, d=2, t=2")
def test_criterion_7(record_property):
    start = time.perf_counter()
    T = _keep(t1_pipeline(2, 2, 2), "c7")
    vec = bounds.preset_eps_vector(2, 2)
    r = bounds.t1_levels(2, 2)
    product_formula = 1 - vec[-1]
    for i in range(r):
        Q = 2 ** (2 ** i)
        product_formula *= (1 - vec[i]) ** math.ceil(Fraction(2) / (vec[i] * (Q + 1)))
    assert T.epsilon == 1 - product_formula == t1_declared_epsilon(2, 2)
    assert T.source.order == 2 ** (2 ** r * 2)
    grid = Grid(n=2, point_cap=10 ** 5, seed=7, budget=10 ** 10,
                pclass=PolyClass("HLF", 2, 2, canonical_field(2)))
    rep = is_tester(T, grid)
    assert rep.counts["polynomials"] == 15
    assert rep.counts["assignments"] == 10 ** 5
    assert rep.worst_failure <= T.epsilon
    label = "exact" if rep.exact else "sampled"
    assert time.perf_counter() - start < 900
    record_property("detail", f"eps* = {T.epsilon}, worst {rep.worst_failure} ({label}, seed 7)")


# ---------------------------------------------------------------------------
@criterion(8, "constants and closed forms")
def test_criterion_8(record_property):
    start = time.perf_counter()
    table = {2: 1.659945821, 3: 1.116191294, 4: 0.867464571, 5: 0.719921672, 7: 0.548433289}
    for q, v in table.items():
        assert abs(float(bounds.cq_constant(q).value) - v) <= 1e-6
    assert bounds.tower_params(2, 2).genus == 1
    assert bounds.tower_params(2, 3).genus == 3
    assert bounds.tower_params(2, 3).places == 16
    assert bounds.tower_params(3, 3).places == 60
    for q in (2, 3, 5, 7):
        e, nu = bounds.eps_nu_of_m(q, 1)
        # m = 1: eps = q/(q+1) and nu = q+1
        assert e == Fraction(q, q + 1) and nu == q + 1
    assert abs(bounds.eps_nu_of_m(7, 2)[0] - mpmath.sqrt(mpmath.mpf(3) / 4)) < 1e-30
    assert time.perf_counter() - start < 1
    record_property("detail", "c_q table, tower parameters, eps(1) and nu(1)")


# ---------------------------------------------------------------------------
def _ensure_grid():
    if any(n == "c7" for _, n in _BUILT):
        return
    # run in isolation: rebuild the cheap part of the grid
    _keep(build(7, 2, 2, Fraction(1, 2))[0], "c1")
    F3 = canonical_field(3)
    _keep(compose(crt_reduction_tester(F3, 3, 2, 2, Fraction(5, 6)), evaluation_tester(F3, 2, 2, 3)), "c5")
    for a, b in _compose_pairs():
        _keep(compose(a, b), "c6 compose")
    for x, y, _ in _product_pairs():
        _keep(product(x, y), "c6 product")
    _keep(t1_pipeline(2, 2, 2), "c7")


@criterion(9, "bound consistency over every built tester")
def test_criterion_9(record_property):
    _ensure_grid()
    start = time.perf_counter()
    for L, note in _BUILT:
        q = L.target.order
        t = L.source.e // L.target.e
        fam = L.pclass.family
        d = L.pclass.d
        lb = bounds.size_lower_bound(q, d, t, L.epsilon, fam)
        assert L.size >= lb.value, note
        lim = bounds.density_limit(q, d, t, fam)
        assert lim.feasible and L.epsilon >= lim.value, note
    assert time.perf_counter() - start < 60
    record_property("detail", f"{len(_BUILT)} testers checked")


# ---------------------------------------------------------------------------
def _locality_tester(r_in, r_out):
    F = canonical_field(1009)
    return compose(evaluation_tester(extension_field(F, 2), 2, 1, r_in), evaluation_tester(F, 2, 1, r_out))


def _per_entry(L, reps=2000):
    rng = random.Random(5)
    S = L.source
    idx = [rng.randrange(L.size) for _ in range(reps)]
    xs = [rng.randrange(S.order) for _ in range(reps)]
    s = time.perf_counter()
    for i, x in zip(idx, xs):
        L.map_at(i)[0].apply(x)
    return (time.perf_counter() - s) / reps


@criterion(10, "local access: per-entry time at size 1e6 vs 1e3, entry bit-match")
def test_criterion_10(record_property, tmp_path, capsys):
    start = time.perf_counter()
    small = _keep(_locality_tester(20, 50), "c10 small")
    big = _keep(_locality_tester(1000, 1000), "c10 big")
    assert small.size == 10 ** 3 and big.size == 10 ** 6
    _per_entry(small, 200)  # warm caches
    ts, tb = _per_entry(small), _per_entry(big)
    assert tb <= 100 * ts
    # the CLI entry command against materialised indexing
    f = tmp_path / "small.json"
    serialize.save(small, f)
    mats = small.materialize()
    rng = random.Random(9)
    S = small.source
    for i in rng.sample(range(small.size), 25):
        coeffs = [rng.randrange(S.base.order) for _ in range(S.degree)]
        x = S.from_coeffs(coeffs)
        assert main(["entry", "--tester", str(f), "--index", str(i), "--element",
                     ",".join(map(str, coeffs))]) == 0
        got = json.loads(capsys.readouterr().out)["value"]["code"]
        assert got == mats[i][0].apply(x) == small.map_at(i)[0].apply(FieldElement(S, x).code)
    assert time.perf_counter() - start < 300
    record_property("detail", f"{ts * 1e6:.1f} us vs {tb * 1e6:.1f} us per entry")
