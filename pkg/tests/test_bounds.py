import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from densetest import bounds
from densetest.errors import HypothesisViolated, InvalidEpsilon, InvalidEpsVector, OutOfRange

CQ_TABLE = {2: 1.659945821, 3: 1.116191294, 4: 0.867464571, 5: 0.719921672, 7: 0.548433289}


def test_size_lower_bound_p():
    rep = bounds.size_lower_bound(7, 2, 2, Fraction(1, 2), "P")
    assert rep.value == 4


def test_size_lower_bound_hlf_example():
    rep = bounds.size_lower_bound(2, 1, 3, Fraction(1, 2), "HLF")
    assert rep.value == 4
    assert rep.components["singleton"] == 4


def test_size_lower_bound_rejects_bad_eps():
    with pytest.raises(InvalidEpsilon):
        bounds.size_lower_bound(7, 2, 2, 0)
    with pytest.raises(InvalidEpsilon):
        bounds.size_lower_bound(7, 2, 2, 1)


@pytest.mark.parametrize("family", ["P", "HP", "HLF"])
def test_size_lower_bound_monotone_in_eps(family):
    grid = [Fraction(k, 20) for k in range(8, 20)]
    vals = [bounds.size_lower_bound(3, 2, 3, e, family).value for e in grid]
    vals = [v for v in vals if v is not None]
    assert all(a >= b for a, b in zip(vals, vals[1:]))


def test_density_limits():
    assert bounds.density_limit(2, 1, 2, "HLF").value == Fraction(1, 3)
    assert bounds.density_limit(3, 2, None, "P").value == Fraction(2, 3)
    assert not bounds.density_limit(2, 2, None, "P").feasible
    assert not bounds.density_limit(2, 3, None, "HP").feasible
    assert bounds.density_limit(2, 2, None, "HP").value == Fraction(2, 3)


@pytest.mark.parametrize("q,val", sorted(CQ_TABLE.items()))
def test_cq_table(q, val):
    rep = bounds.cq_constant(q)
    assert abs(float(rep.value) - val) < 1e-6
    # the tail bound brackets the table value
    assert float(rep.value) - 1e-9 <= val + 5e-10
    assert val <= float(rep.value + rep.components["tail_bound"]) + 5e-10


def test_cq_partial_sums_increase():
    prev = mpmath.mpf(0)
    for prec in (1e-2, 1e-4, 1e-8, 1e-12):
        v = bounds.cq_constant(2, prec).value
        assert v >= prev
        prev = v


def test_t1_levels():
    assert bounds.t1_levels(2, 2) == 3
    assert bounds.t1_levels(2, 3) == 3
    assert bounds.t1_levels(3, 4) == 2


def test_c_pi_single_term():
    c, pi = bounds.t1_sums(2, [Fraction(1, 3)])
    assert abs(c - mpmath.log(3, 2)) < 1e-30
    assert abs(pi - (-mpmath.log(mpmath.mpf(2) / 3, 2))) < 1e-30


def test_c_pi_density2_preset_tends_to_cq():
    # c_{q,eps} for the preset is a partial sum of c_q and converges to it
    for q in (2, 3):
        diffs = []
        for d in (2, 10, 60, 2000):
            consts = bounds.c_pi_of_eps_vector(q, d, bounds.preset_eps_vector(q, d))
            diffs.append(bounds.cq_constant(q).value - consts.c)
        assert all(x >= -1e-12 for x in diffs)
        assert diffs[-1] < diffs[0]


def test_t1_density_exact_product():
    vec = bounds.preset_eps_vector(2, 2)
    consts = bounds.c_pi_of_eps_vector(2, 2, vec)
    direct = (1 - vec[-1])
    for i, e in enumerate(vec[:-1]):
        Q = 2 ** (2 ** i)
        direct *= (1 - e) ** math.ceil(Fraction(2) / (e * (Q + 1)))
    assert consts.density == direct == Fraction(2, 765)


def test_eps_vector_validation():
    with pytest.raises(InvalidEpsVector):
        bounds.check_eps_vector(2, 2, [Fraction(1, 3)] * 4)  # eps_0 * 3 = 1 ok, eps_1 * 5 not integral
    with pytest.raises(InvalidEpsVector):
        bounds.check_eps_vector(2, 2, [Fraction(2, 3), Fraction(4, 5), Fraction(16, 17), Fraction(3, 4)])
    with pytest.raises(InvalidEpsVector):
        bounds.preset_eps_vector(2, 2, "nope")


def test_co1_preset_shape():
    vec = bounds.preset_eps_vector(3, 5, "co1:2")
    eps, etas = bounds.check_eps_vector(3, 5, vec)
    assert eps[0] == Fraction(2, 4)
    assert eps[-1] == Fraction(1, 3)


def test_eps_nu_of_m():
    assert bounds.eps_nu_of_m(3, 1) == (Fraction(3, 4), Fraction(4))
    e, nu = bounds.eps_nu_of_m(7, 2)
    assert abs(e - mpmath.sqrt(mpmath.mpf(3) / 4)) < 1e-30
    assert abs(nu - mpmath.sqrt(8)) < 1e-30
    with pytest.raises(OutOfRange):
        bounds.eps_nu_of_m(3, 4)


@pytest.mark.parametrize("q", [2, 3, 5, 7])
def test_eps_nu_decreasing(q):
    vals = [tuple(mpmath.mpf(x.numerator) / x.denominator if isinstance(x, Fraction) else x
                  for x in bounds.eps_nu_of_m(q, m)) for m in range(1, q + 1)]
    for (e1, n1), (e2, n2) in zip(vals, vals[1:]):
        assert e2 < e1 and n2 < n1


def test_tower_params():
    assert bounds.tower_params(2, 2).genus == 1
    tp = bounds.tower_params(2, 3)
    assert (tp.genus, tp.places) == (3, 16)
    assert bounds.tower_params(3, 3).places == 60
    assert not bounds.tower_params(2, 2).places_exact


def test_tower_estimates():
    rep = bounds.tower_tester_size_estimate(17, 1, 8, Fraction(1, 2), "cubic")
    assert rep.value == 120 * 8 * 8
    with pytest.raises(HypothesisViolated):
        bounds.tower_tester_size_estimate(10, 1, 8, Fraction(1, 2), "linear-sq")
    # q=2, k=3: g=3 and N=16; t must reach 3 + 2 log_2(7), so t=9
    rep = bounds.tower_tester_size_estimate(2, 1, 9, Fraction(11, 16), "genus", g=3, N=16)
    assert rep.value == 16
    assert rep.components["epsilon_at_s"] == Fraction(11, 16)
    with pytest.raises(HypothesisViolated):
        bounds.tower_tester_size_estimate(2, 1, 6, Fraction(1, 2), "genus", g=3, N=16)
    tp = bounds.tower_params(2, 2)
    with pytest.raises(HypothesisViolated):
        bounds.tower_tester_size_estimate(2, 1, 5, Fraction(1, 2), "genus", g=tp.genus, N=tp.places)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from([2, 3, 4]), st.integers(2, 4), st.integers(1, 3), st.integers(1, 12))
def test_genus_validity_matches_places_condition(q, k, d, t):
    tp = bounds.tower_params(q, k)
    ok = tp.places > d * (t + tp.genus - 1)
    try:
        bounds.tower_tester_size_estimate(q, d, t, Fraction(99, 100), "genus", g=tp.genus, N=tp.places)
        fine = True
    except HypothesisViolated as exc:
        fine = False
        if ok:
            # only the other hypotheses may fail when N is large enough
            assert exc.condition != "N > d(t+g-1)"
    if fine:
        assert ok
