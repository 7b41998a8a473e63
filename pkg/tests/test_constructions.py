import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from densetest import bounds
from densetest.constructions import (
    build,
    crt_reduction_tester,
    direct_eval,
    evaluation_tester,
    execute,
    exhaustive_search_tester,
    plan,
    subfield_chain_tester,
    t1_declared_epsilon,
    t1_pipeline,
)
from densetest.errors import SearchExhausted, Unconstructible
from densetest.gf import canonical_field
from densetest.irreducibles import count_irreducibles
from densetest.tester import PolyClass, compose
from densetest.verify import Grid, is_tester


def test_evaluation_examples():
    L = evaluation_tester(5, 2, 2, 5)
    assert L.size == 5 and L.epsilon == Fraction(2, 5)
    L = evaluation_tester(7, 2, 2, 4)
    assert L.size == 4 and L.epsilon == Fraction(1, 2)
    assert L.size == bounds.size_lower_bound(7, 2, 2, Fraction(1, 2)).value
    with pytest.raises(Unconstructible) as exc:
        evaluation_tester(2, 2, 2, 2)
    assert exc.value.reason == "q_too_small"


def test_evaluation_range_checks():
    with pytest.raises(Unconstructible):
        evaluation_tester(7, 3, 2, 4)  # needs r >= 5
    with pytest.raises(Unconstructible):
        evaluation_tester(7, 2, 2, 8)  # r = q+1 needs a homogeneous class


def test_evaluation_flags():
    a = evaluation_tester(7, 2, 2, 7)
    assert a.flags.reducible and a.flags.symmetric
    b = evaluation_tester(7, 2, 2, 8, "HP")
    assert b.flags.symmetric and not b.flags.reducible


def test_direct_eval_relabels():
    L = direct_eval(7, 2, 2, Fraction(3, 5))
    assert L.size == 4 and L.epsilon == Fraction(3, 5)


def test_crt_example():
    L = crt_reduction_tester(3, 3, 2, 2, Fraction(5, 6))
    assert 2 * count_irreducibles(3, 2) == 6
    assert L.size == 3 and L.target.order == 9 and L.epsilon == Fraction(5, 6)
    assert L.node.sourcing == "first"
    assert all(m.apply(1) == 1 for i in range(L.size) for m in L.map_at(i))
    rep = is_tester(L, Grid(n=1))
    assert rep.exact and rep.verdict


def test_crt_insufficient():
    with pytest.raises(Unconstructible) as exc:
        crt_reduction_tester(2, 3, 2, 1, Fraction(3, 4))
    assert exc.value.reason == "insufficient_irreducibles"


@pytest.mark.parametrize("q,t,k,d,e1", [(3, 3, 2, 2, Fraction(5, 6)), (2, 5, 3, 1, Fraction(5, 6)),
                                         (5, 4, 2, 1, Fraction(1, 2)), (2, 9, 6, 1, Fraction(1, 2))])
def test_crt_size_formula(q, t, k, d, e1):
    L = crt_reduction_tester(q, t, k, d, e1)
    assert L.size == math.ceil(Fraction(d * t - d + 1) / (e1 * k))


def test_subfield_chain():
    C = subfield_chain_tester(3, 2, 2, 2, Fraction(2, 3), Fraction(2, 3))
    assert C.source.order == 81 and C.target.order == 3
    assert C.size == 9
    rep = is_tester(C, Grid(n=1))
    assert rep.exact
    assert 1 - rep.worst_failure >= Fraction(1, 3) * Fraction(1, 3)


def test_t1_small_instance():
    T = t1_pipeline(2, 2, 2)
    assert T.size == 3 * 5 * 17 * 6
    assert T.epsilon == t1_declared_epsilon(2, 2) == Fraction(763, 765)
    assert T.pclass.family == "HLF"
    assert T.source.order == 2 ** 16 and T.target.order == 2
    assert not T.flags.reducible


def test_t1_matches_constants():
    vec = bounds.preset_eps_vector(2, 2)
    c = bounds.c_pi_of_eps_vector(2, 2, vec)
    assert c.r == bounds.t1_levels(2, 2) == 3
    assert 1 - c.density == t1_declared_epsilon(2, 2)
    # per-level sizes are (Q_i + 1)^chunks, so log2 of their product is the size exponent
    T = t1_pipeline(2, 2, 2)
    final = T.size // math.prod((2 ** (2 ** i) + 1) ** m for i, m in enumerate(c.chunks))
    assert final == 6


def test_t1_rejects_large_q():
    with pytest.raises(Unconstructible):
        t1_pipeline(5, 2, 2)


def test_exhaustive_search_small():
    T = exhaustive_search_tester(2, 2, PolyClass("P", 1, 1), Fraction(1, 2), 2)
    assert T.size == 2
    assert is_tester(T, Grid(n=1)).verdict
    with pytest.raises(SearchExhausted):
        exhaustive_search_tester(3, 2, PolyClass("P", 1, 1), Fraction(1, 2), 1)


def test_exhaustive_search_below_trivial_bound():
    # d(t-1)/eps = 2 maps are needed over F_9 -> F_3 at eps = 1/2
    lb = bounds.size_lower_bound(3, 1, 2, Fraction(1, 2)).value
    with pytest.raises(SearchExhausted):
        exhaustive_search_tester(3, 2, PolyClass("P", 1, 1), Fraction(1, 2), int(lb) - 1)


@pytest.mark.parametrize("args,route,size", [
    ((7, 2, 2, Fraction(1, 2), "P"), "DirectEval", 4),
    ((5, 1, 4, Fraction(1, 2), "HP"), "DirectEval", 6),
    ((3, 2, 3, Fraction(17, 18), "P"), "CrtThenEval", 9),
    ((5, 2, 10, Fraction(1, 10), "P"), "Unconstructible", None),
    ((2, 2, 3, Fraction(1, 2), "P"), "Unconstructible", None),
    ((2, 3, 3, Fraction(1, 2), "HP"), "Unconstructible", None),
])
def test_plan_routes(args, route, size):
    p = plan(*args)
    assert p.route == route
    assert p.predicted_size == size


def test_plan_small_q_multilinear():
    eps = t1_declared_epsilon(2, 3)
    p = plan(2, 3, 4, eps, "HLF")
    assert p.route == "T1Pipeline" and p.constructive


def test_plan_formula_only_route():
    p = plan(4, 1, 8, Fraction(1, 2))
    assert p.route == "TowerFormulaOnly" and not p.constructive
    with pytest.raises(Unconstructible):
        execute(p)


def test_plan_json_has_citation():
    js = plan(7, 2, 2, Fraction(1, 2)).to_json()
    assert js["route"] == "DirectEval" and js["citation"]
    js = plan(2, 2, 3, Fraction(1, 2)).to_json()
    assert js["reason"] == "q_too_small"


@pytest.mark.parametrize("q,t,d,eps", [(7, 2, 2, Fraction(1, 2)), (5, 2, 1, Fraction(1, 3)),
                                       (3, 3, 2, Fraction(17, 18)), (4, 2, 2, Fraction(2, 3)),
                                       (3, 2, 1, Fraction(1, 3))])
def test_executed_plans_verify(q, t, d, eps):
    L, p = build(q, t, d, eps)
    assert L.size == p.predicted_size
    assert L.epsilon <= eps
    rep = is_tester(L, Grid(n=1))
    assert rep.exact and rep.verdict
    assert L.size >= bounds.size_lower_bound(q, d, t, L.epsilon).value


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([3, 4, 5, 7, 8, 9, 11]), st.integers(1, 4), st.integers(2, 6),
       st.fractions(Fraction(1, 10), Fraction(19, 20)))
def test_plans_respect_bounds(q, d, t, eps):
    p = plan(q, d, t, eps)
    if p.route in ("DirectEval", "CrtThenEval"):
        assert p.predicted_size >= bounds.size_lower_bound(q, d, t, eps).value
        lim = bounds.density_limit(q, d, t, "P")
        assert eps >= lim.value
    if p.route == "DirectEval":
        assert p.predicted_size == max(d * (t - 1) + 1, math.ceil(Fraction(d * (t - 1)) / eps))
    if d >= q:
        assert p.route == "Unconstructible"


def test_compose_of_built_pieces():
    F3 = canonical_field(3)
    outer = crt_reduction_tester(F3, 3, 2, 2, Fraction(5, 6))
    inner = evaluation_tester(F3, 2, 2, 3)
    C = compose(outer, inner)
    assert C.size == 3 * inner.size
    assert C.epsilon == 1 - (1 - Fraction(5, 6)) * (1 - inner.epsilon)
