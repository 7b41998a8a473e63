"""Concrete tester builders and the route planner.

Every builder returns an intensional `Tester`; nothing is materialised.
"""
from __future__ import annotations

import dataclasses
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import bounds
from .errors import (
    ClassMismatch,
    Exhausted,
    HypothesisViolated,
    InvalidEpsVector,
    LevelMismatch,
    SearchExhausted,
    Unconstructible,
)
from .gf import Field, canonical_field, extension_field
from .irreducibles import count_irreducibles, irreducible_roots
from .tester import (
    Chain,
    CrtNode,
    Dot,
    EvaluationNode,
    Flags,
    Lift,
    PolyClass,
    PolySpace,
    Tester,
    compose,
    explicit_tester,
    product_all,
    weaken,
)

ROUTES = ("DirectEval", "CrtThenEval", "SubfieldChain", "T1Pipeline", "ExhaustiveSearch",
          "TowerFormulaOnly", "Unconstructible")

CITE_P = "no tester for P when d >= q (take f = prod (x - b) over all b in F_q)"
CITE_HP = "no tester for HP when d >= q+1"
CITE_EPS_P = "eps >= d/q for P"
CITE_EPS_HP = "eps >= d/(q+1) for HP"


def _base(q) -> Field:
    return q if isinstance(q, Field) else canonical_field(int(q))


def _cdiv(a: Fraction, b: Fraction) -> int:
    return math.ceil(Fraction(a) / Fraction(b))


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------
def evaluation_tester(base, t: int, d: int, r: int, family: str = "P", n: int | None = None) -> Tester:
    """F_{q^t} -> F_q: lift, then evaluate at the first r elements of F_q (and l_inf when r = q+1)."""
    F = _base(base)
    q = F.order
    if family not in ("P", "HP", "HLF"):
        raise ValueError(f"unknown family {family!r}")
    if t < 2:
        raise Unconstructible("r_out_of_range", "need t >= 2")
    if family == "P" and d >= q:
        raise Unconstructible("q_too_small", f"d={d} >= q={q}", CITE_P)
    top = q if family == "P" else q + 1
    if not d * (t - 1) + 1 <= r <= top:
        raise Unconstructible("r_out_of_range", f"need {d * (t - 1) + 1} <= r <= {top}, got r={r}")
    S = extension_field(F, t)
    finite = min(r, q)
    node = EvaluationNode(S, finite, r > q)
    flags = Flags(componentwise=True, linear=True, reducible=r <= q, symmetric=True)
    cls = PolyClass(family, n, d, F)
    return Tester(S, F, 1, r, Fraction(d * (t - 1), r), cls, flags, node)


def direct_eval(q, t: int, d: int, epsilon, family: str = "P", n: int | None = None) -> Tester:
    """Smallest evaluation tester with failure <= epsilon, relabelled to epsilon."""
    F = _base(q)
    e = Fraction(epsilon)
    r = max(d * (t - 1) + 1, _cdiv(d * (t - 1), e)) if e > 0 else d * (t - 1) + 1
    t_ = evaluation_tester(F, t, d, r, family, n)
    return weaken(t_, e) if e > t_.epsilon else t_


def crt_reduction_tester(q, t: int, k: int, d: int, eps1, family: str = "P", n: int | None = None) -> Tester:
    """F_{q^t} -> F_{q^k}: lift, then evaluate at a root of each of s' distinct degree-k irreducibles."""
    F = _base(q)
    e1 = Fraction(eps1)
    if not 0 < e1 < 1:
        raise Unconstructible("insufficient_irreducibles", f"eps1={e1} outside (0, 1)")
    need = Fraction(d * t - d + 1) / e1
    if k * count_irreducibles(F.order, k) < need:
        raise Unconstructible(
            "insufficient_irreducibles",
            f"k N_q(k) = {k * count_irreducibles(F.order, k)} < (dt-d+1)/eps1 = {need}",
            "k N_q(k) >= (dt-d+1)/eps1",
        )
    size = _cdiv(need, k)
    S = extension_field(F, t)
    T = extension_field(F, k)
    try:
        recs, sourcing = irreducible_roots(F, k, size)
    except Exhausted as exc:
        raise Unconstructible("insufficient_irreducibles", str(exc)) from exc
    roots = () if sourcing == "nth" else tuple(r.root.code for r in recs)
    node = CrtNode(S, T, size, sourcing, roots)
    cls = PolyClass(family, n, d, F)
    return Tester(S, T, 1, size, e1, cls, Flags(), node)


def subfield_chain_tester(q, m1: int, m2: int, d: int, eps1, eps2, inner: Tester | None = None,
                          family: str = "P") -> Tester:
    """inner: F_{q^{m1 m2}} -> F_{q^{m1}}, then an evaluation tester F_{q^{m1}} -> F_q."""
    F = _base(q)
    mid = extension_field(F, m1)
    if inner is None:
        inner = direct_eval(mid, m2, d, eps2, family)
    if inner.target != mid:
        raise LevelMismatch("inner tester must land in F_{q^m1}")
    if inner.epsilon > Fraction(eps2):
        raise ClassMismatch(f"inner failure {inner.epsilon} exceeds eps2={eps2}")
    outer = direct_eval(F, m1, d, eps1, family)
    inner = weaken(inner, Fraction(eps2), outer.pclass.with_field(F))
    return compose(inner, outer)


def t1_pipeline(q, d: int, t: int, eps_vector: Sequence | str = "density2",
                final_step: str = "auto") -> Tester:
    """HLF tester F_{q^{2^r t}} -> F_q for small q.

    Level i (F_{q^{2^{i+1}}} -> F_{q^{2^i}}) is a product of ceil(d/eta_i) homogeneous
    evaluation testers with r = Q_i + 1, one per group of variable blocks.  The top
    step F_{(q^{2^r})^t} -> F_{q^{2^r}} is an evaluation tester (or exhaustive search).
    """
    F = _base(q)
    qq = F.order
    if qq >= d + 1:
        raise Unconstructible("eps_vector_invalid", f"q={qq} >= d+1 is outside this regime")
    if isinstance(eps_vector, str):
        eps_vector = bounds.preset_eps_vector(qq, d, eps_vector)
    try:
        eps, etas = bounds.check_eps_vector(qq, d, eps_vector)
    except InvalidEpsVector as exc:
        raise Unconstructible("eps_vector_invalid", str(exc)) from exc
    r = len(etas)
    tower = [F]
    for _ in range(r):
        tower.append(extension_field(tower[-1], 2))
    # top step
    top_base = tower[r]
    Qr = top_base.order
    er = eps[-1]
    mode = final_step
    if mode == "auto":
        mode = "eval" if t >= 2 and Qr >= Fraction(d * (t - 1)) / er else "exhaustive"
    if t < 2:
        raise Unconstructible("final_step_infeasible", "need t >= 2")
    if mode == "eval":
        if Qr < Fraction(d * (t - 1)) / er or d >= Qr:
            raise Unconstructible("final_step_infeasible", f"q^(2^r)={Qr} < d(t-1)/eps_r")
        top = direct_eval(top_base, t, d, er, "HLF")
    elif mode == "exhaustive":
        target = _cdiv(d * (t - 1), er) + 1
        top = exhaustive_search_tester(top_base, t, PolyClass("HLF", 1, d, top_base), er, target)
    else:
        raise ValueError(f"unknown final step {final_step!r}")
    cls = PolyClass("HLF", None, d, F)
    out = weaken(top, er, cls.with_field(top_base))
    for i in reversed(range(r)):
        Qi = tower[i].order
        eta = etas[i]
        degs = [eta] * (d // eta) + ([d % eta] if d % eta else [])
        parts = [weaken(evaluation_tester(tower[i], 2, dj, Qi + 1, "HP"), eps[i],
                        PolyClass("HLF", None, dj, tower[i])) for dj in degs]
        level = product_all(parts) if len(parts) > 1 else parts[0]
        out = compose(out, level)
    return dataclasses.replace(out, pclass=cls) if out.pclass != cls else out


def t1_declared_epsilon(q: int, d: int, eps_vector: Sequence | str = "density2") -> Fraction:
    """1 - (1-eps_r) prod (1-eps_i)^ceil(d/eta_i), evaluated independently of any build."""
    if isinstance(eps_vector, str):
        eps_vector = bounds.preset_eps_vector(q, d, eps_vector)
    return bounds.c_pi_of_eps_vector(q, d, eps_vector).epsilon


def linear_functionals(S: Field) -> list:
    """All nonzero F-linear maps S -> S.base as Lift then Dot(w), in code order of w."""
    F = S.base
    sp = PolySpace(F, S.degree - 1)
    out = []
    for code in range(1, F.order ** S.degree):
        w, c = [], code
        for _ in range(S.degree):
            c, x = divmod(c, F.order)
            w.append(x)
        out.append(Chain.of(Lift(S), Dot(tuple(w), sp)))
    return out


def exhaustive_search_tester(level_ext, t: int, pclass: PolyClass, epsilon, size_target: int,
                             search_budget: int = 10 ** 6, n: int | None = None) -> Tester:
    """Lexicographically first family of size_target linear maps F_{q^t} -> F_q passing verification.

    level_ext is the base field F_q; candidates are the nonzero linear functionals in
    code order and families are tried as combinations in lexicographic order.
    """
    from .verify import Grid, failure_profile

    F = _base(level_ext)
    S = extension_field(F, t)
    e = Fraction(epsilon)
    cands = linear_functionals(S)
    if size_target > len(cands):
        raise SearchExhausted(f"only {len(cands)} nonzero linear maps exist")
    allow = math.floor(e * size_target)
    cls = pclass if pclass.field is not None else pclass.with_field(F)
    everything = explicit_tester(S, F, [(m,) for m in cands], Fraction(0), cls)
    prof = failure_profile(everything, Grid(n=n or cls.n or 1)).astype(np.int16)
    tried = 0
    for combo in itertools.combinations(range(len(cands)), size_target):
        tried += 1
        if tried > search_budget:
            raise SearchExhausted(f"search budget {search_budget} exhausted")
        if prof.shape[0] == 0 or int(prof[:, combo].sum(axis=1).max()) <= allow:
            return explicit_tester(S, F, [(cands[i],) for i in combo], e, cls)
    raise SearchExhausted(f"no family of {size_target} maps has failure <= {e}")


# ---------------------------------------------------------------------------
# planner
# ---------------------------------------------------------------------------
@dataclass
class ConstructionPlan:
    route: str
    predicted_size: object  # int, Fraction or mpf for formula-only routes
    epsilon_split: list
    constructive: bool
    citation: str
    params: dict = field(default_factory=dict)
    reason: str = ""
    notes: list = field(default_factory=list)
    inner: "ConstructionPlan | None" = None

    def to_json(self) -> dict:
        from .bounds import _jsonable

        return {
            "route": self.route,
            "predicted_size": _jsonable(self.predicted_size),
            "epsilon_split": [_jsonable(e) for e in self.epsilon_split],
            "constructive": self.constructive,
            "citation": self.citation,
            "params": {k: _jsonable(v) for k, v in self.params.items()},
            "reason": self.reason,
            "notes": list(self.notes),
            "inner": self.inner.to_json() if self.inner else None,
        }


def _unconstructible(reason: str, citation: str, **params) -> ConstructionPlan:
    return ConstructionPlan("Unconstructible", None, [], False, citation, params, reason)


def _eval_plan(q: int, d: int, t: int, e: Fraction, family: str) -> ConstructionPlan | None:
    top = q if family == "P" else q + 1
    if t < 2 or e <= 0:
        return None
    r = max(d * (t - 1) + 1, _cdiv(d * (t - 1), e))
    if r > top:
        return None
    return ConstructionPlan("DirectEval", r, [e], True,
                            "evaluation at r points: size ceil(d(t-1)/eps) when eps >= d(t-1)/q",
                            {"q": q, "d": d, "t": t, "r": r, "family": family})


def _splits(q: int, d: int, k: int, e: Fraction, family: str):
    """The additive split from the proofs first, then the exact multiplicative one."""
    e2min = Fraction(d * (k - 1), q if family == "P" else q + 1)
    if e >= 2 * e2min:
        yield e / 2, e / 2, "additive"
    else:
        yield e - e2min, e2min, "additive"
    if e2min < 1:
        # (1 - e1)(1 - e2) = 1 - e exactly: a larger e1 for the same e2
        yield 1 - (1 - e) / (1 - e2min), e2min, "multiplicative"


def _inner_plan(q, d, k, e2, family, depth) -> ConstructionPlan | None:
    p = _eval_plan(q, d, k, e2, family)
    if p is None and depth < 2:
        p = _crt_plan(q, d, k, e2, family, depth + 1)
    return p


def _crt_plan(q: int, d: int, t: int, e: Fraction, family: str, depth: int = 1,
              kmax: int = 16) -> ConstructionPlan | None:
    best = None
    for k in range(2, min(t, kmax + 1)):
        for e1, e2, how in _splits(q, d, k, e, family):
            if e1 <= 0 or e2 <= 0:
                continue
            if k * count_irreducibles(q, k) < Fraction(d * t - d + 1) / e1:
                continue
            inner = _inner_plan(q, d, k, e2, family, depth)
            if inner is not None:
                break
        else:
            continue
        s1 = _cdiv(Fraction(d * t - d + 1) / e1, k)
        size = s1 * inner.predicted_size
        cand = ConstructionPlan(
            "CrtThenEval", size, [e1, e2], True,
            "CRT reduction to F_{q^k} (size ceil((dt-d+1)/(eps1 k))) composed with a tester over F_{q^k}",
            {"q": q, "d": d, "t": t, "k": k, "crt_size": s1, "family": family, "epsilon": e,
             "split": how}, inner=inner)
        if best is None or (size, -e1) < (best.predicted_size, -best.epsilon_split[0]):
            best = cand
    return best


def _tower_plan(q, d, t, e) -> ConstructionPlan | None:
    best = None
    for route in bounds.TOWER_ROUTES:
        try:
            rep = bounds.tower_tester_size_estimate(q, d, t, e, route)
        except (HypothesisViolated, ValueError, KeyError):
            continue
        if best is None or rep.value < best.predicted_size:
            best = ConstructionPlan("TowerFormulaOnly", rep.value, [e], False, rep.citation,
                                    {"q": q, "d": d, "t": t, "tower_route": route},
                                    notes=["formula only: function-field towers are not built"])
    return best


def plan(q: int, d: int, t: int, epsilon, family: str = "P",
         eps_vector: Sequence | str | None = None) -> ConstructionPlan:
    """Pick a route.  Infeasibility is reported as the 'Unconstructible' verdict."""
    e = Fraction(epsilon)
    inputs = {"q": q, "d": d, "t": t, "epsilon": e, "family": family}
    if not 0 <= e < 1:
        return _unconstructible("epsilon_out_of_range", "eps must lie in [0, 1)", **inputs)
    if family == "P" and d >= q:
        return _unconstructible("q_too_small", CITE_P, **inputs)
    if family == "HP" and d >= q + 1:
        return _unconstructible("q_too_small", CITE_HP, **inputs)
    if family == "HLF" and q < d + 1:
        return _t1_plan(q, d, t, e, eps_vector, inputs)
    lim = bounds.density_limit(q, d, t, family)
    if lim.feasible and e < lim.value:
        cite = {"P": CITE_EPS_P, "HP": CITE_EPS_HP}.get(family, lim.citation)
        return _unconstructible("epsilon_below_density_limit", cite, **inputs)
    fam = "P" if family == "HLF" else family
    p = _eval_plan(q, d, t, e, fam) or _crt_plan(q, d, t, e, fam) or _tower_plan(q, d, t, e)
    if p is None:
        return _unconstructible("no_route", "no implemented route reaches these parameters", **inputs)
    p.params.setdefault("family", family)
    p.params["family"] = family
    if family == "HLF":
        p.notes.append("multilinear class served by a P-class tester")
    return p


def _t1_plan(q, d, t, e, eps_vector, inputs) -> ConstructionPlan:
    names = [eps_vector] if eps_vector is not None else ["density2"] + [f"co1:{m}" for m in range(1, q + 1)]
    best = None
    for ev in names:
        try:
            vec = bounds.preset_eps_vector(q, d, ev) if isinstance(ev, str) else list(ev)
            consts = bounds.c_pi_of_eps_vector(q, d, vec)
        except InvalidEpsVector:
            continue
        if consts.epsilon > e:
            continue
        Qr = q ** (2 ** consts.r)
        final = max(d * (t - 1) + 1, _cdiv(d * (t - 1), vec[-1])) if t >= 2 else 1
        size = final
        for i, m in enumerate(consts.chunks):
            size *= (q ** (2 ** i) + 1) ** m
        cand = ConstructionPlan(
            "T1Pipeline", size, [Fraction(x) for x in vec], True,
            "tower F_q < F_{q^2} < ... < F_{q^(2^r)} of homogeneous evaluation testers, products per level",
            {**inputs, "r": consts.r, "declared_epsilon": consts.epsilon, "preset": ev if isinstance(ev, str) else None,
             "final_step": "eval" if t >= 2 and Qr >= Fraction(d * (t - 1)) / vec[-1] else "exhaustive"})
        if best is None or size < best.predicted_size:
            best = cand
    if best is None:
        return _unconstructible("target_below_t1_density",
                                "no eps-vector reaches the requested eps in this regime", **inputs)
    return best


def execute(p: ConstructionPlan, n: int | None = None) -> Tester:
    """Build the tester a plan describes, relabelled to the requested epsilon."""
    prm = p.params
    if not p.constructive:
        if p.route == "Unconstructible":
            raise Unconstructible(p.reason, "", p.citation)
        raise Unconstructible("formula_only", "route has no constructive implementation", p.citation)
    q, d, t = prm["q"], prm["d"], prm["t"]
    family = prm.get("family", "P")
    fam = "P" if family == "HLF" else family
    F = canonical_field(q)
    if p.route == "DirectEval":
        out = evaluation_tester(F, t, d, prm["r"], fam, n)
        return weaken(out, p.epsilon_split[0]) if p.epsilon_split[0] > out.epsilon else out
    if p.route == "CrtThenEval":
        e1, e2 = p.epsilon_split
        outer = crt_reduction_tester(F, t, prm["k"], d, e1, fam, n)
        inner_plan = dataclasses.replace(p.inner, params={**p.inner.params, "q": q, "family": fam})
        inner = execute(inner_plan, n)
        inner = _rebase(inner, outer.target)
        out = compose(outer, inner)
        want = max(Fraction(prm.get("epsilon", e1 + e2)), out.epsilon)
        return weaken(out, want) if want > out.epsilon else out
    if p.route == "T1Pipeline":
        return t1_pipeline(F, d, t, p.epsilon_split, prm.get("final_step", "auto"))
    raise Unconstructible("route_not_executable", p.route)


def _rebase(t: Tester, target_source: Field) -> Tester:
    if t.source != target_source:
        raise LevelMismatch(f"inner tester source {t.source.key} != {target_source.key}")
    return t


def build(q: int, t: int, d: int, epsilon, family: str = "P", route: str = "auto",
          n: int | None = None, eps_vector=None) -> tuple[Tester, ConstructionPlan]:
    e = Fraction(epsilon)
    if route == "auto":
        p = plan(q, d, t, e, family, eps_vector)
    elif route == "eval":
        p = _eval_plan(q, d, t, e, "P" if family == "HLF" else family)
        if p is None:
            raise Unconstructible("r_out_of_range", "eps < d(t-1)/q: evaluation alone cannot reach it")
        p.params["family"] = family
    elif route == "crt":
        p = _crt_plan(q, d, t, e, "P" if family == "HLF" else family)
        if p is None:
            raise Unconstructible("insufficient_irreducibles", "no CRT split reaches these parameters")
        p.params["family"] = family
    elif route == "t1":
        p = _t1_plan(q, d, t, e, eps_vector, {"q": q, "d": d, "t": t, "epsilon": e, "family": "HLF"})
    else:
        raise ValueError(f"unknown route {route!r}")
    return execute(p, n), p
