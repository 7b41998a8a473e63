"""Closed-form size lower bounds, density limits, constants and tower parameters.

Rational quantities are exact Fractions.  Series and fractional powers use
mpmath at 40 significant digits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Sequence

import mpmath

from .errors import HypothesisViolated, InvalidEpsilon, InvalidEpsVector, OutOfRange

mpmath.mp.dps = 40


@dataclass
class BoundReport:
    kind: str
    value: Any  # Fraction, mpmath.mpf, or None when infeasible / unbounded
    citation: str
    inputs: dict
    feasible: bool = True
    components: dict = field(default_factory=dict)
    dominant: str | None = None
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "value": _jsonable(self.value),
            "feasible": self.feasible,
            "citation": self.citation,
            "inputs": {k: _jsonable(v) for k, v in self.inputs.items()},
            "components": {k: _jsonable(v) for k, v in self.components.items()},
            "dominant": self.dominant,
            "notes": list(self.notes),
        }


def _jsonable(v):
    if isinstance(v, Fraction):
        return {"num": v.numerator, "den": v.denominator, "float": float(v)}
    if isinstance(v, mpmath.mpf):
        return {"decimal": mpmath.nstr(v, 20)}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _eps(epsilon) -> Fraction:
    e = Fraction(epsilon)
    if not 0 < e < 1:
        raise InvalidEpsilon(f"epsilon must lie in (0, 1), got {e}")
    return e


def hlf_y(q: int, t: int) -> Fraction:
    """1 - 1/q + (q-1)/(q(q^t - 1)): the per-block non-vanishing ceiling."""
    return 1 - Fraction(1, q) + Fraction(q - 1, q * (q ** t - 1))


def hlf_x(q: int, t: int) -> Fraction:
    return 1 + Fraction(1, q - 1) - Fraction(1, (q - 1) * q ** (t - 1))


def size_lower_bound(q: int, d: int, t: int, epsilon, family: str = "P") -> BoundReport:
    e = _eps(epsilon)
    inputs = {"q": q, "d": d, "t": t, "epsilon": e, "family": family}
    if family in ("P", "HP"):
        v = Fraction(d * (t - 1)) / e
        return BoundReport("size_lower_bound", v, "size >= d(t-1)/eps", inputs, dominant="trivial")
    if family != "HLF":
        raise ValueError(f"unknown family {family!r}")
    # trivial bound (nu0 - 1)/eps with nu0 >= X^(d-1) t for multilinear forms
    triv = (hlf_x(q, t) ** (d - 1) * t - 1) / e
    den = hlf_y(q, t) ** (d - 1) - (1 - e)
    comps = {"trivial": triv}
    if den > 0:
        lb22 = Fraction(t - 1) / den
        comps["singleton"] = lb22
        value = max(triv, lb22)
        dom = "singleton" if lb22 >= triv else "trivial"
        return BoundReport(
            "size_lower_bound", value,
            "size >= max((X^(d-1) t - 1)/eps, (t-1)/(Y^(d-1) - (1-eps)))",
            inputs, components=comps, dominant=dom,
        )
    comps["singleton"] = None
    return BoundReport(
        "size_lower_bound", None, "Y^(d-1) <= 1-eps: no tester of any size", inputs,
        feasible=False, components=comps, dominant="singleton",
    )


def density_limit(q: int, d: int, t: int | None = None, family: str = "P") -> BoundReport:
    """Smallest feasible failure bound eps for the class."""
    inputs = {"q": q, "d": d, "t": t, "family": family}
    if family == "P":
        if d >= q:
            return BoundReport("density_limit", None, "d >= q: no tester exists for P", inputs, feasible=False)
        v = Fraction(d, q)
        cite = "eps >= d/q"
    elif family == "HP":
        if d >= q + 1:
            return BoundReport("density_limit", None, "d >= q+1: no tester exists for HP", inputs, feasible=False)
        v = Fraction(d, q + 1)
        cite = "eps >= d/(q+1)"
    elif family == "HLF":
        if t is None:
            raise ValueError("HLF density limit needs t")
        v = 1 - hlf_y(q, t) ** d
        cite = "eps >= 1 - (1 - 1/q + (q-1)/(q(q^t-1)))^d"
    else:
        raise ValueError(f"unknown family {family!r}")
    rep = BoundReport("density_limit", v, cite, inputs)
    if family != "HLF" and t is not None:
        # multilinear forms sit inside every class, so their limit applies too
        hl = 1 - hlf_y(q, t) ** d
        rep.components = {"class": v, "multilinear": hl}
        if hl > v:
            rep.value, rep.dominant = hl, "multilinear"
    return rep


# ---------------------------------------------------------------------------
# constants
# ---------------------------------------------------------------------------
def _log2(x) -> mpmath.mpf:
    return mpmath.log(mpmath.mpf(x), 2)


def cq_constant(q: int, precision: float = 1e-9) -> BoundReport:
    """sum_i log2(q^(2^i)+1)/q^(2^i), stopped once 2*(next term) < precision."""
    if q < 2:
        raise ValueError("q >= 2")
    total = mpmath.mpf(0)
    partial = []
    i = 0
    while True:
        Q = q ** (2 ** i)
        total += _log2(Q + 1) / Q
        partial.append(+total)
        Qn = Q * Q
        nxt = _log2(Qn + 1) / Qn
        # once Q > 4 consecutive terms shrink by a factor below 1/2
        if Qn > 4 and 2 * nxt < precision:
            tail = 2 * nxt
            break
        i += 1
    rep = BoundReport(
        "cq", total, "c_q = sum_i log2(q^(2^i)+1)/q^(2^i)",
        {"q": q, "precision": precision},
    )
    rep.components = {"tail_bound": tail, "terms": len(partial)}
    rep.notes.append("true value lies in [value, value + tail_bound]")
    return rep


@dataclass
class T1Constants:
    r: int
    c: mpmath.mpf
    pi: mpmath.mpf
    density: Fraction  # exact product (1-eps_r) prod (1-eps_i)^ceil(d/eta_i)
    chunks: list[int]
    size_exponent: mpmath.mpf
    size_note: str = "size <= Theta(d^5) * 2^(c*d) * t (constant not fixed)"

    @property
    def epsilon(self) -> Fraction:
        return 1 - self.density


def t1_levels(q: int, d: int) -> int:
    """Least r with q^(2^r) >= 9d (so that q^(2^(r-1)) < 9d <= q^(2^r))."""
    r = 0
    while q ** (2 ** r) < 9 * d:
        r += 1
    return r


def check_eps_vector(q: int, d: int, eps_vector: Sequence) -> tuple[list[Fraction], list[int]]:
    eps = [Fraction(e) for e in eps_vector]
    r = t1_levels(q, d)
    if len(eps) != r + 1:
        raise InvalidEpsVector(f"need {r + 1} entries (r={r}), got {len(eps)}")
    etas = []
    for i, e in enumerate(eps[:-1]):
        Q = q ** (2 ** i)
        eta = e * (Q + 1)
        if eta.denominator != 1 or not 1 <= eta <= Q:
            raise InvalidEpsVector(f"eps_{i}*(q^(2^{i})+1) must be an integer in 1..{Q}, got {eta}")
        etas.append(int(eta))
    if not Fraction(1, 3) <= eps[-1] <= Fraction(2, 3):
        raise InvalidEpsVector(f"eps_r must lie in [1/3, 2/3], got {eps[-1]}")
    return eps, etas


def t1_sums(q: int, level_eps: Sequence) -> tuple[mpmath.mpf, mpmath.mpf]:
    """c = sum log2(Q_i+1)/eta_i and pi = sum -log2(1-eps_i)/eta_i over the given levels."""
    c = mpmath.mpf(0)
    pi = mpmath.mpf(0)
    for i, e in enumerate(level_eps):
        e = Fraction(e)
        Q = q ** (2 ** i)
        eta = e * (Q + 1)
        c += _log2(Q + 1) / mpmath.mpf(eta.numerator) * eta.denominator
        pi += -_log2(1 - mpmath.mpf(e.numerator) / e.denominator) / mpmath.mpf(eta.numerator) * eta.denominator
    return c, pi


def c_pi_of_eps_vector(q: int, d: int, eps_vector: Sequence) -> T1Constants:
    eps, etas = check_eps_vector(q, d, eps_vector)
    r = len(etas)
    c, pi = t1_sums(q, eps[:-1])
    dens = 1 - eps[-1]
    chunks = []
    size_exp = mpmath.mpf(0)
    for i, (e, eta) in enumerate(zip(eps, etas)):
        Q = q ** (2 ** i)
        m = -(-d // eta)
        chunks.append(m)
        dens *= (1 - e) ** m
        size_exp += m * _log2(Q + 1)
    return T1Constants(r, c, pi, dens, chunks, size_exp)


def preset_eps_vector(q: int, d: int, name: str = "density2") -> list[Fraction]:
    """Named eps-vectors: 'density2' (eta_i = q^(2^i)) and 'co1:m' (eps_i ~ m/(q+1))."""
    r = t1_levels(q, d)
    out = []
    if name == "density2":
        for i in range(r):
            Q = q ** (2 ** i)
            out.append(Fraction(Q, Q + 1))
    elif name.startswith("co1:"):
        m = int(name.split(":", 1)[1])
        if not 1 <= m <= q:
            raise InvalidEpsVector(f"m must lie in 1..{q}")
        for i in range(r):
            Q = q ** (2 ** i)
            eta = max(1, m * (Q + 1) // (q + 1))
            out.append(Fraction(eta, Q + 1))
    else:
        raise InvalidEpsVector(f"unknown preset {name!r}")
    out.append(Fraction(1, 3))
    return out


def eps_nu_of_m(q: int, m: int):
    """(eps(m), nu(m)) = ((1 - m/(q+1))^(1/m), (q+1)^(1/m)); exact rationals at m=1."""
    if not 1 <= m <= q:
        raise OutOfRange(f"m must lie in 1..{q}")
    if m == 1:
        return Fraction(q, q + 1), Fraction(q + 1)
    e = mpmath.power(1 - mpmath.mpf(m) / (q + 1), mpmath.mpf(1) / m)
    n = mpmath.power(q + 1, mpmath.mpf(1) / m)
    return e, n


# ---------------------------------------------------------------------------
# tower parameters and formula-only size estimates
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class TowerParams:
    q: int
    k: int
    genus: int
    places: int
    places_exact: bool  # False: `places` is only a lower bound (k <= 2)


def tower_params(q: int, k: int) -> TowerParams:
    if k < 1:
        raise ValueError("k >= 1")
    if k % 2 == 0:
        g = q ** k - 2 * q ** (k // 2) + 1
    else:
        g = q ** k - q ** ((k + 1) // 2) - q ** ((k - 1) // 2) + 1
    base = (q * q - q) * q ** (k - 1)
    if k >= 3:
        return TowerParams(q, k, g, base + (2 * q if q % 2 else 2 * q * q), True)
    return TowerParams(q, k, g, base, False)


def _isqrt_exact(n: int) -> int | None:
    r = math.isqrt(n)
    return r if r * r == n else None


def tower_tester_size_estimate(q: int, d: int, t: int, epsilon, route: str, **params) -> BoundReport:
    """Formula value of a tower-based size estimate after checking its hypotheses.

    Nothing is constructed.  Raises HypothesisViolated naming the failed condition.
    """
    e = _eps(epsilon)
    inputs = {"q": q, "d": d, "t": t, "epsilon": e, "route": route, **params}
    hyp: dict[str, bool] = {}

    def need(name: str, ok: bool):
        hyp[name] = bool(ok)
        if not ok:
            raise HypothesisViolated(name)

    if route == "genus":
        g, N = int(params["g"]), int(params["N"])
        s = int(params.get("s", N))
        need("N > d(t+g-1)", N > d * (t + g - 1))
        need("N >= s > d(t+g-1)", N >= s > d * (t + g - 1))
        need("t >= 3 + 2 log_q(2g+1)", t >= 3 + 2 * math.log(2 * g + 1, q))
        implied = Fraction(d * (t + g - 1), s)
        need("eps >= d(t+g-1)/s", e >= implied)
        value = Fraction(d * (t + g - 1)) / e
        rep = BoundReport("tower_estimate", value, "size <= d(t+g-1)/eps", inputs)
        rep.components = {"epsilon_at_s": implied}
    elif route in ("linear-sq", "quadratic"):
        if route == "linear-sq":
            q0 = _isqrt_exact(q)
            need("q is a perfect square", q0 is not None)
        else:
            q0 = q
            need("q >= d+1", q >= d + 1)
        k = params.get("k")
        ks = [int(k)] if k is not None else range(1, max(2, t - 3))
        chosen = None
        for kk in ks:
            c = Fraction(t, q0 ** kk)
            emin = (c + 1) * d / (q0 - 1) * (1 if route == "linear-sq" else 2)
            if t >= kk + 4 and e >= emin:
                chosen = (kk, c, emin)
                break
        need("some k with t = c q^k, c >= (k+4)/q^k and eps >= eps_min", chosen is not None)
        kk, c, emin = chosen
        if route == "linear-sq":
            value = (1 + 1 / c) * d * t / e
            cite = "size <= (1+1/c) d t / eps"
        else:
            value = 5 * (1 + 1 / c) * (Fraction(d) / e) ** 2 * t
            cite = "size <= 5 (1+1/c) (d/eps)^2 t"
        rep = BoundReport("tower_estimate", value, cite, inputs)
        rep.components = {"k": kk, "c": c, "eps_min": emin}
    elif route == "cubic":
        need("q >= d+1", q >= d + 1)
        need("t >= 8", t >= 8)
        need("eps >= 8d/(q-1)", e >= Fraction(8 * d, q - 1))
        value = 120 * (Fraction(d) / e) ** 3 * t
        rep = BoundReport("tower_estimate", value, "size <= 120 (d/eps)^3 t", inputs)
    elif route == "near-limit":
        need("q >= d+1", q >= d + 1)
        need("t >= 8", t >= 8)
        c = e * q / d
        need("8 > c > 1 + 8q/(q^2-1) with eps = c d/q", 8 > c > 1 + Fraction(8 * q, q * q - 1))
        value = 120 * Fraction(q) ** 4 / (c - 1) ** 3 * t
        rep = BoundReport("tower_estimate", value, "size <= 120 q^4/(c-1)^3 t = O((d/eps)^4/(c-1)^3) t", inputs)
        rep.components = {"c": c}
    elif route == "near-limit-2":
        need("q >= d+1", q >= d + 1)
        need("t >= 8", t >= 8)
        c = (e - Fraction(d, q) - Fraction(d, q * q)) * q * q / d
        need("8 > c > 8q^2/(q^4-1) with eps = d/q + d/q^2 + c d/q^2",
             8 > c > Fraction(8 * q * q, q ** 4 - 1))
        value = 120 * Fraction(q) ** 9 / c ** 3 * t
        rep = BoundReport("tower_estimate", value, "size <= 120 q^9/c^3 t = O((d/eps)^9/c^3) t", inputs)
        rep.components = {"c": c}
    else:
        raise ValueError(f"unknown route {route!r}")
    rep.components["hypotheses"] = hyp
    rep.notes.append("formula only: nothing is constructed")
    return rep


TOWER_ROUTES = ("linear-sq", "quadratic", "cubic", "near-limit", "near-limit-2")
