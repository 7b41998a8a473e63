"""Testers as indexed families of per-block atomic maps.

A tester is stored intensionally: a construction node that knows how to
produce the map tuple for one index.  Composition and products decode
indices in mixed radix (left factor = low digit), so reaching any single
entry costs the depth of the construction, not its size.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Union

from .errors import ClassMismatch, IndexOutOfRange, InvalidEpsilon, LevelMismatch
from .gf import Field, FieldElement, UniPoly

FAMILIES = ("P", "HP", "HLF")


# ---------------------------------------------------------------------------
# polynomial spaces and classes
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class PolySpace:
    """F[X]_{<= degree}: the target of the lift map."""

    field: Field
    degree: int

    @property
    def key(self) -> str:
        return f"poly[{self.degree}]({self.field.key})"


Space = Union[Field, PolySpace]


@dataclass(frozen=True)
class PolyClass:
    """P / HP / HLF with n variables (per block for HLF) and degree d.

    n=None means "any number of variables".  field is the coefficient field;
    None means "the tester's target".
    """

    family: str
    n: int | None
    d: int
    field: Field | None = None
    variable_degree_cap: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.d < 1 or (self.n is not None and self.n < 1):
            raise ValueError("need d >= 1 and n >= 1")

    def with_field(self, f: Field | None) -> "PolyClass":
        return dataclasses.replace(self, field=f)

    def contains(self, other: "PolyClass") -> bool:
        """other ⊆ self."""
        if self.field is not None and other.field is not None:
            if not other.field.is_subfield_of(self.field):
                return False
        elif self.field is not None and other.field is None:
            return False
        if self.variable_degree_cap is not None:
            if other.family != "HLF" and (
                other.variable_degree_cap is None or other.variable_degree_cap > self.variable_degree_cap
            ):
                return False
        # number of variables the other class uses in total
        other_vars = None
        if other.n is not None:
            other_vars = other.n * other.d if other.family == "HLF" else other.n
        if self.family == "HLF":
            if other.family != "HLF" or other.d != self.d:
                return False
            return self.n is None or (other.n is not None and other.n <= self.n)
        if self.n is not None and (other_vars is None or other_vars > self.n):
            return False
        if self.family == "HP":
            return other.family in ("HP", "HLF") and other.d == self.d
        return other.d <= self.d

    def describe(self) -> str:
        n = "*" if self.n is None else self.n
        f = "" if self.field is None else f" over F_{self.field.order}"
        return f"{self.family}(n={n}, d={self.d}){f}"


def intersect_classes(a: PolyClass, b: PolyClass) -> PolyClass:
    if b.contains(a):
        return a
    if a.contains(b):
        return b
    raise ClassMismatch(f"{a.describe()} and {b.describe()} are not nested")


@dataclass(frozen=True)
class Flags:
    componentwise: bool = True
    linear: bool = True
    reducible: bool = True
    symmetric: bool = True

    def __and__(self, other: "Flags") -> "Flags":
        return Flags(*(x and y for x, y in zip(dataclasses.astuple(self), dataclasses.astuple(other))))


# ---------------------------------------------------------------------------
# atomic maps
# ---------------------------------------------------------------------------
class AtomicMap:
    kind = "?"
    source: Space
    target: Space

    def apply(self, v):
        raise NotImplementedError

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Lift(AtomicMap):
    """a = w_0 + w_1 x + ... -> w_0 + w_1 X + ... (coefficients over the level below)."""

    field: Field
    kind = "lift"

    @property
    def source(self):
        return self.field

    @property
    def target(self):
        return PolySpace(self.field.base, self.field.degree - 1)

    def apply(self, v: int) -> UniPoly:
        F = self.field
        return UniPoly(F.base, F.coeffs(v))

    def to_json(self):
        return {"kind": "lift", "field": self.field.key}


@dataclass(frozen=True)
class Evaluate(AtomicMap):
    """z -> z(beta) with beta in a field containing the coefficients."""

    point: int
    point_field: Field
    space: PolySpace
    kind = "evaluate"

    def __post_init__(self):
        if not self.space.field.is_subfield_of(self.point_field):
            raise LevelMismatch("evaluation point must live in an extension of the coefficients")

    @property
    def source(self):
        return self.space

    @property
    def target(self):
        return self.point_field

    def apply(self, z: UniPoly) -> int:
        G, b = self.point_field, self.point
        acc = 0
        for c in reversed(z.coeffs):
            acc = G.add(G.mul(acc, b), c)
        return acc

    def to_json(self):
        return {
            "kind": "evaluate",
            "point": self.point,
            "field": self.point_field.key,
            "space": {"field": self.space.field.key, "degree": self.space.degree},
        }


@dataclass(frozen=True)
class CoefficientAt(AtomicMap):
    j: int
    space: PolySpace
    kind = "coefficient"

    @property
    def source(self):
        return self.space

    @property
    def target(self):
        return self.space.field

    def apply(self, z: UniPoly) -> int:
        return z.coeff(self.j)

    def to_json(self):
        return {"kind": "coefficient", "j": self.j,
                "space": {"field": self.space.field.key, "degree": self.space.degree}}


@dataclass(frozen=True)
class Dot(AtomicMap):
    """z -> sum_j w_j z_j, a general linear functional on the slice."""

    weights: tuple[int, ...]
    space: PolySpace
    kind = "dot"

    @property
    def source(self):
        return self.space

    @property
    def target(self):
        return self.space.field

    def apply(self, z: UniPoly) -> int:
        F = self.space.field
        acc = 0
        for w, c in zip(self.weights, z.coeffs):
            if w and c:
                acc = F.add(acc, F.mul(w, c))
        return acc

    def to_json(self):
        return {"kind": "dot", "weights": list(self.weights),
                "space": {"field": self.space.field.key, "degree": self.space.degree}}


@dataclass(frozen=True)
class Chain(AtomicMap):
    maps: tuple[AtomicMap, ...]
    kind = "chain"

    @staticmethod
    def of(*maps: AtomicMap) -> AtomicMap:
        flat: list[AtomicMap] = []
        for m in maps:
            flat.extend(m.maps if isinstance(m, Chain) else (m,))
        for a, b in zip(flat, flat[1:]):
            if not _spaces_compatible(a.target, b.source):
                raise LevelMismatch(f"chain mismatch: {a.kind} -> {b.kind}")
        return flat[0] if len(flat) == 1 else Chain(tuple(flat))

    @property
    def source(self):
        return self.maps[0].source

    @property
    def target(self):
        return self.maps[-1].target

    def apply(self, v):
        for m in self.maps:
            v = m.apply(v)
        return v

    def to_json(self):
        return {"kind": "chain", "maps": [m.to_json() for m in self.maps]}


def _spaces_compatible(out: Space, inp: Space) -> bool:
    if isinstance(out, PolySpace) and isinstance(inp, PolySpace):
        return out.field == inp.field and out.degree <= inp.degree
    if isinstance(out, Field) and isinstance(inp, Field):
        return out == inp
    return False


def atomic_from_json(obj: dict) -> AtomicMap:
    from .gf import field_from_signature as fs

    kind = obj["kind"]
    if kind == "lift":
        return Lift(fs(obj["field"]))
    if kind == "chain":
        return Chain.of(*[atomic_from_json(m) for m in obj["maps"]])
    space = PolySpace(fs(obj["space"]["field"]), int(obj["space"]["degree"]))
    if kind == "evaluate":
        return Evaluate(int(obj["point"]), fs(obj["field"]), space)
    if kind == "coefficient":
        return CoefficientAt(int(obj["j"]), space)
    if kind == "dot":
        return Dot(tuple(int(w) for w in obj["weights"]), space)
    raise ValueError(f"unknown atomic map kind {kind!r}")


# ---------------------------------------------------------------------------
# construction nodes
# ---------------------------------------------------------------------------
class Node:
    kind = "?"
    size: int
    blocks: int

    def map_at(self, i: int) -> tuple[AtomicMap, ...]:
        raise NotImplementedError

    def params(self) -> dict:
        return {}

    def children(self) -> tuple["Tester", ...]:
        return ()


@dataclass(frozen=True)
class LiftNode(Node):
    field: Field
    kind = "lift"
    size = 1
    blocks = 1

    def map_at(self, i):
        return (Lift(self.field),)

    def params(self):
        return {"field": self.field.key}


@dataclass(frozen=True)
class EvaluationNode(Node):
    """Maps z -> z(beta) for the first `finite` canonical points, then l_inf if asked.

    source is either a field F (maps are Lift then evaluate) or a polynomial
    slice (maps act on it directly).
    """

    source: Space
    finite: int
    infinity: bool
    kind = "evaluation"
    blocks = 1

    @property
    def size(self):
        return self.finite + int(self.infinity)

    @property
    def space(self) -> PolySpace:
        s = self.source
        return s if isinstance(s, PolySpace) else PolySpace(s.base, s.degree - 1)

    def map_at(self, i):
        sp = self.space
        if i < self.finite:
            m = Evaluate(i, sp.field, sp)
        else:
            m = CoefficientAt(sp.degree, sp)
        if isinstance(self.source, Field):
            return (Chain.of(Lift(self.source), m),)
        return (m,)

    def params(self):
        src = self.source
        p = {"finite_points": self.finite, "infinity": self.infinity}
        if isinstance(src, PolySpace):
            p["space"] = {"field": src.field.key, "degree": src.degree}
        else:
            p["field"] = src.key
        return p


@dataclass(frozen=True, eq=False)
class CrtNode(Node):
    """Lift, then evaluate at a root of the i-th degree-k irreducible."""

    source: Field
    target: Field
    count: int
    sourcing: str
    roots: tuple[int, ...] = ()
    kind = "crt"
    blocks = 1

    @property
    def size(self):
        return self.count

    def root(self, i: int) -> int:
        if self.sourcing == "nth":
            return _nth_root(self.source.base.key, self.target.degree, i)
        return self.roots[i]

    def map_at(self, i):
        sp = PolySpace(self.source.base, self.source.degree - 1)
        return (Chain.of(Lift(self.source), Evaluate(self.root(i), self.target, sp)),)

    def params(self):
        return {
            "field": self.source.key,
            "target": self.target.key,
            "k": self.target.degree,
            "count": self.count,
            "sourcing": self.sourcing,
            "roots": [self.root(i) for i in range(self.count)],
        }

    def __eq__(self, other):
        return isinstance(other, CrtNode) and self.params() == other.params()

    def __hash__(self):
        return hash((self.source.key, self.target.key, self.count))


@lru_cache(maxsize=65536)
def _nth_root(base_key: str, k: int, i: int) -> int:
    from .gf import field_from_signature
    from .irreducibles import nth_irreducible

    return nth_irreducible(field_from_signature(base_key), k, i).root.code


@dataclass(frozen=True)
class ComposeNode(Node):
    first: "Tester"
    second: "Tester"
    kind = "compose"

    @property
    def size(self):
        return self.first.size * self.second.size

    @property
    def blocks(self):
        return max(self.first.blocks, self.second.blocks)

    def map_at(self, i):
        s1 = self.first.size
        i2, i1 = divmod(i, s1)
        m1 = self.first.node.map_at(i1)
        m2 = self.second.node.map_at(i2)
        return tuple(
            Chain.of(m1[b if len(m1) > 1 else 0], m2[b if len(m2) > 1 else 0])
            for b in range(self.blocks)
        )

    def children(self):
        return (self.first, self.second)


@dataclass(frozen=True)
class ProductNode(Node):
    left: "Tester"
    right: "Tester"
    kind = "product"

    @property
    def size(self):
        return self.left.size * self.right.size

    @property
    def blocks(self):
        return _hlf_blocks(self.left) + _hlf_blocks(self.right)

    def map_at(self, i):
        iy, ix = divmod(i, self.left.size)
        return _expand(self.left, self.left.node.map_at(ix)) + _expand(
            self.right, self.right.node.map_at(iy)
        )

    def children(self):
        return (self.left, self.right)


@dataclass(frozen=True)
class ExplicitNode(Node):
    source: Space
    target: Space
    maps: tuple[tuple[AtomicMap, ...], ...]
    kind = "explicit"

    @property
    def size(self):
        return len(self.maps)

    @property
    def blocks(self):
        return len(self.maps[0])

    def map_at(self, i):
        return self.maps[i]

    def params(self):
        return {"maps": [[m.to_json() for m in tup] for tup in self.maps]}


def _hlf_blocks(t: "Tester") -> int:
    return t.pclass.d if t.blocks == 1 else t.blocks


def _expand(t: "Tester", tup: tuple) -> tuple:
    want = _hlf_blocks(t)
    return tup * want if len(tup) == 1 else tup


# ---------------------------------------------------------------------------
# the tester record
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Tester:
    source: Space
    target: Space
    blocks: int
    size: int
    epsilon: Fraction
    pclass: PolyClass
    flags: Flags
    node: Node = field(repr=False)

    def __post_init__(self):
        eps = Fraction(self.epsilon)
        object.__setattr__(self, "epsilon", eps)
        if not 0 <= eps < 1:
            raise InvalidEpsilon(f"epsilon {eps} outside [0, 1)")
        if self.size < 1 or self.size != self.node.size:
            raise ValueError("size mismatch with construction")
        if self.blocks != self.node.blocks:
            raise ValueError("block count mismatch with construction")

    @property
    def density(self) -> Fraction:
        return 1 - self.epsilon

    @property
    def kind(self) -> str:
        return self.node.kind

    def map_at(self, i: int) -> tuple[AtomicMap, ...]:
        if not 0 <= i < self.size:
            raise IndexOutOfRange(f"index {i} outside 0..{self.size - 1}")
        return self.node.map_at(i)

    def materialize(self) -> list[tuple[AtomicMap, ...]]:
        return [self.map_at(i) for i in range(self.size)]

    def class_field(self) -> Field:
        f = self.pclass.field
        if f is not None:
            return f
        return self.target if isinstance(self.target, Field) else self.target.field


def apply(t: Tester, index: int, block: int, e: FieldElement):
    """Image of e under the block-th map of tuple `index`."""
    if not 0 <= block < t.blocks:
        raise IndexOutOfRange(f"block {block} outside 0..{t.blocks - 1}")
    src = t.source
    if isinstance(src, Field):
        if not isinstance(e, FieldElement) or not (e.field == src or e.field.is_subfield_of(src)):
            raise LevelMismatch("element is not in the tester's source field")
        v = e.code
    else:
        if not isinstance(e, UniPoly) or e.field != src.field:
            raise LevelMismatch("value is not in the tester's source space")
        v = e
    out = t.map_at(index)[block].apply(v)
    tgt = t.target
    return FieldElement(tgt, out) if isinstance(tgt, Field) else out


def weaken(t: Tester, eps2, pclass: PolyClass | None = None) -> Tester:
    eps2 = Fraction(eps2)
    if eps2 < t.epsilon or eps2 >= 1:
        raise InvalidEpsilon(f"cannot relabel epsilon {t.epsilon} as {eps2}")
    cls = t.pclass
    if pclass is not None:
        if pclass.field is None:
            pclass = pclass.with_field(t.pclass.field)
        if not t.pclass.contains(pclass):
            raise ClassMismatch(f"{pclass.describe()} is not inside {t.pclass.describe()}")
        cls = pclass
    return dataclasses.replace(t, epsilon=eps2, pclass=cls)


def compose(l1: Tester, l2: Tester) -> Tester:
    """Apply l1 then l2."""
    if not _same_space(l1.target, l2.source):
        raise LevelMismatch("l1.target must equal l2.source")
    if l1.blocks != l2.blocks and 1 not in (l1.blocks, l2.blocks):
        raise ClassMismatch(f"block counts {l1.blocks} and {l2.blocks} are incompatible")
    cls = intersect_classes(l1.pclass, l2.pclass)
    node = ComposeNode(l1, l2)
    eps = 1 - (1 - l1.epsilon) * (1 - l2.epsilon)
    return Tester(l1.source, l2.target, node.blocks, node.size, eps, cls, l1.flags & l2.flags, node)


def product(lx: Tester, ly: Tester) -> Tester:
    if not (_same_space(lx.source, ly.source) and _same_space(lx.target, ly.target)):
        raise LevelMismatch("product factors need the same source and target")
    for t in (lx, ly):
        if t.blocks not in (1, t.pclass.d):
            raise ClassMismatch("factor block count must be 1 or its degree")
    fx, fy = lx.pclass.field, ly.pclass.field
    if fx is not None and fy is not None:
        if fx.is_subfield_of(fy):
            f = fx
        elif fy.is_subfield_of(fx):
            f = fy
        else:
            raise ClassMismatch("coefficient fields are not nested")
    else:
        f = fx or fy
    ns = [c.n for c in (lx.pclass, ly.pclass) if c.n is not None]
    cls = PolyClass("HLF", min(ns) if ns else None, lx.pclass.d + ly.pclass.d, f)
    node = ProductNode(lx, ly)
    eps = 1 - (1 - lx.epsilon) * (1 - ly.epsilon)
    flags = dataclasses.replace(lx.flags & ly.flags, symmetric=False)
    return Tester(lx.source, lx.target, node.blocks, node.size, eps, cls, flags, node)


def product_all(testers: Sequence[Tester]) -> Tester:
    out = testers[0]
    for t in testers[1:]:
        out = product(out, t)
    return out


def lift_tester(tower, level: int | None = None) -> Tester:
    F = tower if isinstance(tower, Field) else tower.field(tower.height if level is None else level)
    if F.base is None:
        raise LevelMismatch("lift needs level >= 1")
    node = LiftNode(F)
    target = PolySpace(F.base, F.degree - 1)
    return Tester(F, target, 1, 1, Fraction(0), PolyClass("P", None, 1 << 30, F.base), Flags(), node)


def explicit_tester(source: Space, target: Space, maps: Sequence[Sequence[AtomicMap]], epsilon,
                    pclass: PolyClass, flags: Flags | None = None) -> Tester:
    maps = tuple(tuple(t) for t in maps)
    node = ExplicitNode(source, target, maps)
    if flags is None:
        flags = infer_flags(maps, source)
    return Tester(source, target, node.blocks, node.size, Fraction(epsilon), pclass, flags, node)


def infer_flags(maps, source) -> Flags:
    symmetric = all(len(set(t)) == 1 for t in maps)
    reducible = True
    if isinstance(source, Field):
        reducible = all(m.apply(1) == 1 for t in maps for m in t)
    return Flags(componentwise=True, linear=True, reducible=reducible, symmetric=symmetric)


def _same_space(a: Space, b: Space) -> bool:
    return a == b
