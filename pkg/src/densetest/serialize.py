"""JSON round trip for testers.  The construction tree is stored, never the map list."""
from __future__ import annotations

import json
from fractions import Fraction

from .errors import DensetestError, MalformedInput
from .gf import Field, field_from_signature
from .tester import (
    ComposeNode,
    CrtNode,
    EvaluationNode,
    ExplicitNode,
    Flags,
    LiftNode,
    PolyClass,
    PolySpace,
    ProductNode,
    Tester,
    atomic_from_json,
)

SCHEMA_VERSION = 1


def frac_json(x) -> dict:
    x = Fraction(x)
    return {"num": x.numerator, "den": x.denominator}


def space_json(s) -> dict:
    if isinstance(s, Field):
        return {"field": s.key}
    return {"poly": {"field": s.field.key, "degree": s.degree}}


def _space(obj):
    if "field" in obj:
        return field_from_signature(obj["field"])
    p = obj["poly"]
    return PolySpace(field_from_signature(p["field"]), int(p["degree"]))


def class_json(c: PolyClass) -> dict:
    return {"family": c.family, "n": c.n, "d": c.d,
            "field": c.field.key if c.field is not None else None,
            "variable_degree_cap": c.variable_degree_cap}


def _class(obj) -> PolyClass:
    f = obj.get("field")
    return PolyClass(obj["family"], obj.get("n"), int(obj["d"]),
                     field_from_signature(f) if f else None, obj.get("variable_degree_cap"))


def tester_json(t: Tester) -> dict:
    node = t.node
    out = {
        "kind": node.kind,
        "source": space_json(t.source),
        "target": space_json(t.target),
        "blocks": t.blocks,
        "size": t.size,
        "epsilon": frac_json(t.epsilon),
        "class": class_json(t.pclass),
        "flags": {"componentwise": t.flags.componentwise, "linear": t.flags.linear,
                  "reducible": t.flags.reducible, "symmetric": t.flags.symmetric},
        "params": node.params(),
    }
    kids = node.children()
    if kids:
        out["children"] = [tester_json(c) for c in kids]
    return out


def _node(obj, path: str):
    kind = obj["kind"]
    prm = obj.get("params", {})
    if kind == "lift":
        return LiftNode(field_from_signature(prm["field"]))
    if kind == "evaluation":
        src = (PolySpace(field_from_signature(prm["space"]["field"]), int(prm["space"]["degree"]))
               if "space" in prm else field_from_signature(prm["field"]))
        return EvaluationNode(src, int(prm["finite_points"]), bool(prm["infinity"]))
    if kind == "crt":
        roots = () if prm["sourcing"] == "nth" else tuple(int(r) for r in prm["roots"])
        return CrtNode(field_from_signature(prm["field"]), field_from_signature(prm["target"]),
                       int(prm["count"]), prm["sourcing"], roots)
    if kind in ("compose", "product"):
        kids = obj.get("children")
        if not isinstance(kids, list) or len(kids) != 2:
            raise MalformedInput("composite node needs two children", path=path + ".children")
        a, b = (_tester(k, f"{path}.children[{i}]") for i, k in enumerate(kids))
        return ComposeNode(a, b) if kind == "compose" else ProductNode(a, b)
    if kind == "explicit":
        maps = tuple(tuple(atomic_from_json(m) for m in tup) for tup in prm["maps"])
        return ExplicitNode(_space(obj["source"]), _space(obj["target"]), maps)
    raise MalformedInput(f"unknown node kind {kind!r}", path=path + ".kind")


def _tester(obj, path: str = "$") -> Tester:
    if not isinstance(obj, dict):
        raise MalformedInput("expected an object", path=path)
    try:
        node = _node(obj, path)
        e = obj["epsilon"]
        fl = obj["flags"]
        return Tester(
            _space(obj["source"]), _space(obj["target"]), int(obj["blocks"]), int(obj["size"]),
            Fraction(int(e["num"]), int(e["den"])), _class(obj["class"]),
            Flags(bool(fl["componentwise"]), bool(fl["linear"]), bool(fl["reducible"]),
                  bool(fl["symmetric"])),
            node,
        )
    except MalformedInput:
        raise
    except (KeyError, TypeError, ValueError, DensetestError) as exc:
        raise MalformedInput(f"bad tester record: {exc!r}", path=path) from exc


def dumps(t: Tester, **meta) -> str:
    doc = {"schema_version": SCHEMA_VERSION, "tester": tester_json(t)}
    if meta:
        doc["meta"] = meta
    return json.dumps(doc, indent=1, default=_default)


def _default(o):
    if isinstance(o, Fraction):
        return frac_json(o)
    if hasattr(o, "to_json"):
        return o.to_json()
    raise TypeError(f"cannot serialise {type(o).__name__}")


def loads(text: str) -> Tester:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"invalid JSON: {exc.msg}", offset=exc.pos) from exc
    if not isinstance(doc, dict) or "tester" not in doc:
        raise MalformedInput("missing 'tester'", path="$")
    v = doc.get("schema_version")
    if v != SCHEMA_VERSION:
        raise MalformedInput(f"unsupported schema_version {v!r}", path="$.schema_version")
    return _tester(doc["tester"], "$.tester")


def save(t: Tester, path: str, **meta) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(t, **meta))


def load(path: str) -> Tester:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())
