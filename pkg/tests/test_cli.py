import json

import pytest

from densetest import serialize
from densetest.cli import main
from densetest.gf import FieldElement
from densetest.tester import apply


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr().out
    return code, out


def test_build_entry_verify_roundtrip(tmp_path, capsys):
    f = tmp_path / "t.json"
    code, out = run(capsys, "build", "--q", 7, "--t", 2, "--d", 2, "--eps", "1/2", "--out", f)
    assert code == 0
    js = json.loads(out)
    assert js["size"] == 4 and js["route"] == "DirectEval" and js["schema_version"] == 1
    L = serialize.load(f)
    for i in range(L.size):
        code, out = run(capsys, "entry", "--tester", f, "--index", i, "--element", "3,5")
        assert code == 0
        got = json.loads(out)["value"]["code"]
        want = apply(L, i, 0, FieldElement(L.source, L.source.from_coeffs([3, 5])))
        assert got == want.code
    code, out = run(capsys, "verify", "--tester", f, "--n", 1)
    assert code == 0 and json.loads(out)["report"]["verdict"]


def test_verify_false_exit_code(tmp_path, capsys):
    from fractions import Fraction

    from densetest.constructions import evaluation_tester
    from densetest.tester import Tester

    L = evaluation_tester(5, 2, 2, 5)
    # declare a failure rate the family cannot meet
    bad = Tester(L.source, L.target, L.blocks, L.size, Fraction(1, 5), L.pclass, L.flags, L.node)
    f = tmp_path / "bad.json"
    serialize.save(bad, f)
    code, out = run(capsys, "verify", "--tester", f, "--n", 1)
    assert code == 1
    assert json.loads(out)["report"]["worst_failure"] == {"num": 2, "den": 5}


def test_plan_exit_codes(capsys):
    code, out = run(capsys, "plan", "--q", 2, "--t", 3, "--d", 2, "--eps", "1/2")
    assert code == 3 and json.loads(out)["plan"]["route"] == "Unconstructible"
    code, out = run(capsys, "plan", "--q", 7, "--t", 2, "--d", 2, "--eps", "1/2")
    assert code == 0 and json.loads(out)["plan"]["predicted_size"] == 4


def test_build_unconstructible(capsys):
    code, out = run(capsys, "build", "--q", 2, "--t", 3, "--d", 3, "--eps", "1/2", "--class", "HP")
    assert code == 3 and json.loads(out)["error"] == "Unconstructible"


def test_malformed_tester_file(tmp_path, capsys):
    f = tmp_path / "broken.json"
    f.write_text('{"schema_version": 1, "tester": ')
    code, out = run(capsys, "verify", "--tester", f)
    assert code == 2 and json.loads(out)["error"] == "MalformedInput"


def test_usage_error():
    with pytest.raises(SystemExit) as exc:
        main(["build", "--q", "7"])
    assert exc.value.code == 2


def test_bounds_and_irr(capsys):
    code, out = run(capsys, "bounds", "--kind", "size-lb", "--q", 7, "--d", 2, "--t", 2, "--eps", "1/2")
    assert code == 0 and json.loads(out)["report"]["value"]["num"] == 4
    code, out = run(capsys, "bounds", "--kind", "cq", "--q", 2)
    assert abs(float(json.loads(out)["report"]["value"]["decimal"]) - 1.659945821) < 1e-6
    code, out = run(capsys, "bounds", "--kind", "tower", "--q", 2, "--d", 1, "--t", 6, "--eps", "1/2",
                    "--route", "genus", "--g", 3, "--N", 16)
    assert code == 3 and json.loads(out)["feasible"] is False
    code, out = run(capsys, "irr", "count", "--q", 3, "--k", 2)
    assert json.loads(out)["count"] == 3
    code, out = run(capsys, "irr", "nth", "--q", 2, "--t", 8, "--m", 1)
    assert code == 0 and len(json.loads(out)["polys"][0]["coeffs"]) == 9


def test_bench_is_deterministic_apart_from_timings(capsys):
    a = run(capsys, "bench", "--q", 7, "--d", 2, "--eps", "1/2", "--t-list", "2,3", "--entries", 5)[1]
    b = run(capsys, "bench", "--q", 7, "--d", 2, "--eps", "1/2", "--t-list", "2,3", "--entries", 5)[1]
    rows_a = [r.split(",")[:2] for r in a.strip().splitlines()]
    rows_b = [r.split(",")[:2] for r in b.strip().splitlines()]
    assert rows_a == rows_b and rows_a[0] == ["t", "size"]
