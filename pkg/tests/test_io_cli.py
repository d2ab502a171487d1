import json

import pytest

from cloneforge.cli import main
from cloneforge.core import Algebra, Operation
from cloneforge.errors import ParseError
from cloneforge.io import (
    algebra_from_text,
    canonical_json,
    dumps_algebra,
    dumps_group,
    format_homs,
    parse_algebra,
    parse_group,
    parse_homs,
    write_atomic,
)
from cloneforge.zoo import GroupTable, make_free_gset, make_vector_space
from conftest import AND, NOT


@pytest.fixture
def boolean_file(tmp_path):
    path = tmp_path / "bool.json"
    path.write_text(dumps_algebra(Algebra(2, [("not", NOT), ("and", AND)])))
    return path


@pytest.fixture
def z2_file(tmp_path):
    path = tmp_path / "z2.json"
    path.write_text(dumps_group(GroupTable.cyclic(2)))
    return path


def test_roundtrip_is_byte_stable(tmp_path):
    for A in (make_vector_space(3, 1), make_vector_space(2, 2), make_free_gset(GroupTable.symmetric(3), 2)):
        text = dumps_algebra(A)
        path = tmp_path / "a.json"
        write_atomic(path, text)
        B = parse_algebra(path)
        assert B == A and dumps_algebra(B) == text


def test_canonical_json_sorted():
    assert canonical_json({"b": 1, "a": [1, 2]}) == '{"a": [1, 2], "b": 1}\n'


def _parse_error(text):
    with pytest.raises(ParseError) as exc:
        algebra_from_text(text)
    return str(exc.value)


def test_parse_errors_name_the_field_and_offset():
    text = '{"carrier": 2, "ops": [{"name": "x", "arity": 1, "table": [0, 5]}]}'
    msg = _parse_error(text)
    assert "op 'x': table entry 1 = 5 outside the carrier 0..1" in msg
    assert f"byte {text.index('5]')}" in msg
    assert "table has 1 entries, expected 4" in _parse_error(
        '{"carrier": 2, "ops": [{"name": "x", "arity": 2, "table": [0]}]}')
    assert "missing field 'ops'" in _parse_error('{"carrier": 2}')
    assert "duplicate symbol" in _parse_error(
        '{"carrier": 1, "ops": [{"name": "x", "arity": 0, "table": [0]}, {"name": "x", "arity": 0, "table": [0]}]}')
    assert "carrier" in _parse_error('{"carrier": 0, "ops": []}')
    assert "byte" in _parse_error('{"carrier": 2, "ops": [')


def test_byte_offsets_count_utf8():
    text = '{"carrier": 2, "ops": [{"name": "é", "arity": 1, "table": [0, 7]}]}'
    msg = _parse_error(text)
    assert f"byte {len(text[: text.index('7]')].encode())}" in msg


def test_group_file(tmp_path, z2_file):
    assert parse_group(z2_file) == GroupTable.cyclic(2)
    bad = tmp_path / "bad.json"
    bad.write_text('{"table": [[0, 1], [1, 1]]}')
    with pytest.raises(ParseError):
        parse_group(bad)


def test_hom_dump_roundtrip():
    vecs = [(0, 1, 1), (2, 0, 0)]
    assert parse_homs(format_homs(vecs)) == vecs


# ---------------------------------------------------------------- CLI


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_show_and_zoo_build(capsys, tmp_path, z2_file):
    code, out, _ = run(capsys, "zoo-build", "--vecspace", 3, 1)
    assert code == 0 and json.loads(out)["carrier"] == 3
    target = tmp_path / "fz.json"
    code, out, _ = run(capsys, "zoo-build", "--free-gset", z2_file, 2, "--out", target)
    assert code == 0 and parse_algebra(target) == make_free_gset(GroupTable.cyclic(2), 2)
    code, out, _ = run(capsys, "show", "--algebra", target)
    assert code == 0 and out.strip() == "carrier 4; signature: g0/1, g1/1"


def test_commute_and_replay(capsys, tmp_path, boolean_file):
    report = tmp_path / "c.json"
    code, out, _ = run(capsys, "commute", "--algebra", boolean_file, "--f", "not", "--g", "and", "--out", report)
    assert code == 1 and "does not commute" in out
    data = json.loads(report.read_text())
    assert data["witness"]["rows"] == [[1, 0]] and data["witness"]["code"] == 1
    assert run(capsys, "verify", "--replay", report)[0] == 0
    data["witness"]["first"] = data["witness"]["second"]
    report.write_text(json.dumps(data))
    assert run(capsys, "verify", "--replay", report)[0] == 1
    code, out, _ = run(capsys, "commute", "--vecspace", 2, 1, "--f", "add", "--g", "neg")
    assert code == 0 and "commutes" in out


def test_clone_and_centralizer(capsys, boolean_file):
    code, out, _ = run(capsys, "clone", "--algebra", boolean_file, "--arity", 2)
    assert code == 0 and out.strip() == "derived(2) has 16 member(s)"
    code, out, _ = run(capsys, "centralizer", "--algebra", boolean_file, "--arity", 1)
    assert code == 0 and out.strip() == "centralizer(1) has 1 member(s)"
    code, out, _ = run(capsys, "centralizer", "--vecspace", 2, 1, "--arity", 2, "--method", "brute")
    assert code == 0 and out.strip() == "centralizer(2) has 4 member(s)"


def test_dc_routes(capsys, tmp_path):
    code, out, _ = run(capsys, "dc", "--vecspace", 2, 1, "--arity", 1)
    assert code == 0 and out.strip() == "DC(1) has 2 member(s)"
    report = tmp_path / "dc.json"
    code, out, _ = run(capsys, "dc", "--vecspace", 2, 1, "--arity", 1, "--cap-arity", 2, "--out", report)
    assert code == 0 and out.strip() == "DC(1)=derived(1), size 2"
    assert json.loads(report.read_text())["exact"] is True
    assert run(capsys, "dc", "--vecspace", 2, 1, "--arity", 2, "--limit", 3)[0] == 2


def test_dc_sandwich_not_exact(capsys, tmp_path):
    # no constant commutes with NOT, so a cap of 0 leaves the upper bound at all of O(1)
    path = tmp_path / "a.json"
    path.write_text(dumps_algebra(Algebra(2, [("not", NOT)])))
    code, out, _ = run(capsys, "dc", "--algebra", path, "--arity", 1, "--cap-arity", 0)
    assert code == 1 and out.startswith("undecided")


def test_verify_and_replay(capsys, tmp_path, z2_file):
    report = tmp_path / "v.json"
    code, out, _ = run(capsys, "verify", "--vecspace", 2, 1, "--arity", 2, "--out", report)
    assert code == 0 and out.strip() == "DC(2)=derived(2), size 4"
    assert run(capsys, "verify", "--replay", report)[0] == 0
    data = json.loads(report.read_text())
    data["witnesses"][3]["h"][0] ^= 1
    report.write_text(canonical_json(data))
    code, out, _ = run(capsys, "verify", "--replay", report)
    assert code == 1 and "FAILED" in out
    code, out, _ = run(capsys, "verify", "--free-gset", z2_file, 1, "--arity", 1)
    assert code == 0 and out.strip() == "DC(1)=derived(1), size 2"


def test_homs(capsys, tmp_path, boolean_file):
    code, out, err = run(capsys, "homs", "--vecspace", 2, 1)
    assert code == 0 and parse_homs(out) == [(0, 0), (0, 1)] and "2 homomorphism(s)" in err
    dump = tmp_path / "h.txt"
    code, _, _ = run(capsys, "homs", "--vecspace", 2, 1, "--power", 1, "--out", dump)
    assert code == 0 and len(parse_homs(dump.read_text())) == 4
    code, out, err = run(capsys, "homs", "--vecspace", 2, 1, "--power", 2, "--limit", 3)
    assert code == 2 and len(parse_homs(out)) == 3 and "truncated" in err


def test_analyze_action(capsys, tmp_path):
    path = tmp_path / "act.json"
    path.write_text(dumps_algebra(Algebra(3, [("a", Operation(3, 1, [1, 2, 0]))])))
    code, out, _ = run(capsys, "analyze-action", "--monoid-action", path)
    assert code == 0 and out.strip() == "roots []; unique transitions up to length 4: no (aaa.0 = ε.0)"
    path.write_text(dumps_algebra(Algebra(3, [("a", Operation(3, 1, [0, 0, 1]))])))
    code, out, _ = run(capsys, "analyze-action", "--monoid-action", path, "--length-bound", 1)
    assert code == 0 and out.strip() == "roots [2]; unique transitions up to length 1: no (a.0 = ε.0)"


def test_usage_and_input_errors(capsys, tmp_path, boolean_file):
    assert run(capsys, "bogus")[0] == 2
    assert run(capsys, "clone", "--algebra", boolean_file)[0] == 2
    assert run(capsys, "clone", "--algebra", boolean_file, "--vecspace", 2, 1, "--arity", 1)[0] == 2
    assert run(capsys, "commute", "--algebra", boolean_file, "--f", "not", "--g", "nope")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text('{"carrier": 2, "ops": [{"name": "x", "arity": 1, "table": [0, 5]}]}')
    code, _, err = run(capsys, "show", "--algebra", bad)
    assert code == 2 and "byte" in err
    assert run(capsys, "show", "--algebra", tmp_path / "missing.json")[0] == 2
    assert run(capsys, "zoo-build", "--vecspace", 4, 1)[0] == 2


def test_table_limit_env(capsys, monkeypatch):
    monkeypatch.setenv("CLONEFORGE_TABLE_LIMIT", "10")
    code, _, err = run(capsys, "centralizer", "--vecspace", 2, 1, "--arity", 2, "--method", "brute")
    assert code == 2 and "limit" in err
