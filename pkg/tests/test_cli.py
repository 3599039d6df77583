import io
import json

import pytest

from alcui.builders import WitnessPair, verify_witness
from alcui.cli import EXIT_CAP, EXIT_NO, EXIT_USAGE, EXIT_YES, Verdict, run
from alcui.model import load_pointed, save_pointed
from alcui.syntax import parse_tbox
from alcui.typesys import equivalent_tboxes

from oracles import S3, T3, chain_pair


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run([str(a) for a in argv], out, err)
    return code, out.getvalue(), err.getvalue()


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        p = tmp_path / name
        p.write_text(text)
        return p
    write("t1.tbox", "A sub exists r. B and exists r. not B\n")
    write("t3.tbox", "A sub B\nB sub exists r. B\n")
    write("empty.tbox", "")
    write("topa.tbox", "top sub A\n")
    write("bad.tbox", "A sub exists r.\n")
    i1, i2 = chain_pair(1)
    save_pointed(i1, str(tmp_path / "i1.json"))
    save_pointed(i2, str(tmp_path / "i2.json"))
    return tmp_path


def test_sat_and_entails(files):
    assert call("sat", files / "t1.tbox", "A")[0] == EXIT_YES
    assert call("sat", files / "t1.tbox", "A and forall r. B")[0] == EXIT_NO
    assert call("entails", files / "t1.tbox", "A sub exists r. top")[0] == EXIT_YES
    assert call("entails", files / "t1.tbox", "top sub A")[0] == EXIT_NO


def test_usage_errors(files):
    code, _, err = call("sat", files / "bad.tbox", "A")
    assert code == EXIT_USAGE and "line 1" in err
    assert call("sat", files / "missing.tbox", "A")[0] == EXIT_USAGE
    assert call("sat", files / "t1.tbox", "exists r.")[0] == EXIT_USAGE
    assert call("bogus")[0] == EXIT_USAGE
    assert call()[0] == EXIT_USAGE
    assert call("ui-exists", files / "t3.tbox", "--sigma", "A,r")[0] == EXIT_USAGE
    assert call("approximate", files / "t3.tbox", "--sigma", "A,r", "--depth", "1")[0] == EXIT_YES
    assert call("lower-bound", 1, "--max-family", 5)[0] == EXIT_USAGE  # global flags go first


def test_cap_errors(files):
    assert call("--max-family", 5, "lower-bound", 1)[0] == EXIT_CAP
    assert call("ui-compute", files / "t1.tbox", "--sigma", "A,r")[0] == EXIT_CAP
    assert call("--max-counter-bits", 1, "ui-exists", files / "t3.tbox", "--sigma", "A,r", "--depth", 2)[0] == EXIT_CAP
    assert call("--max-family", 10, "approximate", files / "t1.tbox", "--sigma", "A,r", "--depth", 2)[0] == EXIT_CAP


def test_types_output(files):
    code, out, _ = call("types", files / "empty.tbox")
    assert code == EXIT_YES and out.splitlines() == ["0: {top}", "yes"]
    code, out, _ = call("--json", "types", files / "t1.tbox")
    v = Verdict.from_json(out)
    assert v.extra["count"] == len(v.output.splitlines())


def test_bisim(files):
    assert call("bisim", files / "i1.json", files / "i2.json", "--sigma", "A,r")[0] == EXIT_NO
    code, out, _ = call("bisim", files / "i1.json", files / "i2.json", "--sigma", "A,r", "--depth", 1)
    assert code == EXIT_YES and "[bounded(1)]" in out
    assert call("bisim", files / "i1.json", files / "i1.json", "--sigma", "A,r")[0] == EXIT_YES


def test_holds_eq(files):
    assert call("holds-eq", files / "t3.tbox", files / "i1.json", "--sigma", "A,r")[0] == EXIT_YES
    assert call("holds-eq", files / "t3.tbox", files / "i2.json", "--sigma", "A,r")[0] == EXIT_NO


def test_ce(files):
    assert call("ce", files / "empty.tbox", files / "empty.tbox")[0] == EXIT_YES
    ext = files / "ext.tbox"
    ext.write_text("A sub exists r. top\n")
    assert call("ce", files / "t1.tbox", ext)[0] == EXIT_YES
    # {top sub A} is not conservative over the empty TBox once A is visible
    sig_only = files / "siga.tbox"
    sig_only.write_text("A sub A\n")
    code, out, _ = call("ce", sig_only, files / "topa.tbox", "--out", files / "cex")
    assert code == EXIT_NO
    w = load_pointed(str(files / "cex.json"))
    assert w.point not in w.interp.ext("A")


def test_ui_exists_certificates_verify(files):
    code, out, _ = call("--json", "ui-exists", files / "t3.tbox", "--sigma", "A,r", "--depth", 1,
                        "--out", files / "w")
    v = Verdict.from_json(out)
    assert code == EXIT_YES and v.answer == "yes" and v.strength == "bounded(1)"
    p1, p2 = (load_pointed(c) for c in v.certificate)
    assert verify_witness(WitnessPair(p1, p2, 1), T3, S3)
    args = ["verify-witness", files / "t3.tbox", *v.certificate, "--sigma", "A,r", "--depth", 1]
    assert call(*args)[0] == EXIT_YES


def test_ui_exists_unknown(files):
    code, out, _ = call("ui-exists", files / "t1.tbox", "--sigma", "A,r", "--depth", 1)
    assert code == EXIT_NO and out.strip() == "unknown [bounded(1)]"


def test_verify_witness_command(files):
    args = ["verify-witness", files / "t3.tbox", files / "i1.json", files / "i2.json", "--sigma", "A,r"]
    assert call(*args, "--depth", 1)[0] == EXIT_YES
    assert call(*args, "--depth", 2)[0] == EXIT_NO


def test_ui_compute_and_approximate(files):
    code, out, _ = call("ui-compute", files / "t1.tbox", "--sigma", "A,r", "--depth", 2, "--out", files / "ui.tbox")
    assert code == EXIT_YES
    ui = parse_tbox((files / "ui.tbox").read_text())
    assert equivalent_tboxes(ui, parse_tbox("A sub exists r. top"))
    code, out, _ = call("--json", "approximate", files / "t1.tbox", "--sigma", "A,r", "--depth", 1)
    v = Verdict.from_json(out)
    assert equivalent_tboxes(parse_tbox(v.output), parse_tbox("A sub exists r. top"))


def test_lower_bound(files):
    code, out, _ = call("--json", "lower-bound", 0, "--stats")
    v = Verdict.from_json(out)
    assert code == EXIT_YES and v.extra["m"] == 2
    assert parse_tbox(v.output)


def test_verdict_json_roundtrip():
    v = Verdict("no", ["a.json"], "bounded(3)", "text", {"k": 1})
    assert Verdict.from_json(v.to_json()) == v
    assert json.loads(v.to_json())["answer"] == "no"
    with pytest.raises(ValueError):
        Verdict.from_json('{"answer": "maybe"}')
    with pytest.raises(ValueError):
        Verdict.from_json('{"answer": "yes", "strength": "loose"}')
    assert Verdict("unknown").code == EXIT_NO


def test_type_space_cap_is_a_resource_error(files, monkeypatch):
    from alcui import typesys
    monkeypatch.setattr(typesys, "MAX_TYPE_ROWS", 16)
    wide = " and ".join(f"exists r. A{k}" for k in range(6))
    assert call("sat", files / "empty.tbox", wide)[0] == EXIT_CAP
