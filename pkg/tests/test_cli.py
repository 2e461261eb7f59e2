import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from laxglue.cli import main
from laxglue.replay import failures_in, reproduces

DATA = Path(__file__).parent / "data"


def run(*args):
    return CliRunner().invoke(main, [str(a) for a in args])


def body(res):
    doc = json.loads(res.output)
    doc.pop("timing", None)
    return doc


def test_subdivide_delta1():
    res = run("subdivide", DATA / "d1.json", "--json")
    assert res.exit_code == 0
    doc = json.loads(res.output)
    assert doc["result"]["subdivision"]["chains"] == [["0"], ["0", "1"], ["1"]]


def test_reconstruction_verify_is_deterministic():
    args = ("verify", DATA / "circle.json", "--suite", "reconstruction", "--max-size", 2, "--seed", 7, "--json")
    a, b = run(*args), run(*args)
    assert a.exit_code == 0, a.output
    assert body(a) == body(b)
    assert body(a)["failures"] == []


def test_malformed_leq_exits_2_with_locus():
    res = run("subdivide", DATA / "bad_leq.json")
    assert res.exit_code == 2
    assert "bad_leq.json:leq[0]" in res.output


def test_cycle_exits_2():
    res = run("subdivide", DATA / "cyclic.json")
    assert res.exit_code == 2
    assert "CycleDetected" in res.output


def test_jx_requires_a_chain():
    assert run("jx", DATA / "d2.json", "--sieve", "0,1").exit_code == 2


def test_jx_cospan():
    res = run("jx", DATA / "d2.json", "--sieve", "0,1", "--at", "2", "--json")
    assert res.exit_code == 0, res.output
    objs = {tuple(c) for c in json.loads(res.output)["result"]["chains"]}
    assert objs == {("0", "2"), ("1", "2"), ("0", "1", "2")}


@pytest.mark.parametrize("cmd", ["glue", "fracture"])
def test_section_commands_pass(cmd):
    res = run(cmd, DATA / "d2_or.json", DATA / "d2_or_section.json", "--sieve", "0")
    assert res.exit_code == 0, res.output


@pytest.mark.parametrize("check", ["extendable", "one-generated", "roundtrip"])
def test_extendable_command(check):
    res = run("extendable", DATA / "mult_d2.json", "--check", check)
    assert res.exit_code == 0, res.output


def test_reconstruct_with_sheaf():
    res = run("reconstruct", DATA / "circle.json", "--sheaf", DATA / "sheaf_circle.json")
    assert res.exit_code == 0, res.output


def test_failing_suite_exits_1_and_replays(tmp_path):
    out = tmp_path / "rep.json"
    res = run("verify", DATA / "circle.json", "--suite", "functoriality", "--out", out)
    assert res.exit_code == 1
    doc = json.loads(out.read_text())
    fails = failures_in(doc)
    assert fails and all(reproduces(f) for f in fails)
    # a single failure, written alone, replays through the CLI as well
    one = tmp_path / "one.json"
    one.write_text(json.dumps(fails[0]))
    again = run("replay", one, "--json")
    assert again.exit_code == 1
    assert json.loads(again.output)["result"]["summary"] == {"witnesses": 1, "reproduced": 1}


def test_cone_functoriality_passes():
    assert run("verify", DATA / "cone.json", "--suite", "functoriality").exit_code == 0


def test_summary_view_lists_checks():
    res = run("glue", DATA / "d2_or.json", DATA / "d2_or_section.json", "--sieve", "0")
    assert res.output.startswith("glue: PASS")
    assert "joint conservativity" in res.output
