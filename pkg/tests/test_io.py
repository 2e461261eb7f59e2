import json
import random

import pytest

from laxglue import io, suites
from laxglue import strattopos as st
from laxglue.errors import CycleDetected, ParseError
from laxglue.extendable import random_multiplicity_diagram
from laxglue.poset import simplex


def _cycle(obj, loader):
    text = io.dumps(obj)
    return io.dumps(loader(json.loads(text))), text


@pytest.mark.parametrize("d", suites.confluence_family(), ids=lambda d: d.name)
def test_diagram_and_section_round_trip(d):
    again, text = _cycle(io.diagram_to_json(d), lambda doc: io.diagram_to_json(io.diagram_from_json(doc)))
    assert again == text
    d2 = io.diagram_from_json(json.loads(text))
    for s in suites.distinct_sections(d, 3, random.Random(0), 2):
        doc = io.section_to_json(s)
        back = io.section_from_json(doc, d2)
        assert io.dumps(io.section_to_json(back)) == io.dumps(doc)


def test_space_round_trip():
    for X in suites.test_spaces():
        assert io.space_from_json(json.loads(io.dumps(X.to_json()))).to_json() == X.to_json()


def test_multiplicity_round_trip():
    md = random_multiplicity_diagram(3, random.Random(2))
    assert io.multiplicity_from_json(md.to_json()).to_json() == md.to_json()


def test_multiplicity_cocycle_violation_is_located():
    mult = {f"{a}<{b}": 1 for a in range(4) for b in range(a + 1, 4)}
    can = {c: [[1]] for c in ("0<1<2", "0<1<3", "0<2<3", "1<2<3")}
    io.multiplicity_from_json({"n": 3, "p": 2, "mult": mult, "can": can})
    can["0<1<2"] = [[0]]
    with pytest.raises(ParseError, match="0<1<2<3") as e:
        io.multiplicity_from_json({"n": 3, "p": 2, "mult": mult, "can": can})
    assert e.value.locus == "<input>:can"


def test_default_field_applies_only_without_p():
    doc = {"n": 1, "mult": {"0<1": 1}, "can": {}}
    assert io.multiplicity_from_json(doc, default_p=3).p == 3
    assert io.multiplicity_from_json({**doc, "p": 2}, default_p=3).p == 2


@pytest.mark.parametrize("doc, locus", [
    ({"elements": ["0", "1"], "leq": [["0"]]}, "<input>:leq[0]"),
    ({"elements": ["0", "1"], "leq": [["0", "9"]]}, "<input>:leq[0]"),
    ({"elements": "01"}, "<input>:elements"),
    ({"leq": []}, "<input>"),
])
def test_poset_errors_carry_a_locus(doc, locus):
    with pytest.raises(ParseError) as e:
        io.poset_from_json(doc)
    assert e.value.locus == locus


def test_cycle_error_has_locus():
    with pytest.raises(CycleDetected) as e:
        io.poset_from_json({"elements": ["a", "b"], "leq": [["a", "b"], ["b", "a"]]})
    assert e.value.locus == "<input>:leq"


def test_file_errors(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{not json")
    with pytest.raises(ParseError) as e:
        io.load_poset(p)
    assert str(p) in str(e.value)
    with pytest.raises(ParseError):
        io.load_poset(tmp_path / "missing.json")


def test_relative_file_reference(tmp_path):
    (tmp_path / "p.json").write_text(io.dumps(simplex(1).to_json()))
    doc = {"space": "p.json", "strat_poset": "p.json", "pi": {"0": "0", "1": "1"}}
    (tmp_path / "space.json").write_text(io.dumps(doc))
    X = io.load_space(tmp_path / "space.json")
    assert X.to_json() == st.identity_space(simplex(1)).to_json()


@pytest.mark.parametrize("phi", [[5], [0, 0]])
def test_invalid_section_is_rejected(phi):
    d = suites.power_family(simplex(1), "or")
    doc = {"x": {"0": ["0"], "1": ["0"]}, "phi": {"0<1": phi}}
    with pytest.raises(ParseError) as e:
        io.section_from_json(doc, d)
    assert e.value.locus.startswith("<input>:phi.0<1")


def test_object_json_shorthand():
    X = st.pseudo_circle_space()
    x = next(iter(X.cat.objects(1)))
    assert io.object_from_json(io.object_to_json(x), X.cat).key == x.key
    fib = X.fiber("1")
    y = io.object_from_json({"sets": {"u": ["p"], "v": ["q", "r"]}}, fib)
    assert y.sizes() == {"u": 1, "v": 2}
