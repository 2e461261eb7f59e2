import random

import pytest

from laxglue import strattopos as st
from laxglue import suites
from laxglue.concretecats import CopshCat, VectCat
from laxglue.laxdiagram import (
    FunctorSpec,
    Multiplicity,
    multiplicity_lax,
    restrict_diagram,
    sample_morphisms,
    sample_objects,
    strict_diagram,
    validate,
)
from laxglue.poset import point, simplex

V2 = VectCat(2)


def _mult_delta(n, corrupt=None):
    """Multiplicity one everywhere with identity cells, optionally zeroing one cell."""
    P = simplex(n)
    mats = {c: [[0 if c == corrupt else 1]] for c in P.chains() if len(c) == 3}
    return multiplicity_lax(P, {pq: 1 for pq in P.strict_pairs}, mats)


def test_strict_diagram_validates():
    for cat in (V2, CopshCat(point()), CopshCat(simplex(1))):
        rep = validate(strict_diagram(simplex(3), cat))
        assert rep.ok and rep.checks["cocycle"] > 0


def test_multiplicity_delta2_accepted():
    P = simplex(2)
    d = multiplicity_lax(P, {("0", "1"): 1, ("1", "2"): 2, ("0", "2"): 2}, {("0", "1", "2"): [[1, 0], [0, 1]]})
    assert validate(d).ok


def test_corrupted_cell_breaks_cocycle_at_the_four_chain():
    d = _mult_delta(3, corrupt=("0", "1", "2"))
    rep = validate(d)
    bad = {v.where for v in rep.violations if v.kind == "cocycle"}
    assert bad == {("0", "1", "2", "3")}
    assert validate(_mult_delta(3)).ok


def test_restrict_diagram():
    d = suites.power_family(simplex(2), "or")
    assert restrict_diagram(d, d.base.elements).base == d.base
    r = restrict_diagram(d, {"0", "1"})
    assert set(r.tau) == {("0", "1")} and not r.can
    one = restrict_diagram(d, {"2"})
    assert not one.tau and set(one.fibers) == {"2"}
    assert validate(r).ok


def test_functor_spec_preserves_identities_and_composites():
    F = FunctorSpec(V2, V2, [Multiplicity(3)])
    r = random.Random(0)
    x, y, z = (V2.obj(k) for k in (1, 2, 2))
    assert V2.eq(F.mor(V2.identity(y)), V2.identity(F.obj(y)))
    for f in sample_morphisms(V2, x, y, 3, r):
        for g in sample_morphisms(V2, y, z, 3, r):
            assert V2.eq(F.mor(V2.compose(g, f)), V2.compose(F.mor(g), F.mor(f)))


@pytest.mark.parametrize("d", suites.toposic_family(), ids=lambda d: d.name)
def test_built_in_toposic_diagrams_validate(d):
    rep = validate(d)
    assert rep.ok, rep.to_json()
    assert rep.checks.get("left-exactness", 0) > 0


@pytest.mark.parametrize("X", suites.test_spaces(), ids=lambda X: X.name)
def test_gluing_diagrams_validate(X):
    assert validate(st.gluing_diagram(X)).ok


def test_cells_are_natural_on_every_small_object():
    d = suites.power_family(simplex(2), "xor")
    cat0, cat2 = d.fibers["0"], d.fibers["2"]
    objs = list(cat0.objects(2))
    for x in objs:
        for y in objs:
            for f in cat0.homs(x, y):
                lhs = cat2.compose(d.push_mor("1", "2", d.push_mor("0", "1", f)), d.can_at("0", "1", "2", x))
                rhs = cat2.compose(d.can_at("0", "1", "2", y), d.push_mor("0", "2", f))
                assert cat2.eq(lhs, rhs)


def test_sample_objects_are_bounded():
    objs = sample_objects(CopshCat(simplex(1)), 2, 5, random.Random(1))
    assert objs and all(max(o.sizes().values()) <= 2 for o in objs)
