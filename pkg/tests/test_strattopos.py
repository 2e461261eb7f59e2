import random

import pytest

from laxglue import strattopos as st
from laxglue import suites
from laxglue.concretecats import CoPresheaf, CopshCat
from laxglue.errors import NotCosieve
from laxglue.poset import FinPoset, MonotoneMap, antichain, point, simplex
from laxglue.rlaxsections import find_section_iso, terminal_section

CIRCLE = st.pseudo_circle_space()


def stratum_obj(X, p, sizes):
    """Discrete-shaped strata here, so a stratum object is just a family of sets."""
    S = X.stratum(p)
    assert not S.covers
    return CoPresheaf(S, {q: tuple(range(sizes[q])) for q in S})


def test_axioms_hold():
    for X in suites.test_spaces():
        assert st.stratification_axioms(X)["ok"]


def test_non_monotone_stratification_rejected():
    with pytest.raises(ValueError):
        MonotoneMap(simplex(1), simplex(1), {"0": "1", "1": "0"})


def test_phi_restricts_to_the_stratum():
    X = st.identity_space(simplex(1))
    x = next(o for o in X.cat.objects(2) if o.sizes() == {"0": 2, "1": 1})
    assert st.phi(X, "0", x).sizes() == {"0": 2}
    y = next(o for o in CIRCLE.cat.objects(2) if o.sizes() == {"a": 2, "b": 1, "u": 1, "v": 2})
    assert st.phi(CIRCLE, "1", y).sizes() == {"u": 1, "v": 2}
    assert st.phi(CIRCLE, "0", y).sizes() == {"a": 2, "b": 1}


def test_rho_on_the_pseudo_circle():
    y = stratum_obj(CIRCLE, "1", {"u": 2, "v": 3})
    assert st.rho(CIRCLE, "1", y).sizes() == {"a": 6, "b": 6, "u": 2, "v": 3}
    z = stratum_obj(CIRCLE, "0", {"a": 2, "b": 0})
    assert st.rho(CIRCLE, "0", z).sizes() == {"a": 2, "b": 0, "u": 1, "v": 1}
    P = st.identity_space(point())
    w = stratum_obj(P, "*", {"*": 3})
    assert st.rho(P, "*", w).sizes() == {"*": 3}


def test_out_of_position_vanishing():
    X = st.identity_space(antichain(["0", "1"]))
    y = stratum_obj(X, "0", {"0": 2})
    assert CopshCat(X.stratum("1")).is_terminal(st.phi(X, "1", st.rho(X, "0", y)))
    for Y in suites.test_spaces():
        t = st.out_of_position(Y)
        assert t.ok


def test_gluing_pushforwards():
    X = st.identity_space(simplex(1))
    d = st.gluing_diagram(X)
    assert d.push("1", "0", stratum_obj(X, "1", {"1": 3})).sizes() == {"0": 3}
    dc = st.gluing_diagram(CIRCLE)
    assert dc.push("1", "0", stratum_obj(CIRCLE, "1", {"u": 2, "v": 2})).sizes() == {"a": 4, "b": 4}
    one = st.gluing_diagram(st.identity_space(point()))
    assert not one.tau and len(one.base) == 1


def test_transport_example():
    Q = CIRCLE.Q
    x = CoPresheaf(Q, {"a": (1, 2), "b": (1,), "u": (1,), "v": (1,)})
    s = st.transport(CIRCLE, x)
    assert not s.violations()
    assert s.x["0"].sizes() == {"a": 2, "b": 1} and s.x["1"].sizes() == {"u": 1, "v": 1}
    phi = s.phi[("1", "0")]
    assert phi.target.sizes() == {"a": 1, "b": 1} and len(set(phi.comps["a"].values())) == 1
    t = st.transport(CIRCLE, CIRCLE.cat.terminal())
    assert find_section_iso(t, terminal_section(st.gluing_diagram(CIRCLE))) is not None


def test_transport_of_rho_is_terminal_off_the_stratum():
    X = st.identity_space(antichain(["0", "1"]))
    s = st.transport(X, st.rho(X, "0", stratum_obj(X, "0", {"0": 2})))
    assert X.fiber("1").is_terminal(s.x["1"]) and s.x["0"].sizes() == {"0": 2}


def test_theta_basics():
    P = st.identity_space(point())
    s = st.transport(P, CoPresheaf(point(), {"*": (0, 1, 2)}))
    assert st.theta(P, s).sizes() == {"*": 3}
    term = terminal_section(st.gluing_diagram(CIRCLE))
    assert CIRCLE.cat.is_terminal(st.theta(CIRCLE, term))


def test_round_trips_on_the_pseudo_circle():
    for x in CIRCLE.cat.objects(2):
        assert CIRCLE.cat.is_iso(st.unit_comparison(CIRCLE, x))


def test_recovery():
    r = st.recover_stratification(CIRCLE, {"1"})
    assert r["ok"] and r["support"] == ["u", "v"]
    assert st.recover_stratification(CIRCLE, {"0", "1"})["support"] == ["a", "b", "u", "v"]
    assert st.recover_stratification(CIRCLE, set())["support"] == []
    with pytest.raises(NotCosieve):
        st.recover_stratification(CIRCLE, {"0"})


def test_identity_map_functoriality():
    X = st.identity_space(simplex(1))
    m = st.StratMap(X, X, MonotoneMap.identity(X.Q))
    assert st.map_functoriality(m, samples=10).ok


def test_cone_collapse_is_a_morphism_of_gluing_diagrams():
    t = st.map_functoriality(st.collapse_map(st.cone_space()), samples=30)
    assert t.ok and t.counts["image of a section map is a section map"][0] > 0


def test_pseudo_circle_collapse_breaks_cocartesian_edges():
    # y(u) one point, y(v) two points: rho puts y(u) x y(v) (two points) at a and at b, and g_*
    # then takes the limit over the whole space at the bottom of the target, giving
    # (y(u) x y(v))^2 (four points); the comparison is the diagonal, not a bijection.
    m = st.collapse_map(CIRCLE)
    y = stratum_obj(CIRCLE, "1", {"u": 1, "v": 2})
    e = m.push_map(st.unit(CIRCLE, "0", st.rho(CIRCLE, "1", y)))
    f = st.phi_map(m.target, "0", e)
    assert len(f.source.sets["0"]) == 2 and len(f.target.sets["0"]) == 4
    assert not m.target.cat.is_iso(f)
    assert not st._cocartesian_kept(m, "1", "0", y)


def test_small_spaces_reconstruct():
    for X in (st.identity_space(simplex(1)), st.identity_space(antichain(["0", "1"])), st.cone_space()):
        assert st.reconstruction_suite(X, samples=10, hom_pairs=10).ok


def test_stratmap_must_commute():
    X, Y = CIRCLE, st.identity_space(simplex(1))
    with pytest.raises(ValueError):
        st.StratMap(X, Y, MonotoneMap(X.Q, Y.Q, {"a": "0", "b": "1", "u": "1", "v": "1"}))


def test_witnesses_replay():
    """A witness rebuilt from JSON re-runs the same check and agrees with the original verdict."""
    x = CoPresheaf(CIRCLE.Q, {"a": (0, 1), "b": (0,), "u": (0,), "v": (0,)})
    w = st.space_witness(CIRCLE, x=x)()["replay"]
    t = st.space_checks(CIRCLE, w)
    assert t.ok and t.counts["theta(transport x) = x"] == [1, 0]
    y = stratum_obj(CIRCLE, "1", {"u": 1, "v": 2})
    w = st.space_witness(CIRCLE, map="collapse", p="1", q="0", y=y)()["replay"]
    assert st.space_checks(CIRCLE, w).counts["cocartesian edges preserved"] == [1, 1]
