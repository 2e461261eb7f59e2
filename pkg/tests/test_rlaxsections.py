import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as hs

from oracles import brute_force_right_adjoint, hom_count
from laxglue import suites
from laxglue.errors import NotOriginating
from laxglue.laxdiagram import restrict_diagram
from laxglue.poset import Decomposition, simplex
from laxglue.rlaxsections import (
    CheckTally,
    Recollement,
    Section,
    bar_extension,
    confluence_report,
    delta1_presentation,
    enumerate_sections,
    eval_chain,
    eval_inclusion,
    find_section_iso,
    fracture,
    from_triple,
    is_iso_map,
    random_section,
    recollement_report,
    section_homs,
    terminal_section,
    triple_homs,
)

D2 = suites.power_family(simplex(2), "or")
D1 = suites.power_family(simplex(1), "xor")


def _sample(d, seed=0, n=1):
    return suites.distinct_sections(d, n, random.Random(seed), 2)


@pytest.fixture(scope="module")
def s2():
    # a section with nonempty values everywhere
    return next(s for s in _sample(D2, 4, 20) if all(s.x[p].sizes()["*"] > 0 for p in "012"))


def test_eval_chain(s2):
    d = D2
    assert eval_chain(s2, ("1",)).key == s2.x["1"].key
    assert eval_chain(s2, ("0", "2")).key == d.push("0", "2", s2.x["0"]).key
    assert eval_chain(s2, ("0", "1", "2")).key == d.push("1", "2", d.push("0", "1", s2.x["0"])).key


def test_eval_inclusion_elementary_cases(s2):
    d, cat = D2, D2.fibers["2"]
    assert eval_inclusion(s2, ("1",), ("0", "1")).key == s2.phi[("0", "1")].key
    assert eval_inclusion(s2, ("0", "2"), ("0", "1", "2")).key == d.can_at("0", "1", "2", s2.x["0"]).key
    whole = eval_inclusion(s2, ("2",), ("0", "1", "2"))
    via_can = cat.compose(d.can_at("0", "1", "2", s2.x["0"]), s2.phi[("0", "2")])
    via_tau = cat.compose(d.push_mor("1", "2", s2.phi[("0", "1")]), s2.phi[("1", "2")])
    assert whole.key == via_can.key == via_tau.key


def test_bar_extension(s2):
    dec = Decomposition.from_sieve(D2.base, {"0", "1"})
    s0 = Recollement(D2, dec).j_upper(s2)
    assert bar_extension(s0, ("0", "1"), D2).key == eval_chain(s0, ("0", "1")).key
    assert bar_extension(s0, ("0", "1", "2"), D2).key == D2.push("1", "2", D2.push("0", "1", s2.x["0"])).key
    with pytest.raises(NotOriginating):
        bar_extension(s0, ("2",), D2)


def test_restrictions_on_delta1():
    s = _sample(D1, 1)[0]
    rec = Recollement(D1, Decomposition.from_sieve(D1.base, {"0"}))
    assert rec.j_upper(s).x == {"0": s.x["0"]}
    assert rec.i_upper(s).x == {"1": s.x["1"]}
    full = Recollement(D1, Decomposition.from_sieve(D1.base, {"0", "1"}))
    assert full.j_upper(s).key == s.key


def test_j_star_over_delta1_is_the_pushforward():
    s = _sample(D1, 2)[0]
    rec = Recollement(D1, Decomposition.from_sieve(D1.base, {"0"}))
    j = rec.j_star(rec.j_upper(s))
    tx = D1.push("0", "1", s.x["0"])
    assert D1.fibers["1"].find_iso(j.x["1"], tx) is not None
    assert D1.fibers["1"].is_iso(j.phi[("0", "1")])
    assert rec.gluing(rec.j_upper(s)).x["1"].sizes() == tx.sizes()


def test_j_star_over_delta2_is_the_pullback():
    d = D2
    rec = Recollement(d, Decomposition.from_sieve(d.base, {"0", "1"}))
    cat = d.fibers["2"]
    for s in _sample(d, 5, 15):
        u = rec.j_upper(s)
        f = d.can_at("0", "1", "2", u.x["0"])
        g = d.push_mor("1", "2", u.phi[("0", "1")])
        pb = cat.pullback(f, g).obj
        assert cat.find_iso(rec.j_star(u).x["2"], pb) is not None


def test_full_and_empty_sieves():
    s = _sample(D2, 3)[0]
    full = Recollement(D2, Decomposition.from_sieve(D2.base, D2.base.elements))
    assert find_section_iso(full.j_star(full.j_upper(s)), s) is not None
    empty = Recollement(D2, Decomposition.from_sieve(D2.base, []))
    assert find_section_iso(empty.i_star(empty.i_upper(s)), s) is not None


def test_i_star_and_j_shriek_on_delta1():
    s = _sample(D1, 4)[0]
    rec = Recollement(D1, Decomposition.from_sieve(D1.base, {"0"}))
    i = rec.i_star(rec.i_upper(s))
    assert D1.fibers["0"].is_terminal(i.x["0"]) and i.x["1"].key == s.x["1"].key
    j = rec.j_shriek(rec.j_upper(s))
    assert D1.fibers["1"].is_initial(j.x["1"]) and j.x["0"].key == s.x["0"].key


def test_j_shriek_hom_counts_match():
    rec = Recollement(D2, Decomposition.from_sieve(D2.base, {"0", "1"}))
    secs = _sample(D2, 6, 6)
    for u_src, y in zip(secs, secs[1:]):
        u = rec.j_upper(u_src)
        assert hom_count(rec.j_shriek(u), y) == hom_count(u, rec.j_upper(y))


def test_fracture_examples():
    d = D2
    dec = Decomposition.from_sieve(d.base, {"0", "1"})
    rec = Recollement(d, dec)
    for s in _sample(d, 7, 10):
        assert fracture(s, dec).is_iso
        assert fracture(rec.i_star(rec.i_upper(s)), dec).is_iso
        assert fracture(rec.j_star(rec.j_upper(s)), dec).is_iso


def test_trivial_decomposition_report_passes():
    secs = _sample(D2, 8, 3)
    t = recollement_report(D2, Decomposition.from_sieve(D2.base, D2.base.elements), secs)
    assert t.ok


def test_delta1_report_on_twenty_sections():
    secs = _sample(D1, 9, 20)
    assert len(secs) == 20
    t = recollement_report(D1, Decomposition.from_sieve(D1.base, {"0"}), secs)
    assert t.ok and t.counts["joint conservativity"][0] > 0


def test_delta1_presentation():
    s = _sample(D1, 10)[0]
    u, z, a = delta1_presentation(s)
    assert (u, z, a) == (s.x["0"], s.x["1"], s.phi[("0", "1")])
    assert from_triple(D1, u, z, a).key == s.key
    t = terminal_section(D1)
    u, z, a = delta1_presentation(t)
    assert D1.fibers["1"].is_terminal(z) and D1.fibers["1"].is_terminal(a.target)
    secs = _sample(D1, 11, 5)
    for x in secs:
        for y in secs:
            assert hom_count(x, y) == sum(1 for _ in triple_homs(D1, delta1_presentation(x), delta1_presentation(y)))


def test_invalid_section_reports_cocycle():
    s = _sample(D2, 12)[0]
    d = D2
    cat = d.fibers["2"]
    others = [f for f in cat.homs(s.x["2"], d.push("0", "2", s.x["0"])) if f.key != s.phi[("0", "2")].key]
    if others:
        bad = Section(d, s.x, {**s.phi, ("0", "2"): others[0]})
        assert bad.violations()


@pytest.mark.parametrize("name", ["d2-or", "d2-left"])
def test_confluence_on_families(name):
    d = {x.name: x for x in suites.toposic_family()}[name]
    for s in _sample(d, 13, 5):
        t = confluence_report(s)
        assert t.ok


@settings(max_examples=15, deadline=None)
@given(hs.integers(0, 10**6))
def test_recollement_on_random_sections(seed):
    d = suites.power_family(simplex(3), "right")
    r = random.Random(seed)
    s, y = random_section(d, r), random_section(d, r)
    sieve = r.choice(suites.proper_sieves(d.base))
    assert recollement_report(d, Decomposition.from_sieve(d.base, sieve), [s], [y]).ok


def _oracle_agrees(d):
    rec = Recollement(d, Decomposition.from_sieve(d.base, {"0", "1"}))
    sub = restrict_diagram(d, {"0", "1"})
    n = 0
    for u in enumerate_sections(sub, 2):
        w = brute_force_right_adjoint(d, u)
        assert find_section_iso(rec.j_star(u), w) is not None
        n += 1
    return n


def test_j_star_matches_brute_force_right_adjoint():
    assert _oracle_agrees(suites.graded_power_family(simplex(2), "or", [], "oracle")) == 11
    assert _oracle_agrees(suites.power_family(simplex(2), "left")) == 25


def test_tally_witnesses_are_lazy():
    t = CheckTally()
    calls = []
    t.record("x", True, lambda: calls.append(1))
    t.record("x", False, lambda: calls.append(2) or {"k": 1})
    assert calls == [2] and t.failures == [{"check": "x", "witness": {"k": 1}}]
    assert t.counts["x"] == [2, 1] and not t.ok
