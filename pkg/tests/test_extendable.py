import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as hs

from laxglue.concretecats import VectObj
from laxglue.errors import NotExtendable
from laxglue.extendable import (
    MultiplicityDiagram,
    Sd1Section,
    complete_sections,
    count_spines,
    enumerate_spines,
    equivalence_check,
    extend,
    fiber_product_count,
    gamma_restrict,
    gauge_twist,
    is_extendable,
    is_one_generated,
    multiplicity_diagrams,
    norm_fiber_sequences,
    random_multiplicity_diagram,
    staircase_recollement,
)
from laxglue.poset import Decomposition
from laxglue.rlaxsections import Recollement, find_section_iso, random_section, terminal_section


def md2(m01=1, m12=1, m02=1, can=None):
    can = [[1]] if can is None else can
    return MultiplicityDiagram(2, {(0, 1): m01, (1, 2): m12, (0, 2): m02}, {(0, 1, 2): can})


def spine(md, dims, seed=0):
    """First spine with the given dimensions and every arrow drawn at random."""
    r = random.Random(seed)
    d = md.lax
    cands = [t for t in enumerate_spines(d, md.n, 2) if [v.dim for v in t.V] == dims]
    return r.choice(cands)


def test_gamma_restrict_repackages():
    md = MultiplicityDiagram(1, {(0, 1): 2}, {})
    s = random_section(md.lax, random.Random(0))
    t = gamma_restrict(s)
    assert [v.dim for v in t.V] == [s.x["0"].dim, s.x["1"].dim]
    assert t.w[1].key == s.phi[("0", "1")].key
    s2 = random_section(md2().lax, random.Random(1))
    assert set(gamma_restrict(s2).w) == {1, 2}
    term = gamma_restrict(terminal_section(md2().lax))
    assert all(v.dim == 0 for v in term.V)


def test_extendable_trivial_below_two():
    md = MultiplicityDiagram(1, {(0, 1): 1}, {})
    for t in enumerate_spines(md.lax, 1, 2):
        assert is_extendable(t).ok


def test_extendable_when_cell_is_invertible():
    t = spine(md2(can=[[1]]), [1, 1, 1])
    assert is_extendable(t).ok


def test_not_extendable_on_shape_mismatch():
    md = md2(m01=1, m12=1, m02=2, can=[[1, 1]])
    t = spine(md, [1, 1, 1])
    v = is_extendable(t)
    assert not v.ok and v.witnesses == ["[0<1<2]"]
    with pytest.raises(NotExtendable):
        extend(t)


def test_one_generated_trivial_cases():
    md = MultiplicityDiagram(1, {(0, 1): 2}, {})
    s = random_section(md.lax, random.Random(2))
    v = is_one_generated(s)
    assert v.cube_limits.ok and v.edge_isos.ok
    strict = md2()
    for t in enumerate_spines(strict.lax, 2, 1):
        for c in complete_sections(t):
            v = is_one_generated(c)
            assert v.agree and v.cube_limits.ok == is_extendable(t).ok


def test_corrupted_cell_breaks_one_generation():
    md = md2(can=[[0]])
    t = spine(md, [1, 1, 1])
    for s in complete_sections(t):
        v = is_one_generated(s)
        assert not v.cube_limits.ok and not v.edge_isos.ok


def test_extend_over_delta2_matches_the_matrix_formula():
    md = md2(m01=1, m12=2, m02=2, can=[[1, 1], [0, 1]])
    d = md.lax
    t = spine(md, [1, 2, 2], seed=3)
    e = extend(t)
    assert not e.violations()
    M = np.array([[1, 1], [0, 1]])
    Minv = np.array([[1, 1], [0, 1]])  # self-inverse over F_2
    assert ((M @ Minv) % 2 == np.eye(2, dtype=int)).all()
    tw1 = d.push_mor("1", "2", t.w[1]).mat
    expected = (Minv @ ((tw1 @ t.w[2].mat) % 2)) % 2
    assert (e.phi[("0", "2")].mat % 2 == expected).all()
    assert gamma_restrict(e).key == t.key
    assert is_one_generated(e).cube_limits.ok


def test_extend_round_trip_on_random_delta3():
    r = random.Random(5)
    for _ in range(3):
        md = random_multiplicity_diagram(3, r, invertible_bias=1.0, min_mult=1)
        for t in enumerate_spines(md.lax, 3, 1, cap=20, rng=r):
            if not is_extendable(t).ok:
                continue
            e = extend(t)
            assert gamma_restrict(e).key == t.key
            for s in complete_sections(t):
                if is_one_generated(s).cube_limits.ok:
                    assert find_section_iso(extend(gamma_restrict(s)), s) is not None


@pytest.mark.parametrize("n, k", [(1, 0), (2, 0), (2, 1)])
def test_staircase_recollement(n, k):
    r = random.Random(n * 10 + k)
    md = random_multiplicity_diagram(n, r, min_mult=1)
    spines = list(enumerate_spines(md.lax, n, 1))
    assert staircase_recollement(md.lax, n, k, spines).ok


def test_staircase_j_star_inverts_top_arrow():
    md = md2(m01=1, m12=1, m02=1)
    spines = list(enumerate_spines(md.lax, 2, 1))
    t = staircase_recollement(md.lax, 2, 0, spines)
    run, failed = t.counts["j_* image inverts the new arrows"]
    assert run == len(spines) > 0 and failed == 0


def test_norm_fiber_sequences():
    md = MultiplicityDiagram(1, {(0, 1): 2}, {})
    d = md.lax
    rec = Recollement(d, Decomposition.from_sieve(d.base, {"0"}))
    r = random.Random(6)
    for _ in range(10):
        s = random_section(d, r)
        out = norm_fiber_sequences(s)
        assert out["ok"] and out["rank-nullity"]
        jsh = rec.j_shriek(rec.j_upper(s))
        assert norm_fiber_sequences(jsh)["dim i^!"] == 0
        ist = rec.i_star(rec.i_upper(s))
        assert norm_fiber_sequences(ist)["dim i^!"] == s.x["1"].dim


def test_spines_match_the_iterated_fiber_product():
    r = random.Random(7)
    for n in (1, 2, 3):
        md = random_multiplicity_diagram(n, r)
        assert count_spines(md.lax, n, bound=1) == fiber_product_count(md.lax, n, bound=1)


def test_exhaustive_delta1():
    for md in multiplicity_diagrams(1):
        assert equivalence_check(md).ok


@settings(max_examples=10, deadline=None)
@given(hs.integers(0, 10**6))
def test_equivalence_on_random_delta2(seed):
    r = random.Random(seed)
    md = random_multiplicity_diagram(2, r)
    assert equivalence_check(md, bound=2, cap=30, seed=seed).ok


@settings(max_examples=10, deadline=None)
@given(hs.integers(0, 10**6))
def test_gauge_twist_keeps_the_cocycle(seed):
    r = random.Random(seed)
    md = gauge_twist(random_multiplicity_diagram(3, r), r)
    assert not md.cocycle_failures()


def test_cocycle_failure_detected():
    md = MultiplicityDiagram(3, {(i, j): 1 for i in range(4) for j in range(i + 1, 4)},
                             {(i, j, k): [[1]] for i in range(4) for j in range(i + 1, 4) for k in range(j + 1, 4)})
    assert not md.cocycle_failures()
    bad = MultiplicityDiagram(3, md.mult, {**md.can, (0, 1, 2): [[0]]})
    assert bad.cocycle_failures()
