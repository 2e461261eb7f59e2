import itertools

import pytest
from hypothesis import given, settings

from conftest import posets
from laxglue.errors import ChainNotInCosieve, MaxMismatch, OutOfRange, SizeLimit
from laxglue.poset import Decomposition, FinPoset, all_sieves, point, simplex
from laxglue.subdivision import (
    cube,
    elementary_factorize,
    factorization_orders,
    jx,
    lr_factorize,
    sd1,
    sd_originating,
    subdivide,
)


def test_sd_of_arrow_is_a_cospan():
    sd = subdivide(simplex(1))
    assert set(sd.chains) == {("0",), ("1",), ("0", "1")}
    assert set(sd.poset.covers) == {(("0",), ("0", "1")), (("1",), ("0", "1"))}
    # only appending a larger top is cocartesian
    assert sd.cocart_edges == {(("0",), ("0", "1"))}
    assert sd.max_label[("0", "1")] == "1"


def test_sd_of_point():
    assert len(subdivide(point())) == 1


@pytest.mark.parametrize("n", range(7))
def test_simplex_chain_count(n):
    assert len(subdivide(simplex(n))) == 2 ** (n + 1) - 1


def test_size_limit(monkeypatch):
    monkeypatch.setenv("LAXGLUE_SIZE_LIMIT", "10")
    with pytest.raises(SizeLimit):
        subdivide(simplex(3))


def test_originating_chains():
    P = simplex(2)
    d = Decomposition.from_sieve(P, {"0", "1"})
    assert set(sd_originating(P, d).chains) == set(subdivide(P).chains) - {("2",)}
    assert len(sd_originating(P, Decomposition.from_sieve(P, P.elements))) == 7
    assert len(sd_originating(P, Decomposition.from_sieve(P, []))) == 0


def test_lr_factorize_examples():
    P = simplex(2)
    f = lr_factorize(("2",), ("0", "1", "2"), Decomposition.from_sieve(P, {"0", "1"}))
    assert f.through == ("0", "1", "2")
    g = lr_factorize(("1",), ("0", "1", "2"), Decomposition.from_sieve(P, {"0"}))
    assert g.through == ("0", "1")
    h = lr_factorize(("0", "2"), ("0", "2"), Decomposition.from_sieve(P, {"0"}))
    assert h.through == ("0", "2")


def test_jx_cospan():
    P = simplex(2)
    J = jx(P, Decomposition.from_sieve(P, {"0", "1"}), ["2"])
    assert set(J.elements) == {("0", "2"), ("1", "2"), ("0", "1", "2")}
    assert set(J.covers) == {(("0", "2"), ("0", "1", "2")), (("1", "2"), ("0", "1", "2"))}


def test_jx_empty_sieve():
    P = simplex(2)
    assert len(jx(P, Decomposition.from_sieve(P, []), ["2"])) == 0


def test_jx_longer_chain():
    P = simplex(2)
    J = jx(P, Decomposition.from_sieve(P, {"0"}), ["1", "2"])
    assert J.elements == (("0", "1", "2"),)


def test_jx_rejects_sieve_element():
    P = simplex(2)
    with pytest.raises(ChainNotInCosieve):
        jx(P, Decomposition.from_sieve(P, {"0"}), ["0"])


def test_sd1():
    s = sd1(2)
    assert set(s.chains) == {("0",), ("1",), ("2",), ("0", "1"), ("1", "2")}
    assert len(s.poset.covers) == 4


def test_cubes():
    assert len(cube(("0", "1"), 1)) == 1
    c = cube(("0", "3"), 3)
    assert len(c) == 4 and c.minimum() == ("0", "3")
    with pytest.raises(OutOfRange):
        cube(("0", "4"), 3)


def test_elementary_factorize_examples():
    P = simplex(3)
    mv = elementary_factorize(P, ("2",), ("0", "1", "2"))
    assert [(m.kind, m.element) for m in mv] == [("prepend", "0"), ("insert", "1")]
    assert elementary_factorize(P, ("0", "2"), ("0", "2")) == []
    mv = elementary_factorize(P, ("0", "3"), ("0", "1", "2", "3"))
    assert [(m.kind, m.element) for m in mv] == [("insert", "1"), ("insert", "2")]
    with pytest.raises(MaxMismatch):
        elementary_factorize(P, ("0",), ("0", "1"))


def test_factorization_orders_all_reassemble():
    P = simplex(4)
    sigma, tau = ("4",), ("0", "1", "2", "3", "4")
    orders = list(factorization_orders(P, sigma, tau))
    assert len(orders) == 24
    for mv in orders:
        assert mv[0].before == sigma and mv[-1].after == tau
        for a, b in zip(mv, mv[1:]):
            assert a.after == b.before


@settings(max_examples=40, deadline=None)
@given(posets(4))
def test_lr_factorization_is_unique(P):
    chains = subdivide(P).chains
    for s in all_sieves(P):
        d = Decomposition.from_sieve(P, s)
        for sigma in chains:
            for tau in chains:
                if not set(sigma) <= set(tau):
                    continue
                f = lr_factorize(sigma, tau, d)
                valid = [
                    mid for mid in chains
                    if set(sigma) <= set(mid) <= set(tau)
                    and all(e in d.sieve for e in set(mid) - set(sigma))
                    and all(e in d.cosieve for e in set(tau) - set(mid))
                ]
                assert valid == [f.through]


@settings(max_examples=40, deadline=None)
@given(posets(5))
def test_marks_and_max(P):
    sd = subdivide(P)
    for a, b in sd.poset.covers:
        assert P.leq(sd.max_label[a], sd.max_label[b])
        extra = set(b) - set(a)
        marked = (a, b) in sd.cocart_edges
        assert marked == (len(extra) == 1 and P.lt(a[-1], extra.pop()))


@settings(max_examples=30, deadline=None)
@given(posets(5))
def test_elementary_factorizations_reassemble(P):
    for tau in subdivide(P).chains:
        for k in range(1, len(tau) + 1):
            for sub in itertools.combinations(tau[:-1], k - 1):
                sigma = P.sort(list(sub) + [tau[-1]])
                mv = elementary_factorize(P, sigma, tau)
                cur = sigma
                for m in mv:
                    assert m.before == cur
                    cur = m.after
                assert cur == tau
                # smallest new element first
                assert [m.element for m in mv] == [e for e in tau if e not in sigma]


@settings(max_examples=30, deadline=None)
@given(posets(5))
def test_jx_is_finite_and_well_formed(P):
    for s in all_sieves(P):
        d = Decomposition.from_sieve(P, s)
        C = P.subposet(d.cosieve)
        for x in C.chains():
            for c in jx(P, d, x).elements:
                assert c[-len(x):] == tuple(x)
                assert all(e in d.sieve for e in c[: -len(x)]) and len(c) > len(x)
