"""Acceptance criteria 1-8, one test each. Every test prints a PASS/FAIL line."""

import random
import time

import pytest

from conftest import VERDICTS
from oracles import brute_force_right_adjoint
from laxglue import strattopos as st
from laxglue import suites
from laxglue.extendable import equivalence_check, gauge_twist, multiplicity_diagrams, random_multiplicity_diagram
from laxglue.laxdiagram import restrict_diagram
from laxglue.poset import Decomposition, simplex
from laxglue.rlaxsections import CheckTally, Recollement, enumerate_sections, find_section_iso
from laxglue.subdivision import chain_label, jx, subdivide

pytestmark = pytest.mark.acceptance


def verdict(n: int, ok: bool, detail: str, seconds: float, budget: float):
    ok = ok and seconds < budget
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}  ({seconds:.1f}s / {budget:.0f}s)"
    print(line)
    VERDICTS.append(line)
    return ok


def failures_text(t: CheckTally) -> str:
    return "; ".join(f"{k} {f}/{r}" for k, (r, f) in sorted(t.counts.items()) if f)


def test_criterion_1_subdivision_counts():
    t0 = time.perf_counter()
    counts = [len(subdivide(simplex(n))) for n in range(7)]
    sd1 = subdivide(simplex(1))
    shape = sorted((chain_label(a), chain_label(b)) for a, b in sd1.poset.covers)
    ok = counts == [2 ** (n + 1) - 1 for n in range(7)] and shape == [("[0]", "[0<1]"), ("[1]", "[0<1]")]
    assert verdict(1, ok, f"|sd(D^n)| n=0..6 = {counts}", time.perf_counter() - t0, 1.0)


ORACLE_DIAGRAMS = [
    ("graded-or", lambda P: suites.graded_power_family(P, "or", [], "graded-or")),
    ("graded-or-0", lambda P: suites.graded_power_family(P, "or", ["0"], "graded-or-0")),
    ("graded-xor-01", lambda P: suites.graded_power_family(P, "xor", ["0", "1"], "graded-xor-01")),
    ("power-left", lambda P: suites.power_family(P, "left")),
    ("power-null", lambda P: suites.power_family(P, "null")),
    ("power-right", lambda P: suites.power_family(P, "right")),
    ("power-and-zero", lambda P: suites.power_family(P, "and", zero_from="0")),
]


def test_criterion_2_jx_formula_against_oracle():
    t0 = time.perf_counter()
    P = simplex(2)
    dec = Decomposition.from_sieve(P, {"0", "1"})
    cospan = jx(P, dec, ["2"])
    ok = {chain_label(c) for c in cospan.elements} == {"[0<2]", "[1<2]", "[0<1<2]"}
    ok &= sorted((chain_label(a), chain_label(b)) for a, b in cospan.covers) == [("[0<2]", "[0<1<2]"), ("[1<2]", "[0<1<2]")]
    checked, bad = 0, []
    for name, make in ORACLE_DIAGRAMS:
        d = make(P)
        rec = Recollement(d, dec)
        cat = d.fibers["2"]
        for u in enumerate_sections(restrict_diagram(d, {"0", "1"}), 2):
            w = rec.j_star(u)
            f = d.can_at("0", "1", "2", u.x["0"])
            g = d.push_mor("1", "2", u.phi[("0", "1")])
            pb = cat.pullback(f, g).obj
            same = cat.find_iso(w.x["2"], pb) is not None
            same &= find_section_iso(w, brute_force_right_adjoint(d, u)) is not None
            checked += 1
            if not same:
                bad.append((name, u.key))
    ok &= checked > 0 and not bad
    detail = f"J_[2] = {sorted(chain_label(c) for c in cospan.elements)}; {checked} instances, {len(bad)} mismatches"
    assert verdict(2, ok, detail, time.perf_counter() - t0, 120.0), bad[:3]


def test_criterion_3_recollement_suite():
    ds = suites.toposic_family()
    r = suites.run_recollement_suite(ds, suites.SuiteConfig(samples=50))
    per = r.details["sections"]
    names = {"j^*j_* = id", "i^*i_* = id", "j^*i_* = terminal", "joint conservativity",
             "Hom(y, j_* u) = Hom(j^* y, u)", "Hom(y, i_* z) = Hom(i^* y, z)", "Hom(j_! u, y) = Hom(u, j^* y)"}
    ok = (r.tally.ok and len(ds) >= 10 and all(n >= 50 for n in per.values())
          and all(len(d.base) <= 4 for d in ds) and names <= set(r.tally.counts))
    detail = f"{len(ds)} diagrams, min {min(per.values())} sections each, {len(r.tally.failures)} failures"
    assert verdict(3, ok, detail, r.seconds, 600.0), failures_text(r.tally)


def test_criterion_4_fracture_square():
    r = suites.run_fracture_suite(suites.toposic_family(), suites.SuiteConfig(samples=50))
    run, failed = r.tally.counts["fracture square"]
    ok = r.tally.ok and run >= 200
    assert verdict(4, ok, f"fracture comparison iso on {run - failed}/{run} sections", r.seconds, 600.0)


def test_criterion_5_confluence():
    ds = suites.confluence_family()
    r = suites.run_confluence_suite(ds, suites.SuiteConfig(samples=10, max_len=5))
    longest = max(len(d.base) for d in ds)
    ok = r.tally.ok and len(ds) >= 20 and longest >= 5
    runs = sum(n for n, _ in r.tally.counts.values())
    detail = f"{len(ds)} diagrams, {runs} comparisons, {len(r.tally.failures)} discrepancies"
    assert verdict(5, ok, detail, r.seconds, 600.0), failures_text(r.tally)


def _n3_diagrams(rng):
    mds = [random_multiplicity_diagram(3, rng, min_mult=1) for _ in range(8)]
    mds += [random_multiplicity_diagram(3, rng) for _ in range(16)]
    return [gauge_twist(md, rng) for md in mds]


def test_criterion_6_extendable_equivalence():
    t0 = time.perf_counter()
    rng = random.Random(6)
    tally, per_n = CheckTally(), {}
    for n in (0, 1):
        mds = list(multiplicity_diagrams(n))
        for md in mds:
            equivalence_check(md, seed=n, tally=tally)
        per_n[n] = len(mds)
    mds = list(multiplicity_diagrams(2))
    for i, md in enumerate(mds):
        equivalence_check(md, cap=64, seed=i, tally=tally)
    per_n[2] = len(mds)
    mds = _n3_diagrams(rng)
    for i, md in enumerate(mds):
        equivalence_check(md, cap=64, seed=i, tally=tally)
    per_n[3] = len(mds)
    needed = {"one-generated iff spine extendable", "cube limits agree with edge isos", "gamma(extend(t)) = t",
              "extend(gamma(s)) = s", "gamma bijective on hom-sets"}
    ok = tally.ok and needed <= set(tally.counts) and per_n[2] == 337
    detail = f"diagrams per n {per_n}, {sum(r for r, _ in tally.counts.values())} checks, {len(tally.failures)} failures"
    assert verdict(6, ok, detail, time.perf_counter() - t0, 600.0), failures_text(tally)


def test_criterion_7_reconstruction():
    t0 = time.perf_counter()
    spaces = suites.test_spaces()
    tally = CheckTally()
    for X in spaces:
        tally.merge(st.reconstruction_suite(X, bound=2, samples=30, seed=7))
    needed = {"theta(transport x) = x", "transport(theta s) = s", "hom-set sizes match",
              "out-of-position vanishing", "recovered stratification"}
    ok = tally.ok and needed <= set(tally.counts)
    ok &= {"pseudo-circle", "three-strata", "delta1"} <= {X.name for X in spaces}
    detail = f"{len(spaces)} spaces, {tally.counts['theta(transport x) = x'][0]} sheaves round-tripped"
    assert verdict(7, ok, detail, time.perf_counter() - t0, 600.0), failures_text(tally)


def test_criterion_8_adjoint_equivalence_and_collapse():
    t0 = time.perf_counter()
    tally, low = CheckTally(), []
    for X in suites.test_spaces():
        t = suites.adjoint_equivalence_checks(X, samples=30, seed=8)
        if min(r for r, _ in t.counts.values() if r) < 1 or t.counts["unit x -> theta(transport x) is iso"][0] < 30:
            low.append(X.name)
        tally.merge(t)
    cone = st.map_functoriality(st.collapse_map(st.cone_space()), samples=30, seed=8)
    ok = tally.ok and cone.ok and not low
    detail = (f"{len(suites.test_spaces())} spaces x 30 samples, "
              f"cone collapse: {sum(r for r, _ in cone.counts.values())} structure checks")
    assert verdict(8, ok, detail, time.perf_counter() - t0, 600.0), failures_text(tally) + failures_text(cone)
