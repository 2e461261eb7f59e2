"""Fixed families of diagrams and stratified spaces used by the verification suites."""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from .extendable import random_multiplicity_diagram
from .laxdiagram import LaxDiagram, power_diagram, semigroup_tables, strict_diagram, validate
from .concretecats.finset import CopshCat
from .poset import Decomposition, FinPoset, all_sieves, antichain, simplex
from .rlaxsections import CheckTally, confluence_report, fracture, random_section, recollement_report
from . import strattopos as st
from .io import diagram_to_json

__all__ = [
    "SEMIGROUPS",
    "small_posets",
    "power_family",
    "graded_power_family",
    "toposic_family",
    "confluence_family",
    "test_spaces",
    "distinct_sections",
    "SuiteConfig",
    "run_recollement_suite",
    "run_fracture_suite",
    "run_confluence_suite",
    "proper_sieves",
    "adjoint_equivalence_checks",
    "section_replay",
    "section_checks",
    "attach_replay",
]

# associative operations on {0, .., k-1}
SEMIGROUPS = {
    "or": (2, max),
    "and": (2, min),
    "left": (2, lambda i, j: i),
    "right": (2, lambda i, j: j),
    "xor": (2, lambda i, j: i ^ j),
    "null": (2, lambda i, j: 0),
    "z3": (3, lambda i, j: (i + j) % 3),
}


def small_posets() -> dict:
    return {
        "d1": simplex(1),
        "d2": simplex(2),
        "d3": simplex(3),
        "vee": FinPoset(["0", "1", "2"], [("0", "1"), ("0", "2")]),
        "wedge": FinPoset(["0", "1", "2"], [("0", "2"), ("1", "2")]),
        "diamond": FinPoset(["0", "1", "2", "3"], [("0", "1"), ("0", "2"), ("1", "3"), ("2", "3")]),
        "zigzag": FinPoset(["0", "1", "2", "3"], [("0", "2"), ("1", "2"), ("1", "3")]),
        "pair": antichain(["0", "1"]),
    }


def power_family(P: FinPoset, op: str, zero_from=None, shape=None, tag: str = "") -> LaxDiagram:
    """Exponential pushforwards F -> F^k with cells from a semigroup; pairs leaving ``zero_from`` get exponent 0."""
    k, mul = SEMIGROUPS[op]
    exps = {(p, q): (0 if p == zero_from else k) for (p, q) in P.strict_pairs}
    return power_diagram(P, exps, semigroup_tables(P, exps, mul), shape=shape, name=tag or f"power-{op}")


# operations above with a two-sided identity at index 0
MONOIDS = ("or", "xor", "z3")


def graded_power_family(P: FinPoset, op: str, sieve, tag: str = "") -> LaxDiagram:
    """Exponent k on pairs leaving the sieve, exponent 1 elsewhere.

    Exponent-1 pairs carry only the identity of the monoid; since a pair starting
    outside the sieve ends outside it, products stay inside the allowed index sets.
    """
    if op not in MONOIDS:
        raise ValueError(f"{op} has no identity element")
    k, mul = SEMIGROUPS[op]
    S = frozenset(sieve)
    if not P.is_sieve(S):
        raise ValueError("exponents must be graded by a sieve")
    exps = {(p, q): (k if p in S else 1) for (p, q) in P.strict_pairs}
    tables = {}
    for c in P.chains():
        if len(c) == 3:
            p, q, r = c
            tables[c] = {(i, j): mul(i, j) for i in range(exps[(p, q)]) for j in range(exps[(q, r)])}
    return power_diagram(P, exps, tables, name=tag or f"graded-{op}")


def toposic_family() -> list:
    """Validated toposic diagrams over posets with at most four elements."""
    P = small_posets()
    ds = [
        power_family(P["d1"], "or", shape=simplex(1), tag="d1-square-over-arrow"),
        power_family(P["d2"], "or", tag="d2-or"),
        power_family(P["d2"], "left", tag="d2-left"),
        power_family(P["d2"], "xor", tag="d2-xor"),
        power_family(P["d2"], "and", zero_from="0", tag="d2-and-zero"),
        power_family(P["d3"], "right", tag="d3-right"),
        power_family(P["diamond"], "or", tag="diamond-or"),
        power_family(P["vee"], "null", tag="vee-null"),
        power_family(P["wedge"], "z3", tag="wedge-z3"),
        power_family(P["zigzag"], "and", tag="zigzag-and"),
        strict_diagram(P["d2"], CopshCat(simplex(1)), name="d2-strict-arrows"),
        st.gluing_diagram(st.pseudo_circle_space()),
        st.gluing_diagram(st.three_strata_space()),
    ]
    return ds


def confluence_family(seed: int = 0) -> list:
    """At least twenty diagrams, including four-simplices so chains of length five occur."""
    rng = random.Random(seed)
    P = small_posets()
    ds = list(toposic_family())
    d4 = simplex(4)
    for op, sv in (("or", ["0"]), ("xor", ["0", "1"]), ("z3", ["0"]), ("or", ["0", "1", "2"]), ("xor", [])):
        ds.append(graded_power_family(d4, op, sv, tag=f"d4-{op}-{len(sv)}"))
    for n in (3, 4):
        md = random_multiplicity_diagram(n, rng, min_mult=1)
        d = md.lax
        d.name = f"d{n}-vect"
        ds.append(d)
    ds.append(graded_power_family(P["d3"], "z3", ["0", "1"], tag="d3-z3-graded"))
    return ds


def test_spaces() -> list:
    return [
        st.pseudo_circle_space(),
        st.three_strata_space(),
        st.cone_space(),
        st.identity_space(simplex(1), "delta1"),
        st.identity_space(simplex(2), "delta2"),
        st.identity_space(antichain(["0", "1"]), "two-points"),
        st.identity_space(FinPoset(["0", "1", "2"], [("0", "1"), ("0", "2")]), "vee"),
    ]


def distinct_sections(d: LaxDiagram, n: int, rng: random.Random, bound: int = 2, tries: int = 2000) -> list:
    """Up to n pairwise different random sections."""
    seen, out = set(), []
    for _ in range(tries):
        if len(out) >= n:
            break
        s = random_section(d, rng, bound)
        if s.key not in seen:
            seen.add(s.key)
            out.append(s)
    return out


@dataclass
class SuiteConfig:
    bound: int = 2
    samples: int = 50
    seed: int = 0
    max_len: int = 5


@dataclass
class SuiteResult:
    tally: CheckTally
    seconds: float
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {**self.tally.to_json(), "details": self.details}


def proper_sieves(P: FinPoset) -> list:
    return [s for s in all_sieves(P) if 0 < len(s) < len(P)]


def section_replay(d: LaxDiagram, s, dec: Decomposition | None = None, partner=None) -> dict:
    """Everything ``section_checks`` needs to re-run the checks on one section."""
    from .io import diagram_to_json, section_to_json

    r = {"kind": "section", "diagram": diagram_to_json(d), "section": section_to_json(s)}
    if dec is not None:
        r["sieve"] = sorted(map(str, dec.sieve))
    if partner is not None:
        r["partner"] = section_to_json(partner)
    return r


def section_checks(r: dict, max_len: int = 5) -> CheckTally:
    """Recollement axioms, adjunctions and the fracture square (given a sieve) and confluence on one section."""
    from . import io

    d = io.diagram_from_json(r["diagram"])
    s = io.section_from_json(r["section"], d)
    tally = CheckTally()
    if "sieve" in r:
        dec = Decomposition.from_sieve(d.base, r["sieve"])
        y = io.section_from_json(r["partner"], d) if "partner" in r else s
        recollement_report(d, dec, [s], [y], tally=tally)
        f = fracture(s, dec)
        tally.record("fracture square", f.is_iso, {"problems": f.problems})
    else:
        confluence_report(s, max_len, tally=tally)
    return tally


def attach_replay(tally: CheckTally, d: LaxDiagram, s, dec: Decomposition | None = None, partner=None) -> CheckTally:
    """Attach the diagram and section to every failure so it can be re-run alone."""
    for f in tally.failures:
        w = f["witness"] if isinstance(f["witness"], dict) else {"detail": f["witness"]}
        w["replay"] = section_replay(d, s, dec, partner)
        f["witness"] = w
    return tally


def run_recollement_suite(diagrams: list, cfg: SuiteConfig) -> SuiteResult:
    t0 = time.perf_counter()
    tally, details = CheckTally(), {}
    for i, d in enumerate(diagrams):
        rep = validate(d, bound=cfg.bound, seed=cfg.seed)
        tally.record("diagram validates", rep.ok, lambda d=d, rep=rep: {
            "violations": rep.to_json(),
            "replay": {"kind": "diagram", "diagram": diagram_to_json(d), "bound": cfg.bound, "seed": cfg.seed}})
        rng = random.Random(cfg.seed * 1000 + i)
        secs = distinct_sections(d, cfg.samples, rng, cfg.bound)
        details[d.name] = len(secs)
        sieves = proper_sieves(d.base)
        for k, s in enumerate(secs):
            dec = Decomposition.from_sieve(d.base, sieves[k % len(sieves)])
            y = secs[(k + 1) % len(secs)]
            tally.merge(attach_replay(recollement_report(d, dec, [s], [y]), d, s, dec, y))
    return SuiteResult(tally, time.perf_counter() - t0, {"sections": details})


def run_fracture_suite(diagrams: list, cfg: SuiteConfig) -> SuiteResult:
    t0 = time.perf_counter()
    tally = CheckTally()
    for i, d in enumerate(diagrams):
        rng = random.Random(cfg.seed * 1000 + i)
        sieves = proper_sieves(d.base)
        for k, s in enumerate(distinct_sections(d, cfg.samples, rng, cfg.bound)):
            dec = Decomposition.from_sieve(d.base, sieves[k % len(sieves)])
            r = fracture(s, dec)
            one = CheckTally()
            one.record("fracture square", r.is_iso, {"problems": r.problems})
            tally.merge(attach_replay(one, d, s, dec))
    return SuiteResult(tally, time.perf_counter() - t0)


def run_confluence_suite(diagrams: list, cfg: SuiteConfig) -> SuiteResult:
    t0 = time.perf_counter()
    tally = CheckTally()
    for i, d in enumerate(diagrams):
        rng = random.Random(cfg.seed * 1000 + i)
        for s in distinct_sections(d, cfg.samples, rng, cfg.bound):
            tally.merge(attach_replay(confluence_report(s, cfg.max_len), d, s))
    return SuiteResult(tally, time.perf_counter() - t0, {"diagrams": len(diagrams)})


def adjoint_equivalence_checks(X: st.StratSpace, samples: int = 30, seed: int = 0, bound: int = 2) -> CheckTally:
    """Unit and counit of the gluing equivalence on random sheaves and sections, plus phi -| rho."""
    rng = random.Random(seed)
    tally = CheckTally()
    d = st.gluing_diagram(X)
    for i in range(samples):
        x = st.random_sheaf(X, rng, bound)
        tally.record("unit x -> theta(transport x) is iso", X.cat.is_iso(st.unit_comparison(X, x)), st.space_witness(X, x=x))
        s = random_section(d, rng, bound)
        tally.record("counit transport(theta s) -> s is iso", st._counit_ok(X, s), st.space_witness(X, s=s))
    for p in X.P:
        ys = list(X.fiber(p).objects(bound))
        for _ in range(max(1, samples // 5)):
            st.adjunction_check(X, p, st.random_sheaf(X, rng, bound), rng.choice(ys), tally)
    return tally
