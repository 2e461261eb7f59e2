"""Stratified finite spaces and the reconstruction of sheaves from their strata.

A sheaf on a finite Alexandroff space Q is a copresheaf Q -> FinSet.  A
monotone map pi: Q -> P stratifies Q; the stratum at p is Q_p = pi^-1(p).
``phi(p, -)`` restricts to Q_p; its right adjoint ``rho(p, -)`` extends by a
point over the higher strata and then right Kan extends to all of Q.  The
gluing diagram lives over P^op: the pushforward from p to q (for q < p in P)
is phi(q) . rho(p), and sections of it are equivalent to sheaves on Q.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import cached_property
from itertools import product

from .concretecats import finset as fs
from .concretecats.base import ShapedDiagram
from .concretecats.finset import CopshCat, CoPresheaf, PresheafMap, POINT
from .errors import NotCosieve, ValidationFailed
from .laxdiagram import ExtendBySingleton, FunctionCan, FunctorSpec, LaxDiagram, Restrict, Rke
from .poset import Decomposition, FinPoset, MonotoneMap, all_cosieves, point
from .rlaxsections import (
    CheckTally,
    Recollement,
    Section,
    SectionMap,
    eval_chain,
    eval_inclusion,
    find_section_iso,
    is_iso_map,
    random_section,
    section_homs,
)
from .subdivision import subdivide

__all__ = [
    "StratSpace",
    "StratMap",
    "stratification_axioms",
    "phi",
    "phi_map",
    "rho",
    "rho_map",
    "unit",
    "out_of_position",
    "gluing_diagram",
    "transport",
    "theta",
    "theta_cone",
    "unit_comparison",
    "counit_comparison",
    "subterminal_section",
    "recover_stratification",
    "adjunction_check",
    "sheaf_recollement_agreement",
    "collapse_map",
    "gluing_map_on_sections",
    "map_functoriality",
    "cone_space",
    "reconstruction_suite",
    "random_sheaf",
    "pseudo_circle_space",
    "three_strata_space",
    "identity_space",
    "space_checks",
    "space_witness",
]


def space_witness(X: "StratSpace", info: dict | None = None, **items):
    """A lazily built failure witness carrying everything ``space_checks`` needs to re-run it."""

    def build():
        from . import io

        r = {"kind": "space", "space": X.to_json()}
        for k, v in items.items():
            if isinstance(v, Section):
                r[k] = io.section_to_json(v)
            elif isinstance(v, CoPresheaf):
                r[k] = io.object_to_json(v)
            elif k == "cosieve":
                r[k] = sorted(map(str, v))
            else:
                r[k] = v
        return {**(info or {}), "replay": r}

    return build


@dataclass(frozen=True)
class StratSpace:
    Q: FinPoset
    P: FinPoset
    pi: MonotoneMap
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if self.pi.source != self.Q or self.pi.target != self.P:
            raise ValueError("stratification map must go from the space to the stratifying poset")

    @cached_property
    def _strata(self) -> dict:
        return {p: self.Q.subposet(self.pi.preimage([p])) for p in self.P}

    @cached_property
    def _opens(self) -> dict:
        return {p: self.Q.subposet(self.pi.preimage(self.P.up(p))) for p in self.P}

    def stratum(self, p) -> FinPoset:
        return self._strata[p]

    def W(self, p) -> FinPoset:
        """pi^-1(P^{>=p}), an open (cosieve) neighbourhood of the stratum."""
        return self._opens[p]

    @cached_property
    def cat(self) -> CopshCat:
        return CopshCat(self.Q)

    def fiber(self, p) -> CopshCat:
        return CopshCat(self.stratum(p))

    def to_json(self) -> dict:
        return {"space": self.Q.to_json(), "strat_poset": self.P.to_json(), "pi": dict(self.pi.assignment)}


@dataclass(frozen=True)
class StratMap:
    source: StratSpace
    target: StratSpace
    g: MonotoneMap

    def __post_init__(self):
        if self.g.source != self.source.Q or self.g.target != self.target.Q:
            raise ValueError("map must go between the two spaces")
        if self.source.P != self.target.P:
            raise ValueError("spaces must be stratified over the same poset")
        for e in self.source.Q:
            if self.target.pi(self.g(e)) != self.source.pi(e):
                raise ValueError(f"map does not commute with the stratifications at {e!r}")

    def push(self, F: CoPresheaf) -> CoPresheaf:
        return fs.pushforward(self.g, F)

    def push_map(self, f: PresheafMap) -> PresheafMap:
        return fs.pushforward_map(self.g, f)


# --- example spaces --------------------------------------------------------------


def identity_space(P: FinPoset, name: str = "") -> StratSpace:
    return StratSpace(P, P, MonotoneMap.identity(P), name or "identity")


def cone_space() -> StratSpace:
    """Two open points over one closed point."""
    from .poset import simplex

    Q = FinPoset(["a", "u", "v"], [("a", "u"), ("a", "v")])
    P = simplex(1)
    return StratSpace(Q, P, MonotoneMap(Q, P, {"a": "0", "u": "1", "v": "1"}), "cone")


def pseudo_circle_space() -> StratSpace:
    from .poset import pseudo_circle, simplex

    Q, P = pseudo_circle(), simplex(1)
    return StratSpace(Q, P, MonotoneMap(Q, P, {"a": "0", "b": "0", "u": "1", "v": "1"}), "pseudo-circle")


def three_strata_space() -> StratSpace:
    from .poset import simplex

    Q = FinPoset(["a", "b", "b'", "c"], [("a", "b"), ("a", "b'"), ("b", "c"), ("b'", "c")])
    P = simplex(2)
    return StratSpace(Q, P, MonotoneMap(Q, P, {"a": "0", "b": "1", "b'": "1", "c": "2"}), "three-strata")


# --- strata and their adjoints ---------------------------------------------------


def _incl(S: FinPoset, K: FinPoset) -> MonotoneMap:
    return fs._incl_cached(S, K)


def phi(X: StratSpace, p, x: CoPresheaf) -> CoPresheaf:
    return fs.restrict(_incl(X.stratum(p), X.Q), x)


def phi_map(X: StratSpace, p, f: PresheafMap) -> PresheafMap:
    return fs.restrict_map(_incl(X.stratum(p), X.Q), f)


def rho(X: StratSpace, p, y: CoPresheaf) -> CoPresheaf:
    W = X.W(p)
    return fs.rke(W, X.Q, fs.extend_by_singleton(W, X.stratum(p).elements, y))


def rho_map(X: StratSpace, p, f: PresheafMap) -> PresheafMap:
    W = X.W(p)
    return fs.rke_map(W, X.Q, fs.extend_by_singleton_map(W, X.stratum(p).elements, f))


def unit(X: StratSpace, p, x: CoPresheaf) -> PresheafMap:
    """x -> rho(p, phi(p, x))."""
    W = X.W(p)
    xw = fs.restrict(_incl(W, X.Q), x)
    first = fs.rke_unit(W, X.Q, x)
    second = fs.rke_map(W, X.Q, fs.singleton_unit(W, X.stratum(p).elements, xw))
    return X.cat.compose(second, first)


def stratification_axioms(X: StratSpace) -> dict:
    """The cover and intersection conditions on p -> pi^-1(P^{>=p}) in the lattice of opens."""
    f = {p: X.pi.preimage(X.P.up(p)) for p in X.P}
    everything = frozenset(X.Q.elements)
    cover = frozenset().union(*f.values()) == everything if f else not everything
    bad = []
    for p in X.P:
        for q in X.P:
            join = frozenset().union(*(f[r] for r in X.P.up(p) & X.P.up(q)))
            if join != f[p] & f[q]:
                bad.append([p, q])
    opens = all(X.Q.is_cosieve(v) for v in f.values())
    return {"ok": bool(cover and not bad and opens), "cover": cover, "intersections": bad, "opens": opens}


def out_of_position(X: StratSpace, bound: int = 2) -> CheckTally:
    """phi(q, rho(p, y)) is terminal whenever p is not above q."""
    tally = CheckTally()
    for p in X.P:
        for q in X.P:
            if X.P.leq(q, p):
                continue
            cq = X.fiber(q)
            for y in X.fiber(p).objects(bound):
                tally.record("out-of-position vanishing", cq.is_terminal(phi(X, q, rho(X, p, y))),
                             space_witness(X, p=p, q=q, y=y))
    return tally


# --- the gluing diagram ----------------------------------------------------------


def _gluing_can(X: StratSpace):
    def cell(d, p, q, r, x):
        return phi_map(X, r, unit(X, q, rho(X, p, x)))

    return FunctionCan(cell, kind="unit")


_GLUING: dict = {}


def gluing_diagram(X: StratSpace) -> LaxDiagram:
    """Lax diagram over P^op: fibers Fun(Q_p, FinSet), pushforwards phi(q) . rho(p)."""
    hit = _GLUING.get(X)
    if hit is not None:
        return hit
    B = X.P.opposite()
    fibers = {p: X.fiber(p) for p in B}
    tau = {}
    for (p, q) in B.strict_pairs:
        W = X.W(p)
        stages = [
            ExtendBySingleton(W, X.stratum(p).elements),
            Rke(W, X.Q),
            Restrict(_incl(X.stratum(q), X.Q)),
        ]
        tau[(p, q)] = FunctorSpec(fibers[p], fibers[q], stages)
    cell = _gluing_can(X)
    can = {c: cell for c in B.chains() if len(c) == 3}
    d = LaxDiagram(B, fibers, tau, can, toposic=True, name=f"gluing({X.name})")
    d.source = {"kind": "gluing", "space": X.to_json()}
    _GLUING[X] = d
    return d


def transport(X: StratSpace, x: CoPresheaf) -> Section:
    """The section [p] -> phi(p, x) with phi-maps from the units."""
    d = gluing_diagram(X)
    xs = {p: phi(X, p, x) for p in d.base}
    ph = {(p, q): phi_map(X, q, unit(X, p, x)) for (p, q) in d.base.strict_pairs}
    return Section(d, xs, ph)


def transport_map(X: StratSpace, f: PresheafMap) -> SectionMap:
    s, t = transport(X, f.source), transport(X, f.target)
    return SectionMap(s, t, {p: phi_map(X, p, f) for p in s.diagram.base})


def _sd_op(X: StratSpace):
    return subdivide(X.P.opposite()).poset


def theta_cone(X: StratSpace, s: Section):
    """The diagram over sd(P^op) of rho-embedded values of s, and its limit cone."""
    sd = _sd_op(X)
    objs, edges = {}, {}
    for c in sd.elements:
        objs[c] = rho(X, c[-1], eval_chain(s, c))
    for (a, b) in sd.covers:
        if a[-1] == b[-1]:
            edges[(a, b)] = rho_map(X, a[-1], eval_inclusion(s, a, b))
        else:
            edges[(a, b)] = unit(X, b[-1], objs[a])
    sdg = ShapedDiagram(X.cat, sd, objs, edges)
    return X.cat.limit(sdg)


def theta(X: StratSpace, s: Section) -> CoPresheaf:
    return theta_cone(X, s).obj


def unit_comparison(X: StratSpace, x: CoPresheaf) -> PresheafMap:
    """The canonical map x -> theta(transport(x)), assembled from iterated units."""
    s = transport(X, x)
    cone = theta_cone(X, s)
    legs = {}
    for c in cone.diagram.shape.elements:
        f = unit(X, c[0], x)
        for a, b in zip(c, c[1:]):
            f = X.cat.compose(unit(X, b, f.target), f)
        legs[c] = f
    return X.cat.mediate(cone, x, legs)


def counit_comparison(X: StratSpace, s: Section) -> SectionMap:
    """transport(theta(s)) -> s, stratumwise phi of the limit projections."""
    cone = theta_cone(X, s)
    t = transport(X, cone.obj)
    psi = {}
    for p in s.diagram.base:
        f = phi_map(X, p, cone.legs[(p,)])
        if f.target.key != s.x[p].key:
            raise ValidationFailed(f"restricting rho back to stratum {p!r} did not return the input", locus="theta")
        psi[p] = PresheafMap(f.source, s.x[p], f.comps, check=False)
    return SectionMap(t, s, psi)


# --- subterminals and the recovered stratification -----------------------------------


def subterminal_section(X: StratSpace, O) -> Section:
    """Terminal on the strata over O, empty elsewhere."""
    O = frozenset(O)
    if not X.P.is_cosieve(O):
        raise NotCosieve(f"{sorted(map(str, O))} is not a cosieve of the stratifying poset")
    d = gluing_diagram(X)
    xs = {p: (d.fibers[p].terminal() if p in O else d.fibers[p].initial()) for p in d.base}
    ph = {}
    for (p, q) in d.base.strict_pairs:
        cat = d.fibers[q]
        tgt = d.push(p, q, xs[p])
        ph[(p, q)] = cat.to_terminal(xs[q], tgt) if q in O else cat.from_initial(tgt, xs[q])
    return Section(d, xs, ph).validate()


def recover_stratification(X: StratSpace, O) -> dict:
    s = subterminal_section(X, O)
    t = theta(X, s)
    U = X.pi.preimage(O)
    char = CoPresheaf(X.Q, {q: ((POINT,) if q in U else ()) for q in X.Q}, None, check=False)
    sub = all(len(v) <= 1 for v in t.sets.values())
    iso = X.cat.find_iso(t, char) is not None
    return {"ok": sub and iso, "subterminal": sub, "matches preimage": iso,
            "support": sorted(q for q in X.Q if t.sets[q])}


# --- adjunction and recollement compatibility -------------------------------------


def adjunction_check(X: StratSpace, p, x: CoPresheaf, y: CoPresheaf, tally: CheckTally) -> None:
    """Hom(phi(p, x), y) and Hom(x, rho(p, y)) are in bijection via phi and the unit."""
    cq = X.fiber(p)
    left = list(cq.homs(phi(X, p, x), y))
    right = list(X.cat.homs(x, rho(X, p, y)))
    eta = unit(X, p, x)
    ok = len(left) == len(right)
    lk = {f.key for f in left}
    for f in right:
        g = phi_map(X, p, f)
        g = PresheafMap(g.source, y, g.comps, check=False)
        back = X.cat.compose(rho_map(X, p, g), eta)
        if g.key not in lk or back.key != f.key:
            ok = False
            break
    tally.record("Hom(phi x, y) = Hom(x, rho y)", ok, space_witness(X, p=p, x=x, y=y))
    tally.record("phi rho = id", phi(X, p, rho(X, p, y)).key == y.key, space_witness(X, p=p, x=x, y=y))


def sheaf_recollement_agreement(X: StratSpace, O, x: CoPresheaf, tally: CheckTally) -> None:
    """Section-level j_*j^* and i_*i^* for the cosieve O match the sheaf-level ones under theta."""
    O = frozenset(O)
    d = gluing_diagram(X)
    dec = Decomposition.from_sieve(d.base, O)
    rec = Recollement(d, dec)
    s = transport(X, x)
    U = X.Q.subposet(X.pi.preimage(O))
    Z = frozenset(X.Q.elements) - frozenset(U.elements)
    jj = fs.rke(U, X.Q, fs.restrict(_incl(U, X.Q), x))
    Zp = X.Q.subposet(Z)
    ii = fs.extend_by_singleton(X.Q, Z, fs.restrict(_incl(Zp, X.Q), x)) if Z else X.cat.terminal()
    w = space_witness(X, cosieve=O, x=x)
    a = theta(X, rec.j_star(rec.j_upper(s)))
    tally.record("theta(j_*j^* s) = j_*j^* x", X.cat.find_iso(a, jj) is not None, w)
    b = theta(X, rec.i_star(rec.i_upper(s)))
    tally.record("theta(i_*i^* s) = i_*i^* x", X.cat.find_iso(b, ii) is not None, w)


# --- functoriality in stratified maps ---------------------------------------------------


def _g_fiber(m: StratMap, p, y: CoPresheaf) -> CoPresheaf:
    return phi(m.target, p, m.push(rho(m.source, p, y)))


def _g_fiber_map(m: StratMap, p, f: PresheafMap) -> PresheafMap:
    return phi_map(m.target, p, m.push_map(rho_map(m.source, p, f)))


def gluing_map_on_sections(m: StratMap, s: Section) -> Section:
    """Apply the fiberwise functors y -> phi'(p, g_* rho(p, y)) to a section."""
    X, Y = m.source, m.target
    dY = gluing_diagram(Y)
    xs = {p: _g_fiber(m, p, s.x[p]) for p in dY.base}
    ph = {}
    for (p, q) in dY.base.strict_pairs:
        cat = dY.fibers[q]
        Fphi = _g_fiber_map(m, q, s.phi[(p, q)])
        c = phi_map(Y, q, m.push_map(unit(X, q, rho(X, p, s.x[p]))))
        into = phi_map(Y, q, unit(Y, p, m.push(rho(X, p, s.x[p]))))
        ph[(p, q)] = cat.compose(into, cat.compose(cat.inverse(c), Fphi))
    return Section(dY, xs, ph)


def collapse_map(X: StratSpace) -> StratMap:
    """X -> P along the stratification, with P stratified by the identity."""
    Y = identity_space(X.P)
    return StratMap(X, Y, MonotoneMap(X.Q, Y.Q, dict(X.pi.assignment)))


def map_functoriality(m: StratMap, bound: int = 2, samples: int = 30, seed: int = 0) -> CheckTally:
    """Fiberwise g_* lands in strata and keeps cocartesian edges; then it acts on sections compatibly with theta.

    The section-level checks need the marked edges to be preserved (otherwise the fiberwise
    functors only form a lax transformation and do not act on sections); they are skipped,
    and the failing edges reported, when that fails.
    """
    X, Y = m.source, m.target
    tally = CheckTally()
    rng = random.Random(seed)
    for p in X.P:
        for y in X.fiber(p).objects(bound):
            img = m.push(rho(X, p, y))
            tally.record("g_* maps strata into strata", Y.cat.is_iso(unit(Y, p, img)),
                         space_witness(X, map="collapse", p=p, y=y))
            for q in X.P:
                if X.P.lt(q, p):
                    tally.record("cocartesian edges preserved", _cocartesian_kept(m, p, q, y),
                                 space_witness(X, map="collapse", p=p, q=q, y=y))
    if not tally.ok:
        return tally
    dX = gluing_diagram(X)
    imgs = []
    for i in range(samples):
        s = random_section(dX, rng, bound)
        t = gluing_map_on_sections(m, s)
        bad = t.violations()
        tally.record("image of a section is a section", not bad,
                     space_witness(X, {"problems": bad[:2]}, map="collapse", s=s))
        if not bad:
            imgs.append((s, t))
            tally.record("theta commutes with g_*", _theta_commutes(m, s, t), space_witness(X, map="collapse", s=s))
    for (s1, t1), (s2, t2) in zip(imgs, imgs[1:]):
        tally.record("image of a section map is a section map", _maps_carried(m, s1, s2, t1, t2),
                     space_witness(X, map="collapse", s=s1, s2=s2))
    return tally


def _cocartesian_kept(m: StratMap, p, q, y: CoPresheaf) -> bool:
    e = m.push_map(unit(m.source, q, rho(m.source, p, y)))
    return m.target.cat.is_iso(phi_map(m.target, q, e))


def _theta_commutes(m: StratMap, s: Section, t: Section) -> bool:
    return m.target.cat.find_iso(theta(m.target, t), m.push(theta(m.source, s))) is not None


def _maps_carried(m: StratMap, s1: Section, s2: Section, t1: Section, t2: Section) -> bool:
    base = s1.diagram.base
    for f in section_homs(s1, s2, limit=8):
        g = SectionMap(t1, t2, {p: _g_fiber_map(m, p, f.psi[p]) for p in base})
        if g.violations():
            return False
    return True


def _counit_ok(X: StratSpace, s: Section) -> bool:
    c = counit_comparison(X, s)
    return not c.violations() and is_iso_map(c)


def _hom_sizes(X: StratSpace, x: CoPresheaf, y: CoPresheaf) -> tuple:
    a = sum(1 for _ in X.cat.homs(x, y))
    b = sum(1 for _ in section_homs(transport(X, x), transport(X, y)))
    return a, b


def space_checks(X: StratSpace, r: dict, bound: int = 2, seed: int = 0) -> CheckTally:
    """Re-run the checks a single witness describes.

    ``r`` may carry a sheaf ``x`` (and a second sheaf ``x2``), a stratum ``p`` with an
    object ``y`` of that stratum, a second stratum ``q``, a ``cosieve``, sections ``s``
    and ``s2`` of the gluing diagram, and ``map: "collapse"``; every check those
    inputs determine is evaluated.
    """
    from . import io
    from .laxdiagram import validate

    tally = CheckTally()
    p, q, O = r.get("p"), r.get("q"), r.get("cosieve")
    x = io.object_from_json(r["x"], X.cat) if "x" in r else None
    x2 = io.object_from_json(r["x2"], X.cat) if "x2" in r else None
    y = io.object_from_json(r["y"], X.fiber(p)) if "y" in r else None
    d = gluing_diagram(X)
    s = io.section_from_json(r["s"], d) if "s" in r else None
    s2 = io.section_from_json(r["s2"], d) if "s2" in r else None
    collapse = r.get("map") == "collapse"
    if not any(k in r for k in ("x", "y", "s", "cosieve")):
        rep = validate(d, budget=6, bound=bound, seed=seed)
        tally.record("gluing diagram validates", rep.ok, None)
        tally.record("stratification axioms", stratification_axioms(X)["ok"], None)
    if x is not None and O is None:
        tally.record("transport gives a section", not transport(X, x).violations(), None)
        tally.record("theta(transport x) = x", X.cat.is_iso(unit_comparison(X, x)), None)
        tally.record("unit x -> theta(transport x) is iso", X.cat.is_iso(unit_comparison(X, x)), None)
    if x is not None and x2 is not None:
        a, b = _hom_sizes(X, x, x2)
        tally.record("hom-set sizes match", a == b, {"sheaf": a, "section": b})
    if O is not None:
        if x is not None:
            sheaf_recollement_agreement(X, O, x, tally)
        else:
            tally.record("recovered stratification", recover_stratification(X, O)["ok"], None)
    if y is not None and x is not None:
        adjunction_check(X, p, x, y, tally)
    if y is not None and q is not None and not collapse:
        tally.record("out-of-position vanishing", X.fiber(q).is_terminal(phi(X, q, rho(X, p, y))), None)
    if collapse:
        m = collapse_map(X)
        if y is not None:
            tally.record("g_* maps strata into strata", m.target.cat.is_iso(unit(m.target, p, m.push(rho(X, p, y)))), None)
            if q is not None:
                tally.record("cocartesian edges preserved", _cocartesian_kept(m, p, q, y), None)
        if s is not None:
            t = gluing_map_on_sections(m, s)
            bad = t.violations()
            tally.record("image of a section is a section", not bad, None)
            if not bad:
                tally.record("theta commutes with g_*", _theta_commutes(m, s, t), None)
                if s2 is not None:
                    t2 = gluing_map_on_sections(m, s2)
                    tally.record("image of a section map is a section map", _maps_carried(m, s, s2, t, t2), None)
    elif s is not None:
        ok = _counit_ok(X, s)
        tally.record("transport(theta s) = s", ok, None)
        tally.record("counit transport(theta s) -> s is iso", ok, None)
    return tally


# --- sampling and the full suite -----------------------------------------------------


def random_sheaf(X: StratSpace, rng: random.Random, bound: int = 2) -> CoPresheaf:
    from .rlaxsections import _pool

    return rng.choice(_pool(X.cat, bound))


def reconstruction_suite(X: StratSpace, bound: int = 2, samples: int = 30, seed: int = 0,
                         hom_pairs: int = 60, exhaustive: bool = True) -> CheckTally:
    """Round trips, hom-set sizes, out-of-position vanishing, recovery and adjoint-equivalence checks."""
    from .laxdiagram import validate
    from .rlaxsections import _pool, enumerate_sections

    rng = random.Random(seed)
    tally = CheckTally()
    d = gluing_diagram(X)
    rep = validate(d, budget=6, bound=bound, seed=seed)
    tally.record("gluing diagram validates", rep.ok, space_witness(X, {"violations": [v.to_json() for v in rep.violations[:3]]}))
    ax = stratification_axioms(X)
    tally.record("stratification axioms", ax["ok"], space_witness(X, ax))
    sheaves = _pool(X.cat, bound)
    if not exhaustive:
        sheaves = rng.sample(sheaves, min(len(sheaves), samples))
    for x in sheaves:
        s = transport(X, x)
        bad = s.violations()
        tally.record("transport gives a section", not bad, space_witness(X, {"problems": bad[:2]}, x=x))
        tally.record("theta(transport x) = x", X.cat.is_iso(unit_comparison(X, x)), space_witness(X, x=x))
    sections = list(enumerate_sections(d, bound)) if exhaustive else [random_section(d, rng, bound) for _ in range(samples)]
    for s in sections:
        tally.record("transport(theta s) = s", _counit_ok(X, s), space_witness(X, s=s))
    for _ in range(hom_pairs):
        x, y = rng.choice(sheaves), rng.choice(sheaves)
        a, b = _hom_sizes(X, x, y)
        tally.record("hom-set sizes match", a == b, space_witness(X, {"sheaf": a, "section": b}, x=x, x2=y))
    tally.merge(out_of_position(X, bound))
    for O in all_cosieves(X.P):
        r = recover_stratification(X, O)
        tally.record("recovered stratification", r["ok"], space_witness(X, r, cosieve=O))
    for _ in range(max(1, samples // 3)):
        x = rng.choice(sheaves)
        for O in all_cosieves(X.P):
            sheaf_recollement_agreement(X, O, x, tally)
    for p in X.P:
        ys = list(X.fiber(p).objects(min(bound, 2)))
        for _ in range(6):
            adjunction_check(X, p, rng.choice(sheaves), rng.choice(ys), tally)
    return tally
