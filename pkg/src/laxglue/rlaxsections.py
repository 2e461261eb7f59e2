"""Sections of a lax diagram (objects of its right-lax limit) and the recollement they carry.

A section is cocycle data: an object ``x[p]`` of each fiber and maps
``phi[(p, q)]: x[q] -> tau^q_p x[p]`` for p < q, with
``can_{pqr}(x_p) . phi_{rp} = tau^r_q(phi_{qp}) . phi_{rq}`` for p < q < r.
Its value on a chain is the iterated pushforward of the value at the bottom.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import product

from .concretecats import gf
from .concretecats.base import ShapedDiagram
from .concretecats.vect import VectCat
from .errors import LimitHypothesisFailed, NotOriginating, ValidationFailed
from .laxdiagram import LaxDiagram, restrict_diagram
from .poset import Decomposition
from .subdivision import elementary_factorize, jx

__all__ = [
    "Section",
    "SectionMap",
    "section_violations",
    "map_violations",
    "eval_chain",
    "eval_inclusion",
    "eval_moves",
    "bar_extension",
    "Recollement",
    "open_restrict",
    "closed_restrict",
    "open_pushforward",
    "closed_pushforward",
    "open_extension",
    "section_homs",
    "compose_maps",
    "identity_map",
    "find_section_iso",
    "is_iso_map",
    "levelwise_limit",
    "fracture",
    "FractureResult",
    "recollement_report",
    "confluence_report",
    "CheckTally",
    "delta1_presentation",
    "from_triple",
    "triple_homs",
    "terminal_section",
    "random_section",
    "enumerate_sections",
]


@dataclass
class Section:
    diagram: LaxDiagram
    x: dict
    phi: dict = field(default_factory=dict)

    def violations(self) -> list:
        return section_violations(self.diagram, self.x, self.phi)

    def validate(self) -> "Section":
        bad = self.violations()
        if bad:
            raise ValidationFailed("; ".join(bad[:3]), locus="section")
        return self

    @property
    def key(self):
        return (
            tuple((p, self.x[p].key) for p in self.diagram.base.linear),
            tuple((pq, self.phi[pq].key) for pq in self.diagram.base.strict_pairs),
        )


@dataclass
class SectionMap:
    source: Section
    target: Section
    psi: dict

    def violations(self) -> list:
        return map_violations(self)

    @property
    def key(self):
        return tuple((p, self.psi[p].key) for p in self.source.diagram.base.linear)


def section_violations(d: LaxDiagram, x: dict, phi: dict) -> list:
    bad = []
    P = d.base
    for p in P:
        if p not in x:
            bad.append(f"missing object at {p}")
    if bad:
        return bad
    for (p, q) in P.strict_pairs:
        f = phi.get((p, q))
        cat = d.fibers[q]
        if f is None:
            bad.append(f"missing phi {p}<{q}")
            continue
        if not (cat.same(f.source, x[q]) and cat.same(f.target, d.push(p, q, x[p]))):
            bad.append(f"phi {p}<{q} has the wrong endpoints")
    if bad:
        return bad
    for (p, q, r) in d.triples():
        cat = d.fibers[r]
        lhs = cat.compose(d.can_at(p, q, r, x[p]), phi[(p, r)])
        rhs = cat.compose(d.push_mor(q, r, phi[(p, q)]), phi[(q, r)])
        if not cat.eq(lhs, rhs):
            bad.append(f"cocycle fails at {p}<{q}<{r}")
    return bad


def map_violations(m: SectionMap) -> list:
    s, t = m.source, m.target
    d = s.diagram
    bad = []
    for p in d.base:
        f = m.psi[p]
        cat = d.fibers[p]
        if not (cat.same(f.source, s.x[p]) and cat.same(f.target, t.x[p])):
            bad.append(f"component at {p} has the wrong endpoints")
    if bad:
        return bad
    for (p, q) in d.base.strict_pairs:
        cat = d.fibers[q]
        lhs = cat.compose(d.push_mor(p, q, m.psi[p]), s.phi[(p, q)])
        rhs = cat.compose(t.phi[(p, q)], m.psi[q])
        if not cat.eq(lhs, rhs):
            bad.append(f"naturality fails along {p}<{q}")
    return bad


# --- evaluation on chains ------------------------------------------------------


def eval_chain(s: Section, chain) -> object:
    return s.diagram.push_chain(chain, s.x[chain[0]])


def _move_map(d: LaxDiagram, x: dict, phi: dict, mv):
    c = mv.before
    if mv.kind == "prepend":
        return d.push_chain_mor(c, phi[(mv.element, c[0])])
    i = mv.after.index(mv.element)
    prefix = c[:i]
    a, b = c[i - 1], c[i]
    e = d.push_chain(prefix, x[prefix[0]])
    return d.push_chain_mor(c[i:], d.can_at(a, mv.element, b, e))


def eval_moves(d: LaxDiagram, x: dict, phi: dict, sigma, moves):
    cat = d.fibers[sigma[-1]]
    f = cat.identity(d.push_chain(sigma, x[sigma[0]]))
    for mv in moves:
        f = cat.compose(_move_map(d, x, phi, mv), f)
    return f


def _eval_incl(d: LaxDiagram, x: dict, phi: dict, sigma, tau):
    return eval_moves(d, x, phi, sigma, elementary_factorize(d.base, sigma, tau))


def eval_inclusion(s: Section, sigma, tau, moves=None):
    """The section's value on a max-preserving inclusion sigma <= tau."""
    d = s.diagram
    if moves is None:
        moves = elementary_factorize(d.base, tuple(sigma), tuple(tau))
    return eval_moves(d, s.x, s.phi, tuple(sigma), moves)


def bar_extension(s0: Section, chain, d: LaxDiagram):
    """Value on a chain of the full base that starts in the sieve carrying s0."""
    chain = tuple(chain)
    if chain[0] not in s0.diagram.base:
        raise NotOriginating(f"chain starting at {chain[0]!r} does not originate in the sieve")
    return d.push_chain(chain, s0.x[chain[0]])


# --- maps between sections -----------------------------------------------------


def identity_map(s: Section) -> SectionMap:
    d = s.diagram
    return SectionMap(s, s, {p: d.fibers[p].identity(s.x[p]) for p in d.base})


def compose_maps(g: SectionMap, f: SectionMap) -> SectionMap:
    d = f.source.diagram
    return SectionMap(f.source, g.target, {p: d.fibers[p].compose(g.psi[p], f.psi[p]) for p in d.base})


def is_iso_map(m: SectionMap) -> bool:
    d = m.source.diagram
    return all(d.fibers[p].is_iso(m.psi[p]) for p in d.base)


def maps_equal(f: SectionMap, g: SectionMap) -> bool:
    d = f.source.diagram
    return all(d.fibers[p].eq(f.psi[p], g.psi[p]) for p in d.base)


def _restrict_map(m: SectionMap, s: Section, t: Section) -> SectionMap:
    return SectionMap(s, t, {p: m.psi[p] for p in s.diagram.base})


def _backtrack_maps(s: Section, t: Section, candidates, limit=None):
    d = s.diagram
    order = d.base.linear
    earlier = {q: [p for p in order if d.base.lt(p, q)] for q in order}
    psi: dict = {}
    count = [0]

    def ok(q, f):
        cat = d.fibers[q]
        for p in earlier[q]:
            lhs = cat.compose(d.push_mor(p, q, psi[p]), s.phi[(p, q)])
            rhs = cat.compose(t.phi[(p, q)], f)
            if not cat.eq(lhs, rhs):
                return False
        return True

    def rec(i):
        if limit is not None and count[0] >= limit:
            return
        if i == len(order):
            count[0] += 1
            yield SectionMap(s, t, dict(psi))
            return
        q = order[i]
        for f in candidates(q):
            if ok(q, f):
                psi[q] = f
                yield from rec(i + 1)
                del psi[q]

    yield from rec(0)


def section_homs(s: Section, t: Section, limit: int | None = None):
    """Every section map s -> t (at most ``limit`` of them)."""
    d = s.diagram
    return _backtrack_maps(s, t, lambda q: d.fibers[q].homs(s.x[q], t.x[q]), limit)


def find_section_iso(s: Section, t: Section):
    """An isomorphism of sections s -> t, or None (exhaustive)."""
    d = s.diagram
    for p in d.base:
        if d.fibers[p].find_iso(s.x[p], t.x[p]) is None:
            return None
    for m in _backtrack_maps(s, t, lambda q: d.fibers[q].isos(s.x[q], t.x[q]), 1):
        return m
    return None


# --- the recollement -----------------------------------------------------------


class Recollement:
    """The adjoints attached to a sieve/cosieve split of the base of a diagram."""

    def __init__(self, d: LaxDiagram, dec: Decomposition):
        if dec.base != d.base:
            raise ValueError("decomposition is over a different base")
        self.d, self.dec = d, dec
        self.d0 = restrict_diagram(d, dec.sieve)
        self.d1 = restrict_diagram(d, dec.cosieve)
        P = d.base
        self.open_order = [p for p in P.linear if p in dec.sieve]
        self.closed_order = [q for q in P.linear if q in dec.cosieve]
        self.J = {q: jx(P, dec, (q,)) for q in self.closed_order}
        self._jstar: dict = {}

    # restrictions
    def j_upper(self, s: Section) -> Section:
        return _restrict_section(s, self.d0)

    def i_upper(self, s: Section) -> Section:
        return _restrict_section(s, self.d1)

    def j_upper_map(self, m: SectionMap) -> SectionMap:
        return _restrict_map(m, self.j_upper(m.source), self.j_upper(m.target))

    def i_upper_map(self, m: SectionMap) -> SectionMap:
        return _restrict_map(m, self.i_upper(m.source), self.i_upper(m.target))

    # right adjoint to j^*
    def _limits(self, s0: Section):
        k = s0.key
        hit = self._jstar.get(k)
        if hit is not None:
            return hit
        d = self.d
        x = dict(s0.x)
        cones = {}
        for q in self.closed_order:
            J = self.J[q]
            cat = d.fibers[q]
            objs = {c: d.push_chain(c, x[c[0]]) for c in J}
            edges = {(u, v): _eval_incl(d, x, s0.phi, u, v) for (u, v) in J.covers}
            cones[q] = cat.limit(ShapedDiagram(cat, J, objs, edges))
        if len(self._jstar) > 5000:
            self._jstar.clear()
        self._jstar[k] = cones
        return cones

    def j_star(self, s0: Section) -> Section:
        d = self.d
        cones = self._limits(s0)
        x = dict(s0.x)
        for q, c in cones.items():
            x[q] = c.obj
        phi = dict(s0.phi)
        for (p, q) in d.base.strict_pairs:
            if q not in self.dec.cosieve:
                continue
            if p in self.dec.sieve:
                phi[(p, q)] = cones[q].legs[(p, q)]
            else:
                phi[(p, q)] = self._closed_phi(s0, cones, p, q)
        s = Section(d, x, phi)
        bad = s.violations()
        if bad:
            raise ValidationFailed("extension by limits is not a section: " + bad[0], locus="j_*")
        return s

    def _closed_phi(self, s0, cones, p, q):
        """x_q -> tau^q_p(x_p) for p < q in the cosieve, via cells and limit preservation."""
        d = self.d
        cat = d.fibers[q]
        cp = cones[p]
        Jp = cp.diagram.shape
        comps = {}
        for v in Jp.elements:
            t0 = v[:-1]
            m = t0[-1]
            e = d.push_chain(t0, s0.x[t0[0]])
            leg = cones[q].legs[t0 + (q,)]
            comps[v] = cat.compose(d.can_at(m, p, q, e), leg)
        img = ShapedDiagram(
            cat,
            Jp,
            {v: d.push(p, q, cp.diagram.objects[v]) for v in Jp.elements},
            {e: d.push_mor(p, q, f) for e, f in cp.diagram.edges.items()},
        )
        lim = cat.limit(img)
        kappa = cat.mediate(lim, d.push(p, q, cp.obj), {v: d.push_mor(p, q, cp.legs[v]) for v in Jp.elements})
        if not cat.is_iso(kappa):
            raise LimitHypothesisFailed(f"pushforward {p}<{q} does not preserve the limit over J_[{p}]")
        return cat.compose(cat.inverse(kappa), cat.mediate(lim, cones[q].obj, comps))

    def j_star_map(self, g: SectionMap) -> SectionMap:
        d = self.d
        src, tgt = self.j_star(g.source), self.j_star(g.target)
        cs, ct = self._limits(g.source), self._limits(g.target)
        psi = dict(g.psi)
        for q in self.closed_order:
            cat = d.fibers[q]
            legs = {}
            for v in self.J[q].elements:
                bar = d.push_chain_mor(v, g.psi[v[0]])
                legs[v] = cat.compose(bar, cs[q].legs[v])
            psi[q] = cat.mediate(ct[q], src.x[q], legs)
        return SectionMap(src, tgt, psi)

    def unit_j(self, s: Section) -> SectionMap:
        """s -> j_* j^* s."""
        d = self.d
        s0 = self.j_upper(s)
        tgt = self.j_star(s0)
        cones = self._limits(s0)
        psi = {p: d.fibers[p].identity(s.x[p]) for p in self.open_order}
        for q in self.closed_order:
            legs = {v: _eval_incl(d, s.x, s.phi, (q,), v) for v in self.J[q].elements}
            psi[q] = d.fibers[q].mediate(cones[q], s.x[q], legs)
        return SectionMap(s, tgt, psi)

    # right adjoint to i^*
    def i_star(self, s1: Section) -> Section:
        d = self.d
        x = {p: d.fibers[p].terminal() for p in self.open_order}
        x.update(s1.x)
        phi = dict(s1.phi)
        for (p, q) in d.base.strict_pairs:
            if p in self.dec.sieve:
                phi[(p, q)] = d.fibers[q].to_terminal(x[q], d.push(p, q, x[p]))
        return Section(d, x, phi)

    def i_star_map(self, g: SectionMap) -> SectionMap:
        d = self.d
        src, tgt = self.i_star(g.source), self.i_star(g.target)
        psi = {p: d.fibers[p].identity(src.x[p]) for p in self.open_order}
        psi.update(g.psi)
        return SectionMap(src, tgt, psi)

    def unit_i(self, s: Section) -> SectionMap:
        """s -> i_* i^* s."""
        d = self.d
        tgt = self.i_star(self.i_upper(s))
        psi = {p: d.fibers[p].to_terminal(s.x[p], tgt.x[p]) for p in self.open_order}
        psi.update({q: d.fibers[q].identity(s.x[q]) for q in self.closed_order})
        return SectionMap(s, tgt, psi)

    # left adjoint to j^*
    def j_shriek(self, s0: Section) -> Section:
        d = self.d
        x = dict(s0.x)
        x.update({q: d.fibers[q].initial() for q in self.closed_order})
        phi = dict(s0.phi)
        for (p, q) in d.base.strict_pairs:
            if q in self.dec.cosieve:
                phi[(p, q)] = d.fibers[q].from_initial(d.push(p, q, x[p]), x[q])
        return Section(d, x, phi)

    def j_shriek_map(self, g: SectionMap) -> SectionMap:
        d = self.d
        src, tgt = self.j_shriek(g.source), self.j_shriek(g.target)
        psi = dict(g.psi)
        psi.update({q: d.fibers[q].identity(src.x[q]) for q in self.closed_order})
        return SectionMap(src, tgt, psi)

    def counit_shriek(self, s: Section) -> SectionMap:
        """j_! j^* s -> s."""
        d = self.d
        src = self.j_shriek(self.j_upper(s))
        psi = {p: d.fibers[p].identity(s.x[p]) for p in self.open_order}
        psi.update({q: d.fibers[q].from_initial(s.x[q], src.x[q]) for q in self.closed_order})
        return SectionMap(src, s, psi)

    # gluing functor i^* j_*
    def gluing(self, s0: Section) -> Section:
        return self.i_upper(self.j_star(s0))


def _restrict_section(s: Section, sub: LaxDiagram) -> Section:
    keep = set(sub.base.elements)
    return Section(
        sub,
        {p: v for p, v in s.x.items() if p in keep},
        {k: v for k, v in s.phi.items() if k[0] in keep and k[1] in keep},
    )


def open_restrict(s: Section, dec: Decomposition) -> Section:
    return _restrict_section(s, restrict_diagram(s.diagram, dec.sieve))


def closed_restrict(s: Section, dec: Decomposition) -> Section:
    return _restrict_section(s, restrict_diagram(s.diagram, dec.cosieve))


def open_pushforward(s0: Section, d: LaxDiagram, dec: Decomposition) -> Section:
    return Recollement(d, dec).j_star(_rebase(s0, d, dec.sieve))


def closed_pushforward(s1: Section, d: LaxDiagram, dec: Decomposition) -> Section:
    return Recollement(d, dec).i_star(_rebase(s1, d, dec.cosieve))


def open_extension(s0: Section, d: LaxDiagram, dec: Decomposition) -> Section:
    return Recollement(d, dec).j_shriek(_rebase(s0, d, dec.sieve))


def _rebase(s: Section, d: LaxDiagram, subset) -> Section:
    return Section(restrict_diagram(d, subset), dict(s.x), dict(s.phi))


def terminal_section(d: LaxDiagram) -> Section:
    x = {p: d.fibers[p].terminal() for p in d.base}
    phi = {(p, q): d.fibers[q].to_terminal(x[q], d.push(p, q, x[p])) for (p, q) in d.base.strict_pairs}
    return Section(d, x, phi)


# --- levelwise limits and the fracture square ----------------------------------


def levelwise_limit(d: LaxDiagram, shape, sections: dict, maps: dict):
    """Limit of a diagram of sections, computed fiberwise.

    ``maps[(u, v)]`` is a SectionMap sections[u] -> sections[v] for each cover
    u < v of ``shape``.  Returns (limit section, legs, per-level cones).
    """
    cones = {}
    x = {}
    for p in d.base:
        cat = d.fibers[p]
        sd = ShapedDiagram(cat, shape, {k: s.x[p] for k, s in sections.items()}, {e: m.psi[p] for e, m in maps.items()})
        cones[p] = cat.limit(sd)
        x[p] = cones[p].obj
    phi = {}
    for (p, q) in d.base.strict_pairs:
        cat = d.fibers[q]
        cp = cones[p]
        comps = {k: cat.compose(sections[k].phi[(p, q)], cones[q].legs[k]) for k in shape.elements}
        img = ShapedDiagram(
            cat,
            shape,
            {k: d.push(p, q, sections[k].x[p]) for k in shape.elements},
            {e: d.push_mor(p, q, m.psi[p]) for e, m in maps.items()},
        )
        lim = cat.limit(img)
        kappa = cat.mediate(lim, d.push(p, q, cp.obj), {k: d.push_mor(p, q, cp.legs[k]) for k in shape.elements})
        if not cat.is_iso(kappa):
            raise LimitHypothesisFailed(f"pushforward {p}<{q} does not preserve a levelwise limit")
        phi[(p, q)] = cat.compose(cat.inverse(kappa), cat.mediate(lim, x[q], comps))
    w = Section(d, x, phi)
    legs = {k: SectionMap(w, sections[k], {p: cones[p].legs[k] for p in d.base}) for k in shape.elements}
    return w, legs, cones


@dataclass
class FractureResult:
    corners: dict
    comparison: SectionMap
    is_iso: bool
    problems: list


def fracture(s: Section, dec: Decomposition, rec: Recollement | None = None) -> FractureResult:
    """Compare s with j_*j^*s x_{i_*i^*j_*j^*s} i_*i^*s."""
    from .poset import FinPoset

    rec = rec or Recollement(s.diagram, dec)
    d = s.diagram
    ej = rec.unit_j(s)
    ei = rec.unit_i(s)
    a = ej.target
    b = ei.target
    ea = rec.unit_i(a)
    c = ea.target
    eb = rec.i_star_map(rec.i_upper_map(ej))
    shape = FinPoset(["A", "B", "C"], [("A", "C"), ("B", "C")])
    w, legs, cones = levelwise_limit(d, shape, {"A": a, "B": b, "C": c}, {("A", "C"): ea, ("B", "C"): eb})
    psi = {
        p: d.fibers[p].mediate(cones[p], s.x[p], {"A": ej.psi[p], "B": ei.psi[p], "C": d.fibers[p].compose(ea.psi[p], ej.psi[p])})
        for p in d.base
    }
    comp = SectionMap(s, w, psi)
    problems = comp.violations() + w.violations()
    return FractureResult({"s": s, "j*j^*": a, "i*i^*": b, "i*i^*j*j^*": c, "pullback": w}, comp, is_iso_map(comp) and not problems, problems)


# --- reports -------------------------------------------------------------------


@dataclass
class CheckTally:
    counts: dict = field(default_factory=dict)
    failures: list = field(default_factory=list)

    def record(self, name: str, ok: bool, witness=None):
        """Count one check; ``witness`` may be a callable, evaluated only on failure."""
        c = self.counts.setdefault(name, [0, 0])
        c[0] += 1
        if not ok:
            c[1] += 1
            self.failures.append({"check": name, "witness": witness() if callable(witness) else witness})

    def merge(self, other: "CheckTally") -> "CheckTally":
        for k, (n, f) in other.counts.items():
            c = self.counts.setdefault(k, [0, 0])
            c[0] += n
            c[1] += f
        self.failures += other.failures
        return self

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self):
        return {
            "ok": self.ok,
            "checks": {k: {"run": v[0], "failed": v[1]} for k, v in self.counts.items()},
            "failures": self.failures[:20],
        }


def _adjunction_check(hom_src, hom_tgt, forward, backward, tally: CheckTally, name: str, witness):
    """forward: hom_src -> hom_tgt and backward must be mutually inverse bijections."""
    src = list(hom_src)
    tgt = list(hom_tgt)
    ok = len(src) == len(tgt)
    tgt_keys = {m.key for m in tgt}
    for f in src:
        g = forward(f)
        if g.key not in tgt_keys or not maps_equal(backward(g), f):
            ok = False
            break
    if ok:
        for g in tgt:
            f = backward(g)
            if f.violations() or not maps_equal(forward(f), g):
                ok = False
                break
    tally.record(name, ok, None if ok else witness)
    return len(src)


def recollement_report(d: LaxDiagram, dec: Decomposition, sections: list, partners: list | None = None,
                       tally: CheckTally | None = None, hom_limit: int = 4096) -> CheckTally:
    """Recollement axioms and the three adjunction bijections on sample sections.

    Each sample s supplies u = j^*s and z = i^*s; ``partners`` are the test
    objects y for the hom-set bijections (defaults to the samples themselves).
    """
    rec = Recollement(d, dec)
    tally = tally or CheckTally()
    partners = partners if partners is not None else sections
    for idx, s in enumerate(sections):
        w = {"diagram": d.name, "sieve": sorted(map(str, dec.sieve)), "section": idx}
        u, z = rec.j_upper(s), rec.i_upper(s)
        ju = rec.j_star(u)
        back = rec.j_upper(ju)
        tally.record("j^*j_* = id", back.key == u.key or find_section_iso(back, u) is not None, w)
        iz = rec.i_star(z)
        tally.record("i^*i_* = id", find_section_iso(rec.i_upper(iz), z) is not None, w)
        tally.record("j^*i_* = terminal", all(d.fibers[p].is_terminal(iz.x[p]) for p in rec.open_order), w)
        jz = rec.j_shriek(u)
        tally.record("j^*j_! = id", find_section_iso(rec.j_upper(jz), u) is not None, w)
        y = partners[idx % len(partners)]
        j_y, i_y = rec.j_upper(y), rec.i_upper(y)
        _adjunction_check(
            section_homs(y, ju, hom_limit), section_homs(j_y, u, hom_limit),
            rec.j_upper_map,
            lambda g, y=y: compose_maps(rec.j_star_map(g), rec.unit_j(y)),
            tally, "Hom(y, j_* u) = Hom(j^* y, u)", w,
        )
        _adjunction_check(
            section_homs(y, iz, hom_limit), section_homs(i_y, z, hom_limit),
            rec.i_upper_map,
            lambda g, y=y: compose_maps(rec.i_star_map(g), rec.unit_i(y)),
            tally, "Hom(y, i_* z) = Hom(i^* y, z)", w,
        )
        _adjunction_check(
            section_homs(jz, y, hom_limit), section_homs(u, j_y, hom_limit),
            rec.j_upper_map,
            lambda g, y=y: compose_maps(rec.counit_shriek(y), rec.j_shriek_map(g)),
            tally, "Hom(j_! u, y) = Hom(u, j^* y)", w,
        )
        # a map is invertible exactly when both restrictions are
        for m in list(section_homs(y, s, 8)) + list(section_homs(s, s, 8)):
            both = is_iso_map(rec.j_upper_map(m)) and is_iso_map(rec.i_upper_map(m))
            tally.record("joint conservativity", both == is_iso_map(m), w)
    return tally


def confluence_report(s: Section, max_len: int = 5, tally: CheckTally | None = None,
                      functoriality_len: int = 4) -> CheckTally:
    """Every insertion order of every max-preserving inclusion gives the same morphism,
    and evaluation respects composition of inclusions."""
    from .subdivision import factorization_orders

    tally = tally or CheckTally()
    d = s.diagram
    chains = [c for c in d.base.chains() if len(c) <= max_len]
    by_max: dict = {}
    for c in chains:
        by_max.setdefault(c[-1], []).append(c)
    for top, cs in by_max.items():
        for tau in cs:
            for sigma in cs:
                if sigma == tau or not set(sigma) < set(tau):
                    continue
                keys = {eval_moves(d, s.x, s.phi, sigma, mv).key for mv in factorization_orders(d.base, sigma, tau)}
                tally.record("confluence", len(keys) == 1,
                             {"diagram": d.name, "from": list(sigma), "to": list(tau), "distinct": len(keys)})
                if len(tau) > functoriality_len:
                    continue
                whole = eval_inclusion(s, sigma, tau)
                cat = d.fibers[top]
                for mid in cs:
                    if set(sigma) < set(mid) < set(tau):
                        comp = cat.compose(eval_inclusion(s, mid, tau), eval_inclusion(s, sigma, mid))
                        tally.record("functoriality", comp.key == whole.key,
                                     {"diagram": d.name, "from": list(sigma), "via": list(mid), "to": list(tau)})
    return tally


# --- the arrow-category reading over the 1-simplex -----------------------------


def delta1_presentation(s: Section) -> tuple:
    """(u, z, alpha: z -> tau(u)) for a section over a two-element chain."""
    P = s.diagram.base
    if len(P) != 2 or len(P.covers) != 1:
        raise ValueError("base must be the two-element chain")
    lo, hi = P.covers[0]
    return s.x[lo], s.x[hi], s.phi[(lo, hi)]


def from_triple(d: LaxDiagram, u, z, alpha) -> Section:
    lo, hi = d.base.covers[0]
    return Section(d, {lo: u, hi: z}, {(lo, hi): alpha}).validate()


def triple_homs(d: LaxDiagram, t1: tuple, t2: tuple):
    """Pairs (a: u -> u', b: z -> z') with tau(a) . alpha = alpha' . b."""
    lo, hi = d.base.covers[0]
    (u, z, al), (u2, z2, al2) = t1, t2
    c0, c1 = d.fibers[lo], d.fibers[hi]
    for a in c0.homs(u, u2):
        ta = d.push_mor(lo, hi, a)
        for b in c1.homs(z, z2):
            if c1.eq(c1.compose(ta, al), c1.compose(al2, b)):
                yield a, b


# --- producing sections --------------------------------------------------------


def _candidates(cat, a, b, rng, cap):
    if isinstance(cat, VectCat):
        n = a.dim * b.dim
        if n <= 12:
            pool = list(cat.homs(a, b))
            rng.shuffle(pool)
            return pool[:cap]
        return [cat.map(a, b, rng_matrix(rng, b.dim, a.dim, cat.p)) for _ in range(cap)]
    pool = []
    for i, f in enumerate(cat.homs(a, b)):
        if i >= 4 * cap:
            break
        pool.append(f)
    rng.shuffle(pool)
    return pool[:cap]


def rng_matrix(rng: random.Random, r: int, c: int, p: int):
    return gf.as_matrix([rng.randrange(p) for _ in range(r * c)], p, (r, c))


def _fill_phi(d: LaxDiagram, x: dict, cands):
    """Backtrack over phi-maps; ``cands(p, q)`` lists candidates x_q -> tau^q_p x_p."""
    P = d.base
    order = []
    for r in P.linear:
        below = [p for p in P.linear if P.lt(p, r)]
        for p in reversed(below):
            order.append((p, r))
    between = {(p, r): [q for q in P.linear if P.lt(p, q) and P.lt(q, r)] for (p, r) in order}
    phi: dict = {}

    def ok(p, r):
        cat = d.fibers[r]
        for q in between[(p, r)]:
            lhs = cat.compose(d.can_at(p, q, r, x[p]), phi[(p, r)])
            rhs = cat.compose(d.push_mor(q, r, phi[(p, q)]), phi[(q, r)])
            if not cat.eq(lhs, rhs):
                return False
        return True

    def rec(i):
        if i == len(order):
            yield dict(phi)
            return
        p, r = order[i]
        for f in cands(p, r):
            phi[(p, r)] = f
            if ok(p, r):
                yield from rec(i + 1)
            del phi[(p, r)]

    yield from rec(0)


def random_section(d: LaxDiagram, rng: random.Random, bound: int = 2, cap: int = 24, tries: int = 50) -> Section:
    """A random valid section with pointwise sizes (or dimensions) at most ``bound``."""
    for _ in range(tries):
        x = {p: rng.choice(_pool(d.fibers[p], bound)) for p in d.base}
        cache = {}

        def cands(p, q):
            if (p, q) not in cache:
                cache[(p, q)] = _candidates(d.fibers[q], x[q], d.push(p, q, x[p]), rng, cap)
            return cache[(p, q)]

        for phi in _fill_phi(d, x, cands):
            return Section(d, x, phi)
    raise ValidationFailed("no section found within the sampling budget", locus=d.name)


_POOLS: dict = {}


def _pool(cat, bound):
    key = (cat, bound)
    if key not in _POOLS:
        _POOLS[key] = list(cat.objects(bound))
    return _POOLS[key]


def enumerate_sections(d: LaxDiagram, bound: int = 2, objects: dict | None = None):
    """Every section whose values come from the fiber enumerations at ``bound``."""
    pools = objects or {p: _pool(d.fibers[p], bound) for p in d.base}
    order = d.base.linear
    for choice in product(*(pools[p] for p in order)):
        x = dict(zip(order, choice))
        cache = {}

        def cands(p, q, x=x, cache=cache):
            if (p, q) not in cache:
                cache[(p, q)] = list(d.fibers[q].homs(x[q], d.push(p, q, x[p])))
            return cache[(p, q)]

        for phi in _fill_phi(d, x, cands):
            yield Section(d, x, phi)
