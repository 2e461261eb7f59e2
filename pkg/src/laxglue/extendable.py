"""Spine data over the n-simplex with vector-space fibers.

A section over the n-simplex restricts to its spine: the objects x_k and the
maps x_k -> tau(x_{k-1}) between neighbours.  Extendable spines are exactly
the restrictions of one-generated sections, and ``extend`` rebuilds the
section by inverting the comparison cells.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .concretecats import gf
from .concretecats.base import ShapedDiagram
from .concretecats.vect import LinMap, VectCat, VectObj
from .errors import NotExtendable, OutOfRange, ValidationFailed
from .laxdiagram import LaxDiagram, multiplicity_lax
from .poset import Decomposition, simplex
from .rlaxsections import CheckTally, Recollement, Section, SectionMap, eval_chain, eval_inclusion, section_homs
from .subdivision import cube

__all__ = [
    "MultiplicityDiagram",
    "Sd1Section",
    "Verdict",
    "OneGenVerdict",
    "gamma_restrict",
    "is_extendable",
    "is_one_generated",
    "extend",
    "complete_sections",
    "enumerate_spines",
    "count_spines",
    "fiber_product_count",
    "spine_homs",
    "staircase_recollement",
    "norm_fiber_sequences",
    "multiplicity_diagrams",
    "random_multiplicity_diagram",
    "gauge_twist",
    "equivalence_check",
]


def _lab(k: int) -> str:
    return str(k)


@dataclass
class MultiplicityDiagram:
    """tau^j_i = multiplicity mult[(i, j)]; can[(i, j, k)] has shape (m_jk * m_ij, m_ik)."""

    n: int
    mult: dict
    can: dict
    p: int = 2
    _lax: LaxDiagram | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.can = {k: gf.as_matrix(v, self.p).reshape(self.mult[(k[1], k[2])] * self.mult[(k[0], k[1])], self.mult[(k[0], k[2])])
                    for k, v in self.can.items()}

    @property
    def lax(self) -> LaxDiagram:
        if self._lax is None:
            P = simplex(self.n)
            mult = {(_lab(i), _lab(j)): m for (i, j), m in self.mult.items()}
            mats = {(_lab(i), _lab(j), _lab(k)): m for (i, j, k), m in self.can.items()}
            self._lax = multiplicity_lax(P, mult, mats, self.p, name=f"mult-{self.n}")
            self._lax.source = {"kind": "multiplicity", **self.to_json()}
        return self._lax

    def cocycle_failures(self) -> list:
        """4-chains where the cell cocycle fails; linearity makes dimension one enough."""
        d = self.lax
        one = VectObj(1)
        bad = []
        for (p, q, r, s) in d.chains_of(4):
            cat = d.fibers[s]
            lhs = cat.compose(d.push_mor(r, s, d.can_at(p, q, r, one)), d.can_at(p, r, s, one))
            rhs = cat.compose(d.can_at(q, r, s, d.push(p, q, one)), d.can_at(p, q, s, one))
            if not cat.eq(lhs, rhs):
                bad.append((p, q, r, s))
        return bad

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "p": self.p,
            "mult": {f"{i}<{j}": m for (i, j), m in sorted(self.mult.items())},
            "can": {f"{i}<{j}<{k}": v.tolist() for (i, j, k), v in sorted(self.can.items())},
        }


@dataclass
class Sd1Section:
    """Objects V[k] and arrows w[k]: V[k] -> tau(V[k-1]) for 1 <= k <= n."""

    diagram: LaxDiagram
    V: list
    w: dict

    @property
    def n(self) -> int:
        return len(self.V) - 1

    @property
    def key(self):
        return (tuple(v.dim for v in self.V), tuple(self.w[k].key for k in range(1, self.n + 1)))

    def violations(self) -> list:
        d = self.diagram
        bad = []
        for k in range(1, self.n + 1):
            tgt = d.push(_lab(k - 1), _lab(k), self.V[k - 1])
            if self.w[k].source != self.V[k] or self.w[k].target != tgt:
                bad.append(f"arrow into level {k} has the wrong shape")
        return bad


@dataclass
class Verdict:
    ok: bool
    witnesses: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


@dataclass
class OneGenVerdict:
    cube_limits: Verdict
    edge_isos: Verdict

    @property
    def agree(self) -> bool:
        return self.cube_limits.ok == self.edge_isos.ok

    def __bool__(self):
        return self.edge_isos.ok


def gamma_restrict(s: Section) -> Sd1Section:
    d = s.diagram
    n = len(d.base) - 1
    V = [s.x[_lab(k)] for k in range(n + 1)]
    w = {k: s.phi[(_lab(k - 1), _lab(k))] for k in range(1, n + 1)}
    return Sd1Section(d, V, w)


def _cells(d: LaxDiagram, n: int):
    for i in range(n + 1):
        for k in range(2, n - i + 1):
            yield i, i + 1, i + k


def is_extendable(t: Sd1Section) -> Verdict:
    """Every cell can_{i,i+1,i+k} at V[i], k >= 2, is invertible; witnesses list the failing strings."""
    d = t.diagram
    bad = []
    for (i, j, k) in _cells(d, t.n):
        c = d.can_at(_lab(i), _lab(j), _lab(k), t.V[i])
        if not d.fibers[_lab(k)].is_iso(c):
            bad.append(f"[{i}<{j}<{k}]")
    return Verdict(not bad, bad)


def _cube_limit_ok(s: Section, i: int, j: int, n: int) -> bool:
    d = s.diagram
    cat = d.fibers[_lab(j)]
    sigma = (_lab(i), _lab(j))
    Q = cube(sigma, n)
    rest = Q.subposet([c for c in Q.elements if c != sigma])
    objs = {c: eval_chain(s, c) for c in rest.elements}
    edges = {(u, v): eval_inclusion(s, u, v) for (u, v) in rest.covers}
    cone = cat.limit(ShapedDiagram(cat, rest, objs, edges))
    legs = {c: eval_inclusion(s, sigma, c) for c in rest.elements}
    return cat.is_iso(cat.mediate(cone, eval_chain(s, sigma), legs))


def is_one_generated(s: Section) -> OneGenVerdict:
    """Two independent verdicts: cube restrictions are limit diagrams / the first-step inclusions are isos."""
    d = s.diagram
    n = len(d.base) - 1
    bad_a, bad_b = [], []
    for i in range(n + 1):
        for j in range(i + 2, n + 1):
            if not _cube_limit_ok(s, i, j, n):
                bad_a.append(f"[{i}<{j}]")
            e = eval_inclusion(s, (_lab(i), _lab(j)), (_lab(i), _lab(i + 1), _lab(j)))
            if not d.fibers[_lab(j)].is_iso(e):
                bad_b.append(f"[{i}<{j}] -> [{i}<{i + 1}<{j}]")
    return OneGenVerdict(Verdict(not bad_a, bad_a), Verdict(not bad_b, bad_b))


def extend(t: Sd1Section) -> Section:
    """The one-generated section whose spine is ``t``."""
    ver = is_extendable(t)
    if not ver:
        raise NotExtendable("cells not invertible at " + ", ".join(ver.witnesses))
    d = t.diagram
    n = t.n
    x = {_lab(k): t.V[k] for k in range(n + 1)}
    phi = {(_lab(k - 1), _lab(k)): t.w[k] for k in range(1, n + 1)}
    for length in range(2, n + 1):
        for a in range(0, n - length + 1):
            b = a + length
            pa, pa1, pb = _lab(a), _lab(a + 1), _lab(b)
            cat = d.fibers[pb]
            c = d.can_at(pa, pa1, pb, x[pa])
            via = cat.compose(d.push_mor(pa1, pb, phi[(pa, pa1)]), phi[(pa1, pb)])
            phi[(pa, pb)] = cat.compose(cat.inverse(c), via)
    return Section(d, x, phi).validate()


# --- enumeration -----------------------------------------------------------------


def complete_sections(t: Sd1Section):
    """Every section with spine ``t``: the long phi-maps solve linear cocycle equations."""
    d = t.diagram
    n = t.n
    cat = d.fibers[_lab(0)]
    p = cat.p
    x = {_lab(k): t.V[k] for k in range(n + 1)}
    phi = {(_lab(k - 1), _lab(k)): t.w[k] for k in range(1, n + 1)}
    pairs = [(a, a + L) for L in range(2, n + 1) for a in range(0, n - L + 1)]

    def rec(idx):
        if idx == len(pairs):
            yield Section(d, dict(x), dict(phi))
            return
        a, b = pairs[idx]
        pa, pb = _lab(a), _lab(b)
        src = x[pb]
        tgt = d.push(pa, pb, x[pa])
        cs, rs = [], []
        for m in range(a + 1, b):
            pm = _lab(m)
            cs.append(d.can_at(pa, pm, pb, x[pa]).mat)
            rs.append((d.push_mor(pm, pb, phi[(pa, pm)]).mat @ phi[(pm, pb)].mat) % p)
        C = np.concatenate(cs, axis=0) % p
        R = np.concatenate(rs, axis=0) % p
        if src.dim == 0:
            sols = [gf.zeros(tgt.dim, 0)]
        else:
            base = gf.solve(C, R, p) if tgt.dim else gf.zeros(0, src.dim)
            if base is None:
                return
            K = gf.kernel(C, p) if tgt.dim else gf.zeros(0, 0)
            if K.shape[1] == 0:
                sols = [base]
            else:
                sols = [(base + K @ Y) % p for Y in gf.all_matrices(K.shape[1], src.dim, p)]
        for m in sols:
            phi[(pa, pb)] = LinMap(src, tgt, m, p)
            yield from rec(idx + 1)
        del phi[(pa, pb)]

    yield from rec(0)


def count_spines(d: LaxDiagram, n: int, dims: list | None = None, bound: int = 2) -> int:
    """Number of spines, counted as points of the iterated fiber product of arrow categories."""
    p = d.fibers[_lab(0)].p
    total = 0
    for V in product(range(bound + 1), repeat=n + 1) if dims is None else [dims]:
        c = 1
        for k in range(1, n + 1):
            tau_dim = d.push(_lab(k - 1), _lab(k), VectObj(V[k - 1])).dim
            c *= p ** (V[k] * tau_dim)
        total += c
    return total


fiber_product_count = count_spines


def enumerate_spines(d: LaxDiagram, n: int, bound: int = 2, cap: int | None = None, rng: random.Random | None = None):
    """Spines with dims <= bound: every one when there are at most ``cap`` per dimension vector, else a seeded sample."""
    cat = d.fibers[_lab(0)]
    rng = rng or random.Random(0)
    for dims in product(range(bound + 1), repeat=n + 1):
        V = [VectObj(k) for k in dims]
        targets = [None] + [d.push(_lab(k - 1), _lab(k), V[k - 1]) for k in range(1, n + 1)]
        size = count_spines(d, n, list(dims))
        if cap is None or size <= cap:
            for mats in product(*(list(gf.all_matrices(targets[k].dim, V[k].dim, cat.p)) for k in range(1, n + 1))):
                yield Sd1Section(d, V, {k: LinMap(V[k], targets[k], mats[k - 1], cat.p) for k in range(1, n + 1)})
        else:
            for _ in range(cap):
                w = {}
                for k in range(1, n + 1):
                    m = [rng.randrange(cat.p) for _ in range(targets[k].dim * V[k].dim)]
                    w[k] = LinMap(V[k], targets[k], gf.as_matrix(m, cat.p, (targets[k].dim, V[k].dim)), cat.p)
                yield Sd1Section(d, V, w)


# --- maps of spines and the staircase recollement ----------------------------------


@dataclass
class SpineMap:
    source: Sd1Section
    target: Sd1Section
    psi: list

    @property
    def key(self):
        return tuple(f.key for f in self.psi)


def _spine_ok(d, s, t, k, psi_prev, f) -> bool:
    cat = d.fibers[_lab(k)]
    lhs = cat.compose(d.push_mor(_lab(k - 1), _lab(k), psi_prev), s.w[k])
    return cat.eq(lhs, cat.compose(t.w[k], f))


def spine_homs(s: Sd1Section, t: Sd1Section, limit: int | None = None):
    d = s.diagram
    out = [0]

    def rec(k, psi):
        if limit is not None and out[0] >= limit:
            return
        if k > s.n:
            out[0] += 1
            yield SpineMap(s, t, list(psi))
            return
        for f in d.fibers[_lab(k)].homs(s.V[k], t.V[k]):
            if k == 0 or _spine_ok(d, s, t, k, psi[-1], f):
                yield from rec(k + 1, psi + [f])

    yield from rec(0, [])


def _spine_iso(m: SpineMap) -> bool:
    d = m.source.diagram
    return all(d.fibers[_lab(k)].is_iso(f) for k, f in enumerate(m.psi))


def _spine_compose(g: SpineMap, f: SpineMap) -> SpineMap:
    d = f.source.diagram
    return SpineMap(f.source, g.target, [d.fibers[_lab(k)].compose(a, b) for k, (a, b) in enumerate(zip(g.psi, f.psi))])


class _Staircase:
    """Sieve [0:k], cosieve [k+1:n] on spines.

    The open part is a spine over [0:k]; the closed part is kept as a spine whose
    levels are numbered k+1..n (``V`` lists levels k+1.., ``w`` keyed by level).
    """

    def __init__(self, d: LaxDiagram, n: int, k: int):
        if not 0 <= k < n:
            raise OutOfRange(f"split point {k} outside [0, {n - 1}]")
        self.d, self.n, self.k = d, n, k
        self.cat = d.fibers[_lab(0)]

    def tau(self, l, x):
        return self.d.push(_lab(l - 1), _lab(l), x)

    def tau_mor(self, l, f):
        return self.d.push_mor(_lab(l - 1), _lab(l), f)

    def j_upper(self, t) -> Sd1Section:
        return Sd1Section(self.d, t.V[: self.k + 1], {l: t.w[l] for l in range(1, self.k + 1)})

    def i_upper(self, t) -> tuple:
        return (t.V[self.k + 1:], {l: t.w[l] for l in range(self.k + 2, self.n + 1)})

    def j_star(self, low: Sd1Section) -> Sd1Section:
        V, w = list(low.V), dict(low.w)
        for l in range(self.k + 1, self.n + 1):
            V.append(self.tau(l, V[l - 1]))
            w[l] = self.cat.identity(V[l])
        return Sd1Section(self.d, V, w)

    def i_star(self, high) -> Sd1Section:
        V = [VectObj(0)] * (self.k + 1) + list(high[0])
        w = {l: self.cat.zero(VectObj(0), VectObj(0)) for l in range(1, self.k + 1)}
        w[self.k + 1] = self.cat.zero(V[self.k + 1], self.tau(self.k + 1, V[self.k]))
        w.update(high[1])
        return Sd1Section(self.d, V, w)

    def unit_j(self, t) -> SpineMap:
        tgt = self.j_star(self.j_upper(t))
        psi = [self.cat.identity(v) for v in t.V[: self.k + 1]]
        for l in range(self.k + 1, self.n + 1):
            psi.append(self.cat.compose(self.tau_mor(l, psi[l - 1]), t.w[l]))
        return SpineMap(t, tgt, psi)

    def unit_i(self, t) -> SpineMap:
        tgt = self.i_star(self.i_upper(t))
        psi = [self.cat.zero(v, VectObj(0)) for v in t.V[: self.k + 1]]
        psi += [self.cat.identity(v) for v in t.V[self.k + 1:]]
        return SpineMap(t, tgt, psi)

    def j_star_map(self, g: SpineMap) -> SpineMap:
        """g between spines over [0:k]."""
        src, tgt = self.j_star(g.source), self.j_star(g.target)
        psi = list(g.psi)
        for l in range(self.k + 1, self.n + 1):
            psi.append(self.tau_mor(l, psi[l - 1]))
        return SpineMap(src, tgt, psi)

    def i_star_map(self, psi_high: list, src_high, tgt_high) -> SpineMap:
        src, tgt = self.i_star(src_high), self.i_star(tgt_high)
        psi = [self.cat.identity(VectObj(0))] * (self.k + 1) + list(psi_high)
        return SpineMap(src, tgt, psi)

    def high_homs(self, y_high, z_high):
        d, k = self.d, self.k
        (V1, w1), (V2, w2) = y_high, z_high

        def rec(l, psi):
            if l > self.n:
                yield psi
                return
            cat = d.fibers[_lab(l)]
            for f in cat.homs(V1[l - k - 1], V2[l - k - 1]):
                if l == k + 1 or cat.eq(cat.compose(self.tau_mor(l, psi[-1]), w1[l]), cat.compose(w2[l], f)):
                    yield from rec(l + 1, psi + [f])

        yield from rec(k + 1, [])

    def fracture_iso(self, t) -> bool:
        """Levelwise pullback of j_*j^*t -> i_*i^*j_*j^*t <- i_*i^*t; is t -> pullback an iso?"""
        from .poset import FinPoset

        ej, ei = self.unit_j(t), self.unit_i(t)
        a = ej.target
        ea = self.unit_i(a)
        eb = self.i_star_map(ej.psi[self.k + 1:], self.i_upper(t), self.i_upper(a))
        shape = FinPoset(["A", "B", "C"], [("A", "C"), ("B", "C")])
        for l in range(self.n + 1):
            sd = ShapedDiagram(
                self.cat, shape,
                {"A": a.V[l], "B": ei.target.V[l], "C": ea.target.V[l]},
                {("A", "C"): ea.psi[l], ("B", "C"): eb.psi[l]},
            )
            cone = self.cat.limit(sd)
            legs = {"A": ej.psi[l], "B": ei.psi[l], "C": self.cat.compose(ea.psi[l], ej.psi[l])}
            if not self.cat.is_iso(self.cat.mediate(cone, t.V[l], legs)):
                return False
        return True


def _bijection(src, tgt, forward, backward) -> bool:
    src, tgt = list(src), list(tgt)
    if len(src) != len(tgt):
        return False
    keys = {m.key for m in tgt}
    for f in src:
        g = forward(f)
        if g.key not in keys or backward(g).key != f.key:
            return False
    return True


def staircase_recollement(d: LaxDiagram, n: int, k: int, spines: list, tally: CheckTally | None = None) -> CheckTally:
    """Recollement checks for the spine category split at k, on the given spines."""
    st = _Staircase(d, n, k)
    tally = tally or CheckTally()
    for idx, t in enumerate(spines):
        w = {"split": k, "spine": idx}
        u, z = st.j_upper(t), st.i_upper(t)
        ju = st.j_star(u)
        tally.record("j^*j_* = id", st.j_upper(ju).key == u.key, w)
        iz = st.i_star(z)
        back = st.i_upper(iz)
        tally.record("i^*i_* = id", back[0] == list(z[0]) and all(back[1][l].key == z[1][l].key for l in z[1]), w)
        tally.record("j^*i_* = terminal", all(v.dim == 0 for v in iz.V[: k + 1]), w)
        tally.record("j_* image inverts the new arrows", all(st.cat.is_iso(ju.w[l]) for l in range(k + 1, n + 1)), w)
        tally.record("fracture square", st.fracture_iso(t), w)
        y = spines[(idx * 7 + 3) % len(spines)]
        ylow = st.j_upper(y)
        ok = _bijection(
            spine_homs(y, ju),
            spine_homs(ylow, u),
            lambda m: SpineMap(ylow, u, m.psi[: k + 1]),
            lambda g, y=y: _spine_compose(st.j_star_map(g), st.unit_j(y)),
        )
        tally.record("Hom(y, j_* u) = Hom(j^* y, u)", ok, w)
        yhigh = st.i_upper(y)
        highs = [SpineMap(None, None, psi) for psi in st.high_homs(yhigh, z)]
        ok = _bijection(
            spine_homs(y, iz),
            highs,
            lambda m: SpineMap(None, None, m.psi[k + 1:]),
            lambda g, y=y: _spine_compose(st.i_star_map(g.psi, yhigh, z), st.unit_i(y)),
        )
        tally.record("Hom(y, i_* z) = Hom(i^* y, z)", ok, w)
    return tally


# --- fiber sequences over the 1-simplex --------------------------------------------


def norm_fiber_sequences(s: Section) -> dict:
    """The 3x3 grid built from j_!, j_*, i_*, i^! on a Vect section over a two-element chain.

    Each row and column A -> B -> C is checked to be a kernel sequence at both
    levels: A -> B injective, B -> C kills A, and dim A = dim B - rank(B -> C).
    """
    d = s.diagram
    P = d.base
    lo, hi = P.covers[0]
    dec = Decomposition.from_sieve(P, {lo})
    rec = Recollement(d, dec)
    cat1 = d.fibers[hi]
    alpha = s.phi[(lo, hi)]
    inc = cat1.kernel(alpha)
    i_shriek = Section(d, {lo: VectObj(0), hi: inc.source},
                       {(lo, hi): d.fibers[hi].zero(inc.source, d.push(lo, hi, VectObj(0)))})
    to_x = SectionMap(i_shriek, s, {lo: d.fibers[lo].zero(VectObj(0), s.x[lo]), hi: inc})
    ej = rec.unit_j(s)
    ei = rec.unit_i(s)
    jsh = rec.counit_shriek(s)
    a = ej.target
    ea = rec.unit_i(a)
    eb = rec.i_star_map(rec.i_upper_map(ej))
    i_sh_to_b = SectionMap(i_shriek, ei.target, {lo: d.fibers[lo].zero(VectObj(0), VectObj(0)), hi: inc})
    from .rlaxsections import compose_maps, identity_map

    norm = compose_maps(ej, jsh)
    zero_top = Section(d, {lo: VectObj(0), hi: VectObj(0)}, {(lo, hi): cat1.zero(VectObj(0), VectObj(0))})
    zero_to = lambda t: SectionMap(zero_top, t, {p: d.fibers[p].zero(VectObj(0), t.x[p]) for p in P})
    to_zero = lambda t: SectionMap(t, zero_top, {p: d.fibers[p].zero(t.x[p], VectObj(0)) for p in P})
    jj = jsh.source
    seqs = {
        "row i_*i^!": (zero_to(i_shriek), identity_map(i_shriek)),
        "row x": (jsh, ei),
        "row j_*j^*": (norm, ea),
        "column j_!j^*": (zero_to(jj), identity_map(jj)),
        "column x": (to_x, ej),
        "column i_*i^*": (i_sh_to_b, eb),
    }
    out = {}
    ok_all = True
    for name, (f, g) in seqs.items():
        res = {}
        for p in P:
            cat = d.fibers[p]
            A, B = f.psi[p].source.dim, f.psi[p].target.dim
            inj = cat.rank(f.psi[p]) == A
            zero = not np.any((g.psi[p].mat @ f.psi[p].mat) % cat.p)
            exact = A == B - cat.rank(g.psi[p])
            surj = cat.rank(g.psi[p]) == g.psi[p].target.dim
            res[p] = {"kernel": bool(inj and zero and exact), "right exact": bool(surj)}
            ok_all &= res[p]["kernel"]
        out[name] = res
    squares_ok = all(
        d.fibers[p].eq(d.fibers[p].compose(ea.psi[p], ej.psi[p]), d.fibers[p].compose(eb.psi[p], ei.psi[p]))
        and d.fibers[p].eq(d.fibers[p].compose(ei.psi[p], to_x.psi[p]), i_sh_to_b.psi[p])
        and d.fibers[p].eq(d.fibers[p].compose(ej.psi[p], jsh.psi[p]), norm.psi[p])
        for p in P
    )
    rank_nullity = s.x[hi].dim == inc.source.dim + cat1.rank(alpha)
    return {"ok": bool(ok_all and squares_ok and rank_nullity), "sequences": out, "squares commute": squares_ok,
            "rank-nullity": rank_nullity, "dim i^!": inc.source.dim}


# --- diagram families --------------------------------------------------------------


def _triples(n):
    return [(i, j, k) for i in range(n + 1) for j in range(i + 1, n + 1) for k in range(j + 1, n + 1)]


def _pairs(n):
    return [(i, j) for i in range(n + 1) for j in range(i + 1, n + 1)]


def multiplicity_diagrams(n: int, max_mult: int = 2, p: int = 2):
    """Every multiplicity diagram over the n-simplex for n <= 2 (no 4-chains, so every cell family is valid)."""
    if n > 2:
        raise OutOfRange("exhaustive cell families are only listed for n <= 2")
    pairs, triples = _pairs(n), _triples(n)
    for ms in product(range(max_mult + 1), repeat=len(pairs)):
        mult = dict(zip(pairs, ms))
        shapes = [(mult[(j, k)] * mult[(i, j)], mult[(i, k)]) for (i, j, k) in triples]
        pools = [list(gf.all_matrices(r, c, p)) for r, c in shapes]
        for mats in product(*pools):
            yield MultiplicityDiagram(n, mult, dict(zip(triples, mats)), p)


def gauge_twist(md: MultiplicityDiagram, rng: random.Random) -> MultiplicityDiagram:
    """Conjugate every cell by random automorphisms g_pq of the multiplicity spaces.

    The new cell at (p, q, r) is (g_qr (x) g_pq) M g_pr^-1; the cocycle is preserved.
    """
    p = md.p
    g = {}
    for pq, m in md.mult.items():
        while True:
            a = gf.as_matrix([rng.randrange(p) for _ in range(m * m)], p, (m, m))
            if gf.rank(a, p) == m:
                break
        g[pq] = a
    can = {}
    for (i, j, k), M in md.can.items():
        left = gf.kron(g[(j, k)], g[(i, j)], p)
        can[(i, j, k)] = (left @ M @ gf.inverse(g[(i, k)], p)) % p
    return MultiplicityDiagram(md.n, dict(md.mult), can, p)


def random_multiplicity_diagram(n: int, rng: random.Random, max_mult: int = 2, p: int = 2, tries: int = 2000,
                                invertible_bias: float = 0.5, min_mult: int = 0) -> MultiplicityDiagram:
    """A random diagram whose cells satisfy the cocycle, by rejection sampling."""
    pairs, triples = _pairs(n), _triples(n)
    for _ in range(tries):
        mult = {pq: rng.randrange(min_mult, max_mult + 1) for pq in pairs}
        if rng.random() < invertible_bias:
            # aim for square cells so that invertible ones exist
            for (i, j, k) in triples:
                if k == j + 1 and mult[(i, j)] * mult[(j, k)] <= max_mult:
                    mult[(i, k)] = mult[(i, j)] * mult[(j, k)]
        can = {}
        for (i, j, k) in triples:
            r, c = mult[(j, k)] * mult[(i, j)], mult[(i, k)]
            if r == c and rng.random() < invertible_bias:
                while True:
                    m = gf.as_matrix([rng.randrange(p) for _ in range(r * c)], p, (r, c))
                    if gf.rank(m, p) == r:
                        break
            else:
                m = gf.as_matrix([rng.randrange(p) for _ in range(r * c)], p, (r, c))
            can[(i, j, k)] = m
        md = MultiplicityDiagram(n, mult, can, p)
        if not md.cocycle_failures():
            return md
    raise ValidationFailed(f"no cocycle-valid diagram found in {tries} tries")


# --- the equivalence check ---------------------------------------------------------


def equivalence_check(md: MultiplicityDiagram, bound: int = 2, cap: int | None = None, seed: int = 0,
                      tally: CheckTally | None = None, hom_pairs: int = 2, completion_cap: int | None = 64) -> CheckTally:
    """One-generation versus extendability on sections built from the enumerated spines.

    Extendable spines have all their completions examined; for the others at
    most ``completion_cap`` completions are (every one of them must fail).
    """
    d = md.lax
    n = md.n
    rng = random.Random(seed)
    tally = tally or CheckTally()
    onegen_by_spine = []
    replay = {"kind": "multiplicity", "diagram": md.to_json(), "bound": bound, "cap": cap, "seed": seed,
              "hom_pairs": hom_pairs, "completion_cap": completion_cap}
    for t in enumerate_spines(d, n, bound, cap, rng):
        ext = is_extendable(t)
        wit = lambda t=t: {"spine": [v.dim for v in t.V], "w": {str(k): t.w[k].mat.tolist() for k in t.w},
                           "replay": replay}
        generated = []
        for idx, s in enumerate(complete_sections(t)):
            if not ext.ok and completion_cap is not None and idx >= completion_cap:
                break
            v = is_one_generated(s)
            tally.record("cube limits agree with edge isos", v.agree, wit)
            tally.record("one-generated iff spine extendable", bool(v.cube_limits) == ext.ok, wit)
            if v.cube_limits.ok:
                generated.append(s)
        tally.record("extendable spines have exactly one one-generated completion",
                     len(generated) == (1 if ext.ok else 0), wit)
        if ext.ok:
            e = extend(t)
            tally.record("gamma(extend(t)) = t", gamma_restrict(e).key == t.key, wit)
            tally.record("extend(t) is one-generated", bool(is_one_generated(e).cube_limits), wit)
            tally.record("extend(gamma(s)) = s", all(Section(d, g.x, g.phi).key == e.key for g in generated), wit)
            if len(onegen_by_spine) < 4:
                onegen_by_spine.append(e)
    # gamma is fully faithful on one-generated sections
    for a in onegen_by_spine[:hom_pairs]:
        for b in onegen_by_spine[:hom_pairs]:
            full = list(section_homs(a, b, 4096))
            low = list(spine_homs(gamma_restrict(a), gamma_restrict(b), 4096))
            tally.record("gamma bijective on hom-sets", len(full) == len(low), {"replay": replay})
    return tally
