"""Left-lax diagrams of categories over a finite poset.

A diagram stores a fiber category per element, a pushforward functor
``tau[(p, q)]`` for every strict relation p < q and a comparison cell
``can[(p, q, r)]``: tau^r_p => tau^r_q tau^q_p for every 3-chain, subject to the
cocycle identity on 4-chains.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

import numpy as np

from .concretecats import finset as fs
from .concretecats import gf
from .concretecats.base import Category
from .concretecats.finset import CopshCat, CoPresheaf, PresheafMap
from .concretecats.vect import LinMap, VectCat, VectObj, multiplicity_map, multiplicity_obj
from .poset import FinPoset, MonotoneMap, point

__all__ = [
    "Stage",
    "Restrict",
    "Rke",
    "Pushforward",
    "ExtendBySingleton",
    "ExtendByEmpty",
    "Multiplicity",
    "Power",
    "FunctorSpec",
    "CanCell",
    "IdentityCan",
    "MatrixCan",
    "PowerCan",
    "FunctionCan",
    "LaxDiagram",
    "Violation",
    "ValidationReport",
    "validate",
    "restrict_diagram",
    "strict_diagram",
    "power_diagram",
    "multiplicity_lax",
    "sample_objects",
    "sample_morphisms",
    "semigroup_tables",
]


# --- primitive stages ------------------------------------------------------


class Stage:
    src: Category
    tgt: Category

    def on_obj(self, x):
        raise NotImplementedError

    def on_mor(self, f):
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


class Restrict(Stage):
    """Precompose with a monotone map f: K' -> K."""

    def __init__(self, f: MonotoneMap):
        self.f = f
        self.src, self.tgt = CopshCat(f.target), CopshCat(f.source)

    def on_obj(self, x):
        return fs.restrict(self.f, x)

    def on_mor(self, g):
        return fs.restrict_map(self.f, g)

    def describe(self):
        return {"stage": "restrict", "source": self.f.source.to_json(), "assignment": dict(self.f.assignment)}


class Pushforward(Stage):
    """Direct image along a monotone map (right Kan extension)."""

    def __init__(self, g: MonotoneMap):
        self.g = g
        self.src, self.tgt = CopshCat(g.source), CopshCat(g.target)

    def on_obj(self, x):
        return fs.pushforward(self.g, x)

    def on_mor(self, f):
        return fs.pushforward_map(self.g, f)

    def describe(self):
        return {"stage": "pushforward", "target": self.g.target.to_json(), "assignment": dict(self.g.assignment)}


class Rke(Pushforward):
    """Right Kan extension along a full subposet ``sub`` of K."""

    def __init__(self, sub: FinPoset, K: FinPoset):
        super().__init__(MonotoneMap.inclusion(sub, K))
        self.sub, self.K = sub, K

    def describe(self):
        return {"stage": "rke", "space": self.K.to_json(), "sub": list(self.sub.elements)}


class ExtendBySingleton(Stage):
    def __init__(self, K: FinPoset, Z):
        self.K, self.Z = K, frozenset(Z)
        self.src, self.tgt = CopshCat(K.subposet(self.Z)), CopshCat(K)

    def on_obj(self, x):
        return fs.extend_by_singleton(self.K, self.Z, x)

    def on_mor(self, f):
        return fs.extend_by_singleton_map(self.K, self.Z, f)

    def describe(self):
        return {"stage": "extend_by_singleton", "space": self.K.to_json(), "support": self.K.sort(self.Z)}


class ExtendByEmpty(Stage):
    def __init__(self, K: FinPoset, Z):
        self.K, self.Z = K, frozenset(Z)
        self.src, self.tgt = CopshCat(K.subposet(self.Z)), CopshCat(K)

    def on_obj(self, x):
        return fs.extend_by_empty(self.K, self.Z, x)

    def on_mor(self, f):
        return fs.extend_by_empty_map(self.K, self.Z, f)

    def describe(self):
        return {"stage": "extend_by_empty", "space": self.K.to_json(), "support": self.K.sort(self.Z)}


class Multiplicity(Stage):
    """V -> F^m (x) V on vector spaces."""

    def __init__(self, m: int, p: int = 2):
        self.m = m
        self.src = self.tgt = VectCat(p)

    def on_obj(self, x):
        return multiplicity_obj(self.m, x)

    def on_mor(self, f):
        return multiplicity_map(self.m, f)

    def describe(self):
        return {"stage": "multiplicity", "m": self.m}


class Power(Stage):
    """Pointwise exponential F -> F^n of copresheaves; elements become n-tuples."""

    def __init__(self, n: int, shape: FinPoset):
        self.n = n
        self.src = self.tgt = CopshCat(shape)

    def _pow(self, s):
        from itertools import product

        return tuple(product(s, repeat=self.n))

    def on_obj(self, x: CoPresheaf):
        sets = {q: self._pow(s) for q, s in x.sets.items()}
        maps = {c: {t: tuple(m[e] for e in t) for t in sets[c[0]]} for c, m in x.cov.items()}
        return CoPresheaf(x.shape, sets, maps, check=False)

    def on_mor(self, f: PresheafMap):
        src, tgt = self.on_obj(f.source), self.on_obj(f.target)
        comps = {q: {t: tuple(c[e] for e in t) for t in src.sets[q]} for q, c in f.comps.items()}
        return PresheafMap(src, tgt, comps, check=False)

    def describe(self):
        return {"stage": "power", "n": self.n}


class FunctorSpec:
    """A pipeline of primitive stages, evaluated with memoization."""

    _CACHE_CAP = 50_000

    def __init__(self, src: Category, tgt: Category, stages: list | tuple = ()):
        stages = list(stages)
        cur = src
        for st in stages:
            if st.src != cur:
                raise ValueError(f"stage {st.describe()['stage']} expects {st.src!r}, got {cur!r}")
            cur = st.tgt
        if cur != tgt:
            raise ValueError(f"pipeline ends in {cur!r}, expected {tgt!r}")
        self.src, self.tgt, self.stages = src, tgt, stages
        self._obj, self._mor = {}, {}

    def obj(self, x):
        k = x.key
        r = self._obj.get(k)
        if r is None:
            r = x
            for st in self.stages:
                r = st.on_obj(r)
            if len(self._obj) > self._CACHE_CAP:
                self._obj.clear()
            self._obj[k] = r
        return r

    def mor(self, f):
        k = f.key
        r = self._mor.get(k)
        if r is None:
            r = f
            for st in self.stages:
                r = st.on_mor(r)
            if len(self._mor) > self._CACHE_CAP:
                self._mor.clear()
            self._mor[k] = r
        return r

    def describe(self) -> list:
        return [st.describe() for st in self.stages]


# --- comparison cells ------------------------------------------------------


class CanCell:
    """Produces can_{pqr}(x): tau^r_p x -> tau^r_q tau^q_p x."""

    kind = "abstract"

    def __call__(self, d: "LaxDiagram", p, q, r, x):
        raise NotImplementedError

    def describe(self):
        return self.kind


class IdentityCan(CanCell):
    kind = "identity"

    def __call__(self, d, p, q, r, x):
        a, b = d.push(p, r, x), d.push(q, r, d.push(p, q, x))
        if not d.fibers[r].same(a, b):
            raise ValueError(f"identity cell at {(p, q, r)} between different objects")
        return d.fibers[r].identity(a)


class MatrixCan(CanCell):
    """Vect cell given by a fixed matrix M: it acts as M (x) id_V."""

    kind = "matrix"

    def __init__(self, mat):
        self.mat = np.array(mat, dtype=np.int64)

    def __call__(self, d, p, q, r, x: VectObj):
        cat = d.fibers[r]
        a, b = d.push(p, r, x), d.push(q, r, d.push(p, q, x))
        return LinMap(a, b, np.kron(self.mat, gf.eye(x.dim)), cat.p)

    def describe(self):
        return self.mat.tolist()


class PowerCan(CanCell):
    """Cell between exponentials induced by a map c: A_pq x A_qr -> A_pr (f -> f o c)."""

    kind = "power"

    def __init__(self, table: dict, n_pq: int, n_qr: int):
        self.table, self.n_pq, self.n_qr = dict(table), n_pq, n_qr

    def __call__(self, d, p, q, r, x: CoPresheaf):
        a, b = d.push(p, r, x), d.push(q, r, d.push(p, q, x))
        t = self.table
        comps = {
            k: {f: tuple(tuple(f[t[(i, j)]] for i in range(self.n_pq)) for j in range(self.n_qr)) for f in s}
            for k, s in a.sets.items()
        }
        return PresheafMap(a, b, comps, check=False)

    def describe(self):
        return {"power": [[i, j, v] for (i, j), v in sorted(self.table.items())]}


class FunctionCan(CanCell):
    def __init__(self, fn, kind: str = "function"):
        self.fn, self.kind = fn, kind

    def __call__(self, d, p, q, r, x):
        return self.fn(d, p, q, r, x)


# --- diagrams ------------------------------------------------------------------


class LaxDiagram:
    def __init__(self, base: FinPoset, fibers: dict, tau: dict, can: dict, *, toposic: bool = True, name: str = ""):
        self.base = base
        self.fibers = dict(fibers)
        self.tau = dict(tau)
        self.can = dict(can)
        self.toposic = toposic
        self.name = name
        self.source = None  # input description, when the diagram came from one
        for (p, q) in base.strict_pairs:
            if (p, q) not in self.tau:
                raise ValueError(f"missing pushforward for {p!r}<{q!r}")
            t = self.tau[(p, q)]
            if t.src != self.fibers[p] or t.tgt != self.fibers[q]:
                raise ValueError(f"pushforward {p!r}<{q!r} has the wrong fibers")
        for c in self.triples():
            if c not in self.can:
                raise ValueError(f"missing comparison cell at {c!r}")
        self._can_cache: dict = {}

    def __repr__(self):
        return f"LaxDiagram({self.name or list(self.base.elements)!r})"

    def triples(self) -> list:
        return [c for c in self.chains_of(3)]

    def chains_of(self, n: int) -> list:
        return [c for c in self.base.chains() if len(c) == n]

    def push(self, p, q, x):
        if p == q:
            return x
        return self.tau[(p, q)].obj(x)

    def push_mor(self, p, q, f):
        if p == q:
            return f
        return self.tau[(p, q)].mor(f)

    def can_at(self, p, q, r, x):
        k = (p, q, r, x.key)
        m = self._can_cache.get(k)
        if m is None:
            m = self.can[(p, q, r)](self, p, q, r, x)
            if len(self._can_cache) > 50_000:
                self._can_cache.clear()
            self._can_cache[k] = m
        return m

    def push_chain(self, chain, x):
        """tau^{c_n}_{c_{n-1}} ... tau^{c_1}_{c_0} x."""
        for a, b in zip(chain, chain[1:]):
            x = self.push(a, b, x)
        return x

    def push_chain_mor(self, chain, f):
        for a, b in zip(chain, chain[1:]):
            f = self.push_mor(a, b, f)
        return f

    def describe(self) -> dict:
        return {
            "name": self.name,
            "base": self.base.to_json(),
            "toposic": self.toposic,
            "tau": {f"{p}<{q}": t.describe() for (p, q), t in self.tau.items()},
            "can": {"<".join(map(str, c)): cc.describe() for c, cc in self.can.items()},
        }


def restrict_diagram(d: LaxDiagram, subset) -> LaxDiagram:
    """The diagram over the full subposet on ``subset``."""
    sub = d.base.subposet(subset)
    s = set(sub.elements)
    return LaxDiagram(
        sub,
        {p: d.fibers[p] for p in sub},
        {k: v for k, v in d.tau.items() if k[0] in s and k[1] in s},
        {k: v for k, v in d.can.items() if all(e in s for e in k)},
        toposic=d.toposic,
        name=d.name,
    )


# --- sampling ------------------------------------------------------------------

_OBJ_CACHE: dict = {}


def sample_objects(cat: Category, bound: int, n: int, rng: random.Random) -> list:
    key = (cat, bound)
    if key not in _OBJ_CACHE:
        _OBJ_CACHE[key] = list(cat.objects(bound))
    pool = _OBJ_CACHE[key]
    if len(pool) <= n:
        return list(pool)
    return rng.sample(pool, n)


def sample_morphisms(cat: Category, x, y, n: int, rng: random.Random, cap: int = 512) -> list:
    pool = []
    for i, f in enumerate(cat.homs(x, y)):
        if i >= cap:
            break
        pool.append(f)
    if len(pool) <= n:
        return pool
    return rng.sample(pool, n)


# --- validation ----------------------------------------------------------------


@dataclass
class Violation:
    kind: str
    where: tuple
    detail: str = ""

    def to_json(self):
        return {"kind": self.kind, "where": [str(w) for w in self.where], "detail": self.detail}


@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)
    checks: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return not self.violations

    def count(self, name: str, k: int = 1):
        self.checks[name] = self.checks.get(name, 0) + k

    def to_json(self):
        return {"ok": self.ok, "checks": self.checks, "violations": [v.to_json() for v in self.violations]}


def _pullback_preserved(cat_src, cat_tgt, F: FunctorSpec, f, g) -> bool:
    cone = cat_src.pullback(f, g)
    img = cat_tgt.pullback(F.mor(f), F.mor(g))
    legs = {"a": F.mor(cone.legs["a"]), "b": F.mor(cone.legs["b"]), "c": F.mor(cone.legs["c"])}
    comp = cat_tgt.mediate(img, F.obj(cone.obj), legs)
    return cat_tgt.is_iso(comp)


def validate(d: LaxDiagram, budget: int = 6, bound: int = 2, seed: int = 0) -> ValidationReport:
    """Spot-check functoriality, cell typing, naturality, the cocycle and (if toposic) left exactness."""
    rng = random.Random(seed)
    rep = ValidationReport()
    samples = {p: sample_objects(d.fibers[p], bound, budget, rng) for p in d.base}

    for (p, q), F in d.tau.items():
        cq = d.fibers[q]
        cp = d.fibers[p]
        xs = samples[p]
        for x in xs:
            if not cq.eq(F.mor(cp.identity(x)), cq.identity(F.obj(x))):
                rep.violations.append(Violation("functoriality", (p, q), "identity not preserved"))
            rep.count("functoriality")
        for x, y, z in zip(xs, xs[1:], xs[2:]):
            for f in sample_morphisms(cp, x, y, 2, rng):
                for g in sample_morphisms(cp, y, z, 2, rng):
                    lhs = F.mor(cp.compose(g, f))
                    rhs = cq.compose(F.mor(g), F.mor(f))
                    if not cq.eq(lhs, rhs):
                        rep.violations.append(Violation("functoriality", (p, q), "composite not preserved"))
                    rep.count("functoriality")
        if d.toposic:
            if not cq.is_terminal(F.obj(cp.terminal())):
                rep.violations.append(Violation("left-exactness", (p, q), "terminal not preserved"))
            rep.count("left-exactness")
            for c in xs[:3]:
                for a in xs[:3]:
                    fa = sample_morphisms(cp, a, c, 1, rng)
                    fb = sample_morphisms(cp, xs[-1], c, 1, rng)
                    if fa and fb:
                        if not _pullback_preserved(cp, cq, F, fa[0], fb[0]):
                            rep.violations.append(Violation("left-exactness", (p, q), "pullback not preserved"))
                        rep.count("left-exactness")

    for (p, q, r) in d.triples():
        cr = d.fibers[r]
        cp = d.fibers[p]
        for x in samples[p]:
            try:
                m = d.can_at(p, q, r, x)
            except Exception as exc:  # a malformed cell is reported, not raised
                rep.violations.append(Violation("typing", (p, q, r), str(exc)))
                continue
            if not (cr.same(m.source, d.push(p, r, x)) and cr.same(m.target, d.push(q, r, d.push(p, q, x)))):
                rep.violations.append(Violation("typing", (p, q, r), "cell has the wrong endpoints"))
            rep.count("typing")
        xs = samples[p]
        for x, y in zip(xs, xs[1:] + xs[:1]):
            for f in sample_morphisms(cp, x, y, 2, rng):
                lhs = cr.compose(d.push_mor(q, r, d.push_mor(p, q, f)), d.can_at(p, q, r, x))
                rhs = cr.compose(d.can_at(p, q, r, y), d.push_mor(p, r, f))
                if not cr.eq(lhs, rhs):
                    rep.violations.append(Violation("naturality", (p, q, r), "square does not commute"))
                rep.count("naturality")

    for (p, q, r, s) in d.chains_of(4):
        cs = d.fibers[s]
        for x in samples[p]:
            via_r = cs.compose(d.push_mor(r, s, d.can_at(p, q, r, x)), d.can_at(p, r, s, x))
            via_q = cs.compose(d.can_at(q, r, s, d.push(p, q, x)), d.can_at(p, q, s, x))
            if not cs.eq(via_r, via_q):
                rep.violations.append(Violation("cocycle", (p, q, r, s), f"fails at object of size {_size(x)}"))
            rep.count("cocycle")
    return rep


def _size(x):
    return x.dim if isinstance(x, VectObj) else x.sizes()


# --- builders ------------------------------------------------------------------


def strict_diagram(P: FinPoset, cat: Category, name: str = "strict") -> LaxDiagram:
    """Identity pushforwards and identity cells."""
    tau = {(p, q): FunctorSpec(cat, cat) for (p, q) in P.strict_pairs}
    can = {c: IdentityCan() for c in _triples(P)}
    d = LaxDiagram(P, {p: cat for p in P}, tau, can, name=name)
    fiber = {"field": cat.p} if isinstance(cat, VectCat) else {"shape": cat.shape.to_json()}
    d.source = {"kind": "strict", "name": name, "base": P.to_json(), "fiber": fiber}
    return d


def _triples(P: FinPoset) -> list:
    return [c for c in P.chains() if len(c) == 3]


def power_diagram(P: FinPoset, exps: dict, tables: dict, shape: FinPoset | None = None, name: str = "power") -> LaxDiagram:
    """Fibers Fun(shape, FinSet); tau^q_p = (-)^{exps[p,q]}; cells from the maps in ``tables``.

    ``tables[(p, q, r)]`` maps (i, j) with i < exps[p,q], j < exps[q,r] to an index < exps[p,r].
    """
    shape = shape or point()
    cat = CopshCat(shape)
    tau = {}
    for (p, q) in P.strict_pairs:
        n = exps[(p, q)]
        tau[(p, q)] = FunctorSpec(cat, cat, [Power(n, shape)])
    can = {(p, q, r): PowerCan(tables[(p, q, r)], exps[(p, q)], exps[(q, r)]) for (p, q, r) in _triples(P)}
    d = LaxDiagram(P, {p: cat for p in P}, tau, can, name=name)
    d.source = {
        "kind": "power",
        "name": name,
        "base": P.to_json(),
        "shape": shape.to_json(),
        "exps": {f"{p}<{q}": n for (p, q), n in exps.items()},
        "tables": {"<".join(c): [[i, j, v] for (i, j), v in sorted(t.items())] for c, t in tables.items()},
    }
    return d


def multiplicity_lax(P: FinPoset, mult: dict, mats: dict, p: int = 2, name: str = "multiplicity") -> LaxDiagram:
    """Vect fibers, tau^q_p = multiplicity mult[(p,q)], cells from the matrices ``mats``."""
    cat = VectCat(p)
    tau = {pq: FunctorSpec(cat, cat, [Multiplicity(mult[pq], p)]) for pq in P.strict_pairs}
    can = {}
    for (a, b, c) in _triples(P):
        m = np.array(mats[(a, b, c)], dtype=np.int64).reshape(mult[(b, c)] * mult[(a, b)], mult[(a, c)]) % p
        can[(a, b, c)] = MatrixCan(m)
    return LaxDiagram(P, {e: cat for e in P}, tau, can, name=name)


def semigroup_tables(P: FinPoset, exps: dict, mul) -> dict:
    """Cell tables from an associative operation; exps must be 0 or the carrier size."""
    tables = {}
    for (p, q, r) in _triples(P):
        tables[(p, q, r)] = {
            (i, j): mul(i, j) for i in range(exps[(p, q)]) for j in range(exps[(q, r)])
        }
    return tables



