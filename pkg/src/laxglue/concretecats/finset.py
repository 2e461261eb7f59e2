"""Copresheaves of finite sets on a finite poset.

Functors K -> FinSet model sheaves on the Alexandroff space K (open sets are
the cosieves).  Elements of the sets are arbitrary hashables; limits produce
tuples of elements, and the empty tuple ``()`` is the canonical point.
"""

from __future__ import annotations

from functools import lru_cache
from itertools import product
from typing import Iterable

from ..errors import OrientationViolation
from ..poset import FinPoset, MonotoneMap
from .base import Category, LimitCone, ShapedDiagram

POINT = ()

__all__ = [
    "POINT",
    "CoPresheaf",
    "PresheafMap",
    "CopshCat",
    "restrict",
    "restrict_map",
    "pushforward",
    "pushforward_map",
    "pushforward_unit",
    "rke",
    "rke_map",
    "rke_unit",
    "extend_by_singleton",
    "extend_by_singleton_map",
    "singleton_unit",
    "extend_by_empty",
    "extend_by_empty_map",
    "constant",
]


class CoPresheaf:
    """Sets on the points of ``shape`` and functions along its covering relations."""

    __slots__ = ("shape", "sets", "cov", "_trans", "_key")

    def __init__(self, shape: FinPoset, sets: dict, maps: dict | None = None, *, check: bool = True):
        self.shape = shape
        self.sets = {q: tuple(sets[q]) for q in shape.elements}
        maps = maps or {}
        cov = {}
        for a, b in shape.covers:
            m = maps.get((a, b))
            if m is None:
                if not self.sets[a]:
                    m = {}
                elif len(self.sets[b]) == 1:
                    m = {x: self.sets[b][0] for x in self.sets[a]}
                else:
                    raise ValueError(f"missing transition {a!r}<={b!r}")
            cov[(a, b)] = dict(m)
        self.cov = cov
        self._trans = {}
        self._key = None
        if check:
            self._validate(maps)

    def _validate(self, given: dict) -> None:
        for (a, b), m in self.cov.items():
            tgt = set(self.sets[b])
            if set(m) != set(self.sets[a]) or not set(m.values()) <= tgt:
                raise ValueError(f"transition {a!r}<={b!r} is not a function {a!r} -> {b!r}")
        sh = self.shape
        for a in sh.elements:
            for b in sh.up(a):
                if a == b:
                    continue
                routes = [
                    {x: self.trans(c, b)[y] for x, y in self.cov[(a, c)].items()}
                    for c in sh.upper_covers(a)
                    if sh.leq(c, b)
                ]
                if any(r != routes[0] for r in routes[1:]):
                    raise ValueError(f"transitions {a!r}<={b!r} depend on the route")
        for (a, b), m in given.items():
            if (a, b) not in self.cov and a != b and dict(m) != self.trans(a, b):
                raise ValueError(f"given transition {a!r}<={b!r} disagrees with the composite")

    def __call__(self, q) -> tuple:
        return self.sets[q]

    def trans(self, a, b) -> dict:
        if a == b:
            return {x: x for x in self.sets[a]}
        if (a, b) in self.cov:
            return self.cov[(a, b)]
        t = self._trans.get((a, b))
        if t is None:
            for c in self.shape.upper_covers(a):
                if self.shape.leq(c, b):
                    rest = self.trans(c, b)
                    t = {x: rest[y] for x, y in self.cov[(a, c)].items()}
                    break
            else:
                raise ValueError(f"{a!r} is not below {b!r}")
            self._trans[(a, b)] = t
        return t

    @property
    def key(self):
        if self._key is None:
            self._key = (
                self.shape,
                frozenset((q, frozenset(s)) for q, s in self.sets.items()),
                frozenset((c, frozenset(m.items())) for c, m in self.cov.items()),
            )
        return self._key

    def sizes(self) -> dict:
        return {q: len(s) for q, s in self.sets.items()}

    def __eq__(self, other):
        return isinstance(other, CoPresheaf) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"CoPresheaf(sizes={self.sizes()})"


class PresheafMap:
    __slots__ = ("source", "target", "comps", "_key")

    def __init__(self, source: CoPresheaf, target: CoPresheaf, comps: dict, *, check: bool = True):
        self.source = source
        self.target = target
        self.comps = {q: dict(comps[q]) for q in source.shape.elements}
        self._key = None
        if check:
            self._validate()

    def _validate(self):
        s, t = self.source, self.target
        if s.shape != t.shape:
            raise ValueError("shape mismatch")
        for q in s.shape.elements:
            c = self.comps[q]
            if set(c) != set(s.sets[q]) or not set(c.values()) <= set(t.sets[q]):
                raise ValueError(f"component at {q!r} is not a function")
        for (a, b) in s.shape.covers:
            sa, ta = s.cov[(a, b)], t.cov[(a, b)]
            ca, cb = self.comps[a], self.comps[b]
            for x in s.sets[a]:
                if cb[sa[x]] != ta[ca[x]]:
                    raise ValueError(f"naturality fails along {a!r}<={b!r}")

    @property
    def key(self):
        if self._key is None:
            self._key = (
                self.source.key,
                self.target.key,
                frozenset((q, frozenset(c.items())) for q, c in self.comps.items()),
            )
        return self._key

    def __eq__(self, other):
        return isinstance(other, PresheafMap) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"PresheafMap({self.source!r} -> {self.target!r})"


def constant(shape: FinPoset, values: Iterable) -> CoPresheaf:
    vals = tuple(values)
    return CoPresheaf(shape, {q: vals for q in shape}, {c: {x: x for x in vals} for c in shape.covers}, check=False)


# --- limits over subposets ------------------------------------------------


class _SubLimit:
    """Encoding of compatible families over a subposet S of a copresheaf's shape.

    If S has a minimum m a family is recorded by its value at m; otherwise by
    the tuple of its values along S.linear.
    """

    __slots__ = ("S", "m", "order")

    def __init__(self, S: FinPoset):
        self.S = S
        self.m = S.minimum()
        self.order = S.linear

    def families(self, F: CoPresheaf) -> list:
        if self.m is not None:
            return list(F.sets[self.m])
        return _families(self.S, lambda j: F.sets[j], lambda u, v: F.trans(u, v))

    def decode(self, F: CoPresheaf, e) -> dict:
        if self.m is not None:
            return {v: F.trans(self.m, v)[e] for v in self.order}
        return dict(zip(self.order, e))

    def encode(self, fam: dict):
        if self.m is not None:
            return fam[self.m]
        return tuple(fam[v] for v in self.order)


def _families(S: FinPoset, values, edge) -> list:
    """Compatible families of a diagram over S, as tuples along S.linear."""
    order = S.linear
    mins = S.minimal()
    lowers = {v: S.lower_covers(v) for v in order}
    out = []
    for choice in product(*(values(j) for j in mins)):
        val = dict(zip(mins, choice))
        ok = True
        for v in order:
            if v in val:
                continue
            lows = lowers[v]
            first = edge(lows[0], v)[val[lows[0]]]
            for u in lows[1:]:
                if edge(u, v)[val[u]] != first:
                    ok = False
                    break
            if not ok:
                break
            val[v] = first
        if ok:
            out.append(tuple(val[j] for j in order))
    return out


@lru_cache(maxsize=4096)
def _sub(K: FinPoset, subset: frozenset) -> FinPoset:
    return K.subposet(subset)


@lru_cache(maxsize=4096)
def _fiber_limits(g: MonotoneMap) -> dict:
    Q, T = g.source, g.target
    return {t: _SubLimit(_sub(Q, g.preimage(T.up(t)))) for t in T.elements}


def pushforward(g: MonotoneMap, F: CoPresheaf) -> CoPresheaf:
    """Direct image along a monotone map: value at t is the limit of F over g^-1(up(t))."""
    T = g.target
    subs = _fiber_limits(g)
    sets = {t: subs[t].families(F) for t in T.elements}
    maps = {}
    for a, b in T.covers:
        sa, sb = subs[a], subs[b]
        maps[(a, b)] = {e: sb.encode(sa.decode(F, e)) for e in sets[a]}
    return CoPresheaf(T, sets, maps, check=False)


def pushforward_map(g: MonotoneMap, phi: PresheafMap) -> PresheafMap:
    src, tgt = pushforward(g, phi.source), pushforward(g, phi.target)
    subs = _fiber_limits(g)
    comps = {}
    for t in g.target.elements:
        s = subs[t]
        comps[t] = {
            e: s.encode({v: phi.comps[v][x] for v, x in s.decode(phi.source, e).items()}) for e in src.sets[t]
        }
    return PresheafMap(src, tgt, comps, check=False)


def pushforward_unit(g: MonotoneMap, F: CoPresheaf) -> PresheafMap:
    """F -> g_* g^* F for a copresheaf F on the target of g."""
    back = restrict(g, F)
    tgt = pushforward(g, back)
    subs = _fiber_limits(g)
    comps = {}
    for t in g.target.elements:
        s = subs[t]
        comps[t] = {x: s.encode({v: F.trans(t, g(v))[x] for v in s.order}) for x in F.sets[t]}
    return PresheafMap(F, tgt, comps, check=False)


def _inclusion(sub, K: FinPoset) -> MonotoneMap:
    S = sub if isinstance(sub, FinPoset) else _sub(K, frozenset(sub))
    return _incl_cached(S, K)


@lru_cache(maxsize=4096)
def _incl_cached(S: FinPoset, K: FinPoset) -> MonotoneMap:
    return MonotoneMap(S, K, {e: e for e in S})


def rke(sub, K: FinPoset, F: CoPresheaf) -> CoPresheaf:
    """Right Kan extension along a full subposet ``sub`` of K."""
    return pushforward(_inclusion(sub, K), F)


def rke_map(sub, K: FinPoset, phi: PresheafMap) -> PresheafMap:
    return pushforward_map(_inclusion(sub, K), phi)


def rke_unit(sub, K: FinPoset, F: CoPresheaf) -> PresheafMap:
    """F -> rke(restrict F) for F on K."""
    return pushforward_unit(_inclusion(sub, K), F)


def restrict(f: MonotoneMap, F: CoPresheaf) -> CoPresheaf:
    S = f.source
    sets = {s: F.sets[f(s)] for s in S.elements}
    maps = {(a, b): F.trans(f(a), f(b)) for a, b in S.covers}
    return CoPresheaf(S, sets, maps, check=False)


def restrict_map(f: MonotoneMap, phi: PresheafMap) -> PresheafMap:
    src, tgt = restrict(f, phi.source), restrict(f, phi.target)
    return PresheafMap(src, tgt, {s: phi.comps[f(s)] for s in f.source.elements}, check=False)


def _check_sub(K: FinPoset, Z, F: CoPresheaf, need: str) -> frozenset:
    z = frozenset(Z)
    rest = frozenset(K.elements) - z
    ok = K.is_cosieve(rest) if need == "cosieve" else K.is_sieve(rest)
    if not ok:
        raise OrientationViolation(f"complement of the support must be a {need}")
    if F is not None and F.shape != _sub(K, z):
        raise ValueError("copresheaf shape does not match the support")
    return z


def extend_by_singleton(K: FinPoset, Z, F: CoPresheaf) -> CoPresheaf:
    """F on Z, a point off Z; the complement of Z must be a cosieve."""
    z = _check_sub(K, Z, F, "cosieve")
    sets = {q: (F.sets[q] if q in z else (POINT,)) for q in K.elements}
    maps = {}
    for a, b in K.covers:
        if a in z and b in z:
            maps[(a, b)] = F.trans(a, b)
        else:
            maps[(a, b)] = {x: POINT for x in sets[a]}
    return CoPresheaf(K, sets, maps, check=False)


def extend_by_singleton_map(K: FinPoset, Z, phi: PresheafMap) -> PresheafMap:
    src = extend_by_singleton(K, Z, phi.source)
    tgt = extend_by_singleton(K, Z, phi.target)
    z = frozenset(Z)
    comps = {q: (phi.comps[q] if q in z else {POINT: POINT}) for q in K.elements}
    return PresheafMap(src, tgt, comps, check=False)


def singleton_unit(K: FinPoset, Z, F: CoPresheaf) -> PresheafMap:
    """F -> extend_by_singleton(F restricted to Z)."""
    z = frozenset(Z)
    tgt = extend_by_singleton(K, z, restrict(_inclusion(z, K), F))
    comps = {q: ({x: x for x in F.sets[q]} if q in z else {x: POINT for x in F.sets[q]}) for q in K.elements}
    return PresheafMap(F, tgt, comps, check=False)


def extend_by_empty(K: FinPoset, Z, F: CoPresheaf) -> CoPresheaf:
    """F on Z, empty off Z; the complement of Z must be a sieve."""
    z = _check_sub(K, Z, F, "sieve")
    sets = {q: (F.sets[q] if q in z else ()) for q in K.elements}
    maps = {(a, b): (F.trans(a, b) if a in z else {}) for a, b in K.covers}
    return CoPresheaf(K, sets, maps, check=False)


def extend_by_empty_map(K: FinPoset, Z, phi: PresheafMap) -> PresheafMap:
    src = extend_by_empty(K, Z, phi.source)
    tgt = extend_by_empty(K, Z, phi.target)
    z = frozenset(Z)
    comps = {q: (phi.comps[q] if q in z else {}) for q in K.elements}
    return PresheafMap(src, tgt, comps, check=False)


# --- the category --------------------------------------------------------


def _natural_assignments(A: CoPresheaf, B: CoPresheaf, injective: bool):
    """All natural families of functions A -> B (injective ones when asked)."""
    K = A.shape
    slots = [(q, x) for q in K.linear for x in A.sets[q]]
    pre: dict = {}
    for (p, q), m in A.cov.items():
        for x, y in m.items():
            pre.setdefault((q, y), []).append((p, x, B.cov[(p, q)]))
    f = {q: {} for q in K.elements}
    used = {q: set() for q in K.elements}

    def rec(i):
        if i == len(slots):
            yield {q: dict(c) for q, c in f.items()}
            return
        q, y = slots[i]
        forced = {bm[f[p][x]] for p, x, bm in pre.get((q, y), ())}
        if len(forced) > 1:
            return
        cands = list(forced) if forced else B.sets[q]
        for c in cands:
            if injective and c in used[q]:
                continue
            f[q][y] = c
            used[q].add(c)
            yield from rec(i + 1)
            used[q].discard(c)
            del f[q][y]

    yield from rec(0)


def _profile(F: CoPresheaf):
    out = []
    for (a, b), m in sorted(F.cov.items(), key=lambda kv: (F.shape.rank(kv[0][0]), F.shape.rank(kv[0][1]))):
        counts = {}
        for y in m.values():
            counts[y] = counts.get(y, 0) + 1
        out.append(tuple(sorted(counts.get(y, 0) for y in F.sets[b])))
    return (tuple(len(F.sets[q]) for q in F.shape.linear), tuple(out))


class CopshCat(Category):
    """Fun(K, FinSet) for a finite poset K."""

    name = "finset"

    def __init__(self, shape: FinPoset):
        self.shape = shape
        self._terminal = CoPresheaf(shape, {q: (POINT,) for q in shape}, None, check=False)
        self._initial = CoPresheaf(shape, {q: () for q in shape}, None, check=False)

    def __eq__(self, other):
        return isinstance(other, CopshCat) and other.shape == self.shape

    def __hash__(self):
        return hash(("finset", self.shape))

    def __repr__(self):
        return f"CopshCat({list(self.shape.elements)!r})"

    def identity(self, x: CoPresheaf) -> PresheafMap:
        return PresheafMap(x, x, {q: {e: e for e in s} for q, s in x.sets.items()}, check=False)

    def compose(self, g: PresheafMap, f: PresheafMap) -> PresheafMap:
        if f.target.key != g.source.key:
            raise ValueError("composing non-composable maps")
        comps = {q: {x: g.comps[q][y] for x, y in c.items()} for q, c in f.comps.items()}
        return PresheafMap(f.source, g.target, comps, check=False)

    def is_iso(self, f: PresheafMap) -> bool:
        for q, c in f.comps.items():
            if len(c) != len(f.target.sets[q]) or len(set(c.values())) != len(c):
                return False
        return True

    def inverse(self, f: PresheafMap) -> PresheafMap:
        if not self.is_iso(f):
            raise ValueError("not an isomorphism")
        comps = {q: {y: x for x, y in c.items()} for q, c in f.comps.items()}
        return PresheafMap(f.target, f.source, comps, check=False)

    def terminal(self) -> CoPresheaf:
        return self._terminal

    def initial(self) -> CoPresheaf:
        return self._initial

    def is_terminal(self, x: CoPresheaf) -> bool:
        return all(len(s) == 1 for s in x.sets.values())

    def is_initial(self, x: CoPresheaf) -> bool:
        return all(len(s) == 0 for s in x.sets.values())

    def to_terminal(self, x: CoPresheaf, t: CoPresheaf | None = None) -> PresheafMap:
        t = self._terminal if t is None else t
        if not self.is_terminal(t):
            raise ValueError("target is not terminal")
        return PresheafMap(x, t, {q: {e: t.sets[q][0] for e in s} for q, s in x.sets.items()}, check=False)

    def from_initial(self, y: CoPresheaf, e: CoPresheaf | None = None) -> PresheafMap:
        e = self._initial if e is None else e
        if not self.is_initial(e):
            raise ValueError("source is not initial")
        return PresheafMap(e, y, {q: {} for q in self.shape}, check=False)

    def limit(self, d: ShapedDiagram) -> LimitCone:
        J = d.shape
        for v in J.elements:
            if not isinstance(d.objects[v], CoPresheaf) or d.objects[v].shape != self.shape:
                from ..errors import MixedBackend

                raise MixedBackend(f"vertex {v!r} is not a copresheaf on the fiber shape")
        m = J.minimum()
        if m is not None:
            return LimitCone(d.objects[m], {j: d.mor(m, j) for j in J.elements}, d, ("min", m))
        order = J.linear
        sets = {}
        for k in self.shape.elements:
            sets[k] = _families(J, lambda j: d.objects[j].sets[k], lambda u, v: d.edges[(u, v)].comps[k])
        maps = {}
        for a, b in self.shape.covers:
            ts = [d.objects[j].cov[(a, b)] for j in order]
            maps[(a, b)] = {fam: tuple(t[x] for t, x in zip(ts, fam)) for fam in sets[a]}
        obj = CoPresheaf(self.shape, sets, maps, check=False)
        legs = {}
        for i, j in enumerate(order):
            legs[j] = PresheafMap(obj, d.objects[j], {k: {fam: fam[i] for fam in sets[k]} for k in sets}, check=False)
        members = {k: frozenset(v) for k, v in sets.items()}
        return LimitCone(obj, legs, d, ("families", order, members))

    def mediate(self, cone: LimitCone, apex: CoPresheaf, legs: dict) -> PresheafMap:
        if cone.data[0] == "min":
            m = cone.data[1]
            f = legs[m]
            for j, leg in legs.items():
                if not self.eq(self.compose(cone.legs[j], f), leg):
                    raise ValueError("legs do not form a cone")
            return f
        _, order, members = cone.data
        comps = {}
        for k in self.shape.elements:
            c = {}
            for a in apex.sets[k]:
                fam = tuple(legs[j].comps[k][a] for j in order)
                if fam not in members[k]:
                    raise ValueError("legs do not form a cone")
                c[a] = fam
            comps[k] = c
        return PresheafMap(apex, cone.obj, comps, check=False)

    def homs(self, x: CoPresheaf, y: CoPresheaf):
        for comps in _natural_assignments(x, y, injective=False):
            yield PresheafMap(x, y, comps, check=False)

    def isos(self, x: CoPresheaf, y: CoPresheaf):
        if _profile(x) != _profile(y):
            return
        for comps in _natural_assignments(x, y, injective=True):
            yield PresheafMap(x, y, comps, check=False)

    def find_iso(self, x: CoPresheaf, y: CoPresheaf):
        """A witness isomorphism x -> y, or None; exhaustive behind invariant pruning."""
        if x.key == y.key:
            return self.identity(x)
        if _profile(x) != _profile(y):
            return None
        for comps in _natural_assignments(x, y, injective=True):
            return PresheafMap(x, y, comps, check=False)
        return None

    def objects(self, bound: int):
        """Every copresheaf with sets {0..n-1}, n <= bound, in a fixed order."""
        K = self.shape
        order = K.linear
        lowers = {q: K.lower_covers(q) for q in order}
        below = {q: [a for a in order if K.lt(a, q)] for q in order}

        def route(cov, a, b):
            if a == b:
                return None
            for c in K.upper_covers(a):
                if K.leq(c, b):
                    first = cov[(a, c)]
                    rest = route(cov, c, b)
                    return first if rest is None else {x: rest[y] for x, y in first.items()}

        def consistent(cov, q):
            for a in below[q]:
                routes = []
                for c in lowers[q]:
                    if K.leq(a, c):
                        r = route(cov, a, c)
                        last = cov[(c, q)]
                        routes.append(last if r is None else {x: last[y] for x, y in r.items()})
                if any(r != routes[0] for r in routes[1:]):
                    return False
            return True

        def rec(i, sets, cov):
            if i == len(order):
                yield CoPresheaf(K, sets, cov, check=False)
                return
            q = order[i]
            for n in range(bound + 1):
                tgt = tuple(range(n))
                s2 = dict(sets)
                s2[q] = tgt
                lows = lowers[q]
                spaces = [list(product(tgt, repeat=len(sets[p]))) for p in lows]
                for choice in product(*spaces):
                    c2 = dict(cov)
                    for p, ch in zip(lows, choice):
                        c2[(p, q)] = dict(zip(sets[p], ch))
                    if consistent(c2, q):
                        yield from rec(i + 1, s2, c2)

        yield from rec(0, {}, {})
