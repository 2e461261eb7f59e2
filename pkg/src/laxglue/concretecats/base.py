"""Shared interface for the two fiber backends and the diagrams they take limits of."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..errors import MixedBackend
from ..poset import FinPoset


class Category:
    """Operations every fiber backend provides.

    Morphisms carry ``source`` and ``target``; ``key`` on objects and morphisms
    is a hashable structural identity used for equality and caching.
    """

    name = "abstract"

    def identity(self, x):
        raise NotImplementedError

    def compose(self, g, f):
        """g after f."""
        raise NotImplementedError

    def eq(self, f, g) -> bool:
        return f.key == g.key

    def same(self, x, y) -> bool:
        return x.key == y.key

    def is_iso(self, f) -> bool:
        raise NotImplementedError

    def inverse(self, f):
        raise NotImplementedError

    def terminal(self):
        raise NotImplementedError

    def initial(self):
        raise NotImplementedError

    def is_terminal(self, x) -> bool:
        raise NotImplementedError

    def is_initial(self, x) -> bool:
        raise NotImplementedError

    def to_terminal(self, x, t=None):
        raise NotImplementedError

    def from_initial(self, y, e=None):
        raise NotImplementedError

    def limit(self, d: "ShapedDiagram") -> "LimitCone":
        raise NotImplementedError

    def mediate(self, cone: "LimitCone", apex, legs: dict):
        """The unique map apex -> cone.obj whose composites with the legs are ``legs``."""
        raise NotImplementedError

    def homs(self, x, y):
        raise NotImplementedError

    def objects(self, bound: int):
        raise NotImplementedError

    def find_iso(self, x, y):
        raise NotImplementedError

    def pullback(self, f, g) -> "LimitCone":
        """Limit of the cospan f: a -> c <- b :g, with legs keyed 'a', 'b', 'c'."""
        shape = FinPoset(["a", "b", "c"], [("a", "c"), ("b", "c")])
        d = ShapedDiagram(self, shape, {"a": f.source, "b": g.source, "c": f.target}, {("a", "c"): f, ("b", "c"): g})
        return self.limit(d)


@dataclass
class ShapedDiagram:
    """A functor from a finite poset into a backend, given on covering relations."""

    cat: Category
    shape: FinPoset
    objects: dict
    edges: dict
    _cache: dict = field(default_factory=dict, repr=False)

    def mor(self, u, v):
        """Value on u <= v, composed along a path of covers."""
        if u == v:
            return self.cat.identity(self.objects[u])
        key = (u, v)
        if key not in self._cache:
            for c in self.shape.upper_covers(u):
                if self.shape.leq(c, v):
                    self._cache[key] = self.cat.compose(self.mor(c, v), self.edges[(u, c)])
                    break
            else:
                raise ValueError(f"{u!r} is not below {v!r}")
        return self._cache[key]

    def check(self) -> list:
        """Covering relations whose composites disagree along two paths."""
        bad = []
        for (u, v) in self.shape.covers:
            f = self.edges.get((u, v))
            if f is None:
                bad.append(("missing", u, v))
                continue
            if not (self.cat.same(f.source, self.objects[u]) and self.cat.same(f.target, self.objects[v])):
                raise MixedBackend(f"edge {u!r}->{v!r} has the wrong endpoints")
        for u in self.shape.elements:
            for v in self.shape.up(u):
                routes = [
                    self.cat.compose(self.mor(c, v), self.edges[(u, c)])
                    for c in self.shape.upper_covers(u)
                    if self.shape.leq(c, v)
                ]
                if any(not self.cat.eq(r, routes[0]) for r in routes[1:]):
                    bad.append(("noncommuting", u, v))
        return bad


@dataclass
class LimitCone:
    obj: object
    legs: dict
    diagram: ShapedDiagram
    data: object = None
