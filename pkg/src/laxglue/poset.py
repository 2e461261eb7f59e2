"""Finite posets, monotone maps and sieve/cosieve decompositions."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Hashable, Iterable, Iterator, Mapping

from .errors import CycleDetected, UnknownElement

Elem = Hashable

__all__ = [
    "FinPoset",
    "MonotoneMap",
    "Decomposition",
    "validate_poset",
    "classify_subset",
    "decomposition_from_map",
    "cosieve_lattice",
    "all_cosieves",
    "all_sieves",
    "simplex",
    "antichain",
    "point",
    "pseudo_circle",
]


class FinPoset:
    """A finite poset stored with its full order relation.

    ``elements`` fixes an explicit listing; every enumeration in the package
    follows ``linear`` (a linear extension that respects the listing where the
    order allows), never a lexicographic order of identifiers.
    """

    __slots__ = ("elements", "_up", "_down", "_covers", "_rank", "_hash", "_index")

    def __init__(self, elements: Iterable[Elem], leq: Iterable[tuple[Elem, Elem]], *, closed: bool = False):
        elems = tuple(elements)
        if len(set(elems)) != len(elems):
            raise ValueError("duplicate element identifiers")
        index = {e: i for i, e in enumerate(elems)}
        up: dict[Elem, set] = {e: {e} for e in elems}
        for a, b in leq:
            if a not in index:
                raise UnknownElement(f"unknown element {a!r}")
            if b not in index:
                raise UnknownElement(f"unknown element {b!r}")
            up[a].add(b)
        if not closed:
            # reachability closure; the listing order is irrelevant here
            changed = True
            while changed:
                changed = False
                for a in elems:
                    extra = set()
                    for b in up[a]:
                        extra |= up[b]
                    if not extra <= up[a]:
                        up[a] |= extra
                        changed = True
        for a in elems:
            for b in up[a]:
                if b != a and a in up[b]:
                    raise CycleDetected(f"{a!r} <= {b!r} <= {a!r}")
        self.elements = elems
        self._index = index
        self._up = {e: frozenset(s) for e, s in up.items()}
        down: dict[Elem, set] = {e: set() for e in elems}
        for a in elems:
            for b in self._up[a]:
                down[b].add(a)
        self._down = {e: frozenset(s) for e, s in down.items()}
        self._covers = None
        # linear extension: repeatedly take the first listed minimal element
        rank: dict[Elem, int] = {}
        remaining = list(elems)
        while remaining:
            for e in remaining:
                if all(d in rank or d == e for d in self._down[e]):
                    rank[e] = len(rank)
                    remaining.remove(e)
                    break
        self._rank = rank
        self._hash = None

    # --- queries -------------------------------------------------------
    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self) -> Iterator[Elem]:
        return iter(self.elements)

    def __contains__(self, e) -> bool:
        return e in self._index

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if not isinstance(other, FinPoset):
            return NotImplemented
        return self.elements == other.elements and self._up == other._up

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.elements, frozenset(self._up.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"FinPoset({list(self.elements)!r}, covers={self.covers!r})"

    def check(self, e) -> None:
        if e not in self._index:
            raise UnknownElement(f"unknown element {e!r}")

    def leq(self, a, b) -> bool:
        return b in self._up[a]

    def lt(self, a, b) -> bool:
        return a != b and b in self._up[a]

    def comparable(self, a, b) -> bool:
        return b in self._up[a] or a in self._up[b]

    def up(self, a) -> frozenset:
        return self._up[a]

    def down(self, a) -> frozenset:
        return self._down[a]

    def rank(self, a) -> int:
        return self._rank[a]

    @property
    def linear(self) -> tuple:
        return tuple(sorted(self.elements, key=self._rank.__getitem__))

    def sort(self, items: Iterable[Elem]) -> tuple:
        return tuple(sorted(items, key=self._rank.__getitem__))

    @property
    def leq_pairs(self) -> frozenset:
        return frozenset((a, b) for a in self.elements for b in self._up[a])

    @property
    def strict_pairs(self) -> list:
        return [(a, b) for a in self.linear for b in self.sort(self._up[a]) if a != b]

    @property
    def covers(self) -> list:
        if self._covers is None:
            out = []
            for a in self.linear:
                above = self._up[a] - {a}
                for b in self.sort(above):
                    if not any(c != b and b in self._up[c] for c in above):
                        out.append((a, b))
            self._covers = out
        return self._covers

    def upper_covers(self, a) -> list:
        return [b for (x, b) in self.covers if x == a]

    def lower_covers(self, b) -> list:
        return [a for (a, y) in self.covers if y == b]

    def minimal(self) -> list:
        return [e for e in self.linear if len(self._down[e]) == 1]

    def maximal(self) -> list:
        return [e for e in self.linear if len(self._up[e]) == 1]

    def minimum(self):
        m = self.minimal()
        return m[0] if len(m) == 1 else None

    def is_chain(self, items: Iterable[Elem]) -> bool:
        xs = list(items)
        return all(self.comparable(a, b) for a, b in combinations(xs, 2))

    def is_sieve(self, subset: Iterable[Elem]) -> bool:
        s = set(subset)
        return all(self._down[e] <= s for e in s)

    def is_cosieve(self, subset: Iterable[Elem]) -> bool:
        s = set(subset)
        return all(self._up[e] <= s for e in s)

    # --- constructions -------------------------------------------------
    def subposet(self, subset: Iterable[Elem]) -> "FinPoset":
        s = set(subset)
        for e in s:
            self.check(e)
        elems = [e for e in self.elements if e in s]
        return FinPoset(elems, [(a, b) for a in elems for b in self._up[a] if b in s], closed=True)

    def opposite(self) -> "FinPoset":
        return FinPoset(self.elements, [(b, a) for a in self.elements for b in self._up[a]], closed=True)

    def up_set(self, subset: Iterable[Elem]) -> frozenset:
        out = set()
        for e in subset:
            out |= self._up[e]
        return frozenset(out)

    def down_set(self, subset: Iterable[Elem]) -> frozenset:
        out = set()
        for e in subset:
            out |= self._down[e]
        return frozenset(out)

    def chains(self) -> list:
        """All nonempty chains, each sorted bottom-up, in a deterministic order."""
        out = []
        lin = self.linear

        def grow(chain):
            out.append(chain)
            top = chain[-1]
            for b in lin:
                if b != top and b in self._up[top]:
                    grow(chain + (b,))

        for a in lin:
            grow((a,))
        return out

    def to_json(self) -> dict:
        return {
            "elements": list(self.elements),
            "leq": [[a, b] for (a, b) in self.covers],
        }


def validate_poset(elements: Iterable[Elem], leq: Iterable[tuple[Elem, Elem]]) -> FinPoset:
    """Build a poset from generating pairs, closing reflexively and transitively."""
    return FinPoset(elements, leq)


def simplex(n: int) -> FinPoset:
    """The chain 0 < 1 < ... < n with text identifiers."""
    names = [str(i) for i in range(n + 1)]
    return FinPoset(names, [(names[i], names[j]) for i in range(n + 1) for j in range(i, n + 1)], closed=True)


def point(name: str = "*") -> FinPoset:
    return FinPoset([name], [])


def antichain(names: Iterable[str]) -> FinPoset:
    return FinPoset(list(names), [])


def pseudo_circle() -> FinPoset:
    """Four points a, b < u, v; the smallest non-contractible finite space."""
    return FinPoset(["a", "b", "u", "v"], [("a", "u"), ("a", "v"), ("b", "u"), ("b", "v")])


@dataclass(frozen=True)
class MonotoneMap:
    source: FinPoset
    target: FinPoset
    assignment: Mapping

    def __post_init__(self):
        a = dict(self.assignment)
        for e in self.source:
            if e not in a:
                raise UnknownElement(f"assignment misses {e!r}")
            self.target.check(a[e])
        for e in a:
            self.source.check(e)
        for x, y in self.source.covers:
            if not self.target.leq(a[x], a[y]):
                raise ValueError(f"not monotone: {x!r} <= {y!r} but {a[x]!r} !<= {a[y]!r}")
        object.__setattr__(self, "assignment", a)

    def __call__(self, e):
        return self.assignment[e]

    def __hash__(self):
        return hash((self.source, self.target, frozenset(self.assignment.items())))

    def preimage(self, subset: Iterable[Elem]) -> frozenset:
        s = set(subset)
        return frozenset(e for e in self.source if self.assignment[e] in s)

    @classmethod
    def inclusion(cls, sub: FinPoset, big: FinPoset) -> "MonotoneMap":
        return cls(sub, big, {e: e for e in sub})

    @classmethod
    def identity(cls, p: FinPoset) -> "MonotoneMap":
        return cls(p, p, {e: e for e in p})

    def to_json(self) -> dict:
        return {"assignment": dict(self.assignment)}


@dataclass(frozen=True)
class Decomposition:
    """A sieve (open-complement / "U" side) and its complementary cosieve."""

    base: FinPoset
    sieve: frozenset
    cosieve: frozenset

    def __post_init__(self):
        s, c = frozenset(self.sieve), frozenset(self.cosieve)
        for e in s | c:
            self.base.check(e)
        if s & c or (s | c) != set(self.base.elements):
            raise ValueError("sieve and cosieve must partition the base")
        if not self.base.is_sieve(s):
            raise ValueError(f"{sorted(map(str, s))} is not a sieve")
        if not self.base.is_cosieve(c):
            raise ValueError(f"{sorted(map(str, c))} is not a cosieve")
        object.__setattr__(self, "sieve", s)
        object.__setattr__(self, "cosieve", c)

    @classmethod
    def from_sieve(cls, base: FinPoset, sieve: Iterable[Elem]) -> "Decomposition":
        s = frozenset(sieve)
        return cls(base, s, frozenset(base.elements) - s)

    @classmethod
    def from_cosieve(cls, base: FinPoset, cosieve: Iterable[Elem]) -> "Decomposition":
        c = frozenset(cosieve)
        return cls(base, frozenset(base.elements) - c, c)


def classify_subset(p: FinPoset, subset: Iterable[Elem]) -> str:
    s = set(subset)
    for e in s:
        p.check(e)
    down, up = p.is_sieve(s), p.is_cosieve(s)
    if down and up:
        return "both"
    if down:
        return "sieve"
    if up:
        return "cosieve"
    return "neither"


def decomposition_from_map(pi: MonotoneMap) -> Decomposition:
    t = pi.target
    if len(t) != 2 or len(t.covers) != 1:
        raise ValueError("target must be the two-element chain")
    lo, hi = t.covers[0]
    return Decomposition(pi.source, pi.preimage([lo]), pi.preimage([hi]))


def all_cosieves(p: FinPoset) -> list:
    """Every upward-closed subset, smallest first."""
    out = []
    lin = p.linear

    # decide membership from the top down so closure can be enforced greedily
    def walk(i, chosen: frozenset):
        if i < 0:
            out.append(chosen)
            return
        e = lin[i]
        walk(i - 1, chosen)
        if p.up(e) - {e} <= chosen:
            walk(i - 1, chosen | {e})

    walk(len(lin) - 1, frozenset())
    out.sort(key=lambda s: (len(s), sorted(p.rank(e) for e in s)))
    return out


def all_sieves(p: FinPoset) -> list:
    full = frozenset(p.elements)
    return [full - c for c in all_cosieves(p)]


def cosieve_lattice(p: FinPoset) -> FinPoset:
    """Open sets of the Alexandroff topology ordered by inclusion."""
    opens = all_cosieves(p)
    return FinPoset(opens, [(a, b) for a in opens for b in opens if a <= b], closed=True)
