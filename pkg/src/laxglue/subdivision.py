"""Barycentric subdivision of a finite poset and the chain posets built from it.

Chains are tuples of base elements sorted bottom-up.  An inclusion is a pair
``(sigma, tau)`` of chains with ``set(sigma) <= set(tau)``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from itertools import combinations, permutations
from typing import Iterable

from .errors import ChainNotInCosieve, MaxMismatch, OutOfRange, SizeLimit
from .poset import Decomposition, FinPoset, simplex

Chain = tuple

__all__ = [
    "Chain",
    "SdPoset",
    "LRFactorization",
    "Move",
    "make_chain",
    "chain_count",
    "subdivide",
    "sd_originating",
    "lr_factorize",
    "jx",
    "sd1",
    "cube",
    "elementary_factorize",
    "factorization_orders",
    "chain_label",
]

DEFAULT_SIZE_LIMIT = 50_000


def size_limit() -> int:
    return int(os.environ.get("LAXGLUE_SIZE_LIMIT", DEFAULT_SIZE_LIMIT))


def chain_label(c: Chain) -> str:
    return "[" + "<".join(map(str, c)) + "]"


def make_chain(p: FinPoset, items: Iterable) -> Chain:
    xs = list(items)
    if not xs:
        raise ValueError("chains are nonempty")
    for e in xs:
        p.check(e)
    if len(set(xs)) != len(xs) or not p.is_chain(xs):
        raise ValueError(f"{xs!r} is not a chain")
    return p.sort(xs)


@dataclass(frozen=True)
class SdPoset:
    base: FinPoset
    poset: FinPoset  # elements are chains, order is inclusion
    max_label: dict
    cocart_edges: frozenset

    @property
    def chains(self) -> tuple:
        return self.poset.elements

    @property
    def order(self) -> frozenset:
        return self.poset.leq_pairs

    def __len__(self) -> int:
        return len(self.poset)

    def to_json(self) -> dict:
        return {
            "chains": [list(c) for c in self.chains],
            "max": {chain_label(c): self.max_label[c] for c in self.chains},
            "covers": [[chain_label(a), chain_label(b)] for a, b in self.poset.covers],
            "cocartesian": sorted([chain_label(a), chain_label(b)] for a, b in self.cocart_edges),
        }


def chain_count(p: FinPoset) -> int:
    from_here = {}
    for a in reversed(p.linear):
        from_here[a] = 1 + sum(from_here[b] for b in p.up(a) if b != a)
    return sum(from_here.values())


def _inclusion_poset(chains: list) -> FinPoset:
    sets = {c: frozenset(c) for c in chains}
    pairs = [(a, b) for a in chains for b in chains if sets[a] <= sets[b]]
    return FinPoset(chains, pairs, closed=True)


def _is_cocart(base: FinPoset, a: Chain, b: Chain) -> bool:
    return len(b) == len(a) + 1 and b[:-1] == a and base.lt(a[-1], b[-1])


def _build(base: FinPoset, chains: list) -> SdPoset:
    poset = _inclusion_poset(chains)
    marks = frozenset((a, b) for a, b in poset.covers if _is_cocart(base, a, b))
    return SdPoset(base, poset, {c: c[-1] for c in chains}, marks)


def subdivide(p: FinPoset, limit: int | None = None) -> SdPoset:
    """Poset of nonempty chains of ``p`` under inclusion, with max labels and marks."""
    bound = size_limit() if limit is None else limit
    n = chain_count(p)
    if n > bound:
        raise SizeLimit(f"{n} chains exceed the bound {bound}")
    return _build(p, p.chains())


def sd_originating(p: FinPoset, d: Decomposition) -> SdPoset:
    """Chains whose minimum lies in the sieve."""
    return _build(p, [c for c in p.chains() if c[0] in d.sieve])


@dataclass(frozen=True)
class LRFactorization:
    left: tuple
    right: tuple
    through: Chain


def lr_factorize(sigma: Chain, tau: Chain, d: Decomposition) -> LRFactorization:
    """Split an inclusion into a sieve-adding part followed by a cosieve-adding part."""
    if not set(sigma) <= set(tau):
        raise ValueError("not an inclusion")
    mid = d.base.sort(set(sigma) | {t for t in tau if t in d.sieve})
    return LRFactorization((sigma, mid), (mid, tau), mid)


def jx(p: FinPoset, d: Decomposition, x: Iterable) -> FinPoset:
    """Chains t0 + x where t0 is a nonempty sieve chain lying below min(x)."""
    xc = tuple(x)
    if not xc or any(e not in d.cosieve for e in xc):
        raise ChainNotInCosieve(f"{chain_label(xc)} is not a chain in the cosieve")
    xc = make_chain(p, xc)
    below = [a for a in d.sieve if p.lt(a, xc[0])]
    sub = p.subposet(below)
    chains = [t + xc for t in sub.chains()]
    return _inclusion_poset(chains)


def sd1(n: int) -> SdPoset:
    """Singletons [k] and consecutive pairs [k<k+1] of the n-simplex."""
    base = simplex(n)
    e = base.elements
    chains = [(e[0],)]
    for k in range(1, n + 1):
        chains += [(e[k - 1], e[k]), (e[k],)]
    return _build(base, chains)


def cube(sigma: Chain, n: int) -> FinPoset:
    """Chains from sigma[0] to sigma[-1] through consecutive integers; a Boolean lattice."""
    if len(sigma) != 2:
        raise OutOfRange("cube expects a two-element chain [i<i+k]")
    i, j = int(sigma[0]), int(sigma[1])
    if not (0 <= i < j <= n):
        raise OutOfRange(f"{chain_label(sigma)} is not a chain of the {n}-simplex")
    inner = [str(t) for t in range(i + 1, j)]
    chains = []
    for r in range(len(inner) + 1):
        for sub in combinations(inner, r):
            chains.append((str(i),) + sub + (str(j),))
    return _inclusion_poset(chains)


@dataclass(frozen=True)
class Move:
    kind: str  # "prepend" or "insert"
    element: object
    before: Chain
    after: Chain


def _moves_for_order(p: FinPoset, sigma: Chain, order: Iterable) -> list:
    moves = []
    cur = tuple(sigma)
    for t in order:
        nxt = p.sort(cur + (t,))
        kind = "prepend" if nxt[0] == t else "insert"
        moves.append(Move(kind, t, cur, nxt))
        cur = nxt
    return moves


def _check_max(sigma: Chain, tau: Chain) -> None:
    if not set(sigma) <= set(tau):
        raise ValueError(f"{chain_label(sigma)} is not contained in {chain_label(tau)}")
    if sigma[-1] != tau[-1]:
        raise MaxMismatch(f"{chain_label(sigma)} -> {chain_label(tau)} changes the maximum")


def elementary_factorize(p: FinPoset, sigma: Chain, tau: Chain) -> list:
    """Single-element insertions composing to sigma <= tau, smallest new element first."""
    _check_max(sigma, tau)
    return _moves_for_order(p, sigma, p.sort(set(tau) - set(sigma)))


def factorization_orders(p: FinPoset, sigma: Chain, tau: Chain):
    """Every order of inserting the missing elements, as move lists."""
    _check_max(sigma, tau)
    for order in permutations(p.sort(set(tau) - set(sigma))):
        yield _moves_for_order(p, sigma, order)
