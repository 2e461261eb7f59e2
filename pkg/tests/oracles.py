"""Independent reference computations used to freeze expected values in the tests.

``brute_force_right_adjoint`` finds j_* u over the 2-simplex (sieve {0, 1}) by searching
all sections that extend u for one that is terminal: every other extension maps to it
in exactly one way that is the identity on the sieve. Nothing here uses the chain
formula that the library implements.
"""

from __future__ import annotations

from itertools import combinations_with_replacement

from laxglue.concretecats.finset import CoPresheaf, PresheafMap
from laxglue.rlaxsections import Section, section_homs

PT = "*"


def _set(n: int, shape):
    return CoPresheaf(shape, {PT: tuple(range(n))}, None, check=False)


def _fn(src, tgt, values):
    return PresheafMap(src, tgt, {PT: dict(enumerate(values))}, check=False)


def _extension(d, u, labels):
    shape = d.fibers["2"].shape
    w2 = _set(len(labels), shape)
    A = d.push("0", "2", u.x["0"])
    B = d.push("1", "2", u.x["1"])
    phi = dict(u.phi)
    phi[("0", "2")] = _fn(w2, A, [a for a, _ in labels])
    phi[("1", "2")] = _fn(w2, B, [b for _, b in labels])
    return Section(d, {"0": u.x["0"], "1": u.x["1"], "2": w2}, phi)


def valid_labels(d, u) -> list:
    """Pairs (a, b) whose one-point extension satisfies the cocycle condition."""
    A = d.push("0", "2", u.x["0"]).sets[PT]
    B = d.push("1", "2", u.x["1"]).sets[PT]
    return [(a, b) for a in A for b in B if not _extension(d, u, [(a, b)]).violations()]


def _maps_fixing_sieve(src, tgt) -> int:
    n = 0
    for m in section_homs(src, tgt):
        if all(m.psi[p].comps[PT] == {e: e for e in src.x[p].sets[PT]} for p in ("0", "1")):
            n += 1
    return n


def brute_force_right_adjoint(d, u, probe_size: int = 2, max_size: int = 8):
    """The terminal extension of u over the full 2-simplex, by exhaustive search."""
    labels = valid_labels(d, u)
    probes = [_extension(d, u, list(c)) for k in range(probe_size + 1)
              for c in combinations_with_replacement(labels, k)]
    for m in range(max_size + 1):
        for c in combinations_with_replacement(labels, m):
            w = _extension(d, u, list(c))
            if all(_maps_fixing_sieve(p, w) == 1 for p in probes):
                return w
    raise AssertionError("no terminal extension within the search bound")


def hom_count(s, t) -> int:
    return sum(1 for _ in section_homs(s, t))
