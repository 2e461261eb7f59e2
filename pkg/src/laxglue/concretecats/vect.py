"""Finite-dimensional vector spaces over a prime field F_p."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import MixedBackend
from . import gf
from .base import Category, LimitCone, ShapedDiagram

__all__ = ["VectObj", "LinMap", "VectCat", "multiplicity_obj", "multiplicity_map"]


@dataclass(frozen=True)
class VectObj:
    dim: int

    @property
    def key(self):
        return ("vect", self.dim)


class LinMap:
    """A matrix of shape (target.dim, source.dim) with entries mod p."""

    __slots__ = ("source", "target", "mat", "p", "_key")

    def __init__(self, source: VectObj, target: VectObj, mat, p: int):
        m = gf.as_matrix(mat, p).reshape(target.dim, source.dim)
        self.source, self.target, self.mat, self.p = source, target, m, p
        self._key = None

    @property
    def key(self):
        if self._key is None:
            self._key = (self.source.dim, self.target.dim, self.mat.tobytes())
        return self._key

    def __eq__(self, other):
        return isinstance(other, LinMap) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"LinMap({self.source.dim}->{self.target.dim}, {self.mat.tolist()})"


class VectCat(Category):
    name = "vect"

    def __init__(self, p: int = 2):
        self.p = p

    def __eq__(self, other):
        return isinstance(other, VectCat) and other.p == self.p

    def __hash__(self):
        return hash(("vect", self.p))

    def __repr__(self):
        return f"VectCat(p={self.p})"

    def obj(self, n: int) -> VectObj:
        return VectObj(n)

    def map(self, source: VectObj, target: VectObj, mat) -> LinMap:
        return LinMap(source, target, mat, self.p)

    def identity(self, x: VectObj) -> LinMap:
        return LinMap(x, x, gf.eye(x.dim), self.p)

    def zero(self, x: VectObj, y: VectObj) -> LinMap:
        return LinMap(x, y, gf.zeros(y.dim, x.dim), self.p)

    def compose(self, g: LinMap, f: LinMap) -> LinMap:
        if f.target != g.source:
            raise ValueError("composing non-composable maps")
        return LinMap(f.source, g.target, g.mat @ f.mat, self.p)

    def add(self, f: LinMap, g: LinMap) -> LinMap:
        return LinMap(f.source, f.target, f.mat + g.mat, self.p)

    def rank(self, f: LinMap) -> int:
        return gf.rank(f.mat, self.p)

    def is_iso(self, f: LinMap) -> bool:
        return f.source.dim == f.target.dim and gf.rank(f.mat, self.p) == f.source.dim

    def inverse(self, f: LinMap) -> LinMap:
        inv = gf.inverse(f.mat, self.p)
        if inv is None:
            raise ValueError("not an isomorphism")
        return LinMap(f.target, f.source, inv, self.p)

    def terminal(self) -> VectObj:
        return VectObj(0)

    initial = terminal

    def is_terminal(self, x: VectObj) -> bool:
        return x.dim == 0

    is_initial = is_terminal

    def to_terminal(self, x: VectObj, t: VectObj | None = None) -> LinMap:
        t = VectObj(0) if t is None else t
        if t.dim:
            raise ValueError("target is not terminal")
        return self.zero(x, t)

    def from_initial(self, y: VectObj, e: VectObj | None = None) -> LinMap:
        e = VectObj(0) if e is None else e
        if e.dim:
            raise ValueError("source is not initial")
        return self.zero(e, y)

    def kernel(self, f: LinMap) -> LinMap:
        """Inclusion of the kernel."""
        k = gf.kernel(f.mat, self.p)
        return LinMap(VectObj(k.shape[1]), f.source, k, self.p)

    def limit(self, d: ShapedDiagram) -> LimitCone:
        J = d.shape
        for v in J.elements:
            if not isinstance(d.objects[v], VectObj):
                raise MixedBackend(f"vertex {v!r} is not a vector space")
        order = J.linear
        off, n = {}, 0
        for j in order:
            off[j] = n
            n += d.objects[j].dim
        blocks = []
        for (u, v) in J.covers:
            row = gf.zeros(d.objects[v].dim, n)
            e = d.edges[(u, v)].mat
            row[:, off[u]: off[u] + d.objects[u].dim] = e
            row[:, off[v]: off[v] + d.objects[v].dim] -= gf.eye(d.objects[v].dim)
            blocks.append(row)
        big = np.concatenate(blocks, axis=0) % self.p if blocks else gf.zeros(0, n)
        basis = gf.kernel(big, self.p)
        obj = VectObj(basis.shape[1])
        legs = {j: LinMap(obj, d.objects[j], basis[off[j]: off[j] + d.objects[j].dim, :], self.p) for j in order}
        return LimitCone(obj, legs, d, (order, basis))

    def mediate(self, cone: LimitCone, apex: VectObj, legs: dict) -> LinMap:
        order, basis = cone.data
        if basis.shape[0] == 0:
            return self.zero(apex, cone.obj)
        stacked = np.concatenate([legs[j].mat for j in order], axis=0)
        x = gf.solve(basis, stacked, self.p)
        if x is None:
            raise ValueError("legs do not form a cone")
        return LinMap(apex, cone.obj, x, self.p)

    def homs(self, x: VectObj, y: VectObj):
        for m in gf.all_matrices(y.dim, x.dim, self.p):
            yield LinMap(x, y, m, self.p)

    def isos(self, x: VectObj, y: VectObj):
        if x.dim != y.dim:
            return
        for m in gf.all_matrices(x.dim, x.dim, self.p):
            if gf.rank(m, self.p) == x.dim:
                yield LinMap(x, y, m, self.p)

    def objects(self, bound: int):
        for n in range(bound + 1):
            yield VectObj(n)

    def find_iso(self, x: VectObj, y: VectObj):
        return self.identity(x) if x.dim == y.dim else None


def multiplicity_obj(m: int, x: VectObj) -> VectObj:
    """V -> F^m (x) V."""
    return VectObj(m * x.dim)


def multiplicity_map(m: int, f: LinMap) -> LinMap:
    return LinMap(multiplicity_obj(m, f.source), multiplicity_obj(m, f.target), np.kron(gf.eye(m), f.mat), f.p)
