"""JSON reading and writing for posets, objects, diagrams, sections and stratified spaces.

Morphisms are written positionally: component q lists, for each source element in
its stored order, the index of its image in the target's stored order.  Objects
computed by pushforwards keep a deterministic order, so this round-trips exactly.
Any field that holds a poset, space or diagram may instead hold a path to a JSON
file, resolved relative to the file that mentions it.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .concretecats.finset import CopshCat, CoPresheaf, PresheafMap
from .concretecats.vect import LinMap, VectCat, VectObj
from .errors import CycleDetected, LaxGlueError, ParseError, UnknownElement
from .laxdiagram import (
    ExtendByEmpty,
    ExtendBySingleton,
    FunctorSpec,
    IdentityCan,
    LaxDiagram,
    MatrixCan,
    Multiplicity,
    Power,
    PowerCan,
    Pushforward,
    Restrict,
    Rke,
    power_diagram,
    semigroup_tables,
    strict_diagram,
)
from .poset import FinPoset, MonotoneMap
from .rlaxsections import Section, SectionMap

__all__ = [
    "load_json",
    "poset_from_json",
    "map_from_json",
    "object_from_json",
    "object_to_json",
    "morphism_from_json",
    "morphism_to_json",
    "diagram_from_json",
    "diagram_to_json",
    "section_from_json",
    "section_to_json",
    "space_from_json",
    "load_poset",
    "load_diagram",
    "load_section",
    "load_space",
    "load_object",
    "load_multiplicity",
    "dumps",
]


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_default)


def _default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (set, frozenset, tuple)):
        return list(o)
    return str(o)


def load_json(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as e:
        raise ParseError(f"cannot read file ({e.strerror})", locus=str(path)) from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"invalid JSON: {e.msg} at line {e.lineno}", locus=str(path)) from None


class _Ctx:
    """Where we are in the input, for error loci and relative paths."""

    def __init__(self, file: str | None = None, base: Path | None = None, path: str = ""):
        self.file, self.base, self.path = file, base, path

    def at(self, key) -> "_Ctx":
        sep = "" if not self.path else "."
        k = f"[{key}]" if isinstance(key, int) else f"{sep}{key}"
        return _Ctx(self.file, self.base, self.path + k)

    @property
    def locus(self) -> str:
        f = self.file or "<input>"
        return f"{f}:{self.path}" if self.path else f

    def fail(self, msg: str):
        raise ParseError(msg, locus=self.locus)

    def need(self, doc, key):
        if not isinstance(doc, dict):
            self.fail("expected an object")
        if key not in doc:
            self.fail(f"missing field {key!r}")
        return doc[key]

    def deref(self, value):
        """Follow a file reference, returning (document, context)."""
        if isinstance(value, str):
            p = Path(value)
            if self.base is not None and not p.is_absolute():
                p = self.base / p
            return load_json(p), _Ctx(str(p), p.parent)
        return value, self


def _ctx_for(path) -> _Ctx:
    p = Path(path)
    return _Ctx(str(p), p.parent)


# --- posets and maps -------------------------------------------------------------


def poset_from_json(doc, ctx: _Ctx | None = None) -> FinPoset:
    ctx = ctx or _Ctx()
    doc, ctx = ctx.deref(doc)
    elems = ctx.need(doc, "elements")
    if not isinstance(elems, list):
        ctx.at("elements").fail("expected a list of element names")
    names = []
    for i, e in enumerate(elems):
        if not isinstance(e, (str, int)) or isinstance(e, bool):
            ctx.at("elements").at(i).fail("element names must be strings or integers")
        names.append(str(e))
    if len(set(names)) != len(names):
        ctx.at("elements").fail("duplicate element names")
    pairs = []
    for i, pair in enumerate(doc.get("leq", [])):
        c = ctx.at("leq").at(i)
        if not isinstance(pair, list) or len(pair) != 2:
            c.fail("expected a pair [a, b]")
        a, b = str(pair[0]), str(pair[1])
        for e in (a, b):
            if e not in names:
                c.fail(f"unknown element {e!r}")
        pairs.append((a, b))
    try:
        return FinPoset(names, pairs)
    except (CycleDetected, UnknownElement) as e:
        raise type(e)(str(e), locus=ctx.at("leq").locus) from None


def map_from_json(doc, source: FinPoset, target: FinPoset, ctx: _Ctx | None = None) -> MonotoneMap:
    ctx = ctx or _Ctx()
    a = doc.get("assignment", doc) if isinstance(doc, dict) else None
    if not isinstance(a, dict):
        ctx.fail("expected an assignment object")
    try:
        return MonotoneMap(source, target, {str(k): str(v) for k, v in a.items()})
    except (LaxGlueError, ValueError) as e:
        ctx.fail(str(e))


# --- objects and morphisms ---------------------------------------------------------


def _plain(e):
    if isinstance(e, tuple):
        return [_plain(x) for x in e]
    return e


def _name(e) -> str:
    return e if isinstance(e, str) else json.dumps(_plain(e))


def _names(items) -> list:
    out = [_name(e) for e in items]
    return out if len(set(out)) == len(out) else [str(i) for i in range(len(out))]


def object_to_json(x):
    if isinstance(x, VectObj):
        return {"dim": x.dim}
    sh = x.shape
    names = {q: _names(x.sets[q]) for q in sh}
    if len(sh) == 1:
        return names[sh.elements[0]]
    maps = {}
    for (a, b), m in x.cov.items():
        ia = {e: i for i, e in enumerate(x.sets[a])}
        ib = {e: i for i, e in enumerate(x.sets[b])}
        maps[f"{a}<={b}"] = {names[a][ia[s]]: names[b][ib[t]] for s, t in m.items()}
    return {"shape": sh.to_json(), "sets": names, "maps": maps}


def object_from_json(doc, cat, ctx: _Ctx | None = None):
    ctx = ctx or _Ctx()
    if isinstance(cat, VectCat):
        if isinstance(doc, int):
            doc = {"dim": doc}
        d = ctx.need(doc, "dim")
        if not isinstance(d, int) or d < 0:
            ctx.at("dim").fail("dimension must be a natural number")
        return VectObj(d)
    sh = cat.shape
    if isinstance(doc, list):
        if len(sh) != 1:
            ctx.fail("a bare list only describes objects over a one-point shape")
        doc = {"sets": {sh.elements[0]: doc}}
    if "shape" in doc and poset_from_json(doc["shape"], ctx.at("shape")) != sh:
        ctx.at("shape").fail("shape does not match the fiber")
    sets_doc = ctx.need(doc, "sets")
    sets = {}
    for q in sh:
        v = sets_doc.get(q)
        if not isinstance(v, list):
            ctx.at("sets").at(q).fail("expected a list of element names")
        sets[q] = tuple(str(e) for e in v)
        if len(set(sets[q])) != len(sets[q]):
            ctx.at("sets").at(q).fail("duplicate elements")
    maps = {}
    for key, m in doc.get("maps", {}).items():
        c = ctx.at("maps").at(key)
        if "<=" not in key:
            c.fail("transition keys look like 'a<=b'")
        a, b = key.split("<=", 1)
        if a not in sets or b not in sets or not sh.leq(a, b):
            c.fail(f"{key!r} is not a relation of the shape")
        if isinstance(m, list):
            if len(m) != len(sets[a]) or any(not isinstance(i, int) or not 0 <= i < len(sets[b]) for i in m):
                c.fail("index list does not describe a function")
            maps[(a, b)] = {s: sets[b][i] for s, i in zip(sets[a], m)}
        elif isinstance(m, dict):
            maps[(a, b)] = {str(s): str(t) for s, t in m.items()}
        else:
            c.fail("expected an object or a list of indices")
    try:
        return CoPresheaf(sh, sets, maps)
    except ValueError as e:
        ctx.fail(str(e))


def morphism_to_json(f):
    if isinstance(f, LinMap):
        return f.mat.tolist()
    out = {}
    for q in f.source.shape:
        idx = {e: i for i, e in enumerate(f.target.sets[q])}
        out[q] = [idx[f.comps[q][e]] for e in f.source.sets[q]]
    if len(f.source.shape) == 1:
        return out[f.source.shape.elements[0]]
    return {"comps": out}


def morphism_from_json(doc, cat, source, target, ctx: _Ctx | None = None):
    ctx = ctx or _Ctx()
    if isinstance(cat, VectCat):
        try:
            m = np.array(doc, dtype=np.int64).reshape(target.dim, source.dim) % cat.p
        except (ValueError, TypeError):
            ctx.fail(f"expected a {target.dim}x{source.dim} integer matrix")
        return LinMap(source, target, m, cat.p)
    sh = cat.shape
    if isinstance(doc, list):
        if len(sh) != 1:
            ctx.fail("a bare index list only describes maps over a one-point shape")
        doc = {"comps": {sh.elements[0]: doc}}
    comps_doc = ctx.need(doc, "comps")
    comps = {}
    for q in sh:
        c = ctx.at("comps").at(q)
        v = comps_doc.get(q)
        if isinstance(v, list):
            if len(v) != len(source.sets[q]) or any(not isinstance(i, int) or not 0 <= i < len(target.sets[q]) for i in v):
                c.fail("index list does not describe a function")
            comps[q] = {e: target.sets[q][i] for e, i in zip(source.sets[q], v)}
        elif isinstance(v, dict):
            tnames = dict(zip(_names(target.sets[q]), target.sets[q]))
            snames = dict(zip(_names(source.sets[q]), source.sets[q]))
            try:
                comps[q] = {snames[str(s)]: tnames[str(t)] for s, t in v.items()}
            except KeyError as e:
                c.fail(f"unknown element {e.args[0]!r}")
        else:
            c.fail("missing component")
    try:
        return PresheafMap(source, target, comps)
    except ValueError as e:
        ctx.fail(str(e))


# --- diagrams --------------------------------------------------------------------------


def _pair_key(key: str, n: int, P: FinPoset, ctx: _Ctx) -> tuple:
    parts = tuple(key.split("<"))
    if len(parts) != n or any(p not in P for p in parts):
        ctx.fail(f"{key!r} does not name a chain of length {n}")
    if not all(P.lt(a, b) for a, b in zip(parts, parts[1:])):
        ctx.fail(f"{key!r} is not a strictly increasing chain")
    return parts


def _fiber_from_json(doc, ctx: _Ctx):
    if isinstance(doc, dict) and "field" in doc:
        p = doc["field"]
        if not isinstance(p, int) or p < 2 or any(p % k == 0 for k in range(2, int(p ** 0.5) + 1)):
            ctx.at("field").fail("field characteristic must be a prime")
        return VectCat(p)
    if isinstance(doc, dict) and "shape" in doc:
        return CopshCat(poset_from_json(doc["shape"], ctx.at("shape")))
    ctx.fail("a fiber is {'shape': <poset>} or {'field': p}")


def _fiber_to_json(cat) -> dict:
    return {"field": cat.p} if isinstance(cat, VectCat) else {"shape": cat.shape.to_json()}


def _stage_from_json(doc, cur, ctx: _Ctx):
    kind = ctx.need(doc, "stage")
    if kind == "power":
        if not isinstance(cur, CopshCat):
            ctx.fail("power acts on copresheaf fibers")
        return Power(int(ctx.need(doc, "n")), cur.shape)
    if kind == "multiplicity":
        if not isinstance(cur, VectCat):
            ctx.fail("multiplicity acts on vector space fibers")
        return Multiplicity(int(ctx.need(doc, "m")), cur.p)
    if not isinstance(cur, CopshCat):
        ctx.fail(f"{kind} acts on copresheaf fibers")
    if kind == "restrict":
        src = poset_from_json(ctx.need(doc, "source"), ctx.at("source"))
        return Restrict(map_from_json(ctx.need(doc, "assignment"), src, cur.shape, ctx.at("assignment")))
    if kind == "pushforward":
        tgt = poset_from_json(ctx.need(doc, "target"), ctx.at("target"))
        return Pushforward(map_from_json(ctx.need(doc, "assignment"), cur.shape, tgt, ctx.at("assignment")))
    K = poset_from_json(ctx.need(doc, "space"), ctx.at("space"))
    if kind == "rke":
        return Rke(cur.shape, K)
    if kind in ("extend_by_singleton", "extend_by_empty"):
        Z = [str(e) for e in ctx.need(doc, "support")]
        return (ExtendBySingleton if kind == "extend_by_singleton" else ExtendByEmpty)(K, Z)
    ctx.at("stage").fail(f"unknown stage {kind!r}")


def _can_from_json(doc, ctx: _Ctx, exps: dict, chain: tuple):
    if doc == "identity":
        return IdentityCan()
    if isinstance(doc, dict) and "matrix" in doc:
        return MatrixCan(doc["matrix"])
    if isinstance(doc, dict) and "power" in doc:
        p, q, r = chain
        table = {(int(i), int(j)): int(v) for i, j, v in doc["power"]}
        return PowerCan(table, exps.get((p, q), 0), exps.get((q, r), 0))
    if doc == "unit-of-adjunction":
        ctx.fail("unit-of-adjunction cells are generated by kind 'gluing' diagrams")
    ctx.fail("a cell is 'identity', {'matrix': ...} or {'power': [[i, j, k], ...]}")


def _pipeline(doc, ctx: _Ctx) -> LaxDiagram:
    P = poset_from_json(ctx.need(doc, "base"), ctx.at("base"))
    fdoc = ctx.need(doc, "fibers")
    if isinstance(fdoc, dict) and ("shape" in fdoc or "field" in fdoc):
        one = _fiber_from_json(fdoc, ctx.at("fibers"))
        fibers = {p: one for p in P}
    else:
        fibers = {p: _fiber_from_json(ctx.at("fibers").need(fdoc, p), ctx.at("fibers").at(p)) for p in P}
    tau, exps = {}, {}
    tdoc = ctx.need(doc, "tau")
    for key, stages in tdoc.items():
        c = ctx.at("tau").at(key)
        p, q = _pair_key(key, 2, P, c)
        if not isinstance(stages, list):
            c.fail("expected a list of stages")
        cur, built = fibers[p], []
        for i, sd in enumerate(stages):
            st = _stage_from_json(sd, cur, c.at(i))
            if st.src != cur:
                c.at(i).fail("stage does not accept the previous stage's output")
            built.append(st)
            cur = st.tgt
            if isinstance(st, Power):
                exps[(p, q)] = exps.get((p, q), 1) * st.n
        try:
            tau[(p, q)] = FunctorSpec(fibers[p], fibers[q], built)
        except ValueError as e:
            c.fail(str(e))
    for (p, q) in P.strict_pairs:
        if (p, q) not in tau:
            ctx.at("tau").fail(f"missing pushforward {p}<{q}")
    can = {}
    cdoc = doc.get("can", {})
    for key, cd in cdoc.items():
        c = ctx.at("can").at(key)
        chain = _pair_key(key, 3, P, c)
        can[chain] = _can_from_json(cd, c, exps, chain)
    for ch in P.chains():
        if len(ch) == 3 and ch not in can:
            ctx.at("can").fail(f"missing cell {'<'.join(ch)}")
    try:
        return LaxDiagram(P, fibers, tau, can, toposic=bool(doc.get("toposic", True)), name=doc.get("name", "pipeline"))
    except ValueError as e:
        ctx.fail(str(e))


def diagram_from_json(doc, ctx: _Ctx | None = None) -> LaxDiagram:
    ctx = ctx or _Ctx()
    doc, ctx = ctx.deref(doc)
    kind = doc.get("kind", "multiplicity" if "mult" in doc else None) if isinstance(doc, dict) else None
    if kind == "multiplicity":
        return multiplicity_from_json(doc, ctx).lax
    if kind == "gluing":
        from .strattopos import gluing_diagram

        return gluing_diagram(space_from_json(ctx.need(doc, "space"), ctx.at("space")))
    if kind == "strict":
        P = poset_from_json(ctx.need(doc, "base"), ctx.at("base"))
        return strict_diagram(P, _fiber_from_json(ctx.need(doc, "fiber"), ctx.at("fiber")), name=doc.get("name", "strict"))
    if kind == "power":
        P = poset_from_json(ctx.need(doc, "base"), ctx.at("base"))
        shape = poset_from_json(doc["shape"], ctx.at("shape")) if "shape" in doc else None
        exps = {_pair_key(k, 2, P, ctx.at("exps").at(k)): int(v) for k, v in ctx.need(doc, "exps").items()}
        for pq in P.strict_pairs:
            if pq not in exps:
                ctx.at("exps").fail(f"missing exponent {pq[0]}<{pq[1]}")
        if "semigroup" in doc:
            from .suites import SEMIGROUPS

            if doc["semigroup"] not in SEMIGROUPS:
                ctx.at("semigroup").fail(f"unknown semigroup {doc['semigroup']!r}")
            tables = semigroup_tables(P, exps, SEMIGROUPS[doc["semigroup"]][1])
        else:
            tables = {}
            for k, rows in ctx.need(doc, "tables").items():
                tables[_pair_key(k, 3, P, ctx.at("tables").at(k))] = {(int(i), int(j)): int(v) for i, j, v in rows}
        for ch in P.chains():
            if len(ch) == 3:
                p, q, r = ch
                t = tables.get(ch)
                if t is None:
                    ctx.at("tables").fail(f"missing table {'<'.join(ch)}")
                for i in range(exps[(p, q)]):
                    for j in range(exps[(q, r)]):
                        if not 0 <= t.get((i, j), -1) < exps[(p, r)]:
                            ctx.at("tables").at("<".join(ch)).fail(f"entry ({i}, {j}) missing or out of range")
        return power_diagram(P, exps, tables, shape=shape, name=doc.get("name", "power"))
    if kind == "pipeline":
        return _pipeline(doc, ctx)
    ctx.fail("unknown diagram kind (expected multiplicity, power, strict, gluing or pipeline)")


def diagram_to_json(d: LaxDiagram) -> dict:
    if d.source is not None:
        return d.source
    fibers = {p: _fiber_to_json(c) for p, c in d.fibers.items()}
    tau = {f"{p}<{q}": t.describe() for (p, q), t in d.tau.items()}
    can = {}
    for c, cc in d.can.items():
        if isinstance(cc, IdentityCan):
            can["<".join(c)] = "identity"
        elif isinstance(cc, MatrixCan):
            can["<".join(c)] = {"matrix": cc.mat.tolist()}
        elif isinstance(cc, PowerCan):
            can["<".join(c)] = {"power": [[i, j, v] for (i, j), v in sorted(cc.table.items())]}
        else:
            raise ValueError(f"cell at {c} has no JSON form")
    return {"kind": "pipeline", "name": d.name, "base": d.base.to_json(), "fibers": fibers, "tau": tau,
            "can": can, "toposic": d.toposic}


def multiplicity_from_json(doc, ctx: _Ctx | None = None, default_p: int = 2):
    from .extendable import MultiplicityDiagram

    ctx = ctx or _Ctx()
    doc, ctx = ctx.deref(doc)
    n = ctx.need(doc, "n")
    if not isinstance(n, int) or n < 0:
        ctx.at("n").fail("n must be a natural number")
    p = doc.get("p", doc.get("field", default_p))
    mult, can = {}, {}
    for k, v in ctx.need(doc, "mult").items():
        parts = k.split("<")
        if len(parts) != 2 or not all(s.isdigit() for s in parts):
            ctx.at("mult").at(k).fail("keys look like 'i<j'")
        i, j = map(int, parts)
        if not 0 <= i < j <= n or not isinstance(v, int) or v < 0:
            ctx.at("mult").at(k).fail("bad pair or multiplicity")
        mult[(i, j)] = v
    for i in range(n + 1):
        for j in range(i + 1, n + 1):
            if (i, j) not in mult:
                ctx.at("mult").fail(f"missing multiplicity {i}<{j}")
    for k, v in doc.get("can", {}).items():
        parts = k.split("<")
        if len(parts) != 3 or not all(s.isdigit() for s in parts):
            ctx.at("can").at(k).fail("keys look like 'i<j<k'")
        can[tuple(map(int, parts))] = v
    for i in range(n + 1):
        for j in range(i + 1, n + 1):
            for k in range(j + 1, n + 1):
                if (i, j, k) not in can:
                    ctx.at("can").fail(f"missing cell {i}<{j}<{k}")
    try:
        md = MultiplicityDiagram(n, mult, can, p)
    except ValueError as e:
        ctx.at("can").fail(str(e))
    bad = md.cocycle_failures()
    if bad:
        ctx.at("can").fail(f"cocycle fails on {'<'.join(map(str, bad[0]))}")
    return md


# --- sections and spaces ----------------------------------------------------------------


def section_to_json(s: Section) -> dict:
    return {
        "x": {p: object_to_json(v) for p, v in s.x.items()},
        "phi": {f"{p}<{q}": morphism_to_json(f) for (p, q), f in s.phi.items()},
    }


def section_from_json(doc, d: LaxDiagram, ctx: _Ctx | None = None, validate: bool = True) -> Section:
    ctx = ctx or _Ctx()
    doc, ctx = ctx.deref(doc)
    xdoc = ctx.need(doc, "x")
    x = {p: object_from_json(ctx.at("x").need(xdoc, p), d.fibers[p], ctx.at("x").at(p)) for p in d.base}
    phi = {}
    pdoc = doc.get("phi", {})
    for (p, q) in d.base.strict_pairs:
        key = f"{p}<{q}"
        c = ctx.at("phi").at(key)
        if key not in pdoc:
            c.fail("missing structure map")
        phi[(p, q)] = morphism_from_json(pdoc[key], d.fibers[q], x[q], d.push(p, q, x[p]), c)
    s = Section(d, x, phi)
    if validate:
        bad = s.violations()
        if bad:
            ctx.fail(f"not a section: {bad[0]}")
    return s


def section_map_to_json(m: SectionMap) -> dict:
    return {p: morphism_to_json(f) for p, f in m.psi.items()}


def space_from_json(doc, ctx: _Ctx | None = None):
    from .strattopos import StratSpace

    ctx = ctx or _Ctx()
    doc, ctx = ctx.deref(doc)
    Q = poset_from_json(ctx.need(doc, "space"), ctx.at("space"))
    P = poset_from_json(ctx.need(doc, "strat_poset"), ctx.at("strat_poset"))
    pi = map_from_json(ctx.need(doc, "pi"), Q, P, ctx.at("pi"))
    return StratSpace(Q, P, pi, doc.get("name", ctx.file or "space"))


# --- file entry points -----------------------------------------------------------------------


def load_poset(path) -> FinPoset:
    return poset_from_json(load_json(path), _ctx_for(path))


def load_diagram(path) -> LaxDiagram:
    return diagram_from_json(load_json(path), _ctx_for(path))


def load_multiplicity(path, default_p: int = 2):
    return multiplicity_from_json(load_json(path), _ctx_for(path), default_p)


def load_section(path, d: LaxDiagram) -> Section:
    return section_from_json(load_json(path), d, _ctx_for(path))


def load_space(path):
    return space_from_json(load_json(path), _ctx_for(path))


def load_object(path, cat):
    return object_from_json(load_json(path), cat, _ctx_for(path))
