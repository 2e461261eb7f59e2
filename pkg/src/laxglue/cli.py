"""``lax-glue``: batch driver for subdivisions, recollements, extendability and reconstruction.

Every command prints a short text summary and, with ``--out``, writes a JSON report.
The report body is deterministic for a fixed configuration and seed; wall-clock
timings live under the separate ``timing`` key.  The exit status is 0 exactly when
every check passed, 1 when some check failed and 2 on bad input.
"""

from __future__ import annotations

import random
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import click

from . import io
from .errors import LaxGlueError
from .poset import Decomposition, FinPoset
from .rlaxsections import CheckTally, Recollement, fracture, recollement_report

SUITES = ("recollement", "confluence", "reconstruction", "extendable", "adjunction", "functoriality")


@dataclass
class RunConfig:
    command: str
    inputs: list = field(default_factory=list)
    sieve: list | None = None
    cosieve: list | None = None
    at: list | None = None
    suite: str | None = None
    check: str | None = None
    max_size: int = 2
    max_dim: int = 2
    samples: int = 30
    seed: int = 0
    field: int = 2
    out: str | None = None

    def __post_init__(self):
        for k in ("max_size", "max_dim", "samples"):
            if getattr(self, k) < 0:
                raise click.BadParameter(f"{k.replace('_', '-')} must be non-negative")


@dataclass
class Report:
    config: RunConfig
    body: dict = field(default_factory=dict)
    tally: CheckTally = field(default_factory=CheckTally)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return self.tally.ok

    def to_json(self) -> dict:
        cfg = {k: v for k, v in asdict(self.config).items() if k != "out"}
        return {"command": cfg, "result": self.body, **self.tally.to_json(), "timing": {"seconds": round(self.seconds, 3)}}

    def summary(self) -> str:
        lines = [f"{self.config.command}: {'PASS' if self.ok else 'FAIL'}"]
        for k, v in self.tally.to_json()["checks"].items():
            lines.append(f"  {'ok  ' if not v['failed'] else 'FAIL'} {k}: {v['run'] - v['failed']}/{v['run']}")
        for k, v in self.body.get("summary", {}).items():
            lines.append(f"  {k}: {v}")
        lines.append(f"  time: {self.seconds:.2f}s")
        return "\n".join(lines)


def _split(s: str | None):
    if s is None:
        return None
    return [e.strip() for e in s.split(",") if e.strip()]


def _decomposition(P: FinPoset, cfg: RunConfig) -> Decomposition:
    if cfg.sieve is not None and cfg.cosieve is not None:
        raise click.UsageError("give --sieve or --cosieve, not both")
    try:
        if cfg.sieve is not None:
            return Decomposition.from_sieve(P, cfg.sieve)
        if cfg.cosieve is not None:
            return Decomposition.from_cosieve(P, cfg.cosieve)
    except ValueError as e:
        raise LaxGlueError(str(e), locus="--sieve/--cosieve") from None
    raise click.UsageError("this command needs --sieve or --cosieve")


# --- command bodies ------------------------------------------------------------------


def _subdivide(cfg: RunConfig, rep: Report):
    from .subdivision import jx, sd_originating, subdivide

    P = io.load_poset(cfg.inputs[0])
    sd = subdivide(P)
    rep.body = {"subdivision": sd.to_json(), "summary": {"chains": len(sd)}}
    if cfg.sieve is not None or cfg.cosieve is not None:
        dec = _decomposition(P, cfg)
        sd0 = sd_originating(P, dec)
        C = P.subposet(dec.cosieve)
        rep.body["originating"] = sd0.to_json()
        rep.body["jx"] = {"<".join(x): [list(c) for c in jx(P, dec, x).elements] for x in C.chains()}
        rep.body["summary"]["originating chains"] = len(sd0)


def _jx(cfg: RunConfig, rep: Report):
    from .subdivision import chain_label, jx

    P = io.load_poset(cfg.inputs[0])
    dec = _decomposition(P, cfg)
    if not cfg.at:
        raise click.UsageError("jx needs --at x0,x1,...")
    J = jx(P, dec, cfg.at)
    rep.body = {
        "chains": [list(c) for c in J.elements],
        "covers": [[chain_label(a), chain_label(b)] for a, b in J.covers],
        "summary": {"size": len(J)},
    }


def _section_args(cfg: RunConfig):
    d = io.load_diagram(cfg.inputs[0])
    if len(cfg.inputs) < 2:
        raise click.UsageError("this command needs a diagram file and a section file")
    return d, io.load_section(cfg.inputs[1], d)


def _glue(cfg: RunConfig, rep: Report):
    d, s = _section_args(cfg)
    dec = _decomposition(d.base, cfg)
    rec = Recollement(d, dec)
    u, z = rec.j_upper(s), rec.i_upper(s)
    rep.body = {
        "j_upper": io.section_to_json(u),
        "i_upper": io.section_to_json(z),
        "j_star": io.section_to_json(rec.j_star(u)),
        "j_shriek": io.section_to_json(rec.j_shriek(u)),
        "i_star": io.section_to_json(rec.i_star(z)),
        "gluing": io.section_to_json(rec.gluing(u)),
    }
    from .suites import attach_replay

    rep.tally.merge(attach_replay(recollement_report(d, dec, [s]), d, s, dec))


def _fracture(cfg: RunConfig, rep: Report):
    from .suites import section_replay

    d, s = _section_args(cfg)
    dec = _decomposition(d.base, cfg)
    r = fracture(s, dec)
    rep.body = {"corners": {k: io.section_to_json(v) for k, v in r.corners.items()}, "problems": r.problems}
    rep.tally.record("fracture square", r.is_iso, lambda: {"problems": r.problems, "replay": section_replay(d, s, dec)})


def _extendable(cfg: RunConfig, rep: Report):
    from .extendable import (
        complete_sections,
        enumerate_spines,
        equivalence_check,
        extend,
        gamma_restrict,
        is_extendable,
        is_one_generated,
    )

    md = io.load_multiplicity(cfg.inputs[0], cfg.field)
    check = cfg.check or "roundtrip"
    d, rng = md.lax, random.Random(cfg.seed)
    if check == "roundtrip":
        equivalence_check(md, bound=cfg.max_dim, seed=cfg.seed, tally=rep.tally)
        return
    replay = {"kind": "multiplicity", "diagram": md.to_json(), "bound": cfg.max_dim, "cap": None, "seed": cfg.seed}
    counts = {"spines": 0, "extendable": 0}
    for t in enumerate_spines(d, md.n, cfg.max_dim, None, rng):
        counts["spines"] += 1
        wit = lambda t=t: {"spine": [v.dim for v in t.V], "w": {str(k): f.mat.tolist() for k, f in t.w.items()},
                           "replay": replay}
        v = is_extendable(t)
        if check == "extendable":
            counts["extendable"] += v.ok
            if v.ok:
                e = extend(t)
                rep.tally.record("extension restricts back", gamma_restrict(e).key == t.key, wit)
        else:
            for k, s in enumerate(complete_sections(t)):
                if k >= cfg.samples:
                    break
                g = is_one_generated(s)
                rep.tally.record("cube limits agree with edge isos", g.agree, wit)
    if check != "extendable":
        del counts["extendable"]
    rep.body = {"summary": counts}


def _reconstruct(cfg: RunConfig, rep: Report, sheaf: str | None, enumerate_k: int | None):
    from . import strattopos as st

    X = io.load_space(cfg.inputs[0])
    if sheaf:
        x = io.load_object(sheaf, X.cat)
        s = st.transport(X, x)
        rep.body = {"section": io.section_to_json(s), "theta": io.object_to_json(st.theta(X, s))}
        rep.tally.record("theta(transport x) = x", X.cat.is_iso(st.unit_comparison(X, x)), st.space_witness(X, x=x))
        return
    k = cfg.max_size if enumerate_k is None else enumerate_k
    n = 0
    for x in X.cat.objects(k):
        n += 1
        s = st.transport(X, x)
        rep.tally.record("theta(transport x) = x", X.cat.is_iso(st.unit_comparison(X, x)), st.space_witness(X, x=x))
        rep.tally.record("transport(theta s) = s", st._counit_ok(X, s), st.space_witness(X, s=s))
    rep.body = {"summary": {"sheaves": n}}


def _targets(arg: str, kind: str, p: int = 2):
    """Resolve a suite input: a file, or one of the built-in families (@toposic, @confluence, @spaces, @delta1, @delta2)."""
    from . import suites
    from .extendable import multiplicity_diagrams

    if arg.startswith("@"):
        name = arg[1:]
        table = {
            "toposic": lambda: suites.toposic_family(),
            "confluence": lambda: suites.confluence_family(),
            "spaces": lambda: suites.test_spaces(),
            "delta0": lambda: list(multiplicity_diagrams(0, p=p)),
            "delta1": lambda: list(multiplicity_diagrams(1, p=p)),
            "delta2": lambda: list(multiplicity_diagrams(2, p=p)),
        }
        if name not in table:
            raise LaxGlueError(f"unknown family {arg!r}", locus="input")
        return table[name]()
    if kind == "space":
        return [io.load_space(arg)]
    if kind == "multiplicity":
        return [io.load_multiplicity(arg, p)]
    doc = io.load_json(arg)
    if isinstance(doc, dict) and "strat_poset" in doc:
        return [io.load_space(arg)]
    return [io.load_diagram(arg)]


def _verify(cfg: RunConfig, rep: Report):
    from . import strattopos as st
    from . import suites
    from .extendable import equivalence_check

    suite = cfg.suite
    sc = suites.SuiteConfig(bound=cfg.max_size, samples=cfg.samples, seed=cfg.seed)
    arg = cfg.inputs[0]
    if suite in ("recollement", "confluence"):
        ds = _targets(arg, "diagram")
        if suite == "recollement":
            for r in (suites.run_recollement_suite(ds, sc), suites.run_fracture_suite(ds, sc)):
                rep.tally.merge(r.tally)
        else:
            rep.tally.merge(suites.run_confluence_suite(ds, sc).tally)
        rep.body = {"summary": {"diagrams": len(ds)}}
    elif suite == "reconstruction":
        xs = _targets(arg, "space")
        for X in xs:
            rep.tally.merge(st.reconstruction_suite(X, bound=cfg.max_size, samples=cfg.samples, seed=cfg.seed))
        rep.body = {"summary": {"spaces": len(xs)}}
    elif suite == "extendable":
        mds = _targets(arg, "multiplicity", cfg.field)
        for md in mds:
            equivalence_check(md, bound=cfg.max_dim, seed=cfg.seed, tally=rep.tally)
        rep.body = {"summary": {"diagrams": len(mds)}}
    elif suite == "adjunction":
        for X in _targets(arg, "space"):
            if not isinstance(X, st.StratSpace):
                d = X
                rng = random.Random(cfg.seed)
                for s in suites.distinct_sections(d, cfg.samples, rng, cfg.max_size):
                    dec = Decomposition.from_sieve(d.base, rng.choice(suites.proper_sieves(d.base)))
                    rep.tally.merge(suites.attach_replay(recollement_report(d, dec, [s]), d, s, dec))
                continue
            rep.tally.merge(suites.adjoint_equivalence_checks(X, samples=cfg.samples, seed=cfg.seed, bound=cfg.max_size))
    elif suite == "functoriality":
        for X in _targets(arg, "space"):
            t = st.map_functoriality(st.collapse_map(X), bound=cfg.max_size, samples=cfg.samples, seed=cfg.seed)
            for f in t.failures:
                f["witness"] = {"space": X.to_json(), **(f["witness"] or {})}
            rep.tally.merge(t)
    else:
        raise click.UsageError(f"--suite must be one of {', '.join(SUITES)}")


def _replay(cfg: RunConfig, rep: Report):
    from .replay import failures_in, reproduces, run_replay

    fails = failures_in(io.load_json(cfg.inputs[0]))
    again = 0
    for f in fails:
        again += reproduces(f)
        rep.tally.merge(run_replay(f["witness"]["replay"]))
    rep.body = {"summary": {"witnesses": len(fails), "reproduced": again}}


# --- click wiring ----------------------------------------------------------------------


def _common(f):
    opts = [
        click.option("--sieve", default=None, help="Comma-separated sieve (the open part)."),
        click.option("--cosieve", default=None, help="Comma-separated cosieve (the closed part)."),
        click.option("--at", default=None, help="Comma-separated chain in the cosieve."),
        click.option("--max-size", default=2, show_default=True, type=int, help="Largest pointwise set size."),
        click.option("--max-dim", default=2, show_default=True, type=int, help="Largest vector space dimension."),
        click.option("--samples", default=30, show_default=True, type=int, help="Random samples per family member."),
        click.option("--seed", default=0, show_default=True, type=int),
        click.option("--field", default=2, show_default=True, type=int, help="Prime field characteristic."),
        click.option("--out", default=None, type=click.Path(dir_okay=False), help="Write the JSON report here."),
        click.option("--json", "as_json", is_flag=True, help="Print the JSON report instead of the summary."),
    ]
    for o in reversed(opts):
        f = o(f)
    return f


def _run(command: str, inputs: list, body, *, sieve=None, cosieve=None, at=None, suite=None, check=None,
         max_size=2, max_dim=2, samples=30, seed=0, field=2, out=None, as_json=False, **extra):
    cfg = RunConfig(command, list(inputs), _split(sieve), _split(cosieve), _split(at), suite, check,
                    max_size, max_dim, samples, seed, field, out)
    rep = Report(cfg)
    t0 = time.perf_counter()
    try:
        body(cfg, rep, **extra)
    except LaxGlueError as e:
        click.echo(f"error: {type(e).__name__}: {e}", err=True)
        sys.exit(2)
    rep.seconds = time.perf_counter() - t0
    text = io.dumps(rep.to_json())
    if out:
        Path(out).write_text(text + "\n")
    click.echo(text if as_json else rep.summary())
    sys.exit(0 if rep.ok else 1)


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Recollements on right-lax limits and sheaf reconstruction at desk scale."""


@main.command()
@click.argument("poset", type=click.Path(exists=True, dir_okay=False))
@_common
def subdivide(poset, **kw):
    """Barycentric subdivision of POSET; with a sieve, also originating chains and every J_x."""
    _run("subdivide", [poset], _subdivide, **kw)


@main.command()
@click.argument("poset", type=click.Path(exists=True, dir_okay=False))
@_common
def jx(poset, **kw):
    """The indexing poset J_x for the chain --at in the cosieve."""
    _run("jx", [poset], _jx, **kw)


@main.command()
@click.argument("diagram", type=click.Path(exists=True, dir_okay=False))
@click.argument("section", type=click.Path(exists=True, dir_okay=False))
@_common
def glue(diagram, section, **kw):
    """j_*, j_!, i_* and the gluing functor applied to the restrictions of SECTION."""
    _run("glue", [diagram, section], _glue, **kw)


@main.command(name="fracture")
@click.argument("diagram", type=click.Path(exists=True, dir_okay=False))
@click.argument("section", type=click.Path(exists=True, dir_okay=False))
@_common
def fracture_cmd(diagram, section, **kw):
    """The fracture square of SECTION and whether it is a pullback."""
    _run("fracture", [diagram, section], _fracture, **kw)


@main.command()
@click.argument("diagram", type=click.Path(exists=True, dir_okay=False))
@click.option("--check", type=click.Choice(["extendable", "one-generated", "roundtrip"]), default="roundtrip",
              show_default=True)
@_common
def extendable(diagram, check, **kw):
    """Extendability, one-generation and the spine round trip for a multiplicity diagram over a simplex."""
    _run("extendable", [diagram], _extendable, check=check, **kw)


@main.command()
@click.argument("space", type=click.Path(exists=True, dir_okay=False))
@click.option("--sheaf", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--enumerate", "enumerate_k", default=None, type=int, help="Round-trip every sheaf of size <= k.")
@_common
def reconstruct(space, sheaf, enumerate_k, **kw):
    """Transport a sheaf to its strata and glue it back."""
    _run("reconstruct", [space], _reconstruct, sheaf=sheaf, enumerate_k=enumerate_k, **kw)


@main.command()
@click.argument("target")
@click.option("--suite", required=True, type=click.Choice(SUITES))
@_common
def verify(target, suite, **kw):
    """Run a verification suite on a file or a built-in family (@toposic, @confluence, @spaces, @delta0-2)."""
    _run("verify", [target], _verify, suite=suite, **kw)


@main.command()
@click.argument("report", type=click.Path(exists=True, dir_okay=False))
@_common
def replay(report, **kw):
    """Re-run every failure witness in REPORT (a --out file) on its own instance."""
    _run("replay", [report], _replay, **kw)


if __name__ == "__main__":
    main()
