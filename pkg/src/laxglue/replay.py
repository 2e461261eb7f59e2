"""Re-run a single failure witness from a report.

Every failing check in a report carries a ``replay`` object naming the kind of
instance it came from and holding that instance in full.  Re-running it
evaluates the same checks on that instance alone.
"""

from __future__ import annotations

from . import io
from .errors import ParseError
from .rlaxsections import CheckTally

__all__ = ["run_replay", "reproduces", "failures_in"]


def run_replay(r: dict) -> CheckTally:
    kind = r.get("kind") if isinstance(r, dict) else None
    if kind == "section":
        from .suites import section_checks

        return section_checks(r)
    if kind == "space":
        from .strattopos import space_checks

        return space_checks(io.space_from_json(r["space"]), r)
    if kind == "diagram":
        from .laxdiagram import validate

        tally = CheckTally()
        rep = validate(io.diagram_from_json(r["diagram"]), bound=r.get("bound", 2), seed=r.get("seed", 0))
        tally.record("diagram validates", rep.ok, rep.to_json())
        return tally
    if kind == "multiplicity":
        from .extendable import equivalence_check, extend, gamma_restrict, enumerate_spines, is_extendable
        import random

        md = io.multiplicity_from_json(r["diagram"])
        tally = equivalence_check(md, bound=r.get("bound", 2), cap=r.get("cap"), seed=r.get("seed", 0),
                                  hom_pairs=r.get("hom_pairs", 2), completion_cap=r.get("completion_cap", 64))
        for t in enumerate_spines(md.lax, md.n, r.get("bound", 2), r.get("cap"), random.Random(r.get("seed", 0))):
            if is_extendable(t).ok:
                tally.record("extension restricts back", gamma_restrict(extend(t)).key == t.key, None)
        return tally
    raise ParseError(f"unknown replay kind {kind!r}", locus="witness.replay")


def failures_in(doc) -> list:
    """Accept a whole report, a list of failures or a single failure."""
    if isinstance(doc, dict) and "failures" in doc:
        return doc["failures"]
    if isinstance(doc, dict) and "check" in doc:
        return [doc]
    if isinstance(doc, list):
        return doc
    raise ParseError("expected a report, a failure or a list of failures", locus="witness")


def reproduces(failure: dict) -> bool:
    """True when re-running the witness fails the same check again."""
    w = failure.get("witness")
    if not isinstance(w, dict) or "replay" not in w:
        raise ParseError(f"failure of {failure.get('check')!r} has no replay data", locus="witness")
    tally = run_replay(w["replay"])
    return any(f["check"] == failure["check"] for f in tally.failures)
