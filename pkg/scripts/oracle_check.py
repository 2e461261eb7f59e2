"""Compare the chain formula for j_* on the 2-simplex with a brute-force right adjoint.

Every section over the sieve {0, 1} with pointwise sizes <= 2 is extended two ways
and the results are tested for isomorphism.
"""

import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "tests"))

from oracles import brute_force_right_adjoint  # noqa: E402

from laxglue import suites  # noqa: E402
from laxglue.laxdiagram import restrict_diagram  # noqa: E402
from laxglue.poset import Decomposition, simplex  # noqa: E402
from laxglue.rlaxsections import Recollement, enumerate_sections, find_section_iso  # noqa: E402


def main():
    P = simplex(2)
    dec = Decomposition.from_sieve(P, {"0", "1"})
    family = [
        suites.graded_power_family(P, "or", [], "graded-or"),
        suites.graded_power_family(P, "xor", ["0", "1"], "graded-xor-01"),
        suites.power_family(P, "left"),
        suites.power_family(P, "right"),
        suites.power_family(P, "and", zero_from="0", tag="power-and-zero"),
    ]
    total = 0
    for d in family:
        t0 = time.perf_counter()
        rec = Recollement(d, dec)
        n = bad = 0
        for u in enumerate_sections(restrict_diagram(d, {"0", "1"}), 2):
            n += 1
            bad += find_section_iso(rec.j_star(u), brute_force_right_adjoint(d, u)) is None
        total += bad
        print(f"{d.name:16s} {n:4d} sections  {bad} mismatches  {time.perf_counter() - t0:.1f}s")
    sys.exit(1 if total else 0)


if __name__ == "__main__":
    main()
