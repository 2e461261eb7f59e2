"""Show where collapsing a stratification fails to respect cocartesian edges.

For each test space the collapse onto a single stratum is pushed through the
gluing construction; spaces whose cocartesian edges are not carried to
cocartesian edges are reported together with a smallest witness.
"""

import argparse
import json

from laxglue import strattopos as st
from laxglue import suites
from laxglue.replay import reproduces


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=30)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--show", action="store_true", help="print the first witness of each failing space")
    args = ap.parse_args()
    for X in suites.test_spaces():
        t = st.map_functoriality(st.collapse_map(X), samples=args.samples, seed=args.seed)
        status = "ok" if t.ok else f"{len(t.failures)} failing checks"
        print(f"{X.name:14s} {status}")
        for name, (run, failed) in sorted(t.counts.items()):
            print(f"    {name}: {run - failed}/{run}")
        if t.failures:
            again = sum(reproduces(f) for f in t.failures)
            print(f"    witnesses reproduced on replay: {again}/{len(t.failures)}")
            if args.show:
                w = dict(t.failures[0]["witness"])
                w.pop("replay", None)
                print(json.dumps(w, indent=2, sort_keys=True, default=str))


if __name__ == "__main__":
    main()
