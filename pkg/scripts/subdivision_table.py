"""Tabulate chain counts of subdivided simplices and a few small posets."""

import time

from laxglue import suites
from laxglue.poset import simplex
from laxglue.subdivision import subdivide

for n in range(8):
    t0 = time.perf_counter()
    sd = subdivide(simplex(n))
    print(f"D^{n}: {len(sd):4d} chains, {len(sd.cocart_edges):5d} cocartesian edges, {time.perf_counter() - t0:.3f}s")
for name, P in suites.small_posets().items():
    sd = subdivide(P)
    print(f"{name:8s}: {len(sd):4d} chains, {len(sd.cocart_edges):5d} cocartesian edges")
