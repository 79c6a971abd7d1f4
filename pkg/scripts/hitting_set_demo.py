#!/usr/bin/env python3
"""Desk-scale strong hitting-set run.

Generates the sparse-point hitting set for a chosen (nvars, size, height,
dimension) class, verifies it against the reference corpus, and prints
which tuple first certifies each member.
"""

import argparse
import time

from ncrat.circuit import classify
from ncrat.field import prime_field
from ncrat.rit import corpus, hitting_set_generate, verify_strong


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nvars", type=int, default=3)
    ap.add_argument("--size", type=int, default=12)
    ap.add_argument("--height", type=int, default=1)
    ap.add_argument("--dim", type=int, default=4)
    ap.add_argument("--kappa", type=int, default=None)
    ap.add_argument("--prime", type=int, default=prime_field().p)
    args = ap.parse_args()

    field = prime_field(args.prime)
    start = time.perf_counter()
    hs = hitting_set_generate(args.nvars, args.size, args.height, args.dim,
                              args.kappa, field)
    gen_time = time.perf_counter() - start
    print(f"generated {len(hs.tuples)} tuples of dimension {hs.d} "
          f"(kappa={hs.kappa}) in {gen_time:.2f}s")

    members = [(name, circ, z) for name, circ, z in corpus()
               if circ.nvars <= args.nvars
               and classify(circ).size <= args.size
               and classify(circ).height <= args.height]
    nonzero = [(n, c) for n, c, z in members if not z]
    zero = [(n, c) for n, c, z in members if z]

    start = time.perf_counter()
    rep = verify_strong(hs, nonzero, field)
    print(f"\nnonzero members ({rep.total}), hit rate "
          f"{rep.hits}/{rep.total} in {time.perf_counter() - start:.2f}s:")
    for label, hit in rep.results:
        print(f"  {label:28s} {'tuple #' + str(hit) if hit is not None else 'MISS'}")

    repz = verify_strong(hs, zero, field)
    print(f"\nidentically-zero members ({repz.total}), "
          f"expected no hits, got {repz.hits}:")
    for label, hit in repz.results:
        print(f"  {label:28s} {'tuple #' + str(hit) if hit is not None else 'no hit (correct)'}")


if __name__ == "__main__":
    main()
