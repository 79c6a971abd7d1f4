#!/usr/bin/env python3
"""Dimension-bootstrapping experiment over the reference corpus.

For each nonzero corpus member, record the smallest sampled dimension
with a definedness point and with an invertible image, grouped by
inversion height.  Produces the evidence table for the conjectured
logarithmic witness dimensions; nothing here asserts the conjecture.
"""

import argparse

from ncrat.circuit import classify
from ncrat.field import prime_field
from ncrat.rit import bootstrap_dimension, corpus


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--prime", type=int, default=prime_field().p)
    ap.add_argument("--dims", default="1,2,3,4")
    ap.add_argument("--trials", type=int, default=16)
    ap.add_argument("--seed", type=int, default=1)
    args = ap.parse_args()

    field = prime_field(args.prime)
    dims = tuple(int(x) for x in args.dims.split(","))
    print(f"{'name':28s} {'size':>4s} {'height':>6s} {'defined':>7s} "
          f"{'invertible':>10s} routes")
    by_height: dict[int, list[int]] = {}
    for name, circ, expect_zero in corpus():
        if expect_zero:
            continue
        rep = bootstrap_dimension(circ, field, schedule=dims,
                                  trials=args.trials, seed=args.seed)
        info = classify(circ)
        routes = ",".join(
            f"d{r.d}:{r.route}" +
            (f"(tau={r.tau},lift={r.assembled_dim}"
             f"{'+' if r.assembled_nonzero else '-'})"
             if r.tau is not None else "")
            for r in rep.rows if r.defined)
        print(f"{name:28s} {info.size:4d} {rep.height:6d} "
              f"{str(rep.smallest_defined):>7s} "
              f"{str(rep.smallest_invertible):>10s} {routes}")
        if rep.smallest_invertible is not None:
            by_height.setdefault(rep.height, []).append(rep.smallest_invertible)
    print()
    for h in sorted(by_height):
        dims_h = by_height[h]
        print(f"height {h}: {len(dims_h)} members, "
              f"max invertible-image dimension {max(dims_h)}")


if __name__ == "__main__":
    main()
