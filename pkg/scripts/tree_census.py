"""Exhaustive tree census for the zero-gamma game.

For each tau on a grid, reports which labelled tree minimises and maximises
the social cost, and how many trees admit no exact-equilibrium ownership.
"""

import argparse

import numpy as np

from vspc import graph as gr
from vspc.analysis import trees_without_equilibrium, tree_extremes
from vspc.epidemic import SteadyStateCache
from vspc.game import CostModel, GameParams


def shape(t):
    if gr.is_star(t):
        return "star"
    if gr.is_path(t):
        return "path"
    return "degrees " + "".join(map(str, sorted(t.degrees, reverse=True)))


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=6)
    ap.add_argument("--alpha", type=float, default=1.0)
    ap.add_argument("--taus", type=float, nargs="+",
                    default=[float(x) for x in np.round(np.arange(0.5, 5.01, 0.25), 2)])
    args = ap.parse_args()
    cache = SteadyStateCache()
    for tau in args.taus:
        p = GameParams(args.alpha, 0.0, tau, zero_gamma=True)
        m = CostModel(p, cache)
        te = tree_extremes(args.n, p, m)
        no_ne = trees_without_equilibrium(args.n, p, m)
        print(f"tau={tau:5.2f}  min: {shape(te.argmin):18s} ({len(te.min_ties)} ties)  "
              f"max: {shape(te.argmax):18s} ({len(te.max_ties)} ties)  trees without NE: {len(no_ne)}")


if __name__ == "__main__":
    main()
