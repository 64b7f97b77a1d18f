"""Seeded generators of locally balanced test graphs."""

from __future__ import annotations

import numpy as np

from fracdecomp.errors import PreconditionError
from fracdecomp.fan_solver import check_preconditions
from fracdecomp.latin import build_gp, deletion_pls


def random_balanced_graph(n: int, rng: np.random.Generator, solvable: bool = True):
    """G_P for a random deletion-generated partial latin square.

    Density limits range over 1..n-1 entries per line with a random keep
    probability, so the graphs go from near-complete to sparse.  With
    ``solvable`` the draw is repeated until every edge lies in a triangle.
    """
    while True:
        limit = int(rng.integers(1, n))
        P = deletion_pls(n, limit / n, rng, keep_prob=float(rng.uniform(0.2, 1.0)))
        G = build_gp(P)
        if not solvable:
            return G
        try:
            check_preconditions(G)
        except PreconditionError:
            continue
        return G


def balanced_graph_set(n: int, count: int = 50, seed: int = 0):
    rng = np.random.default_rng(1000 * n + seed)
    return [random_balanced_graph(n, rng) for _ in range(count)]
