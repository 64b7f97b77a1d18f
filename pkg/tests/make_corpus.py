"""Regenerate the graph files in tests/corpus (deterministic)."""

from pathlib import Path

import numpy as np

from fracdecomp.partite_graph import complete_multipartite, remove_cliques, write_graph
from graphs import random_balanced_graph

HERE = Path(__file__).parent / "corpus"


def main():
    HERE.mkdir(exist_ok=True)
    for n in (2, 3, 4, 5, 8):
        write_graph(complete_multipartite(3, n), HERE / f"complete_{n}.graph")
    for n in (4, 6):
        G = remove_cliques(complete_multipartite(3, n), [[(0, 0), (1, 0), (2, 0)]])
        write_graph(G, HERE / f"minus_triangle_{n}.graph")
    write_graph(complete_multipartite(4, 2), HERE / "complete_k4_2.graph")
    rng = np.random.default_rng(2024)
    for n in (3, 4, 5, 6, 7, 8, 9):
        for i in range(4):
            write_graph(random_balanced_graph(n, rng), HERE / f"latin_{n}_{i}.graph")


if __name__ == "__main__":
    main()
