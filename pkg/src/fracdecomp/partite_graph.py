"""Balanced k-partite graphs as subgraphs of the complete multipartite graph.

A vertex is a pair ``(class, index)`` serialised as ``class * n + index``.
Edges are stored as one boolean ``n x n`` block per unordered class pair
``(p, q)``, ``p < q``, in the order of :func:`scheme_core.class_pairs`; entry
``[a, b]`` is the edge between vertex ``a`` of class ``p`` and vertex ``b`` of
class ``q``.  Edge order everywhere is block order: lexicographic in
``(class_a, class_b, vertex_a, vertex_b)``, so the complete graph's edge
``(p, a, q, b)`` has index ``pair(p, q) * n^2 + a * n + b``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import DomainError, ParseError
from .scheme_core import class_pairs, complete_edges


@dataclass(frozen=True, eq=False)
class PartiteGraph:
    k: int
    n: int
    present: np.ndarray
    _cliques: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        if self.k < 2 or self.n < 1:
            raise DomainError(f"invalid partite parameters k={self.k}, n={self.n}")
        shape = (math.comb(self.k, 2), self.n, self.n)
        mask = np.array(self.present, dtype=bool)
        if mask.shape != shape:
            raise DomainError(f"edge mask has shape {mask.shape}, expected {shape}")
        mask.setflags(write=False)
        object.__setattr__(self, "present", mask)

    def __eq__(self, other):
        if not isinstance(other, PartiteGraph):
            return NotImplemented
        return self.k == other.k and self.n == other.n and np.array_equal(self.present, other.present)

    def __hash__(self):
        return hash((self.k, self.n, self.present.tobytes()))

    # -- indexing ---------------------------------------------------------

    @cached_property
    def pair_index(self) -> dict[tuple[int, int], int]:
        return {pq: i for i, pq in enumerate(class_pairs(self.k))}

    @cached_property
    def full_index(self) -> np.ndarray:
        """Global (complete-graph) edge index of every edge of G, ascending."""
        return np.flatnonzero(self.present.ravel())

    @cached_property
    def local_index(self) -> np.ndarray:
        """Map from global edge index to position in G's edge list, or -1."""
        out = np.full(self.present.size, -1, dtype=np.int64)
        out[self.full_index] = np.arange(len(self.full_index))
        return out

    @cached_property
    def edges(self) -> np.ndarray:
        return complete_edges(self.k, self.n)[self.full_index]

    @property
    def num_edges(self) -> int:
        return len(self.full_index)

    @property
    def num_vertices(self) -> int:
        return self.k * self.n

    def block(self, p: int, q: int) -> np.ndarray:
        """Adjacency between classes p and q (rows index class p)."""
        if p < q:
            return self.present[self.pair_index[(p, q)]]
        return self.present[self.pair_index[(q, p)]].T

    # -- degrees ----------------------------------------------------------

    @cached_property
    def degree_table(self) -> np.ndarray:
        """``deg[v, c]``: neighbours of vertex v in class c (0 for v's own class)."""
        deg = np.zeros((self.k * self.n, self.k), dtype=np.int64)
        for (p, q), i in self.pair_index.items():
            blk = self.present[i]
            deg[p * self.n:(p + 1) * self.n, q] = blk.sum(axis=1)
            deg[q * self.n:(q + 1) * self.n, p] = blk.sum(axis=0)
        deg.setflags(write=False)
        return deg

    @property
    def min_degree(self) -> int:
        return int(self.degree_table.sum(axis=1).min())

    def foreign_mask(self) -> np.ndarray:
        own = np.repeat(np.arange(self.k), self.n)
        return np.arange(self.k)[None, :] != own[:, None]

    # -- cliques ----------------------------------------------------------

    def cliques(self, r: int) -> np.ndarray:
        if r not in self._cliques:
            self._cliques[r] = _enumerate_cliques(self, r)
        return self._cliques[r]

    @cached_property
    def clique_edge_index(self) -> np.ndarray:
        """Local edge indices of the ``C(k,2)`` edges of every transversal k-clique.

        Shape ``(num_cliques, C(k,2))``; columns follow the class-pair order.
        """
        cl = self.cliques(self.k)
        idx = cl - (np.arange(self.k) * self.n)[None, :]
        cols = []
        for (p, q), i in self.pair_index.items():
            full = i * self.n * self.n + idx[:, p] * self.n + idx[:, q]
            cols.append(self.local_index[full])
        out = np.stack(cols, axis=1) if cols else np.zeros((0, 0), dtype=np.int64)
        out.setflags(write=False)
        return out


def complete_multipartite(k: int, n: int) -> PartiteGraph:
    return PartiteGraph(k, n, np.ones((math.comb(k, 2), n, n), dtype=bool))


def empty_multipartite(k: int, n: int) -> PartiteGraph:
    return PartiteGraph(k, n, np.zeros((math.comb(k, 2), n, n), dtype=bool))


def _normalise_edge(k: int, n: int, edge) -> tuple[int, int, int, int]:
    c1, v1, c2, v2 = (int(x) for x in edge)
    if c1 == c2:
        raise DomainError(f"intra-class edge {edge!r}")
    if c1 > c2:
        c1, v1, c2, v2 = c2, v2, c1, v1
    if not (0 <= c1 < k and 0 <= c2 < k and 0 <= v1 < n and 0 <= v2 < n):
        raise DomainError(f"edge {edge!r} out of range for k={k}, n={n}")
    return c1, v1, c2, v2


def from_edges(k: int, n: int, edges) -> PartiteGraph:
    """Build a graph from ``(c1, v1, c2, v2)`` tuples in either class order."""
    mask = np.zeros((math.comb(k, 2), n, n), dtype=bool)
    pidx = {pq: i for i, pq in enumerate(class_pairs(k))}
    for e in edges:
        c1, v1, c2, v2 = _normalise_edge(k, n, e)
        mask[pidx[(c1, c2)], v1, v2] = True
    return PartiteGraph(k, n, mask)


def remove_edges(G: PartiteGraph, edges) -> PartiteGraph:
    mask = G.present.copy()
    for e in edges:
        c1, v1, c2, v2 = _normalise_edge(G.k, G.n, e)
        mask[G.pair_index[(c1, c2)], v1, v2] = False
    return PartiteGraph(G.k, G.n, mask)


def remove_cliques(G: PartiteGraph, cliques) -> PartiteGraph:
    """Remove all edges of the given cliques, each a sequence of ``(class, index)``."""
    edges = []
    for clique in cliques:
        for (c1, v1), (c2, v2) in itertools.combinations(clique, 2):
            edges.append((c1, v1, c2, v2))
    return remove_edges(G, edges)


def is_locally_balanced(G: PartiteGraph) -> bool:
    deg = G.degree_table
    foreign = G.foreign_mask()
    for v in range(G.num_vertices):
        row = deg[v][foreign[v]]
        if row.min() != row.max():
            return False
    return True


def min_degree_deficiency(G: PartiteGraph) -> Fraction:
    """Smallest c with ``delta(G) >= (1 - c)(k - 1) n``."""
    return 1 - Fraction(G.min_degree, (G.k - 1) * G.n)


def partite_complement(G: PartiteGraph) -> PartiteGraph:
    return PartiteGraph(G.k, G.n, ~G.present)


def _enumerate_cliques(G: PartiteGraph, r: int) -> np.ndarray:
    k, n = G.k, G.n
    if not 1 <= r <= k:
        raise DomainError(f"clique size must satisfy 1 <= r <= k, got r={r}")
    found = []
    for classes in itertools.combinations(range(k), r):
        partial = np.arange(n)[:, None]
        for depth in range(1, r):
            c_new = classes[depth]
            ok = np.ones((len(partial), n), dtype=bool)
            for j in range(depth):
                ok &= G.block(classes[j], c_new)[partial[:, j]]
            rows, cand = np.nonzero(ok)
            partial = np.concatenate([partial[rows], cand[:, None]], axis=1)
        found.append(partial + (np.array(classes) * n)[None, :])
    out = np.concatenate(found) if found else np.zeros((0, r), dtype=np.int64)
    out = out[np.lexsort(out.T[::-1])] if len(out) else out
    out = out.astype(np.int64)
    out.setflags(write=False)
    return out


def enumerate_cliques(G: PartiteGraph, r: int) -> np.ndarray:
    """All r-cliques of G with one vertex per class, shape ``(T, r)``.

    Rows hold vertex ids in increasing class order and are sorted
    lexicographically.
    """
    return G.cliques(r)


def enumerate_triangles(G: PartiteGraph) -> np.ndarray:
    return G.cliques(3)


# -- file format ------------------------------------------------------------


def format_graph(G: PartiteGraph) -> str:
    lines = [f"partite {G.k} {G.n}"]
    lines.extend(" ".join(str(int(x)) for x in e) for e in G.edges)
    return "\n".join(lines) + "\n"


def parse_graph(text: str) -> PartiteGraph:
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if not lines:
        raise ParseError("empty graph file")
    head = lines[0].split()
    if len(head) != 3 or head[0] != "partite":
        raise ParseError(f"bad header {lines[0]!r}; expected 'partite k n'")
    try:
        k, n = int(head[1]), int(head[2])
    except ValueError as exc:
        raise ParseError(f"bad header {lines[0]!r}") from exc
    if k < 2 or n < 1:
        raise ParseError(f"invalid parameters k={k}, n={n}")
    seen = set()
    edges = []
    for lineno, ln in enumerate(lines[1:], start=2):
        parts = ln.split()
        if len(parts) != 4:
            raise ParseError(f"line {lineno}: expected 'c1 v1 c2 v2', got {ln!r}")
        try:
            e = _normalise_edge(k, n, [int(x) for x in parts])
        except (ValueError, DomainError) as exc:
            raise ParseError(f"line {lineno}: {exc}") from exc
        if e in seen:
            raise ParseError(f"line {lineno}: duplicate edge {ln!r}")
        seen.add(e)
        edges.append(e)
    return from_edges(k, n, edges)


def read_graph(path) -> PartiteGraph:
    with open(path) as fh:
        return parse_graph(fh.read())


def write_graph(G: PartiteGraph, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_graph(G))
