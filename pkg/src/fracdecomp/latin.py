"""Partial latin squares and their fractional completion via G_P.

Triples ``(row, col, symbol)`` are 0-indexed internally.  The grid format uses
1-indexed symbols with ``.`` or ``0`` for an empty cell; the triple format is
a ``pls n`` header followed by ``r c s`` lines (0-indexed).
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import ParseError, ValidityError
from .fan_solver import (SolveReport, SolverConfig, TriangleWeights, lift_to_triangles,
                         solve_fans)
from .partite_graph import PartiteGraph

log = logging.getLogger(__name__)

DENSITY_WARNING = 0.04


@dataclass(frozen=True)
class PartialLatinSquare:
    n: int
    triples: frozenset

    def __post_init__(self):
        object.__setattr__(self, "triples", frozenset(tuple(int(v) for v in t) for t in self.triples))
        for t in self.triples:
            if len(t) != 3 or not all(0 <= v < self.n for v in t):
                raise ValidityError(f"triple {t} out of range for order {self.n}")
        for a, b, what in ((0, 1, "cell"), (0, 2, "symbol in row"), (1, 2, "symbol in column")):
            seen = {}
            for t in sorted(self.triples):
                key = (t[a], t[b])
                if key in seen:
                    raise ValidityError(f"repeated {what}: {seen[key]} and {t}", conflict=(seen[key], t))
                seen[key] = t

    def __len__(self):
        return len(self.triples)


@dataclass(frozen=True)
class DensityReport:
    max_row_count: int
    max_col_count: int
    max_symbol_count: int
    c: Fraction


def parse_pls(text: str) -> PartialLatinSquare:
    lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise ParseError("empty input")
    if lines[0][0] == "pls":
        return _parse_triples(lines)
    return _parse_grid(lines)


def _parse_triples(lines) -> PartialLatinSquare:
    if len(lines[0]) != 2:
        raise ParseError("header must be 'pls n'")
    try:
        n = int(lines[0][1])
    except ValueError as exc:
        raise ParseError(f"bad order {lines[0][1]!r}") from exc
    cells = {}
    for lineno, parts in enumerate(lines[1:], start=2):
        if len(parts) != 3:
            raise ParseError(f"line {lineno}: expected 'r c s'")
        try:
            r, c, s = (int(v) for v in parts)
        except ValueError as exc:
            raise ParseError(f"line {lineno}: {exc}") from exc
        if (r, c) in cells:
            raise ParseError(f"line {lineno}: cell ({r}, {c}) given twice")
        cells[(r, c)] = s
    return PartialLatinSquare(n, frozenset((r, c, s) for (r, c), s in cells.items()))


def _parse_grid(lines) -> PartialLatinSquare:
    n = len(lines)
    triples = []
    for r, row in enumerate(lines):
        if len(row) != n:
            raise ParseError(f"row {r} has {len(row)} entries, expected {n}")
        for c, tok in enumerate(row):
            if tok in (".", "0"):
                continue
            try:
                s = int(tok)
            except ValueError as exc:
                raise ParseError(f"bad token {tok!r} at ({r}, {c})") from exc
            if not 1 <= s <= n:
                raise ParseError(f"symbol {s} at ({r}, {c}) outside 1..{n}")
            triples.append((r, c, s - 1))
    return PartialLatinSquare(n, frozenset(triples))


def format_grid(P: PartialLatinSquare) -> str:
    grid = [["."] * P.n for _ in range(P.n)]
    for r, c, s in P.triples:
        grid[r][c] = str(s + 1)
    return "\n".join(" ".join(row) for row in grid) + "\n"


def format_triples(P: PartialLatinSquare) -> str:
    return "\n".join([f"pls {P.n}"] + [f"{r} {c} {s}" for r, c, s in sorted(P.triples)]) + "\n"


def density(P: PartialLatinSquare) -> DensityReport:
    counts = [Counter(t[i] for t in P.triples) for i in range(3)]
    maxes = [max(cnt.values(), default=0) for cnt in counts]
    return DensityReport(*maxes, c=Fraction(max(maxes), P.n))


def build_gp(P: PartialLatinSquare) -> PartiteGraph:
    """Non-incidence graph on rows (class 0), columns (class 1) and symbols (class 2)."""
    n = P.n
    mask = np.ones((3, n, n), dtype=bool)
    for r, c, s in P.triples:
        mask[0, r, c] = False  # cell filled
        mask[1, r, s] = False  # symbol used in row
        mask[2, c, s] = False  # symbol used in column
    return PartiteGraph(3, n, mask)


def triangles_to_placements(G: PartiteGraph, triangles) -> list[tuple[int, int, int]]:
    n = G.n
    return [(int(a), int(b) - n, int(c) - 2 * n) for a, b, c in triangles]


# -- fixture generators -------------------------------------------------------


def cyclic_latin_square(n: int) -> PartialLatinSquare:
    return PartialLatinSquare(n, frozenset((i, j, (i + j) % n) for i in range(n) for j in range(n)))


def random_latin_square(n: int, rng: np.random.Generator) -> PartialLatinSquare:
    """Cyclic square with independently permuted rows, columns and symbols."""
    pr, pc, ps = (rng.permutation(n) for _ in range(3))
    return PartialLatinSquare(
        n, frozenset((int(pr[i]), int(pc[j]), int(ps[(i + j) % n])) for i in range(n) for j in range(n)))


def deletion_pls(n: int, c: float, rng: np.random.Generator, keep_prob: float = 1.0) -> PartialLatinSquare:
    """Delete entries of a random full square until it is c-dense.

    Cells are visited in random order; an entry survives only if its row,
    column and symbol are still below ``floor(c n)`` and a ``keep_prob`` coin
    comes up.  The result is contained in a latin square, so it is completable.
    """
    limit = int(np.floor(c * n + 1e-12))
    full = sorted(random_latin_square(n, rng).triples)
    order = rng.permutation(len(full))
    counts = [Counter(), Counter(), Counter()]
    kept = []
    for idx in order:
        t = full[idx]
        if any(counts[i][t[i]] >= limit for i in range(3)):
            continue
        if keep_prob < 1.0 and rng.random() >= keep_prob:
            continue
        kept.append(t)
        for i in range(3):
            counts[i][t[i]] += 1
    return PartialLatinSquare(n, frozenset(kept))


# -- pipeline -----------------------------------------------------------------


def fractional_complete(P: PartialLatinSquare, config: SolverConfig | None = None,
                        warn_above: float = DENSITY_WARNING
                        ) -> tuple[TriangleWeights, SolveReport, DensityReport]:
    """Fractional K_3-decomposition of G_P (a fractional completion certificate).

    Triangles of G_P are the admissible ``(row, col, symbol)`` placements.  No
    integral completion is attempted.
    """
    dens = density(P)
    if dens.c > warn_above:
        log.warning("partial square is %s-dense (%.4f), above %.2f: no nonnegativity guarantee",
                    dens.c, float(dens.c), warn_above)
    G = build_gp(P)
    x, report = solve_fans(G, config)
    z = lift_to_triangles(G, x)
    report.message = (report.message + f"; density c={dens.c}").lstrip("; ")
    return z, report, dens
