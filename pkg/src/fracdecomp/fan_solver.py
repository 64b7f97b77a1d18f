"""Fan system ``(M_G + eta K[G]) x = 1`` and its lift to clique weights.

``M_G = W_G W_G^T`` is applied through the clique/edge incidence of G and
``K`` (the orthogonal projector onto ``ker M`` for the complete graph) through
aggregated relation sums, so neither matrix is ever materialised on the
iterative path.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import exact
from .errors import DomainError, ParseError, PreconditionError
from .partite_graph import PartiteGraph, is_locally_balanced
from .scheme_core import (SchemeParams, class_pairs, complete_edges, eigenvalues_M,
                          kernel_projector_coeffs, relation_labels)

log = logging.getLogger(__name__)

CHUNK = 1 << 16


@dataclass
class SolverConfig:
    solve_tol: float = 1e-10
    cert_tol: float = 1e-8
    eta: float | None = None  # None: theta_1 = (k-1) n^(k-2), i.e. 2n for triangles
    dense_cutoff: int = 512
    max_iterations: int = 5000
    stagnation_window: int = 200
    method: str = "auto"  # auto | cg | dense | exact
    threads: int = 1

    def __post_init__(self):
        if self.solve_tol <= 0 or self.cert_tol <= 0:
            raise DomainError("tolerances must be positive")
        if self.eta is not None and self.eta == 0:
            raise DomainError("eta must be nonzero")
        if self.method not in ("auto", "cg", "dense", "exact"):
            raise DomainError(f"unknown method {self.method!r}")


@dataclass
class FanWeights:
    values: np.ndarray
    eta: float
    k: int
    n: int
    iterations: int = 0
    residual: float = math.nan
    method: str = ""


@dataclass
class TriangleWeights:
    values: np.ndarray
    k: int
    n: int


@dataclass
class SolveReport:
    decomposition_residual_inf: float
    min_triangle_weight: float
    certified: bool
    cert_tol: float
    fan_residual_inf: float | None = None
    unshifted_residual_inf: float | None = None
    min_fan_weight: float | None = None
    converged: bool | None = None
    iterations: int | None = None
    eta: float | None = None
    method: str | None = None
    solve_tol: float | None = None
    num_edges: int = 0
    num_cliques: int = 0
    clamped_entries: int = 0
    message: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def default_eta(k: int, n: int) -> float:
    """theta_1 of M, which makes the E_1 term of the inverse vanish."""
    return float((k - 1) * n ** (k - 2))


# -- matvecs -----------------------------------------------------------------


def _check_len(G: PartiteGraph, y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.shape != (G.num_edges,):
        raise DomainError(f"vector has shape {y.shape}, expected ({G.num_edges},)")
    return y


def lift(G: PartiteGraph, x) -> np.ndarray:
    """``W_G^T x``: the weight induced on each clique by edge weights x."""
    ce = G.clique_edge_index
    return _check_len(G, x)[ce].sum(axis=1) if len(ce) else np.zeros(0)


def edge_sums(G: PartiteGraph, z, threads: int = 1) -> np.ndarray:
    """``W_G z``: for each edge, the total weight of the cliques containing it.

    Cliques are reduced in fixed chunks whose partial sums are added in chunk
    order, so the result does not depend on ``threads``.
    """
    ce = G.clique_edge_index
    z = np.asarray(z, dtype=np.float64)
    if z.shape != (len(ce),):
        raise DomainError(f"clique vector has shape {z.shape}, expected ({len(ce)},)")
    E, width = G.num_edges, ce.shape[1] if ce.ndim == 2 else 0

    def part(lo):
        blk = ce[lo:lo + CHUNK]
        return np.bincount(blk.ravel(), weights=np.repeat(z[lo:lo + CHUNK], width), minlength=E)

    starts = range(0, len(ce), CHUNK)
    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(part, starts))
    else:
        parts = [part(lo) for lo in starts]
    out = np.zeros(E)
    for p in parts:
        out += p
    return out


def mg_matvec(G: PartiteGraph, y, threads: int = 1) -> np.ndarray:
    """``M_G y`` accumulated clique by clique, O(|cliques|)."""
    y = _check_len(G, y)
    if G.num_edges == 0:
        return np.zeros(0)
    return edge_sums(G, lift(G, y), threads=threads)


def relation_sums(k: int, n: int, y_full) -> np.ndarray:
    """``A'_h y`` for every relation h, from per-vertex and per-pair partial sums.

    ``y_full`` is indexed by the edges of the complete graph; the result has
    shape ``(num_relations, num_edges)``.  Cost O(k^2 n^2).
    """
    pairs = class_pairs(k)
    m = 5 if k == 3 else 6
    Y = np.asarray(y_full, dtype=np.float64).reshape(len(pairs), n, n)
    rows = Y.sum(axis=2)
    cols = Y.sum(axis=1)
    tot = rows.sum(axis=1)
    at_vertex = np.zeros((k, n))
    at_class = np.zeros(k)
    for i, (p, q) in enumerate(pairs):
        at_vertex[p] += rows[i]
        at_vertex[q] += cols[i]
        at_class[p] += tot[i]
        at_class[q] += tot[i]
    grand = tot.sum()

    out = np.empty((m, len(pairs), n, n))
    for i, (p, q) in enumerate(pairs):
        r, c, y = rows[i][:, None], cols[i][None, :], Y[i]
        out[0, i] = y
        out[1, i] = r + c - 2 * y
        out[2, i] = tot[i] - r - c + y
        adj3 = (at_vertex[p][:, None] - r) + (at_vertex[q][None, :] - c)
        out[3, i] = adj3
        out[4, i] = (at_class[p] - tot[i]) + (at_class[q] - tot[i]) - adj3
        if m == 6:
            out[5, i] = grand - at_class[p] - at_class[q] + tot[i]
    return out.reshape(m, -1)


@lru_cache(maxsize=64)
def _kernel_coeffs(k: int, n: int) -> tuple[float, ...]:
    return tuple(float(c) for c in kernel_projector_coeffs(SchemeParams(k, n)))


def k_matvec(n: int, y, k: int = 3) -> np.ndarray:
    """Projection of y onto ``ker M`` for the complete k-partite graph."""
    y = np.asarray(y, dtype=np.float64)
    size = math.comb(k, 2) * n * n
    if y.shape != (size,):
        raise DomainError(f"vector has shape {y.shape}, expected ({size},)")
    coeffs = np.array(_kernel_coeffs(k, n))
    return coeffs @ relation_sums(k, n, y)


def kg_matvec(G: PartiteGraph, y) -> np.ndarray:
    """``K[G] y = L^T K L y`` with L the zero-extension from E(G) to E(K)."""
    y = _check_len(G, y)
    full = np.zeros(G.present.size)
    full[G.full_index] = y
    return k_matvec(G.n, full, k=G.k)[G.full_index]


def kernel_basis(n: int) -> np.ndarray:
    """The 3n kernel vectors ``v_beta`` of M for K_{n,n,n}, shape ``(3n, 3n^2)``.

    Classes are taken in the cyclic order 0 -> 1 -> 2 -> 0; ``v_beta`` is -1
    on edges from beta to the preceding class and +1 on edges to the next.
    """
    edges = complete_edges(3, n)
    out = np.zeros((3 * n, len(edges)))
    for cls in range(3):
        prev_c, next_c = (cls - 1) % 3, (cls + 1) % 3
        for v in range(n):
            for col, (ca, va, cb, vb) in enumerate(edges):
                if (ca, va) == (cls, v):
                    other = cb
                elif (cb, vb) == (cls, v):
                    other = ca
                else:
                    continue
                out[cls * n + v, col] = -1.0 if other == prev_c else 1.0 if other == next_c else 0.0
    return out


# -- dense assembly ----------------------------------------------------------


def dense_fan_matrix(G: PartiteGraph) -> np.ndarray:
    """Integer ``M_G`` assembled from clique edge pairs."""
    ce = G.clique_edge_index
    M = np.zeros((G.num_edges, G.num_edges), dtype=np.int64)
    for a in range(ce.shape[1] if ce.ndim == 2 else 0):
        for b in range(ce.shape[1]):
            np.add.at(M, (ce[:, a], ce[:, b]), 1)
    return M


def dense_kernel_restricted(G: PartiteGraph, exact_values: bool = False) -> np.ndarray:
    """``K[G]`` as a dense matrix (floats, or Fractions in an object array)."""
    coeffs = kernel_projector_coeffs(SchemeParams(G.k, G.n))
    labels = relation_labels(G.edges, G.edges)
    table = np.array(coeffs, dtype=object) if exact_values else np.array([float(c) for c in coeffs])
    return table[labels]


# -- solver ------------------------------------------------------------------


def _inf(v) -> float:
    return float(np.max(np.abs(v))) if len(v) else 0.0


def _cg(apply, b, tol, max_iter, window):
    """Conjugate gradients with infinity-norm stopping and best-iterate tracking."""
    x = np.zeros_like(b)
    r = b.copy()
    best_x, best_res = x.copy(), _inf(r)
    since_best = 0
    it = 0
    while it < max_iter:
        p = r.copy()
        rr = r @ r
        restart = False
        while it < max_iter:
            Ap = apply(p)
            pAp = p @ Ap
            if pAp <= 0:
                log.debug("CG breakdown at iteration %d (pAp=%g)", it, pAp)
                return best_x, it, False
            alpha = rr / pAp
            x = x + alpha * p
            r = r - alpha * Ap
            it += 1
            res = _inf(r)
            if res < best_res:
                best_res, best_x, since_best = res, x.copy(), 0
            else:
                since_best += 1
            if res <= tol:
                restart = True
                break
            if since_best >= window:
                return best_x, it, False
            rr_new = r @ r
            p = r + (rr_new / rr) * p
            rr = rr_new
        if not restart:
            break
        # confirm against the true residual; the recurrence drifts
        r = b - apply(x)
        true_res = _inf(r)
        if true_res <= tol:
            return x, it, True
        if true_res < best_res:
            best_res, best_x = true_res, x.copy()
    return best_x, it, False


def clamp_small_negatives(z, tol: float) -> tuple[np.ndarray, int]:
    z = np.array(z, dtype=np.float64)
    mask = (z < 0) & (z > -tol)
    z[mask] = 0.0
    return z, int(mask.sum())


def verify_decomposition(G: PartiteGraph, z, cert_tol: float = 1e-8) -> SolveReport:
    """Check ``W_G z = 1`` and ``z >= 0`` independently of how z was produced."""
    z = np.asarray(z, dtype=np.float64)
    zc, clamped = clamp_small_negatives(z, cert_tol)
    resid = _inf(edge_sums(G, zc) - 1.0) if G.num_edges else 0.0
    zmin = float(z.min()) if len(z) else math.inf
    return SolveReport(
        decomposition_residual_inf=resid,
        min_triangle_weight=zmin,
        certified=bool(resid <= cert_tol and zmin >= -cert_tol),
        cert_tol=cert_tol,
        num_edges=G.num_edges,
        num_cliques=len(z),
        clamped_entries=clamped,
    )


def lift_to_triangles(G: PartiteGraph, x: FanWeights | np.ndarray) -> TriangleWeights:
    values = x.values if isinstance(x, FanWeights) else x
    return TriangleWeights(lift(G, values), G.k, G.n)


def check_preconditions(G: PartiteGraph) -> None:
    if not is_locally_balanced(G):
        raise PreconditionError("graph is not locally balanced")
    if G.num_edges:
        covered = np.bincount(G.clique_edge_index.ravel(), minlength=G.num_edges) > 0
        if not covered.all():
            raise PreconditionError(
                f"{int((~covered).sum())} edges lie in no {G.k}-clique; the fan system has no solution")


def solve_fans(G: PartiteGraph, config: SolverConfig | None = None) -> tuple[FanWeights, SolveReport]:
    """Solve the shifted fan system and certify the lifted decomposition.

    A run that hits the iteration cap or stagnates is not an exception: the
    report has ``converged=False`` and the best iterate is returned.
    """
    config = config or SolverConfig()
    check_preconditions(G)
    eta = config.eta if config.eta is not None else default_eta(G.k, G.n)
    b = np.ones(G.num_edges)

    def apply(y):
        return mg_matvec(G, y, threads=config.threads) + eta * kg_matvec(G, y)

    method = config.method
    if method == "auto":
        method = "dense" if G.num_edges <= config.dense_cutoff else "cg"

    message = ""
    iterations = 0
    if G.num_edges == 0:
        x = np.zeros(0)
    elif method == "cg":
        x, iterations, _ = _cg(apply, b, config.solve_tol, config.max_iterations,
                               config.stagnation_window)
    elif method == "dense":
        A = dense_fan_matrix(G) + eta * dense_kernel_restricted(G)
        try:
            x = np.linalg.solve(A, b)
            ok = _inf(A @ x - b) <= config.solve_tol
        except np.linalg.LinAlgError:
            ok = False
        if not ok:
            # (numerically) singular shift; the system may still be consistent
            message = "shifted matrix is numerically singular; least-squares solution used"
            x = np.linalg.lstsq(A, b, rcond=None)[0]
    else:
        x = exact_fan_solution(G, eta)
        x = np.array([float(v) for v in x])

    fan_res = _inf(apply(x) - b) if G.num_edges else 0.0
    unshifted = _inf(mg_matvec(G, x) - b) if G.num_edges else 0.0
    converged = bool(fan_res <= config.solve_tol and np.all(np.isfinite(x)))
    if not converged:
        message = (message + "; " if message else "") + f"fan residual {fan_res:.3e} above tolerance {config.solve_tol:.1e}"

    z = lift(G, x) if G.num_edges else np.zeros(len(G.clique_edge_index))
    report = verify_decomposition(G, z, config.cert_tol)
    report.fan_residual_inf = fan_res
    report.unshifted_residual_inf = unshifted
    report.min_fan_weight = float(x.min()) if len(x) else None
    report.converged = converged
    report.iterations = iterations
    report.eta = eta
    report.method = method
    report.solve_tol = config.solve_tol
    report.message = message
    weights = FanWeights(x, eta, G.k, G.n, iterations=iterations, residual=fan_res, method=method)
    return weights, report


def exact_fan_solution(G: PartiteGraph, eta) -> list[Fraction]:
    """Exact rational solution of ``(M_G + eta K[G]) x = 1`` (small graphs only).

    If the shifted matrix is singular the minimum-norm solution is returned,
    which is the limit the iterative and least-squares paths converge to.
    """
    eta = Fraction(eta)
    A = dense_fan_matrix(G).astype(object) + eta * dense_kernel_restricted(G, exact_values=True)
    return exact.min_norm_solve(A, [1] * G.num_edges)


# -- weight files ------------------------------------------------------------


def format_weights(kind: str, k: int, n: int, values) -> str:
    if kind not in ("fanweights", "triangleweights"):
        raise DomainError(f"unknown weight kind {kind!r}")
    lines = [f"{kind} {k} {n} {len(values)}"]
    lines.extend(format(float(v), ".17g") for v in values)
    return "\n".join(lines) + "\n"


def parse_weights(text: str) -> tuple[str, int, int, np.ndarray]:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("empty weight file")
    head = lines[0].split()
    if len(head) != 4 or head[0] not in ("fanweights", "triangleweights"):
        raise ParseError(f"bad header {lines[0]!r}; expected 'fanweights|triangleweights k n count'")
    try:
        k, n, count = int(head[1]), int(head[2]), int(head[3])
        values = np.array([float(v) for v in lines[1:]])
    except ValueError as exc:
        raise ParseError(str(exc)) from exc
    if len(values) != count:
        raise ParseError(f"header announces {count} values, found {len(values)}")
    return head[0], k, n, values
