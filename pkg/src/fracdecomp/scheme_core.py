"""Hamming scheme H(k, n) and the second level of the Hamming lattice.

Edges of the complete k-partite graph K[2, k, n] are the rank-2 subwords of
``([n] + {*})^k``.  They form a 5-class (k = 3) or 6-class (k >= 4)
association scheme whose adjacency matrices ``A'_0 .. A'_m`` span the algebra
containing the fan matrix ``M = W W^T``.

All arithmetic in this module is exact (Python ints and ``Fraction``).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import exact
from .errors import DomainError, ResourceError, UnsupportedError

HAMMING_GUARD = 4096
PRODUCT_GUARD = 20000

# relation labels on the second level
IDENTICAL, ADJ_SAME_PAIR, DISJ_SAME_PAIR, ADJ_THREE, DISJ_THREE, DISJ_FOUR = range(6)


def binom(a: int, b: int) -> int:
    """Binomial coefficient that is zero outside ``0 <= b <= a``."""
    if a < 0 or b < 0 or b > a:
        return 0
    return math.comb(a, b)


@dataclass(frozen=True)
class SchemeParams:
    k: int
    n: int
    t: int = 2

    def __post_init__(self):
        if self.k < 3:
            raise DomainError(f"k must be >= 3, got {self.k}")
        if self.n < 2:
            raise DomainError(f"n must be >= 2, got {self.n}")
        if not 2 <= self.t <= self.k:
            raise DomainError(f"t must satisfy 2 <= t <= k, got t={self.t}, k={self.k}")

    @property
    def num_relations(self) -> int:
        """Number of relations (including the identity) on the second level."""
        return 5 if self.k == 3 else 6

    @property
    def num_edges(self) -> int:
        return math.comb(self.k, 2) * self.n**2


def _require_t2(params: SchemeParams) -> None:
    if params.t != 2:
        raise UnsupportedError("second-level computations are implemented for t = 2 only")


# --------------------------------------------------------------------------
# Krawtchouk polynomials and the Hamming scheme


def _kn(head, rest):
    """Accept either ``(params, *rest)`` or ``(k, n, *rest)``."""
    if isinstance(head, SchemeParams):
        return (head.k, head.n, *rest)
    return (head, *rest)


def krawtchouk(*args) -> int:
    """Krawtchouk polynomial ``kappa_i(x)`` of the Hamming scheme H(k, n).

    Call as ``krawtchouk(k, n, i, x)`` or ``krawtchouk(params, i, x)``.
    """
    k, n, i, x = _kn(args[0], args[1:])
    if k < 0 or n < 1:
        raise DomainError(f"invalid Hamming scheme H({k}, {n})")
    if not (0 <= i <= k and 0 <= x <= k):
        raise DomainError(f"need 0 <= i, x <= k; got i={i}, x={x}, k={k}")
    return sum(
        (-1) ** l * (n - 1) ** (i - l) * binom(k - x, i - l) * binom(x, l)
        for l in range(i + 1)
    )


def hamming_words(k: int, n: int) -> np.ndarray:
    """All words of ``[n]^k`` in lexicographic order, shape ``(n**k, k)``."""
    return np.array(list(itertools.product(range(n), repeat=k)), dtype=np.int64).reshape(-1, k)


def hamming_distance_matrix(k: int, n: int) -> np.ndarray:
    words = hamming_words(k, n)
    return (words[:, None, :] != words[None, :, :]).sum(axis=-1)


def exact_int_matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Exact product of integer matrices.

    Uses float64 BLAS when every partial sum is provably below 2**53 and
    falls back to Python integers otherwise.
    """
    bound = int(np.abs(a).max(initial=0)) * int(np.abs(b).max(initial=0)) * a.shape[1]
    if bound < 2**53:
        return np.rint(a.astype(np.float64) @ b.astype(np.float64)).astype(np.int64)
    return a.astype(object) @ b.astype(object)


def krawtchouk_transform_check(*args) -> bool:
    """Check the Krawtchouk transform between ``A_i`` and ``E_j`` exactly.

    Works with the integer matrices ``S_j = n^k E_j``; the identities become
    ``S_j S_l = delta_jl n^k S_j``, ``sum_j S_j = n^k I`` and
    ``n^k A_i = sum_j kappa_i(j) S_j``.  Takes ``(k, n)`` or ``params``.
    """
    k, n = _kn(args[0], args[1:])
    if k < 1 or n < 2:
        raise DomainError(f"invalid Hamming scheme H({k}, {n})")
    size = n**k
    if size > HAMMING_GUARD:
        raise ResourceError(f"n^k = {size} exceeds the dense guard {HAMMING_GUARD}")
    dist = hamming_distance_matrix(k, n)
    kappa = np.array([[krawtchouk(k, n, i, x) for x in range(k + 1)] for i in range(k + 1)],
                     dtype=np.int64)
    scaled = [kappa[j][dist] for j in range(k + 1)]
    eye = np.eye(size, dtype=np.int64)

    if not np.array_equal(sum(scaled), size * eye):
        return False
    for j in range(k + 1):
        for l in range(j, k + 1):
            prod = exact_int_matmul(scaled[j], scaled[l])
            expected = size * scaled[j] if j == l else np.zeros_like(prod)
            if not np.array_equal(prod, expected):
                return False
    for i in range(k + 1):
        adj = (dist == i).astype(np.int64)
        combo = sum(kappa[i][j] * scaled[j] for j in range(k + 1))
        if not np.array_equal(size * adj, combo):
            return False
    return True


# --------------------------------------------------------------------------
# Subword levels


def class_pairs(k: int) -> list[tuple[int, int]]:
    return list(itertools.combinations(range(k), 2))


def complete_edges(k: int, n: int) -> np.ndarray:
    """Canonical edge list of the complete k-partite graph.

    Rows are ``(class_a, vertex_a, class_b, vertex_b)`` with ``class_a <
    class_b``, sorted by ``(class_a, class_b, vertex_a, vertex_b)`` so each
    class pair is a contiguous ``n x n`` block; row position is the global
    edge index.
    """
    out = []
    for p, q in class_pairs(k):
        a, b = np.divmod(np.arange(n * n), n)
        out.append(np.stack([np.full(n * n, p), a, np.full(n * n, q), b], axis=1))
    return np.concatenate(out).astype(np.int64)


def level_subwords(k: int, n: int, t: int) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Rank-t subwords as ``(classes, values)`` in canonical order."""
    return [
        (classes, values)
        for classes in itertools.combinations(range(k), t)
        for values in itertools.product(range(n), repeat=t)
    ]


def inclusion_matrix(k: int, n: int, t: int) -> np.ndarray:
    """0/1 inclusion matrix of level t versus the top level ``[n]^k``."""
    words = hamming_words(k, n)
    combos = list(itertools.combinations(range(k), t))
    w = np.zeros((len(combos) * n**t, len(words)), dtype=np.int64)
    radix = n ** np.arange(t - 1, -1, -1)
    cols = np.arange(len(words))
    for ci, classes in enumerate(combos):
        rows = ci * n**t + words[:, list(classes)] @ radix
        w[rows, cols] = 1
    return w


def _check_edge(params: SchemeParams, e) -> tuple[int, int, int, int]:
    try:
        ca, va, cb, vb = (int(v) for v in e)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"malformed edge {e!r}") from exc
    if not (0 <= ca < cb < params.k and 0 <= va < params.n and 0 <= vb < params.n):
        raise DomainError(f"edge {e!r} is not a rank-2 subword for k={params.k}, n={params.n}")
    return ca, va, cb, vb


def relation_labels(e1: np.ndarray, e2: np.ndarray) -> np.ndarray:
    """Vectorised relation labels between two edge arrays of shape (N, 4), (M, 4)."""
    ca1, va1, cb1, vb1 = (e1[:, i][:, None] for i in range(4))
    ca2, va2, cb2, vb2 = (e2[:, i][None, :] for i in range(4))
    same_pair = (ca1 == ca2) & (cb1 == cb2)
    share = (((ca1 == ca2) & (va1 == va2)) | ((ca1 == cb2) & (va1 == vb2))
             | ((cb1 == ca2) & (vb1 == va2)) | ((cb1 == cb2) & (vb1 == vb2)))
    shared_classes = ((ca1 == ca2).astype(np.int8) + (ca1 == cb2) + (cb1 == ca2) + (cb1 == cb2))
    identical = same_pair & (va1 == va2) & (vb1 == vb2)

    labels = np.full(identical.shape, DISJ_FOUR, dtype=np.int8)
    labels[(shared_classes == 1) & ~share] = DISJ_THREE
    labels[(shared_classes == 1) & share] = ADJ_THREE
    labels[same_pair & ~share] = DISJ_SAME_PAIR
    labels[same_pair & share] = ADJ_SAME_PAIR
    labels[identical] = IDENTICAL
    return labels


def relation_of(params: SchemeParams, e, f) -> int:
    """Associate class of two edges ``(class_a, vertex_a, class_b, vertex_b)``."""
    e = np.array([_check_edge(params, e)])
    f = np.array([_check_edge(params, f)])
    return int(relation_labels(e, f)[0, 0])


def relation_matrix(params: SchemeParams) -> np.ndarray:
    edges = complete_edges(params.k, params.n)
    return relation_labels(edges, edges)


def relation_adjacency(params: SchemeParams) -> list[np.ndarray]:
    """Dense 0/1 adjacency matrices ``A'_0 .. A'_m`` over the canonical edge order."""
    labels = relation_matrix(params)
    return [(labels == i).astype(np.int64) for i in range(params.num_relations)]


# --------------------------------------------------------------------------
# Structure constants, degrees, spectrum, idempotents


def degrees(params: SchemeParams) -> tuple[int, ...]:
    k, n = params.k, params.n
    nu = (1, 2 * (n - 1), (n - 1) ** 2, 2 * (k - 2) * n, 2 * (k - 2) * n * (n - 1),
          binom(k - 2, 2) * n**2)
    return nu[: params.num_relations]


# Upper-triangular (i <= j, i, j >= 1) structure constants for k = 3 as functions of n.
_TABLE1 = {
    0: {(1, 1): lambda n: 2 * n - 2, (2, 2): lambda n: (n - 1) ** 2,
        (3, 3): lambda n: 2 * n, (4, 4): lambda n: n * (2 * n - 2)},
    1: {(1, 1): lambda n: n - 2, (1, 2): lambda n: n - 1, (2, 2): lambda n: (n - 1) * (n - 2),
        (3, 3): lambda n: n, (3, 4): lambda n: n, (4, 4): lambda n: n * (2 * n - 3)},
    2: {(1, 1): lambda n: 2, (1, 2): lambda n: 2 * n - 4, (2, 2): lambda n: (n - 2) ** 2,
        (3, 4): lambda n: 2 * n, (4, 4): lambda n: n * (2 * n - 4)},
    3: {(1, 3): lambda n: n - 1, (1, 4): lambda n: n - 1, (2, 4): lambda n: (n - 1) ** 2,
        (3, 3): lambda n: 1, (3, 4): lambda n: n - 1, (4, 4): lambda n: (n - 1) ** 2},
    4: {(1, 3): lambda n: 1, (1, 4): lambda n: 2 * n - 3, (2, 3): lambda n: n - 1,
        (2, 4): lambda n: (n - 1) * (n - 2), (3, 3): lambda n: 1, (3, 4): lambda n: n - 1,
        (4, 4): lambda n: (n - 1) ** 2},
}


def structure_constants_k3(n: int) -> np.ndarray:
    """Closed-form structure constants ``a[h, i, j]`` for k = 3."""
    a = np.zeros((5, 5, 5), dtype=np.int64)
    for h in range(5):
        a[h, 0, h] = a[h, h, 0] = 1
        for (i, j), fn in _TABLE1[h].items():
            a[h, i, j] = a[h, j, i] = fn(n)
    return a


def structure_constants_bruteforce(params: SchemeParams) -> np.ndarray:
    """Count ``a^h_ij`` from one representative pair per relation."""
    _require_t2(params)
    _product_guard(params)
    m = params.num_relations
    edges = complete_edges(params.k, params.n)
    labels = relation_labels(edges, edges)
    a = np.zeros((m, m, m), dtype=np.int64)
    for h in range(m):
        x, y = np.argwhere(labels == h)[0]
        np.add.at(a[h], (labels[x], labels[:, y]), 1)
    return a


def eigenvalues_M(params: SchemeParams) -> list[tuple[int, int]]:
    """Eigenvalues of ``M = W W^T`` with multiplicities; the kernel pair is last."""
    k, n, t = params.k, params.n, params.t
    pairs = [(binom(k - j, k - t) * n ** (k - t), binom(k, j) * (n - 1) ** j) for j in range(t + 1)]
    dim = binom(k, t) * n**t
    pairs.append((0, dim - sum(m for _, m in pairs)))
    return pairs


def idempotent_coeffs_k3(n: int) -> list[list[Fraction]]:
    """Coefficients of ``A'_0..A'_4`` in ``E_0, E_1, E_2`` for K_{n,n,n}."""
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    d = Fraction(1, n * n)
    return [
        [Fraction(1, 3 * n * n)] * 5,
        [(n - 1) * d, (n - 2) * d / 2, -d, (n - 1) * d / 2, -d / 2],
        [(n - 1) ** 2 * d, -(n - 1) * d, d, Fraction(0), Fraction(0)],
    ]


def F(s: int, h: int, i: int, n: int) -> int:
    """``F_s(h, i) = n^h (n-1)^i sum_l C(h, i-l) C(2s, l)``; zero for i < 0 or h < 0."""
    if i < 0 or h < 0:
        return 0
    return n**h * (n - 1) ** i * sum(binom(h, i - l) * binom(2 * s, l) for l in range(2 * s + 1))


def waw_rowsum(params: SchemeParams, i: int) -> int:
    k, n, t = params.k, params.n, params.t
    if not 0 <= i <= k:
        raise DomainError(f"need 0 <= i <= k, got i={i}")
    return binom(k, t) * binom(k, i) * n ** (k - t) * (n - 1) ** i


def waw_expansion_t2(params: SchemeParams, i: int) -> list[int]:
    """Coefficients of ``W A_i W^T`` on ``A'_0 .. A'_m`` (t = 2)."""
    _require_t2(params)
    k, n = params.k, params.n
    if not 0 <= i <= k:
        raise DomainError(f"need 0 <= i <= k, got i={i}")
    coeffs = [F(0, k - 2, i, n), F(0, k - 2, i - 1, n), F(0, k - 2, i - 2, n),
              F(1, k - 3, i, n), F(1, k - 3, i - 1, n), F(2, k - 4, i, n)]
    return coeffs[: params.num_relations]


def idempotent_coeffs(params: SchemeParams) -> list[list[Fraction]]:
    """Coefficients of the eigenprojections ``E'_0, E'_1, E'_2`` of M on the ``A'_h``.

    Uses ``E'_j = theta_j^{-1} n^{-k} sum_i kappa_j(i) W A_i W^T`` together
    with the expansion of ``W A_i W^T`` over the second-level relations, so it
    is available for every k >= 3.
    """
    _require_t2(params)
    k, n = params.k, params.n
    m = params.num_relations
    expansions = [waw_expansion_t2(params, i) for i in range(k + 1)]
    rows = []
    for j, (theta, _) in enumerate(eigenvalues_M(params)[:3]):
        scale = Fraction(1, theta * n**k)
        rows.append([
            scale * sum(krawtchouk(k, n, j, i) * expansions[i][h] for i in range(k + 1))
            for h in range(m)
        ])
    return rows


def kernel_projector_coeffs(params: SchemeParams) -> list[Fraction]:
    """Coefficients of ``K = I - E'_0 - E'_1 - E'_2`` on the ``A'_h``."""
    rows = idempotent_coeffs_k3(params.n) if params.k == 3 else idempotent_coeffs(params)
    out = [-sum(col) for col in zip(*rows)]
    out[0] += 1
    return out


@dataclass(frozen=True)
class SchemeTable:
    params: SchemeParams
    structure_constants: np.ndarray  # a[h, i, j]
    degrees: tuple[int, ...]
    eigenvalues: tuple[int, ...]
    idempotent_coeffs: tuple[tuple[Fraction, ...], ...]


def build_scheme_table(params: SchemeParams) -> SchemeTable:
    _require_t2(params)
    if params.k == 3:
        a = structure_constants_k3(params.n)
        idem = idempotent_coeffs_k3(params.n)
    else:
        a = structure_constants_bruteforce(params)
        idem = idempotent_coeffs(params)
    a.setflags(write=False)
    return SchemeTable(
        params=params,
        structure_constants=a,
        degrees=degrees(params),
        eigenvalues=tuple(theta for theta, _ in eigenvalues_M(params)[:3]),
        idempotent_coeffs=tuple(tuple(r) for r in idem),
    )


def _product_guard(params: SchemeParams) -> None:
    size = params.k * math.comb(params.k, 2) * params.n**2
    if size > PRODUCT_GUARD:
        raise ResourceError(f"k*C(k,2)*n^2 = {size} exceeds the dense guard {PRODUCT_GUARD}")


def product_expansion(params: SchemeParams, i: int, j: int) -> dict[int, int]:
    """Expand the dense product ``A'_i A'_j`` over the relations it is supported on."""
    _require_t2(params)
    _product_guard(params)
    labels = relation_matrix(params)
    adj = [(labels == r).astype(np.int64) for r in range(params.num_relations)]
    prod = exact_int_matmul(adj[i], adj[j])
    out = {}
    for h in range(params.num_relations):
        vals = np.unique(prod[labels == h])
        if len(vals) != 1:
            raise ArithmeticError(f"A'_{i} A'_{j} is not constant on relation {h}")
        if vals[0]:
            out[h] = int(vals[0])
    return out


def verify_structure_constants(params: SchemeParams, table: SchemeTable | None = None) -> bool:
    """Multiply every pair of dense ``A'_i`` and compare with the tabulated constants."""
    _require_t2(params)
    _product_guard(params)
    table = table or build_scheme_table(params)
    adj = relation_adjacency(params)
    m = params.num_relations
    a = table.structure_constants
    for i in range(m):
        for j in range(i, m):
            prod = exact_int_matmul(adj[i], adj[j])
            expected = sum(int(a[h, i, j]) * adj[h] for h in range(m))
            if not np.array_equal(prod, expected):
                return False
    return True


def fan_matrix_complete(params: SchemeParams) -> np.ndarray:
    """Dense integer ``M = W W^T`` for K[2, k, n] (k-cliques over edge pairs)."""
    w = inclusion_matrix(params.k, params.n, 2)
    return exact_int_matmul(w, w.T)


SPECTRUM_GUARD = 1500


def verify_spectrum(params: SchemeParams) -> bool:
    """Compare the formula spectrum of ``W W^T`` with exact dense ranks."""
    rows = binom(params.k, params.t) * params.n**params.t
    if rows > SPECTRUM_GUARD:
        raise ResourceError(f"C(k,t) n^t = {rows} exceeds the dense guard {SPECTRUM_GUARD}")
    w = inclusion_matrix(params.k, params.n, params.t)
    m = exact_int_matmul(w, w.T)
    spectrum = eigenvalues_M(params)
    if spectrum[-1][1] < 0:
        return False
    merged: dict[int, int] = {}
    for theta, mult in spectrum:
        merged[theta] = merged.get(theta, 0) + mult
    return all(exact.eigen_multiplicity(m, theta) == mult for theta, mult in merged.items())


def _scaled_relation_matrix(labels: np.ndarray, coeffs, scale: int) -> np.ndarray:
    ints = [int(c * scale) for c in coeffs]
    return np.array(ints, dtype=object)[labels]


def verify_idempotents(params: SchemeParams) -> bool:
    """Exact dense check of ``E_i E_j = delta_ij E_i``, ``sum E_j + K = I``,
    ``M E_j = theta_j E_j`` and ``M K = 0``."""
    _require_t2(params)
    _product_guard(params)
    labels = relation_matrix(params)
    rows = [list(r) for r in build_scheme_table(params).idempotent_coeffs]
    rows.append(kernel_projector_coeffs(params))
    scale = math.lcm(*(c.denominator for r in rows for c in r))
    mats = [_scaled_relation_matrix(labels, r, scale).astype(np.int64) for r in rows]
    size = labels.shape[0]
    eye = np.eye(size, dtype=np.int64)
    if not np.array_equal(sum(mats), scale * eye):
        return False
    for i in range(len(mats)):
        for j in range(i, len(mats)):
            prod = exact_int_matmul(mats[i], mats[j])
            expected = scale * mats[i] if i == j else np.zeros_like(prod)
            if not np.array_equal(prod, expected):
                return False
    m = fan_matrix_complete(params)
    thetas = [theta for theta, _ in eigenvalues_M(params)[:3]] + [0]
    return all(np.array_equal(exact_int_matmul(m, e), theta * e) for theta, e in zip(thetas, mats))
