"""Norm estimates and decomposition thresholds.

Every quantity is computed as an exact rational first; floats in the reports
are roundings of those rationals.  ``A`` below is the shifted fan matrix
``M + eta K`` of the complete k-partite graph (t = 2), whose inverse lies in
the algebra spanned by the relation matrices ``A'_h``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from . import exact
from .errors import DomainError, ResourceError
from .partite_graph import PartiteGraph, complete_multipartite, enumerate_cliques, min_degree_deficiency
from .reporting import jsonable
from .scheme_core import (SchemeParams, binom, degrees, eigenvalues_M, fan_matrix_complete,
                          idempotent_coeffs, idempotent_coeffs_k3, kernel_projector_coeffs, krawtchouk,
                          relation_matrix)

DENSE_NORM_GUARD = 5000
CLIQUE_GUARD = 2_000_000

C_BASIC = Fraction(3, 80)
TAU_LABEL = Fraction(24, 25)


def _as_exact(x):
    """Keep ints/Fractions exact; leave floats alone."""
    return Fraction(x) if isinstance(x, (int, Fraction)) else float(x)


# -- exact inverse of the shifted fan matrix -----------------------------------


def default_shift(k: int, n: int) -> int:
    return (k - 1) * n ** (k - 2)


def inverse_coeffs(n: int, k: int = 3, eta=None) -> list[Fraction]:
    """Coefficients of ``(M + eta K)^{-1}`` on ``A'_0 .. A'_m``.

    ``A^{-1} = sum_j theta_j^{-1} E_j + eta^{-1} K``.
    """
    params = SchemeParams(k, n)
    eta = Fraction(default_shift(k, n) if eta is None else eta)
    if eta == 0:
        raise DomainError("eta must be nonzero")
    idem = idempotent_coeffs_k3(n) if k == 3 else idempotent_coeffs(params)
    thetas = [theta for theta, _ in eigenvalues_M(params)[:3]]
    kern = kernel_projector_coeffs(params)
    out = []
    for h in range(params.num_relations):
        c = sum(Fraction(row[h], theta) for row, theta in zip(idem, thetas))
        out.append(c + kern[h] / eta)
    return out


@dataclass(frozen=True)
class NormReport:
    n: int
    k: int
    eta: Fraction
    exact: Fraction
    inv_inf_norm: float
    scaled: float
    predicted_leading: Fraction
    gap: Fraction  # scaled exact value minus predicted_leading

    def to_dict(self) -> dict:
        return jsonable(self)


def _dense_inverse_norm(params: SchemeParams, eta: Fraction, coeffs: list[Fraction]) -> Fraction:
    """Assemble ``A`` and ``A^{-1}`` densely, confirm ``A A^{-1} = I``, take row sums."""
    labels = relation_matrix(params)
    size = labels.shape[0]
    kern = np.array(kernel_projector_coeffs(params), dtype=object)[labels]
    a = fan_matrix_complete(params).astype(object) + eta * kern
    inv = np.array(coeffs, dtype=object)[labels]
    prod = exact.to_fmpq(a) * exact.to_fmpq(inv)
    eye = exact.to_fmpq(np.eye(size, dtype=np.int64))
    if prod != eye:
        raise ArithmeticError("spectral inverse does not invert the shifted fan matrix")
    return max(sum(abs(v) for v in row) for row in inv)


def inv_inf_norm_exact(n: int, eta=None, k: int = 3, dense: bool = False) -> NormReport:
    """Exact ``||(M + eta K)^{-1}||_inf`` for the complete k-partite graph.

    Each row of ``A'_h`` has ``nu_h`` ones and the relations partition every
    row, so the norm is ``sum_h |c_h| nu_h``.  With ``dense=True`` the matrix
    is assembled in exact rationals, checked against ``A`` and reduced row by
    row instead (guarded).
    """
    params = SchemeParams(k, n)
    eta = Fraction(default_shift(k, n) if eta is None else eta)
    coeffs = inverse_coeffs(n, k, eta)
    if dense:
        if params.num_edges > DENSE_NORM_GUARD:
            raise ResourceError(f"{params.num_edges} rows exceed the dense guard {DENSE_NORM_GUARD}")
        value = _dense_inverse_norm(params, eta, coeffs)
    else:
        value = sum(abs(c) * nu for c, nu in zip(coeffs, degrees(params)))
    scale = n ** (k - 2)
    lead = clique_leading_coeff(k)
    return NormReport(n=n, k=k, eta=eta, exact=value, inv_inf_norm=float(value),
                      scaled=float(value * scale), predicted_leading=lead, gap=value * scale - lead)


# -- leading-order analysis for triangles --------------------------------------


def _interpolate(xs, ys) -> list[Fraction]:
    """Ascending coefficients of the Lagrange interpolant through (xs, ys)."""
    coeffs = [Fraction(0)] * len(xs)
    for i, (xi, yi) in enumerate(zip(xs, ys)):
        basis = [Fraction(1)]
        denom = Fraction(1)
        for j, xj in enumerate(xs):
            if j == i:
                continue
            basis = [Fraction(0)] + basis
            for d in range(len(basis) - 1):
                basis[d] -= xj * basis[d + 1]
            denom *= xi - xj
        for d, b in enumerate(basis):
            coeffs[d] += yi * b / denom
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    return coeffs


def _poly_eval(coeffs, x) -> Fraction:
    return sum(c * Fraction(x) ** d for d, c in enumerate(coeffs))


def _fit_polynomial(fn, degree: int, checks: int = 4) -> list[Fraction]:
    xs = list(range(2, 3 + degree))
    poly = _interpolate(xs, [fn(x) for x in xs])
    for x in range(3 + degree, 3 + degree + checks):
        if _poly_eval(poly, x) != fn(x):
            raise ArithmeticError("sampled values are not polynomial of the assumed degree")
    return poly


def inv_leading_coeffs_k3(n: int) -> list[Fraction]:
    """Exact coefficients of ``(M + 2n K)^{-1}`` on ``A'_0 .. A'_4`` (k = 3)."""
    if n < 2:
        raise DomainError(f"n must be >= 2, got {n}")
    return inverse_coeffs(n, 3)


def inverse_coeff_numerators_k3() -> list[list[Fraction]]:
    """Polynomials ``P_h`` with ``c_h(n) = P_h(n) / (18 n^3)``, ascending in n."""
    return [_fit_polynomial(lambda n, h=h: inv_leading_coeffs_k3(n)[h] * 18 * n**3, 2) for h in range(5)]


def leading_terms_k3() -> list[tuple[Fraction, int]]:
    """``(coefficient, exponent)`` of the dominant term of each ``c_h(n)``."""
    out = []
    for poly in inverse_coeff_numerators_k3():
        d = max(i for i, c in enumerate(poly) if c != 0)
        out.append((poly[d] / 18, d - 3))
    return out


def norm_contributions_k3() -> list[Fraction]:
    """Limits of ``n |c_h(n)| nu_h(n)`` as n grows; they sum to the leading constant."""
    out = []
    for h, poly in enumerate(inverse_coeff_numerators_k3()):
        nu = _fit_polynomial(lambda n, h=h: Fraction(degrees(SchemeParams(3, n))[h]), 2)
        prod = [Fraction(0)] * (len(poly) + len(nu) - 1)
        for i, a in enumerate(poly):
            for j, b in enumerate(nu):
                prod[i + j] += a * b
        # n * P(n) nu(n) / (18 n^3) has a finite limit only if deg(P nu) <= 2
        if any(c != 0 for c in prod[3:]):
            raise ArithmeticError(f"relation {h} contribution grows with n")
        out.append(abs(prod[2]) / 18 if len(prod) > 2 else Fraction(0))
    return out


# -- perturbation by missing cliques -------------------------------------------


class PerturbationNorm(NamedTuple):
    delta_inf: int
    bound: Fraction  # 6cn for triangles, B(k) c n^(k-2) otherwise


def _missing_clique_row_sums_k3(G: PartiteGraph) -> np.ndarray:
    """Row sums of ``M[G] - M_G`` for triangles, one per present edge.

    For an edge ab and third vertex w the triangle abw is missing unless both
    aw and bw are present; a missing one contributes ``1 + [aw] + [bw]``.
    Summed over w this is ``n + d(a) + d(b) - 3 (common neighbours)``.
    """
    n = G.n
    rows = []
    for p, q in [(0, 1), (0, 2), (1, 2)]:
        r = 3 - p - q
        bp, bq = G.block(p, r).astype(np.int64), G.block(q, r).astype(np.int64)
        common = bp @ bq.T
        total = n + bp.sum(axis=1)[:, None] + bq.sum(axis=1)[None, :] - 3 * common
        rows.append(total[G.block(p, q)])
    return np.concatenate(rows)


def _missing_clique_row_sums(G: PartiteGraph) -> np.ndarray:
    size = G.n**G.k
    if size > CLIQUE_GUARD:
        raise ResourceError(f"n^k = {size} cliques exceed the guard {CLIQUE_GUARD}")
    full = complete_multipartite(G.k, G.n)
    ce = enumerate_cliques(full, G.k)
    idx = ce - (np.arange(G.k) * G.n)[None, :]
    cols = []
    for (p, q), i in full.pair_index.items():
        cols.append(i * G.n * G.n + idx[:, p] * G.n + idx[:, q])
    glob = np.stack(cols, axis=1)
    present = G.present.ravel()[glob]
    count = present.sum(axis=1)
    missing = count < glob.shape[1]
    sums = np.zeros(G.present.size, dtype=np.int64)
    np.add.at(sums, glob[missing][present[missing]], np.repeat(count[missing], present[missing].sum(axis=1)))
    return sums[G.full_index]


def perturbation_coeff(k: int) -> int:
    """``B(k)`` in ``||M[G] - M_G||_inf <= B(k) c n^(k-2)``."""
    if k < 3:
        raise DomainError(f"k must be >= 3, got {k}")
    return {3: 6, 4: 24}.get(k, math.comb(k, 2) ** 2)


def perturbation_norm(G: PartiteGraph) -> PerturbationNorm:
    """Exact ``||M[G] - M_G||_inf`` and the degree-deficiency bound."""
    if G.k < 3:
        raise DomainError("need at least three classes")
    c = min_degree_deficiency(G)
    bound = perturbation_coeff(G.k) * c * G.n ** (G.k - 2)
    if G.num_edges == 0:
        return PerturbationNorm(0, bound)
    sums = _missing_clique_row_sums_k3(G) if G.k == 3 else _missing_clique_row_sums(G)
    return PerturbationNorm(int(sums.max()), bound)


# -- thresholds for triangles ----------------------------------------------------


@dataclass(frozen=True)
class ThresholdSet:
    c_basic: Fraction
    c_refined: float
    c_refined_form: str
    tau_basic: Fraction
    tau_refined: float
    tau_label: Fraction
    k: int = 3
    t: int = 2

    def to_dict(self) -> dict:
        return jsonable(self)


def refined_lhs(c):
    """``28c/3 + u^2 / (1 - u)`` with ``u = 40c/3`` (exact for rational c)."""
    c = _as_exact(c)
    u = 40 * c / 3
    if u >= 1:
        return math.inf
    return 28 * c / 3 + u * u / (1 - u)


def refined_feasible(c) -> bool:
    return bool(0 <= c and refined_lhs(c) < 1)


def thresholds_k3() -> ThresholdSet:
    # the refined inequality reduces to 3u^2 + 17u - 10 < 0 with u = 40c/3
    c_ref = (math.sqrt(409) - 17) / 80
    return ThresholdSet(c_basic=C_BASIC, c_refined=c_ref, c_refined_form="(sqrt(409)-17)/80",
                        tau_basic=1 - C_BASIC, tau_refined=1 - c_ref, tau_label=TAU_LABEL)


class ProductNormBound(NamedTuple):
    total: Fraction | float
    breakdown: tuple


def prodnorm_bound(c) -> ProductNormBound:
    """Leading term of ``||A^{-1} dA||_inf`` with its per-relation split."""
    c = _as_exact(c)
    if not 0 <= c < 1:
        raise DomainError(f"need 0 <= c < 1, got {c}")
    weights = (Fraction(2), Fraction(2), Fraction(10, 9), Fraction(4), Fraction(38, 9))
    parts = tuple(w * c for w in weights)
    return ProductNormBound(40 * c / 3, parts)


# -- cliques and hypergraphs -------------------------------------------------------


def clique_leading_coeff(k: int) -> Fraction:
    """Leading constant of ``n^(k-2) ||A^{-1}||_inf``."""
    if k < 3:
        raise DomainError(f"k must be >= 3, got {k}")
    return 4 - Fraction(k**3 + k - 4, 2 * math.comb(k, 2) ** 2)


def tau_clique(k: int) -> Fraction:
    """Threshold ``1 - 1/(2 B(k) L(k))`` from the generic norm argument.

    For large k both factors grow like k^4 / 4 and 4, so this is
    ``1 - Theta(k^-4)``.  At k = 3 this is weaker than the refined triangle
    value from :func:`thresholds_k3`.
    """
    return 1 - 1 / (2 * perturbation_coeff(k) * clique_leading_coeff(k))


class TauComparison(NamedTuple):
    k: int
    tau: Fraction
    reference: Fraction  # 1 - 1/(2 k^4)
    below_reference: bool


def tau_comparison(k: int) -> TauComparison:
    tau = tau_clique(k)
    ref = 1 - Fraction(1, 2 * k**4)
    return TauComparison(k, tau, ref, tau <= ref)


def pre_drop_sum(k: int, t: int, exponent: int = -2) -> Fraction:
    """``C(k,t) sum_j C(k,j) C(k-j,k-t)^exponent`` over j = 0..t."""
    _check_kt(k, t)
    return math.comb(k, t) * sum(Fraction(math.comb(k, j)) * Fraction(math.comb(k - j, k - t)) ** exponent
                                 for j in range(t + 1))


@dataclass(frozen=True)
class HypergraphBound:
    k: int
    t: int
    leading: int  # 2^t C(k,t)^2, the coefficient of n^(t-k)
    pre_drop: Fraction
    threshold: Fraction  # c of order 1/(2 * leading * C(k,t)^2)

    def to_dict(self) -> dict:
        return jsonable(self)


def _check_kt(k: int, t: int) -> None:
    if not 2 <= t <= k:
        raise DomainError(f"need 2 <= t <= k, got k={k}, t={t}")


def hypergraph_bound(k: int, t: int) -> HypergraphBound:
    """Large-shift inverse-norm coefficient for K_k^(t) decompositions.

    The constant ``2^t`` in front of ``C(k,t)^2`` is the implemented choice of
    the t-dependent factor.
    """
    _check_kt(k, t)
    lead = 2**t * math.comb(k, t) ** 2
    return HypergraphBound(k, t, lead, pre_drop_sum(k, t), Fraction(1, 2 * lead * math.comb(k, t) ** 2))


def hyper_inverse_norm_bound(k: int, t: int, n: int, eta=None) -> Fraction:
    """Triangle-inequality bound on ``||(M + eta K)^{-1}||_inf`` for level t.

    ``eta=None`` gives the large-shift limit.
    """
    params = SchemeParams(k, n, t)
    thetas = [theta for theta, _ in eigenvalues_M(params)[: t + 1]]
    inv_eta = Fraction(0) if eta is None else 1 / Fraction(eta)
    total = Fraction(0)
    for i in range(k + 1):
        inner = sum(Fraction(1, theta) * (Fraction(1, theta) - inv_eta) * krawtchouk(k, n, j, i)
                    for j, theta in enumerate(thetas))
        total += binom(k, i) * (n - 1) ** i * abs(inner)
    return inv_eta + Fraction(math.comb(k, t), n**t) * total
