"""Thin exact linear algebra layer over python-flint.

Everything here takes plain Python containers (nested lists or numpy arrays of
``int``/``Fraction``) and returns ``Fraction``s, so callers never touch flint
types directly.
"""

from __future__ import annotations

from fractions import Fraction

import flint
import numpy as np


def _q(x) -> flint.fmpq:
    if isinstance(x, Fraction):
        return flint.fmpq(x.numerator, x.denominator)
    if isinstance(x, flint.fmpq):
        return x
    return flint.fmpq(int(x))


def to_fmpq(rows) -> flint.fmpq_mat:
    rows = [list(r) for r in rows]
    nr = len(rows)
    nc = len(rows[0]) if nr else 0
    return flint.fmpq_mat(nr, nc, [_q(v) for r in rows for v in r])


def to_fmpz(rows) -> flint.fmpz_mat:
    arr = np.asarray(rows)
    nr, nc = arr.shape
    return flint.fmpz_mat(nr, nc, [int(v) for v in arr.ravel()])


def to_fraction(q) -> Fraction:
    return Fraction(int(q.p), int(q.q))


def to_rows(m) -> list[list[Fraction]]:
    """Convert an fmpq_mat/fmpz_mat back to nested lists of Fractions."""
    out = []
    for i in range(m.nrows()):
        row = []
        for j in range(m.ncols()):
            v = m[i, j]
            row.append(to_fraction(v) if isinstance(v, flint.fmpq) else Fraction(int(v)))
        out.append(row)
    return out


def rank(rows) -> int:
    arr = np.asarray(rows, dtype=object)
    if all(isinstance(v, (int, np.integer)) for v in arr.ravel()):
        return to_fmpz(arr).rank()
    return to_fmpq(arr).rank()


def solve(a_rows, b) -> list[Fraction]:
    """Solve the nonsingular system ``A x = b`` exactly."""
    a = to_fmpq(a_rows)
    rhs = flint.fmpq_mat(len(b), 1, [_q(v) for v in b])
    x = a.solve(rhs)
    return [to_fraction(x[i, 0]) for i in range(x.nrows())]


def _kernel_basis(a: flint.fmpq_mat):
    """Columns spanning ``ker a`` (from the reduced row echelon form), or None."""
    r, rk = a.rref()
    nc = a.ncols()
    pivots = [next(j for j in range(nc) if r[row, j] != 0) for row in range(rk)]
    free = [j for j in range(nc) if j not in set(pivots)]
    if not free:
        return None
    basis = flint.fmpq_mat(nc, len(free))
    for col, f in enumerate(free):
        basis[f, col] = 1
        for row, p in enumerate(pivots):
            basis[p, col] = -r[row, f]
    return basis


def min_norm_solve(a_rows, b) -> list[Fraction]:
    """Minimum-norm solution of a consistent, possibly singular system.

    A particular solution is read off the reduced row echelon form of
    ``[A | b]``; its component in ``ker A`` is then projected away.
    """
    a = to_fmpq(a_rows)
    nr, nc = a.nrows(), a.ncols()
    try:
        if nr == nc:
            return solve(a_rows, b)
    except ZeroDivisionError:
        pass
    aug = flint.fmpq_mat(nr, nc + 1, [a[i, j] if j < nc else _q(b[i]) for i in range(nr) for j in range(nc + 1)])
    r, rk = aug.rref()
    x = [flint.fmpq(0)] * nc
    for row in range(rk):
        lead = next(j for j in range(nc + 1) if r[row, j] != 0)
        if lead == nc:
            raise ArithmeticError("system is inconsistent")
        x[lead] = r[row, nc]
    xs = flint.fmpq_mat(nc, 1, x)
    basis = _kernel_basis(a)
    if basis is not None:
        xs = xs - basis * (basis.transpose() * basis).inv() * (basis.transpose() * xs)
    return [to_fraction(xs[i, 0]) for i in range(nc)]


def inverse(a_rows) -> list[list[Fraction]]:
    return to_rows(to_fmpq(a_rows).inv())


def matmul(a_rows, b_rows) -> list[list[Fraction]]:
    return to_rows(to_fmpq(a_rows) * to_fmpq(b_rows))


def eigen_multiplicity(int_rows, theta: int) -> int:
    """Geometric multiplicity of ``theta`` for an integer symmetric matrix."""
    arr = np.asarray(int_rows, dtype=object).copy()
    for i in range(arr.shape[0]):
        arr[i, i] -= theta
    return arr.shape[0] - to_fmpz(arr).rank()


def column_space_projector(cols) -> list[list[Fraction]]:
    """Orthogonal projector onto the span of the columns of ``cols``.

    Dependent columns are allowed: the pivot columns of the reduced row
    echelon form give an independent subset with the same span.
    """
    v = to_fmpq(cols)
    r, rk = v.rref()
    pivots = []
    row = 0
    for j in range(r.ncols()):
        if row < rk and r[row, j] != 0:
            pivots.append(j)
            row += 1
    nr = v.nrows()
    basis = flint.fmpq_mat(nr, len(pivots), [v[i, j] for i in range(nr) for j in pivots])
    gram = basis.transpose() * basis
    proj = basis * gram.inv() * basis.transpose()
    return to_rows(proj)


def nullspace_projector(int_rows) -> list[list[Fraction]]:
    """Projector onto ``ker(A)`` for an integer matrix ``A``."""
    a = to_fmpz(int_rows)
    x, nullity = a.nullspace()
    nc = a.ncols()
    if nullity == 0:
        return [[Fraction(0)] * nc for _ in range(nc)]
    cols = [[int(x[i, j]) for j in range(nullity)] for i in range(nc)]
    return column_space_projector(cols)
