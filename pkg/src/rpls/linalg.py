"""Dense linear algebra over a :class:`~rpls.scalar.Field`.

Matrices are lists of rows.  Exact fields use fraction-free (Bareiss)
elimination; the float field goes through numpy.
"""
from __future__ import annotations

import warnings

import numpy as np

from .scalar import Field

__all__ = ["SingularSystemError", "RankWarning", "solve", "bareiss_echelon", "nullspace", "float_nullspace"]


class SingularSystemError(ArithmeticError):
    pass


class RankWarning(UserWarning):
    """The numerical rank decision is close to the threshold."""


def solve(field: Field, A, B):
    """Solve ``A X = B`` for square ``A``; ``B`` is a list of rows (one per equation).

    Zero entries are skipped during elimination, which keeps the orbit-graph
    systems (mostly zeros) cheap in exact arithmetic.
    """
    n = len(A)
    if not field.exact:
        a = np.array([[float(v) for v in row] for row in A])
        b = np.array([[float(v) for v in row] for row in B])
        try:
            return np.linalg.solve(a, b).tolist()
        except np.linalg.LinAlgError as exc:
            raise SingularSystemError(str(exc)) from exc
    rows = [dict((j, v) for j, v in enumerate(row) if v != 0) for row in A]
    rhs = [list(r) for r in B]
    for col in range(n):
        piv = next((r for r in range(col, n) if col in rows[r]), None)
        if piv is None:
            raise SingularSystemError("matrix is singular")
        rows[col], rows[piv] = rows[piv], rows[col]
        rhs[col], rhs[piv] = rhs[piv], rhs[col]
        prow, pval = rows[col], rows[col][col]
        inv = 1 / pval
        for r in range(n):
            if r == col or col not in rows[r]:
                continue
            factor = rows[r][col] * inv
            row = rows[r]
            for j, v in prow.items():
                nv = row.get(j, 0) - factor * v
                if nv == 0:
                    row.pop(j, None)
                else:
                    row[j] = nv
            rhs[r] = [x - factor * y for x, y in zip(rhs[r], rhs[col])]
    return [[x / rows[i][i] for x in rhs[i]] for i in range(n)]


def bareiss_echelon(field: Field, M):
    """Fraction-free row echelon form of ``M``.

    Returns ``(E, pivots)`` where ``pivots`` lists the pivot column of each
    nonzero row of ``E``.
    """
    E = [list(r) for r in M]
    nr = len(E)
    nc = len(E[0]) if nr else 0
    pivots = []
    prev = field.one()
    r = 0
    for c in range(nc):
        piv = next((i for i in range(r, nr) if not field.is_zero(E[i][c])), None)
        if piv is None:
            continue
        E[r], E[piv] = E[piv], E[r]
        p = E[r][c]
        for i in range(r + 1, nr):
            lead = E[i][c]
            E[i] = [(p * E[i][j] - lead * E[r][j]) / prev for j in range(nc)]
            E[i][c] = field.zero()
        prev = p
        pivots.append(c)
        r += 1
        if r == nr:
            break
    return E, pivots


def nullspace(field: Field, M):
    """Exact basis of ``{g : M g = 0}``, each vector scaled so its first nonzero entry is 1."""
    nc = len(M[0])
    E, pivots = bareiss_echelon(field, M)
    free = [c for c in range(nc) if c not in pivots]
    basis = []
    for fc in free:
        g = [field.zero()] * nc
        g[fc] = field.one()
        for r in reversed(range(len(pivots))):
            pc = pivots[r]
            acc = sum((E[r][j] * g[j] for j in range(pc + 1, nc)), field.zero())
            g[pc] = -acc / E[r][pc]
        lead = next(v for v in g if not field.is_zero(v))
        basis.append(tuple(v / lead for v in g))
    return basis


def float_nullspace(M, rel_tol: float = 1e-9, abs_floor: float = 0.0):
    """Numerical null space via SVD.

    Singular values below ``max(rel_tol * s_max, abs_floor)`` count as zero.
    Returns ``(basis, singular_values, threshold)``; warns with :class:`RankWarning`
    when a singular value sits within a factor 10 of the threshold.
    """
    a = np.array([[float(v) for v in row] for row in M])
    _, s, vt = np.linalg.svd(a)
    smax = s[0] if s.size else 0.0
    thr = max(rel_tol * smax, abs_floor)
    rank = int(np.sum(s > thr))
    near = [v for v in s if thr / 10 < v <= 10 * thr]
    if near:
        alt = rank + 1 if any(v <= thr for v in near) else rank - 1
        warnings.warn(
            f"ill-conditioned rank decision: singular values {near} near threshold {thr:.3g}; "
            f"candidate ranks {rank} and {alt}",
            RankWarning,
            stacklevel=2,
        )
    kern = vt[rank:]
    if kern.shape[0] == 0:
        return [], s.tolist(), thr
    # reduced row echelon form of the kernel rows for a deterministic basis
    basis = _rref(kern)
    return [tuple(float(x) for x in row) for row in basis], s.tolist(), thr


def _rref(a, tol: float = 1e-12):
    a = a.copy()
    nr, nc = a.shape
    r = 0
    for c in range(nc):
        if r == nr:
            break
        piv = r + int(np.argmax(np.abs(a[r:, c])))
        if abs(a[piv, c]) <= tol:
            continue
        a[[r, piv]] = a[[piv, r]]
        a[r] /= a[r, c]
        for i in range(nr):
            if i != r:
                a[i] -= a[i, c] * a[r]
        r += 1
    return a[:r]
