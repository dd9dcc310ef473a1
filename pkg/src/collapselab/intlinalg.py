"""Exact integer linear algebra: Smith normal form, rational rank, and
lattice solves.  Everything works over Python ints (no overflow) on the small
dense matrices this package produces; rows are the primary axis throughout.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Sequence


def _identity(n: int):
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def smith_normal_form(rows: Sequence):
    """Return (U, S, V) with S = U * A * V in Smith normal form.

    U and V are unimodular; S is diagonal with nonnegative entries and
    d_1 | d_2 | ... .  A may be any rectangular integer matrix.
    """
    S = [list(map(int, r)) for r in rows]
    m = len(S)
    n = len(S[0]) if m else 0
    U = _identity(m)
    V = _identity(n)

    def swap_rows(i, j):
        S[i], S[j] = S[j], S[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in S:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def add_row(src, dst, c):  # row dst += c * row src
        S[dst] = [a + c * b for a, b in zip(S[dst], S[src])]
        U[dst] = [a + c * b for a, b in zip(U[dst], U[src])]

    def add_col(src, dst, c):
        for r in S:
            r[dst] += c * r[src]
        for r in V:
            r[dst] += c * r[src]

    t = 0
    while t < min(m, n):
        # pick the nonzero entry of smallest magnitude as pivot
        best = None
        for i in range(t, m):
            for j in range(t, n):
                if S[i][j] != 0 and (best is None or abs(S[i][j]) < abs(S[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        swap_rows(t, best[0])
        swap_cols(t, best[1])
        while True:
            progressed = False
            for i in range(t + 1, m):
                if S[i][t] != 0:
                    q = S[i][t] // S[t][t]
                    add_row(t, i, -q)
                    if S[i][t] != 0:  # remainder smaller than pivot: swap up
                        swap_rows(t, i)
                        progressed = True
            for j in range(t + 1, n):
                if S[t][j] != 0:
                    q = S[t][j] // S[t][t]
                    add_col(t, j, -q)
                    if S[t][j] != 0:
                        swap_cols(t, j)
                        progressed = True
            if progressed:
                continue
            if all(S[i][t] == 0 for i in range(t + 1, m)) and all(
                S[t][j] == 0 for j in range(t + 1, n)
            ):
                break
        # divisibility fix-up: pivot must divide the remaining block
        fixed = True
        for i in range(t + 1, m):
            for j in range(t + 1, n):
                if S[i][j] % S[t][t] != 0:
                    add_row(i, t, 1)
                    fixed = False
                    break
            if not fixed:
                break
        if fixed:
            if S[t][t] < 0:
                S[t] = [-x for x in S[t]]
                U[t] = [-x for x in U[t]]
            t += 1
    return (
        tuple(tuple(r) for r in U),
        tuple(tuple(r) for r in S),
        tuple(tuple(r) for r in V),
    )


def diagonal_of(S) -> tuple:
    return tuple(S[i][i] for i in range(min(len(S), len(S[0]) if S else 0)))


def invariant_factors(rows) -> tuple:
    """Nonzero diagonal entries of the Smith form."""
    _, S, _ = smith_normal_form(rows)
    return tuple(d for d in diagonal_of(S) if d != 0)


def rational_rank(rows) -> int:
    """Rank over the rationals by fraction-free Gaussian elimination."""
    M = [[Fraction(x) for x in r] for r in rows]
    rank = 0
    cols = len(M[0]) if M else 0
    for c in range(cols):
        piv = next((i for i in range(rank, len(M)) if M[i][c] != 0), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = 1 / M[rank][c]
        M[rank] = [x * inv for x in M[rank]]
        for i in range(len(M)):
            if i != rank and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[rank])]
        rank += 1
        if rank == len(M):
            break
    return rank


def solve_left_integer(rows, target) -> Optional[tuple]:
    """Solve x * A = b for an integer row vector x, or return None.

    A is given by ``rows`` (k x n), b by ``target`` (length n).
    """
    if not rows:
        return () if all(v == 0 for v in target) else None
    U, S, V = smith_normal_form(rows)
    n = len(rows[0])
    bv = [sum(int(target[i]) * V[i][j] for i in range(n)) for j in range(n)]
    k = len(rows)
    y = [0] * k
    for j in range(n):
        d = S[j][j] if j < k else 0
        if d == 0:
            if bv[j] != 0:
                return None
        else:
            if bv[j] % d != 0:
                return None
            y[j] = bv[j] // d
    x = [sum(y[i] * U[i][j] for i in range(k)) for j in range(k)]
    return tuple(x)


def in_lattice(vector, rows) -> bool:
    return solve_left_integer(rows, vector) is not None


def lattice_basis(rows):
    """A basis of the integer row span, as (basis_rows, to_coords) where
    to_coords maps a member vector to its integer coordinates (or None)."""
    U, S, V = smith_normal_form(rows)
    n = len(rows[0]) if rows else 0
    # V^-1 rows scaled by the diagonal span the lattice: basis_i = d_i * (V^-1)_i
    Vinv = _invert_unimodular(V)
    diag = diagonal_of(S)
    basis = []
    for i, d in enumerate(diag):
        if d != 0:
            basis.append(tuple(d * x for x in Vinv[i]))

    def to_coords(vec):
        bv = [sum(int(vec[i]) * V[i][j] for i in range(n)) for j in range(n)]
        coords = []
        for j in range(n):
            d = diag[j] if j < len(diag) else 0
            if d == 0:
                if bv[j] != 0:
                    return None
            else:
                if bv[j] % d != 0:
                    return None
                coords.append(bv[j] // d)
        return tuple(coords)

    return tuple(basis), to_coords


def _invert_unimodular(M):
    """Exact inverse of a unimodular integer matrix (det = +-1)."""
    n = len(M)
    A = [[Fraction(x) for x in r] + [Fraction(int(i == j)) for j in range(n)] for i, r in enumerate(M)]
    for c in range(n):
        piv = next(i for i in range(c, n) if A[i][c] != 0)
        A[c], A[piv] = A[piv], A[c]
        inv = 1 / A[c][c]
        A[c] = [x * inv for x in A[c]]
        for i in range(n):
            if i != c and A[i][c] != 0:
                f = A[i][c]
                A[i] = [a - f * b for a, b in zip(A[i], A[c])]
    out = []
    for r in A:
        vals = r[n:]
        assert all(v.denominator == 1 for v in vals)
        out.append(tuple(int(v) for v in vals))
    return tuple(out)


def quotient_invariants(ambient_rows, sub_rows):
    """Invariants of span(ambient) / span(sub) as (free_rank, torsion_divisors).

    Requires span(sub) <= span(ambient); divisors are the invariant factors
    greater than 1 of the relation matrix in an ambient-lattice basis.
    """
    ambient = [r for r in ambient_rows]
    if not ambient or all(all(x == 0 for x in r) for r in ambient):
        return 0, ()
    basis, to_coords = lattice_basis(ambient)
    rel = []
    for r in sub_rows:
        c = to_coords(r)
        if c is None:
            raise ValueError("sub rows must lie in the ambient lattice")
        rel.append(c)
    rank_ambient = len(basis)
    if not rel:
        return rank_ambient, ()
    factors = invariant_factors(rel)
    free = rank_ambient - len(factors)
    torsion = tuple(d for d in factors if d != 1)
    return free, torsion
