"""Exact rational and integer linear algebra on plain Python lists.

Matrices are lists of rows.  Entries are ``int`` or ``Fraction``; nothing here
ever produces a float.  Dimensions in this package stay below ~30, so dense
elimination is fine.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

Matrix = list[list]

_PRIME = (1 << 61) - 1


def lcm(*values: int) -> int:
    out = 1
    for v in values:
        out = out * abs(v) // gcd(out, abs(v)) if v else out
    return out


def transpose(a: Sequence[Sequence]) -> Matrix:
    return [list(col) for col in zip(*a)] if a else []


def rref(a: Sequence[Sequence]) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form over Q; returns (nonzero rows, pivot columns)."""
    rows = [[Fraction(x) for x in row] for row in a]
    if not rows:
        return [], []
    ncols = len(rows[0])
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(rows)) if rows[i][c] != 0), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c] != 0:
                f = rows[i][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def _rank_mod_p(a: Sequence[Sequence[int]]) -> int:
    rows = [[x % _PRIME for x in row] for row in a]
    if not rows:
        return 0
    ncols = len(rows[0])
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if p is None:
            continue
        rows[r], rows[p] = rows[p], rows[r]
        inv = pow(rows[r][c], _PRIME - 2, _PRIME)
        for i in range(r + 1, len(rows)):
            if rows[i][c]:
                f = rows[i][c] * inv % _PRIME
                rows[i] = [(x - f * y) % _PRIME for x, y in zip(rows[i], rows[r])]
        r += 1
        if r == len(rows):
            break
    return r


def rank(a: Sequence[Sequence]) -> int:
    """Exact rank over Q.

    Integer matrices first try rank mod a large prime: rank over Q is at least
    the modular rank, so a full modular rank is already exact.
    """
    if not a or not a[0]:
        return 0
    if all(isinstance(x, int) for row in a for x in row):
        rp = _rank_mod_p(a)
        if rp == min(len(a), len(a[0])):
            return rp
    return len(rref(a)[1])


def solve(a: Sequence[Sequence], b: Sequence) -> list[Fraction] | None:
    """One solution of ``a x = b`` over Q (free variables set to 0), or None."""
    if not a:
        return [] if all(x == 0 for x in b) else None
    ncols = len(a[0])
    aug = [list(row) + [bi] for row, bi in zip(a, b)]
    rows, pivots = rref(aug)
    if pivots and pivots[-1] == ncols:
        return None
    x = [Fraction(0)] * ncols
    for row, c in zip(rows, pivots):
        x[c] = row[-1]
    return x


def nullspace(a: Sequence[Sequence], ncols: int | None = None) -> list[list[Fraction]]:
    """Basis of the right kernel over Q."""
    if not a:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    ncols = len(a[0])
    rows, pivots = rref(a)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, c in zip(rows, pivots):
            v[c] = -row[f]
        basis.append(v)
    return basis


def primitive_integer(v: Sequence) -> list[int]:
    """Scale a nonzero rational vector to the primitive integer vector in its ray."""
    fr = [Fraction(x) for x in v]
    den = lcm(*(x.denominator for x in fr))
    ints = [int(x * den) for x in fr]
    g = 0
    for x in ints:
        g = gcd(g, x)
    if g == 0:
        raise ValueError("zero vector has no primitive representative")
    return [x // g for x in ints]


def det(a: Sequence[Sequence]) -> Fraction:
    n = len(a)
    if n == 0:
        return Fraction(1)
    rows = [[Fraction(x) for x in row] for row in a]
    out = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if rows[i][c] != 0), None)
        if p is None:
            return Fraction(0)
        if p != c:
            rows[c], rows[p] = rows[p], rows[c]
            out = -out
        out *= rows[c][c]
        for i in range(c + 1, n):
            if rows[i][c] != 0:
                f = rows[i][c] / rows[c][c]
                rows[i] = [x - f * y for x, y in zip(rows[i], rows[c])]
    return out


# -- integer normal forms ---------------------------------------------------


def integer_row_echelon(a: Sequence[Sequence[int]]) -> tuple[Matrix, Matrix, int]:
    """Unimodular row reduction: returns ``(H, U, r)`` with ``U a = H``.

    ``H`` is in row echelon form with positive pivots and ``r`` nonzero rows;
    rows ``r..`` of ``U`` span the left integer kernel of ``a``.
    """
    m = len(a)
    h = [list(map(int, row)) for row in a]
    ncols = len(h[0]) if h else 0
    u = [[int(i == j) for j in range(m)] for i in range(m)]
    r = 0
    for c in range(ncols):
        if r == m:
            break
        while True:
            nz = [i for i in range(r, m) if h[i][c] != 0]
            if not nz:
                break
            p = min(nz, key=lambda i: abs(h[i][c]))
            h[r], h[p] = h[p], h[r]
            u[r], u[p] = u[p], u[r]
            clean = True
            for i in range(r + 1, m):
                if h[i][c]:
                    q = h[i][c] // h[r][c]
                    h[i] = [x - q * y for x, y in zip(h[i], h[r])]
                    u[i] = [x - q * y for x, y in zip(u[i], u[r])]
                    if h[i][c]:
                        clean = False
            if clean:
                break
        if h[r][c] != 0:
            if h[r][c] < 0:
                h[r] = [-x for x in h[r]]
                u[r] = [-x for x in u[r]]
            r += 1
    return h, u, r


def gcd_maximal_minors(columns: Sequence[Sequence[int]]) -> int:
    """gcd of the maximal minors of the matrix whose columns are ``columns``.

    For linearly independent integer vectors this is the index of the lattice
    they span inside its saturation.  Returns 0 if they are dependent.
    """
    if not columns:
        return 1
    rows = transpose(columns)
    h, _, r = integer_row_echelon(rows)
    if r < len(columns):
        return 0
    out = 1
    for i in range(r):
        pivot = next(x for x in h[i] if x != 0)
        out *= pivot
    return abs(out)


def integer_kernel(a: Sequence[Sequence[int]], ncols: int) -> list[list[int]]:
    """Z-basis of ``{z in Z^ncols : a z = 0}`` (a saturated lattice)."""
    if not a:
        return [[int(i == j) for j in range(ncols)] for i in range(ncols)]
    _, u, r = integer_row_echelon(transpose(a))
    return [row for row in u[r:]]


# -- exact simplex ------------------------------------------------------------


def linprog(c: Sequence, a_eq: Sequence[Sequence], b_eq: Sequence):
    """Maximize ``c.x`` subject to ``a_eq x = b_eq``, ``x >= 0``, exactly.

    Two-phase tableau simplex with Bland's rule.  Returns ``(status, x, value)``
    where status is ``"optimal"``, ``"infeasible"`` or ``"unbounded"``.
    """
    n = len(c)
    m = len(a_eq)
    if m == 0:
        if any(Fraction(ci) > 0 for ci in c):
            return "unbounded", None, None
        return "optimal", [Fraction(0)] * n, Fraction(0)
    rows = []
    for row, bi in zip(a_eq, b_eq):
        row = [Fraction(x) for x in row]
        bi = Fraction(bi)
        if bi < 0:
            row = [-x for x in row]
            bi = -bi
        rows.append(row + [Fraction(int(i == len(rows))) for i in range(m)] + [bi])
    basis = [n + i for i in range(m)]
    width = n + m

    phase1 = [Fraction(0)] * n + [Fraction(-1)] * m
    status = _simplex(rows, basis, phase1, width)
    value = sum(phase1[b] * row[-1] for b, row in zip(basis, rows))
    if value < 0:
        return "infeasible", None, None
    # drive artificial variables out of the basis, dropping redundant rows
    i = 0
    while i < len(rows):
        if basis[i] >= n:
            col = next((j for j in range(n) if rows[i][j] != 0), None)
            if col is None:
                del rows[i]
                del basis[i]
                continue
            _pivot(rows, basis, i, col)
        i += 1
    rows = [row[:n] + [row[-1]] for row in rows]
    obj = [Fraction(x) for x in c]
    status = _simplex(rows, basis, obj, n)
    if status == "unbounded":
        return "unbounded", None, None
    x = [Fraction(0)] * n
    for b, row in zip(basis, rows):
        x[b] = row[-1]
    return "optimal", x, sum(ci * xi for ci, xi in zip(obj, x))


def _pivot(rows: Matrix, basis: list[int], r: int, col: int) -> None:
    piv = rows[r][col]
    rows[r] = [x / piv for x in rows[r]]
    for i in range(len(rows)):
        if i != r and rows[i][col] != 0:
            f = rows[i][col]
            rows[i] = [x - f * y for x, y in zip(rows[i], rows[r])]
    basis[r] = col


def _simplex(rows: Matrix, basis: list[int], obj: Sequence[Fraction], width: int) -> str:
    while True:
        entering = None
        for j in range(width):
            if j in basis:
                continue
            reduced = obj[j] - sum(obj[b] * row[j] for b, row in zip(basis, rows))
            if reduced > 0:
                entering = j
                break
        if entering is None:
            return "optimal"
        best = None
        for i, row in enumerate(rows):
            if row[entering] > 0:
                ratio = row[-1] / row[entering]
                if best is None or ratio < best[0] or (ratio == best[0] and basis[i] < basis[best[1]]):
                    best = (ratio, i)
        if best is None:
            return "unbounded"
        _pivot(rows, basis, best[1], entering)


def feasible(a_eq: Sequence[Sequence], b_eq: Sequence, nvars: int) -> list[Fraction] | None:
    """A point of ``{x >= 0 : a_eq x = b_eq}`` or None."""
    status, x, _ = linprog([0] * nvars, a_eq, b_eq)
    return x if status == "optimal" else None
