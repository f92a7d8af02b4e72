"""Pair-indexed distance coordinates and their quotient by the lineality space.

A metric tree on leaves ``1..n`` maps to the vector of leaf-to-leaf distances,
indexed by pairs ``(i, j)``, ``i < j``, in lexicographic order.  Lengthening
the leaf edge of ``i`` adds ``L_i`` (the indicator of pairs containing ``i``),
so distances are meaningful only modulo ``span(L_1..L_n)``.

We fix an integer matrix ``P`` that kills the lineality space and maps ``Z^N``
onto ``Z^(N-n)``; two classes are equal iff their images under ``P`` agree.

The lattice used for primitivity and indices is the one generated by the
split vectors ``v_I``.  Every ``v_I`` has all ``P``-coordinates even and the
halves ``P v_I / 2`` span ``Z^(N-n)``, so this lattice is exactly the set of
classes with even ``P``-coordinates.  With it each ``v_I`` is primitive and
the cone of every trivalent tree is unimodular.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from math import gcd
from typing import Iterable, Sequence

from ..errors import InvalidInputError, ZeroClassError
from ..trees import Split
from . import exact


@lru_cache(maxsize=None)
def pairs(n: int) -> tuple[tuple[int, int], ...]:
    return tuple(combinations(range(1, n + 1), 2))


@lru_cache(maxsize=None)
def pair_index(n: int) -> dict[tuple[int, int], int]:
    return {p: k for k, p in enumerate(pairs(n))}


@dataclass(frozen=True)
class AmbientVector:
    n: int
    coords: tuple[int, ...]

    def __post_init__(self):
        coords = tuple(self.coords)
        object.__setattr__(self, "coords", coords)
        if len(coords) != self.n * (self.n - 1) // 2:
            raise InvalidInputError(
                f"expected {self.n * (self.n - 1) // 2} coordinates for n={self.n}, got {len(coords)}"
            )
        if not all(isinstance(x, int) for x in coords):
            raise InvalidInputError("ambient coordinates must be exact integers")

    @classmethod
    def zero(cls, n: int) -> "AmbientVector":
        return cls(n, (0,) * (n * (n - 1) // 2))

    def _check(self, other: "AmbientVector") -> None:
        if other.n != self.n:
            raise InvalidInputError(f"label counts differ: {self.n} vs {other.n}")

    def __add__(self, other: "AmbientVector") -> "AmbientVector":
        self._check(other)
        return AmbientVector(self.n, tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "AmbientVector") -> "AmbientVector":
        self._check(other)
        return AmbientVector(self.n, tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "AmbientVector":
        return AmbientVector(self.n, tuple(-a for a in self.coords))

    def __mul__(self, k: int) -> "AmbientVector":
        if not isinstance(k, int):
            raise InvalidInputError("ambient vectors scale by integers only")
        return AmbientVector(self.n, tuple(k * a for a in self.coords))

    __rmul__ = __mul__

    def __getitem__(self, pair: tuple[int, int]) -> int:
        i, j = sorted(pair)
        return self.coords[pair_index(self.n)[(i, j)]]

    def is_zero(self) -> bool:
        return not any(self.coords)


def split_ray(split: Split | Iterable[int], n: int) -> AmbientVector:
    """The vector ``v_I``: 1 on pairs separated by the split, 0 elsewhere."""
    if not isinstance(split, Split):
        labels = tuple(split)
        split = Split(labels, n)  # must already be canonical
    if split.n != n:
        raise InvalidInputError(f"split lives on {split.n} labels, not {n}")
    side = set(split.labels)
    return AmbientVector(n, tuple(int((i in side) != (j in side)) for i, j in pairs(n)))


def lineality_basis(n: int) -> list[AmbientVector]:
    """``L_1..L_n``; ``L_i`` is 1 on every pair containing ``i``."""
    if n < 4:
        raise InvalidInputError("the distance fan needs n >= 4")
    return [
        AmbientVector(n, tuple(int(i in p) for p in pairs(n))) for i in range(1, n + 1)
    ]


def in_lineality_span(v: AmbientVector) -> bool:
    """Decide ``v ∈ span_Q(L_1..L_n)`` by a direct rational solve."""
    cols = [b.coords for b in lineality_basis(v.n)]
    return exact.solve(exact.transpose(cols), list(v.coords)) is not None


@lru_cache(maxsize=None)
def _quotient_data(n: int):
    lin = exact.transpose([b.coords for b in lineality_basis(n)])  # N x n
    h, u, r = exact.integer_row_echelon(lin)
    proj = tuple(tuple(row) for row in u[r:])
    # section: columns r.. of U^{-1}, so proj @ section = identity
    inv = _unimodular_inverse(u)
    section = tuple(tuple(row[r:]) for row in inv)
    elementary = tuple(next(x for x in h[i] if x) for i in range(r))
    return proj, section, elementary


def _unimodular_inverse(u: Sequence[Sequence[int]]) -> list[list[int]]:
    m = len(u)
    aug = [list(row) + [int(i == j) for j in range(m)] for i, row in enumerate(u)]
    rows, _ = exact.rref(aug)
    out = [[int(x) for x in row[m:]] for row in rows]
    return out


def quotient_rank(n: int) -> int:
    return len(_quotient_data(n)[0])


def lineality_pivots(n: int) -> tuple[int, ...]:
    """Pivots of the integer echelon form of the lineality generators.

    Their product is the index of the integer span of ``L_1..L_n`` inside its
    saturation.
    """
    return _quotient_data(n)[2]


def quotient_coords(v: AmbientVector) -> tuple[int, ...]:
    proj = _quotient_data(v.n)[0]
    c = v.coords
    return tuple(sum(a * b for a, b in zip(row, c) if a) for row in proj)


def lift(n: int, q: Sequence[int]) -> AmbientVector:
    """An integer ambient representative of the quotient class with coordinates ``q``."""
    section = _quotient_data(n)[1]
    return AmbientVector(n, tuple(sum(a * b for a, b in zip(row, q)) for row in section))


def lattice_coords(v: AmbientVector) -> tuple[Fraction, ...]:
    """Coordinates in a basis of the split lattice; integral iff ``v`` lies in it."""
    return tuple(Fraction(x, 2) for x in quotient_coords(v))


def integer_lattice_coords(v) -> tuple[int, ...]:
    q = v.coords if isinstance(v, QuotientVector) else quotient_coords(v)
    if any(x % 2 for x in q):
        raise InvalidInputError("vector is not in the split lattice")
    return tuple(x // 2 for x in q)


class QuotientVector:
    """Class of an integer vector modulo the lineality space.

    ``representative`` is kept for display and serialization; identity is by
    quotient coordinates.
    """

    __slots__ = ("n", "representative", "_q")

    def __init__(self, representative: AmbientVector):
        self.n = representative.n
        self.representative = representative
        self._q = quotient_coords(representative)

    @property
    def coords(self) -> tuple[int, ...]:
        return self._q

    @property
    def lattice_coords(self) -> tuple[Fraction, ...]:
        return lattice_coords(self.representative)

    def is_zero(self) -> bool:
        return not any(self._q)

    def __eq__(self, other) -> bool:
        return isinstance(other, QuotientVector) and self.n == other.n and self._q == other._q

    def __hash__(self) -> int:
        return hash((self.n, self._q))

    def __add__(self, other: "QuotientVector") -> "QuotientVector":
        return QuotientVector(self.representative + other.representative)

    def __mul__(self, k: int) -> "QuotientVector":
        return QuotientVector(self.representative * k)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"QuotientVector(n={self.n}, q={list(self._q)})"


def eq_mod_lineality(a: QuotientVector | AmbientVector, b: QuotientVector | AmbientVector) -> bool:
    a = a if isinstance(a, QuotientVector) else QuotientVector(a)
    b = b if isinstance(b, QuotientVector) else QuotientVector(b)
    if a.n != b.n:
        raise InvalidInputError(f"label counts differ: {a.n} vs {b.n}")
    return a.coords == b.coords


def primitive(v: AmbientVector | QuotientVector, n: int | None = None) -> QuotientVector:
    """The lattice point on the ray of ``v`` closest to the origin, in the quotient."""
    rep = v.representative if isinstance(v, QuotientVector) else v
    if n is not None and n != rep.n:
        raise InvalidInputError(f"vector lives on {rep.n} labels, not {n}")
    lam = scaling_factor(rep)
    if lam == 1:
        return QuotientVector(rep)
    scaled = [x * lam for x in rep.coords]
    if all(x.denominator == 1 for x in scaled):
        return QuotientVector(AmbientVector(rep.n, tuple(int(x) for x in scaled)))
    q = quotient_coords(rep)
    return QuotientVector(lift(rep.n, [int(x * lam) for x in q]))


def scaling_factor(v: AmbientVector) -> Fraction:
    """The smallest positive λ with λ·v in the split lattice."""
    q = quotient_coords(v)
    g = 0
    for x in q:
        g = gcd(g, x)
    if g == 0:
        raise ZeroClassError("vector lies in the lineality space")
    return Fraction(2, g)


def same_ray(a: QuotientVector | AmbientVector, b: QuotientVector | AmbientVector) -> bool:
    """Equal up to positive rational scaling modulo lineality."""
    qa = a.coords if isinstance(a, QuotientVector) else quotient_coords(a)
    qb = b.coords if isinstance(b, QuotientVector) else quotient_coords(b)
    if not any(qa) or not any(qb):
        return not any(qa) and not any(qb)
    return tuple(exact.primitive_integer(qa)) == tuple(exact.primitive_integer(qb))
