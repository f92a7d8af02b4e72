"""Brute-force double Hurwitz numbers from transposition factorizations.

A tuple ``(s0, t1..tr)`` with ``s0`` of cycle type ``x+``, each ``ti`` a
transposition and ``(s0 t1 .. tr)^-1`` of cycle type ``x-`` is counted once
per labeling of the cycles of ``s0`` by the positive entries and of the final
product by the negative entries, provided the generated group is transitive.
The total is divided by ``d!``.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations, product
from math import factorial
from typing import Iterable, Iterator, Sequence

from .errors import InternalConsistencyError, ResourceError
from .relmaps import RamificationData, _ram

MAX_DEGREE = 8
MAX_TUPLES = 5_000_000

Perm = tuple[int, ...]


def cycle_type(p: Perm) -> tuple[int, ...]:
    seen = [False] * len(p)
    out = []
    for i in range(len(p)):
        if seen[i]:
            continue
        k = 0
        j = i
        while not seen[j]:
            seen[j] = True
            j = p[j]
            k += 1
        out.append(k)
    return tuple(sorted(out, reverse=True))


def _perm_with_type(parts: Sequence[int]) -> Perm:
    p = []
    start = 0
    for k in parts:
        p.extend(start + (i + 1) % k for i in range(k))
        start += k
    return tuple(p)


def _class_size(parts: Sequence[int]) -> int:
    d = sum(parts)
    denom = 1
    for k, m in Counter(parts).items():
        denom *= k ** m * factorial(m)
    return factorial(d) // denom


def _labelings(parts: Sequence[int]) -> int:
    """Bijections from the cycles of a permutation of this type to equal-length entries."""
    out = 1
    for m in Counter(parts).values():
        out *= factorial(m)
    return out


def _transitive(d: int, s0: Perm, taus: Sequence[tuple[int, int]]) -> bool:
    parent = list(range(d))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    for i in range(d):
        union(i, s0[i])
    for a, b in taus:
        union(a, b)
    root = find(0)
    return all(find(i) == root for i in range(d))


def _compose_transposition(p: Perm, t: tuple[int, int]) -> Perm:
    # (p * t)(i) = p(t(i))
    a, b = t
    q = list(p)
    q[a], q[b] = p[b], p[a]
    return tuple(q)


def _inverse(p: Perm) -> Perm:
    q = [0] * len(p)
    for i, v in enumerate(p):
        q[v] = i
    return tuple(q)


def _check_genus(plus: Sequence[int], minus_cycles: int, r: int, d: int) -> None:
    # 2g - 2 = -2d + sum over branch points of (d - #cycles)
    chi = -2 * d + (d - len(plus)) + (d - minus_cycles) + r
    if chi != -2:
        raise InternalConsistencyError(f"transitive tuple of genus {(chi + 2) // 2}, expected 0")


def _count_for_representative(s0: Perm, minus: tuple[int, ...], r: int) -> int:
    d = len(s0)
    transp = list(combinations(range(d), 2))
    count = 0
    taus: list[tuple[int, int]] = []

    def rec(p: Perm, depth: int):
        nonlocal count
        if depth == r:
            final = _inverse(p)
            if cycle_type(final) == minus and _transitive(d, s0, taus):
                _check_genus(cycle_type(s0), len(minus), r, d)
                count += 1
            return
        for t in transp:
            taus.append(t)
            rec(_compose_transposition(p, t), depth + 1)
            taus.pop()

    rec(s0, 0)
    return count


def _guard(x: RamificationData) -> None:
    if x.d > MAX_DEGREE:
        raise ResourceError(f"degree {x.d} exceeds the oracle limit {MAX_DEGREE}")
    tuples = (x.d * (x.d - 1) // 2) ** x.r
    if tuples > MAX_TUPLES:
        raise ResourceError(
            f"{tuples} transposition tuples exceed the oracle limit {MAX_TUPLES}; "
            "reduce the degree or the number of entries"
        )


@lru_cache(maxsize=None)
def _oracle_cached(plus: tuple[int, ...], minus: tuple[int, ...], r: int) -> Fraction:
    d = sum(plus)
    rep = _perm_with_type(plus)
    n_rep = _count_for_representative(rep, minus, r)
    total = n_rep * _class_size(plus) * _labelings(plus) * _labelings(minus)
    return Fraction(total, factorial(d))


def oracle_hurwitz(x) -> Fraction:
    x = _ram(x)
    _guard(x)
    plus = tuple(sorted(x.positive, reverse=True))
    minus = tuple(sorted(x.negative, reverse=True))
    return _oracle_cached(plus, minus, x.r)


def oracle_hurwitz_naive(x) -> Fraction:
    """Same count without conjugacy pruning; for d <= 4."""
    x = _ram(x)
    if x.d > 4:
        raise ResourceError("the naive oracle is limited to degree 4")
    d, r = x.d, x.r
    plus = tuple(sorted(x.positive, reverse=True))
    minus = tuple(sorted(x.negative, reverse=True))
    transp = list(combinations(range(d), 2))
    total = 0
    for s0 in permutations(range(d)):
        if cycle_type(s0) != plus:
            continue
        for taus in product(transp, repeat=r):
            p = s0
            for t in taus:
                p = _compose_transposition(p, t)
            final = _inverse(p)
            if cycle_type(final) == minus and _transitive(d, s0, taus):
                total += _labelings(plus) * _labelings(minus)
    return Fraction(total, factorial(d))


# -- comparison with the tropical count ----------------------------------


@dataclass(frozen=True)
class ReportRow:
    x: RamificationData
    oracle: Fraction
    tropical: int

    @property
    def equal(self) -> bool:
        return self.oracle == self.tropical

    def tsv(self) -> str:
        return "\t".join([
            str(self.x), str(self.x.d), str(self.x.r),
            str(self.oracle), str(self.tropical), str(self.equal).lower(),
        ])


TSV_HEADER = "x\td\tr\toracle\ttropical\tequal"


def oracle_vs_tropical_report(x_list: Iterable) -> list[ReportRow]:
    from .invariants import hurwitz_number

    rows = []
    for x in x_list:
        x = _ram(x)
        rows.append(ReportRow(x, oracle_hurwitz(x), hurwitz_number(x)))
    return rows


def format_report(rows: Sequence[ReportRow]) -> str:
    return "\n".join([TSV_HEADER, *(r.tsv() for r in rows)]) + "\n"


def _partitions(d: int, max_part: int | None = None) -> Iterator[tuple[int, ...]]:
    max_part = d if max_part is None else max_part
    if d == 0:
        yield ()
        return
    for k in range(min(d, max_part), 0, -1):
        for rest in _partitions(d - k, k):
            yield (k, *rest)


def sweep(d_max: int, n_max: int, n_min: int = 3) -> list[RamificationData]:
    """One tuple per pair of partitions: positive entries first, both descending."""
    out = []
    for d in range(1, d_max + 1):
        for plus in _partitions(d):
            for minus in _partitions(d):
                n = len(plus) + len(minus)
                if n_min <= n <= n_max:
                    out.append(RamificationData(plus + tuple(-m for m in minus)))
    return out
