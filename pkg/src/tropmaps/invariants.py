"""Enumerative invariants of relative maps to the tropical line.

* :func:`descendant` counts rigid types with point and identity insertions.
* :func:`hurwitz_number` sums edge-weight products over ordered trees.
* :func:`hurwitz_cycle` builds the weighted complex of types with simple
  ramification markings, some pinned to fixed target points, pushed to the
  tree fan.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product
from math import factorial
from typing import Iterator, Sequence

from .errors import (
    GenericityError,
    InternalConsistencyError,
    InvalidInputError,
    NonRigidSectorError,
)
from .lattice import exact
from .lattice.vectors import integer_lattice_coords, split_ray
from .relmaps import (
    MapType,
    RamificationData,
    _ram,
    count_linear_extensions,
    expansion_factor,
    net_flux,
    vertex_partial_order,
)
from .trees import MarkedTree, Split, edge_split, enumerate_trees, stabilize


@dataclass(frozen=True)
class Point:
    value: Fraction

    def __post_init__(self):
        object.__setattr__(self, "value", Fraction(self.value))


@dataclass(frozen=True)
class One:
    pass


@dataclass(frozen=True)
class Insertion:
    """``tau_k`` of a point class or of the identity class."""

    k: int
    condition: Point | One = One()

    def __post_init__(self):
        if isinstance(self.k, bool) or not isinstance(self.k, int) or self.k < 0:
            raise InvalidInputError(f"psi power must be a nonnegative integer, got {self.k!r}")
        if not isinstance(self.condition, (Point, One)):
            raise InvalidInputError("condition must be Point(...) or One()")

    @property
    def is_point(self) -> bool:
        return isinstance(self.condition, Point)

    @classmethod
    def parse(cls, text: str) -> "Insertion":
        """Parse ``"k=2"`` or ``"k=1,pt=3/2"``."""
        fields = {}
        for chunk in text.split(","):
            if "=" not in chunk:
                raise InvalidInputError(f"bad insertion {text!r}: expected key=value")
            key, val = (s.strip() for s in chunk.split("=", 1))
            fields[key] = val
        if set(fields) - {"k", "pt"} or "k" not in fields:
            raise InvalidInputError(f"bad insertion {text!r}: keys are k and pt")
        try:
            k = int(fields["k"])
        except ValueError as exc:
            raise InvalidInputError(f"bad psi power in {text!r}") from exc
        if "pt" in fields:
            return cls(k, Point(parse_rational(fields["pt"])))
        return cls(k, One())

    def __str__(self) -> str:
        if self.is_point:
            return f"tau_{self.k}(pt={self.condition.value})"
        return f"tau_{self.k}(1)"


def parse_rational(text: str) -> Fraction:
    text = text.strip()
    if any(c in text for c in ".eE"):
        raise InvalidInputError(f"decimal input {text!r} rejected; write p/q")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidInputError(f"cannot parse rational {text!r}") from exc


def psi_locus_member(mt: MapType | MarkedTree, i: int, exact_valence: bool = False) -> bool:
    """Whether the vertex carrying end ``i`` has stabilized valence at least 4 (or exactly 4)."""
    t = mt.source if isinstance(mt, MapType) else mt
    if not 1 <= i <= t.n:
        raise InvalidInputError(f"unknown marking {i}")
    if not t.is_stable:
        t = stabilize(t)
    v = t.leaf_attach[i]
    val = t.valence(v)
    return val == 4 if exact_valence else val >= 4


# -- descendant invariants ------------------------------------------------


@dataclass
class DescendantType:
    tree: MarkedTree  # leaves 1..n relative, n+1..n+s insertions in query order
    assignment: dict[int, int]  # insertion index (0-based) -> vertex
    multiplicity: Fraction

    def to_json(self) -> dict:
        m = self.multiplicity
        return {
            "tree": self.tree.to_json(),
            "assignment": {str(k): v for k, v in sorted(self.assignment.items())},
            "multiplicity": f"{m.numerator}/{m.denominator}",
        }


@dataclass
class DescendantResult:
    value: int
    types: list[DescendantType]

    def to_json(self) -> dict:
        return {"value": self.value, "types": [t.to_json() for t in self.types]}


def _labeled_trees(m: int) -> Iterator[list[tuple[int, int]]]:
    """Every tree on vertex set ``0..m-1`` via Pruefer sequences."""
    if m == 1:
        yield []
        return
    if m == 2:
        yield [(0, 1)]
        return
    for seq in product(range(m), repeat=m - 2):
        degree = [1] * m
        for a in seq:
            degree[a] += 1
        edges = []
        for a in seq:
            leaf = min(v for v in range(m) if degree[v] == 1)
            edges.append(tuple(sorted((leaf, a))))
            degree[leaf] -= 1
            degree[a] -= 1
        u, w = [v for v in range(m) if degree[v] == 1]
        edges.append((u, w))
        yield sorted(edges)


def _distribute(labels: Sequence[int], caps: list[int]) -> Iterator[dict[int, int]]:
    out: dict[int, int] = {}

    def rec(k):
        if k == len(labels):
            yield dict(out)
            return
        for v in range(len(caps)):
            if caps[v]:
                caps[v] -= 1
                out[labels[k]] = v
                yield from rec(k + 1)
                caps[v] += 1
        out.pop(labels[k], None)

    if sum(caps) == len(labels):
        yield from rec(0)


def descendant_types(x, ins: Sequence[Insertion], evaluation_index: bool = False) -> list[DescendantType]:
    x = _ram(x)
    ins = list(ins)
    n = x.n
    points = [i for i, q in enumerate(ins) if q.is_point]
    values = [ins[i].condition.value for i in points]
    if len(set(values)) != len(values):
        raise GenericityError("point insertions must have pairwise distinct values")
    vstar = n + len(ins) - 2 - sum(q.k for q in ins)
    if vstar < 1 or len(points) != vstar:
        raise NonRigidSectorError(
            f"need exactly n + #insertions - 2 - sum(k) = {vstar} >= 1 point insertions, got {len(points)}"
        )
    ones = [i for i, q in enumerate(ins) if not q.is_point]
    m = vstar
    pos = values  # vertex j carries point insertion points[j]
    base = Fraction(1)
    for q in ins:
        base /= factorial(q.k)
    out = []
    for edges in _labeled_trees(m):
        deg = [0] * m
        for u, w in edges:
            deg[u] += 1
            deg[w] += 1
        for place in product(range(m), repeat=len(ones)):
            at = {points[j]: j for j in range(m)}
            at.update({ones[a]: place[a] for a in range(len(ones))})
            ksum = [0] * m
            cnt = [0] * m
            for i, v in at.items():
                ksum[v] += ins[i].k
                cnt[v] += 1
            caps = [3 + ksum[v] - deg[v] - cnt[v] for v in range(m)]
            if min(caps) < 0:
                continue
            for rel in _distribute(list(range(1, n + 1)), caps):
                attach = dict(rel)
                attach.update({n + 1 + i: v for i, v in at.items()})
                t = MarkedTree(n + len(ins), range(m), edges, attach, stable=False)
                prod_w = 1
                ok = True
                for e in t.edges:
                    u, w = e
                    f = net_flux(t, e, x, w)
                    if f == 0 or (f > 0) != (pos[u] < pos[w]):
                        ok = False
                        break
                    prod_w *= abs(f)
                if not ok:
                    continue
                mult = base
                for v in range(m):
                    mult *= factorial(ksum[v])
                if evaluation_index:
                    mult *= prod_w
                out.append(DescendantType(t, at, mult))
    return out


def descendant(x, ins: Sequence[Insertion], evaluation_index: bool = False,
               with_types: bool = False):
    """Tropical relative descendant invariant in the rigid sector.

    With ``evaluation_index`` each type is additionally weighted by the product
    of its bounded edge weights.
    """
    types = descendant_types(x, ins, evaluation_index)
    total = sum((t.multiplicity for t in types), Fraction(0))
    if total.denominator != 1:
        raise InternalConsistencyError(f"descendant total {total} is not an integer")
    if with_types:
        return DescendantResult(int(total), types)
    return int(total)


# -- Hurwitz numbers ------------------------------------------------------


def hurwitz_contributions(x) -> list[tuple[MarkedTree, int, int]]:
    """``(tree, #linear extensions, product of weights)`` for trees with positive weights."""
    x = _ram(x)
    out = []
    for t in enumerate_trees(x.n, trivalent_only=True):
        ws = [expansion_factor(t, e, x) for e in t.edges]
        if any(w == 0 for w in ws):
            continue
        prod_w = 1
        for w in ws:
            prod_w *= w
        out.append((t, count_linear_extensions(vertex_partial_order(t, x)), prod_w))
    return out


def hurwitz_number(x) -> int:
    return sum(ext * w for _, ext, w in hurwitz_contributions(x))


# -- Hurwitz cycles -------------------------------------------------------


@dataclass
class Cell:
    """``{l >= 0 : A l = b}`` in edge-length coordinates of ``tree``.

    Columns of ``A`` follow ``splits`` (the sorted split list of the tree).
    """

    splits: tuple[Split, ...]
    a: tuple[tuple[Fraction, ...], ...]
    b: tuple[Fraction, ...]
    weight: int
    dim: int

    @property
    def n(self) -> int:
        return self.splits[0].n if self.splits else 0

    def key(self):
        return _cell_key(self.splits, self.a, self.b)

    def to_json(self) -> dict:
        return {
            "tree": [list(s.labels) for s in self.splits],
            "equations": [[str(v) for v in row] + [str(c)] for row, c in zip(self.a, self.b)],
            "weight": self.weight,
            "dim": self.dim,
        }


def _cell_key(splits, a, b):
    if a:
        rows, _ = exact.rref([list(r) + [c] for r, c in zip(a, b)])
        canon = tuple(tuple(r) for r in rows)
    else:
        canon = ()
    return (tuple(splits), canon)


@dataclass
class HurwitzCycle:
    x: RamificationData
    k: int
    points: tuple[Fraction, ...]
    cells: list[Cell]
    n_leaves: int = 0

    def degree(self) -> int:
        if self.k != 0:
            raise InvalidInputError("degree is defined for 0-dimensional cycles")
        return sum(c.weight for c in self.cells)

    def to_json(self) -> dict:
        return {
            "x": list(self.x.x),
            "k": self.k,
            "points": [str(p) for p in self.points],
            "cells": [c.to_json() for c in self.cells],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    # -- facets and balancing ---------------------------------------------

    def facets(self) -> dict:
        """Facet key -> list of (cell index, contracted split)."""
        out: dict = {}
        for idx, c in enumerate(self.cells):
            for s, fkey in _cell_facets(c):
                out.setdefault(fkey, []).append((idx, s))
        return out

    def balancing_failures(self) -> list:
        if self.k == 0:
            return []
        bad = []
        for fkey, adj in sorted(self.facets().items(), key=lambda kv: repr(kv[0])):
            total = None
            for idx, s in adj:
                u = _relative_normal(self.cells[idx], s)
                w = self.cells[idx].weight
                total = [w * v for v in u] if total is None else [t + w * v for t, v in zip(total, u)]
            if not _in_face_span(fkey, total, self.x.n):
                bad.append(fkey)
        return bad

    def is_balanced(self) -> bool:
        return not self.balancing_failures()


def _lp_max_coordinate(a, b, nvars, j) -> Fraction | None:
    c = [0] * nvars
    c[j] = 1
    status, _, val = exact.linprog(c, [list(r) for r in a], list(b))
    if status == "infeasible":
        return None
    if status == "unbounded":
        return Fraction(-1)  # marker: positive values reachable
    return val


def _polyhedron_shape(a, b, nvars):
    """(feasible, forced-zero coordinates, dimension) of ``{l >= 0 : a l = b}``."""
    if a and exact.feasible([list(r) for r in a], list(b), nvars) is None:
        return False, [], -1
    forced = []
    for j in range(nvars):
        v = _lp_max_coordinate(a, b, nvars, j) if a else Fraction(-1)
        if v is None:
            return False, [], -1
        if v == 0:
            forced.append(j)
    free = [j for j in range(nvars) if j not in forced]
    rk = exact.rank([[r[j] for j in free] for r in a]) if a and free else 0
    return True, forced, len(free) - rk


def _cell_facets(c: Cell):
    """Yield (contracted split, facet key) for each facet ``l_s = 0``."""
    m = len(c.splits)
    for j, s in enumerate(c.splits):
        a = [list(r) for r in c.a] + [[int(jj == j) for jj in range(m)]]
        b = list(c.b) + [0]
        ok, forced, dim = _polyhedron_shape(a, b, m)
        if not ok or dim != c.dim - 1:
            continue
        keep = [jj for jj in range(m) if jj not in forced and jj != j]
        splits = tuple(c.splits[jj] for jj in keep)
        ar = tuple(tuple(Fraction(r[jj]) for jj in keep) for r in c.a)
        yield s, _cell_key(splits, ar, tuple(Fraction(v) for v in c.b))


def _lattice_split(s: Split) -> list[int]:
    return list(integer_lattice_coords(split_ray(s, s.n)))


def _relative_normal(c: Cell, s: Split) -> list[Fraction]:
    """Primitive generator of the cell's direction lattice modulo the facet ``l_s = 0``."""
    m = len(c.splits)
    j = c.splits.index(s)
    if c.a:
        den = exact.lcm(*(v.denominator for r in c.a for v in r))
        ai = [[int(v * den) for v in r] for r in c.a]
        basis = exact.integer_kernel(ai, m)
    else:
        basis = [[int(i == jj) for jj in range(m)] for i in range(m)]
    coeffs = [vec[j] for vec in basis]
    g, mult = _ext_gcd(coeffs)
    if g == 0:
        raise InternalConsistencyError("facet direction lies in the facet")
    if g < 0:
        mult = [-v for v in mult]
    ell = [sum(mv * vec[t] for mv, vec in zip(mult, basis)) for t in range(m)]
    out = None
    for t in range(m):
        if ell[t]:
            v = _lattice_split(c.splits[t])
            out = [ell[t] * z for z in v] if out is None else [o + ell[t] * z for o, z in zip(out, v)]
    return [Fraction(v) for v in out]


def _ext_gcd(vals: Sequence[int]) -> tuple[int, list[int]]:
    g, coef = 0, [0] * len(vals)
    for i, v in enumerate(vals):
        if v == 0:
            continue
        if g == 0:
            g, coef = v, [0] * len(vals)
            coef[i] = 1
            continue
        # solve p*g + q*v = gcd(g, v)
        old_r, r = g, v
        old_s, s_ = 1, 0
        old_t, t_ = 0, 1
        while r:
            qq = old_r // r
            old_r, r = r, old_r - qq * r
            old_s, s_ = s_, old_s - qq * s_
            old_t, t_ = t_, old_t - qq * t_
        coef = [old_s * c for c in coef]
        coef[i] += old_t
        g = old_r
    if g < 0:
        g, coef = -g, [-c for c in coef]
    return g, coef


def _in_face_span(fkey, total, n) -> bool:
    if total is None or not any(total):
        return True
    splits, canon = fkey
    m = len(splits)
    if not splits:
        return False
    if canon:
        eqs = [list(r[:-1]) for r in canon]
        kernel = exact.nullspace(eqs, m)
    else:
        kernel = [[Fraction(int(i == j)) for j in range(m)] for i in range(m)]
    if not kernel:
        return False
    cols = []
    vs = [_lattice_split(s) for s in splits]
    for vec in kernel:
        amb = [sum(vec[t] * vs[t][z] for t in range(m)) for z in range(len(vs[0]))]
        cols.append(amb)
    return exact.solve(exact.transpose(cols), total) is not None


def _placement_weight(base: Sequence[int], free: int) -> int:
    """Sum over maps of ``free`` labeled markings to vertices of prod (count at V)!."""
    if not base:
        return 0
    total = 0
    for comp in _compositions(free, len(base)):
        w = factorial(free)
        for c_ in comp:
            w //= factorial(c_)
        for b_, c_ in zip(base, comp):
            w *= factorial(b_ + c_)
        total += w
    return total


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for c in range(total + 1):
        for rest in _compositions(total - c, parts - 1):
            yield (c, *rest)


def _zero_classes(t: MarkedTree, x) -> dict[int, int]:
    parent = {v: v for v in t.vertices}

    def find(v):
        while parent[v] != v:
            v = parent[v]
        return v

    for e in t.edges:
        if expansion_factor(t, e, x) == 0:
            parent[find(e[0])] = find(e[1])
    return {v: find(v) for v in t.vertices}


def _position_functionals(t: MarkedTree, x, root: int, edge_index: dict) -> dict[int, list[int]]:
    """Position of each vertex minus that of ``root`` as a linear form in edge lengths."""
    out = {root: [0] * len(edge_index)}
    stack = [root]
    while stack:
        u = stack.pop()
        for w in t.adjacency[u]:
            if w in out:
                continue
            e = tuple(sorted((u, w)))
            f = net_flux(t, e, x, w)
            row = list(out[u])
            row[edge_index[e]] += f
            out[w] = row
            stack.append(w)
    return out


def hurwitz_cycle(x, k: int, points: Sequence = ()) -> HurwitzCycle:
    """Weighted k-dimensional complex in the tree fan cut out by r - k pinned markings."""
    x = _ram(x)
    r = x.r
    if not 0 <= k <= r:
        raise InvalidInputError(f"dimension k={k} outside 0..{r}")
    pts = tuple(Fraction(p) if not isinstance(p, str) else parse_rational(p) for p in points)
    if len(pts) != r - k:
        raise InvalidInputError(f"need r - k = {r - k} points, got {len(pts)}")
    if len(set(pts)) != len(pts):
        raise GenericityError("points must be pairwise distinct")
    trees = enumerate_trees(x.n, trivalent_only=True)
    cells: dict = {}
    if k == r:
        w = _placement_weight([0] * (x.n - 2), r)
        out = []
        for t in trees:
            splits = tuple(sorted(t.splits()))
            out.append(Cell(splits, (), (), w, len(splits)))
        return HurwitzCycle(x, k, pts, out, x.n)
    npins = r - k
    for t in trees:
        splits = tuple(sorted(t.splits()))
        edges = sorted(t.edges, key=lambda e: splits.index(edge_split(t, e)))
        edge_index = {e: i for i, e in enumerate(edges)}
        m = len(edges)
        zc = _zero_classes(t, x)
        verts = list(t.vertices)
        for pins in permutations(verts, npins):
            if len({zc[v] for v in pins}) != npins:
                continue
            func = _position_functionals(t, x, pins[0], edge_index)
            a = [tuple(Fraction(v) for v in func[pins[j]]) for j in range(1, npins)]
            b = [pts[j] - pts[0] for j in range(1, npins)]
            ok, forced, dim = _polyhedron_shape(a, b, m)
            if not ok:
                continue
            if forced:
                raise GenericityError(
                    f"points {list(map(str, pts))} are not generic: a cell degenerates onto a boundary face"
                )
            if dim != k:
                raise GenericityError(f"cell of dimension {dim}, expected {k}")
            ev = [[1] + [0] * m] + [[1] + list(func[pins[j]]) for j in range(1, npins)]
            index = exact.gcd_maximal_minors(ev)
            if index == 0:
                raise InternalConsistencyError("evaluation map is not of full rank")
            base = [1 if v in pins else 0 for v in verts]
            w = index * _placement_weight(base, k)
            key = _cell_key(splits, tuple(a), tuple(b))
            if key in cells:
                cells[key].weight += w
            else:
                cells[key] = Cell(splits, tuple(a), tuple(b), w, k)
    ordered = [cells[kk] for kk in sorted(cells, key=repr)]
    return HurwitzCycle(x, k, pts, ordered, x.n)


def connected_through_codim1(c: HurwitzCycle) -> bool:
    """Dual graph on cells, joined along shared facets, is connected."""
    if len(c.cells) <= 1 or c.k == 0:
        # zero-dimensional cells all share the empty face
        return True
    parent = list(range(len(c.cells)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for adj in c.facets().values():
        idx = [i for i, _ in adj]
        for j in idx[1:]:
            parent[find(j)] = find(idx[0])
    return len({find(i) for i in range(len(c.cells))}) == 1
