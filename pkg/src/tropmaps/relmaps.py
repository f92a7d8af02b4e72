"""Combinatorial types of tropical relative maps to the line.

A type is a leaf-labeled tree together with expansion factors on its edges
and an ordering of its vertices by image position.  Expansion factors are
forced by the ramification data: an edge's factor is the absolute flux of
``x`` through either side.  Positive flux points toward ``+inf``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import (
    InternalConsistencyError,
    InvalidEdgeError,
    InvalidInputError,
)
from .lattice import exact
from .lattice.cones import Cone
from .lattice.vectors import AmbientVector, QuotientVector, primitive, split_ray
from .trees import MarkedTree, Split, edge_split, enumerate_trees, stabilize

Edge = tuple[int, int]


@dataclass(frozen=True)
class RamificationData:
    x: tuple[int, ...]

    def __post_init__(self):
        try:
            x = tuple(int(v) for v in self.x)
        except (TypeError, ValueError) as exc:
            raise InvalidInputError(f"ramification entries must be integers: {self.x!r}") from exc
        if any(isinstance(v, bool) or (isinstance(v, float)) for v in self.x):
            raise InvalidInputError("ramification entries must be integers")
        object.__setattr__(self, "x", x)
        if len(x) < 3:
            raise InvalidInputError(f"need at least 3 entries, got {len(x)}")
        if any(v == 0 for v in x):
            raise InvalidInputError(f"entries must be nonzero: {x}")
        if sum(x) != 0:
            raise InvalidInputError(f"entries must sum to zero, got {sum(x)}")

    @classmethod
    def parse(cls, text: str) -> "RamificationData":
        parts = [p.strip() for p in text.split(",") if p.strip()]
        try:
            return cls(tuple(int(p) for p in parts))
        except ValueError as exc:
            raise InvalidInputError(f"cannot parse ramification data {text!r}") from exc

    @property
    def n(self) -> int:
        return len(self.x)

    @property
    def r(self) -> int:
        return self.n - 2

    @property
    def positive(self) -> tuple[int, ...]:
        return tuple(v for v in self.x if v > 0)

    @property
    def negative(self) -> tuple[int, ...]:
        return tuple(-v for v in self.x if v < 0)

    @property
    def d(self) -> int:
        return sum(self.positive)

    def __neg__(self) -> "RamificationData":
        return RamificationData(tuple(-v for v in self.x))

    def __len__(self) -> int:
        return len(self.x)

    def __getitem__(self, i: int) -> int:
        """Entry for leaf label ``i`` (1-based); extra markings carry 0."""
        return self.x[i - 1] if 1 <= i <= len(self.x) else 0

    def __str__(self) -> str:
        return ",".join(map(str, self.x))


def _ram(x) -> RamificationData:
    return x if isinstance(x, RamificationData) else RamificationData(tuple(x))


def _check_tree(t: MarkedTree, x: RamificationData) -> None:
    if t.n < x.n:
        raise InvalidInputError(f"tree has {t.n} leaves but x has {x.n} entries")


def net_flux(t: MarkedTree, e: Sequence[int], x, side: int) -> int:
    """Sum of ``x_i`` over the leaves on the ``side`` half of ``t - e``."""
    x = _ram(x)
    _check_tree(t, x)
    if isinstance(e, int):
        raise InvalidEdgeError("leaf edges have no flux side; use leaf_expansion")
    return sum(x[i] for i in t.side_leaves(e, side))


def expansion_factor(t: MarkedTree, e: Sequence[int], x) -> int:
    e = tuple(sorted(e))
    return abs(net_flux(t, e, x, e[0]))


def leaf_expansion(x, i: int) -> int:
    return abs(_ram(x)[i])


def edge_weights(t: MarkedTree, x) -> dict[Edge, int]:
    x = _ram(x)
    return {e: expansion_factor(t, e, x) for e in t.edges}


# -- partial orders ---------------------------------------------------------


@dataclass(frozen=True)
class Poset:
    """A finite partial order given by generating relations ``a < b``."""

    elements: tuple
    relations: frozenset

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(sorted(self.elements)))
        object.__setattr__(self, "relations", frozenset(self.relations))
        known = set(self.elements)
        for a, b in self.relations:
            if a not in known or b not in known:
                raise InvalidInputError(f"relation {a}<{b} mentions an unknown element")

    def predecessors(self) -> dict:
        pred = {e: set() for e in self.elements}
        for a, b in self.relations:
            pred[b].add(a)
        return pred

    def is_acyclic(self) -> bool:
        return sum(1 for _ in _topo(self, first_only=True)) == 1 or not self.elements


def linear_extensions(d: Poset) -> list[tuple]:
    """Every total order refining ``d``, in lexicographic order of element sequences."""
    out = list(_topo(d))
    if d.elements and not out:
        raise InvalidInputError("the relations contain a cycle")
    return out


def count_linear_extensions(d: Poset) -> int:
    pred = d.predecessors()
    index = {e: k for k, e in enumerate(d.elements)}
    masks = [sum(1 << index[p] for p in pred[e]) for e in d.elements]
    full = (1 << len(d.elements)) - 1
    ways = {0: 1}
    for size in range(len(d.elements)):
        nxt: dict[int, int] = {}
        for placed, w in ways.items():
            for k in range(len(d.elements)):
                if not placed >> k & 1 and masks[k] & placed == masks[k]:
                    m = placed | 1 << k
                    nxt[m] = nxt.get(m, 0) + w
        ways = nxt
    return ways.get(full, 0) if d.elements else 1


def _topo(d: Poset, first_only: bool = False) -> Iterator[tuple]:
    pred = d.predecessors()
    placed: list = []
    done: set = set()

    def rec():
        if len(placed) == len(d.elements):
            yield tuple(placed)
            return
        for e in d.elements:
            if e not in done and pred[e] <= done:
                placed.append(e)
                done.add(e)
                yield from rec()
                done.discard(e)
                placed.pop()
                if first_only:
                    return

    yield from rec()


VertexClass = tuple[int, ...]


def vertex_classes(t: MarkedTree, x) -> list[VertexClass]:
    """Vertices joined by weight-0 edges, merged; sorted."""
    x = _ram(x)
    parent = {v: v for v in t.vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for e in t.edges:
        if expansion_factor(t, e, x) == 0:
            a, b = find(e[0]), find(e[1])
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups: dict[int, list[int]] = {}
    for v in t.vertices:
        groups.setdefault(find(v), []).append(v)
    return sorted(tuple(sorted(g)) for g in groups.values())


def oriented_edges(t: MarkedTree, x) -> list[tuple[int, int, int]]:
    """``(earlier, later, weight)`` for every edge of positive weight."""
    x = _ram(x)
    out = []
    for e in t.edges:
        u, v = e
        f = net_flux(t, e, x, v)
        if f > 0:
            out.append((u, v, f))
        elif f < 0:
            out.append((v, u, -f))
    return out


def vertex_partial_order(t: MarkedTree, x) -> Poset:
    """Classes of vertices ordered by image; the positive-flux side maps later."""
    x = _ram(x)
    _check_tree(t, x)
    classes = vertex_classes(t, x)
    cls_of = {v: c for c in classes for v in c}
    rel = set()
    for a, b, _ in oriented_edges(t, x):
        ca, cb = cls_of[a], cls_of[b]
        if ca == cb:
            raise InternalConsistencyError("positive-weight edge inside a merged class")
        rel.add((ca, cb))
    return Poset(tuple(classes), frozenset(rel))


# -- rays and cones of a total order ----------------------------------------


def _order_positions(t: MarkedTree, x, order: Sequence[VertexClass]) -> dict[int, int]:
    pos = {}
    for k, cls in enumerate(order):
        for v in cls:
            pos[v] = k
    if set(pos) != set(t.vertices):
        raise InvalidInputError("order does not cover exactly the tree's vertices")
    return pos


def _check_extension(t: MarkedTree, x, order: Sequence[VertexClass]) -> dict[int, int]:
    pos = _order_positions(t, x, order)
    for a, b, _ in oriented_edges(t, x):
        if pos[a] >= pos[b]:
            raise InvalidInputError(f"order violates the orientation of edge {a}-{b}")
    return pos


def gap_ray_coefficients(t: MarkedTree, x, order: Sequence[VertexClass], j: int) -> dict[Split, int]:
    """Split coefficients of the gap ray, before reduction modulo lineality."""
    x = _ram(x)
    order = [tuple(c) for c in order]
    pos = _check_extension(t, x, order)
    m = len(order)
    if not 1 <= j <= m - 1:
        raise InvalidInputError(f"gap index {j} outside 1..{m - 1}")
    crossing = []
    for e in t.edges:
        lo, hi = sorted((pos[e[0]], pos[e[1]]))
        if lo < j <= hi:
            w = expansion_factor(t, e, x)
            if w == 0:
                raise InternalConsistencyError("a weight-0 edge straddles a gap")
            crossing.append((e, w))
    if not crossing:
        raise InternalConsistencyError(f"no edge crosses gap {j}")
    big = exact.lcm(*(w for _, w in crossing))
    return {edge_split(t, e): big // w for e, w in sorted(crossing)}


def _combine(coeffs: Mapping[Split, int], n: int) -> AmbientVector:
    total = AmbientVector.zero(n)
    for s, c in coeffs.items():
        total = total + split_ray(s, n) * c
    return total


def gap_ray(t: MarkedTree, x, order: Sequence[VertexClass], j: int) -> QuotientVector:
    return primitive(_combine(gap_ray_coefficients(t, x, order, j), t.n))


def zero_edge_splits(t: MarkedTree, x) -> list[Split]:
    x = _ram(x)
    return sorted(edge_split(t, e) for e in t.edges if expansion_factor(t, e, x) == 0)


def cone_of_order(t: MarkedTree, x, order: Sequence[VertexClass]) -> Cone:
    x = _ram(x)
    rays = [gap_ray(t, x, order, j) for j in range(1, len(order))]
    rays += [split_ray(s, t.n) for s in zero_edge_splits(t, x)]
    return Cone(rays, n=t.n)


def format_split_combination(coeffs: Mapping[Split, int]) -> str:
    parts = []
    for s, c in sorted(coeffs.items()):
        body = "v" + s.display()
        parts.append(body if c == 1 else f"{c}*{body}")
    return " + ".join(parts)


# -- map types --------------------------------------------------------------


@dataclass(frozen=True)
class LineGraph:
    """Target path with ``m`` vertices; ``labels[k]`` counts branch vertices over vertex k."""

    m: int
    labels: tuple[int, ...]

    def __post_init__(self):
        if self.m < 1 or len(self.labels) != self.m:
            raise InvalidInputError("a line graph needs m >= 1 vertices with one label each")


@dataclass
class MapType:
    source: MarkedTree
    x: RamificationData
    order: tuple[tuple[int, ...], ...]
    weights: dict[Edge, int]
    mode: str = "rubber"
    origin_block: int | None = None
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_order(cls, t: MarkedTree, x, order: Sequence[Iterable[int]], mode: str = "rubber",
                   origin_block: int | None = None) -> "MapType":
        x = _ram(x)
        mt = cls(t, x, tuple(tuple(sorted(b)) for b in order), edge_weights(t, x), mode, origin_block)
        mt.validate()
        return mt

    def block_of(self) -> dict[int, int]:
        return {v: k for k, b in enumerate(self.order) for v in b}

    def validate(self) -> None:
        t, x = self.source, self.x
        _check_tree(t, x)
        if self.mode not in ("rubber", "parametrized"):
            raise InvalidInputError(f"unknown mode {self.mode!r}")
        if self.mode == "parametrized":
            if self.origin_block is None or not 0 <= self.origin_block < len(self.order):
                raise InvalidInputError("parametrized types need an origin block")
        pos = self.block_of()
        if sorted(pos) != sorted(t.vertices):
            raise InvalidInputError("blocks must partition the vertices")
        for e in t.edges:
            w = expansion_factor(t, e, x)
            if self.weights.get(e) != w:
                raise InvalidInputError(f"edge {e} has weight {self.weights.get(e)}, flux gives {w}")
            u, v = e
            if w == 0:
                if pos[u] != pos[v]:
                    raise InvalidInputError(f"weight-0 edge {e} joins distinct blocks")
                continue
            later = v if net_flux(t, e, x, v) > 0 else u
            earlier = u if later == v else v
            if pos[earlier] >= pos[later]:
                raise InvalidInputError(f"edge {e} is ordered against its orientation")
        for k, b in enumerate(self.order):
            if not any(t.valence(v) > 2 for v in b):
                raise InvalidInputError(f"block {k} has no vertex of valence > 2")

    def subdivided_source(self) -> MarkedTree:
        """Insert a 2-valent vertex wherever an edge passes over an intermediate block."""
        t = self.source
        pos = self.block_of()
        next_id = max(t.vertices) + 1
        verts = list(t.vertices)
        edges = []
        for u, v in t.edges:
            if pos[u] > pos[v]:
                u, v = v, u
            prev = u
            for _ in range(pos[u] + 1, pos[v]):
                verts.append(next_id)
                edges.append((prev, next_id))
                prev = next_id
                next_id += 1
            edges.append((prev, v))
        return MarkedTree(t.n, verts, edges, t.leaf_attach, stable=False)

    def to_json(self) -> dict:
        out = self.source.to_json()
        out["x"] = list(self.x.x)
        out["order"] = [list(b) for b in self.order]
        out["weights"] = {f"e{k}": self.weights[e] for k, e in enumerate(self.source.edges)}
        out["mode"] = self.mode
        if self.mode == "parametrized":
            out["origin_block"] = self.origin_block
        return out

    @classmethod
    def from_json(cls, data: Mapping | str) -> "MapType":
        if isinstance(data, str):
            data = json.loads(data)
        t = MarkedTree.from_json(data)
        x = RamificationData(tuple(data["x"]))
        mt = cls(
            t, x, tuple(tuple(b) for b in data["order"]),
            {e: int(data["weights"][f"e{k}"]) for k, e in enumerate(t.edges)},
            data.get("mode", "rubber"), data.get("origin_block"),
        )
        mt.validate()
        return mt


def branch_graph(mt: MapType) -> LineGraph:
    t = stabilize(mt.source) if not mt.source.is_stable else mt.source
    labels = []
    for b in mt.order:
        labels.append(sum(1 for v in b if v in t.adjacency and t.valence(v) > 2))
    return LineGraph(len(mt.order), tuple(labels))


def map_types(x, t: MarkedTree | None = None) -> Iterator[MapType]:
    """All maximal types: trivalent trees (or just ``t``) with every linear extension."""
    x = _ram(x)
    trees = [t] if t is not None else enumerate_trees(x.n, trivalent_only=True)
    for tree in trees:
        for order in linear_extensions(vertex_partial_order(tree, x)):
            yield MapType.from_order(tree, x, order)
