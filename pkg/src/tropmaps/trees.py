"""Leaf-labeled trees: splits, enumeration, stabilization, JSON and DOT.

A tree on leaves ``1..n`` is stored as a set of internal vertices, internal
edges between them, and an attachment map sending every leaf label to the
vertex carrying it.  Leaves are half-edges, not vertices.

Stable trees are determined by their split sets, so equality and hashing of
:class:`MarkedTree` go through :meth:`MarkedTree.key`.
"""

from __future__ import annotations

import json
from collections import defaultdict
from dataclasses import dataclass
from functools import total_ordering
from typing import Iterable, Iterator, Mapping, Sequence

from .errors import InvalidEdgeError, InvalidInputError

Edge = tuple[int, int]


@total_ordering
@dataclass(frozen=True)
class Split:
    """A bipartition of ``{1..n}`` stored by the side that avoids label ``n``."""

    labels: tuple[int, ...]
    n: int

    def __post_init__(self):
        labels = tuple(sorted(self.labels))
        object.__setattr__(self, "labels", labels)
        if not labels or labels[0] < 1 or labels[-1] > self.n:
            raise InvalidInputError(f"split labels {labels} out of range 1..{self.n}")
        if len(set(labels)) != len(labels):
            raise InvalidInputError(f"repeated labels in split {labels}")
        if self.n in labels:
            raise InvalidInputError(
                f"split {labels} is not canonical: it contains label {self.n}"
            )
        if not 2 <= len(labels) <= self.n - 2:
            raise InvalidInputError(
                f"split {labels} violates 2 <= |I| <= n-2 for n={self.n}"
            )

    @classmethod
    def canonical(cls, side: Iterable[int], n: int) -> "Split":
        """Build the split with one side ``side``, whichever side it is."""
        side = frozenset(side)
        if n in side:
            side = frozenset(range(1, n + 1)) - side
        return cls(tuple(side), n)

    @property
    def complement(self) -> tuple[int, ...]:
        members = set(self.labels)
        return tuple(i for i in range(1, self.n + 1) if i not in members)

    def __contains__(self, label: int) -> bool:
        return label in self.labels

    def __iter__(self) -> Iterator[int]:
        return iter(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    def __lt__(self, other: "Split") -> bool:
        return (self.n, self.labels) < (other.n, other.labels)

    def compatible(self, other: "Split") -> bool:
        a, b = set(self.labels), set(other.labels)
        # both canonical sides avoid n, so the complement-complement case is impossible
        return a <= b or b <= a or not (a & b)

    def __str__(self) -> str:
        return "{" + ",".join(map(str, self.labels)) + "}"

    def display(self) -> str:
        """The smaller side (the canonical one on ties), e.g. ``{5,6}`` rather than ``{1,2,3,4}``."""
        side = self.complement if len(self.complement) < len(self.labels) else self.labels
        return "{" + ",".join(map(str, side)) + "}"


def all_splits(n: int) -> list[Split]:
    """Every canonical split of ``{1..n}``, sorted."""
    out = []
    rest = list(range(1, n))
    for mask in range(1, 1 << (n - 1)):
        side = [rest[i] for i in range(n - 1) if mask >> i & 1]
        if 2 <= len(side) <= n - 2:
            out.append(Split(tuple(side), n))
    return sorted(out)


class MarkedTree:
    """An n-marked tree (combinatorial type of a genus 0 tropical curve).

    Parameters
    ----------
    n : number of leaves, labeled ``1..n``
    vertices : internal vertex ids
    edges : internal edges as vertex-id pairs
    leaf_attach : leaf label -> vertex id
    stable : if true, every vertex must have valence at least 3
    """

    __slots__ = ("n", "vertices", "edges", "leaf_attach", "_adj", "_key")

    def __init__(
        self,
        n: int,
        vertices: Iterable[int],
        edges: Iterable[Sequence[int]],
        leaf_attach: Mapping[int, int],
        stable: bool = True,
    ):
        self.n = n
        self.vertices = tuple(sorted(vertices))
        self.edges = tuple(sorted(tuple(sorted(e)) for e in edges))
        self.leaf_attach = {int(k): v for k, v in sorted(leaf_attach.items())}
        self._adj = None
        self._key = None
        self._validate(stable)

    def _validate(self, stable: bool) -> None:
        vs = set(self.vertices)
        if len(vs) != len(self.vertices):
            raise InvalidInputError("duplicate vertex ids")
        if sorted(self.leaf_attach) != list(range(1, self.n + 1)):
            raise InvalidInputError(f"leaf labels must be exactly 1..{self.n}")
        if not set(self.leaf_attach.values()) <= vs:
            raise InvalidInputError("leaf attached to an unknown vertex")
        if len(set(self.edges)) != len(self.edges):
            raise InvalidInputError("repeated edge")
        for u, v in self.edges:
            if u == v or u not in vs or v not in vs:
                raise InvalidInputError(f"bad edge {(u, v)}")
        if len(self.edges) != len(vs) - 1:
            raise InvalidInputError("graph is not a tree (edge count)")
        seen = {self.vertices[0]} if self.vertices else set()
        stack = list(seen)
        adj = self.adjacency
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if seen != vs:
            raise InvalidInputError("graph is not connected")
        if stable:
            for v in self.vertices:
                if self.valence(v) < 3:
                    raise InvalidInputError(f"vertex {v} has valence {self.valence(v)} < 3")

    # -- structure -----------------------------------------------------------

    @property
    def adjacency(self) -> dict[int, list[int]]:
        if self._adj is None:
            adj = {v: [] for v in self.vertices}
            for u, v in self.edges:
                adj[u].append(v)
                adj[v].append(u)
            self._adj = adj
        return self._adj

    def leaves_at(self, v: int) -> tuple[int, ...]:
        return tuple(i for i, w in self.leaf_attach.items() if w == v)

    def valence(self, v: int) -> int:
        return len(self.adjacency[v]) + len(self.leaves_at(v))

    @property
    def is_stable(self) -> bool:
        return all(self.valence(v) >= 3 for v in self.vertices)

    @property
    def is_trivalent(self) -> bool:
        return all(self.valence(v) == 3 for v in self.vertices)

    def has_edge(self, e: Sequence[int]) -> bool:
        return tuple(sorted(e)) in set(self.edges)

    def side_leaves(self, e: Sequence[int], side: int) -> frozenset[int]:
        """Leaf labels in the component of ``t - e`` containing vertex ``side``."""
        e = tuple(sorted(e))
        if e not in set(self.edges):
            raise InvalidEdgeError(f"{e} is not an internal edge of this tree")
        if side not in e:
            raise InvalidEdgeError(f"vertex {side} is not an endpoint of {e}")
        other = e[0] if side == e[1] else e[1]
        adj = self.adjacency
        seen = {side, other}
        stack = [side]
        comp = [side]
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
                    comp.append(w)
        comp = set(comp)
        return frozenset(i for i, w in self.leaf_attach.items() if w in comp)

    def splits(self) -> frozenset[Split]:
        return frozenset(edge_split(self, e) for e in self.edges)

    def key(self):
        """Canonical identity: the split set for stable trees, structure otherwise."""
        if self._key is None:
            if self.is_stable:
                self._key = ("splits", self.n, tuple(sorted(self.splits())))
            else:
                self._key = ("raw", self.n, self.vertices, self.edges,
                             tuple(self.leaf_attach.items()))
        return self._key

    def __eq__(self, other) -> bool:
        return isinstance(other, MarkedTree) and self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        if self.is_stable:
            body = ";".join(",".join(map(str, s.labels)) for s in sorted(self.splits()))
            return f"MarkedTree(n={self.n}, splits=[{body}])"
        return (f"MarkedTree(n={self.n}, vertices={list(self.vertices)}, "
                f"edges={list(self.edges)}, leaves={self.leaf_attach})")

    def path(self, a: int, b: int) -> list[int]:
        """Vertex path from ``a`` to ``b`` (inclusive)."""
        parent = {a: None}
        stack = [a]
        while stack:
            u = stack.pop()
            if u == b:
                break
            for w in self.adjacency[u]:
                if w not in parent:
                    parent[w] = u
                    stack.append(w)
        out = [b]
        while out[-1] != a:
            out.append(parent[out[-1]])
        return out[::-1]

    def relabel_vertices(self, mapping: Mapping[int, int]) -> "MarkedTree":
        return MarkedTree(
            self.n,
            (mapping[v] for v in self.vertices),
            ((mapping[u], mapping[v]) for u, v in self.edges),
            {i: mapping[v] for i, v in self.leaf_attach.items()},
            stable=self.is_stable,
        )

    # -- serialization -------------------------------------------------------

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "vertices": list(self.vertices),
            "edges": [list(e) for e in self.edges],
            "leaves": {str(i): v for i, v in self.leaf_attach.items()},
        }

    @classmethod
    def from_json(cls, data: Mapping | str, stable: bool | None = None) -> "MarkedTree":
        if isinstance(data, str):
            data = json.loads(data)
        leaves = {int(k): int(v) for k, v in data["leaves"].items()}
        edges = [tuple(e) for e in data["edges"]]
        vertices = data.get("vertices")
        if vertices is None:
            vertices = sorted(set(leaves.values()) | {v for e in edges for v in e})
        tree = cls(int(data["n"]), vertices, edges, leaves, stable=False)
        if stable and not tree.is_stable:
            raise InvalidInputError("tree is not stable")
        return tree

    def to_dot(self, name: str = "tree") -> str:
        lines = [f"graph {name} {{", "  node [shape=point];"]
        for v in self.vertices:
            lines.append(f"  v{v};")
        for u, v in self.edges:
            lines.append(f"  v{u} -- v{v};")
        for i, v in self.leaf_attach.items():
            lines.append(f'  l{i} [shape=box, label="{i}"];')
            lines.append(f"  v{v} -- l{i};")
        lines.append("}")
        return "\n".join(lines) + "\n"


def edge_split(t: MarkedTree, e: Sequence[int]) -> Split:
    """Canonical split of the leaf labels obtained by deleting edge ``e``."""
    e = tuple(sorted(e))
    side = t.side_leaves(e, e[0])
    return Split.canonical(side, t.n)


def star_tree(n: int) -> MarkedTree:
    return MarkedTree(n, [0], [], {i: 0 for i in range(1, n + 1)})


def tree_from_splits(splits: Iterable[Split | Iterable[int]], n: int) -> MarkedTree:
    """Build the unique tree whose internal edges realize ``splits``.

    Splits are inserted one at a time by breaking the vertex at which the new
    split separates branches.  Raises if two splits are incompatible.
    """
    split_list = sorted(
        {s if isinstance(s, Split) else Split.canonical(s, n) for s in splits}
    )
    for i, a in enumerate(split_list):
        for b in split_list[i + 1:]:
            if not a.compatible(b):
                raise InvalidInputError(f"splits {a} and {b} are incompatible")
    attach = {i: 0 for i in range(1, n + 1)}
    adj: dict[int, set[int]] = {0: set()}
    next_id = 1

    def branches(v: int) -> list[tuple[object, frozenset[int]]]:
        # (handle, leaf set) for each half-edge at v; handle = ("leaf", i) or ("edge", w)
        out = [(("leaf", i), frozenset([i])) for i, w in attach.items() if w == v]
        for w in adj[v]:
            seen = {v, w}
            stack = [w]
            comp = {w}
            while stack:
                u = stack.pop()
                for z in adj[u]:
                    if z not in seen:
                        seen.add(z)
                        comp.add(z)
                        stack.append(z)
            out.append((("edge", w), frozenset(i for i, z in attach.items() if z in comp)))
        return out

    for s in split_list:
        target = frozenset(s.labels)
        placed = False
        for v in sorted(adj):
            brs = branches(v)
            inside = [h for h, leaves in brs if leaves <= target]
            union = frozenset().union(*(leaves for h, leaves in brs if leaves <= target))
            if union == target and 2 <= len(inside) < len(brs) - 1:
                u = next_id
                next_id += 1
                adj[u] = set()
                for kind, ref in inside:
                    if kind == "leaf":
                        attach[ref] = u
                    else:
                        adj[v].discard(ref)
                        adj[ref].discard(v)
                        adj[u].add(ref)
                        adj[ref].add(u)
                adj[u].add(v)
                adj[v].add(u)
                placed = True
                break
        if not placed:
            raise InvalidInputError(f"could not place split {s}")
    edges = {tuple(sorted((u, w))) for u in adj for w in adj[u]}
    return _canonical_ids(MarkedTree(n, adj.keys(), edges, attach))


def _canonical_ids(t: MarkedTree) -> MarkedTree:
    """Renumber vertices by their smallest leaf-side signature, for reproducible ids."""
    def sig(v):
        return (min(t.leaves_at(v), default=t.n + 1), v)
    order = sorted(t.vertices, key=sig)
    return t.relabel_vertices({v: i for i, v in enumerate(order)})


def parse_splits(text: str, n: int) -> list[Split]:
    """Parse ``"1,4;1,3,4;5,6"`` into canonical splits."""
    text = text.strip()
    if not text:
        return []
    out = []
    for chunk in text.split(";"):
        labels = [int(tok) for tok in chunk.split(",") if tok.strip()]
        out.append(Split.canonical(labels, n))
    return out


# -- enumeration -----------------------------------------------------------


def enumerate_split_sets(n: int, size: int | None = None) -> Iterator[tuple[Split, ...]]:
    """All sets of pairwise compatible splits (optionally of exactly ``size``).

    Each set is produced once, as an increasing tuple.
    """
    splits = all_splits(n)
    compat = [
        {j for j, b in enumerate(splits) if j > i and a.compatible(b)}
        for i, a in enumerate(splits)
    ]
    limit = n - 3 if size is None else size

    def extend(chosen: list[int], allowed: set[int]):
        if size is None or len(chosen) == size:
            yield tuple(splits[i] for i in chosen)
            if size is not None:
                return
        if len(chosen) >= limit:
            return
        for j in sorted(allowed):
            chosen.append(j)
            yield from extend(chosen, allowed & compat[j])
            chosen.pop()

    yield from extend([], set(range(len(splits))))


def enumerate_trees(
    n: int, trivalent_only: bool = False, num_vertices: int | None = None
) -> list[MarkedTree]:
    """Every stable n-leaf tree up to label-preserving isomorphism, exactly once.

    Trees are sorted lexicographically by their sorted split tuples.
    ``num_vertices`` restricts to trees with that many internal vertices.
    """
    if n < 3:
        raise InvalidInputError(f"need n >= 3 leaves, got {n}")
    if trivalent_only:
        size = n - 3
        if num_vertices is not None and num_vertices != n - 2:
            return []
    else:
        size = None if num_vertices is None else num_vertices - 1
        if size is not None and not 0 <= size <= n - 3:
            return []
    sets = sorted(enumerate_split_sets(n, size), key=lambda s: tuple(x.labels for x in s))
    return [tree_from_splits(s, n) for s in sets]


# -- stabilization ---------------------------------------------------------


def stabilize(t: MarkedTree) -> MarkedTree:
    """Remove 2-valent vertices, merging their edges; prune bare 1-valent vertices.

    Idempotent.  Returns a stable tree, or a single-vertex tree when there is
    nothing left to stabilize against.
    """
    adj = {v: set(ws) for v, ws in t.adjacency.items()}
    attach = dict(t.leaf_attach)
    leaves_at = defaultdict(set)
    for i, v in attach.items():
        leaves_at[v].add(i)

    def val(v):
        return len(adj[v]) + len(leaves_at[v])

    changed = True
    while changed and len(adj) > 1:
        changed = False
        for v in sorted(adj):
            if len(adj) == 1:
                break
            k = val(v)
            if k > 2:
                continue
            nbrs = sorted(adj[v])
            if k == 2 and len(nbrs) == 2:
                a, b = nbrs
                adj[a].discard(v)
                adj[b].discard(v)
                adj[a].add(b)
                adj[b].add(a)
            elif len(nbrs) == 1:
                # one edge plus at most one leaf: hand the leaf to the neighbour
                (a,) = nbrs
                adj[a].discard(v)
                for i in leaves_at[v]:
                    attach[i] = a
                    leaves_at[a].add(i)
            else:
                continue
            del adj[v]
            leaves_at.pop(v, None)
            changed = True
    edges = {tuple(sorted((u, w))) for u in adj for w in adj[u]}
    out = MarkedTree(t.n, adj.keys(), edges, attach, stable=False)
    return _canonical_ids(out) if out.is_stable else out


def forget_leaves(t: MarkedTree, keep: int) -> MarkedTree:
    """Drop leaves ``keep+1..n`` and stabilize."""
    attach = {i: v for i, v in t.leaf_attach.items() if i <= keep}
    raw = MarkedTree(keep, t.vertices, t.edges, attach, stable=False)
    return stabilize(raw)
