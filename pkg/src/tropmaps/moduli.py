"""Global fans: the tree fan and its refinement by relative map types.

``build_delta_n`` gives one cone per trivalent tree, spanned by the split
rays.  ``build_delta_rub`` replaces each tree cone by the cones of the
linear extensions of that tree's vertex order, and checks that adjacent
tree cones are cut the same way along their common faces.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Sequence

from .errors import (
    InternalConsistencyError,
    InvalidInputError,
    ResourceError,
    SearchFailureError,
)
from .lattice import exact
from .lattice.cones import Cone, Fan, cone_contains_cone, stellar_subdivide
from .lattice.vectors import AmbientVector, QuotientVector, split_ray
from .relmaps import (
    RamificationData,
    VertexClass,
    _ram,
    cone_of_order,
    linear_extensions,
    vertex_partial_order,
    zero_edge_splits,
)
from .trees import MarkedTree, Split, enumerate_trees

MAX_DELTA_N = 8
MAX_DELTA_RUB = 7


def tree_cone(t: MarkedTree) -> Cone:
    return Cone([split_ray(s, t.n) for s in sorted(t.splits())], n=t.n)


@dataclass
class ModuliFan:
    n: int
    fan: Fan
    x: RamificationData | None = None
    provenance: dict = field(default_factory=dict)  # cone key -> (tree, order or None)

    def tree_of(self, c: Cone) -> MarkedTree:
        return self.provenance[c.key][0]

    def cones_of_tree(self, t: MarkedTree) -> list[Cone]:
        return [c for c in self.fan.cones if self.provenance[c.key][0] == t]

    def candidate_pairs(self) -> list[tuple[int, int]]:
        """Pairs of maximal cones whose trees share a split.

        Cones over trees with no common split can only meet at the origin,
        given that the tree fan itself is a fan.
        """
        trees = [self.provenance[c.key][0] for c in self.fan.cones]
        splits = [t.splits() for t in trees]
        return [
            (i, j)
            for i, j in combinations(range(len(trees)), 2)
            if splits[i] & splits[j]
        ]

    def to_json(self) -> dict:
        out = self.fan.to_json()
        if self.x is not None:
            out["x"] = list(self.x.x)
        index = {r.coords: k for k, r in enumerate(self.fan.rays())}
        prov = []
        for c in self.fan.cones:
            t, order = self.provenance[c.key]
            prov.append({
                "cone": sorted(index[k] for k in c.ray_keys()),
                "tree": t.to_json(),
                "order": [list(b) for b in order] if order is not None else None,
            })
        out["provenance"] = prov
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def build_delta_n(n: int) -> ModuliFan:
    if not 4 <= n <= MAX_DELTA_N:
        raise ResourceError(
            f"the tree fan is built for 4 <= n <= {MAX_DELTA_N}; got n={n}"
        )
    cones, prov = [], {}
    for t in enumerate_trees(n, trivalent_only=True):
        c = tree_cone(t)
        cones.append(c)
        prov[c.key] = (t, None)
    return ModuliFan(n, Fan(cones, n=n), None, prov)


def subdivide_tree_cone(t: MarkedTree, x) -> list[tuple[tuple[VertexClass, ...], Cone]]:
    x = _ram(x)
    return [(o, cone_of_order(t, x, o)) for o in linear_extensions(vertex_partial_order(t, x))]


def build_delta_rub(x, trees: Iterable[MarkedTree] | None = None, check: bool = True) -> ModuliFan:
    """Refine every tree cone by its linear-extension cones.

    ``trees`` restricts the construction to some tree cones (used for single
    tree subdivision at larger n); the shared-face check then runs only among
    those.
    """
    x = _ram(x)
    n = x.n
    if trees is None:
        if not 4 <= n <= MAX_DELTA_RUB:
            raise ResourceError(
                f"the full refined fan is built for 4 <= n <= {MAX_DELTA_RUB}; got n={n}; "
                "pass a single tree to subdivide one cone"
            )
        trees = enumerate_trees(n, trivalent_only=True)
    cones, prov = [], {}
    per_tree = {}
    for t in trees:
        sub = subdivide_tree_cone(t, x)
        per_tree[t] = [c for _, c in sub]
        for order, c in sub:
            if c.key in prov:
                raise InternalConsistencyError("two map types produced the same cone")
            cones.append(c)
            prov[c.key] = (t, order)
    if check:
        shared_face_mismatches(per_tree, n, raise_on_first=True)
    return ModuliFan(n, Fan(cones, n=n), x, prov)


def _restriction(fine: list[Cone], face_splits: frozenset, n: int) -> frozenset:
    """Faces of ``fine`` that lie in the tree face spanned by ``face_splits`` and fill it."""
    face = Cone([split_ray(s, n) for s in sorted(face_splits)], n=n)
    inside = {}
    for c in fine:
        for r in c.rays:
            if r.coords not in inside:
                lam = face.coefficients(r)
                inside[r.coords] = lam is not None and all(v >= 0 for v in lam)
    out = set()
    k = len(face_splits)
    for c in fine:
        keys = [r.coords for r in c.rays if inside[r.coords]]
        if len(keys) == k:
            out.add(frozenset(keys))
    return frozenset(out)


def shared_face_mismatches(per_tree: dict, n: int, raise_on_first: bool = False) -> list:
    """Compare the induced subdivisions of every face shared by two tree cones."""
    by_face: dict[frozenset, list[MarkedTree]] = {}
    trees = list(per_tree)
    for a, b in combinations(trees, 2):
        common = a.splits() & b.splits()
        if common:
            by_face.setdefault(frozenset(common), [])
    for f in by_face:
        by_face[f] = [t for t in trees if f <= t.splits()]
    bad = []
    for f in sorted(by_face, key=lambda s: sorted(s)):
        ts = by_face[f]
        ref = _restriction(per_tree[ts[0]], f, n)
        for t in ts[1:]:
            if _restriction(per_tree[t], f, n) != ref:
                if raise_on_first:
                    raise InternalConsistencyError(
                        f"subdivisions disagree on the face {[str(s) for s in sorted(f)]}"
                    )
                bad.append((f, ts[0], t))
    return bad


# -- stellar factorization ------------------------------------------------


@dataclass(frozen=True)
class StellarStep:
    face: Cone
    weights: tuple[int, ...]
    ray: QuotientVector


def verify_stellar_factorization(x, t: MarkedTree, max_nodes: int = 200000) -> list[StellarStep]:
    """Find weighted stellar subdivisions of the tree cone reproducing the order cones."""
    x = _ram(x)
    if not t.is_trivalent:
        raise InvalidInputError("stellar factorization needs a trivalent tree")
    base = tree_cone(t)
    target = {c.key: c for _, c in subdivide_tree_cone(t, x)}
    old = base.key
    new_rays = {}
    for c in target.values():
        for r in c.rays:
            if r.coords not in old:
                new_rays.setdefault(r.coords, r)
    order = [new_rays[k] for k in sorted(new_rays)]
    target_keys = set(target)
    nodes = [0]

    def consistent(fan: Fan) -> bool:
        # subdivision only refines, so each target cone must still fit in one current cone
        return all(
            any(cone_contains_cone(c, tc) for c in fan.cones) for tc in target.values()
        )

    def step_for(fan: Fan, ray: QuotientVector):
        for c in fan.cones:
            lam = c.coefficients(ray)
            if lam is not None and all(v >= 0 for v in lam):
                support = [r for r, v in zip(c.rays, lam) if v > 0]
                ws = exact.primitive_integer([v for v in lam if v > 0])
                if len(support) < 2:
                    return None  # already a ray
                return Cone(support, n=fan.n), tuple(ws)
        return None

    def dfs(fan: Fan, remaining: list[QuotientVector], steps: list[StellarStep]):
        nodes[0] += 1
        if nodes[0] > max_nodes:
            raise SearchFailureError(f"stellar search exceeded {max_nodes} nodes")
        if not remaining:
            return list(steps) if {c.key for c in fan.cones} == target_keys else None
        for i, ray in enumerate(remaining):
            st = step_for(fan, ray)
            if st is None:
                continue
            face, ws = st
            nxt = stellar_subdivide(fan, face, list(ws))
            if not consistent(nxt):
                continue
            steps.append(StellarStep(face, ws, ray))
            got = dfs(nxt, remaining[:i] + remaining[i + 1:], steps)
            if got is not None:
                return got
            steps.pop()
        return None

    start = Fan([base], n=t.n)
    zero = zero_edge_splits(t, x)
    if zero and not new_rays and len(target) == 1:
        return []
    result = dfs(start, order, [])
    if result is None:
        raise SearchFailureError(
            f"no weighted stellar sequence reproduces the subdivision of tree {t!r}"
        )
    return result


def replay_stellar(t: MarkedTree, steps: Sequence[StellarStep]) -> Fan:
    fan = Fan([tree_cone(t)], n=t.n)
    for s in steps:
        fan = stellar_subdivide(fan, s.face, list(s.weights))
    return fan


def split_coefficients(t: MarkedTree, v: QuotientVector) -> dict[Split, Fraction]:
    """Coordinates of ``v`` in the split rays of ``t`` (None entries dropped)."""
    splits = sorted(t.splits())
    lam = tree_cone(t).coefficients(v)
    if lam is None:
        raise InvalidInputError("vector is outside the span of the tree cone")
    return {s: c for s, c in zip(splits, lam) if c}


# -- parametrized cone data ------------------------------------------------


@dataclass(frozen=True)
class ParametrizedCone:
    """Cone of parametrized maps of one type, with the origin block on one side of 0.

    ``rays`` pairs a tree-fan vector with the position coordinate of the
    origin block.
    """

    tree: MarkedTree
    order: tuple[VertexClass, ...]
    origin_block: int
    sign: int
    rays: tuple[tuple[QuotientVector, int], ...]

    def to_json(self) -> dict:
        return {
            "tree": self.tree.to_json(),
            "order": [list(b) for b in self.order],
            "origin_block": self.origin_block,
            "sign": self.sign,
            "rays": [{"vector": list(v.representative.coords), "position": p} for v, p in self.rays],
        }


def parametrized_cones(x, t: MarkedTree) -> list[ParametrizedCone]:
    """Per-type cone data for parametrized maps: one cone per (order, origin block, sign)."""
    x = _ram(x)
    out = []
    zero = QuotientVector(AmbientVector.zero(t.n))
    for order, c in subdivide_tree_cone(t, x):
        for b in range(len(order)):
            for sign in (1, -1):
                rays = [(r, 0) for r in c.rays] + [(zero, sign)]
                out.append(ParametrizedCone(t, order, b, sign, tuple(rays)))
    return out
