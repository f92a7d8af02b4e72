"""Simplicial cones and fans in the quotient by the lineality space.

Cones store primitive ray classes.  A cone is identified by the set of its
rays, so two cones built from rays that agree up to positive scaling modulo
lineality compare equal.  Fans keep only maximal cones and produce faces on
demand.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Iterable, Mapping, Sequence

from ..errors import (
    InvalidFaceError,
    InvalidInputError,
    InvalidWeightError,
    UnsupportedError,
)
from . import exact
from .vectors import (
    AmbientVector,
    QuotientVector,
    integer_lattice_coords,
    primitive,
)

RayKey = tuple[int, ...]


def _as_class(v) -> QuotientVector:
    if isinstance(v, QuotientVector):
        return v
    if isinstance(v, AmbientVector):
        return QuotientVector(v)
    raise InvalidInputError(f"expected a vector, got {type(v).__name__}")


class Cone:
    """A rational polyhedral cone given by ray generators.

    Rays are replaced by their primitive classes on construction.  With
    ``simplicial=True`` the rays must be linearly independent modulo
    lineality.
    """

    __slots__ = ("n", "rays", "simplicial", "_key")

    def __init__(self, rays: Iterable, n: int | None = None, simplicial: bool = True):
        prim = [primitive(_as_class(r)) for r in rays]
        if not prim and n is None:
            raise InvalidInputError("the zero cone needs an explicit n")
        self.n = prim[0].n if prim else n
        if any(r.n != self.n for r in prim):
            raise InvalidInputError("rays live on different label counts")
        keys = [r.coords for r in prim]
        if len(set(keys)) != len(keys):
            raise InvalidInputError("cone rays must be pairwise non-parallel")
        self.rays: tuple[QuotientVector, ...] = tuple(prim)
        self.simplicial = simplicial
        if simplicial and prim and exact.rank([list(k) for k in keys]) != len(keys):
            raise InvalidInputError("rays of a simplicial cone must be independent")
        self._key = frozenset(keys)

    @property
    def key(self) -> frozenset[RayKey]:
        return self._key

    @property
    def dim(self) -> int:
        return len(self.rays)

    def __eq__(self, other) -> bool:
        return isinstance(other, Cone) and self.n == other.n and self._key == other._key

    def __hash__(self) -> int:
        return hash((self.n, self._key))

    def __repr__(self) -> str:
        return f"Cone(dim={self.dim}, rays={[list(r.representative.coords) for r in self.rays]})"

    def ray_keys(self) -> list[RayKey]:
        return [r.coords for r in self.rays]

    def has_face(self, other: "Cone") -> bool:
        """For simplicial cones, faces are exactly the ray subsets."""
        return other._key <= self._key

    def faces(self, dim: int) -> list["Cone"]:
        return [Cone(sub, n=self.n) for sub in combinations(self.rays, dim)]

    def face(self, keys: Iterable[RayKey]) -> "Cone":
        keys = set(keys)
        return Cone([r for r in self.rays if r.coords in keys], n=self.n)

    def lattice_index(self) -> int:
        """Index of the span of the rays inside the lattice points of their span."""
        return exact.gcd_maximal_minors([integer_lattice_coords(r) for r in self.rays])

    def coefficients(self, v) -> list[Fraction] | None:
        """Coordinates of ``v`` in the ray basis, or None if ``v`` is outside the span."""
        self._need_simplicial()
        v = _as_class(v)
        if not self.rays:
            return [] if v.is_zero() else None
        cols = exact.transpose([list(r.coords) for r in self.rays])
        return exact.solve(cols, list(v.coords))

    def _need_simplicial(self) -> None:
        if not self.simplicial:
            raise UnsupportedError("operation only implemented for simplicial cones")


def cone_contains(c: Cone, v) -> bool:
    lam = c.coefficients(v)
    return lam is not None and all(x >= 0 for x in lam)


def cone_contains_cone(outer: Cone, inner: Cone) -> bool:
    return all(cone_contains(outer, r) for r in inner.rays)


# -- fans -------------------------------------------------------------------


@dataclass
class Fan:
    """A fan given by its maximal cones, optionally weighted."""

    cones: list[Cone]
    weights: dict[frozenset, int] | None = None
    n: int | None = None
    _faces: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        uniq: dict[frozenset, Cone] = {}
        for c in self.cones:
            uniq.setdefault(c.key, c)
        cones = list(uniq.values())
        # drop listed cones that are faces of other listed cones
        cones = [c for c in cones if not any(c.key < d.key for d in cones)]
        if self.n is None:
            if not cones:
                raise InvalidInputError("an empty fan needs an explicit n")
            self.n = cones[0].n
        self.cones = sorted(cones, key=_cone_sort_key)
        if self.weights is not None:
            missing = [c for c in self.cones if c.key not in self.weights]
            if missing:
                raise InvalidWeightError("every maximal cone needs a weight")
            if any(w <= 0 for w in self.weights.values()):
                raise InvalidWeightError("weights must be positive integers")
            self.weights = {c.key: int(self.weights[c.key]) for c in self.cones}

    @property
    def maximal_cones(self) -> list[Cone]:
        return self.cones

    def weight(self, c: Cone) -> int:
        return 1 if self.weights is None else self.weights[c.key]

    def rays(self) -> list[QuotientVector]:
        seen: dict[RayKey, QuotientVector] = {}
        for c in self.cones:
            for r in c.rays:
                seen.setdefault(r.coords, r)
        return [seen[k] for k in sorted(seen)]

    def dim(self) -> int:
        return max((c.dim for c in self.cones), default=0)

    def is_pure(self) -> bool:
        return len({c.dim for c in self.cones}) <= 1

    def faces(self, dim: int) -> list[Cone]:
        if dim not in self._faces:
            out: dict[frozenset, Cone] = {}
            for c in self.cones:
                if c.dim < dim:
                    continue
                for sub in combinations(c.rays, dim):
                    key = frozenset(r.coords for r in sub)
                    if key not in out:
                        out[key] = Cone(sub, n=self.n)
            self._faces[dim] = sorted(out.values(), key=_cone_sort_key)
        return self._faces[dim]

    def cones_containing(self, face: Cone) -> list[Cone]:
        return [c for c in self.cones if face.key <= c.key]

    def has_cone(self, c: Cone) -> bool:
        return any(c.key <= d.key for d in self.cones)

    # -- serialization ------------------------------------------------------

    def to_json(self) -> dict:
        rays = self.rays()
        index = {r.coords: i for i, r in enumerate(rays)}
        out = {
            "n": self.n,
            "rays": [list(r.representative.coords) for r in rays],
            "cones": [sorted(index[k] for k in c.ray_keys()) for c in self.cones],
            "weights": [self.weight(c) for c in self.cones],
        }
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data: Mapping | str) -> "Fan":
        if isinstance(data, str):
            data = json.loads(data)
        try:
            n = int(data["n"])
            rays = [AmbientVector(n, tuple(int(x) for x in r)) for r in data["rays"]]
            cones = [Cone([rays[i] for i in idx], n=n) for idx in data["cones"]]
        except (KeyError, TypeError, IndexError) as exc:
            raise InvalidInputError(f"malformed fan JSON: {exc}") from exc
        weights = None
        if data.get("weights") is not None:
            if len(data["weights"]) != len(cones):
                raise InvalidInputError("fan JSON: one weight per cone expected")
            weights = {}
            for c, w in zip(cones, data["weights"]):
                weights[c.key] = weights.get(c.key, 0) + int(w)
        return cls(cones, weights=weights, n=n)


def _cone_sort_key(c: Cone):
    return (c.dim, sorted(c.key))


# -- stellar subdivision ----------------------------------------------------


def stellar_ray(face: Cone, w: Sequence[int]) -> QuotientVector:
    if len(w) != face.dim:
        raise InvalidWeightError(f"need {face.dim} weights, got {len(w)}")
    if any((not isinstance(x, int)) or x <= 0 for x in w):
        raise InvalidWeightError("stellar weights must be positive integers")
    total = AmbientVector.zero(face.n)
    for wi, r in zip(w, face.rays):
        total = total + r.representative * wi
    return primitive(total)


def stellar_subdivide(f: Fan, face: Cone, w: Sequence[int]) -> Fan:
    """Insert the ray ``sum w_i v_i`` into ``face`` and re-cone every cone containing it."""
    if face.dim == 0:
        raise InvalidFaceError("cannot subdivide at the zero cone")
    if not f.has_cone(face):
        raise InvalidFaceError("face is not a cone of the fan")
    star = stellar_ray(face, w)
    out: list[Cone] = []
    weights = {} if f.weights is not None else None
    for c in f.cones:
        if not face.key <= c.key:
            out.append(c)
            if weights is not None:
                weights[c.key] = f.weights[c.key]
            continue
        others = [r for r in c.rays if r.coords not in face.key]
        for drop in face.rays:
            kept = [r for r in face.rays if r is not drop]
            new = Cone([star, *kept, *others], n=f.n)
            out.append(new)
            if weights is not None:
                weights[new.key] = f.weights[c.key]
    return Fan(out, weights=weights, n=f.n)


# -- subdivision and fan checks ---------------------------------------------


@dataclass
class SubdivisionReport:
    ok: bool
    reason: str = ""
    witness: list[Fraction] | None = None  # coarse-basis coordinates of an uncovered point

    def __bool__(self) -> bool:
        return self.ok


def subdivision_report(fine: Fan | Sequence[Cone], coarse: Cone) -> SubdivisionReport:
    cones = fine.cones if isinstance(fine, Fan) else list(fine)
    for c in [*cones, coarse]:
        c._need_simplicial()
    d = coarse.dim
    if not cones:
        return SubdivisionReport(d == 0, "no cones")
    mats = []
    for c in cones:
        if c.dim != d:
            return SubdivisionReport(False, f"maximal cone of dimension {c.dim}, expected {d}")
        cols = []
        for r in c.rays:
            lam = coarse.coefficients(r)
            if lam is None or any(x < 0 for x in lam):
                return SubdivisionReport(False, f"ray {list(r.representative.coords)} outside the coarse cone")
            cols.append(lam)
        mats.append(cols)
    for i, j in combinations(range(len(mats)), 2):
        if _interiors_meet(mats[i], mats[j]):
            return SubdivisionReport(False, f"cones {i} and {j} overlap")
    # normalized volume on the slice sum(coarse coords) = 1
    vol = Fraction(0)
    for cols in mats:
        sums = [sum(col) for col in cols]
        prod = Fraction(1)
        for s in sums:
            prod *= s
        vol += abs(exact.det(exact.transpose(cols))) / prod
    if vol == 1:
        return SubdivisionReport(True)
    return SubdivisionReport(False, f"covered volume {vol} < 1", _uncovered_point(mats, d))


def is_subdivision(fine: Fan | Sequence[Cone], coarse: Cone) -> bool:
    return subdivision_report(fine, coarse).ok


def _interiors_meet(a: list[list[Fraction]], b: list[list[Fraction]]) -> bool:
    # sum alpha_i a_i = sum beta_j b_j with alpha, beta >= 1 (shift alpha = 1 + s)
    d = len(a[0])
    ka, kb = len(a), len(b)
    rows, rhs = [], []
    for t in range(d):
        row = [a[i][t] for i in range(ka)] + [-b[j][t] for j in range(kb)]
        rows.append(row)
        rhs.append(-sum(a[i][t] for i in range(ka)) + sum(b[j][t] for j in range(kb)))
    return exact.feasible(rows, rhs, ka + kb) is not None


def _contained(cols: list[list[Fraction]], p: Sequence[Fraction]) -> bool:
    lam = exact.solve(exact.transpose(cols), list(p))
    return lam is not None and all(x >= 0 for x in lam)


def _uncovered_point(mats: list[list[list[Fraction]]], d: int, depth: int = 12):
    """Search for a coarse point outside every fine cone, stepping across facets."""
    def covered(p):
        return any(_contained(cols, p) for cols in mats)

    centre = [Fraction(1, d)] * d
    if not covered(centre):
        return centre
    for cols in mats:
        for drop in range(d):
            facet = [cols[i] for i in range(d) if i != drop]
            bary = [sum(col[t] for col in facet) / len(facet) for t in range(d)]
            if any(x == 0 for x in bary):
                continue  # facet lies on the coarse boundary
            # direction away from the dropped ray, measured in the cone's own basis
            inner = cols[drop]
            for m in range(1, depth + 1):
                eps = Fraction(1, 2 ** m)
                p = [b - eps * (x - b) for b, x in zip(bary, inner)]
                if any(x < 0 for x in p):
                    continue
                if not covered(p):
                    return p
    return None


def is_fan(f: Fan, pairs: Iterable[tuple[int, int]] | None = None) -> bool:
    """Check that maximal cones pairwise meet in a common face."""
    return not fan_violations(f, pairs, first_only=True)


def fan_violations(
    f: Fan, pairs: Iterable[tuple[int, int]] | None = None, first_only: bool = False
) -> list[tuple[int, int]]:
    cones = f.cones
    for c in cones:
        c._need_simplicial()
    coords = [[list(r.coords) for r in c.rays] for c in cones]
    bad = []
    it = pairs if pairs is not None else combinations(range(len(cones)), 2)
    for i, j in it:
        if _bad_intersection(cones[i], cones[j], coords[i], coords[j]):
            bad.append((i, j))
            if first_only:
                break
    return bad


def _bad_intersection(a: Cone, b: Cone, ca, cb) -> bool:
    common = a.key & b.key
    a_only = [v for v in ca if tuple(v) not in common]
    b_only = [v for v in cb if tuple(v) not in common]
    if not a_only or not b_only:
        # one cone is a face of the other
        return False
    shared = [v for v in ca if tuple(v) in common]
    allv = shared + a_only + b_only
    if exact.rank(allv) == len(allv):
        return False
    # x = sum alpha a = sum beta b with the non-shared alpha summing to 1
    d = len(ca[0])
    na, nb = len(ca), len(cb)
    rows = []
    rhs = []
    for t in range(d):
        rows.append([v[t] for v in ca] + [-v[t] for v in cb])
        rhs.append(0)
    rows.append([int(tuple(v) not in common) for v in ca] + [0] * nb)
    rhs.append(1)
    return exact.feasible(rows, rhs, na + nb) is not None


# -- balancing --------------------------------------------------------------


def relative_normal(sigma: Cone, tau: Cone) -> list[Fraction]:
    """Primitive generator of ``sigma`` modulo ``span(tau)``, in lattice coordinates.

    Returns a representative vector; only its class modulo ``span(tau)`` matters.
    """
    extra = [r for r in sigma.rays if r.coords not in tau.key]
    if len(extra) != 1:
        raise InvalidInputError("tau must be a facet of sigma")
    g_tau = tau.lattice_index() if tau.rays else 1
    g_sigma = sigma.lattice_index()
    r = integer_lattice_coords(extra[0])
    return [Fraction(x * g_tau, g_sigma) for x in r]


def balancing_sum(f: Fan, tau: Cone) -> list[Fraction]:
    adj = [c for c in f.cones if tau.key < c.key and c.dim == tau.dim + 1]
    if not adj:
        if not any(tau.key <= c.key for c in f.cones):
            raise InvalidInputError("tau is not a face of the fan")
    total = None
    for s in adj:
        u = relative_normal(s, tau)
        w = f.weight(s)
        total = [w * x for x in u] if total is None else [t + w * x for t, x in zip(total, u)]
    return total or []


def balancing_check(f: Fan, tau: Cone) -> bool:
    if not any(tau.key <= c.key for c in f.cones):
        raise InvalidInputError("tau is not a face of the fan")
    if tau.dim != f.dim() - 1:
        raise InvalidInputError(f"tau has dimension {tau.dim}, expected {f.dim() - 1}")
    total = balancing_sum(f, tau)
    if not any(total):
        return True
    if not tau.rays:
        return False
    cols = exact.transpose([list(integer_lattice_coords(r)) for r in tau.rays])
    return exact.solve(cols, total) is not None


def balancing_failures(f: Fan) -> list[Cone]:
    if not f.is_pure():
        raise InvalidInputError("balancing needs a pure-dimensional fan")
    d = f.dim()
    return [tau for tau in f.faces(d - 1) if not balancing_check(f, tau)]
