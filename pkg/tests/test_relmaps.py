import json
from functools import lru_cache
from itertools import permutations

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from tropmaps.errors import InvalidEdgeError, InvalidInputError
from tropmaps.lattice.cones import cone_contains
from tropmaps.lattice.vectors import same_ray, split_ray
from tropmaps.moduli import tree_cone
from tropmaps.relmaps import (
    LineGraph,
    MapType,
    Poset,
    RamificationData,
    branch_graph,
    cone_of_order,
    count_linear_extensions,
    edge_weights,
    expansion_factor,
    gap_ray,
    gap_ray_coefficients,
    leaf_expansion,
    linear_extensions,
    map_types,
    net_flux,
    vertex_partial_order,
    zero_edge_splits,
)
from tropmaps.trees import Split, enumerate_trees, star_tree

from conftest import tree


def v(labels, n=6):
    return split_ray(Split.canonical(labels, n), n)


def named(t):
    """Vertex id -> the adjacent marking in {2,3,4,5}."""
    return {t.leaf_attach[i]: i for i in (2, 3, 4, 5)}


def order_by_names(t, names):
    ids = {i: v for v, i in named(t).items()}
    return [(ids[i],) for i in names]


R1 = v((1, 3, 4)) + v((5, 6))
R2 = v((1, 4)) * 2 + v((1, 3, 4)) * 3 + v((5, 6)) * 3
R3 = v((1, 4)) * 2 + v((1, 3, 4)) * 3


# -- ramification data ----------------------------------------------------------


def test_ramification_validation():
    with pytest.raises(InvalidInputError):
        RamificationData((1, -1))
    with pytest.raises(InvalidInputError):
        RamificationData((1, 0, -1))
    with pytest.raises(InvalidInputError):
        RamificationData((1, 2, -2))
    with pytest.raises(InvalidInputError):
        RamificationData((1.0, 1, -2))
    x = RamificationData.parse("-4,-4,5,1,1,1")
    assert (x.n, x.r, x.d) == (6, 4, 8)
    assert x.positive == (5, 1, 1, 1) and x.negative == (4, 4)
    assert str(-x) == "4,4,-5,-1,-1,-1"
    assert x[7] == 0


# -- flux and weights ---------------------------------------------------------------


def test_net_flux_examples(alpha, x6):
    at = alpha.leaf_attach
    a, c, b, d = at[1], at[3], at[2], at[5]
    assert net_flux(alpha, (a, c), x6, a) == -3
    assert net_flux(alpha, (a, c), x6, c) == 3
    assert net_flux(alpha, (b, d), x6, d) == 2
    with pytest.raises(InvalidEdgeError):
        net_flux(alpha, (a, d), x6, a)
    with pytest.raises(InvalidEdgeError):
        net_flux(alpha, 1, x6, a)


def test_expansion_factors(alpha, x6):
    at = alpha.leaf_attach
    a, c, b, d = at[1], at[3], at[2], at[5]
    assert expansion_factor(alpha, (a, c), x6) == 3
    assert expansion_factor(alpha, (c, b), x6) == 2
    assert expansion_factor(alpha, (b, d), x6) == 2
    t = tree("1,3", 4)
    assert expansion_factor(t, t.edges[0], (2, 1, -2, -1)) == 0
    assert leaf_expansion(x6, 3) == 5


def test_extra_markings_carry_no_flux(x6):
    t = tree("1,4;1,3,4;5,6;5,6,7", 7)
    at = t.leaf_attach
    e = tuple(sorted((at[7], at[5])))
    assert net_flux(t, e, x6, at[5]) == 2
    # forgetting marking 7 merges that edge with its neighbour, which has the same weight
    other = [f for f in t.edges if at[7] in f and f != e][0]
    assert edge_weights(t, x6)[e] == edge_weights(t, x6)[other] == 2


# -- partial orders ------------------------------------------------------------------


def named_relations(t, x):
    p = vertex_partial_order(t, x)
    nm = named(t)
    return {(nm[a[0]], nm[b[0]]) for a, b in p.relations}


def test_alpha_relations(alpha, x6):
    assert named_relations(alpha, x6) == {(4, 3), (2, 3), (2, 5)}
    exts = linear_extensions(vertex_partial_order(alpha, x6))
    nm = named(alpha)
    got = {tuple(nm[c[0]] for c in o) for o in exts}
    assert got == {(4, 2, 3, 5), (2, 4, 3, 5), (4, 2, 5, 3), (2, 4, 5, 3), (2, 5, 4, 3)}


def test_neighbour_relations(neighbour, x6):
    p = vertex_partial_order(neighbour, x6)
    assert len(p.relations) == 3
    assert len(linear_extensions(p)) == 3
    # shape R < Q < P with R < S
    later = {}
    for a, b in p.relations:
        later.setdefault(a, set()).add(b)
    (r,) = [a for a in later if len(later[a]) == 2]
    (q,) = [b for b in later[r] if b in later]
    assert len(later[q]) == 1


def test_star_tree_order():
    t = star_tree(4)
    p = vertex_partial_order(t, (1, 1, -1, -1))
    assert p.relations == frozenset() and len(p.elements) == 1


def test_linear_extension_counts():
    rel = {(4, 3), (2, 3), (2, 5)}
    assert len(linear_extensions(Poset((2, 3, 4, 5), frozenset(rel)))) == 5
    assert count_linear_extensions(Poset(tuple(range(5)), frozenset())) == 120
    assert linear_extensions(Poset(("a", "b", "c"), frozenset({("a", "b"), ("b", "c")}))) == [("a", "b", "c")]


def brute_extensions(p):
    return sorted(
        o for o in permutations(p.elements)
        if all(o.index(a) < o.index(b) for a, b in p.relations)
    )


@lru_cache(maxsize=None)
def _trivalent(n):
    return tuple(enumerate_trees(n, trivalent_only=True))


@st.composite
def tree_and_x(draw, max_n=6):
    n = draw(st.integers(4, max_n))
    head = draw(st.lists(st.integers(-4, 4).filter(bool), min_size=n - 1, max_size=n - 1))
    last = -sum(head)
    assume(last != 0)
    t = draw(st.sampled_from(_trivalent(n)))
    return t, RamificationData(tuple(head + [last]))


@given(tree_and_x())
def test_extensions_match_brute_force(data):
    t, x = data
    p = vertex_partial_order(t, x)
    assert sorted(linear_extensions(p)) == brute_extensions(p)
    assert count_linear_extensions(p) == len(brute_extensions(p)) >= 1


@given(tree_and_x())
def test_negating_x_reverses_orders(data):
    t, x = data
    fwd = {tuple(o) for o in linear_extensions(vertex_partial_order(t, x))}
    back = {tuple(reversed(o)) for o in linear_extensions(vertex_partial_order(t, -x))}
    assert fwd == back


@given(tree_and_x())
def test_order_cones_lie_in_tree_cone(data):
    t, x = data
    outer = tree_cone(t)
    for o in linear_extensions(vertex_partial_order(t, x)):
        c = cone_of_order(t, x, o)
        assert c.dim == t.n - 3
        for r in c.rays:
            assert cone_contains(outer, r)
        for j in range(1, len(o)):
            coeffs = gap_ray_coefficients(t, x, o, j)
            assert all(w > 0 for w in coeffs.values())


@given(tree_and_x(), st.randoms(use_true_random=False))
def test_gap_ray_ignores_vertex_ids(data, rnd):
    t, x = data
    ids = list(t.vertices)
    new = [i + 50 for i in ids]
    rnd.shuffle(new)
    mapping = dict(zip(ids, new))
    u = t.relabel_vertices(mapping)
    for o in linear_extensions(vertex_partial_order(t, x)):
        o2 = [tuple(mapping[i] for i in c) for c in o]
        for j in range(1, len(o)):
            assert gap_ray(t, x, o, j) == gap_ray(u, x, o2, j)


# -- gap rays and cones --------------------------------------------------------------


def test_gap_rays_of_alpha(alpha, x6):
    o2 = order_by_names(alpha, (2, 4, 3, 5))
    o3 = order_by_names(alpha, (4, 2, 5, 3))
    assert same_ray(gap_ray(alpha, x6, o2, 1), R1)
    assert same_ray(gap_ray(alpha, x6, o2, 2), R2)
    assert same_ray(gap_ray(alpha, x6, o3, 3), R3)
    coeffs = gap_ray_coefficients(alpha, x6, o2, 2)
    assert {s.display(): c for s, c in coeffs.items()} == {"{1,4}": 2, "{1,3,4}": 3, "{5,6}": 3}


def test_cones_of_orders(alpha, x6):
    o2 = order_by_names(alpha, (2, 4, 3, 5))
    o4 = order_by_names(alpha, (2, 4, 5, 3))
    c2 = cone_of_order(alpha, x6, o2)
    c4 = cone_of_order(alpha, x6, o4)
    expect2 = [R1, R2, v((5, 6))]
    expect4 = [R1, R2, R3]
    for got, want in ((c2, expect2), (c4, expect4)):
        assert len(got.rays) == 3
        for w in want:
            assert any(same_ray(r, w) for r in got.rays)


def test_bad_orders_rejected(alpha, x6):
    with pytest.raises(InvalidInputError):
        gap_ray(alpha, x6, order_by_names(alpha, (3, 4, 2, 5)), 1)
    with pytest.raises(InvalidInputError):
        gap_ray(alpha, x6, order_by_names(alpha, (2, 4, 3, 5)), 4)


def test_zero_weight_edges_merge_classes():
    x = RamificationData((2, 1, -2, -1))
    t = tree("1,3", 4)
    assert zero_edge_splits(t, x) == [Split((1, 3), 4)]
    p = vertex_partial_order(t, x)
    assert len(p.elements) == 1
    (o,) = linear_extensions(p)
    c = cone_of_order(t, x, o)
    assert c.dim == 1 and same_ray(c.rays[0], split_ray(Split((1, 3), 4), 4))


def test_star_cone_is_zero():
    t = star_tree(4)
    x = (1, 1, -1, -1)
    (o,) = linear_extensions(vertex_partial_order(t, x))
    assert cone_of_order(t, x, o).dim == 0


# -- map types -----------------------------------------------------------------------


def test_map_type_line_graphs(alpha, x6):
    mt = MapType.from_order(alpha, x6, order_by_names(alpha, (4, 2, 3, 5)))
    g = branch_graph(mt)
    assert g.m == 4 and g.labels == (1, 1, 1, 1)
    single = MapType.from_order(star_tree(4), (1, 1, -1, -1), [star_tree(4).vertices])
    assert branch_graph(single) == LineGraph(1, (1,))
    with pytest.raises(InvalidInputError):
        LineGraph(0, ())


def test_map_type_json_roundtrip(alpha, x6):
    mt = MapType.from_order(alpha, x6, order_by_names(alpha, (2, 4, 3, 5)))
    data = json.loads(json.dumps(mt.to_json()))
    assert data["mode"] == "rubber" and set(data["weights"]) == {"e0", "e1", "e2"}
    back = MapType.from_json(data)
    assert back.order == mt.order and back.weights == mt.weights and back.source == alpha


def test_map_type_validation(alpha, x6):
    with pytest.raises(InvalidInputError):
        MapType.from_order(alpha, x6, order_by_names(alpha, (3, 4, 2, 5)))
    with pytest.raises(InvalidInputError):
        MapType.from_order(alpha, x6, order_by_names(alpha, (2, 4, 3, 5)), mode="parametrized")
    ok = MapType.from_order(alpha, x6, order_by_names(alpha, (2, 4, 3, 5)), mode="parametrized",
                            origin_block=1)
    assert ok.to_json()["origin_block"] == 1


def test_map_types_count(x6):
    ts = enumerate_trees(6, trivalent_only=True)
    total = sum(count_linear_extensions(vertex_partial_order(t, x6)) for t in ts)
    assert sum(1 for _ in map_types(x6)) == total

