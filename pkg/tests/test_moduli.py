import json

import pytest

from tropmaps.errors import InternalConsistencyError, InvalidInputError, ResourceError
from tropmaps.lattice.cones import Cone, Fan, cone_contains, is_subdivision, stellar_subdivide
from tropmaps.lattice.vectors import same_ray, split_ray
from tropmaps.moduli import (
    build_delta_n,
    build_delta_rub,
    parametrized_cones,
    replay_stellar,
    shared_face_mismatches,
    split_coefficients,
    subdivide_tree_cone,
    tree_cone,
    verify_stellar_factorization,
)
from tropmaps.relmaps import RamificationData, count_linear_extensions, vertex_partial_order
from tropmaps.trees import Split, enumerate_trees

from conftest import X6, tree


def v(labels, n=6):
    return split_ray(Split.canonical(labels, n), n)


R1 = v((1, 3, 4)) + v((5, 6))
R2 = v((1, 4)) * 2 + v((1, 3, 4)) * 3 + v((5, 6)) * 3
R3 = v((1, 4)) * 2 + v((1, 3, 4)) * 3


@pytest.mark.parametrize("n,rays,cones", [(4, 3, 3), (5, 10, 15), (6, 25, 105)])
def test_delta_n_counts(n, rays, cones):
    f = build_delta_n(n).fan
    assert len(f.rays()) == rays
    assert len(f.cones) == cones
    assert {c.dim for c in f.cones} == {n - 3}


def test_delta_n_guard():
    with pytest.raises(ResourceError):
        build_delta_n(9)
    with pytest.raises(ResourceError):
        build_delta_n(3)


def test_delta_rub_guard():
    with pytest.raises(ResourceError):
        build_delta_rub((1, 1, 1, 1, 1, 1, 1, -7))
    # a single tree is fine at larger n
    t = enumerate_trees(8, trivalent_only=True)[0]
    mf = build_delta_rub((1, 1, 1, 1, 1, 1, 1, -7), trees=[t])
    assert len(mf.fan.cones) == count_linear_extensions(vertex_partial_order(t, (1, 1, 1, 1, 1, 1, 1, -7)))


def test_alpha_subdivision(alpha, x6):
    fine = [c for _, c in subdivide_tree_cone(alpha, x6)]
    assert len(fine) == 5
    old = tree_cone(alpha).key
    new = {r.coords: r for c in fine for r in c.rays if r.coords not in old}
    assert len(new) == 3
    for want in (R1, R2, R3):
        assert sum(same_ray(r, want) for r in new.values()) == 1
    assert is_subdivision(fine, tree_cone(alpha))


def test_neighbour_subdivision_and_shared_face(alpha, neighbour, x6):
    fine = [c for _, c in subdivide_tree_cone(neighbour, x6)]
    assert len(fine) == 3
    assert is_subdivision(fine, tree_cone(neighbour))
    mf = build_delta_rub(x6, trees=[alpha, neighbour])
    assert len(mf.fan.cones) == 8
    per_tree = {t: mf.cones_of_tree(t) for t in (alpha, neighbour)}
    assert shared_face_mismatches(per_tree, 6) == []


def test_shared_face_mismatch_detected(alpha, neighbour, x6):
    per_tree = {
        alpha: [c for _, c in subdivide_tree_cone(alpha, x6)],
        neighbour: [tree_cone(neighbour)],
    }
    bad = shared_face_mismatches(per_tree, 6)
    assert bad
    assert bad[0][0] == frozenset({Split((1, 3, 4), 6), Split.canonical((5, 6), 6)})
    with pytest.raises(InternalConsistencyError):
        shared_face_mismatches(per_tree, 6, raise_on_first=True)


@pytest.mark.parametrize("x", [(2, 1, -2, -1), (1, 1, -1, -1), (3, 1, -2, -1, -1), (2, -1, 1, -1, -1), X6,
                               (1, 1, 1, 1, -2, -2)])
def test_counting_identity_and_refinement(x):
    mf = build_delta_rub(x)
    x = RamificationData(x)
    trees = enumerate_trees(x.n, trivalent_only=True)
    assert len(mf.fan.cones) == sum(count_linear_extensions(vertex_partial_order(t, x)) for t in trees)
    for t in trees:
        cones = mf.cones_of_tree(t)
        outer = tree_cone(t)
        assert all(cone_contains(outer, r) for c in cones for r in c.rays)
        assert is_subdivision(cones, outer)


def test_moduli_json(x6, alpha):
    mf = build_delta_rub(x6, trees=[alpha])
    data = json.loads(mf.dumps())
    assert {"n", "rays", "cones", "weights", "provenance", "x"} <= set(data)
    assert data["x"] == list(X6)
    assert len(data["provenance"]) == 5
    entry = data["provenance"][0]
    assert set(entry) == {"cone", "tree", "order"}
    assert mf.dumps() == build_delta_rub(x6, trees=[alpha]).dumps()


# -- stellar factorization ----------------------------------------------------------


def _keys(fan):
    return {c.key for c in fan.cones}


def test_stellar_sequence_for_alpha(alpha, x6):
    steps = verify_stellar_factorization(x6, alpha)
    assert len(steps) == 3
    target = {c.key for _, c in subdivide_tree_cone(alpha, x6)}
    assert _keys(replay_stellar(alpha, steps)) == target
    added = [s.ray for s in steps]
    assert same_ray(added[0], R1)
    assert {same_ray(added[1], R3), same_ray(added[2], R2)} == {True}


def test_published_stellar_sequence_replays(alpha, x6):
    fan = Fan([tree_cone(alpha)])
    fan = stellar_subdivide(fan, Cone([v((1, 3, 4)), v((5, 6))]), [1, 1])
    fan = stellar_subdivide(fan, Cone([v((1, 4)), v((1, 3, 4))]), [2, 3])
    fan = stellar_subdivide(fan, Cone([v((1, 4)), R1]), [2, 3])
    assert _keys(fan) == {c.key for _, c in subdivide_tree_cone(alpha, x6)}
    # R2 - 2 v_{1,4} = 3 R1
    diff = R2 - v((1, 4)) * 2
    assert same_ray(diff, R1)
    coeffs = split_coefficients(alpha, diff)
    assert coeffs == {Split((1, 3, 4), 6): 3, Split.canonical((5, 6), 6): 3}


def test_stellar_neighbour_two_steps(neighbour, x6):
    steps = verify_stellar_factorization(x6, neighbour)
    assert len(steps) == 2
    assert _keys(replay_stellar(neighbour, steps)) == {c.key for _, c in subdivide_tree_cone(neighbour, x6)}


def test_stellar_total_order_is_empty():
    x = RamificationData((2, 1, -2, -1))
    t = tree("1,2", 4)
    assert verify_stellar_factorization(x, t) == []


@pytest.mark.parametrize("x", [(3, 1, -2, -1, -1), (1, 1, 1, -1, -2), X6])
def test_stellar_replay_matches_subdivision_everywhere(x):
    x = RamificationData(x)
    for t in enumerate_trees(x.n, trivalent_only=True):
        steps = verify_stellar_factorization(x, t)
        assert _keys(replay_stellar(t, steps)) == {c.key for _, c in subdivide_tree_cone(t, x)}


def test_stellar_needs_trivalent(x6):
    with pytest.raises(InvalidInputError):
        verify_stellar_factorization(x6, tree("1,4;5,6"))


def test_split_coefficients_outside_span(alpha):
    with pytest.raises(InvalidInputError):
        split_coefficients(alpha, v((3, 4)))


# -- parametrized cones ------------------------------------------------------------


def test_parametrized_cones(alpha, x6):
    pcs = parametrized_cones(x6, alpha)
    # five orders, four blocks each, two signs
    assert len(pcs) == 5 * 4 * 2
    pc = pcs[0]
    assert len(pc.rays) == 4
    assert {p for _, p in pc.rays} == {0, pc.sign}
    data = json.loads(json.dumps(pc.to_json()))
    assert set(data) == {"tree", "order", "origin_block", "sign", "rays"}
