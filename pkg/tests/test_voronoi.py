"""Star-shaped corrected Voronoi tiles."""

import numpy as np
import pytest

from normtile.nets import greedy_separated_net
from normtile.sampling import ball_points, grid_candidates
from normtile.spaces import NormedSpace
from normtile.tiles import Membership
from normtile.voronoi import StarVoronoiTiling


def two_center_tiling():
    sp = NormedSpace("lp", 2, 2)
    net = greedy_separated_net(sp, np.array([[0.0, 0.0], [2.0, 0.0]]), 2.0)
    return StarVoronoiTiling(sp, net)


def lattice_tiling(p=2.0, half=2, sep=2.0, dim=2):
    sp = NormedSpace("lp", p, dim)
    pts = grid_candidates([(-half * sep / 2, half * sep / 2)] * dim, 0.5)
    net = greedy_separated_net(sp, pts, sep)
    return StarVoronoiTiling(sp, net)


def test_equidistant_point_goes_to_smaller_index():
    t = two_center_tiling()
    x = np.array([1.0, 5.0])
    d = t.distances(x)
    assert d[0] == pytest.approx(d[1])
    assert t.classify(x) == 0
    assert t.membership(0, x) == Membership.INSIDE
    assert t.membership(1, x) == Membership.INSIDE


def test_boundary_point_inside_both_strict_in_neither():
    t = two_center_tiling()
    x = np.array([1.0, 0.0])
    assert t.membership(0, x) == Membership.INSIDE
    assert t.membership(1, x) == Membership.INSIDE
    assert t.strict_tile_ids(x) == []


def test_interior_point_strict_in_exactly_one():
    t = two_center_tiling()
    x = np.array([0.2, 0.1])
    assert t.membership(0, x) == Membership.STRICT
    assert t.membership(1, x) == Membership.OUTSIDE
    assert t.strict_tile_ids(x) == [0]
    assert t.strict_counts_many(x[None])[0] == 1


def test_membership_many_matches_scalar():
    t = lattice_tiling()
    xs = ball_points(t.space, 300, seed=13, radius=3.0)
    for i in (0, 1, len(t.net.centers) - 1):
        batch = t.membership_many(i, xs)
        for x, want in zip(xs[:40], batch[:40]):
            assert t.membership(i, x) == Membership(int(want))


def test_classify_agrees_with_brute_force():
    t = lattice_tiling(p=3.0)
    xs = ball_points(t.space, 500, seed=4, radius=2.5)
    labels = t.classify_many(xs)
    for x, l in zip(xs, labels):
        assert t.brute_force_classify(x) == int(l)


def test_lone_center_is_all_of_space():
    sp = NormedSpace("lp", 2, 2)
    net = greedy_separated_net(sp, np.zeros((1, 2)), 1.0)
    t = StarVoronoiTiling(sp, net)
    assert t.membership(0, np.array([100.0, -3.0])) == Membership.STRICT


def test_empty_net_rejected():
    sp = NormedSpace("lp", 2, 2)
    net = greedy_separated_net(sp, np.zeros((0, 2)), 1.0)
    with pytest.raises(ValueError):
        StarVoronoiTiling(sp, net)


def test_inner_and_outer_radii():
    t = lattice_tiling()
    xs = ball_points(t.space, 2000, seed=5, radius=3.0)
    labels = t.classify_many(xs)
    centers = t.net.centers[labels]
    gaps = t.space.norm_many(xs - centers)
    # maximality of the lattice net over its own region keeps every sample
    # within the separation of its center
    assert gaps.max() <= t.net.separation + 1e-9
    for i in range(len(t.net.centers)):
        assert t.inner_probe(i, 0.999 * t.inner_radius, n_directions=200, seed=6)


def test_starshape_probes_clean():
    t = lattice_tiling(p=3.0, half=1)
    for i in range(len(t.net.centers)):
        assert t.starshape_probe(i, n_samples=30, segment_count=30, seed=i) == []


def test_tiles_metadata():
    t = two_center_tiling()
    infos = t.tiles
    assert len(infos) == 2
    assert infos[0].kind == "star-voronoi"
    assert infos[1].inner_radius == pytest.approx(1.0)
    assert infos[1].outer_radius == pytest.approx(2.0)
