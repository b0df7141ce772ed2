"""Sphere slice tilings: radii identities, centers, classification, probes."""

from __future__ import annotations

import numpy as np
import pytest

from normtile import (
    FunctionalFamily,
    Membership,
    NormedSpace,
    SphereTiling,
    build_sphere_tiling,
    modulus_of_convexity,
    sphere_constants,
)
from normtile.sampling import sphere_points


def make_orthonormal_tiling(cut=0.9, threshold=0.95, dim=4):
    space = NormedSpace("lp", p=2.0, dim=dim)
    eye = np.eye(dim)
    family = FunctionalFamily(space, threshold, eye.copy(), eye.copy())
    return SphereTiling(space, 0.8, family, cut, seed=5)


def test_radii_closed_forms():
    # frozen by hand from the two formulas: cut 0.9, threshold 0.95 give
    # height = 1.8/1.95 = 12/13 and cap = 0.9*0.05/1.95 = 3/130
    st = make_orthonormal_tiling()
    assert abs(st.center_height - 12.0 / 13.0) < 1e-12
    assert abs(st.cap_radius - 3.0 / 130.0) < 1e-12
    assert abs(st.cap_radius - (st.center_height - st.cut)) < 1e-12
    assert abs(st.center_height - 2.0 * st.cut / (1.0 + st.family.parameter)) < 1e-12
    # the prefix ceiling at centers is exactly the cut minus the cap radius
    assert abs(st.family.parameter * st.center_height - (st.cut - st.cap_radius)) < 1e-12


def test_constants_require_sane_modulus():
    with pytest.raises(ValueError):
        sphere_constants(0.0)
    with pytest.raises(ValueError):
        sphere_constants(0.9)


def test_orthonormal_exact_kernel_center():
    st = make_orthonormal_tiling()
    data = st.center_data(2)
    assert data["exact"] is True
    assert data["residual"] == 0.0
    h = st.center((2, 2))
    height = st.center_height
    # pinned functional value, unit norm, and the euclidean closed form for
    # the kernel leg: ||h - height*e_2|| = sqrt(1 - height^2)
    assert abs(h[1] - height) < 1e-12
    assert abs(h[0]) < 1e-15
    assert abs(np.linalg.norm(h) - 1.0) < 1e-12
    assert abs(np.linalg.norm(h - height * np.eye(4)[1]) - np.sqrt(1 - height**2)) < 1e-12
    assert np.allclose(st.center((2, 1)), -h)
    # the center is strictly interior to its own tile and outside tile 1
    assert st.membership((2, 2), h) == Membership.STRICT
    assert st.membership((1, 2), h) == Membership.OUTSIDE
    assert st.classify(h) == (2, 2)


def test_orthonormal_classification_rules():
    st = make_orthonormal_tiling()
    e1 = np.eye(4)[0]
    assert st.classify(e1) == (1, 2)
    assert st.classify(-e1) == (1, 1)
    # boundary tie: first functional value exactly at the cut goes positive
    x = np.array([0.9, np.sqrt(0.19), 0.0, 0.0])
    assert st.classify(x) == (1, 2)
    assert st.brute_force_classify(x) == (1, 2)
    # a direction no functional reaches: diagnostic, not a wrong answer
    far = np.full(4, 0.5)
    assert tuple(st.classify_many(far[None])[0]) == (0, 0)
    assert st.brute_force_classify(far) == (0, 0)
    with pytest.raises(ValueError):
        st.classify(far)


def test_kernel_death_falls_back_to_ring_search():
    st = make_orthonormal_tiling()
    data = st.center_data(4)  # four functionals exhaust dimension 4
    assert data["exact"] is False
    h = data["point"]
    assert abs(h[3] - st.center_height) < 1e-9
    assert abs(np.linalg.norm(h) - 1.0) < 1e-9
    # any ring point works here: the kernel leg is far shorter than the
    # prefix ceiling, so the search must come back with zero residual
    assert data["residual"] == 0.0
    probe = st.inner_probe((4, 2), n_points=128, seed=1)
    assert probe["certified"] is True
    assert probe["kept"] >= 100
    assert probe["violations"] == 0
    assert probe["max_kept_distance"] <= st.cap_radius


def test_membership_rejects_points_off_the_sphere():
    st = make_orthonormal_tiling()
    with pytest.raises(ValueError):
        st.membership((1, 2), 0.5 * np.eye(4)[0])
    with pytest.raises(ValueError):
        st.classify_many(np.array([[0.3, 0.0, 0.0, 0.0]]))


def test_build_rejects_bad_inputs():
    space = NormedSpace("lp", p=2.0, dim=3)
    with pytest.raises(ValueError):
        build_sphere_tiling(space, 1.5, candidates=100, seed=0)
    with pytest.raises(ValueError):
        build_sphere_tiling(NormedSpace("sup", dim=3), 0.5, candidates=100, seed=0)


@pytest.fixture(scope="module")
def built3():
    space = NormedSpace("lp", p=2.0, dim=3)
    st = build_sphere_tiling(space, 0.8, candidates=20000, seed=2)
    samples = sphere_points(space, 2000, seed=7)
    labels = st.classify_many(samples)
    return st, samples, labels


def test_build_l2_constants_and_coverage(built3):
    st, samples, labels = built3
    delta = modulus_of_convexity(st.space, 0.4).value
    assert abs(st.delta - delta) < 1e-15
    assert abs(st.cut - (1.0 - 4.0 * delta / 3.0)) < 1e-12
    assert abs(st.family.parameter - (1.0 - 2.0 * delta / 3.0)) < 1e-12
    assert abs(st.cap_radius - (st.center_height - st.cut)) < 1e-12
    assert len(st.family) > 50
    # the family covers the stream at its threshold, and the cut slack makes
    # classification total off the stream as well
    assert np.all(labels[:, 0] >= 1)
    assert np.all((labels[:, 1] == 1) | (labels[:, 1] == 2))


def test_build_l2_classify_matches_brute_force(built3):
    st, samples, labels = built3
    for i in range(300):
        assert st.brute_force_classify(samples[i]) == (labels[i, 0], labels[i, 1])


def test_build_l2_strictness(built3):
    st, samples, labels = built3
    counts = st.strict_counts_many(samples)
    assert counts.max() <= 1
    assert counts.mean() > 0.9  # boundary grazes are rare
    # cross-check the counter against per-tile strict membership over the
    # observed tiles for a handful of samples
    observed = st.observed_tiles(labels)
    for i in range(0, 50):
        hits = sum(
            1
            for tile in observed
            if st.membership(tile, samples[i]) == Membership.STRICT
        )
        assert hits == counts[i]


def test_build_l2_membership_consistent(built3):
    st, samples, labels = built3
    rng = np.random.default_rng(11)
    for i in rng.choice(len(samples), size=100, replace=False):
        tile = (int(labels[i, 0]), int(labels[i, 1]))
        assert st.membership(tile, samples[i]) != Membership.OUTSIDE


def test_build_l2_center_invariants_and_caps(built3):
    st, samples, labels = built3
    observed = st.observed_tiles(labels)
    chosen = observed[:8] + observed[-4:]
    for j, p in chosen:
        info = st.tile_info((j, p))
        h = info.center
        val = float(st.family.functionals[j - 1] @ h)
        want = st.center_height if p == 2 else -st.center_height
        assert abs(val - want) < 1e-9
        assert abs(st.space.norm(h) - 1.0) < 1e-9
        assert info.extra["anchor_gap"] <= 0.5 * st.eps + 1e-9
        if info.extra["kernel_exact"]:
            assert j <= 2
            assert info.inner_radius == st.cap_radius
        probe = st.inner_probe((j, p), n_points=200, seed=13 + j)
        if probe["certified"]:
            assert probe["violations"] == 0


def test_build_l2_outer_distances(built3):
    st, samples, labels = built3
    report = st.outer_check(samples, labels)
    assert report["unclassified"] == 0
    assert report["center_violations"] == 0
    assert report["anchor_violations"] == 0
    assert report["max_center_distance"] <= st.eps + 1e-9
    assert report["max_sample_anchor"] <= 0.5 * st.eps + 1e-9


def test_build_l2_family_validation_diagnostics(built3):
    st, _, _ = built3
    shortfalls = st.validate_family(n_probes=500, seed=21)
    # off-stream probes may dip below the construction threshold by the
    # stream resolution, but never below the classification cut
    for _, achieved in shortfalls:
        assert achieved >= st.cut


def test_build_l4_plane():
    space = NormedSpace("lp", p=4.0, dim=2)
    st = build_sphere_tiling(space, 0.6, candidates=4000, seed=3)
    samples = sphere_points(space, 500, seed=9)
    labels = st.classify_many(samples)
    assert np.all(labels[:, 0] >= 1)
    for i in range(100):
        assert st.brute_force_classify(samples[i]) == (labels[i, 0], labels[i, 1])
    assert st.strict_counts_many(samples).max() <= 1
    # the first index is always exactly constructed; deeper ones fall back
    # to the ring search with recorded residuals and honest cap shrinkage
    first = st.tile_info((1, 2))
    assert first.extra["kernel_exact"] is True
    assert first.inner_radius == st.cap_radius
    assert abs(st.space.norm(first.center) - 1.0) < 1e-9
    probe = st.inner_probe((1, 2), n_points=150, seed=4)
    assert probe["certified"] and probe["violations"] == 0
    for j, p in st.observed_tiles(labels)[:6]:
        info = st.tile_info((j, p))
        assert 0.0 <= info.inner_radius <= st.cap_radius + 1e-15
        assert abs(st.space.norm(info.center) - 1.0) < 1e-9
        res = st.inner_probe((j, p), n_points=100, seed=5)
        if res["certified"]:
            assert res["violations"] == 0


def test_cap_tracks_modulus_asymptotically():
    # with the cut and threshold at the third points of the slack interval,
    # cap = cut*(1-threshold)/(1+threshold) behaves like modulus/3 as the
    # diameter target shrinks; pin the ratio into a band around 1/3
    space = NormedSpace("lp", p=2.0, dim=2)
    for eps in (0.1, 0.05):
        delta = modulus_of_convexity(space, eps / 2.0).value
        _, _, _, cap = sphere_constants(delta)
        assert 0.25 < cap / delta < 0.45
