"""Body peeling: tangent slices, the layered assembly, first-hit tiles."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from normtile import (ConvexBody, LayeredTiling, NormedSpace,
                      build_body_tiling, build_slice, peel_layer)
from normtile.body import layer_count
from normtile.sampling import ball_points, sphere_points
from normtile.spaces import modulus_of_convexity
from normtile.tiles import Membership

L22 = NormedSpace("lp", p=2.0, dim=2)
L23 = NormedSpace("lp", p=2.0, dim=3)

# delta = 0.19 makes sqrt(1 - delta) = 0.9 exactly; the slice numbers below
# are hand evaluations of the three formulas at eta = 1.
DELTA = 0.19
R_SLICE = 0.0729 / 1.71       # 0.0426315789...
Y0_NORM = 1.458 / 1.71        # 0.8526315789...


def test_slice_formulas_frozen():
    s = build_slice(ConvexBody.ball(L22), np.array([1.0, 0.0]), DELTA)
    assert abs(s.r_slice - R_SLICE) < 1e-15
    assert abs(np.hypot(*s.center) - Y0_NORM) < 1e-15
    assert s.lam == 1.0 - DELTA
    # tangency: the slice ball touches B(0, 1-delta) from outside
    assert abs((np.hypot(*s.center) - s.r_slice) - 0.81) < 1e-12
    # symmetry: a seed on the first axis keeps everything there
    assert s.center[1] == 0.0
    assert np.allclose(s.coeffs, [1.0, 0.0], atol=1e-14)


def test_slice_thin_body_uses_eta():
    # eta below 1-delta caps the tangent ball but not the tangency level
    s = build_slice(ConvexBody.ball(L22, eta=0.05), np.array([0.0, 1.0]), DELTA)
    assert abs(s.r_slice - 0.05 * 0.09 / 0.95) < 1e-15
    assert abs((np.hypot(*s.center) - s.r_slice) - 0.81) < 1e-12


def test_slice_contains_seed_and_its_ball():
    rng = np.random.default_rng(6)
    body = ConvexBody.ball(L23)
    x = np.array([0.6, 0.55, -0.4])
    assert L23.norm(x) > math.sqrt(1 - DELTA)
    s = build_slice(body, x, DELTA)
    assert s.value(x) >= s.lam + 1e-12
    probes = s.center[None, :] + s.r_slice * sphere_points(L23, 128, 9)
    vals = probes @ s.coeffs
    assert np.all(vals >= s.lam - 1e-9)            # ball inside the cap
    norms = L23.norm_many(probes)
    assert np.all(norms <= 1.0 + 1e-9)             # and inside the body
    assert np.all(norms >= 1.0 - DELTA - 1e-9)     # missing the inner ball


def test_slice_rejects_shallow_point():
    with pytest.raises(ValueError, match="sqrt"):
        build_slice(ConvexBody.ball(L22), np.array([0.5, 0.0]), DELTA)


def test_body_constraint_validation():
    body = ConvexBody.ball(L23)
    with pytest.raises(ValueError, match="unit dual"):
        body.with_constraint(np.array([2.0, 0.0, 0.0]), 0.5)
    with pytest.raises(ValueError, match="inner radius"):
        ConvexBody(L23, 0.0)


def test_ray_reach_is_exact():
    body = ConvexBody.ball(L23).with_constraint(np.array([1.0, 0, 0]), 0.5)
    dirs = np.array([[1.0, 0, 0], [-1.0, 0, 0], [0, 1.0, 0]])
    assert np.allclose(body.ray_reach(dirs), [0.5, 1.0, 1.0])
    diag = np.array([1.0, 1.0, 0]) / math.sqrt(2)
    # constraint cut: t * diag[0] = 0.5  ->  t = 0.5 * sqrt(2)
    assert abs(body.ray_reach(diag[None])[0] - 0.5 * math.sqrt(2)) < 1e-12


def test_peel_layer_guard_and_tangency():
    sl, core = peel_layer(ConvexBody.ball(L22), DELTA, seed=4,
                          pool_size=4000, cert_directions=512)
    assert len(sl) >= 10
    for s in sl:
        assert abs(L22.norm(s.center) - s.r_slice - 0.81) < 1e-12
    reach = core.ray_reach(sphere_points(L22, 2048, 77))
    assert float(reach.max()) <= 0.9 + 1e-9
    # every peeled-away pool point lands in some slice
    pts = ball_points(L22, 3000, 21)
    hot = pts[L22.norm_many(pts) > 0.9]
    hits = hot @ np.stack([s.coeffs for s in sl]).T >= np.array([s.lam for s in sl])
    assert hits.any(axis=1).all()


def test_peel_degenerate_body_inside_guard():
    small = ConvexBody.ball(L23, radius=0.85)
    sl, core = peel_layer(small, DELTA, seed=1, pool_size=2000,
                          cert_directions=256)
    assert sl == []
    assert core is small


def test_peel_sparse_pool_diagnostic():
    with pytest.raises(RuntimeError, match="pool too sparse"):
        peel_layer(ConvexBody.ball(L23), DELTA, pool=np.zeros((1, 3)),
                   seed=1, augment=False, cert_directions=128)


def test_layer_count_edges():
    delta = float(modulus_of_convexity(L23, 0.75))
    gamma = math.sqrt(1.0 - delta)
    n = layer_count(0.75, gamma)
    assert n == 8
    assert gamma ** 8 <= 0.75 < gamma ** 7
    assert layer_count(0.6, 0.5) == 1          # one layer already suffices
    assert layer_count(0.25, 0.5) == 2


@pytest.fixture(scope="module")
def built():
    lt = build_body_tiling(L23, 0.75, seed=0, pool_size=20_000,
                           cert_directions=1024)
    xs = ball_points(L23, 6000, 42)
    return lt, xs, lt.classify_many(xs)


def test_build_constants(built):
    lt, _, _ = built
    delta = float(modulus_of_convexity(L23, 0.75))
    assert abs(lt.delta - delta) < 1e-15
    assert abs(delta - (1.0 - math.sqrt(1.0 - 0.375 ** 2))) < 1e-15
    assert lt.n_layers == 8
    g = lt.gamma
    r_terms = [r * g ** (k - 1) for k, r in lt.layer_r.items()]
    assert abs(lt.rho - min([1.0, g ** 9] + r_terms)) < 1e-15
    assert lt.rho == min(r_terms)              # the slice term binds here
    assert abs(lt.core_outer - g ** 8) < 1e-15
    # layer tags increase along creation order (flat scan = creation order)
    layers = [s.layer for s in lt.slices]
    assert layers == sorted(layers)
    assert set(layers) == set(range(1, 9))


def test_build_coverage_and_strictness(built):
    lt, xs, labels = built
    assert int(np.sum(labels == -2)) == 0
    assert int(np.sum(labels == -1)) > 0       # the core is hit
    assert len(np.unique(labels[labels >= 0])) > 200
    counts = lt.strict_counts_many(xs)
    assert int(counts.max()) <= 1
    assert float(counts.mean()) > 0.99         # boundaries are null sets


def test_build_classify_matches_flat_first_hit(built):
    lt, xs, labels = built
    funcs = np.stack([s.coeffs for s in lt.slices])
    lams = np.array([s.lam for s in lt.slices])
    for i in range(0, len(xs), 97):
        vals = funcs @ xs[i]
        hit = np.flatnonzero(vals >= lams)
        expect = int(hit[0]) if len(hit) else -1
        assert labels[i] == expect
        assert lt.membership(labels[i], xs[i]) is not Membership.OUTSIDE


def test_build_tangency_identity(built):
    lt, _, _ = built
    assert float(lt.tangency_residuals().max()) < 1e-9


def test_build_inner_probes_at_rho(built):
    lt, _, labels = built
    seen = sorted({int(t) for t in labels if t >= 0})
    for t in seen[::35] + [-1]:
        rep = lt.inner_probe(t, radius=lt.rho, n_points=64, seed=11)
        assert rep["violations"] == 0, rep
    # the per-slice claimed radius (larger than rho) also holds
    for t in seen[:3] + seen[-3:]:
        rep = lt.inner_probe(t, n_points=64, seed=12)
        assert rep["violations"] == 0, rep


def test_build_outer_distances(built):
    lt, xs, labels = built
    rep = lt.outer_check(xs, labels)
    assert rep["violations"] == 0
    assert rep["max_center_distance"] <= 0.75
    assert rep["core_max_norm"] <= lt.core_outer + 5e-3  # ray-probe slack


def test_build_sampled_slice_diameters(built):
    lt, xs, labels = built
    for t in np.unique(labels[labels >= 0]):
        pts = xs[labels == t]
        if len(pts) < 2:
            continue
        gaps = pts[:, None, :] - pts[None, :, :]
        diam = float(np.sqrt((gaps * gaps).sum(-1)).max())
        k = lt.slices[t].layer
        assert diam <= 0.75 * lt.gamma ** (k - 1) + 1e-6, (t, k, diam)


def test_membership_boundary_point(built):
    lt, _, _ = built
    s = lt.slices[0]
    # slide the tangent center down onto the cutting hyperplane (l2: the
    # coefficient vector is the unit normal)
    xb = s.center - (s.value(s.center) - s.lam) * s.coeffs
    assert abs(s.value(xb) - s.lam) < 1e-12
    assert lt.membership(0, xb) is Membership.INSIDE
    assert lt.classify(xb) == 0                # first-hit tie goes to the slice
    assert int(lt.strict_counts_many(xb[None])[0]) == 0


def test_core_contains_origin(built):
    lt, _, _ = built
    assert lt.membership(-1, np.zeros(3)) is Membership.STRICT
    assert lt.classify(np.zeros(3)) == -1
    info = lt.tile_info(-1)
    assert info.kind == "body-core"
    assert abs(info.inner_radius - lt.core_inner) < 1e-15


def test_classify_rejects_outside_points(built):
    lt, _, _ = built
    with pytest.raises(ValueError, match="not in the body"):
        lt.classify(np.array([2.0, 0.0, 0.0]))
    assert lt.classify_many(np.array([[2.0, 0.0, 0.0]]))[0] == -2


def test_json_roundtrip(built):
    lt, xs, labels = built
    lt2 = LayeredTiling.from_json(json.loads(json.dumps(lt.to_json())))
    assert lt2.n_slices == lt.n_slices
    assert abs(lt2.rho - lt.rho) < 1e-15
    assert np.array_equal(lt2.classify_many(xs[:800]), labels[:800])
    assert lt2.membership(-1, np.zeros(3)) is Membership.STRICT
