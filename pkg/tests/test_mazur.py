"""Power-map tests: norm identities, continuity bounds, tiling transport."""

from __future__ import annotations

import json
import math

import numpy as np
import pytest

from normtile import (NormedSpace, TransportedTiling, build_body_tiling,
                      invert_modulus, mazur, mazur_inverse, standard_modulus,
                      transport_tiling, verify_moduli)
from normtile.sampling import ball_points
from normtile.tiles import BallTiling, Membership

L23 = NormedSpace("lp", p=2.0, dim=3)
L13 = NormedSpace("lp", p=1.0, dim=3)


def test_hand_values():
    r = 1.0 / math.sqrt(2.0)
    out = mazur(np.array([r, -r]))
    assert np.allclose(out, [0.5, -0.5], atol=1e-15)
    assert abs(np.abs(out).sum() - 1.0) < 1e-15
    out = mazur(np.array([0.6, 0.8]))
    assert np.allclose(out, [0.36, 0.64], atol=1e-15)
    assert np.all(mazur(np.zeros(4)) == 0.0)
    # antipodal unit pair: image gap 2 against bound 2*2
    gap = np.abs(mazur(np.eye(4)[0]) - mazur(-np.eye(4)[0])).sum()
    assert gap == 2.0 <= 4.0


def test_norm_identity_across_q():
    rng = np.random.default_rng(3)
    fs = rng.standard_normal((200, 5))
    for q in (1.0, 1.5, 3.0):
        lq = NormedSpace("lp", p=q, dim=5)
        l2 = NormedSpace("lp", p=2.0, dim=5)
        for f in fs[:50]:
            lhs = lq.norm(mazur(f, q))
            rhs = l2.norm(f) ** (2.0 / q)
            assert abs(lhs - rhs) < 1e-12 * max(1.0, rhs)


def test_roundtrip():
    fs = ball_points(NormedSpace("lp", p=2.0, dim=8), 10_000, 17)
    for q in (1.0, 3.0):
        back = mazur_inverse(mazur(fs, q), q)
        assert float(np.max(np.abs(back - fs))) <= 1e-12


def test_rejects_bad_exponent():
    with pytest.raises(ValueError):
        mazur(np.ones(2), q=0.5)
    with pytest.raises(ValueError):
        verify_moduli(q=2.0)


def test_moduli_report_clean():
    rep = verify_moduli(q=1.0, dim=8, n_pairs=20_000, seed=0)
    assert rep["forward_violations"] == 0
    assert rep["inverse_violations"] == 0
    assert rep["max_forward_ratio"] <= 1.0
    assert rep["max_inverse_ratio"] <= 1.0
    assert rep["roundtrip_max"] <= 1e-12
    assert rep["witnesses"] == []


def test_invert_modulus():
    assert invert_modulus(0.04) == 0.0004            # (0.04/2)^2, exact
    assert invert_modulus(3.0) == 1.5                # the linear branch caps
    # consistency: pushing the inverted radius back through omega returns rho
    for rho in (0.01, 0.2, 1.0):
        assert abs(standard_modulus(invert_modulus(rho)) - rho) < 1e-12
    # custom omega on the grid: identity keeps the radius
    assert abs(invert_modulus(0.25, omega=lambda d: d) - 0.25) < 1e-15
    with pytest.raises(ValueError, match="unsatisfiable"):
        invert_modulus(0.1, omega=lambda d: 5.0)
    with pytest.raises(ValueError):
        invert_modulus(0.0)


@pytest.fixture(scope="module")
def transported():
    src = build_body_tiling(L23, 0.75, seed=0, pool_size=8000,
                            cert_directions=512)
    tt = transport_tiling(src, q=1.0)
    xs = ball_points(L13, 3000, 5)
    return src, tt, xs, tt.classify_many(xs)


def test_transport_constants(transported):
    src, tt, _, _ = transported
    assert tt.space.p == 1.0 and tt.space.dim == 3
    assert abs(tt.rho_prime - (src.rho / 2.0) ** 2) < 1e-18
    assert abs(tt.outer_radius - 2.0 * math.sqrt(0.75)) < 1e-15


def test_transport_coverage_and_disjointness(transported):
    _, tt, xs, labels = transported
    assert int(np.sum(labels == -2)) == 0
    assert int(np.sum(labels == -1)) > 0
    counts = tt.strict_counts_many(xs)
    assert int(counts.max()) <= 1


def test_transport_pullback_consistency(transported):
    src, tt, xs, labels = transported
    back = mazur_inverse(xs[:200])
    assert np.array_equal(labels[:200], src.classify_many(back))
    # mapped centers are the forward images and stay in their tiles
    for t in [0, 5, -1]:
        c_src = src.tile_info(t).center
        assert np.allclose(tt.center(t), mazur(c_src), atol=1e-15)
        assert tt.membership(t, tt.center(t)) is not Membership.OUTSIDE


def test_transport_inner_probes(transported):
    _, tt, _, labels = transported
    seen = sorted({int(t) for t in labels if t >= -1})
    for t in seen[::60] + [-1]:
        rep = tt.inner_probe(t, n_points=48, seed=8)
        assert rep["violations"] == 0, rep


def test_transport_outer(transported):
    _, tt, xs, labels = transported
    rep = tt.outer_check(xs, labels)
    assert rep["violations"] == 0
    assert rep["max_center_distance"] <= tt.outer_radius


def test_transport_identity_when_q_is_two(transported):
    src, _, _, _ = transported
    ident = TransportedTiling(src, q=2.0, omega=lambda d: d)
    assert abs(ident.rho_prime - src.rho) < 1e-15
    assert abs(ident.outer_radius - src.eps) < 1e-15
    xs = ball_points(L23, 500, 23)
    assert np.array_equal(ident.classify_many(xs), src.classify_many(xs))


def test_transport_requires_l2_source():
    fake = BallTiling(NormedSpace("lp", p=3.0, dim=2), np.zeros((1, 2)), 1.0)
    with pytest.raises(ValueError, match="l2"):
        TransportedTiling(fake, q=1.0, rho_in=0.1, eps_in=0.5)


def test_transport_json_roundtrip(transported):
    _, tt, xs, labels = transported
    blob = json.loads(json.dumps(tt.to_json()))
    tt2 = TransportedTiling.from_json(blob)
    assert abs(tt2.rho_prime - tt.rho_prime) < 1e-18
    assert np.array_equal(tt2.classify_many(xs[:400]), labels[:400])
