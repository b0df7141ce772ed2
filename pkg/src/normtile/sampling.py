"""Seeded sampling of lp balls and spheres, plus deterministic candidate
streams (lattices and low-discrepancy sequences) for the greedy
constructions.

Ball sampling uses the p-generalized-normal representation: with g_i drawn
from the density proportional to exp(-|t|^p) and E an independent Exp(1),
g / (sum |g_i|^p + E)^{1/p} is uniform in the unit lp ball, and g / ||g||_p
lies on the sphere (uniform for p = 2, cone measure otherwise).
"""

from __future__ import annotations

import numpy as np
from scipy.special import gammaincinv
from scipy.stats import qmc


def _gen_normal_rng(rng, n, dim, p):
    """n samples from the p-generalized normal density, via Gamma."""
    if p == 2.0:
        return rng.standard_normal((n, dim))
    mag = rng.gamma(1.0 / p, 1.0, size=(n, dim)) ** (1.0 / p)
    return np.where(rng.random((n, dim)) < 0.5, -mag, mag)


def ball_points(space, n, seed, radius=1.0, center=None):
    """n points covering the ball of the space norm, seeded.

    Uniform in the lp ball (the renormed-lp ball is the same set); uniform in
    the box for the sup norm.
    """
    rng = np.random.default_rng(seed)
    if space.norm_kind == "sup":
        pts = rng.uniform(-1.0, 1.0, size=(n, space.dim))
    else:
        p = space.p
        g = _gen_normal_rng(rng, n, space.dim, p)
        e = rng.exponential(1.0, size=n)
        denom = (np.sum(np.abs(g) ** p, axis=1) + e) ** (1.0 / p)
        pts = g / denom[:, None]
    pts = pts * radius
    if center is not None:
        pts = pts + np.asarray(center, dtype=float)
    return pts


def sphere_points(space, n, seed):
    """n points on the unit sphere of the space norm, seeded.

    Exactly uniform for l2; cone measure (full support, deterministic in the
    seed) for the other norms, which is all the probing here needs.
    """
    rng = np.random.default_rng(seed)
    if space.norm_kind == "sup":
        pts = rng.uniform(-1.0, 1.0, size=(n, space.dim))
    else:
        pts = _gen_normal_rng(rng, n, space.dim, space.p)
    norms = space.norm_many(pts)
    # a zero draw has probability zero; regenerate defensively if it happens
    bad = norms < 1e-300
    while np.any(bad):
        pts[bad] = _gen_normal_rng(rng, int(np.sum(bad)), space.dim, space.p)
        norms = space.norm_many(pts)
        bad = norms < 1e-300
    return pts / norms[:, None]


def halton_unit_vectors(space, n, seed):
    """Low-discrepancy stream of unit vectors of the space norm.

    Maps a scrambled Halton sequence through the inverse CDF of the
    p-generalized normal, then normalizes.  Deterministic given the seed;
    used as the candidate stream for the greedy families.
    """
    sampler = qmc.Halton(d=space.dim, scramble=True, seed=seed)
    u = sampler.random(n)
    p = 2.0 if space.norm_kind == "sup" else space.p
    sign = np.where(u < 0.5, -1.0, 1.0)
    v = np.abs(2.0 * u - 1.0)
    v = np.clip(v, 1e-12, 1.0 - 1e-12)
    mag = gammaincinv(1.0 / p, v) ** (1.0 / p)
    pts = sign * mag
    norms = space.norm_many(pts)
    return pts / norms[:, None]


def grid_candidates(bounds, step, order="center-out"):
    """Lattice candidate stream over a box.

    bounds is a sequence of (lo, hi) per coordinate; step the lattice pitch.
    order "center-out" sorts by euclidean distance from the origin (ties by
    lexicographic coordinates) so the origin, when it is on the lattice, comes
    first; "row-major" keeps the raw meshgrid order.
    """
    axes = [np.arange(lo, hi + step * 0.5, step) for lo, hi in bounds]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    if order == "center-out":
        r2 = np.sum(pts * pts, axis=1)
        keys = tuple(pts[:, i] for i in reversed(range(pts.shape[1]))) + (r2,)
        pts = pts[np.lexsort(keys)]
    elif order != "row-major":
        raise ValueError("unknown candidate order %r" % (order,))
    return pts


def segment_points(a, b, count):
    """count points on the segment [a, b], endpoints included."""
    t = np.linspace(0.0, 1.0, count)[:, None]
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return a + t * (b - a)
