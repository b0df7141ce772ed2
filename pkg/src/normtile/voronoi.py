"""Voronoi tilings in a general norm, corrected to star-shaped tiles.

Voronoi cells V_i of a separated net cover the space but need not have
pairwise disjoint interiors in a non-euclidean norm.  The corrected tile D_i
keeps the points of V_i that are not strictly interior to any earlier cell:

    D_i = { x in V_i : no j < i has x strictly inside V_j }.

This realizes closure(V_i minus the earlier cells) predicatively.  Each D_i
is star-shaped about its center and the balls B(d_i, r) and B(d_i, 2r)
sandwich it when the net is 2r-separated and maximal.
"""

from __future__ import annotations

import numpy as np

from .sampling import ball_points, segment_points, sphere_points
from .tiles import DEFAULT_TOL, Membership, TileInfo


class StarVoronoiTiling:
    """Star-shaped corrected Voronoi tiles over a separated net."""

    def __init__(self, space, net):
        if len(net.centers) == 0:
            raise ValueError("net has no centers")
        self.space = space
        self.net = net
        self.centers = np.asarray(net.centers, dtype=float)
        self.inner_radius = net.separation / 2.0
        self.outer_radius = net.separation

    # ------------------------------------------------------------------

    def distances(self, x):
        return self.space.dist_many(self.centers, np.asarray(x, dtype=float))

    def voronoi_membership(self, i, x, tol=DEFAULT_TOL):
        """Membership of x in the plain Voronoi cell V_i."""
        d = self.distances(x)
        others = np.delete(d, i)
        if len(others) == 0:
            return Membership.STRICT
        m = float(np.min(others))
        if d[i] < m - tol:
            return Membership.STRICT
        if d[i] <= m + tol:
            return Membership.INSIDE
        return Membership.OUTSIDE

    def membership(self, i, x, tol=DEFAULT_TOL):
        """Membership of x in the corrected star tile D_i."""
        d = self.distances(x)
        return self._membership_from_d(i, d, tol)

    def _membership_from_d(self, i, d, tol):
        m = float(np.min(d))
        if d[i] > m + tol:
            return Membership.OUTSIDE
        # strictly interior to an earlier cell?
        for j in range(i):
            others = np.delete(d, j)
            if d[j] < np.min(others) - tol:
                return Membership.OUTSIDE
        others = np.delete(d, i)
        if len(others) == 0 or d[i] < np.min(others) - tol:
            return Membership.STRICT
        return Membership.INSIDE

    def classify(self, x):
        """Index of the tile containing x: nearest center, smallest index
        first at ties.  Agrees exactly with the first i whose D_i contains x.
        """
        return int(np.argmin(self.distances(x)))

    def classify_many(self, xs):
        xs = np.asarray(xs, dtype=float)
        d = self._pairwise(xs)
        return np.argmin(d, axis=1)

    def _pairwise(self, xs):
        diffs = xs[:, None, :] - self.centers[None, :, :]
        flat = diffs.reshape(-1, self.space.dim)
        return self.space.norm_many(flat).reshape(len(xs), len(self.centers))

    def membership_many(self, i, xs, tol=DEFAULT_TOL, chunk=512):
        """Membership of each row in tile D_i, vectorized.

        Same semantics as membership(): outside when the row misses the
        nearest-center condition or lies strictly interior to an earlier
        cell; strict when it beats every other center by more than tol.
        """
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        out = np.empty(len(xs), dtype=np.int64)
        for lo in range(0, len(xs), chunk):
            d = self._pairwise(xs[lo:lo + chunk])
            if d.shape[1] == 1:
                out[lo:lo + chunk] = int(Membership.STRICT)
                continue
            part = np.partition(d, 1, axis=1)
            m1, m2 = part[:, 0], part[:, 1]
            floor = np.where(d == m1[:, None], m2[:, None], m1[:, None])
            strict = d < floor - tol
            res = np.full(d.shape[0], int(Membership.OUTSIDE), dtype=np.int64)
            ok = d[:, i] <= m1 + tol
            if i > 0:
                ok &= ~strict[:, :i].any(axis=1)
            res[ok] = int(Membership.INSIDE)
            res[ok & strict[:, i]] = int(Membership.STRICT)
            out[lo:lo + chunk] = res
        return out

    def strict_counts_many(self, xs, tol=DEFAULT_TOL, chunk=512):
        """How many tiles hold each row strictly (never more than one)."""
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        out = np.empty(len(xs), dtype=np.int64)
        for lo in range(0, len(xs), chunk):
            d = self._pairwise(xs[lo:lo + chunk])
            if d.shape[1] == 1:
                out[lo:lo + chunk] = 1
                continue
            part = np.partition(d, 1, axis=1)
            m1, m2 = part[:, 0], part[:, 1]
            floor = np.where(d == m1[:, None], m2[:, None], m1[:, None])
            out[lo:lo + chunk] = (d < floor - tol).sum(axis=1)
        return out

    def strict_tile_ids(self, x, tol=DEFAULT_TOL):
        d = self.distances(x)
        out = []
        for i in range(len(self.centers)):
            if self._membership_from_d(i, d, tol) == Membership.STRICT:
                out.append(i)
        return out

    def brute_force_classify(self, x):
        """Oracle: scan tiles in index order with exact comparisons and
        return the first one whose closed tile contains x."""
        d = self.distances(x)
        for i in range(len(self.centers)):
            if self._membership_from_d(i, d, 0.0) != Membership.OUTSIDE:
                return i
        return None  # unreachable: some tile always attains the minimum

    # ------------------------------------------------------------------

    @property
    def tiles(self):
        return [
            TileInfo(i, "star-voronoi", self.centers[i], self.inner_radius,
                     self.outer_radius)
            for i in range(len(self.centers))
        ]

    def sample_tile(self, i, n, seed, tol=DEFAULT_TOL):
        """Up to n points of D_i, by rejection from B(d_i, outer radius)."""
        got = []
        attempt = 0
        while sum(len(g) for g in got) < n and attempt < 50:
            pts = ball_points(self.space, 4 * n, seed + 977 * attempt,
                              radius=self.outer_radius + tol,
                              center=self.centers[i])
            labels = self.classify_many(pts)
            hit = pts[labels == i]
            keep = [p for p in hit
                    if self.membership(i, p, tol) != Membership.OUTSIDE]
            if keep:
                got.append(np.asarray(keep))
            attempt += 1
        if not got:
            return np.zeros((0, self.space.dim))
        return np.concatenate(got)[:n]

    def starshape_probe(self, i, n_samples=100, segment_count=100, seed=0,
                        tol=DEFAULT_TOL):
        """Segment probes for star-shapedness of D_i about its center.

        Draws points inside the tile, walks the segment from the center to
        each, and collects every segment point that leaves the tile.  Returns
        the list of violating points (empty when the tile is star-shaped to
        tolerance).
        """
        center = self.centers[i]
        samples = self.sample_tile(i, n_samples, seed, tol)
        if not len(samples):
            return []
        ts = np.linspace(0.0, 1.0, segment_count)
        seg = center[None, None, :] + ts[None, :, None] * (
            samples[:, None, :] - center[None, None, :])
        flat = seg.reshape(-1, self.space.dim)
        mem = self.membership_many(i, flat, tol=tol)
        bad = mem == int(Membership.OUTSIDE)
        return [np.array(y) for y in flat[bad]]

    def inner_probe(self, i, radius, n_directions=1000, seed=0, tol=DEFAULT_TOL):
        """True iff all sphere probes at the given radius around d_i stay in
        D_i."""
        u = sphere_points(self.space, n_directions, seed)
        pts = self.centers[i] + radius * u
        mem = self.membership_many(i, pts, tol=tol)
        return not (mem == int(Membership.OUTSIDE)).any()
