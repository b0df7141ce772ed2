"""Slice tilings of the unit sphere of a uniformly convex space.

A norming family (x_j, f_j) cuts the sphere into closed slice tiles.  A unit
vector belongs to the first index j whose functional value reaches the cut in
magnitude, on the matching side: tile (j, 1) is the negative slice
f_j <= -cut, tile (j, 2) the positive slice f_j >= cut, and both require
|f_i(x)| <= cut for every earlier index i.  Each tile is the sphere
intersected with a convex set by construction.

The cut is placed against the modulus of convexity of the norm, which buys
two quantitative facts per tile: diameter at most eps (any two members sit
within eps/2 of the anchor +-x_j), and a spherical cap of an explicit radius
around an explicit center.  Centers pin the tile's own functional at a fixed
height; while the joint kernel of the leading functionals is nontrivial the
construction is exact, and past that point (index beyond the dimension) a
seeded search over the remaining ring picks the center and the achieved
slack is recorded per tile, shrinking that tile's certified cap honestly.
"""

from __future__ import annotations

import numpy as np

from .nets import greedy_norming_family, validate_norming
from .sampling import halton_unit_vectors, sphere_points
from .spaces import modulus_of_convexity
from .tiles import DEFAULT_TOL, Membership, TileInfo

# |norm(x) - 1| above this means the point is off the sphere: an input error,
# not a membership question.
SPHERE_ATOL = 1e-9

_CLASSIFY_BLOCK = 512


def sphere_constants(delta):
    """Radii derived from a modulus value delta.

    Returns (cut, threshold, height, cap_radius): the membership cut and the
    family-construction threshold split the interval (1 - 2*delta, 1) at its
    third points; height is the functional value pinned at tile centers,
    height = 2*cut/(1 + threshold); cap_radius = cut*(1 - threshold)/(1 +
    threshold) = height - cut is the radius of the certified cap.
    """
    delta = float(delta)
    if not 0.0 < delta < 0.75:
        raise ValueError("modulus value must lie in (0, 0.75), got %r" % (delta,))
    cut = 1.0 - 4.0 * delta / 3.0
    threshold = 1.0 - 2.0 * delta / 3.0
    height = 2.0 * cut / (1.0 + threshold)
    cap_radius = cut * (1.0 - threshold) / (1.0 + threshold)
    return cut, threshold, height, cap_radius


def build_sphere_tiling(space, eps, candidates=600_000, seed=0, family_max=None):
    """Tile the unit sphere of a uniformly convex space with slices of
    diameter at most eps.

    candidates is either the size of the quasirandom unit-vector stream to
    generate (seeded) or an explicit (n, dim) array of directions.  The
    modulus of convexity at eps/2 sets the cut and the family threshold;
    non-l2 norms use a certified lower bound for the modulus, which only
    shrinks the certified cap radius and never overstates it.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must be in (0, 1), got %r" % (eps,))
    bound = modulus_of_convexity(space, 0.5 * eps)  # raises if not uniformly convex
    cut, threshold, _, _ = sphere_constants(float(bound))
    if isinstance(candidates, (int, np.integer)):
        stream = halton_unit_vectors(space, int(candidates), seed)
    else:
        stream = np.asarray(candidates, dtype=float)
    family = greedy_norming_family(space, stream, threshold, max_size=family_max)
    if len(family) == 0:
        raise ValueError("norming family came out empty; supply more candidates")
    return SphereTiling(space, eps, family, cut, seed=seed, delta=float(bound))


class SphereTiling:
    """Covering of the unit sphere by slice tiles over a norming family.

    Tile ids are pairs (j, p) with 1-based family index j and side p in
    {1, 2} (negative / positive slice).  Classification takes the minimal j
    whose functional magnitude reaches the cut; boundary values |f_j| = cut
    land in the same tile as the closed-membership scan, so classify and the
    brute-force oracle agree exactly, ties included.
    """

    UNCLASSIFIED = (0, 0)
    probe_mode = "sphere"

    def __init__(self, space, eps, family, cut, seed=0, delta=None):
        if space.dim < 2:
            raise ValueError("sphere tiling needs dimension >= 2")
        if len(family) == 0:
            raise ValueError("empty functional family")
        threshold = float(family.parameter)
        if not 0.0 < float(cut) < threshold < 1.0:
            raise ValueError(
                "need 0 < cut < family threshold < 1, got cut=%r threshold=%r"
                % (cut, threshold)
            )
        self.space = space
        self.eps = float(eps)
        self.family = family
        self.cut = float(cut)
        self.delta = None if delta is None else float(delta)
        self.seed = int(seed)
        # functional value pinned at every center, and the radius of the cap
        # it certifies: cap_radius = height - cut exactly
        self.center_height = 2.0 * self.cut / (1.0 + threshold)
        self.cap_radius = self.cut * (1.0 - threshold) / (1.0 + threshold)
        # ceiling the earlier functionals must stay under at a center so the
        # whole cap stays under the cut: threshold * height = cut - cap_radius
        self._prefix_bound = threshold * self.center_height
        self._centers = {}

    def __len__(self):
        return 2 * len(self.family)

    def __repr__(self):
        return "SphereTiling(%r, eps=%g, family=%d, cut=%.6g)" % (
            self.space,
            self.eps,
            len(self.family),
            self.cut,
        )

    # -- input checks ------------------------------------------------------

    def _require_unit(self, x):
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        if pts.shape[-1] != self.space.dim:
            raise ValueError("expected points of dimension %d" % self.space.dim)
        off = np.abs(self.space.norm_many(pts) - 1.0)
        if np.any(off > SPHERE_ATOL):
            raise ValueError(
                "point off the unit sphere (|norm - 1| = %.3e)" % float(off.max())
            )
        return pts

    def _check_tile(self, tile):
        j, p = tile
        j, p = int(j), int(p)
        if not 1 <= j <= len(self.family):
            raise ValueError("tile index %r outside 1..%d" % (j, len(self.family)))
        if p not in (1, 2):
            raise ValueError("tile side must be 1 or 2, got %r" % (p,))
        return j, p

    # -- classification ----------------------------------------------------

    def classify_many(self, xs):
        """(n, 2) array of tile ids; a (0, 0) row means no functional reached
        the cut for that sample (the family is too sparse in that direction).
        """
        pts = self._require_unit(xs)
        n = len(pts)
        out = np.zeros((n, 2), dtype=int)
        funcs = self.family.functionals
        unresolved = np.arange(n)
        for b0 in range(0, len(self.family), _CLASSIFY_BLOCK):
            if not len(unresolved):
                break
            vals = pts[unresolved] @ funcs[b0 : b0 + _CLASSIFY_BLOCK].T
            hits = np.abs(vals) >= self.cut
            got = hits.any(axis=1)
            if np.any(got):
                rows = np.nonzero(got)[0]
                cols = hits[rows].argmax(axis=1)
                vv = vals[rows, cols]
                out[unresolved[rows], 0] = b0 + cols + 1
                out[unresolved[rows], 1] = np.where(vv > 0.0, 2, 1)
            unresolved = unresolved[~got]
        return out

    def classify(self, x):
        row = self.classify_many(np.asarray(x, dtype=float)[None, :])[0]
        if row[0] == 0:
            raise ValueError(
                "no functional reaches the cut %.6g for this direction; "
                "the family is too sparse there" % self.cut
            )
        return int(row[0]), int(row[1])

    def brute_force_classify(self, x):
        """Literal first-(j, p) scan over the closed tiles in index order.

        Walks j = 1, 2, ... and applies the closed tile definition directly:
        every earlier |f_i(x)| <= cut and f_j(x) past the cut on side p,
        side 1 checked before side 2.  The first hit wins; once some earlier
        magnitude exceeds the cut no later tile can contain x, so the scan
        stops.  Deliberately a separate code path from classify (a python
        scan versus a blocked vector argmax); the two must agree everywhere,
        boundary ties included.
        """
        pts = self._require_unit(x)
        vals = self.family.pair_values(pts)[0]
        ceiling = 0.0
        for idx in range(len(vals)):
            if ceiling > self.cut:
                break
            v = float(vals[idx])
            if v <= -self.cut:
                return (idx + 1, 1)
            if v >= self.cut:
                return (idx + 1, 2)
            ceiling = max(ceiling, abs(v))
        return (0, 0)

    # -- membership --------------------------------------------------------

    def membership_many(self, tile, xs, tol=DEFAULT_TOL):
        j, p = self._check_tile(tile)
        pts = self._require_unit(xs)
        vals = pts @ self.family.functionals[:j].T
        own = vals[:, j - 1]
        margin = own - self.cut if p == 2 else -own - self.cut
        if j > 1:
            prefix = self.cut - np.max(np.abs(vals[:, : j - 1]), axis=1)
            margin = np.minimum(margin, prefix)
        out = np.full(len(pts), int(Membership.OUTSIDE))
        out[margin >= -tol] = int(Membership.INSIDE)
        out[margin > tol] = int(Membership.STRICT)
        return out

    def membership(self, tile, x, tol=DEFAULT_TOL):
        state = self.membership_many(tile, np.asarray(x, dtype=float)[None, :], tol)[0]
        return Membership(int(state))

    def strict_counts_many(self, xs, tol=DEFAULT_TOL):
        """Number of tiles holding each sample strictly (0 or 1).

        A sample is strict in (j, p) iff every earlier magnitude stays under
        cut - tol and |f_j| clears cut + tol; two tiles can never both hold,
        so the count is the indicator of that j existing.
        """
        pts = self._require_unit(xs)
        counts = np.zeros(len(pts), dtype=int)
        funcs = self.family.functionals
        unresolved = np.arange(len(pts))
        for b0 in range(0, len(self.family), _CLASSIFY_BLOCK):
            if not len(unresolved):
                break
            vals = np.abs(pts[unresolved] @ funcs[b0 : b0 + _CLASSIFY_BLOCK].T)
            hits = vals >= self.cut - tol
            got = hits.any(axis=1)
            if np.any(got):
                rows = np.nonzero(got)[0]
                cols = hits[rows].argmax(axis=1)
                counts[unresolved[rows]] = (
                    vals[rows, cols] > self.cut + tol
                ).astype(int)
            unresolved = unresolved[~got]
        return counts

    # -- centers -----------------------------------------------------------

    def center_data(self, j):
        """Center record for family index j: point (the side-2 center),
        prefix residual, and whether the exact kernel construction applied.
        """
        j = int(j)
        if not 1 <= j <= len(self.family):
            raise ValueError("family index %r outside 1..%d" % (j, len(self.family)))
        if j not in self._centers:
            self._centers[j] = self._build_center(j)
        return self._centers[j]

    def center(self, tile):
        j, p = self._check_tile(tile)
        h = self.center_data(j)["point"]
        return h.copy() if p == 2 else -h

    def tile_info(self, tile):
        j, p = self._check_tile(tile)
        data = self.center_data(j)
        certified = max(0.0, self.cap_radius - data["residual"])
        anchor = self.family.vectors[j - 1] * (1.0 if p == 2 else -1.0)
        center = self.center((j, p))
        return TileInfo(
            tile_id=(j, p),
            kind="sphere-slice",
            center=center,
            inner_radius=certified,
            outer_radius=self.eps,
            extra={
                "functional_index": j,
                "side": p,
                "center_residual": float(data["residual"]),
                "kernel_exact": bool(data["exact"]),
                "anchor_gap": float(self.space.dist(center, anchor)),
            },
        )

    def observed_tiles(self, labels):
        labels = np.asarray(labels, dtype=int)
        keep = labels[:, 0] > 0
        uniq = np.unique(labels[keep], axis=0) if np.any(keep) else np.zeros((0, 2), int)
        return [(int(j), int(p)) for j, p in uniq]

    def center_summary(self):
        """Counts and worst residual over the centers built so far."""
        built = list(self._centers.values())
        residuals = [d["residual"] for d in built]
        return {
            "built": len(built),
            "kernel_exact": sum(1 for d in built if d["exact"]),
            "searched": sum(1 for d in built if not d["exact"]),
            "max_residual": float(max(residuals)) if residuals else 0.0,
            "uncertified": sum(1 for r in residuals if r >= self.cap_radius),
        }

    def _violation(self, j, h):
        """Worst prefix excess max_{i<j} |f_i(h)| - prefix_bound."""
        if j == 1:
            return -np.inf
        vals = self.family.functionals[: j - 1] @ h
        return float(np.max(np.abs(vals)) - self._prefix_bound)

    def _build_center(self, j):
        funcs = self.family.functionals
        xj = self.family.vectors[j - 1]
        rng = np.random.default_rng((self.seed + 1) * 1_000_003 + j)
        rows = funcs[:j]
        _, svals, vt = np.linalg.svd(rows)
        rank_tol = svals[0] * max(rows.shape) * np.finfo(float).eps
        rank = int(np.sum(svals > rank_tol))
        if rank < self.space.dim:
            # exact path: a direction killed by every leading functional, so
            # the earlier values at the center are height * f_i(x_j), all
            # safely under the prefix bound by the family construction
            basis = vt[rank:]
            w = basis.T @ (basis @ rng.standard_normal(self.space.dim))
            scale = np.linalg.norm(w)
            if scale < 1e-12:
                w, scale = basis[0], 1.0
            h = self._ring_point(xj, w / scale)
            exact = True
        else:
            h = self._ring_search(j, rng)
            exact = False
        residual = max(0.0, self._violation(j, h))
        return {"point": h, "residual": residual, "exact": exact}

    def _ring_point(self, xj, w):
        """The point height*x_j + t*w scaled onto the sphere, t >= 0.

        w must be annihilated by f_j so the pinned value survives.  For the
        euclidean norm t has a closed form; otherwise bisection (the norm
        along the ray is convex, below 1 at t = 0, and grows past 1).
        """
        height = self.center_height
        base = height * xj
        if self.space.norm_kind == "lp" and self.space.p == 2.0:
            t = np.sqrt(max(0.0, 1.0 - height * height)) / np.linalg.norm(w)
            return base + t * w
        lo, hi = 0.0, 1.0
        while self.space.norm(base + hi * w) < 1.0:
            hi *= 2.0
            if hi > 64.0:
                raise RuntimeError("ring bracketing failed")
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if self.space.norm(base + mid * w) < 1.0:
                lo = mid
            else:
                hi = mid
        return base + 0.5 * (lo + hi) * w

    def _ring_points_batch(self, xj, dirs):
        """Row-wise _ring_point for a batch of kernel directions."""
        height = self.center_height
        base = height * xj
        if self.space.norm_kind == "lp" and self.space.p == 2.0:
            scale = np.maximum(np.linalg.norm(dirs, axis=1), 1e-300)
            t = np.sqrt(max(0.0, 1.0 - height * height))
            return base[None, :] + t * dirs / scale[:, None]
        dirs = dirs / np.maximum(self.space.norm_many(dirs), 1e-300)[:, None]
        lo = np.zeros(len(dirs))
        hi = np.ones(len(dirs))
        for _ in range(8):
            grow = self.space.norm_many(base[None, :] + hi[:, None] * dirs) < 1.0
            if not np.any(grow):
                break
            hi[grow] *= 2.0
        for _ in range(70):
            mid = 0.5 * (lo + hi)
            inside = self.space.norm_many(base[None, :] + mid[:, None] * dirs) < 1.0
            lo = np.where(inside, mid, lo)
            hi = np.where(inside, hi, mid)
        return base[None, :] + (0.5 * (lo + hi))[:, None] * dirs

    def _ring_search(self, j, rng):
        """Seeded search over the ring {norm = 1, f_j = height} minimizing
        the worst earlier |f_i|.

        Used once the joint kernel of the leading functionals is exhausted
        (index at or past the dimension), where the exact construction no
        longer exists at this scale.  Coarse seeded directions in the kernel
        of f_j alone, then a shrinking local perturbation around the best;
        stops early once the prefix bound is met.  The caller records the
        achieved residual, so a shortfall shrinks that tile's certified cap
        instead of being hidden.
        """
        funcs = self.family.functionals
        xj = self.family.vectors[j - 1]
        _, _, vt = np.linalg.svd(funcs[j - 1][None, :])
        kernel = vt[1:]  # (dim-1, dim) euclidean-orthonormal rows
        kdim = kernel.shape[0]
        prev = funcs[: j - 1]

        # for the euclidean norm only functionals whose anchor overlap could
        # reach the prefix bound matter; elsewhere score against all of them
        if self.space.norm_kind == "lp" and self.space.p == 2.0 and j > 1:
            overlap = prev @ xj
            t_cap = np.sqrt(max(0.0, 1.0 - self.center_height ** 2))
            reach = self.center_height * np.abs(overlap) + t_cap * np.sqrt(
                np.maximum(0.0, 1.0 - overlap * overlap)
            )
            active = prev[reach > self._prefix_bound - 1e-3]
        else:
            active = prev

        def worst(points):
            if active.shape[0] == 0:
                return np.zeros(len(points))
            return np.max(np.abs(points @ active.T), axis=1)

        coeffs = np.vstack(
            [np.eye(kdim), -np.eye(kdim), rng.standard_normal((512, kdim))]
        )
        points = self._ring_points_batch(xj, coeffs @ kernel)
        scores = worst(points)
        order = np.argsort(scores)

        best_point = points[order[0]]
        best_score = float(scores[order[0]])
        # shrinking local perturbations around the best coarse starts
        for start in order[:3]:
            if best_score <= self._prefix_bound:
                break
            coeff = coeffs[start] / np.linalg.norm(coeffs[start])
            score = float(scores[start])
            sigma = 0.4
            for _ in range(50):
                if score <= self._prefix_bound or sigma < 1e-5:
                    break
                props = coeff[None, :] + sigma * rng.standard_normal((24, kdim))
                pts = self._ring_points_batch(xj, props @ kernel)
                sc = worst(pts)
                idx = int(np.argmin(sc))
                if sc[idx] < score:
                    score = float(sc[idx])
                    coeff = props[idx] / np.linalg.norm(props[idx])
                    if score < best_score:
                        best_score = score
                        best_point = pts[idx]
                else:
                    sigma *= 0.7
        return best_point

    # -- probe batteries ----------------------------------------------------

    def inner_probe(self, tile, n_points=256, seed=0, tol=DEFAULT_TOL, shrink=0.9):
        """Probe the certified cap of a tile with sphere-constrained points.

        Draws unit directions u, renormalizes center + shrink*radius*u back
        onto the sphere, keeps the probes that stayed within the certified
        radius of the center, and checks closed membership for every kept
        probe.  A tile whose recorded center residual ate the whole cap has
        nothing to certify and is reported with certified=False.
        """
        info = self.tile_info(tile)
        radius = info.inner_radius
        result = {
            "tile": (int(tile[0]), int(tile[1])),
            "claimed_radius": float(radius),
            "certified": radius > 0.0,
            "kept": 0,
            "violations": 0,
            "max_kept_distance": 0.0,
        }
        if radius <= 0.0:
            return result
        dirs = sphere_points(self.space, n_points, seed)
        raw = info.center[None, :] + (shrink * radius) * dirs
        probes = raw / self.space.norm_many(raw)[:, None]
        dist = self.space.dist_many(probes, info.center)
        keep = dist <= radius
        states = self.membership_many(tile, probes[keep], tol=tol)
        result["kept"] = int(np.sum(keep))
        result["violations"] = int(np.sum(states == int(Membership.OUTSIDE)))
        if np.any(keep):
            result["max_kept_distance"] = float(dist[keep].max())
        return result

    def outer_check(self, xs, labels=None, tol=DEFAULT_TOL):
        """Distance checks for classified samples.

        Every sample must sit within eps of its tile center, which factors
        through the anchor +-x_j: sample and center each sit within eps/2 of
        the anchor because their own functional value clears the cut.  All
        three distances are measured and the violations counted.
        """
        pts = self._require_unit(xs)
        if labels is None:
            labels = self.classify_many(pts)
        labels = np.asarray(labels, dtype=int)
        half = 0.5 * self.eps
        result = {
            "samples": int(len(pts)),
            "unclassified": int(np.sum(labels[:, 0] == 0)),
            "max_center_distance": 0.0,
            "center_violations": 0,
            "max_sample_anchor": 0.0,
            "max_center_anchor": 0.0,
            "anchor_violations": 0,
        }
        for j, p in self.observed_tiles(labels):
            rows = (labels[:, 0] == j) & (labels[:, 1] == p)
            center = self.center((j, p))
            anchor = self.family.vectors[j - 1] * (1.0 if p == 2 else -1.0)
            d_center = self.space.dist_many(pts[rows], center)
            d_anchor = self.space.dist_many(pts[rows], anchor)
            gap = float(self.space.dist(center, anchor))
            result["max_center_distance"] = max(
                result["max_center_distance"], float(d_center.max())
            )
            result["max_sample_anchor"] = max(
                result["max_sample_anchor"], float(d_anchor.max())
            )
            result["max_center_anchor"] = max(result["max_center_anchor"], gap)
            result["center_violations"] += int(np.sum(d_center > self.eps + tol))
            result["anchor_violations"] += int(np.sum(d_anchor > half + tol))
            result["anchor_violations"] += int(gap > half + tol)
        return result

    def validate_family(self, n_probes=1000, seed=0, tol=1e-9):
        """Norming shortfalls of the family on seeded sphere probes.

        The family norms its own candidate stream at the construction
        threshold; off-stream directions can dip below it by the stream's
        resolution, which is exactly the slack the cut leaves.  Returned
        shortfalls are diagnostics, not failures, as long as classification
        still covers.
        """
        probes = sphere_points(self.space, n_probes, seed)
        return validate_norming(self.family, probes, tol=tol)
