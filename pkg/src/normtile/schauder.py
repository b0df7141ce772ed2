"""Tail-subspace level tilings and the composite starshaped tiling.

For a coordinate basis of an lp-style space, level k looks at the tail
subspace W_k (coordinates k and beyond).  A planar five-piece system
(see strip.py) is pulled back into W_k through the maps

    pi_j(w) = (w_k, f_j(w)),

one per member (v_j, f_j) of a delta-biorthogonal family living in
W_{k+1}.  The resulting tiles of W_k are

    hub       H_0       : every pi_j(w) in U0 (and |w_k| <= halfwidth),
    corners   H_{j,p}   : pi_i(w) in U0 for i < j and pi_j(w) in Up,
    slabs     H_n, n!=0 : |w_k - period*n| <= halfwidth,

with centers 0, +-a e_k +- b v_j, and period*n*e_k.  Every tile contains a
ball of radius r around its center and stays within an affine reach of it,
which is what the composite construction needs.

The composite tiling crosses a starshaped cell decomposition of the head
subspace (coordinates below k) with a level tile and pins all higher tails
to the hub of their own level:

    C_{i,j,k} = heads in cell D_i, Q_k x in level-k tile j,
                Q_m x in the level-m hub for every m > k,

centered at d_i + h_j.  Tiles at level k >= 1 always carry a non-hub level
index j >= 1.  Each tile contains B(center, r) and, at desk scale, sits
well inside B(center, R) for the ratio R/r recorded in
normality_constants.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import strip as strip_mod
from .nets import SeparatedNet, greedy_biorthogonal, greedy_separated_net
from .sampling import ball_points, halton_unit_vectors, sphere_points
from .spaces import NormedSpace
from .tiles import DEFAULT_TOL, Membership, TileInfo
from .voronoi import StarVoronoiTiling


# ----------------------------------------------------------------------
# the pinned radius arithmetic

@dataclass(frozen=True)
class NormalityConstants:
    """Inner radius r, hub reach r0, outer radius R, and the ratio R/r."""

    inner: Fraction
    r0: Fraction
    outer: Fraction
    ratio: Fraction
    preset: str
    unconditional: bool


def normality_constants(system, unconditional=False):
    """Exact (r, R0, R, R/r) for a strip system.

    The hub of a level sits inside B(0, R0) because the family delta-norms
    the tail part while U0 caps every pi_j value at the tooth height; a tile
    then stays within |band| + 2*(tail reaches) of its center.  With the
    unconditional-basis estimate ||w|| <= |w_k| + ||Q_{k+1} w|| the doubled
    tail terms drop to single ones.
    """
    sys = strip_mod.load_system(system)
    height = sys.height
    if unconditional:
        r0 = sys.halfwidth + height / sys.delta
        outer = 2 * sys.r + (sys.halfwidth + 1) + r0
    else:
        r0 = sys.halfwidth + 2 * height / sys.delta
        outer = 2 * sys.r + (sys.halfwidth + 2) + 2 * r0
    return NormalityConstants(inner=sys.r, r0=r0, outer=outer,
                              ratio=outer / sys.r, preset=sys.name,
                              unconditional=unconditional)


# ----------------------------------------------------------------------
# one level

class LevelTiling:
    """Tiling of the tail subspace W_level pulled back through a family.

    Tile ids are flat integers: 0 is the hub, 1..4*J are the corner tiles in
    (j, p) order, and slab ids follow interleaved as n = +1, -1, +2, -2, ...
    An empty family (always the case at level dim-1, where the tail beyond
    the level is trivial) leaves just the band hub and the slabs.
    """

    def __init__(self, space, level, system, family=None, unconditional=False):
        self.space = space
        self.level = int(level)
        self.system = strip_mod.load_system(system)
        self.unconditional = bool(unconditional)
        if not 0 <= self.level < space.dim:
            raise ValueError("level must be 0..dim-1")
        if family is None or len(family) == 0:
            self.vectors = np.zeros((0, space.dim))
            self.functionals = np.zeros((0, space.dim))
        else:
            # members must live beyond the level coordinate; squash roundoff
            if np.max(np.abs(family.vectors[:, : self.level + 1])) > 1e-12:
                raise ValueError("family vectors must vanish through the level coordinate")
            self.vectors = np.array(family.vectors, dtype=float)
            self.functionals = np.array(family.functionals, dtype=float)
            self.functionals[:, : self.level + 1] = 0.0
        self.family = family
        self._hw = float(self.system.halfwidth)
        self._cap = float(self.system.cap)
        self._slope = float(self.system.slope)
        self._period = float(self.system.period)
        self._a = float(self.system.a)
        self._b = float(self.system.b)
        self._r = float(self.system.r)

    def __len__(self):
        return len(self.vectors)

    # -- flat id bookkeeping ------------------------------------------

    def corner_flat(self, j, p):
        """Flat id of corner (j, p), j = 1..J, p = 1..4."""
        return 1 + 4 * (j - 1) + (p - 1)

    def slab_flat(self, n):
        if n == 0:
            raise ValueError("slab index 0 is the hub's band")
        return 1 + 4 * len(self.vectors) + 2 * (abs(n) - 1) + (0 if n > 0 else 1)

    def describe(self, flat):
        """(kind, detail) for a flat id: hub / corner (j, p) / slab n."""
        flat = int(flat)
        if flat == 0:
            return ("hub", None)
        ncorner = 4 * len(self.vectors)
        if flat <= ncorner:
            j, p = divmod(flat - 1, 4)
            return ("corner", (j + 1, p + 1))
        idx = flat - 1 - ncorner
        half, odd = divmod(idx, 2)
        return ("slab", (half + 1) * (-1 if odd else 1))

    def center(self, flat):
        kind, detail = self.describe(flat)
        e = np.zeros(self.space.dim)
        e[self.level] = 1.0
        if kind == "hub":
            return np.zeros(self.space.dim)
        if kind == "slab":
            return self._period * detail * e
        j, p = detail
        sx = 1.0 if p in (1, 2) else -1.0
        sy = 1.0 if p in (1, 3) else -1.0
        return sx * self._a * e + sy * self._b * self.vectors[j - 1]

    # -- evaluation ----------------------------------------------------

    def pi_many(self, W):
        """Coordinate values and family values for rows of W (in W_level)."""
        W = np.atleast_2d(np.asarray(W, dtype=float))
        ex = W[:, self.level]
        Y = W @ self.functionals.T if len(self.vectors) else np.zeros((len(W), 0))
        return ex, Y

    def classify_many(self, W):
        """Flat tile id per row; the first tile (flat order) whose closure
        holds the point, evaluated exactly at tolerance zero.

        In-band points: the hub when every pi_j stays in U0; otherwise the
        first j whose pi value leaves U0's interior, with the corner p read
        off the quadrant.  Out-of-band points: the nearest slab (ties to
        smaller |n|, then positive n).
        """
        ex, Y = self.pi_many(W)
        n = len(ex)
        out = np.zeros(n, dtype=np.int64)
        in_band = np.abs(ex) <= self._hw
        if len(self.vectors):
            m0 = self._cap - np.abs(ex)[:, None] - self._slope * np.abs(Y)
            hub = in_band & (m0 >= 0.0).all(axis=1)
            corner_rows = in_band & ~hub
            if corner_rows.any():
                mc = m0[corner_rows]
                jstar = np.argmax(mc <= 0.0, axis=1)
                ys = Y[corner_rows, jstar]
                xs = ex[corner_rows]
                p = 1 + (ys < 0.0) + 2 * (xs < 0.0)
                out[corner_rows] = 1 + 4 * jstar + (p - 1)
        else:
            hub = in_band
        out[in_band & hub] = 0
        if (~in_band).any():
            out[~in_band] = [self.slab_flat(self._nearest_slab(v))
                             for v in ex[~in_band]]
        return out

    def _nearest_slab(self, x):
        return strip_mod.strip_index(self.system, float(x))

    def _margins_many(self, flat, W):
        """Stacked margin columns (nonneg iff inside) for one tile."""
        ex, Y = self.pi_many(W)
        kind, detail = self.describe(flat)
        cols = []
        if kind == "hub":
            cols.append(self._hw - np.abs(ex))
            if len(self.vectors):
                m0 = self._cap - np.abs(ex)[:, None] - self._slope * np.abs(Y)
                cols.extend(m0.T)
        elif kind == "slab":
            cols.append(self._hw - np.abs(ex - self._period * detail))
        else:
            j, p = detail
            if j > len(self.vectors):
                raise ValueError("corner index beyond the family")
            for i in range(j - 1):
                cols.append(self._cap - np.abs(ex) - self._slope * np.abs(Y[:, i]))
                cols.append(self._hw - np.abs(ex))
            x = ex if p in (1, 2) else -ex
            y = Y[:, j - 1] if p in (1, 3) else -Y[:, j - 1]
            cols.extend([x, self._hw - x, y, x + self._slope * y - self._cap])
        return np.stack(cols, axis=1)

    def membership_many(self, flat, W, tol=DEFAULT_TOL):
        m = self._margins_many(flat, W)
        worst = m.min(axis=1)
        out = np.full(len(worst), int(Membership.OUTSIDE), dtype=np.int64)
        out[worst >= -tol] = int(Membership.INSIDE)
        out[worst > tol] = int(Membership.STRICT)
        return out

    def membership(self, flat, w, tol=DEFAULT_TOL):
        return Membership(int(self.membership_many(flat, np.atleast_2d(w), tol)[0]))

    def strict_counts_many(self, W, tol=DEFAULT_TOL):
        """How many tiles hold each row strictly (should never exceed one)."""
        ex, Y = self.pi_many(W)
        band_strict = (self._hw - np.abs(ex)) > tol
        counts = np.zeros(len(ex), dtype=np.int64)
        J = len(self.vectors)
        if J:
            m0 = self._cap - np.abs(ex)[:, None] - self._slope * np.abs(Y)
            u0_strict = m0 > tol
            counts += (band_strict & u0_strict.all(axis=1)).astype(np.int64)
            prefix = np.ones(len(ex), dtype=bool)
            for j in range(J):
                x, y = ex, Y[:, j]
                quadrant_strict = ((np.abs(x) > tol) & (self._hw - np.abs(x) > tol)
                                   & (np.abs(y) > tol) & (-m0[:, j] > tol))
                counts += (prefix & quadrant_strict).astype(np.int64)
                prefix = prefix & u0_strict[:, j]
        else:
            counts += band_strict.astype(np.int64)
        # slabs: check the two nearest translates of each row
        ratio = ex / self._period
        for shift in (np.floor(ratio), np.floor(ratio) + 1):
            inside = self._hw - np.abs(ex - self._period * shift) > tol
            counts += (inside & (shift != 0)).astype(np.int64)
        return counts

    # -- ball and reach checks ------------------------------------------

    def bounds_report(self, n_samples=400, seed=0, tol=1e-9):
        """Probe the four structural bounds of the level tiling.

        1. B(0,1) sits in the hub and hub points stay within R0 of 0.
        2. Each corner center leaves exactly b beyond the level coordinate,
           with b <= 1 - r.
        3. B(center, r) sits inside every corner and slab tile (probed).
        4. Every sampled point stays within the affine reach of its tile's
           center: |band| + 2 + 2*||tail|| in general, |band| + 1 + ||tail||
           under the unconditional estimate.
        """
        space, k = self.space, self.level
        consts = normality_constants(self.system, self.unconditional)
        r0, b = float(consts.r0), self._b
        rng_seed = int(seed)
        report = {"level": k, "checks": {}, "violations": []}

        tail_dim = space.dim - k
        sub = NormedSpace("lp", space.p if space.p is not None else 2.0, tail_dim)
        dirs = np.zeros((n_samples, space.dim))
        dirs[:, k:] = sphere_points(sub, n_samples, rng_seed + 1)
        nrm = space.norm_many(dirs)
        dirs = dirs / nrm[:, None]

        hub_in = self.membership_many(0, (1.0 - 1e-9) * dirs, tol=tol)
        bad = int(np.sum(hub_in == int(Membership.OUTSIDE)))
        report["checks"]["hub_inner_ball"] = bad == 0
        if bad:
            report["violations"].append(("hub_inner_ball", bad))

        samples = np.zeros((4 * n_samples, space.dim))
        samples[:, k:] = ball_points(sub, 4 * n_samples, rng_seed + 2,
                                     radius=r0 + 2.0)
        labels = self.classify_many(samples)
        hub_rows = samples[labels == 0]
        over = space.norm_many(hub_rows) - (r0 + tol) if len(hub_rows) else np.array([])
        report["checks"]["hub_outer_r0"] = not (len(over) and (over > 0).any())
        if len(over) and (over > 0).any():
            report["violations"].append(("hub_outer_r0", float(over.max())))

        corner_ok, reach_ok, tail_ok = True, True, True
        for j in range(1, len(self.vectors) + 1):
            for p in range(1, 5):
                flat = self.corner_flat(j, p)
                c = self.center(flat)
                tail_norm = space.norm(space.tail_projection(c, k + 1))
                if abs(tail_norm - b) > 1e-9 or b > 1.0 - self._r + 1e-12:
                    tail_ok = False
                    report["violations"].append(("corner_tail_norm", flat, tail_norm))
                probes = c + (self._r - 1e-9) * dirs[: min(n_samples, 200)]
                mem = self.membership_many(flat, probes, tol=tol)
                if (mem == int(Membership.OUTSIDE)).any():
                    corner_ok = False
                    report["violations"].append(
                        ("corner_inner_ball", flat,
                         int(np.sum(mem == int(Membership.OUTSIDE)))))
        report["checks"]["corner_tail_norms"] = tail_ok
        report["checks"]["corner_inner_balls"] = corner_ok

        # affine reach of the classified tile's center
        centers = np.stack([self.center(t) for t in labels])
        gaps = space.norm_many(samples - centers)
        tails = space.norm_many(
            np.concatenate([np.zeros_like(samples[:, : k + 1]),
                            samples[:, k + 1:]], axis=1))
        if self.unconditional:
            allowed = self._hw + 1.0 + tails
        else:
            allowed = self._hw + 2.0 + 2.0 * tails
        over = gaps - (allowed + tol)
        if (over > 0).any():
            reach_ok = False
            report["violations"].append(("affine_reach", float(over.max())))
        report["checks"]["affine_reach"] = reach_ok
        report["passed"] = all(report["checks"].values())
        return report


# ----------------------------------------------------------------------
# the composite tiling

def _embed_tail(points, dim, start):
    out = np.zeros((len(points), dim))
    out[:, start:] = points
    return out


def _embed_head(points, dim):
    out = np.zeros((len(points), dim))
    out[:, : points.shape[1]] = points
    return out


class CompositeTiling:
    """Starshaped tiles indexed by (head cell i, level tile j, level k).

    Levels up to `depth` get a delta-biorthogonal family (so corner tiles
    exist there); deeper levels keep only their band hub and slabs, which is
    always the case at the last level where the tail subspace beyond the
    level is trivial.  Classification is total: k is the smallest level
    whose higher tails all sit in their hubs, j the level tile of the tail
    at k, and i the head cell.
    """

    def __init__(self, space, system="fig1", depth=2, seed=0,
                 unconditional=False, region_radius=10.0,
                 family_candidates=4096, family_max=64,
                 net_candidates=4096, net_max=None):
        self.space = space
        self.system = strip_mod.load_system(system)
        self.seed = int(seed)
        self.unconditional = bool(unconditional)
        self.region_radius = float(region_radius)
        self.constants = normality_constants(self.system, unconditional)
        self.depth = int(min(depth, space.dim - 2)) if space.dim >= 2 else -1
        self._r = float(self.system.r)

        p = space.p if space.p is not None else 2.0
        self.levels = []
        for k in range(space.dim):
            family = None
            if 0 <= k <= self.depth:
                sub = NormedSpace("lp", p, space.dim - k - 1)
                cands = halton_unit_vectors(sub, family_candidates,
                                            seed=self.seed + 101 * k + 7)
                family = greedy_biorthogonal(
                    space, _embed_tail(cands, space.dim, k + 1),
                    float(self.system.delta), max_size=family_max)
            self.levels.append(LevelTiling(space, k, self.system, family,
                                           unconditional=unconditional))

        self.nets, self.heads = [], []
        sep = 2.0 * self._r
        for k in range(space.dim):
            if k == 0:
                net = SeparatedNet(space, sep, np.zeros((1, space.dim)), 1)
            else:
                sub = NormedSpace("lp", p, k)
                cands = ball_points(sub, net_candidates,
                                    seed=self.seed + 211 * k + 13,
                                    radius=self.region_radius)
                cands = np.concatenate([np.zeros((1, k)), cands])
                net = greedy_separated_net(space, _embed_head(cands, space.dim),
                                           sep, max_size=net_max)
            self.nets.append(net)
            self.heads.append(StarVoronoiTiling(space, net))

    # -- geometry -------------------------------------------------------

    def center(self, tid):
        i, j, k = tid
        return self.nets[k].centers[i] + self.levels[k].center(j)

    def describe(self, tid):
        i, j, k = tid
        kind, detail = self.levels[k].describe(j)
        return {"level": k, "cell": i, "flat": j, "kind": kind, "detail": detail}

    def tile_info(self, tid):
        kind = self.describe(tid)["kind"]
        return TileInfo(tile_id=tid, kind="composite-" + kind,
                        center=self.center(tid),
                        inner_radius=self._r,
                        outer_radius=float(self.constants.outer),
                        extra=self.describe(tid))

    def observed_tiles(self, labels):
        seen, infos = set(), []
        for tid in labels:
            if tid is not None and tid not in seen:
                seen.add(tid)
                infos.append(self.tile_info(tid))
        return infos

    # -- classification ---------------------------------------------------

    def _hub_ok_matrix(self, X, strict=False, tol=0.0):
        """Per-level hub membership of each row's tail (closed by default)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        dim = self.space.dim
        ok = np.ones((len(X), dim), dtype=bool)
        for m in range(dim):
            lev = self.levels[m]
            ex = X[:, m]
            band = np.abs(ex)
            col = band < self._hub_hw(lev) - tol if strict else band <= self._hub_hw(lev) + tol
            if len(lev.vectors):
                Y = X @ lev.functionals.T
                m0 = lev._cap - band[:, None] - lev._slope * np.abs(Y)
                col = col & ((m0 > tol).all(axis=1) if strict
                             else (m0 >= -tol).all(axis=1))
            ok[:, m] = col
        return ok

    @staticmethod
    def _hub_hw(lev):
        return lev._hw

    def classify_many(self, X):
        """(i, j, k) per row.  Total over the whole space by construction:
        the last level's hub condition is just a band test on the final
        coordinate, and slabs catch whatever escapes it."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        n, dim = X.shape
        hub_ok = self._hub_ok_matrix(X)
        if dim > 1:
            bad = ~hub_ok[:, 1:]
            has_bad = bad.any(axis=1)
            kstar = np.where(has_bad,
                             dim - 1 - np.argmax(bad[:, ::-1], axis=1), 0)
        else:
            kstar = np.zeros(n, dtype=np.int64)
        labels = [None] * n
        for k in np.unique(kstar):
            rows = np.nonzero(kstar == k)[0]
            tails = X[rows].copy()
            tails[:, :k] = 0.0
            j = self.levels[k].classify_many(tails)
            heads = X[rows].copy()
            heads[:, k:] = 0.0
            i = self._head_classify(k, heads)
            for row, ii, jj in zip(rows, i, j):
                labels[row] = (int(ii), int(jj), int(k))
        return labels

    def _head_classify(self, k, heads, chunk=256):
        out = np.zeros(len(heads), dtype=np.int64)
        for lo in range(0, len(heads), chunk):
            out[lo:lo + chunk] = self.heads[k].classify_many(heads[lo:lo + chunk])
        return out

    def classify(self, x):
        return self.classify_many(np.atleast_2d(x))[0]

    def brute_force_classify(self, x, max_slab=None):
        """First tile in (k asc, flat j asc, cell i asc) order whose closure
        holds x, memberships evaluated at tolerance zero.  Slabs are scanned
        in their flat interleaved order out to the first index past x.

        Cells are resolved from the head's distance vector: a cell before
        the first distance minimizer fails its own Voronoi inequality, and
        the first minimizer is never blocked by an earlier strict interior,
        so it is the first cell whose closure holds the head.
        """
        x = np.asarray(x, dtype=float)
        dim = self.space.dim
        hub_ok = self._hub_ok_matrix(x[None])[0]
        for k in range(dim):
            if not all(hub_ok[m] for m in range(k + 1, dim)):
                continue
            lev = self.levels[k]
            tail = x.copy()
            tail[:k] = 0.0
            reach = int(np.ceil((abs(tail[k]) + lev._hw) / lev._period)) + 1
            if max_slab is not None:
                reach = min(reach, max_slab)
            flats = [0]
            flats += [lev.corner_flat(j, p)
                      for j in range(1, len(lev.vectors) + 1)
                      for p in range(1, 5)]
            flats += [lev.slab_flat(n) for m in range(1, reach + 1)
                      for n in (m, -m)]
            head = x.copy()
            head[k:] = 0.0
            for flat in flats:
                if lev.membership(flat, tail, tol=0.0) == Membership.OUTSIDE:
                    continue
                d = self.heads[k].distances(head)
                i = int(np.flatnonzero(d <= d.min())[0])
                return (i, int(flat), k)
        return None

    # -- memberships and probes -----------------------------------------

    def membership_many(self, tid, X, tol=DEFAULT_TOL):
        """Membership of each row in one composite tile: the worst of the
        head-cell, level-tile, and higher-hub memberships."""
        i, j, k = tid
        X = np.atleast_2d(np.asarray(X, dtype=float))
        heads = X.copy()
        heads[:, k:] = 0.0
        tails = X.copy()
        tails[:, :k] = 0.0
        vals = np.minimum(self.heads[k].membership_many(i, heads, tol=tol),
                          self.levels[k].membership_many(j, tails, tol=tol))
        for m in range(k + 1, self.space.dim):
            t = X.copy()
            t[:, :m] = 0.0
            vals = np.minimum(vals, self.levels[m].membership_many(0, t, tol=tol))
        return vals

    def membership(self, tid, x, tol=DEFAULT_TOL):
        return Membership(int(self.membership_many(tid, np.atleast_2d(x), tol)[0]))

    def strict_counts_many(self, X, tol=DEFAULT_TOL):
        """Number of composite tiles holding each row strictly interior."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        n, dim = X.shape
        hub_strict = self._hub_ok_matrix(X, strict=True, tol=tol)
        # tails_strict[:, k] == all levels above k strictly in their hub
        tails_strict = np.ones((n, dim), dtype=bool)
        for k in range(dim - 2, -1, -1):
            tails_strict[:, k] = tails_strict[:, k + 1] & hub_strict[:, k + 1]
        total = np.zeros(n, dtype=np.int64)
        for k in range(dim):
            tails = X.copy()
            tails[:, :k] = 0.0
            lev_counts = self.levels[k].strict_counts_many(tails, tol=tol)
            if k >= 1:
                # the hub belongs to the composite only at level 0
                lev_counts = lev_counts - hub_strict[:, k].astype(np.int64)
            heads = X.copy()
            heads[:, k:] = 0.0
            head_counts = self._head_strict_counts(k, heads, tol)
            total += tails_strict[:, k] * lev_counts * head_counts
        return total

    def _head_strict_counts(self, k, heads, tol, chunk=2048):
        centers = self.nets[k].centers
        if len(centers) == 1:
            return np.ones(len(heads), dtype=np.int64)  # lone cell is all-strict
        out = np.zeros(len(heads), dtype=np.int64)
        for lo in range(0, len(heads), chunk):
            block = heads[lo:lo + chunk]
            D = np.stack([self.space.dist_many(block, c) for c in centers], axis=1)
            part = np.partition(D, 1, axis=1)
            m1, m2 = part[:, 0], part[:, 1]
            floor = np.where(D == m1[:, None], m2[:, None], m1[:, None])
            out[lo:lo + chunk] = (D < floor - tol).sum(axis=1)
        return out

    def inner_probe(self, tid, radius, n_directions=200, seed=0, tol=DEFAULT_TOL):
        """Directions where B(center, radius) pokes out of the tile."""
        dirs = sphere_points(self.space, n_directions, seed)
        mem = self.membership_many(tid, self.center(tid) + radius * dirs, tol=tol)
        return [dirs[row] for row in np.nonzero(mem == int(Membership.OUTSIDE))[0]]

    def outer_gaps(self, X, labels):
        centers = np.stack([self.center(t) for t in labels])
        return self.space.norm_many(np.atleast_2d(X) - centers)

    def starshape_probe(self, tid, xs, segment_count=100, tol=DEFAULT_TOL):
        """Endpoints whose center-to-point segment leaves the tile."""
        xs = np.atleast_2d(xs)
        c = self.center(tid)
        ts = np.linspace(0.0, 1.0, segment_count)
        seg = c[None, None, :] + ts[None, :, None] * (xs[:, None, :] - c[None, None, :])
        mem = self.membership_many(tid, seg.reshape(-1, self.space.dim), tol=tol)
        bad_rows = (mem.reshape(len(xs), segment_count)
                    == int(Membership.OUTSIDE)).any(axis=1)
        return [xs[row] for row in np.nonzero(bad_rows)[0]]


def build_composite(dim=6, p=2.0, system="fig1", depth=2, seed=0,
                    unconditional=False, **kw):
    """Composite tiling of a renormed lp space at the given size."""
    space = NormedSpace("renormed-lp", p, dim)
    return CompositeTiling(space, system=system, depth=depth, seed=seed,
                           unconditional=unconditional, **kw)
