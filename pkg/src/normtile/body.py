"""Peeling a convex body into small-diameter tiles.

The construction removes tangent slices from the body until everything
outside a shrunken ball is gone, then rescales and repeats on the core.
Each slice is a cap ``{f >= lam}`` cut by the norming functional of a
carefully placed interior point, chosen so that the cap contains a ball
of computable radius that is externally tangent to ``B(0, 1 - delta)``.
After ``n`` rounds the leftover core has diameter below the target and
the slices, read in creation order, tile the body with a first-hit rule.

Everything here works in two frames: ``peel_layer`` and ``build_slice``
operate on a body normalised to sit inside the unit ball, while the
assembled ``LayeredTiling`` stores slices rescaled back to absolute
coordinates (functional thresholds, centers and radii all carry the
layer scale).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .sampling import ball_points, sphere_points
from .spaces import NormedSpace, modulus_of_convexity
from .tiles import DEFAULT_TOL, Membership, TileInfo

CONSTRAINT_DUAL_TOL = 1e-9
CERT_SLACK = 1e-12
_SLICE_BUDGET = 50_000


class ConvexBody:
    """A ball of a normed space intersected with half-spaces.

    The representation keeps ``B(0, eta)`` inside and ``B(0, radius)``
    outside by construction; every stored half-space ``f(x) <= lam`` has
    a unit-dual-norm functional.  Bodies are immutable; ``with_constraint``
    returns a new one.
    """

    def __init__(self, space, eta, radius=1.0, funcs=None, lams=None, meta=None,
                 validate=True):
        self.space = space
        self.radius = float(radius)
        self.eta = float(eta)
        if not 0.0 < self.eta <= self.radius:
            raise ValueError("inner radius must lie in (0, radius]")
        if funcs is None:
            funcs = np.zeros((0, space.dim))
        self.funcs = np.asarray(funcs, dtype=float).reshape(-1, space.dim)
        self.lams = np.asarray(lams if lams is not None else [], dtype=float).reshape(-1)
        if len(self.funcs) != len(self.lams):
            raise ValueError("functional/threshold count mismatch")
        if validate:
            for row in self.funcs:
                if abs(space.functional_norm(row) - 1.0) > CONSTRAINT_DUAL_TOL:
                    raise ValueError("constraint functional is not unit dual norm")
        self.meta = dict(meta or {})

    @classmethod
    def ball(cls, space, radius=1.0, eta=None):
        return cls(space, radius if eta is None else eta, radius)

    @property
    def n_constraints(self):
        return len(self.lams)

    def with_constraint(self, coeffs, lam):
        coeffs = np.asarray(coeffs, dtype=float)
        if abs(self.space.functional_norm(coeffs) - 1.0) > CONSTRAINT_DUAL_TOL:
            raise ValueError("constraint functional is not unit dual norm")
        funcs = np.vstack([self.funcs, coeffs[None]])
        lams = np.append(self.lams, float(lam))
        # rows already validated one at a time; skip the O(m) recheck
        return ConvexBody(self.space, self.eta, self.radius, funcs, lams,
                          self.meta, validate=False)

    def margin_many(self, xs):
        """Signed slack to the boundary; >0 strictly inside, <0 outside."""
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        m = self.radius - self.space.norm_many(xs)
        if len(self.lams):
            m = np.minimum(m, np.min(self.lams[None, :] - xs @ self.funcs.T, axis=1))
        return m

    def contains_many(self, xs, tol=DEFAULT_TOL):
        return self.margin_many(xs) >= -tol

    def membership(self, x, tol=DEFAULT_TOL):
        m = float(self.margin_many(np.asarray(x, dtype=float)[None])[0])
        if m > tol:
            return Membership.STRICT
        if m >= -tol:
            return Membership.INSIDE
        return Membership.OUTSIDE

    def ray_reach(self, dirs):
        """How far the body extends along each unit direction.

        Exact for this representation: along ``t * u`` the base ball allows
        ``t <= radius`` and each half-space allows ``t <= lam / f(u)`` when
        ``f(u) > 0``.  Directions must have unit space norm.
        """
        dirs = np.atleast_2d(np.asarray(dirs, dtype=float))
        reach = np.full(len(dirs), self.radius)
        if len(self.lams):
            dots = dirs @ self.funcs.T
            with np.errstate(divide="ignore", over="ignore"):
                caps = np.where(dots > 1e-15, self.lams[None, :] / dots, np.inf)
            reach = np.minimum(reach, caps.min(axis=1))
        return reach


@dataclass
class SliceSpec:
    """One tangent slice: the cap ``{x in body : f(x) >= lam}``.

    ``center`` is the tangent-ball midpoint (the cap contains
    ``B(center, r_slice)``), and ``norm(center) - r_slice`` equals the
    separation level ``(1 - delta) * scale`` exactly.  ``scale`` is the
    layer rescaling already applied to ``lam``, ``center`` and ``r_slice``.
    """

    coeffs: np.ndarray
    lam: float
    center: np.ndarray
    r_slice: float
    layer: int = 1
    scale: float = 1.0

    def value(self, x):
        return float(np.dot(self.coeffs, np.asarray(x, dtype=float)))

    def rescaled(self, factor, layer=None):
        return replace(
            self,
            lam=self.lam * factor,
            center=self.center * factor,
            r_slice=self.r_slice * factor,
            layer=self.layer if layer is None else layer,
            scale=self.scale * factor,
        )


def build_slice(body, x, delta, eta=None):
    """Cut the tangent slice of ``body`` through the outer point ``x``.

    Requires ``norm(x) >= sqrt(1 - delta)`` and the body normalised to
    the unit ball.  The slice is ``{f >= 1 - delta}`` for the norming
    functional ``f`` of the tangent-ball center ``y0``; it contains ``x``,
    contains ``B(y0, r_slice)``, and misses the open ball ``B(0, 1-delta)``.
    """
    space = body.space
    x = np.asarray(x, dtype=float)
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    eta = body.eta if eta is None else float(eta)
    eta_d = min(eta, 1.0 - delta)
    if eta_d <= 0.0:
        raise ValueError("degenerate inner radius")
    root = math.sqrt(1.0 - delta)
    nx = space.norm(x)
    if nx < root - 1e-12:
        raise ValueError(f"slice point has norm {nx:.6g} < sqrt(1-delta) = {root:.6g}")
    if body.membership(x) is Membership.OUTSIDE:
        raise ValueError("slice point is not in the body")

    x0 = (root / nx) * x
    y0 = ((eta_d + (1.0 - delta)) / (eta_d + root)) * x0
    r_slice = eta_d * (root - (1.0 - delta)) / (eta_d + root)
    f = space.duality_map(y0)
    coeffs = f.coeffs / f.dual_norm()  # pin the dual norm to exactly 1
    return SliceSpec(coeffs, 1.0 - delta, y0, r_slice)


def peel_layer(body, delta, eta=None, pool=None, seed=0, pool_size=100_000,
               cert_directions=4096, max_rounds=40, augment=True):
    """Remove tangent slices until the body fits in ``B(0, sqrt(1-delta))``.

    Greedy loop: take the max-norm pool survivor above the shell guard
    ``sqrt(1-delta)``, slice there, drop covered pool points, repeat.
    Once the pool is exhausted the core is certified by ray probes along
    fresh unit directions; any direction still reaching past the guard
    is peeled in place (adversarial augmentation) until a full round of
    fresh probes comes back clean.  With ``augment=False`` a failed probe
    round raises instead -- the sparse-pool diagnostic.

    Returns ``(slices, core)`` with slices in creation order and the core
    being ``body`` plus one constraint per slice.
    """
    space = body.space
    gamma = math.sqrt(1.0 - delta)
    eta = body.eta if eta is None else float(eta)

    if pool is None:
        pool = ball_points(space, pool_size, seed, radius=body.radius)
    pts = np.asarray(pool, dtype=float).reshape(-1, space.dim)
    pts = pts[body.contains_many(pts)]
    norms = space.norm_many(pts) if len(pts) else np.zeros(0)

    slices = []
    cur = body

    def cut(x):
        s = build_slice(cur, x, delta, eta)
        slices.append(s)
        if len(slices) > _SLICE_BUDGET:
            raise RuntimeError("slice budget exhausted; peeling is not converging")
        return s

    while len(pts):
        live = norms > gamma
        if not live.any():
            break
        masked = np.where(live, norms, -np.inf)
        i = int(np.argmax(masked))  # max-norm survivor, first index on ties
        s = cut(pts[i].copy())
        cur = cur.with_constraint(s.coeffs, s.lam)
        keep = pts @ s.coeffs <= s.lam
        pts, norms = pts[keep], norms[keep]

    # Core certification: the greedy loop only proves the *pool* is below
    # the guard.  Ray reach is exact for the half-space representation, so
    # probe fresh directions and peel whatever still pokes out.
    certified = False
    for rnd in range(max_rounds):
        dirs = sphere_points(space, cert_directions, seed * 31 + 101 * rnd + 7)
        reach = cur.ray_reach(dirs)
        worst = int(np.argmax(reach))
        if reach[worst] <= gamma + CERT_SLACK:
            certified = True
            cur.meta = dict(cur.meta, cert_rounds=rnd + 1,
                            cert_max_reach=float(reach[worst]))
            break
        if not augment:
            raise RuntimeError(
                "pool too sparse: core reaches "
                f"{reach[worst]:.9f} > {gamma:.9f} along direction "
                f"{np.array2string(dirs[worst], precision=5)}"
            )
        while reach[worst] > gamma + CERT_SLACK:
            s = cut(reach[worst] * dirs[worst])
            cur = cur.with_constraint(s.coeffs, s.lam)
            dots = dirs @ s.coeffs
            with np.errstate(divide="ignore", over="ignore"):
                caps = np.where(dots > 1e-15, s.lam / dots, np.inf)
            reach = np.minimum(reach, caps)
            worst = int(np.argmax(reach))
    if not certified:
        raise RuntimeError("core certification did not converge; raise "
                           "cert_directions or the round budget")
    return slices, cur


class LayeredTiling:
    """Tiles of a convex body: rescaled tangent slices plus a small core.

    Slices are stored in creation order (layers concatenated) with
    absolute-frame thresholds, so classification is a first-hit scan:
    the tile of ``x`` is the first slice with ``f_i(x) >= lam_i``, and
    the core if no slice fires.  Tile ids are the slice position
    (0-based); the core is ``-1``; points outside the body get ``-2``
    from ``classify_many``.
    """

    UNCLASSIFIED = -2
    probe_mode = "custom"

    def __init__(self, body, eps, delta, n_layers, slices, layer_r, seed=0,
                 pool_size=0):
        self.body = body
        self.space = body.space
        self.eps = float(eps)
        self.delta = float(delta)
        self.gamma = math.sqrt(1.0 - self.delta)
        self.n_layers = int(n_layers)
        self.slices = list(slices)
        self.layer_r = dict(layer_r)  # unit-frame tangent radius per layer
        self.seed = int(seed)
        self.pool_size = int(pool_size)

        self._funcs = (np.stack([s.coeffs for s in self.slices])
                       if self.slices else np.zeros((0, self.space.dim)))
        self._lams = np.array([s.lam for s in self.slices])
        self._centers = (np.stack([s.center for s in self.slices])
                         if self.slices else np.zeros((0, self.space.dim)))
        self._r = np.array([s.r_slice for s in self.slices])

        g, n = self.gamma, self.n_layers
        self.core_outer = g ** n
        self.core_inner = min(body.eta, 1.0 - self.delta) * g ** (n - 1)
        terms = [body.eta, g ** (n + 1)]
        terms += [r * g ** (k - 1) for k, r in self.layer_r.items()]
        self.rho = min(terms)

    # -- classification ------------------------------------------------

    @property
    def n_slices(self):
        return len(self.slices)

    def classify_many(self, xs, tol=DEFAULT_TOL):
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        labels = np.full(len(xs), -2, dtype=int)
        ok = self.body.contains_many(xs, tol)
        if not ok.any():
            return labels
        if self.n_slices:
            hits = xs[ok] @ self._funcs.T >= self._lams[None, :]
            has = hits.any(axis=1)
            first = np.argmax(hits, axis=1)
            labels[np.flatnonzero(ok)] = np.where(has, first, -1)
        else:
            labels[ok] = -1
        return labels

    def classify(self, x, tol=DEFAULT_TOL):
        label = int(self.classify_many(np.asarray(x, dtype=float)[None], tol)[0])
        if label == -2:
            raise ValueError("point is not in the body")
        return label

    def membership(self, tile_id, x, tol=DEFAULT_TOL):
        """Closed-tile membership with the usual strict/inside/outside split."""
        tile_id = int(tile_id)
        x = np.asarray(x, dtype=float)
        margin = float(self.body.margin_many(x[None])[0])
        if self.n_slices:
            vals = self._funcs @ x
        else:
            vals = np.zeros(0)
        if tile_id == -1:
            if self.n_slices:
                margin = min(margin, float(np.min(self._lams - vals)))
        else:
            if not 0 <= tile_id < self.n_slices:
                raise KeyError(f"no tile {tile_id}")
            if tile_id:
                margin = min(margin, float(np.min(self._lams[:tile_id] - vals[:tile_id])))
            margin = min(margin, float(vals[tile_id] - self._lams[tile_id]))
        if margin > tol:
            return Membership.STRICT
        if margin >= -tol:
            return Membership.INSIDE
        return Membership.OUTSIDE

    def strict_counts_many(self, xs, tol=DEFAULT_TOL):
        """In how many tiles (core included) each point is strict.

        Structurally at most one: the first soft hit along the scan order
        decides the only candidate tile.
        """
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        base_strict = self.body.margin_many(xs) > tol
        if not self.n_slices:
            return base_strict.astype(int)
        vals = xs @ self._funcs.T
        soft = vals >= (self._lams[None, :] - tol)
        any_soft = soft.any(axis=1)
        first = np.argmax(soft, axis=1)
        rows = np.arange(len(xs))
        hard_at_first = vals[rows, first] > self._lams[first] + tol
        counts = np.where(
            any_soft,
            (hard_at_first & base_strict).astype(int),
            base_strict.astype(int),
        )
        return counts

    # -- per-tile data ---------------------------------------------------

    def center(self, tile_id):
        tile_id = int(tile_id)
        if tile_id == -1:
            return np.zeros(self.space.dim)
        return self._centers[tile_id].copy()

    def tile_info(self, tile_id):
        tile_id = int(tile_id)
        if tile_id == -1:
            return TileInfo(-1, "body-core", np.zeros(self.space.dim),
                            self.core_inner, self.core_outer,
                            {"layer": self.n_layers + 1})
        s = self.slices[tile_id]
        return TileInfo(tile_id, "body-slice", s.center.copy(), s.r_slice,
                        self.eps, {"layer": s.layer, "scale": s.scale,
                                   "lam": s.lam})

    def observed_tiles(self, labels):
        seen = sorted({int(t) for t in np.asarray(labels).ravel() if t >= -1})
        return [self.tile_info(t) for t in seen]

    def tangency_residuals(self):
        """|norm(center) - r_slice - (1-delta)*scale| per slice; zero in theory."""
        out = np.zeros(self.n_slices)
        for i, s in enumerate(self.slices):
            out[i] = abs(self.space.norm(s.center) - s.r_slice
                         - (1.0 - self.delta) * s.scale)
        return out

    def inner_probe(self, tile_id, radius=None, n_points=64, seed=0,
                    tol=DEFAULT_TOL):
        """Check ``B(center, radius)`` sits inside the closed tile."""
        info = self.tile_info(tile_id)
        radius = info.inner_radius if radius is None else float(radius)
        dirs = sphere_points(self.space, n_points, seed)
        probes = info.center[None, :] + radius * dirs
        bad = sum(1 for pt in probes
                  if self.membership(tile_id, pt, tol) is Membership.OUTSIDE)
        return {"tile": int(tile_id), "radius": radius,
                "probes": int(n_points), "violations": int(bad)}

    def outer_check(self, xs, labels=None, tol=DEFAULT_TOL):
        """Distance from each classified sample to its tile center vs eps."""
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        if labels is None:
            labels = self.classify_many(xs, tol)
        labels = np.asarray(labels, dtype=int)
        out = {"samples": len(xs), "outside_body": int(np.sum(labels == -2)),
               "max_center_distance": 0.0, "violations": 0,
               "core_max_norm": 0.0}
        worst = 0.0
        viol = 0
        core = labels == -1
        if core.any():
            core_norms = self.space.norm_many(xs[core])
            out["core_max_norm"] = float(np.max(core_norms))
            worst = out["core_max_norm"]
            viol += int(np.sum(core_norms > self.eps + tol))
        for t in np.unique(labels[labels >= 0]):
            d = self.space.dist_many(xs[labels == t], self._centers[t])
            worst = max(worst, float(np.max(d)))
            viol += int(np.sum(d > self.eps + tol))
        out["max_center_distance"] = worst
        out["violations"] = viol
        return out

    # -- serialization ---------------------------------------------------

    def to_json(self):
        return {
            "kind": "body-layered",
            "space": self.space.to_config(),
            "eps": self.eps,
            "delta": self.delta,
            "n_layers": self.n_layers,
            "eta": self.body.eta,
            "radius": self.body.radius,
            "rho": self.rho,
            "seed": self.seed,
            "pool_size": self.pool_size,
            "layer_r": {str(k): v for k, v in self.layer_r.items()},
            "slices": [
                {"layer": s.layer, "scale": s.scale, "lam": s.lam,
                 "r": s.r_slice, "coeffs": s.coeffs.tolist(),
                 "center": s.center.tolist()}
                for s in self.slices
            ],
        }

    @classmethod
    def from_json(cls, blob):
        if blob.get("kind") != "body-layered":
            raise ValueError("not a body tiling record")
        space = NormedSpace.from_config(blob["space"])
        body = ConvexBody.ball(space, blob.get("radius", 1.0),
                               eta=blob.get("eta"))
        slices = [
            SliceSpec(np.asarray(s["coeffs"], dtype=float), float(s["lam"]),
                      np.asarray(s["center"], dtype=float), float(s["r"]),
                      int(s["layer"]), float(s["scale"]))
            for s in blob["slices"]
        ]
        layer_r = {int(k): float(v) for k, v in blob.get("layer_r", {}).items()}
        return cls(body, blob["eps"], blob["delta"], blob["n_layers"],
                   slices, layer_r, blob.get("seed", 0),
                   blob.get("pool_size", 0))


def layer_count(eps, gamma):
    """Smallest n >= 1 with gamma**n <= eps (float-edge safe)."""
    n = max(1, int(math.ceil(math.log(eps) / math.log(gamma) - 1e-12)))
    while gamma ** n > eps:
        n += 1
    while n > 1 and gamma ** (n - 1) <= eps:
        n -= 1
    return n


def build_body_tiling(body, eps, seed=0, pool_size=100_000,
                      cert_directions=4096):
    """Full layered peel of a convex body down to diameter ``eps``.

    ``body`` may be a ConvexBody or a NormedSpace (meaning its unit
    ball).  Layer k peels the rescaled core of layer k-1 (division by
    ``gamma = sqrt(1-delta)``) and its slices are rescaled back by
    ``gamma**(k-1)``.  The returned tiling carries the uniform inner
    radius ``rho = min(eta, gamma**(n+1), min_k r_k * gamma**(k-1))``.
    """
    if isinstance(body, NormedSpace):
        body = ConvexBody.ball(body)
    space = body.space
    if not 0.0 < eps < 2.0 * body.radius:
        raise ValueError("eps must be positive and below the body diameter")
    delta = float(modulus_of_convexity(space, eps))
    gamma = math.sqrt(1.0 - delta)
    n = layer_count(eps, gamma)

    slices_abs = []
    layer_r = {}
    cur = body
    eta_k = body.eta
    for k in range(1, n + 1):
        sl, core = peel_layer(cur, delta, eta_k, None, seed + 977 * k,
                              pool_size=pool_size,
                              cert_directions=cert_directions)
        scale = gamma ** (k - 1)
        slices_abs += [s.rescaled(scale, layer=k) for s in sl]
        if sl:
            layer_r[k] = sl[0].r_slice
        # Hand the core to the next layer in its own frame.  The base
        # radius is capped at 1: the certified reach is <= gamma, and the
        # absolute unit-ball bound stays implied by the layer-1 frame.
        funcs = core.funcs
        lams = core.lams / gamma
        eta_k = min(1.0, min(eta_k, 1.0 - delta) / gamma)
        cur = ConvexBody(space, eta_k, 1.0, funcs, lams)
    return LayeredTiling(body, eps, delta, n, slices_abs, layer_r, seed,
                         pool_size)
