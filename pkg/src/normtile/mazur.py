"""Coordinatewise power map between l2 and lq balls, and tiling transport.

The map ``M(f) = sign(f) |f|^(2/q)`` sends the l2 ball onto the lq ball
(norms transform exactly: ``||M(f)||_q = ||f||_2^(2/q)``) and is uniformly
continuous in both directions; for q = 1 the combined two-sided modulus is
``omega(d) = max(2d, 2 sqrt(d))``.  Pushing a tiling through the map turns
inner radius ``rho`` into the largest ``rho'`` with ``omega(rho') <= rho``
and outer radius ``eps`` into ``omega(eps)``; membership of an image tile
is decided by pulling the point back.  Image tiles are neither convex nor
starshaped in general -- only the radius sandwich survives.
"""

from __future__ import annotations

import numpy as np

from .sampling import ball_points, sphere_points
from .spaces import NormedSpace
from .tiles import DEFAULT_TOL, Membership, TileInfo

MODULUS_GRID = 4096


def mazur(f, q=1.0):
    """Forward map l2 -> lq, coordinatewise sign(f)|f|^(2/q)."""
    f = np.asarray(f, dtype=float)
    if q < 1.0:
        raise ValueError("q must be >= 1")
    return np.sign(f) * np.abs(f) ** (2.0 / q)


def mazur_inverse(g, q=1.0):
    """Inverse map lq -> l2: the exponent swaps to q/2."""
    g = np.asarray(g, dtype=float)
    if q < 1.0:
        raise ValueError("q must be >= 1")
    return np.sign(g) * np.abs(g) ** (q / 2.0)


def standard_modulus(d):
    """Two-sided continuity bound for q = 1 on the unit balls.

    The forward direction satisfies ||M(f)-M(g)||_1 <= 2 ||f-g||_2 and the
    inverse is Hoelder: ||Minv(u)-Minv(v)||_2 <= 2 sqrt(||u-v||_1); the
    pointwise max of the two bounds covers both at once.
    """
    d = np.asarray(d, dtype=float)
    out = np.maximum(2.0 * d, 2.0 * np.sqrt(np.maximum(d, 0.0)))
    return float(out) if out.ndim == 0 else out


def invert_modulus(rho_in, omega=None):
    """Largest rho' with omega(rho') <= rho_in.

    The standard q=1 modulus inverts in closed form:
    min(rho/2, (rho/2)^2).  A custom omega is scanned on a geometric grid;
    if even the smallest grid value violates the bound, the request is
    unsatisfiable at this resolution and raises.
    """
    rho_in = float(rho_in)
    if rho_in <= 0.0:
        raise ValueError("input inner radius must be positive")
    if omega is None:
        half = rho_in / 2.0
        return min(half, half * half)
    grid = np.geomspace(max(1e-12, rho_in * 1e-9), rho_in, MODULUS_GRID)
    ok = np.asarray([float(omega(g)) <= rho_in for g in grid])
    if not ok.any():
        raise ValueError("omega(rho') <= rho_in unsatisfiable at grid resolution")
    return float(grid[np.flatnonzero(ok)[-1]])


def verify_moduli(q=1.0, dim=8, n_pairs=10_000, seed=0, tol=1e-12):
    """Sample pairs in both balls and check the two continuity bounds.

    Returns a report with violation counts, the worst observed ratios and
    the round-trip error; violations carry witness pairs.
    """
    if q != 1.0:
        raise ValueError("the frozen bounds are for q = 1")
    l2 = NormedSpace("lp", p=2.0, dim=dim)
    l1 = NormedSpace("lp", p=1.0, dim=dim)

    fs = ball_points(l2, n_pairs, seed)
    gs = ball_points(l2, n_pairs, seed + 1)
    lhs = np.abs(mazur(fs) - mazur(gs)).sum(axis=1)
    rhs = 2.0 * np.sqrt(((fs - gs) ** 2).sum(axis=1))
    fwd_bad = np.flatnonzero(lhs > rhs + tol)
    with np.errstate(invalid="ignore", divide="ignore"):
        fwd_ratio = float(np.nanmax(np.where(rhs > 0, lhs / rhs, 0.0)))

    us = ball_points(l1, n_pairs, seed + 2)
    vs = ball_points(l1, n_pairs, seed + 3)
    lhs_i = np.sqrt(((mazur_inverse(us) - mazur_inverse(vs)) ** 2).sum(axis=1))
    rhs_i = 2.0 * np.sqrt(np.abs(us - vs).sum(axis=1))
    inv_bad = np.flatnonzero(lhs_i > rhs_i + tol)
    with np.errstate(invalid="ignore", divide="ignore"):
        inv_ratio = float(np.nanmax(np.where(rhs_i > 0, lhs_i / rhs_i, 0.0)))

    roundtrip = float(np.max(np.abs(mazur_inverse(mazur(fs)) - fs)))
    report = {
        "pairs": int(n_pairs), "dim": int(dim), "q": float(q),
        "forward_violations": int(len(fwd_bad)),
        "inverse_violations": int(len(inv_bad)),
        "max_forward_ratio": fwd_ratio,
        "max_inverse_ratio": inv_ratio,
        "roundtrip_max": roundtrip,
        "witnesses": [],
    }
    for i in fwd_bad[:3]:
        report["witnesses"].append(("forward", fs[i].tolist(), gs[i].tolist()))
    for i in inv_bad[:3]:
        report["witnesses"].append(("inverse", us[i].tolist(), vs[i].tolist()))
    return report


class TransportedTiling:
    """A tiling pushed through the power map onto the lq ball.

    Wraps a source tiling of the l2 ball (anything exposing
    ``classify_many``/``membership``/``tile_info`` plus ``rho`` and ``eps``
    attributes); classification and membership pull target points back
    through the inverse map, centers push forward.  Radius constants
    degrade per the modulus: inner ``rho' = invert_modulus(rho)``, outer
    ``omega(eps)``.
    """

    UNCLASSIFIED = -2
    probe_mode = "custom"

    def __init__(self, source, q=1.0, omega=None, rho_in=None, eps_in=None):
        self.source = source
        self.q = float(q)
        self._omega = standard_modulus if omega is None else omega
        src_space = source.space
        if src_space.norm_kind != "lp" or src_space.p != 2.0:
            raise ValueError("transport starts from an l2 ball tiling")
        self.space = NormedSpace("lp", p=self.q, dim=src_space.dim)
        self.rho_in = float(source.rho if rho_in is None else rho_in)
        self.eps_in = float(source.eps if eps_in is None else eps_in)
        self.rho_prime = invert_modulus(self.rho_in, omega)
        self.outer_radius = float(self._omega(self.eps_in))

    # -- pullback plumbing ------------------------------------------------

    def pull_back(self, xs):
        return mazur_inverse(xs, self.q)

    def push_forward(self, xs):
        return mazur(xs, self.q)

    def classify_many(self, xs, tol=DEFAULT_TOL):
        return self.source.classify_many(self.pull_back(xs), tol)

    def classify(self, x, tol=DEFAULT_TOL):
        return self.source.classify(self.pull_back(x), tol)

    def membership(self, tile_id, x, tol=DEFAULT_TOL):
        return self.source.membership(tile_id, self.pull_back(x), tol)

    def strict_counts_many(self, xs, tol=DEFAULT_TOL):
        return self.source.strict_counts_many(self.pull_back(xs), tol)

    def center(self, tile_id):
        return self.push_forward(self.source.tile_info(tile_id).center)

    def tile_info(self, tile_id):
        src = self.source.tile_info(tile_id)
        return TileInfo(src.tile_id, f"mazur:{src.kind}",
                        self.push_forward(src.center), self.rho_prime,
                        self.outer_radius,
                        {"q": self.q, "source_inner": src.inner_radius,
                         "source_outer": src.outer_radius})

    def observed_tiles(self, labels):
        seen = sorted({int(t) for t in np.asarray(labels).ravel() if t >= -1})
        return [self.tile_info(t) for t in seen]

    def inner_probe(self, tile_id, radius=None, n_points=64, seed=0,
                    tol=DEFAULT_TOL):
        """Probe B(center, radius) inside the image tile, within the lq ball."""
        info = self.tile_info(tile_id)
        radius = self.rho_prime if radius is None else float(radius)
        probes = info.center[None, :] + radius * sphere_points(
            self.space, n_points, seed)
        kept = probes[self.space.norm_many(probes) <= 1.0]
        bad = sum(1 for pt in kept
                  if self.membership(tile_id, pt, tol) is Membership.OUTSIDE)
        return {"tile": int(tile_id), "radius": radius, "probes": len(kept),
                "violations": int(bad)}

    def outer_check(self, xs, labels=None, tol=DEFAULT_TOL):
        """Target-norm distance from samples to their mapped tile centers."""
        xs = np.atleast_2d(np.asarray(xs, dtype=float))
        if labels is None:
            labels = self.classify_many(xs, tol)
        labels = np.asarray(labels, dtype=int)
        worst, viol = 0.0, 0
        for t in np.unique(labels[labels >= -1]):
            d = self.space.dist_many(xs[labels == t], self.center(t))
            worst = max(worst, float(np.max(d)))
            viol += int(np.sum(d > self.outer_radius + tol))
        return {"samples": len(xs), "max_center_distance": worst,
                "violations": viol, "bound": self.outer_radius}

    def to_json(self):
        return {"kind": "mazur-transport", "q": self.q,
                "rho_prime": self.rho_prime, "outer": self.outer_radius,
                "source": self.source.to_json()}

    @classmethod
    def from_json(cls, blob):
        from .body import LayeredTiling
        if blob.get("kind") != "mazur-transport":
            raise ValueError("not a transport record")
        src = blob["source"]
        if src.get("kind") != "body-layered":
            raise ValueError(f"cannot rebuild source tiling {src.get('kind')!r}")
        return cls(LayeredTiling.from_json(src), blob.get("q", 1.0))


def transport_tiling(source, q=1.0, omega=None):
    """Push a tiling of the l2 ball onto the lq ball via the power map."""
    return TransportedTiling(source, q, omega)
