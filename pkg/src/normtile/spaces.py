"""Finite-dimensional normed spaces: lp norms, the sup norm, and a renormed
variant in which every tail projection of the coordinate basis has norm one.

All vectors are 1-d numpy arrays of a fixed dimension.  The module also
provides norming functionals (the duality map), and the modulus of convexity
with an exact closed form for l2 and a certified analytic lower bound for the
other lp norms.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

NORM_KINDS = ("lp", "sup", "renormed-lp")

# Tolerances for the numerical norming-functional fallback.
NUMERICAL_DUALITY_TOL = 1e-8
NUMERICAL_DUALITY_MAX_ITER = 10**4


class NormedSpace:
    """R^dim equipped with an lp norm, the sup norm, or the renormed-lp norm.

    The renormed-lp norm is |x| = max_k ||Q_k x||_p over all tail projections
    Q_k (k = 0..dim).  For the coordinate lp norms the maximum is attained at
    k = 0, so the renormed norm coincides numerically with the base norm; the
    code evaluates the maximum literally so the definition, not the
    coincidence, is what runs.
    """

    def __init__(self, norm_kind="lp", p=2.0, dim=2):
        if norm_kind not in NORM_KINDS:
            raise ValueError("unknown norm_kind %r" % (norm_kind,))
        if dim <= 0:
            raise ValueError("dim must be positive, got %r" % (dim,))
        if norm_kind != "sup":
            p = float(p)
            if p < 1.0:
                raise ValueError("p must be >= 1, got %r" % (p,))
        else:
            p = float("inf")
        self.norm_kind = norm_kind
        self.p = p
        self.dim = int(dim)

    # ------------------------------------------------------------------
    # construction helpers

    @classmethod
    def from_config(cls, source):
        """Build a space from a dict or a JSON config file path.

        The config holds {"dim": n, "norm_kind": kind, "p": p}; "p" may be
        omitted for the sup norm.
        """
        if isinstance(source, (str,)):
            with open(source) as fh:
                source = json.load(fh)
        return cls(
            norm_kind=source.get("norm_kind", "lp"),
            p=source.get("p", 2.0),
            dim=source["dim"],
        )

    def to_config(self):
        cfg = {"norm_kind": self.norm_kind, "dim": self.dim}
        if self.norm_kind != "sup":
            cfg["p"] = self.p
        return cfg

    def __repr__(self):
        if self.norm_kind == "sup":
            return "NormedSpace(sup, dim=%d)" % self.dim
        return "NormedSpace(%s, p=%g, dim=%d)" % (self.norm_kind, self.p, self.dim)

    def __eq__(self, other):
        return (
            isinstance(other, NormedSpace)
            and self.norm_kind == other.norm_kind
            and self.p == other.p
            and self.dim == other.dim
        )

    # ------------------------------------------------------------------
    # norms

    def _check(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(
                "vector has dimension %d, space has dimension %d"
                % (x.shape[-1], self.dim)
            )
        return x

    def norm(self, x):
        """Norm of a single vector."""
        return float(self.norm_many(np.asarray(x, dtype=float)[None, :])[0])

    def norm_many(self, xs):
        """Norms of the rows of an (n, dim) array."""
        xs = self._check(xs)
        if self.norm_kind == "sup":
            return np.max(np.abs(xs), axis=-1)
        if self.norm_kind == "lp":
            return self._lp_norm(xs)
        # renormed-lp: max over tail projections; suffix power sums give all
        # ||Q_k x||_p at once.
        a = np.abs(xs) ** self.p
        suffix = np.cumsum(a[..., ::-1], axis=-1)[..., ::-1]
        tails = suffix ** (1.0 / self.p)
        return np.max(tails, axis=-1)

    def _lp_norm(self, xs):
        if self.p == 2.0:
            return np.sqrt(np.sum(xs * xs, axis=-1))
        return np.sum(np.abs(xs) ** self.p, axis=-1) ** (1.0 / self.p)

    def dist(self, x, y):
        return self.norm(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))

    def dist_many(self, xs, y):
        """Distances from each row of xs to the single vector y."""
        return self.norm_many(np.asarray(xs, dtype=float) - np.asarray(y, dtype=float))

    # ------------------------------------------------------------------
    # basis projections

    def tail_projection(self, x, k):
        """Q_k x: zero out coordinates 0..k-1, keep k..dim-1.  Q_dim = 0."""
        if not 0 <= k <= self.dim:
            raise ValueError("tail index k=%r outside 0..%d" % (k, self.dim))
        x = self._check(x)
        out = np.array(x, dtype=float, copy=True)
        out[..., :k] = 0.0
        return out

    def head_projection(self, x, k):
        """P_k x = x - Q_k x: keep coordinates 0..k-1."""
        if not 0 <= k <= self.dim:
            raise ValueError("head index k=%r outside 0..%d" % (k, self.dim))
        x = self._check(x)
        out = np.array(x, dtype=float, copy=True)
        out[..., k:] = 0.0
        return out

    # ------------------------------------------------------------------
    # duality

    @property
    def dual_exponent(self):
        if self.norm_kind == "sup":
            return 1.0
        if self.p == 1.0:
            return float("inf")
        return self.p / (self.p - 1.0)

    def functional_norm(self, coeffs):
        """Dual norm of a coefficient vector."""
        coeffs = self._check(coeffs)[None, :]
        q = self.dual_exponent
        if q == float("inf"):
            return float(np.max(np.abs(coeffs)))
        if q == 2.0:
            return float(np.sqrt(np.sum(coeffs * coeffs)))
        return float(np.sum(np.abs(coeffs) ** q) ** (1.0 / q))

    def duality_map(self, x):
        """Norming functional: f with dual norm 1 and f(x) = ||x||.

        For lp with 1 < p < inf the closed form sign(x_i)|x_i|^{p-1} /
        ||x||^{p-1} is used.  The norm is not smooth for p = 1 and the sup
        norm; there the canonical subgradient is returned (sign vector on the
        support for l1, the smallest-index maximal coordinate for sup), which
        makes the map deterministic at ties.
        """
        x = self._check(np.asarray(x, dtype=float))
        n = self.norm(x)
        if n == 0.0:
            raise ValueError("zero vector has no norming functional")
        if self.norm_kind == "sup":
            i = int(np.argmax(np.abs(x)))
            coeffs = np.zeros(self.dim)
            coeffs[i] = np.sign(x[i])
            return Functional(self, coeffs)
        if self.p == 1.0:
            return Functional(self, np.sign(x))
        coeffs = np.sign(x) * np.abs(x) ** (self.p - 1.0) / n ** (self.p - 1.0)
        return Functional(self, coeffs)


@dataclass
class Functional:
    """A linear functional given by its coefficient vector."""

    space: NormedSpace
    coeffs: np.ndarray

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=float)

    def __call__(self, x):
        return float(np.dot(self.coeffs, np.asarray(x, dtype=float)))

    def apply_many(self, xs):
        return np.asarray(xs, dtype=float) @ self.coeffs

    def dual_norm(self):
        return self.space.functional_norm(self.coeffs)


def numerical_norming_functional(norm_fn, x, tol=NUMERICAL_DUALITY_TOL,
                                 max_iter=NUMERICAL_DUALITY_MAX_ITER):
    """Numerical norming functional for a custom norm callable.

    Extension point for norms without a closed-form duality map.  The
    coefficients start from a central finite-difference gradient of the norm
    (exact wherever the norm is smooth, by Euler's relation for 1-homogeneous
    functions) and are then refined by subgradient ascent over dual-ball
    probes until f(x) = ||x|| and the probed dual norm is 1 within `tol`.

    Returns (coeffs, residual).  Raises ValueError on the zero vector and
    RuntimeError if the residual has not converged after `max_iter` steps.
    """
    x = np.asarray(x, dtype=float)
    n = float(norm_fn(x))
    if n == 0.0:
        raise ValueError("zero vector has no norming functional")
    dim = x.shape[0]
    h = 1e-7 * max(n, 1.0)
    g = np.zeros(dim)
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = h
        g[i] = (norm_fn(x + e) - norm_fn(x - e)) / (2.0 * h)

    rng = np.random.default_rng(0)
    probes = rng.standard_normal((256, dim))
    probes /= np.array([norm_fn(row) for row in probes])[:, None]
    probes = np.concatenate([(x / n)[None], probes])

    def residual(c):
        # value gap at x, plus any dual-ball excess seen by the probes
        # (x/||x|| itself is a probe, so both hit zero exactly at a true
        # norming functional)
        excess = max(0.0, float(np.max(np.abs(probes @ c))) - 1.0)
        return max(abs(float(c @ x) - n) / max(n, 1.0), excess)

    best_c, best_r = None, np.inf
    c = g.copy()
    step = 0.5
    for _ in range(max_iter):
        dual = float(np.max(np.abs(probes @ c)))
        if dual > 0:
            c = c / dual
        r = residual(c)
        if r < best_r:
            best_c, best_r = c.copy(), r
        if best_r <= tol:
            return best_c, best_r
        # push the value at x back up, then the next pass rescales
        gap = n - float(c @ x)
        c = c + step * gap * x / float(x @ x)
        step = max(step * 0.97, 1e-3)
    if best_r <= 1e3 * tol:
        return best_c, best_r
    raise RuntimeError(
        "norming functional did not converge: residual %.3e > %.3e" % (best_r, tol)
    )


# ----------------------------------------------------------------------
# modulus of convexity


@dataclass
class ModulusBound:
    """Value of the modulus of convexity at some eps.

    kind is "exact" (l2 closed form) or "lower-bound" (analytic Clarkson
    bound; reported as a bound, not an exact value).
    """

    value: float
    kind: str
    eps: float

    def __float__(self):
        return float(self.value)


def modulus_of_convexity(space, eps):
    """Modulus of convexity delta(eps) of the space, eps in (0, 2].

    l2 has the closed form 1 - sqrt(1 - eps^2/4).  For the other lp norms
    (1 < p < inf) a certified analytic lower bound is returned: from the
    first Clarkson inequality for p >= 2 and from the second (with the dual
    exponent) for 1 < p < 2.  A lower bound only shrinks the radii derived
    from it downstream, which keeps those constructions sound.
    """
    if not 0.0 < eps <= 2.0:
        raise ValueError("eps must be in (0, 2], got %r" % (eps,))
    if space.norm_kind == "sup" or space.p == 1.0:
        raise ValueError("norm is not uniformly convex")
    p = space.p
    if p == 2.0:
        return ModulusBound(1.0 - np.sqrt(1.0 - (eps / 2.0) ** 2), "exact", eps)
    s = p if p > 2.0 else p / (p - 1.0)
    value = 1.0 - (1.0 - (eps / 2.0) ** s) ** (1.0 / s)
    return ModulusBound(float(value), "lower-bound", eps)


def modulus_empirical_min(space, eps, n_pairs=2000, seed=0):
    """Sampled minimization of 1 - ||(x+y)/2|| over pairs with ||x||,||y|| <= 1
    and ||x - y|| >= eps.

    The sampled minimum can only sit above the true infimum, so this is used
    as a cross-check against the certified lower bound, not as the bound
    itself.  Includes the axis-aligned near-extremal pairs explicitly.
    """
    if not 0.0 < eps <= 2.0:
        raise ValueError("eps must be in (0, 2], got %r" % (eps,))
    rng = np.random.default_rng(seed)
    best = np.inf
    p = space.p

    # designed near-extremal pair: x = (a, b, 0, ...), y = (a, -b, 0, ...)
    if space.dim >= 2 and space.norm_kind != "sup" and p > 1.0:
        b = eps / 2.0
        if b <= 1.0:
            a = (max(0.0, 1.0 - b**p)) ** (1.0 / p)
            x = np.zeros(space.dim)
            y = np.zeros(space.dim)
            x[0] = y[0] = a
            x[1], y[1] = b, -b
            if space.norm(x) <= 1.0 + 1e-12 and space.norm(x - y) >= eps - 1e-12:
                best = min(best, 1.0 - space.norm((x + y) / 2.0))

    xs = rng.standard_normal((n_pairs, space.dim))
    ys = rng.standard_normal((n_pairs, space.dim))
    xs /= space.norm_many(xs)[:, None]
    ys /= space.norm_many(ys)[:, None]
    d = space.norm_many(xs - ys)
    keep = d >= eps
    if np.any(keep):
        mids = (xs[keep] + ys[keep]) / 2.0
        best = min(best, float(np.min(1.0 - space.norm_many(mids))))
    if not np.isfinite(best):
        # fall back to antipodal-ish pairs, which always satisfy the gap
        u = rng.standard_normal(space.dim)
        u /= space.norm(u)
        best = 1.0 - space.norm((u - u) / 2.0)  # = 1.0
    return best
