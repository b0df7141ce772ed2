"""Greedy maximal families: separated nets, biorthogonal systems, and norming
families.

All three run the same scan: walk a deterministic candidate stream, accept a
candidate when it is compatible with everything accepted so far, and discard
the candidates the new member rules out.  Discarding is monotone (a candidate
rejected once can never become acceptable), so filtering the remainder after
each acceptance reproduces the naive sequential greedy exactly while keeping
the inner loop vectorized.

Maximality is certified only relative to the supplied candidate stream; the
verification harness's coverage checks are the safety net for streams that
are too sparse.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np


@dataclass
class SeparatedNet:
    """Centers pairwise at least `separation` apart in the space norm."""

    space: object
    separation: float
    centers: np.ndarray
    candidate_count: int = 0

    def __len__(self):
        return len(self.centers)

    def to_json(self):
        return json.dumps(
            {
                "space": self.space.to_config(),
                "separation": self.separation,
                "centers": np.asarray(self.centers).tolist(),
                "candidate_count": self.candidate_count,
            }
        )

    @classmethod
    def from_json(cls, text, space_cls):
        data = json.loads(text)
        return cls(
            space=space_cls.from_config(data["space"]),
            separation=data["separation"],
            centers=np.asarray(data["centers"], dtype=float),
            candidate_count=data.get("candidate_count", 0),
        )


def greedy_separated_net(space, candidates, separation, max_size=None):
    """Maximal `separation`-separated subset of the candidate stream.

    Candidates are scanned in order.  Every candidate closer than
    `separation` to an accepted center is discarded, so the first remaining
    candidate is always acceptable.
    """
    if separation <= 0:
        raise ValueError("separation must be positive")
    remaining = np.asarray(candidates, dtype=float)
    if remaining.ndim != 2 or remaining.shape[1] != space.dim:
        raise ValueError("candidates must be (n, %d)" % space.dim)
    total = len(remaining)
    accepted = []
    while len(remaining) and (max_size is None or len(accepted) < max_size):
        # copy: a view would pin every generation of `remaining` in memory
        c = remaining[0].copy()
        accepted.append(c)
        d = space.dist_many(remaining, c)
        remaining = remaining[d >= separation]
    centers = np.asarray(accepted) if accepted else np.zeros((0, space.dim))
    return SeparatedNet(space, float(separation), centers, total)


@dataclass
class FunctionalFamily:
    """Unit vectors paired with their norming functionals.

    vectors[j] has norm one and functionals[j] (a dual coefficient row) norms
    it: functionals[j] . vectors[j] = 1 with unit dual norm.
    """

    space: object
    parameter: float  # delta for biorthogonal families, r for norming ones
    vectors: np.ndarray
    functionals: np.ndarray
    candidate_count: int = 0
    meta: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.vectors)

    def pair_values(self, xs):
        """functionals applied to the rows of xs: (n, J) array."""
        return np.asarray(xs, dtype=float) @ self.functionals.T

    def to_json(self):
        return json.dumps(
            {
                "space": self.space.to_config(),
                "parameter": self.parameter,
                "vectors": np.asarray(self.vectors).tolist(),
                "functionals": np.asarray(self.functionals).tolist(),
                "candidate_count": self.candidate_count,
            }
        )

    @classmethod
    def from_json(cls, text, space_cls):
        data = json.loads(text)
        return cls(
            space=space_cls.from_config(data["space"]),
            parameter=data["parameter"],
            vectors=np.asarray(data["vectors"], dtype=float),
            functionals=np.asarray(data["functionals"], dtype=float),
            candidate_count=data.get("candidate_count", 0),
        )


def _greedy_functional_family(space, candidates, bound, max_size):
    remaining = np.asarray(candidates, dtype=float)
    if remaining.ndim != 2 or remaining.shape[1] != space.dim:
        raise ValueError("candidates must be (n, %d)" % space.dim)
    norms = space.norm_many(remaining)
    keep = norms > 1e-12
    remaining = remaining[keep] / norms[keep][:, None]
    total = len(remaining)
    vectors, functionals = [], []
    while len(remaining) and (max_size is None or len(vectors) < max_size):
        # copy: a view would pin every generation of `remaining` in memory
        v = remaining[0].copy()
        f = space.duality_map(v)
        vectors.append(v)
        functionals.append(f.coeffs)
        vals = np.abs(remaining @ f.coeffs)
        remaining = remaining[vals <= bound]
    J = len(vectors)
    vec = np.asarray(vectors) if J else np.zeros((0, space.dim))
    fun = np.asarray(functionals) if J else np.zeros((0, space.dim))
    return vec, fun, total


def greedy_biorthogonal(space, candidates, delta, max_size=64):
    """Maximal delta-biorthogonal family from the candidate stream.

    A unit candidate v is accepted iff |f_j(v)| <= delta for every accepted
    pair (v_j, f_j).  Accepted vectors are therefore (1 - delta)-separated:
    ||v_k - v_j|| >= f_j(v_j - v_k) >= 1 - delta for j < k.
    """
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must be in (0, 1), got %r" % (delta,))
    vec, fun, total = _greedy_functional_family(space, candidates, delta, max_size)
    return FunctionalFamily(space, float(delta), vec, fun, total)


def greedy_norming_family(space, candidates, threshold, max_size=None):
    """Maximal family with |f_j(x_k)| <= threshold for j < k.

    By maximality, every direction the candidate stream reaches is normed:
    sup_j |f_j(x)| >= threshold * ||x||, up to the stream's resolution.  Use
    validate_norming to probe that property.
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError("threshold must be in (0, 1), got %r" % (threshold,))
    vec, fun, total = _greedy_functional_family(space, candidates, threshold, max_size)
    return FunctionalFamily(space, float(threshold), vec, fun, total)


def validate_norming(family, probes, tol=1e-9):
    """Check sup_j |f_j(u)| >= r * ||u|| on the probe vectors.

    Returns the list of (probe index, achieved sup) shortfalls.  Shortfalls
    indicate an insufficient candidate stream, not a construction bug, and
    are reported rather than raised.
    """
    probes = np.asarray(probes, dtype=float)
    norms = family.space.norm_many(probes)
    if len(family) == 0:
        sups = np.zeros(len(probes))
    else:
        sups = np.max(np.abs(family.pair_values(probes)), axis=1)
    bad = sups < family.parameter * norms - tol
    return [(int(i), float(sups[i])) for i in np.nonzero(bad)[0]]
