"""Shared tile vocabulary: membership states and per-tile metadata.

Every tiling in this package exposes tiles with a three-valued membership
(outside / inside the closed tile / strictly interior) plus a center and
claimed inner and outer radii.  The verification harness only relies on this
protocol.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import IntEnum

import numpy as np

# Default tolerance for membership boundary comparisons.
DEFAULT_TOL = 1e-9


class Membership(IntEnum):
    OUTSIDE = 0
    INSIDE = 1
    STRICT = 2


@dataclass
class TileInfo:
    """Metadata the harness reads for one tile."""

    tile_id: object
    kind: str
    center: np.ndarray
    inner_radius: float
    outer_radius: float
    extra: dict = field(default_factory=dict)


class BallTiling:
    """A toy tiling made of explicit norm balls.

    Used by the harness tests and the negative controls: deleting a ball
    breaks coverage, overlapping balls break interior disjointness.
    """

    def __init__(self, space, centers, radius):
        self.space = space
        self.centers = np.asarray(centers, dtype=float)
        self.radius = float(radius)

    @property
    def tiles(self):
        return [
            TileInfo(i, "ball", self.centers[i], self.radius, self.radius)
            for i in range(len(self.centers))
        ]

    def membership(self, tile_id, x, tol=DEFAULT_TOL):
        d = self.space.dist(x, self.centers[tile_id])
        if d < self.radius - tol:
            return Membership.STRICT
        if d <= self.radius + tol:
            return Membership.INSIDE
        return Membership.OUTSIDE

    def classify(self, x, tol=DEFAULT_TOL):
        d = self.space.dist_many(self.centers, np.asarray(x, dtype=float))
        i = int(np.argmin(d))
        if d[i] <= self.radius + tol:
            return i
        return None

    def strict_tile_ids(self, x, tol=DEFAULT_TOL):
        d = self.space.dist_many(self.centers, np.asarray(x, dtype=float))
        return [int(i) for i in np.nonzero(d < self.radius - tol)[0]]
