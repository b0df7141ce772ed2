"""Planar five-piece tile systems on a vertical band, with exact checks.

A system is built from a centered tooth

    U0 = { (x, y) : |x| + slope*|y| <= cap  and  |x| <= halfwidth }

and four corner pieces; U1 = {0 <= x <= halfwidth, y >= 0, x + slope*y >= cap}
sits above the tooth's upper-right edge and U2, U3, U4 are its reflections
(x,-y), (-x,y), (-x,-y).  Together the five pieces tile the vertical band
{|x| <= halfwidth}; translating the band by integer multiples of
period = 2*halfwidth tiles the plane.

Two presets are built in:

    fig1: diamond tooth |x|+|y| <= 2,           (a,b,r,delta) = (3/2, 5/6, 1/6, 1/5)
    fig2: flat tooth |x|+8|y| <= 9, |x| <= 5.5, (a,b,r,delta) = (21/4, 3/4, 1/4, 1/4)

All parameters are stored as fractions, so the three shape conditions

    (a)  D in U0, and U0 in s*D for the tight scale s,
    (b)  (a,b) + r*D  in  U1 intersected with {|y| <= 1},
    (c)  (a,t) + r*D  in  U0 whenever |t| <= delta*b,

with D = [-1,1]^2, reduce to finitely many rational corner evaluations and
are decided exactly.  The conditions hold with equality at several corners
for both presets — the parameters have no slack to give away.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .tiles import Membership

PIECE_NAMES = ("U0", "U1", "U2", "U3", "U4")


def _frac(v):
    """Exact Fraction from ints, strings like '21/4', or Fractions."""
    if isinstance(v, Fraction):
        return v
    if isinstance(v, str):
        return Fraction(v)
    if isinstance(v, float):
        # floats are accepted for exploration; they convert exactly
        return Fraction(v).limit_denominator(10**12)
    return Fraction(v)


@dataclass(frozen=True)
class StripSystem:
    """Parameters of one five-piece band tiling (exact rationals)."""

    a: Fraction
    b: Fraction
    r: Fraction
    delta: Fraction
    slope: Fraction
    cap: Fraction
    halfwidth: Fraction
    period: Fraction
    name: str = ""

    def __post_init__(self):
        for field in ("a", "b", "r", "delta", "slope", "cap", "halfwidth", "period"):
            object.__setattr__(self, field, _frac(getattr(self, field)))
        if not (0 < self.r < 1 and 0 < self.delta < 1):
            raise ValueError("need 0 < r, delta < 1")
        if self.a <= 0 or self.b <= 0:
            raise ValueError("need a, b > 0")

    @property
    def height(self):
        """Vertical halfwidth of the tooth: |y| <= cap/slope inside U0."""
        return self.cap / self.slope

    def replace(self, **kw):
        cfg = self.to_config()
        cfg.update(kw)
        return StripSystem(**cfg)

    def to_config(self):
        return {
            "a": self.a, "b": self.b, "r": self.r, "delta": self.delta,
            "slope": self.slope, "cap": self.cap,
            "halfwidth": self.halfwidth, "period": self.period,
            "name": self.name,
        }


FIG1 = StripSystem(a=Fraction(3, 2), b=Fraction(5, 6), r=Fraction(1, 6),
                   delta=Fraction(1, 5), slope=1, cap=2, halfwidth=2,
                   period=4, name="fig1")

FIG2 = StripSystem(a=Fraction(21, 4), b=Fraction(3, 4), r=Fraction(1, 4),
                   delta=Fraction(1, 4), slope=8, cap=9,
                   halfwidth=Fraction(11, 2), period=11, name="fig2")

PRESETS = {"fig1": FIG1, "fig2": FIG2}


def load_system(source):
    """A StripSystem from a preset name, a config dict, or a JSON file path.

    JSON values may be written as rational strings ("21/4") to stay exact.
    """
    if isinstance(source, StripSystem):
        return source
    if isinstance(source, str) and source in PRESETS:
        return PRESETS[source]
    if isinstance(source, str):
        import json

        with open(source) as fh:
            source = json.load(fh)
    return StripSystem(**source)


# ----------------------------------------------------------------------
# piece membership

def _piece_margins(sys, piece, x, y):
    """Nonnegative-iff-inside margins of one piece at (x, y).

    Works for Fractions (exact) and floats alike.
    """
    if piece == 0:
        return (sys.cap - abs(x) - sys.slope * abs(y),
                sys.halfwidth - abs(x))
    # U1 with the sign flips for its reflections
    if piece in (2, 4):  # lower pieces: (x, -y) convention
        y = -y
    if piece in (3, 4):  # left pieces: (-x, y) convention
        x = -x
    return (x, sys.halfwidth - x, y, x + sys.slope * y - sys.cap)


def piece_membership(sys, piece, point, tol=0):
    """Membership of a band point in one of the five pieces.

    piece is 0..4 or a name "U0".."U4".  Raises ValueError when the point is
    outside the band |x| <= halfwidth (+ tol), where the pieces say nothing.
    """
    if isinstance(piece, str):
        piece = PIECE_NAMES.index(piece)
    if not 0 <= piece <= 4:
        raise ValueError("piece must be 0..4, got %r" % (piece,))
    x, y = point
    if abs(x) > sys.halfwidth + tol:
        raise ValueError("point x=%r outside the band |x| <= %s" % (x, sys.halfwidth))
    margins = _piece_margins(sys, piece, x, y)
    if all(m > tol for m in margins):
        return Membership.STRICT
    if all(m >= -tol for m in margins):
        return Membership.INSIDE
    return Membership.OUTSIDE


def piece_classify(sys, point, tol=0):
    """Smallest piece id containing the band point (ties to the smaller id)."""
    for piece in range(5):
        if piece_membership(sys, piece, point, tol) != Membership.OUTSIDE:
            return piece
    return None  # unreachable: the five pieces cover the band


# ----------------------------------------------------------------------
# exact shape conditions

def _square_corners(cx, cy, half):
    return [(cx + sx * half, cy + sy * half) for sx in (1, -1) for sy in (1, -1)]


def check_conditions(sys):
    """Exact rational verification of the three shape conditions.

    Every piece involved is an intersection of half-planes (the tooth's
    absolute values split into four half-planes), so each inclusion of a
    square holds iff it holds at the four corners; corners are evaluated in
    Fraction arithmetic.  Returns a dict with one boolean per condition and
    the witnesses of any failure.
    """
    for field in ("a", "b", "r", "delta"):
        if not isinstance(getattr(sys, field), Fraction):
            raise ValueError("exact checking needs rational parameters")
    witnesses = {"a": [], "b": [], "c": []}

    def in_u0(pt):
        return all(m >= 0 for m in _piece_margins(sys, 0, *pt))

    # (a) D ⊆ U0 ⊆ s·D with the tight scale s = max(halfwidth, height).
    scale = max(sys.halfwidth, sys.height)
    for pt in _square_corners(0, 0, Fraction(1)):
        if not in_u0(pt):
            witnesses["a"].append(("corner of D outside U0", pt))
    # U0's extreme points lie on the coordinate axes and the edge breaks
    for pt in [(sys.halfwidth, 0), (-sys.halfwidth, 0),
               (0, sys.height), (0, -sys.height)]:
        if max(abs(pt[0]), abs(pt[1])) > scale:
            witnesses["a"].append(("U0 vertex outside the scaled box", pt))

    # (b) (a,b) + rD ⊆ U1 ∩ {|y| <= 1}
    for pt in _square_corners(sys.a, sys.b, sys.r):
        margins = _piece_margins(sys, 1, *pt)
        if any(m < 0 for m in margins) or abs(pt[1]) > 1:
            witnesses["b"].append(("corner escapes U1 or the unit band", pt))

    # (c) (a, t) + rD ⊆ U0 at the extreme offsets t = ±delta*b (the margins
    # are monotone in |t|, so the extremes decide the whole range)
    for t in (sys.delta * sys.b, -sys.delta * sys.b):
        for pt in _square_corners(sys.a, t, sys.r):
            if not in_u0(pt):
                witnesses["c"].append(("corner escapes U0", pt))

    return {
        "a_holds": not witnesses["a"],
        "b_holds": not witnesses["b"],
        "c_holds": not witnesses["c"],
        "scale": scale,
        "witnesses": {k: v for k, v in witnesses.items() if v},
    }


# ----------------------------------------------------------------------
# the translated band index

def strip_index(sys, x_coord):
    """Index n of the nearest band translate: |x - period*n| <= halfwidth.

    The nearest multiple of the period wins; a boundary tie goes to the
    smaller |n| and then to the positive n.  Exact for rational input.
    """
    period = sys.period
    import math

    n0 = math.floor(x_coord / period)
    best = None
    for n in (n0, n0 + 1):
        d = abs(x_coord - period * n)
        key = (d, abs(n), 0 if n > 0 else 1)
        if best is None or key < best[0]:
            best = (key, n)
    return int(best[1])
