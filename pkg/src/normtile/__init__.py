"""Normal tilings of finite-dimensional normed spaces at desk scale.

Construction modules build the tilings (star-shaped Voronoi cells, planar
strip systems, composite basis tilings, unit-sphere and convex-body tilings,
power-map transport onto the l1 ball); every tiling exposes membership
oracles and seeded classification so the verification harness can certify
coverage, disjointness, and the sandwich radii.
"""

from .spaces import Functional, ModulusBound, NormedSpace, modulus_of_convexity
from .tiles import DEFAULT_TOL, BallTiling, Membership, TileInfo
from .nets import (FunctionalFamily, SeparatedNet, greedy_biorthogonal,
                   greedy_norming_family, greedy_separated_net,
                   validate_norming)
from .voronoi import StarVoronoiTiling
from .strip import (FIG1, FIG2, PRESETS, StripSystem, check_conditions,
                    load_system, piece_classify, piece_membership,
                    strip_index)
from .schauder import (CompositeTiling, LevelTiling, NormalityConstants,
                       build_composite, normality_constants)
from .sphere import SphereTiling, build_sphere_tiling, sphere_constants
from .body import (ConvexBody, LayeredTiling, SliceSpec, build_body_tiling,
                   build_slice, peel_layer)
from .mazur import (TransportedTiling, invert_modulus, mazur, mazur_inverse,
                    standard_modulus, transport_tiling, verify_moduli)

__version__ = "0.1.0"

__all__ = [
    "NormedSpace", "Functional", "ModulusBound", "modulus_of_convexity",
    "Membership", "TileInfo", "BallTiling", "DEFAULT_TOL",
    "SeparatedNet", "FunctionalFamily", "greedy_separated_net",
    "greedy_biorthogonal", "greedy_norming_family", "validate_norming",
    "StarVoronoiTiling",
    "StripSystem", "PRESETS", "FIG1", "FIG2", "load_system",
    "piece_membership", "piece_classify", "check_conditions", "strip_index",
    "LevelTiling", "CompositeTiling", "NormalityConstants",
    "normality_constants", "build_composite",
    "SphereTiling", "build_sphere_tiling", "sphere_constants",
    "ConvexBody", "SliceSpec", "LayeredTiling", "build_slice", "peel_layer",
    "build_body_tiling",
    "mazur", "mazur_inverse", "standard_modulus", "invert_modulus",
    "verify_moduli", "TransportedTiling", "transport_tiling",
]
