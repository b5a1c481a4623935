"""Sequence-attracting basins of polynomial automorphisms of C^k.

Composable exact automorphisms with contraction certificates, the basin
limit-map engine, planar polynomial hulls, constructive point movers, and
staged builders for disjoint / line-meeting / variety-containing basins,
plus slice rendering and verification suites behind a CLI.
"""

from . import automaps, basin, builders, hull, mover, poly, render, sampling
from .automaps import (
    Affine,
    Composition,
    ContractionCertificate,
    HalfScale,
    Henon,
    Overshear,
    Shear,
    apply,
    apply_inverse,
    compose_range,
    contraction_bounds,
    jacobian_at,
    quadratic_defect_constant,
    schwarz_delta,
)
from .basin import (
    AutoSequence,
    BasinVerdict,
    Verdict,
    classify,
    convergence_report,
    dphi_at_p,
    increasing_limit_driver,
    phi_eval,
    sequence_equiv_check,
    union_formula_check,
)
from .hull import PlanarCompact, connect_avoiding, is_poly_convex, poly_hull

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
