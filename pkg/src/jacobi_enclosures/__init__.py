"""Spectral enclosures for discrete Schrödinger operators with complex
ℓᵖ potentials on the integers."""
__version__ = "0.1.0"

from .domain import INF, PotentialSpec, dist_to_band, holder_dual, inverse_joukowsky, joukowsky
from .enclosures import (BoundaryCurve, EnclosureRegion, intersection_contains, interp_region_contains,
                         l1_region_contains, lp_region_contains, sample_interp_boundary,
                         sample_l1_boundary, sample_lp_boundary)
from .operators import (JacobiSection, SpectrumResult, bs_operator_norm, build_bs_matrix,
                        stable_discrete_eigenvalues, tridiagonal_eigenvalues)
from .jost import jost_left, jost_right, locate_eigenvalues_wronskian, wronskian

__all__ = [
    "INF", "PotentialSpec", "dist_to_band", "holder_dual", "inverse_joukowsky", "joukowsky",
    "BoundaryCurve", "EnclosureRegion", "intersection_contains", "interp_region_contains",
    "l1_region_contains", "lp_region_contains", "sample_interp_boundary", "sample_l1_boundary",
    "sample_lp_boundary", "JacobiSection", "SpectrumResult", "bs_operator_norm", "build_bs_matrix",
    "stable_discrete_eigenvalues", "tridiagonal_eigenvalues", "jost_left", "jost_right",
    "locate_eigenvalues_wronskian", "wronskian",
]
