"""Numerical toolkit for conformal metrics on sphere domains, their
horospherically concave hypersurfaces in hyperbolic space, and rigidity
checks for supersolutions of conformally invariant elliptic equations."""

from .conformal_geometry import ConformalMetric, boundary_data, schouten_eigenvalues, schouten_tensor
from .elliptic_data import EllipticData, make_sigma_k, validate_axioms
from .embedding import HypersurfaceSample, embed, principal_curvatures, recover
from .report import CheckReport, Witness
from .sphere_core import FieldGrid, SphereDomain, build_grid

__all__ = [
    "CheckReport",
    "ConformalMetric",
    "EllipticData",
    "FieldGrid",
    "HypersurfaceSample",
    "SphereDomain",
    "Witness",
    "boundary_data",
    "build_grid",
    "embed",
    "make_sigma_k",
    "principal_curvatures",
    "recover",
    "schouten_eigenvalues",
    "schouten_tensor",
    "validate_axioms",
]
