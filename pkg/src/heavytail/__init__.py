"""Numerical checks of weighted Poincaré, log-Sobolev and related inequalities
for generalized Cauchy and convex heavy-tailed measures."""

from .errors import DomainError, HeavyTailError, NumericError, ParameterError, PreconditionError
from .fields import GALLERY, ScalarField, gallery, gallery_field
from .integrate import IntegralEstimate, IntegrationConfig
from .measures import CauchyParams, cauchy_measure, convex_measure, gaussian_measure
from .reports import InequalityReport

__version__ = "0.1.0"

__all__ = ["HeavyTailError", "ParameterError", "DomainError", "PreconditionError", "NumericError",
           "GALLERY", "ScalarField", "gallery", "gallery_field", "IntegralEstimate",
           "IntegrationConfig", "CauchyParams", "cauchy_measure", "convex_measure",
           "gaussian_measure", "InequalityReport", "__version__"]
