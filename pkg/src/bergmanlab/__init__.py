"""Numerical laboratory for Bergman kernels, metrics and holomorphic sectional curvature."""

from .core import DEFAULT_TOLERANCES, HermitianForm, MultiIndex, TolerancePolicy, enumerate_multiindices, hermitian_sqrt
from .diffgeo import bergman_metric, curvature_scan, curvature_tensor, isometry_residual, sectional_curvature
from .domains import DomainDescriptor, builtin_domain
from .kernels import (
    AnnulusKernel,
    BallKernel,
    EllipsoidKernel,
    GramKernel,
    PoweredKernel,
    PullbackKernel,
    SeriesKernel,
    annulus_kernel,
    ball_kernel,
    deriv_power_kernel,
    ellipsoid_kernel,
    gram_kernel_estimate,
    powered_kernel,
    series_kernel,
    transformation_law_residual,
)
from .moments import (
    MomentMeasure,
    MomentTable,
    c_alpha,
    even_moment_closed_form,
    moment_identity_residual,
    moment_integral,
    stirling_ratio_sequence,
    support_reach_estimate,
)

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TOLERANCES", "HermitianForm", "MultiIndex", "TolerancePolicy", "enumerate_multiindices",
    "hermitian_sqrt", "bergman_metric", "curvature_scan", "curvature_tensor", "isometry_residual",
    "sectional_curvature", "DomainDescriptor", "builtin_domain", "AnnulusKernel", "BallKernel",
    "EllipsoidKernel", "GramKernel", "PoweredKernel", "PullbackKernel", "SeriesKernel", "annulus_kernel",
    "ball_kernel", "deriv_power_kernel", "ellipsoid_kernel", "gram_kernel_estimate", "powered_kernel",
    "series_kernel", "transformation_law_residual", "MomentMeasure", "MomentTable", "c_alpha",
    "even_moment_closed_form", "moment_identity_residual", "moment_integral", "stirling_ratio_sequence",
    "support_reach_estimate", "__version__",
]
