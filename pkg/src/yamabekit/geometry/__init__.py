"""Curvature tensors of chart metrics."""

from .curvature import (
    CurvatureFields,
    CurvaturePack,
    bach,
    christoffel,
    cotton,
    covariant_derivative,
    curvature_pack,
    grad_inner,
    hessian,
    laplacian,
    ricci_scalar,
    riemann,
    schouten,
    weyl,
)
from .metric import (
    AsymmetricMetricError,
    DimensionError,
    GeometryError,
    MetricField,
    NotPositiveDefiniteWarning,
    SingularMetricError,
    TensorValue,
)

__all__ = [
    "CurvatureFields", "CurvaturePack", "bach", "christoffel", "cotton",
    "covariant_derivative", "curvature_pack", "grad_inner", "hessian", "laplacian",
    "ricci_scalar", "riemann", "schouten", "weyl",
    "AsymmetricMetricError", "DimensionError", "GeometryError", "MetricField",
    "NotPositiveDefiniteWarning", "SingularMetricError", "TensorValue",
]
