from bubbleflow.geometry.barycenter import (
    BarycenterResult,
    PlaneProjection,
    barycenter,
    barycenter_extrinsic,
    barycenter_gradient,
    barycenter_intrinsic,
    extrinsic_chart_coordinates,
    project_plane,
)
from bubbleflow.geometry.immersion import (
    ImmersionGeometry,
    WillmoreData,
    area_gradient,
    geometry,
    laplace_beltrami,
    willmore,
)
from bubbleflow.geometry.metric import (
    AmbientMetric,
    CurvatureDirection,
    DifferenceDirection,
    EuclideanMetric,
    FlatMetric,
    MetricDirection,
    MetricSample,
    PerturbedMetric,
    PullbackMetric,
    d2metric_dlambda0,
    dmetric_dlambda0,
    metric_time_derivative,
    path_charts,
)

__all__ = [
    "AmbientMetric",
    "BarycenterResult",
    "CurvatureDirection",
    "DifferenceDirection",
    "EuclideanMetric",
    "FlatMetric",
    "ImmersionGeometry",
    "MetricDirection",
    "MetricSample",
    "PerturbedMetric",
    "PlaneProjection",
    "PullbackMetric",
    "WillmoreData",
    "area_gradient",
    "barycenter",
    "barycenter_extrinsic",
    "barycenter_gradient",
    "barycenter_intrinsic",
    "d2metric_dlambda0",
    "dmetric_dlambda0",
    "extrinsic_chart_coordinates",
    "geometry",
    "laplace_beltrami",
    "metric_time_derivative",
    "path_charts",
    "project_plane",
    "willmore",
]
