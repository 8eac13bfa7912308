"""Transformation boundary regression.

Estimate a monotone response transformation that makes one-sided
regression errors independent of the covariate, together with the upper
boundary curve of the transformed responses.
"""

from .boundary import (
    BoundaryFit,
    Dataset,
    Design,
    SmoothedBoundary,
    epanechnikov,
    local_constant_fit,
    smooth_fit,
    window_argmax,
)
from .experiments import (
    McConfig,
    bandwidths,
    correlation_report,
    correlations,
    reproduce_table,
    run_mc,
)
from .mdist import (
    Criterion,
    CriterionProfile,
    CriterionSpec,
    EstimationError,
    ThetaEstimate,
    criterion_surface,
    gn_eval,
    minimize_theta,
    mn,
    residuals,
    seminorm,
)
from .simgen import ScenarioSpec, make_dataset, read_csv, write_csv
from .transform import (
    Family,
    TransformError,
    TransformSpec,
    yj_forward,
    yj_inverse,
    yj_range,
)

__version__ = "0.1.0"

__all__ = [
    "BoundaryFit",
    "Criterion",
    "CriterionProfile",
    "CriterionSpec",
    "Dataset",
    "Design",
    "EstimationError",
    "Family",
    "McConfig",
    "ScenarioSpec",
    "SmoothedBoundary",
    "ThetaEstimate",
    "TransformError",
    "TransformSpec",
    "bandwidths",
    "correlation_report",
    "correlations",
    "criterion_surface",
    "epanechnikov",
    "gn_eval",
    "local_constant_fit",
    "make_dataset",
    "minimize_theta",
    "mn",
    "read_csv",
    "reproduce_table",
    "residuals",
    "run_mc",
    "seminorm",
    "smooth_fit",
    "window_argmax",
    "write_csv",
    "yj_forward",
    "yj_inverse",
    "yj_range",
]
