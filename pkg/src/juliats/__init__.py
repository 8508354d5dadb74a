"""Böttcher coordinates, local transseries models and dimension estimates
for the quadratic family ``P(x) = lam * x * (1 - x)``."""

__version__ = "0.1.0"

from .analysis import (
    DimensionReport,
    ExponentDistribution,
    beta_E,
    count_non_normal,
    dh_lower_bound,
    exponent_distribution,
    hoeffding_bound,
    legendre_check,
    normality_classify,
    ruelle_dimension,
)
from .boettcher import bottcher_G, eval_phi, eval_phi_circle, eval_phi_ray, functional_residual, phi_series
from .errors import NumericalError
from .geometry import (
    PointCloud,
    Polyline,
    RasterImage,
    assemble,
    brick,
    hausdorff_one_sided,
    julia_oracle,
    raster,
    render_mandelbrot,
)
from .polymap import (
    ExternalAngle,
    PeriodicOrbit,
    QuadParam,
    deriv_Pn,
    eval_P,
    eval_Pn,
    inverse_branches,
    landing_point,
    make_param,
    periodic_points_on_J,
)
from .transseries import TransseriesModel, build_model, coefficient_table, dyadic_model, eval_model

__all__ = [
    "__version__",
    "DimensionReport", "ExponentDistribution", "beta_E", "count_non_normal", "dh_lower_bound",
    "exponent_distribution", "hoeffding_bound", "legendre_check", "normality_classify",
    "ruelle_dimension",
    "bottcher_G", "eval_phi", "eval_phi_circle", "eval_phi_ray", "functional_residual", "phi_series",
    "NumericalError",
    "PointCloud", "Polyline", "RasterImage", "assemble", "brick", "hausdorff_one_sided",
    "julia_oracle", "raster", "render_mandelbrot",
    "ExternalAngle", "PeriodicOrbit", "QuadParam", "deriv_Pn", "eval_P", "eval_Pn",
    "inverse_branches", "landing_point", "make_param", "periodic_points_on_J",
    "TransseriesModel", "build_model", "coefficient_table", "dyadic_model", "eval_model",
]
