"""Geometry lab for the bounded complement components of planar Brownian
paths: path sampling, supercover rasterization, component measurement,
area-law statistics, analytic hitting probabilities, lambda-domain
experiments, and seeded Monte Carlo verification."""

from .compgeo import Circle, ComponentStats, distance_transform, measure_components, smallest_enclosing_circle
from .config import ExperimentConfig
from .domains import (
    BoundaryArc,
    LambdaDomain,
    PolarRectangle,
    Upcrossing,
    build_lambda_domain,
    build_polar_grid_rectangles,
    count_rectangles_hit,
    extract_upcrossings,
    validate_nice,
)
from .hitprob import (
    ProbValue,
    annulus_inner_hit,
    ball_hit_bound,
    escape_before_line_exact,
    escape_bound,
    poisson_kernel,
    segment_miss_bound,
    tangent_ball_hit_exact,
)
from .laws import (
    LawProfile,
    count_by_area,
    dyadic_occupation,
    legall_profile,
    sorted_area_law,
    weighted_sum,
)
from .mc import (
    McEstimate,
    TailFit,
    beurling_compare,
    conditioned_exit_sampler,
    estimate_event,
    exit_histogram,
    lambda_tail_experiment,
    tiletile_floor,
    upcrossing_log_law,
)
from .paths import (
    ExponentialRate1,
    FixedHorizon,
    PlanarPath,
    first_hit,
    refine_bridge,
    sample_path,
)
from .raster import ComponentLabeling, RasterScene, label_components, rasterize
from .shapes import Annulus, Disc, HalfPlane, Polyline, PolarRect, Shape

__version__ = "0.1.0"
