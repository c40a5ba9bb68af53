"""Optimal quantization of prior probabilities for binary Bayesian hypothesis testing."""

from .design import (
    DesignOptions,
    DesignReport,
    Quantizer,
    brute_force_design,
    centroid_gaussian,
    centroid_general,
    design_lloyd_max,
    design_mae,
    mbre,
    nearest_neighbor_boundaries,
)
from .detection import (
    CostPair,
    GaussianMeasurementModel,
    bayes_risk,
    bayes_risk_error,
    curvature,
    error_probabilities,
    mismatched_bayes_risk,
)
from .estimators import MAEQuantizer, MBREQuantizer
from .highrate import companion_quantizer, distortion_bound, point_density, rate_gap
from .populations import PopulationScenario, allocate, decision_rate, discrimination_delta, dividing_line_scan
from .priors import PriorDistribution, parse_prior

__all__ = [
    "CostPair",
    "DesignOptions",
    "DesignReport",
    "GaussianMeasurementModel",
    "MAEQuantizer",
    "MBREQuantizer",
    "PopulationScenario",
    "PriorDistribution",
    "Quantizer",
    "allocate",
    "bayes_risk",
    "bayes_risk_error",
    "brute_force_design",
    "centroid_gaussian",
    "centroid_general",
    "companion_quantizer",
    "curvature",
    "decision_rate",
    "design_lloyd_max",
    "design_mae",
    "discrimination_delta",
    "distortion_bound",
    "dividing_line_scan",
    "error_probabilities",
    "mbre",
    "mismatched_bayes_risk",
    "nearest_neighbor_boundaries",
    "parse_prior",
    "point_density",
    "rate_gap",
]

__version__ = "0.1.0"
