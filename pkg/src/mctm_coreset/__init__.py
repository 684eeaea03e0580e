"""Coresets and weighted maximum likelihood for multivariate conditional transformation models."""

from .basis import BasisConfig, BasisExpansion, expand, fit_bounds
from .bench import ExperimentConfig, ExperimentReport, MetricRow, likelihood_ratio, run_experiment
from .coreset import METHODS, CoresetSample, build_coreset, sample_hybrid, sample_l2, sample_uniform
from .data import Dataset
from .dgp import DgpSpec, equicorrelated, generate, generate_all
from .estimators import MCTM, BernsteinBasis, MCTMCoreset
from .exceptions import (
    DataLoadError,
    DegenerateColumnError,
    DegenerateInputError,
    FitDivergedError,
    InfeasibleShiftError,
    InvalidComparisonError,
    InvalidConfigError,
    LineSearchStalled,
    MCTMError,
    NonpositiveLogArgumentError,
)
from .fit import FitConfig, FitResult, fit
from .hull import HullSelection, hull_augmentation, select_hull_points
from .model import LossBreakdown, ModelParams, nll, nll_gradient, shift_into_domain
from .scores import LeverageScores, leverage_scores, sampling_probabilities

__version__ = "0.1.0"

__all__ = [
    "BasisConfig", "BasisExpansion", "expand", "fit_bounds",
    "ExperimentConfig", "ExperimentReport", "MetricRow", "likelihood_ratio", "run_experiment",
    "METHODS", "CoresetSample", "build_coreset", "sample_hybrid", "sample_l2", "sample_uniform",
    "Dataset", "DgpSpec", "equicorrelated", "generate", "generate_all",
    "MCTM", "BernsteinBasis", "MCTMCoreset",
    "DataLoadError", "DegenerateColumnError", "DegenerateInputError", "FitDivergedError",
    "InfeasibleShiftError", "InvalidComparisonError", "InvalidConfigError", "LineSearchStalled",
    "MCTMError", "NonpositiveLogArgumentError",
    "FitConfig", "FitResult", "fit",
    "HullSelection", "hull_augmentation", "select_hull_points",
    "LossBreakdown", "ModelParams", "nll", "nll_gradient", "shift_into_domain",
    "LeverageScores", "leverage_scores", "sampling_probabilities",
]
