"""Differentially private explainable boosting for tabular data.

Train cyclic-boosted additive models with or without (epsilon, delta)
guarantees, account the privacy budget under classic strong composition or
Gaussian DP, then inspect, edit and monotonize the learned shape functions
free of any further privacy cost.
"""

from .accountant import (
    GdpParam,
    PrivacyBudget,
    allocate_budget,
    calibrate_binning_sigma,
    calibrate_training_sigma,
    classic_sigma,
    compose_gdp,
    dp_to_gdp,
    gdp_to_dp,
)
from .binning import FeatureBins, categorical_bins, dp_quantile_bins, equal_width_bins, histogram, lookup
from .dataset import Dataset, FeatureSpec, SplitPlan, clip_labels, load_csv, make_splits
from .harness import ExperimentConfig, MetricReport, auroc, rmse, run_experiment
from .model import Contribution, GamModel, ShapeFunction, contributions, load, predict, raw_score, save
from .postprocess import EditCommand, edit, enforce_monotone, pav
from .trainer import BudgetLedger, TrainConfig, train_dp_ebm, train_ebm

__version__ = "0.1.0"
