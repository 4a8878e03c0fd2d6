"""Anchor-stream capture-recapture estimation for closed finite populations."""

from .analysis import AnalysisConfig, analyze, run_analysis
from .estimators import (
    PointEstimate,
    estimate_4cell,
    estimate_5cell,
    estimate_7cell,
    estimate_chapman,
    estimate_rs,
    stratified_estimate,
)
from .intervals import credible_5cell, credible_rs, logit_chapman, wald
from .model import (
    CaptureRecord,
    CellCounts4,
    CellCounts5,
    CellCounts7,
    EstimateReport,
    Interval,
    ModelParams,
    RsSummary,
    ValidationError,
    tabulate,
)
from .randomness import RngStream
from .variance import (
    VarianceResult,
    var5_fpc1,
    var5_fpc2,
    var5_unadjusted,
    var_4cell,
    var_chapman,
    var_rs,
    var_stratified,
)

__version__ = "0.1.0"
