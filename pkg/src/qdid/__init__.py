"""Quantile treatment effects on the treated for two-period designs.

Estimates the conditional and unconditional quantile treatment effect on
the treated from two-period panel data or repeated cross sections, with
exchangeable-bootstrap uniform inference and a Monte Carlo harness.
"""

from .data_model import (
    CovariateCell,
    PanelData,
    RcsData,
    ValidationError,
    ValidationReport,
    build_cells,
    validate,
)
from .empirical import SortedSample, StepDistribution, rank_transform
from .estimators import (
    CounterfactualResult,
    CqttProcess,
    PanelCell,
    RcsCell,
    cic_qtt,
    counterfactual_cdf_panel,
    counterfactual_cdf_rcs,
    cqtt,
    estimate_process,
    extract_cell,
    treated_shares,
    unconditional_qtt,
)
from .inference import (
    BootstrapConfig,
    InferenceReport,
    KsTestResult,
    analyze_cell,
    analyze_unconditional,
    bootstrap_process,
    draw_weights,
    ks_test,
    pointwise_se,
    substream,
    uniform_band,
)
from .simulation import DgpSpec, McResult, run_mc, simulate, simulate_dgp1, simulate_dgp2

__version__ = "0.1.0"

__all__ = [
    "BootstrapConfig",
    "CounterfactualResult",
    "CovariateCell",
    "CqttProcess",
    "DgpSpec",
    "InferenceReport",
    "KsTestResult",
    "McResult",
    "PanelCell",
    "PanelData",
    "RcsCell",
    "RcsData",
    "SortedSample",
    "StepDistribution",
    "ValidationError",
    "ValidationReport",
    "analyze_cell",
    "analyze_unconditional",
    "bootstrap_process",
    "build_cells",
    "cic_qtt",
    "counterfactual_cdf_panel",
    "counterfactual_cdf_rcs",
    "cqtt",
    "draw_weights",
    "estimate_process",
    "extract_cell",
    "ks_test",
    "pointwise_se",
    "rank_transform",
    "run_mc",
    "simulate",
    "simulate_dgp1",
    "simulate_dgp2",
    "substream",
    "treated_shares",
    "unconditional_qtt",
    "uniform_band",
    "validate",
]
