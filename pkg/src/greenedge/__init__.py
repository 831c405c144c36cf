"""Energy-aware management of a small edge computing cluster.

The package simulates a group of solar and wind powered base stations
backed by one edge server and compares three ways of running it: a
forecast-driven limited-lookahead controller that switches stations on and
off, resizes the container fleet and throttles admissions; a reactive
utilization-driven baseline; and a max-provision baseline that keeps
everything at its dimensioned peak.
"""

from .battery import Battery, EnergyDeficit, EnergyLedgerEntry
from .battery import plan_purchase, project_level, step as battery_step
from .battery import total_closure_error, write_ledger_csv
from .controller import (
    CONTROLLERS,
    ConstraintViolation,
    ControlInput,
    ControllerConfig,
    GenmController,
    InfeasibleScenario,
    IrmcController,
    MaxProvisionController,
    SearchStats,
    StepForecasts,
    SystemState,
    apply_action,
    enumerate_actions,
    genm_step,
    irmc_step,
    max_provision_step,
    validate,
)
from .energy import (
    BsParams,
    CacheModel,
    ContainerAlloc,
    CostBreakdown,
    MecParams,
    bs_energy,
    objective,
    total_edge_cost,
)
from .forecast import (
    Forecast,
    LstmPredictor,
    NotFittedError,
    PredictorConfig,
    SeasonalNaivePredictor,
    evaluate,
    fit_predictor,
    load_predictor,
    predict,
    rmse,
    save_predictor,
)
from .harness import (
    ComparisonReport,
    RunReport,
    Scenario,
    ScenarioConfig,
    build_scenario,
    compare,
    forecast_accuracy,
    run_scenario,
    sweep_bs_group,
)
from .traces import SiteTrace, load_trace_csv, save_trace_csv, synthesize_harvest, synthesize_profile

__version__ = "0.1.0"

__all__ = [
    "Battery",
    "BsParams",
    "CacheModel",
    "CONTROLLERS",
    "ComparisonReport",
    "ConstraintViolation",
    "ContainerAlloc",
    "ControlInput",
    "ControllerConfig",
    "CostBreakdown",
    "EnergyDeficit",
    "EnergyLedgerEntry",
    "Forecast",
    "GenmController",
    "InfeasibleScenario",
    "IrmcController",
    "LstmPredictor",
    "MaxProvisionController",
    "MecParams",
    "NotFittedError",
    "PredictorConfig",
    "RunReport",
    "Scenario",
    "ScenarioConfig",
    "SearchStats",
    "SeasonalNaivePredictor",
    "SiteTrace",
    "StepForecasts",
    "SystemState",
    "apply_action",
    "battery_step",
    "bs_energy",
    "build_scenario",
    "compare",
    "enumerate_actions",
    "evaluate",
    "fit_predictor",
    "forecast_accuracy",
    "genm_step",
    "irmc_step",
    "load_predictor",
    "load_trace_csv",
    "max_provision_step",
    "objective",
    "plan_purchase",
    "predict",
    "project_level",
    "rmse",
    "run_scenario",
    "save_predictor",
    "save_trace_csv",
    "sweep_bs_group",
    "synthesize_harvest",
    "synthesize_profile",
    "total_closure_error",
    "total_edge_cost",
    "validate",
    "write_ledger_csv",
]
