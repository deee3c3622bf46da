"""defectsim: online defect-prediction simulation with imperfect test feedback.

The package simulates a development process that predicts whether each
module is defective, tests it with effort proportional to the prediction,
and feeds the (possibly wrong) observed outcome back into the training pool
before predicting the next module.  Because lightly tested modules can hide
their defects, the training data drifts away from the truth; the simulator
measures that drift and evaluates two mitigation strategies against
overlooking-free and uncorrected baselines.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .classifier import (
    DefectModel,
    LogisticRegressionGD,
    classify,
    logistic_gradient,
    logistic_loss,
)
from .datasets import (
    Dataset,
    DatasetFormatError,
    ModuleRecord,
    generate_synthetic,
    load_dataset,
    save_csv,
)
from .experiment import (
    CsvSpec,
    ExperimentConfig,
    ExperimentReport,
    SyntheticSpec,
    render_report,
    run_experiment,
)
from .metrics import (
    AggregateMetrics,
    RunMetrics,
    aggregate,
    auc,
    confusion,
    diff,
    precision_recall_f1,
    run_metrics,
)
from .overlook import OverlookConfig, observe
from .preprocessing import (
    CfsSelector,
    FeatureStandardizer,
    FeatureSubset,
    cfs_merit,
    point_biserial_correlation,
    select_features,
)
from .seeding import derive_seed, splitmix64
from .simulator import RunTrace, TraceRow, run_once, run_reference, write_trace_csv
from .strategy import PredictionStrategy, forced_budget, init_strategy

__all__ = [
    "__version__",
    "AggregateMetrics",
    "CfsSelector",
    "CsvSpec",
    "Dataset",
    "DatasetFormatError",
    "DefectModel",
    "ExperimentConfig",
    "ExperimentReport",
    "FeatureStandardizer",
    "FeatureSubset",
    "LogisticRegressionGD",
    "ModuleRecord",
    "OverlookConfig",
    "PredictionStrategy",
    "RunMetrics",
    "RunTrace",
    "SyntheticSpec",
    "TraceRow",
    "aggregate",
    "auc",
    "cfs_merit",
    "classify",
    "confusion",
    "derive_seed",
    "diff",
    "forced_budget",
    "generate_synthetic",
    "init_strategy",
    "load_dataset",
    "logistic_gradient",
    "logistic_loss",
    "observe",
    "point_biserial_correlation",
    "precision_recall_f1",
    "render_report",
    "run_experiment",
    "run_metrics",
    "run_once",
    "run_reference",
    "save_csv",
    "select_features",
    "splitmix64",
    "write_trace_csv",
]
