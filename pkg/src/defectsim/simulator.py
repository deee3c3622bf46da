"""Online defect-prediction simulation over one ordering of a dataset.

The simulated process visits modules one at a time in a given order.  For
each module it:

1. scores the module with the model trained on everything observed so far
   (before anything is observed, a smoothed no-data probability of 0.5);
2. turns the score into a raw prediction at the decision threshold;
3. lets the strategy translate the raw prediction into the effective one
   (possibly forcing a negative to positive);
4. observes the test outcome, which for defective modules may be corrupted
   by the overlook probabilities tied to the effective prediction;
5. reports the outcome to the strategy;
6. appends the module's features and *observed* label to the training pool;
7. retrains the model from scratch on the pool.

True labels feed only the outcome-corruption step and the trace; the model
never sees them.  Everything is deterministic given the dataset, order,
strategy, overlook configuration, model parameters, and seed.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .classifier import DefectModel, classify
from .datasets import Dataset
from .overlook import OverlookConfig, observe
from .strategy import init_strategy

__all__ = [
    "COLD_START_MODES",
    "TraceRow",
    "RunTrace",
    "run_once",
    "run_reference",
    "write_trace_csv",
]

COLD_START_MODES = ("model-fallback", "force-positive")

# Laplace-smoothed defect probability of an empty observation pool:
# (0 defective + 1) / (0 observed + 2).
_EMPTY_POOL_PROBA = 0.5


@dataclass(frozen=True)
class TraceRow:
    """Everything recorded about one simulated module visit."""

    step: int
    module_id: str
    true_label: int
    raw_score: float
    raw_prediction: int
    effective_prediction: int
    forced: bool
    observed_label: int
    model_trained: bool


@dataclass(frozen=True)
class RunTrace:
    """Full record of one simulated run."""

    dataset_name: str
    strategy_kind: str
    type1_prob: float
    type2_prob: float
    seed: int
    rows: tuple[TraceRow, ...]
    order_seed: int | None = None

    def __len__(self) -> int:
        return len(self.rows)


def _validate_order(order, n_modules: int) -> list[int]:
    order = [int(i) for i in order]
    if sorted(order) != list(range(n_modules)):
        raise ValueError(
            f"order must be a permutation of 0..{n_modules - 1}, got {len(order)} entries"
        )
    return order


def run_once(
    dataset: Dataset,
    order,
    strategy_kind: str,
    overlook_config: OverlookConfig,
    model: DefectModel | None = None,
    seed: int = 0,
    *,
    cfs_every_k_steps: int = 1,
    cold_start: str = "model-fallback",
    bootstrap_dataset: Dataset | None = None,
    quit_threshold: float = 0.25,
    order_seed: int | None = None,
) -> RunTrace:
    """Simulate one full pass over ``dataset`` in the given module order.

    ``model`` is an unfitted :class:`DefectModel` template whose parameters
    are copied; the caller's instance is never touched.  A template with an
    explicit ``feature_subset`` pins that subset for every rebuild.
    ``cfs_every_k_steps`` re-runs feature selection only on every k-th model
    rebuild, reusing the previous subset in between — the weights themselves
    are refit at every step regardless.  ``cold_start`` picks the prediction used while the pool
    lacks a trainable model: ``"model-fallback"`` (default) scores with the
    smoothed constant-probability fallback, ``"force-positive"`` pins the raw
    score to 1.0 so every cold-start module is predicted positive.
    ``bootstrap_dataset`` optionally pre-populates the training pool with
    uncorrupted (feature, true label) pairs; those modules produce no trace
    rows.
    """
    if cold_start not in COLD_START_MODES:
        raise ValueError(
            f"cold_start must be one of {COLD_START_MODES}, got {cold_start!r}"
        )
    if cfs_every_k_steps < 1:
        raise ValueError(f"cfs_every_k_steps must be >= 1, got {cfs_every_k_steps}")
    n_modules = len(dataset)
    if n_modules == 0:
        raise ValueError("dataset has no modules")
    order = _validate_order(order, n_modules)

    features_all = dataset.feature_matrix()
    labels_all = dataset.labels()
    strategy = init_strategy(strategy_kind, n_modules, quit_threshold=quit_threshold)
    rng = np.random.default_rng(np.uint64(seed & (2**64 - 1)))

    template = model if model is not None else DefectModel()
    params = template.get_params()
    pinned_subset = params.pop("feature_subset", None)
    threshold = params["threshold"]
    worker = DefectModel(**params)

    n_boot = 0 if bootstrap_dataset is None else len(bootstrap_dataset)
    pool_x = np.empty((n_boot + n_modules, features_all.shape[1]))
    pool_y = np.empty(n_boot + n_modules, dtype=int)
    pool_size = 0
    pool_defective = 0
    if bootstrap_dataset is not None:
        if bootstrap_dataset.feature_names != dataset.feature_names:
            raise ValueError("bootstrap dataset has a different feature schema")
        pool_x[:n_boot] = bootstrap_dataset.feature_matrix()
        boot_labels = bootstrap_dataset.labels()
        pool_y[:n_boot] = boot_labels
        pool_size = n_boot
        pool_defective = int(boot_labels.sum())

    fitted = False
    model_fit_count = 0  # rebuilds that actually trained the logistic layer
    last_subset: tuple[int, ...] | None = None

    def refit() -> None:
        nonlocal fitted, model_fit_count, last_subset
        both_classes = 0 < pool_defective < pool_size
        if pinned_subset is not None:
            worker.feature_subset = tuple(int(i) for i in pinned_subset)
        elif (
            both_classes
            and last_subset is not None
            and model_fit_count % cfs_every_k_steps != 0
        ):
            worker.feature_subset = last_subset
        else:
            worker.feature_subset = None
        worker.fit(pool_x[:pool_size], pool_y[:pool_size])
        fitted = True
        if worker.fallback_proba_ is None:
            last_subset = worker.feature_indices_
            model_fit_count += 1

    if pool_size:
        refit()

    rows = []
    for step, module_index in enumerate(order):
        x = features_all[module_index]
        if fitted:
            raw_score = float(worker.predict_proba(x[None, :])[0, 1])
            model_trained = worker.fallback_proba_ is None
        else:
            raw_score = _EMPTY_POOL_PROBA
            model_trained = False
        if cold_start == "force-positive" and not model_trained:
            raw_score = 1.0
        raw_prediction = classify(raw_score, threshold)
        effective_prediction, forced = strategy.effective_prediction(raw_prediction)
        true_label = int(labels_all[module_index])
        observed_label = observe(true_label, effective_prediction, overlook_config, rng)
        strategy.record_outcome(forced, observed_label)
        pool_x[pool_size] = x
        pool_y[pool_size] = observed_label
        pool_size += 1
        pool_defective += observed_label
        rows.append(
            TraceRow(
                step=step,
                module_id=dataset.records[module_index].id,
                true_label=true_label,
                raw_score=raw_score,
                raw_prediction=raw_prediction,
                effective_prediction=effective_prediction,
                forced=forced,
                observed_label=observed_label,
                model_trained=model_trained,
            )
        )
        if step < n_modules - 1:
            # The model rebuilt after the final module would never be
            # consulted, so it is skipped.
            refit()

    return RunTrace(
        dataset_name=dataset.name,
        strategy_kind=strategy_kind,
        type1_prob=overlook_config.type1_prob,
        type2_prob=overlook_config.type2_prob,
        seed=seed,
        rows=tuple(rows),
        order_seed=order_seed,
    )


def run_reference(
    dataset: Dataset,
    order,
    model: DefectModel | None = None,
    seed: int = 0,
    **kwargs,
) -> RunTrace:
    """Overlooking-free baseline: the ordinary strategy with no corruption.

    Identical to ``run_once(..., "ordinary", OverlookConfig(0.0, 0.0))`` —
    observed labels always equal true labels, so this measures the online
    process with perfect test feedback.
    """
    trace = run_once(
        dataset,
        order,
        "ordinary",
        OverlookConfig(type1_prob=0.0, type2_prob=0.0),
        model=model,
        seed=seed,
        **kwargs,
    )
    return RunTrace(
        dataset_name=trace.dataset_name,
        strategy_kind="reference",
        type1_prob=0.0,
        type2_prob=0.0,
        seed=trace.seed,
        rows=trace.rows,
        order_seed=trace.order_seed,
    )


_TRACE_COLUMNS = (
    "step",
    "module_id",
    "true_label",
    "raw_score",
    "raw_prediction",
    "effective_prediction",
    "forced",
    "observed_label",
    "model_trained",
)


def write_trace_csv(trace: RunTrace, path: str | Path) -> None:
    """Write one trace row per line; scores use ``repr`` so floats round-trip."""
    with open(Path(path), "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(_TRACE_COLUMNS)
        for row in trace.rows:
            writer.writerow(
                [
                    row.step,
                    row.module_id,
                    row.true_label,
                    repr(row.raw_score),
                    row.raw_prediction,
                    row.effective_prediction,
                    int(row.forced),
                    row.observed_label,
                    int(row.model_trained),
                ]
            )
