"""Full experiment grid: datasets x strategies x overlook probabilities.

One experiment sweeps every configured Type-1 overlook probability for the
ordinary, fixed and proposed strategies, plus one overlooking-free reference
per repetition, over every dataset.  Repetitions are paired: repetition ``r``
of a dataset uses the same module ordering for every strategy and every
probability, so differences between cells come from the strategies
themselves, not from ordering luck.

Four report tables summarize the sweep:

* table 1 — reference aggregates per dataset (absolute values);
* table 2 — ordinary minus reference (what overlooking costs);
* table 3 — fixed minus ordinary (what forced predictions recover);
* table 4 — proposed minus ordinary (the same, with the adaptive quit rule).

Tables are written as Markdown and/or long-form CSV, plus a ``provenance.txt``
echoing the full configuration and environment.  Report files contain no
timestamps: the same configuration and master seed produce byte-identical
files.
"""

from __future__ import annotations

import csv
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numba
import numpy as np
import sklearn

from . import __version__
from .classifier import DefectModel
from .datasets import Dataset, generate_synthetic, load_dataset
from .metrics import (
    DIFF_FIELDS,
    METRIC_FIELDS,
    AggregateMetrics,
    RunMetrics,
    aggregate,
    diff,
    run_metrics,
)
from .overlook import OverlookConfig
from .seeding import derive_seed
from .simulator import run_once, run_reference, write_trace_csv

__all__ = [
    "SyntheticSpec",
    "CsvSpec",
    "ExperimentConfig",
    "ExperimentReport",
    "run_experiment",
    "render_report",
]

STRATEGIES = ("reference", "ordinary", "fixed", "proposed")
FORMATS = ("md", "csv")

TABLE_FILES = {
    "table1": "table1_reference",
    "table2": "table2_ordinary_vs_reference",
    "table3": "table3_fixed_vs_ordinary",
    "table4": "table4_proposed_vs_ordinary",
}


@dataclass(frozen=True)
class SyntheticSpec:
    """Recipe for one synthetic dataset in the grid.

    ``seed=None`` derives the generation seed from the master seed and the
    dataset's position, so the whole grid reproduces from one number.
    """

    n_modules: int = 200
    defect_rate: float = 0.3
    n_features: int = 10
    separation: float = 1.5
    seed: int | None = None
    name: str | None = None


@dataclass(frozen=True)
class CsvSpec:
    """One CSV-backed dataset in the grid."""

    path: str
    label_column: str = "bug"
    name: str | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything that determines an experiment, and nothing else."""

    datasets: tuple[SyntheticSpec | CsvSpec, ...] = (SyntheticSpec(),)
    type1_probs: tuple[float, ...] = (0.2, 0.4, 0.6, 0.8, 1.0)
    type2_prob: float = 0.2
    repetitions: int = 40
    strategies: tuple[str, ...] = STRATEGIES
    master_seed: int = 123456789
    model_params: Mapping[str, object] = field(default_factory=dict)
    cfs_every_k_steps: int = 1
    cold_start: str = "model-fallback"
    quit_threshold: float = 0.25
    bootstrap: SyntheticSpec | CsvSpec | None = None
    output_dir: str = "results"
    formats: tuple[str, ...] = FORMATS
    dump_traces: bool = False
    verbose: bool = False

    def __post_init__(self) -> None:
        if not self.datasets:
            raise ValueError("at least one dataset is required")
        if not self.type1_probs:
            raise ValueError("at least one Type-1 overlook probability is required")
        if not 0.0 <= self.type2_prob <= 1.0:
            raise ValueError(f"type2_prob must be in [0, 1], got {self.type2_prob}")
        for p in self.type1_probs:
            if not self.type2_prob <= p <= 1.0:
                raise ValueError(
                    f"every type1 probability must be in [type2_prob, 1]; "
                    f"got {p} with type2_prob={self.type2_prob}"
                )
        if self.repetitions < 1:
            raise ValueError(f"repetitions must be >= 1, got {self.repetitions}")
        if not self.strategies:
            raise ValueError("strategies must not be empty")
        for s in self.strategies:
            if s not in STRATEGIES:
                raise ValueError(f"unknown strategy {s!r}; expected a subset of {STRATEGIES}")
        if not self.formats:
            raise ValueError("formats must not be empty")
        for f in self.formats:
            if f not in FORMATS:
                raise ValueError(f"unknown format {f!r}; expected a subset of {FORMATS}")
        # Fail fast on bad model parameters.
        DefectModel(**dict(self.model_params))


CellKey = tuple[str, str, float | None]  # (dataset, strategy, type1 prob or None)


@dataclass
class ExperimentReport:
    """Raw and aggregated results of one experiment."""

    config: ExperimentConfig
    dataset_names: list[str]
    dataset_errors: dict[str, str]
    runs: dict[CellKey, list[RunMetrics | None]]
    aggregates: dict[CellKey, AggregateMetrics | None]
    failures: dict[tuple[str, str, float | None, int], str]

    @property
    def ok(self) -> bool:
        return not self.failures and not self.dataset_errors


def _spec_name(spec: SyntheticSpec | CsvSpec, index: int) -> str:
    if spec.name:
        return spec.name
    if isinstance(spec, CsvSpec):
        return Path(spec.path).stem
    return f"synthetic-{index + 1}"


def _describe_spec(spec: SyntheticSpec | CsvSpec, resolved_seed: int | None = None) -> str:
    if isinstance(spec, CsvSpec):
        return f"csv path={spec.path} label_column={spec.label_column}"
    seed = spec.seed if spec.seed is not None else resolved_seed
    return (
        f"synthetic n_modules={spec.n_modules} defect_rate={spec.defect_rate} "
        f"n_features={spec.n_features} separation={spec.separation} seed={seed}"
    )


def _resolve_dataset(
    spec: SyntheticSpec | CsvSpec, index: int, master_seed: int
) -> tuple[Dataset, int | None]:
    name = _spec_name(spec, index)
    if isinstance(spec, CsvSpec):
        dataset = load_dataset(spec.path, label_column=spec.label_column)
        if spec.name:
            dataset = Dataset(name=name, feature_names=dataset.feature_names, records=dataset.records)
        return dataset, None
    seed = spec.seed if spec.seed is not None else derive_seed(master_seed, "synthetic", index)
    return (
        generate_synthetic(
            spec.n_modules,
            spec.defect_rate,
            spec.n_features,
            spec.separation,
            seed=seed,
            name=name,
        ),
        seed,
    )


def _validate_for_simulation(dataset: Dataset) -> None:
    if len(dataset) < 2:
        raise ValueError(f"dataset {dataset.name!r} needs at least 2 modules")
    labels = dataset.labels()
    if len(np.unique(labels)) < 2:
        raise ValueError(
            f"dataset {dataset.name!r} contains a single class and cannot be evaluated"
        )


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Execute the full grid.

    Failures are isolated: a dataset that cannot be loaded voids only its own
    cells, and an exception inside one run voids only that (cell, repetition),
    in both cases with the reason recorded in the report.
    """
    template = DefectModel(**dict(config.model_params))
    sim_kwargs = dict(
        cfs_every_k_steps=config.cfs_every_k_steps,
        cold_start=config.cold_start,
        quit_threshold=config.quit_threshold,
    )

    bootstrap_dataset = None
    if config.bootstrap is not None:
        boot, _seed = _resolve_dataset(config.bootstrap, 0, derive_seed(config.master_seed, "bootstrap"))
        bootstrap_dataset = boot

    dataset_names: list[str] = []
    dataset_errors: dict[str, str] = {}
    datasets: list[Dataset] = []
    resolved_seeds: dict[str, int | None] = {}
    for index, spec in enumerate(config.datasets):
        name = _spec_name(spec, index)
        if name in dataset_names or name in dataset_errors:
            raise ValueError(f"duplicate dataset name {name!r} in the grid")
        try:
            dataset, used_seed = _resolve_dataset(spec, index, config.master_seed)
            _validate_for_simulation(dataset)
        except Exception as error:  # isolate per-dataset load problems
            dataset_errors[name] = f"{type(error).__name__}: {error}"
            continue
        dataset_names.append(name)
        datasets.append(dataset)
        resolved_seeds[name] = used_seed

    overlook_strategies = tuple(
        s for s in ("ordinary", "fixed", "proposed") if s in config.strategies
    )
    runs: dict[CellKey, list[RunMetrics | None]] = {}
    failures: dict[tuple[str, str, float | None, int], str] = {}
    for dataset in datasets:
        if "reference" in config.strategies:
            runs[(dataset.name, "reference", None)] = []
        for n in config.type1_probs:
            for strat in overlook_strategies:
                runs[(dataset.name, strat, n)] = []

    trace_dir: Path | None = None
    if config.dump_traces:
        trace_dir = Path(config.output_dir) / "traces"
        trace_dir.mkdir(parents=True, exist_ok=True)

    def note(message: str) -> None:
        if config.verbose:
            print(message, file=sys.stderr, flush=True)

    for dataset in datasets:
        note(f"dataset {dataset.name}: {len(dataset)} modules, "
             f"{dataset.defect_count()} defective, {config.repetitions} repetitions")
        for rep in range(config.repetitions):
            order_seed = derive_seed(config.master_seed, "order", dataset.name, rep)
            order_rng = np.random.default_rng(np.uint64(order_seed))
            order = order_rng.permutation(len(dataset))

            def record(key: CellKey, trace_or_error, rep_index: int) -> None:
                if isinstance(trace_or_error, Exception):
                    runs[key].append(None)
                    failures[(key[0], key[1], key[2], rep_index)] = (
                        f"{type(trace_or_error).__name__}: {trace_or_error}"
                    )
                else:
                    runs[key].append(run_metrics(trace_or_error))
                    if trace_dir is not None:
                        tag = "ref" if key[2] is None else f"n{key[2]:g}"
                        write_trace_csv(
                            trace_or_error,
                            trace_dir / f"{key[0]}__{key[1]}__{tag}__rep{rep_index}.csv",
                        )

            if "reference" in config.strategies:
                key = (dataset.name, "reference", None)
                try:
                    trace = run_reference(
                        dataset,
                        order,
                        model=template,
                        seed=derive_seed(config.master_seed, "obs", dataset.name, "reference", rep),
                        order_seed=order_seed,
                        **sim_kwargs,
                        bootstrap_dataset=bootstrap_dataset,
                    )
                    record(key, trace, rep)
                except Exception as error:
                    record(key, error, rep)
            for n in config.type1_probs:
                overlook = OverlookConfig(type1_prob=n, type2_prob=config.type2_prob)
                for strat in overlook_strategies:
                    key = (dataset.name, strat, n)
                    try:
                        trace = run_once(
                            dataset,
                            order,
                            strat,
                            overlook,
                            model=template,
                            seed=derive_seed(config.master_seed, "obs", dataset.name, strat, n, rep),
                            order_seed=order_seed,
                            **sim_kwargs,
                            bootstrap_dataset=bootstrap_dataset,
                        )
                        record(key, trace, rep)
                    except Exception as error:
                        record(key, error, rep)
            if (rep + 1) % 10 == 0:
                note(f"  {dataset.name}: repetition {rep + 1}/{config.repetitions} done")

    aggregates: dict[CellKey, AggregateMetrics | None] = {}
    for key, cell_runs in runs.items():
        successes = [m for m in cell_runs if m is not None]
        aggregates[key] = aggregate(successes) if successes else None

    return ExperimentReport(
        config=config,
        dataset_names=dataset_names,
        dataset_errors=dataset_errors,
        runs=runs,
        aggregates=aggregates,
        failures=failures,
    )


# ---------------------------------------------------------------------------
# Rendering


def _fmt_auc(value: float | None, signed: bool = False) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "n/a"
    text = f"{value:+.2f}" if signed else f"{value:.2f}"
    return text.replace("-0.00", "+0.00") if signed else text


def _fmt_pct(value: float | None, signed: bool = False) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "n/a"
    text = f"{100 * value:+.1f}%" if signed else f"{100 * value:.1f}%"
    return text.replace("-0.0%", "+0.0%") if signed else text


_METRIC_LABELS = {"auc": "AUC", "precision": "Precision", "recall": "Recall", "f1": "F1 score"}


def _markdown_table(header: list[str], rows: list[list[str]]) -> str:
    lines = [
        "| " + " | ".join(header) + " |",
        "|" + "|".join("---" for _ in header) + "|",
    ]
    for row in rows:
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"


def _fmt_cell(metric: str, value: float | None, signed: bool) -> str:
    if metric == "auc":
        return _fmt_auc(value, signed)
    return _fmt_pct(value, signed)


def _paired_diff_stats(
    base: list[RunMetrics | None], other: list[RunMetrics | None], metric: str
) -> tuple[float, float] | None:
    """Mean and sample std of per-repetition metric differences.

    Pairs where either side failed (or has undefined AUC) are skipped;
    returns None when no pair survives.
    """
    values = []
    for b, o in zip(base, other):
        if b is None or o is None:
            continue
        vb = getattr(b, metric)
        vo = getattr(o, metric)
        if vb is None or vo is None:
            continue
        values.append(vo - vb)
    if not values:
        return None
    array = np.array(values, dtype=float)
    std = float(array.std(ddof=1)) if len(array) > 1 else 0.0
    return float(array.mean()), std


def _render_table1(report: ExperimentReport) -> tuple[str, list[list[str]]]:
    header = ["Dataset"] + [_METRIC_LABELS[m] for m in DIFF_FIELDS]
    md_rows = []
    csv_rows = []
    for name in report.dataset_names:
        agg = report.aggregates.get((name, "reference", None))
        if agg is None:
            md_rows.append([name] + ["n/a"] * len(DIFF_FIELDS))
            continue
        md_rows.append(
            [name] + [_fmt_cell(m, agg.means[m], signed=False) for m in DIFF_FIELDS]
        )
        for metric in METRIC_FIELDS:
            csv_rows.append(
                [name, "reference", "", metric, repr(agg.means[metric]), repr(agg.stds[metric])]
            )
    title = "# Reference model (no overlooking)\n\n"
    note = (
        "\nValues are means over "
        f"{report.config.repetitions} repetitions; percentages are rates, AUC is 0-1.\n"
    )
    return title + _markdown_table(header, md_rows) + note, csv_rows


def _render_diff_table(
    report: ExperimentReport,
    title: str,
    base_strategy: str,
    other_strategy: str,
    base_uses_n: bool,
) -> tuple[str, list[list[str]]]:
    header = ["Type 1 overlooking"]
    for name in report.dataset_names:
        header += [f"{name} {_METRIC_LABELS[m]}" for m in DIFF_FIELDS]
    md_rows = []
    csv_rows = []
    for n in report.config.type1_probs:
        row = [f"{100 * n:g}%"]
        for name in report.dataset_names:
            base_key = (name, base_strategy, n if base_uses_n else None)
            other_key = (name, other_strategy, n)
            base_agg = report.aggregates.get(base_key)
            other_agg = report.aggregates.get(other_key)
            if base_agg is None or other_agg is None:
                row += ["n/a"] * len(DIFF_FIELDS)
                continue
            deltas = diff(base_agg, other_agg)
            row += [_fmt_cell(m, deltas[m], signed=True) for m in DIFF_FIELDS]
            for metric in DIFF_FIELDS:
                paired = _paired_diff_stats(
                    report.runs[base_key], report.runs[other_key], metric
                )
                std_text = repr(paired[1]) if paired else ""
                csv_rows.append(
                    [name, other_strategy, repr(n), metric, repr(deltas[metric]), std_text]
                )
        md_rows.append(row)
    text = (
        f"# {title}\n\n"
        + _markdown_table(header, md_rows)
        + f"\nDifferences of means over {report.config.repetitions} repetitions "
        f"({other_strategy} minus {base_strategy}); positive favors {other_strategy}.\n"
    )
    return text, csv_rows


def _provenance_text(report: ExperimentReport) -> str:
    config = report.config
    lines = [
        f"defectsim {__version__}",
        f"python {sys.version.split()[0]}",
        f"numpy {np.__version__} / scikit-learn {sklearn.__version__} / numba {numba.__version__}",
        "",
        f"master_seed: {config.master_seed}",
        f"repetitions: {config.repetitions}",
        f"strategies: {', '.join(config.strategies)}",
        f"type1_probs: {', '.join(repr(p) for p in config.type1_probs)}",
        f"type2_prob: {config.type2_prob!r}",
        f"cfs_every_k_steps: {config.cfs_every_k_steps}",
        f"cold_start: {config.cold_start}",
        f"quit_threshold: {config.quit_threshold!r}",
        f"model_params: {dict(config.model_params)!r}",
        f"formats: {', '.join(config.formats)}",
        f"dump_traces: {config.dump_traces}",
        "datasets:",
    ]
    for index, spec in enumerate(config.datasets):
        name = _spec_name(spec, index)
        seed = None
        if isinstance(spec, SyntheticSpec) and spec.seed is None:
            seed = derive_seed(config.master_seed, "synthetic", index)
        status = f"load failed: {report.dataset_errors[name]}" if name in report.dataset_errors else "ok"
        lines.append(f"  - {name}: {_describe_spec(spec, seed)} [{status}]")
    if config.bootstrap is not None:
        lines.append(f"bootstrap: {_describe_spec(config.bootstrap)}")
    total_cells = len(report.runs)
    failed_cells = len({(d, s, n) for (d, s, n, _r) in report.failures})
    lines.append(f"grid cells: {total_cells} (cells with failed repetitions: {failed_cells})")
    if report.failures:
        lines.append("failures:")
        for (ds, strat, n, rep), reason in sorted(
            report.failures.items(), key=lambda kv: (kv[0][0], kv[0][1], str(kv[0][2]), kv[0][3])
        ):
            tag = "reference" if n is None else f"n={n:g}"
            lines.append(f"  - {ds} / {strat} / {tag} / rep {rep}: {reason}")
    else:
        lines.append("failures: none")
    return "\n".join(lines) + "\n"


def render_report(report: ExperimentReport, output_dir: str | Path | None = None) -> list[Path]:
    """Write the table files and provenance; returns the paths written."""
    config = report.config
    out = Path(output_dir if output_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    strategies = config.strategies
    written: list[Path] = []

    tables: list[tuple[str, str, list[list[str]]]] = []
    if "reference" in strategies:
        md, csv_rows = _render_table1(report)
        tables.append((TABLE_FILES["table1"], md, csv_rows))
    if "reference" in strategies and "ordinary" in strategies:
        md, csv_rows = _render_diff_table(
            report,
            "Ordinary model minus reference model",
            "reference",
            "ordinary",
            base_uses_n=False,
        )
        tables.append((TABLE_FILES["table2"], md, csv_rows))
    if "ordinary" in strategies and "fixed" in strategies:
        md, csv_rows = _render_diff_table(
            report,
            "Fixed-prediction model minus ordinary model",
            "ordinary",
            "fixed",
            base_uses_n=True,
        )
        tables.append((TABLE_FILES["table3"], md, csv_rows))
    if "ordinary" in strategies and "proposed" in strategies:
        md, csv_rows = _render_diff_table(
            report,
            "Proposed model (adaptive quit) minus ordinary model",
            "ordinary",
            "proposed",
            base_uses_n=True,
        )
        tables.append((TABLE_FILES["table4"], md, csv_rows))

    for stem, md_text, csv_rows in tables:
        if "md" in config.formats:
            path = out / f"{stem}.md"
            path.write_text(md_text, encoding="utf-8")
            written.append(path)
        if "csv" in config.formats:
            path = out / f"{stem}.csv"
            with open(path, "w", newline="", encoding="utf-8") as handle:
                writer = csv.writer(handle, lineterminator="\n")
                writer.writerow(["dataset", "strategy", "n", "metric", "mean", "std"])
                writer.writerows(csv_rows)
            written.append(path)

    provenance = out / "provenance.txt"
    provenance.write_text(_provenance_text(report), encoding="utf-8")
    written.append(provenance)
    return written
