"""Module-level defect datasets: CSV loading and synthetic generation.

A dataset is an immutable collection of software modules, each carrying a
numeric feature vector (static code metrics) and a binary ground-truth label
(1 = defective, 0 = non-defective).  Datasets come from two sources:

* CSV files in the common "one row per module" layout, where a designated
  label column holds a defect count and every other numeric column is a
  feature (non-numeric columns such as module names are treated as
  identifiers and excluded from the feature matrix);
* a synthetic generator that plants a controllable amount of signal, used
  for desk-scale experiments and tests.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

__all__ = [
    "DatasetFormatError",
    "ModuleRecord",
    "Dataset",
    "load_dataset",
    "generate_synthetic",
    "save_csv",
]


class DatasetFormatError(ValueError):
    """Raised when a dataset file cannot be interpreted."""


@dataclass(frozen=True)
class ModuleRecord:
    """One software module: identifier, feature vector, true defect label."""

    id: str
    features: tuple[float, ...]
    true_label: int

    def __post_init__(self) -> None:
        if self.true_label not in (0, 1):
            raise ValueError(f"true_label must be 0 or 1, got {self.true_label!r}")
        for value in self.features:
            if not math.isfinite(value):
                raise ValueError(f"non-finite feature value {value!r} in module {self.id!r}")


@dataclass(frozen=True)
class Dataset:
    """An immutable set of module records sharing one feature schema."""

    name: str
    feature_names: tuple[str, ...]
    records: tuple[ModuleRecord, ...]

    def __post_init__(self) -> None:
        width = len(self.feature_names)
        for record in self.records:
            if len(record.features) != width:
                raise ValueError(
                    f"module {record.id!r} has {len(record.features)} features, "
                    f"expected {width}"
                )

    def __len__(self) -> int:
        return len(self.records)

    def feature_matrix(self) -> np.ndarray:
        """All feature vectors stacked into an (n_modules, n_features) array."""
        return np.array([r.features for r in self.records], dtype=float).reshape(
            len(self.records), len(self.feature_names)
        )

    def labels(self) -> np.ndarray:
        """True defect labels as an int array of 0/1."""
        return np.array([r.true_label for r in self.records], dtype=int)

    def defect_count(self) -> int:
        return sum(r.true_label for r in self.records)


def _default_label_rule(value: float) -> bool:
    return value > 0


def load_dataset(
    path: str | Path,
    label_column: str = "bug",
    label_rule: Callable[[float], bool] | None = None,
) -> Dataset:
    """Load a module-metric CSV file.

    The first row is the header.  ``label_column`` must name a column whose
    numeric value is mapped to the binary label by ``label_rule`` (default:
    defective iff value > 0).  Columns whose cells are numeric in every row
    become features, in header order; columns that are non-numeric in every
    row are identifiers and contribute to the module id.  A column that is
    numeric in some rows but blank or non-numeric in others is rejected with
    the offending position, since silently imputing values would corrupt the
    simulation.
    """
    path = Path(path)
    rule = label_rule if label_rule is not None else _default_label_rule
    with open(path, newline="", encoding="utf-8") as handle:
        rows = list(csv.reader(handle))
    if not rows:
        raise DatasetFormatError(f"{path}: file is empty")
    header = [name.strip() for name in rows[0]]
    body = rows[1:]
    if not body:
        raise DatasetFormatError(f"{path}: no data rows after the header")
    if label_column not in header:
        raise DatasetFormatError(
            f"{path}: label column {label_column!r} not found in header {header}"
        )
    for index, row in enumerate(body):
        if len(row) != len(header):
            raise DatasetFormatError(
                f"{path}: line {index + 2} has {len(row)} cells, expected {len(header)}"
            )

    def parse(cell: str) -> float | None:
        try:
            return float(cell)
        except ValueError:
            return None

    label_index = header.index(label_column)
    feature_indices: list[int] = []
    identifier_indices: list[int] = []
    for col in range(len(header)):
        if col == label_index:
            continue
        parsed = [parse(row[col]) for row in body]
        numeric = sum(value is not None for value in parsed)
        if numeric == len(body):
            feature_indices.append(col)
        elif numeric == 0:
            identifier_indices.append(col)
        else:
            bad = next(i for i, value in enumerate(parsed) if value is None)
            raise DatasetFormatError(
                f"{path}: non-numeric value {body[bad][col]!r} in numeric column "
                f"{header[col]!r} at line {bad + 2}"
            )

    records = []
    for index, row in enumerate(body):
        label_value = parse(row[label_index])
        if label_value is None:
            raise DatasetFormatError(
                f"{path}: non-numeric label {row[label_index]!r} in column "
                f"{label_column!r} at line {index + 2}"
            )
        features = tuple(float(row[col]) for col in feature_indices)
        for col, value in zip(feature_indices, features):
            if not math.isfinite(value):
                raise DatasetFormatError(
                    f"{path}: non-finite value {row[col]!r} in column "
                    f"{header[col]!r} at line {index + 2}"
                )
        if identifier_indices:
            module_id = "/".join(row[col] for col in identifier_indices)
        else:
            # Not a bare number: a saved file must not reparse ids as features.
            module_id = f"r{index}"
        records.append(
            ModuleRecord(
                id=module_id,
                features=features,
                true_label=int(bool(rule(label_value))),
            )
        )
    feature_names = tuple(header[col] for col in feature_indices)
    return Dataset(name=path.stem, feature_names=feature_names, records=tuple(records))


def generate_synthetic(
    n_modules: int,
    defect_rate: float,
    n_features: int = 10,
    separation: float = 1.5,
    seed: int = 0,
    name: str = "synthetic",
) -> Dataset:
    """Generate a synthetic dataset with a controllable amount of signal.

    Labels are independent Bernoulli draws with probability ``defect_rate``.
    Non-defective modules draw features from a standard normal; defective
    modules draw from the same distribution with its mean shifted so the two
    class centroids are ``separation`` apart (the shift is spread evenly over
    the features).  ``separation=0`` yields labels independent of features.
    The output depends only on the arguments, bit for bit.
    """
    if n_modules < 10:
        raise ValueError(f"n_modules must be at least 10, got {n_modules}")
    if not 0.0 < defect_rate < 1.0:
        raise ValueError(f"defect_rate must be strictly between 0 and 1, got {defect_rate}")
    if n_features < 1:
        raise ValueError(f"n_features must be positive, got {n_features}")
    if separation < 0:
        raise ValueError(f"separation must be non-negative, got {separation}")
    rng = np.random.default_rng(np.uint64(seed & (2**64 - 1)))
    labels = (rng.random(n_modules) < defect_rate).astype(int)
    features = rng.standard_normal((n_modules, n_features))
    shift = separation / math.sqrt(n_features)
    features += labels[:, None] * shift
    width = len(str(n_modules))
    records = tuple(
        ModuleRecord(
            id=f"m{i + 1:0{width}d}",
            features=tuple(float(v) for v in features[i]),
            true_label=int(labels[i]),
        )
        for i in range(n_modules)
    )
    feature_names = tuple(f"f{j + 1}" for j in range(n_features))
    return Dataset(name=name, feature_names=feature_names, records=records)


def save_csv(dataset: Dataset, path: str | Path, label_column: str = "bug") -> None:
    """Write a dataset in the same CSV layout ``load_dataset`` reads.

    Feature values are written with ``repr`` so the file round-trips to the
    exact same floats; labels are written as 0/1 counts.
    """
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["name", *dataset.feature_names, label_column])
        for record in dataset.records:
            writer.writerow(
                [record.id, *[repr(v) for v in record.features], record.true_label]
            )
