"""Feature standardization and correlation-based feature selection.

Both pieces follow the scikit-learn estimator protocol (``fit`` /
``transform`` with fitted attributes ending in an underscore) so they compose
with pipelines and ``clone``.  The selector scores candidate feature subsets
with the classic correlation-based merit

    merit(S) = k * mean|corr(feature, class)|
               / sqrt(k + k*(k-1) * mean|corr(feature, feature)|)

for a subset of size k, and searches subsets with a greedy forward best-first
search that stops after a fixed number of consecutive non-improving
expansions.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.feature_selection import SelectorMixin

__all__ = [
    "FeatureStandardizer",
    "point_biserial_correlation",
    "cfs_merit",
    "FeatureSubset",
    "select_features",
    "CfsSelector",
]


def _as_matrix(X, name: str = "X") -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"{name} must be a 2-dimensional matrix, got ndim={X.ndim}")
    if X.size and not np.isfinite(X).all():
        raise ValueError(f"{name} contains non-finite values")
    return X


def _as_labels(y, n_rows: int) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1:
        raise ValueError(f"labels must be 1-dimensional, got ndim={y.ndim}")
    if len(y) != n_rows:
        raise ValueError(f"feature matrix has {n_rows} rows but labels has {len(y)}")
    out = y.astype(int)
    if len(out):
        bad = (out != y).any() if out.dtype != y.dtype else False
        if bad or out.min() < 0 or out.max() > 1:
            raise ValueError(f"labels must be binary 0/1, got values {np.unique(y)}")
    return out


class FeatureStandardizer(BaseEstimator, TransformerMixin):
    """Center features to mean 0 and scale to unit sample standard deviation.

    The scale uses the n-1 (sample) standard deviation.  A constant column
    has no spread to normalize, so its scale is set to 1 and transforming
    merely centers it.

    Fitted attributes: ``means_``, ``scales_``, ``n_features_in_``.
    """

    def fit(self, X, y=None) -> "FeatureStandardizer":
        X = _as_matrix(X)
        if X.shape[0] == 0:
            raise ValueError("cannot standardize an empty matrix")
        self.n_features_in_ = X.shape[1]
        self.means_ = X.mean(axis=0)
        if X.shape[0] > 1:
            scales = X.std(axis=0, ddof=1)
        else:
            scales = np.zeros(X.shape[1])
        scales = np.where(scales > 0.0, scales, 1.0)
        self.scales_ = scales
        return self

    def _check_input(self, X) -> np.ndarray:
        if not hasattr(self, "means_"):
            raise ValueError("FeatureStandardizer is not fitted yet; call fit first")
        X = _as_matrix(X)
        if X.shape[1] != self.n_features_in_:
            raise ValueError(
                f"expected {self.n_features_in_} features, got {X.shape[1]}"
            )
        return X

    def transform(self, X) -> np.ndarray:
        X = self._check_input(X)
        return (X - self.means_) / self.scales_

    def inverse_transform(self, X) -> np.ndarray:
        X = self._check_input(X)
        return X * self.scales_ + self.means_


def point_biserial_correlation(x, y) -> float:
    """Pearson correlation between a numeric sequence and a binary 0/1 one.

    Returns 0.0 when either side is constant (no association measurable).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1:
        raise ValueError("inputs must be 1-dimensional sequences")
    if len(x) != len(y):
        raise ValueError(f"length mismatch: {len(x)} vs {len(y)}")
    if len(x) < 2:
        raise ValueError("need at least 2 observations")
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(xc @ xc) * float(yc @ yc))
    if denom == 0.0:
        return 0.0
    return float(xc @ yc) / denom


def cfs_merit(k: int, mean_feature_class_corr: float, mean_feature_feature_corr: float) -> float:
    """Merit of a feature subset from its size and mean absolute correlations.

    ``mean_feature_class_corr`` averages |corr(feature, class)| over the k
    features; ``mean_feature_feature_corr`` averages |corr| over the k*(k-1)/2
    feature pairs (0 when k == 1).  Larger is better: the score rewards
    class-correlated features and penalizes redundant ones.
    """
    if k < 1:
        raise ValueError(f"subset size must be at least 1, got {k}")
    denominator = math.sqrt(k + k * (k - 1) * mean_feature_feature_corr)
    if denominator == 0.0:
        return 0.0
    return k * mean_feature_class_corr / denominator


@dataclass(frozen=True)
class FeatureSubset:
    """Selected feature indices (ascending) and the merit they achieved."""

    indices: tuple[int, ...]
    merit: float


def _abs_correlations(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """|corr(feature, class)| vector and |corr(feature, feature)| matrix.

    Correlations involving a constant column are 0 by convention.
    """
    n, d = X.shape
    xc = X - X.mean(axis=0)
    yc = y.astype(float) - y.mean()
    x_ss = np.einsum("ij,ij->j", xc, xc)
    y_ss = float(yc @ yc)
    x_norm = np.sqrt(x_ss)
    y_norm = math.sqrt(y_ss)

    with np.errstate(divide="ignore", invalid="ignore"):
        class_corr = np.abs(xc.T @ yc) / (x_norm * y_norm)
        cross = xc.T @ xc
        feature_corr = np.abs(cross / np.outer(x_norm, x_norm))
    class_corr = np.where((x_norm > 0) & (y_norm > 0), class_corr, 0.0)
    valid = np.outer(x_norm > 0, x_norm > 0)
    feature_corr = np.where(valid, feature_corr, 0.0)
    np.fill_diagonal(feature_corr, 1.0)
    return class_corr, feature_corr


def select_features(X, y, max_stale_expansions: int = 5) -> FeatureSubset:
    """Pick a feature subset by best-first search over the merit score.

    Candidate subsets grow one feature at a time from the singletons.  The
    search always expands the best open subset; after ``max_stale_expansions``
    consecutive expansions that fail to improve the best merit found, it
    stops.  The result is never empty, and exact merit ties are broken toward
    the subset with the lowest feature indices.
    """
    X = _as_matrix(X)
    y = _as_labels(y, X.shape[0])
    if X.shape[0] < 2:
        raise ValueError("need at least 2 records to select features")
    if X.shape[1] < 1:
        raise ValueError("need at least 1 feature")
    if len(np.unique(y)) < 2:
        raise ValueError("both classes must be present to select features")

    class_corr_arr, feature_corr_arr = _abs_correlations(X, y)
    d = X.shape[1]
    class_corr = class_corr_arr.tolist()
    corr_rows = feature_corr_arr.tolist()

    # In sum form the merit of a subset with class-correlation sum ``sum_cf``
    # and pairwise-correlation sum ``sum_ff`` is
    # ``sum_cf / sqrt(k + 2 * sum_ff)`` — identical to cfs_merit on the means.
    #
    # Heap entries: (-merit, subset, sum_cf, sum_ff).  Ties on merit pop in
    # lexicographic subset order, which implements the lowest-index tie-break.
    heap: list[tuple[float, tuple[int, ...], float, float]] = []
    for j in range(d):
        heap.append((-class_corr[j], (j,), class_corr[j], 0.0))
    heapq.heapify(heap)
    visited = {(j,) for j in range(d)}

    best_subset: tuple[int, ...] = ()
    best_merit = -math.inf
    stale = 0
    while heap:
        neg_merit, subset, sum_cf, sum_ff = heapq.heappop(heap)
        merit = -neg_merit
        if merit > best_merit:
            best_merit = merit
            best_subset = subset
            stale = 0
        else:
            stale += 1
            if stale >= max_stale_expansions:
                break
        k1 = len(subset) + 1
        for j in range(d):
            if j in subset:
                continue
            child = tuple(sorted((*subset, j)))
            if child in visited:
                continue
            visited.add(child)
            row = corr_rows[j]
            child_cf = sum_cf + class_corr[j]
            child_ff = sum_ff
            for i in subset:
                child_ff += row[i]
            child_merit = child_cf / math.sqrt(k1 + 2.0 * child_ff)
            heapq.heappush(heap, (-child_merit, child, child_cf, child_ff))
    return FeatureSubset(indices=best_subset, merit=best_merit)


class CfsSelector(BaseEstimator, SelectorMixin):
    """Feature selector wrapping :func:`select_features`.

    Parameters
    ----------
    max_stale_expansions : int
        Consecutive non-improving best-first expansions tolerated before the
        search stops.

    Fitted attributes: ``selected_indices_``, ``merit_``, ``support_mask_``,
    ``n_features_in_``.
    """

    def __init__(self, max_stale_expansions: int = 5):
        self.max_stale_expansions = max_stale_expansions

    def fit(self, X, y) -> "CfsSelector":
        X = _as_matrix(X)
        subset = select_features(X, y, max_stale_expansions=self.max_stale_expansions)
        self.n_features_in_ = X.shape[1]
        self.selected_indices_ = subset.indices
        self.merit_ = subset.merit
        mask = np.zeros(X.shape[1], dtype=bool)
        mask[list(subset.indices)] = True
        self.support_mask_ = mask
        return self

    def _get_support_mask(self) -> np.ndarray:
        if not hasattr(self, "support_mask_"):
            raise ValueError("CfsSelector is not fitted yet; call fit first")
        return self.support_mask_
