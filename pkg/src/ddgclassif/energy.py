"""Distance covariance/correlation for depth selection.

Both the classical (double-centered, biased) statistic and the bias-corrected
U-centered version are provided; they only need pairwise distance matrices,
so functional data, feature matrices and class labels all plug in.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DimensionError, ParameterError
from .fdata import (
    FunctionalDataSet,
    MultiFunctionalDataSet,
    l2_distance_matrix,
    product_distance_matrix,
)


def labels_to_onehot(labels, n_groups: int | None = None) -> np.ndarray:
    labels = np.asarray(labels, dtype=int)
    g = int(labels.max()) + 1 if n_groups is None else n_groups
    out = np.zeros((labels.size, g))
    out[np.arange(labels.size), labels] = 1.0
    return out


def distance_matrix(obj, labels: bool = False) -> np.ndarray:
    """Pairwise distances: L2-functional for curve datasets, Euclidean for
    real matrices; with ``labels=True`` an integer vector is expanded to
    one-hot rows (distinct classes at distance sqrt(2))."""
    if isinstance(obj, FunctionalDataSet):
        return l2_distance_matrix(obj.values, obj.values, obj.grid)
    if isinstance(obj, MultiFunctionalDataSet):
        return product_distance_matrix(obj, obj)
    arr = np.asarray(obj, dtype=float)
    if labels:
        arr = labels_to_onehot(np.asarray(obj, dtype=int))
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] < 2:
        raise DimensionError("need a matrix with at least 2 rows")
    sq = np.sum(arr * arr, axis=1)
    d2 = sq[:, None] + sq[None, :] - 2.0 * arr @ arr.T
    np.maximum(d2, 0.0, out=d2)
    d = np.sqrt(d2)
    np.fill_diagonal(d, 0.0)
    return d


def _check_distance_matrix(d: np.ndarray) -> np.ndarray:
    d = np.asarray(d, dtype=float)
    if d.ndim != 2 or d.shape[0] != d.shape[1]:
        raise DimensionError("distance matrix must be square")
    return d


def double_centered(d: np.ndarray) -> np.ndarray:
    """Subtract row and column means, add back the grand mean."""
    row = d.mean(axis=1, keepdims=True)
    col = d.mean(axis=0, keepdims=True)
    return d - row - col + d.mean()


def u_centered(d: np.ndarray) -> np.ndarray:
    """U-centering with (n-2)/(n-1)(n-2) normalizations; zero diagonal."""
    n = d.shape[0]
    row = d.sum(axis=1, keepdims=True) / (n - 2)
    col = d.sum(axis=0, keepdims=True) / (n - 2)
    grand = d.sum() / ((n - 1) * (n - 2))
    out = d - row - col + grand
    np.fill_diagonal(out, 0.0)
    return out


class DcorResult(NamedTuple):
    value: float
    degenerate: bool


def dcor_flagged(a, b, corrected: bool = False) -> DcorResult:
    """Distance correlation of two distance matrices.

    The biased version is the square root of the ratio of double-centered
    inner products, always in [0, 1].  The corrected version uses U-centering
    and may be slightly negative; it is reported as-is.  Zero distance
    variance in either argument yields value 0 with the degenerate flag.
    """
    a = _check_distance_matrix(a)
    b = _check_distance_matrix(b)
    n = a.shape[0]
    if b.shape[0] != n:
        raise DimensionError("distance matrices must have matching size")
    if corrected:
        if n < 4:
            raise ParameterError("corrected dcor needs at least 4 observations")
        au = u_centered(a)
        bu = u_centered(b)
        vab = np.sum(au * bu) / (n * (n - 3))
        vaa = np.sum(au * au) / (n * (n - 3))
        vbb = np.sum(bu * bu) / (n * (n - 3))
        if vaa <= 0 or vbb <= 0:
            return DcorResult(0.0, True)
        return DcorResult(float(vab / np.sqrt(vaa * vbb)), False)
    if n < 2:
        raise ParameterError("dcor needs at least 2 observations")
    ac = double_centered(a)
    bc = double_centered(b)
    vab = max(np.mean(ac * bc), 0.0)
    vaa = np.mean(ac * ac)
    vbb = np.mean(bc * bc)
    if vaa <= 0 or vbb <= 0:
        return DcorResult(0.0, True)
    r2 = min(vab / np.sqrt(vaa * vbb), 1.0)
    return DcorResult(float(np.sqrt(r2)), False)


def dcor(a, b, corrected: bool = False) -> float:
    return dcor_flagged(a, b, corrected).value


def select_depths(
    candidates,
    labels,
    max_selected: int = 3,
    redundancy_cap: float = 0.7,
) -> list[str]:
    """Greedy forward depth selection against the class labels.

    First pick the candidate with the largest corrected distance correlation
    to the one-hot labels; then keep adding the best remaining candidate whose
    correlation with every selected one stays below ``redundancy_cap``.
    """
    if not candidates:
        raise ParameterError("need at least one candidate")
    names = [name for name, _ in candidates]
    if len(set(names)) != len(names):
        raise ParameterError("candidate names must be unique")
    label_d = distance_matrix(labels, labels=True)
    cand_d = {name: distance_matrix(feats) for name, feats in candidates}
    relevance = {name: dcor(cand_d[name], label_d, corrected=True) for name in names}
    selected: list[str] = []
    remaining = list(names)
    while remaining and len(selected) < max_selected:
        best = max(remaining, key=lambda name: relevance[name])
        if selected:
            eligible = [
                name
                for name in remaining
                if all(
                    dcor(cand_d[name], cand_d[s], corrected=True) < redundancy_cap
                    for s in selected
                )
            ]
            if not eligible:
                break
            best = max(eligible, key=lambda name: relevance[name])
        selected.append(best)
        remaining.remove(best)
    return selected
