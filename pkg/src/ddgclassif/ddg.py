"""The DD^G map: per-group depth models assembled into a feature matrix.

Every (spec, group) pair contributes depth coordinates named
``<component>.<family>.<group>``; training a classifier on the resulting
matrix is the whole method.
"""

from __future__ import annotations

import csv
import os
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .depths import DepthModel, DepthSpec
from .errors import DimensionError, FitError, FormatError, ParameterError
from .fdata import LabeledFunctionalData, MultiFunctionalDataSet, format_float


def worker_count() -> int:
    """Worker cap from DDG_THREADS; unset means the machine's core count."""
    env = os.environ.get("DDG_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ParameterError(f"DDG_THREADS must be an integer, got {env!r}")
    return os.cpu_count() or 1


@dataclass(frozen=True)
class DepthFeatureMatrix:
    """N x G depth coordinates with their column names."""

    values: np.ndarray
    column_names: tuple[str, ...]

    def __post_init__(self):
        vals = np.atleast_2d(np.asarray(self.values, dtype=float))
        if vals.shape[1] != len(self.column_names):
            raise DimensionError("one name per column required")
        if vals.size and not np.all(np.isfinite(vals)):
            raise FitError("depth features contain non-finite entries")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "column_names", tuple(self.column_names))

    @property
    def n_features(self) -> int:
        return len(self.column_names)

    def column(self, name: str) -> np.ndarray:
        return self.values[:, self.column_names.index(name)]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(self.column_names)
            for row in self.values:
                writer.writerow(format_float(v) for v in row)

    @classmethod
    def from_csv(cls, path) -> "DepthFeatureMatrix":
        with open(path, newline="") as fh:
            rows = [r for r in csv.reader(fh) if r]
        if not rows:
            raise FormatError("empty feature CSV")
        names = tuple(rows[0])
        try:
            values = np.array([[float(c) for c in r] for r in rows[1:]], dtype=float)
        except ValueError as exc:
            raise FormatError(f"malformed feature CSV: {exc}")
        if values.size == 0:
            values = values.reshape(0, len(names))
        return cls(values, names)


def _coordinate_names(spec: DepthSpec, component_names, n_groups: int) -> list[str]:
    comb = spec.combination
    if comb == "m":
        comps = list(component_names)
    elif isinstance(comb, int):
        comps = [component_names[comb]]
    else:
        comps = [comb]  # "w" or "p"
    return [
        f"{comp}.{spec.family_label}.{j}" for comp in comps for j in range(n_groups)
    ]


class DDGTransform:
    """Fitted DD^G map: one DepthModel per (spec, group)."""

    def __init__(self, specs, n_groups, component_names, models, column_names,
                 training_features):
        self.specs = tuple(specs)
        self.n_groups = n_groups
        self.component_names = tuple(component_names)
        self.models = models  # dict[(spec_index, group)] -> DepthModel
        self.column_names = tuple(column_names)
        self.training_features = training_features

    @property
    def n_features(self) -> int:
        return len(self.column_names)

    @classmethod
    def fit(cls, train: LabeledFunctionalData, specs) -> tuple["DDGTransform", DepthFeatureMatrix]:
        specs = tuple(specs)
        if not specs:
            raise ParameterError("need at least one depth spec")
        labels = [s.label for s in specs]
        if len(set(labels)) != len(labels):
            raise ParameterError("duplicate depth specs produce colliding columns")
        g = train.n_groups
        p = train.data.n_components
        groups = [train.group(j) for j in range(g)]
        for j, grp in enumerate(groups):
            if grp.n_curves < 2:
                raise FitError(f"group {j} has fewer than 2 curves")

        tasks = [(i, j) for i in range(len(specs)) for j in range(g)]

        def fit_one(task):
            i, j = task
            return DepthModel.fit(specs[i], groups[j])

        n_workers = min(worker_count(), len(tasks))
        if n_workers > 1:
            with ThreadPoolExecutor(max_workers=n_workers) as pool:
                fitted = list(pool.map(fit_one, tasks))
        else:
            fitted = [fit_one(t) for t in tasks]
        models = dict(zip(tasks, fitted))

        column_names: list[str] = []
        for spec in specs:
            column_names.extend(_coordinate_names(spec, train.data.names, g))
        expected = g * sum(s.n_coords(p) for s in specs)
        assert len(column_names) == expected, "column count law violated"

        transform = cls(specs, g, train.data.names, models, column_names, None)
        features = transform.transform(train.data)
        transform.training_features = features
        return transform, features

    def transform(self, data: MultiFunctionalDataSet) -> DepthFeatureMatrix:
        """Score every curve against every fitted (spec, group) model."""
        if data.n_components != len(self.component_names):
            raise DimensionError("component count differs from the fitted transform")
        blocks = []
        for i, spec in enumerate(self.specs):
            per_group = [self.models[(i, j)].score(data) for j in range(self.n_groups)]
            # coordinate-major: all groups of coordinate 0, then coordinate 1, ...
            n_coords = per_group[0].shape[1]
            for c in range(n_coords):
                for scores in per_group:
                    blocks.append(scores[:, c])
        if data.n_curves == 0:
            values = np.zeros((0, len(self.column_names)))
        else:
            values = np.column_stack(blocks)
        return DepthFeatureMatrix(values, self.column_names)

    def save_manifest(self, path) -> None:
        """Plain-text record of specs, seeds and frozen hyperparameters."""
        lines = [
            f"n_groups = {self.n_groups}",
            f"components = {','.join(self.component_names)}",
        ]
        for i, spec in enumerate(self.specs):
            lines.append(f"[spec {i}]")
            for key, val in spec.to_config().items():
                lines.append(f"{key} = {val}")
            for j in range(self.n_groups):
                model = self.models[(i, j)]
                if model.bandwidths:
                    joined = ",".join(format_float(b) for b in model.bandwidths)
                    lines.append(f"bandwidths.{j} = {joined}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")


def load_manifest(path):
    """Parse a manifest back into (n_groups, component names, specs, bandwidths)."""
    n_groups = None
    components: tuple[str, ...] = ()
    spec_cfgs: list[dict] = []
    bandwidths: list[dict[int, tuple[float, ...]]] = []
    current: dict | None = None
    with open(path) as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            if line.startswith("[spec"):
                current = {}
                spec_cfgs.append(current)
                bandwidths.append({})
                continue
            if "=" not in line:
                raise FormatError(f"malformed manifest line: {line!r}")
            key, _, val = (s.strip() for s in line.partition("="))
            if current is None:
                if key == "n_groups":
                    n_groups = int(val)
                elif key == "components":
                    components = tuple(val.split(","))
                else:
                    raise FormatError(f"unknown manifest key {key!r}")
            elif key.startswith("bandwidths."):
                group = int(key.split(".", 1)[1])
                bandwidths[-1][group] = tuple(float(v) for v in val.split(","))
            else:
                current[key] = val
    if n_groups is None:
        raise FormatError("manifest lacks n_groups")
    specs = tuple(DepthSpec.from_config(cfg) for cfg in spec_cfgs)
    return n_groups, components, specs, bandwidths


def refit_from_manifest(path, train: LabeledFunctionalData) -> "DDGTransform":
    """Rebuild a transform from a manifest plus the original training data.

    Frozen bandwidths and seeds from the manifest are reused verbatim, so the
    result reproduces the saved transform exactly.
    """
    n_groups, components, specs, bandwidths = load_manifest(path)
    if train.n_groups != n_groups or train.data.names != components:
        raise ParameterError("training data does not match the manifest")
    groups = [train.group(j) for j in range(n_groups)]
    models = {}
    column_names: list[str] = []
    for i, spec in enumerate(specs):
        for j in range(n_groups):
            models[(i, j)] = DepthModel.fit(spec, groups[j], bandwidths=bandwidths[i].get(j))
        column_names.extend(_coordinate_names(spec, components, n_groups))
    transform = DDGTransform(specs, n_groups, components, models, column_names, None)
    transform.training_features = transform.transform(train.data)
    return transform


def drop_constant_columns(
    train: DepthFeatureMatrix, others: list[DepthFeatureMatrix] | None = None
):
    """Remove zero-variance feature columns before classifier fitting.

    Returns the reduced training matrix and the same columns dropped from the
    companion matrices (e.g. test features).
    """
    values = train.values
    keep = np.ptp(values, axis=0) > 0 if values.shape[0] > 1 else np.ones(values.shape[1], bool)
    if keep.all():
        return (train, *(others or []))
    dropped = [n for n, k in zip(train.column_names, keep) if not k]
    warnings.warn(f"dropping constant depth columns: {', '.join(dropped)}", stacklevel=2)
    names = tuple(n for n, k in zip(train.column_names, keep) if k)
    reduced = [DepthFeatureMatrix(values[:, keep], names)]
    for other in others or []:
        reduced.append(DepthFeatureMatrix(other.values[:, keep], names))
    return tuple(reduced) if len(reduced) > 1 else reduced[0]
