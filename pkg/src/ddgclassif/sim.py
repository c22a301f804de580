"""Generative models for the simulation study and the point-cloud examples,
plus the Monte Carlo experiment harness.

Four functional two/four-group models share one error structure: a zero-mean
Gaussian process with exponential covariance theta * exp(-|s-t|/0.3) added to
smooth polynomial-type means on an equispaced grid.  Point-cloud generators
cover the bivariate normal pairs and the ball-versus-rings example.
"""

from __future__ import annotations

import csv
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .classifiers import evaluate, make_classifier
from .ddg import DDGTransform, DepthFeatureMatrix, drop_constant_columns, worker_count
from .depths import DepthSpec, halfspace_depth_2d
from .energy import dcor, distance_matrix
from .errors import FitError, NumericalError, ParameterError
from .fdata import (
    FunctionalDataSet,
    Grid,
    LabeledFunctionalData,
    MultiFunctionalDataSet,
    equispaced_grid,
    smoothed_derivative,
)

FUNCTIONAL_MODELS = ("1", "2", "3", "4")
POINT_MODELS = ("rings", "normals-mean", "normals-cov")


@dataclass(frozen=True)
class SimConfig:
    """Settings for one generative model.

    ``n`` counts curves per group (models 1-2) or per subgroup (models 3-4).
    """

    model: str = "1"
    n: int = 100
    n_grid: int = 51
    k: float = 1.1
    theta1: float = 0.5
    theta2: float = 0.25
    corr_range: float = 0.3
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "model", str(self.model))
        if self.model not in FUNCTIONAL_MODELS + POINT_MODELS:
            raise ParameterError(f"unknown model {self.model!r}")
        if self.n < 1 or self.n_grid < 2:
            raise ParameterError("counts and grid size must be positive")
        if min(self.theta1, self.theta2) <= 0 or self.k <= 0 or self.corr_range <= 0:
            raise ParameterError("theta, k and the range parameter must be positive")

    @property
    def grid(self) -> Grid:
        return equispaced_grid(self.n_grid)


def _mean_first_kind(amplitude, t, k):
    return amplitude * (1.0 - t) * t**k


def _mean_second_kind(amplitude, t, k):
    return amplitude * (1.0 - t) ** k * t


# (group, subgroup) -> (amplitude, mean kind, noise scale index)
_MODEL_TABLE = {
    "1": {(0, 0): (30.0, 1, 1), (1, 0): (30.0, 2, 2)},
    "2": {(0, 0): (30.0, 1, 1), (1, 0): (25.0, 2, 2), (1, 1): (35.0, 2, 2)},
    "3": {
        (0, 0): (22.0, 1, 1),
        (0, 1): (30.0, 1, 1),
        (1, 0): (26.0, 2, 2),
        (1, 1): (34.0, 2, 2),
    },
    "4": {
        (0, 0): (22.0, 1, 1),
        (1, 0): (30.0, 1, 1),
        (2, 0): (26.0, 2, 2),
        (3, 0): (34.0, 2, 2),
    },
}


def model_mean(model, group: int, subgroup: int, t, k: float = 1.1):
    """Mean curve value(s) of one (sub)group at t in [0, 1]."""
    t = np.asarray(t, dtype=float)
    entry = _MODEL_TABLE.get(str(model), {}).get((group, subgroup))
    if entry is None:
        raise ParameterError(
            f"model {model!r} has no group {group} / subgroup {subgroup}"
        )
    amplitude, kind, _ = entry
    fn = _mean_first_kind if kind == 1 else _mean_second_kind
    return fn(amplitude, t, k)


def model_theta(model, group: int, subgroup: int, theta1: float, theta2: float) -> float:
    entry = _MODEL_TABLE.get(str(model), {}).get((group, subgroup))
    if entry is None:
        raise ParameterError(f"model {model!r} has no group {group}/{subgroup}")
    return theta1 if entry[2] == 1 else theta2


# ---------------------------------------------------------------------------
# Gaussian process sampling

def exponential_covariance(grid: Grid, theta: float, corr_range: float = 0.3) -> np.ndarray:
    pts = grid.points
    return theta * np.exp(-np.abs(pts[:, None] - pts[None, :]) / corr_range)


@lru_cache(maxsize=32)
def _cached_cholesky(n_grid: int, theta: float, corr_range: float) -> np.ndarray:
    return gp_cholesky(equispaced_grid(n_grid), theta, corr_range)


def gp_cholesky(grid: Grid, theta: float, corr_range: float = 0.3) -> np.ndarray:
    """Lower Cholesky factor of the covariance, with escalating jitter."""
    cov = exponential_covariance(grid, theta, corr_range)
    for decade in range(4):
        jitter = 0.0 if decade == 0 else 1e-10 * theta * 10 ** (decade - 1)
        try:
            return np.linalg.cholesky(cov + jitter * np.eye(grid.size))
        except np.linalg.LinAlgError:
            continue
    raise NumericalError("covariance not factorizable after jitter escalation")


def gp_sample(mean, theta: float, n: int, seed_or_rng, grid: Grid,
              corr_range: float = 0.3, chol: np.ndarray | None = None) -> FunctionalDataSet:
    """n curves = mean + L z with z standard gaussian; seed-deterministic."""
    if theta <= 0:
        raise ParameterError("theta must be positive")
    rng = np.random.default_rng(seed_or_rng) if not isinstance(
        seed_or_rng, np.random.Generator) else seed_or_rng
    if chol is None:
        chol = gp_cholesky(grid, theta, corr_range)
    mean = np.asarray(mean, dtype=float)
    z = rng.standard_normal((grid.size, n))
    return FunctionalDataSet(grid, mean[None, :] + (chol @ z).T)


# ---------------------------------------------------------------------------
# functional models

def _subgroup_counts(model: str, n_per_group: int, balanced: bool, rng) -> dict:
    """Curve counts per (group, subgroup) cell.

    ``balanced`` fixes equal subgroup counts (the training design for models
    3-4); otherwise mixture subgroups are drawn per curve with a fair coin.
    """
    cells = {}
    table = _MODEL_TABLE[model]
    groups = sorted({g for g, _ in table})
    for g in groups:
        subs = sorted(s for gg, s in table if gg == g)
        if len(subs) == 1:
            cells[(g, 0)] = n_per_group
        elif balanced:
            base = n_per_group // len(subs)
            for s in subs:
                cells[(g, s)] = base + (1 if s < n_per_group % len(subs) else 0)
        else:
            coin = rng.random(n_per_group) < 0.5
            cells[(g, 0)] = int(np.sum(~coin))
            cells[(g, 1)] = int(np.sum(coin))
    return cells


def simulate_curves(cfg: SimConfig, n_per_group: int, rng,
                    balanced_subgroups: bool) -> LabeledFunctionalData:
    """Draw one labeled sample of the configured functional model."""
    model = cfg.model
    grid = cfg.grid
    t = grid.points
    cells = _subgroup_counts(model, n_per_group, balanced_subgroups, rng)
    values = []
    labels = []
    for (g, s) in sorted(cells):
        count = cells[(g, s)]
        if count == 0:
            continue
        theta = model_theta(model, g, s, cfg.theta1, cfg.theta2)
        chol = _cached_cholesky(cfg.n_grid, theta, cfg.corr_range)
        mean = model_mean(model, g, s, t, cfg.k)
        ds = gp_sample(mean, theta, count, rng, grid, cfg.corr_range, chol)
        values.append(ds.values)
        labels.append(np.full(count, g))
    data = FunctionalDataSet(grid, np.vstack(values))
    return LabeledFunctionalData(
        MultiFunctionalDataSet((data,)), np.concatenate(labels)
    )


def simulate_model(cfg: SimConfig) -> LabeledFunctionalData:
    """Training sample with the published design: n per group for models 1-2,
    n per subgroup (balanced) for models 3-4."""
    rng = np.random.default_rng(cfg.seed)
    if cfg.model in ("3", "4"):
        per_group = cfg.n * (2 if cfg.model == "3" else 1)
        return simulate_curves(cfg, per_group, rng, balanced_subgroups=True)
    return simulate_curves(cfg, cfg.n, rng, balanced_subgroups=False)


DERIVATIVE_BASIS = 8


def with_derivative(labeled: LabeledFunctionalData,
                    basis_size: int = DERIVATIVE_BASIS) -> LabeledFunctionalData:
    """Append the spline first derivative as a second component (x0, x1).

    The simulated error process is rough (exponential covariance), so the
    derivative comes from a small smoothing B-spline basis; an interpolating
    spline would let the per-group noise scale dominate the derivative and
    make the classification problem artificially easy.
    """
    raw = labeled.data.components[0].with_name("x0")
    d1 = smoothed_derivative(raw, 1, basis_size).with_name("x1")
    return LabeledFunctionalData(MultiFunctionalDataSet((raw, d1)), labeled.labels)


# depth settings used for the published simulation tables: rank-based
# univariate depth inside FM, smooth random directions for RP
TABLE_FM_UNIVARIATE = "FMD"
TABLE_RP_SMOOTHNESS = 0.3


def table_spec(label: str, seed: int = 0) -> DepthSpec:
    """DepthSpec for one column of the simulation tables (e.g. "hM.w")."""
    spec = DepthSpec.parse_label(label, seed=seed)
    if spec.family == "FM":
        return replace(spec, univariate=TABLE_FM_UNIVARIATE)
    if spec.family == "RP":
        return replace(spec, direction_smoothness=TABLE_RP_SMOOTHNESS)
    return spec


# ---------------------------------------------------------------------------
# point-cloud examples

RING_INNER = 0.5
RING_OUTER = 0.6
BALL_CENTER = (-1.0, 0.0)
RING_CENTERS = ((-1.0, 0.0), (0.3, 0.0))


def _uniform_annulus(rng, n, center, r_inner, r_outer):
    u = rng.random(n)
    r = np.sqrt(r_inner**2 + u * (r_outer**2 - r_inner**2))
    angle = rng.uniform(0.0, 2.0 * np.pi, n)
    return np.column_stack([
        center[0] + r * np.cos(angle), center[1] + r * np.sin(angle)
    ])


def simulate_rings(n_ball: int, n_rings: int, seed_or_rng=0):
    """Gray class uniform on the unit disk at (-1, 0); black class uniform on
    two annuli of radii [0.5, 0.6] centered at (-1, 0) and (0.3, 0)."""
    if min(n_ball, n_rings) < 1:
        raise ParameterError("counts must be at least 1")
    rng = np.random.default_rng(seed_or_rng) if not isinstance(
        seed_or_rng, np.random.Generator) else seed_or_rng
    ball = _uniform_annulus(rng, n_ball, BALL_CENTER, 0.0, 1.0)
    which = rng.random(n_rings) < 0.5  # equal areas, equal mass
    rings = np.empty((n_rings, 2))
    for idx, center in enumerate(RING_CENTERS):
        sel = which == (idx == 1)
        rings[sel] = _uniform_annulus(rng, int(sel.sum()), center, RING_INNER, RING_OUTER)
    points = np.vstack([ball, rings])
    labels = np.concatenate([np.zeros(n_ball, int), np.ones(n_rings, int)])
    return points, labels


def in_rings(points: np.ndarray) -> np.ndarray:
    """Membership in either annulus (the optimal raw-space black region)."""
    points = np.atleast_2d(points)
    inside = np.zeros(points.shape[0], dtype=bool)
    for center in RING_CENTERS:
        d = np.hypot(points[:, 0] - center[0], points[:, 1] - center[1])
        inside |= (d >= RING_INNER) & (d <= RING_OUTER)
    return inside


def rings_rule_error_mc(n_samples: int = 1_000_000, seed: int = 0) -> float:
    """Monte Carlo error of the rule "inside a ring -> black" on the gray
    class, the only class it can misclassify."""
    rng = np.random.default_rng(seed)
    gray = _uniform_annulus(rng, n_samples, BALL_CENTER, 0.0, 1.0)
    return float(np.mean(in_rings(gray)))


def simulate_normals(variant: str, n: int, seed_or_rng=0):
    """Standard bivariate P plus a mean-shifted or covariance-scaled Q."""
    if variant not in ("mean-shift", "cov-scale"):
        raise ParameterError(f"unknown variant {variant!r}")
    if n < 1:
        raise ParameterError("n must be at least 1")
    rng = np.random.default_rng(seed_or_rng) if not isinstance(
        seed_or_rng, np.random.Generator) else seed_or_rng
    p = rng.standard_normal((n, 2))
    q = rng.standard_normal((n, 2))
    q = q + np.array([2.0, 2.0]) if variant == "mean-shift" else q * np.sqrt(2.0)
    points = np.vstack([p, q])
    labels = np.concatenate([np.zeros(n, int), np.ones(n, int)])
    return points, labels


def point_depth_features(points, labels, n_directions: int = 256,
                         seed: int = 0) -> DepthFeatureMatrix:
    """Approximate bivariate halfspace depth of every point with respect to
    each group sample; the DD-plot coordinates of a point cloud."""
    points = np.asarray(points, dtype=float)
    labels = np.asarray(labels, dtype=int)
    groups = np.unique(labels)
    cols = [
        halfspace_depth_2d(points, points[labels == g], n_directions, seed)
        for g in groups
    ]
    names = tuple(f"xy.HS.{g}" for g in groups)
    return DepthFeatureMatrix(np.column_stack(cols), names)


# ---------------------------------------------------------------------------
# Monte Carlo experiment harness

_DDK_KINDS = ("DD1", "DD2", "DD3", "MD")


@dataclass
class ExperimentResult:
    depth_labels: tuple
    classifier_kinds: tuple
    mean_error: np.ndarray      # (classifier, depth) rates in [0, 1]
    std_error: np.ndarray       # Monte Carlo standard errors of the means
    dcor_values: np.ndarray     # mean corrected dcor R(Y, d) per depth
    n_runs: int
    failures: np.ndarray        # failed (classifier, depth) run counts
    cell_seconds: np.ndarray    # total fit+predict time per cell

    def cell(self, depth_label: str, kind: str) -> float:
        i = self.classifier_kinds.index(kind)
        j = self.depth_labels.index(depth_label)
        return float(self.mean_error[i, j])

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([""] + list(self.depth_labels))
            writer.writerow(["dcor"] + [f"{v:.4f}" for v in self.dcor_values])
            for i, kind in enumerate(self.classifier_kinds):
                row = [kind]
                for j in range(len(self.depth_labels)):
                    v = self.mean_error[i, j]
                    row.append("" if np.isnan(v) else f"{100.0 * v:.2f}")
                writer.writerow(row)

    def se_to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow([""] + list(self.depth_labels))
            for i, kind in enumerate(self.classifier_kinds):
                row = [kind]
                for j in range(len(self.depth_labels)):
                    v = self.std_error[i, j]
                    row.append("" if np.isnan(v) else f"{100.0 * v:.3f}")
                writer.writerow(row)

    def write_log(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(f"runs = {self.n_runs}\n")
            for i, kind in enumerate(self.classifier_kinds):
                for j, depth in enumerate(self.depth_labels):
                    fh.write(
                        f"cell {depth} / {kind}: "
                        f"{self.cell_seconds[i, j]:.2f}s total, "
                        f"{int(self.failures[i, j])} failed runs\n"
                    )


def _derived_seed(*parts) -> int:
    return int(np.random.SeedSequence(tuple(int(p) for p in parts)).generate_state(1)[0])


def _test_sample(cfg: SimConfig, test_n: int, rng) -> LabeledFunctionalData:
    # models 3-4 keep the balanced-subgroup convention in the test sets
    balanced = cfg.model in ("3", "4")
    return simulate_curves(cfg, test_n, rng, balanced_subgroups=balanced)


def run_single(run_index: int, cfg: SimConfig, specs, classifier_kinds,
               test_n: int, master_seed: int, ddk_candidates: int = 10000,
               ddk_refine: int = 1):
    """One Monte Carlo run; returns ((kind, depth) -> error, depth -> dcor,
    (kind, depth) -> seconds)."""
    rng_train = np.random.default_rng([master_seed, run_index, 0])
    rng_test = np.random.default_rng([master_seed, run_index, 1])
    train = with_derivative(simulate_curves(
        cfg, cfg.n * (2 if cfg.model == "3" else 1), rng_train,
        balanced_subgroups=cfg.model in ("3", "4")))
    test = with_derivative(_test_sample(cfg, test_n, rng_test))
    return evaluate_cells(train, test, specs, classifier_kinds,
                          master_seed, run_index, ddk_candidates, ddk_refine)


def evaluate_cells(train: LabeledFunctionalData, test: LabeledFunctionalData,
                   specs, classifier_kinds, master_seed: int, run_index: int,
                   ddk_candidates: int = 10000, ddk_refine: int = 1):
    """Fit every (depth, classifier) cell on one train/test pair."""
    errors = {}
    dcors = {}
    seconds = {}
    label_dm = distance_matrix(train.labels, labels=True)
    for spec_idx, spec in enumerate(specs):
        spec_run = replace(spec, seed=_derived_seed(master_seed, run_index, 2, spec_idx))
        try:
            transform, feats_train = DDGTransform.fit(train, [spec_run])
            feats_test = transform.transform(test.data)
        except (FitError, ValueError, NumericalError, np.linalg.LinAlgError):
            dcors[spec.label] = np.nan
            for kind in classifier_kinds:
                errors[(kind, spec.label)] = np.nan
            continue
        dcors[spec.label] = dcor(
            distance_matrix(feats_train.values), label_dm, corrected=True
        )
        feats_train, feats_test = drop_constant_columns(feats_train, [feats_test])
        for kind_idx, kind in enumerate(classifier_kinds):
            if kind in _DDK_KINDS and spec.combination == "m":
                continue  # polynomial rules need one depth column per group
            t0 = time.perf_counter()
            try:
                model = make_classifier(
                    kind,
                    seed=_derived_seed(master_seed, run_index, 3, spec_idx, kind_idx),
                    n_candidates=ddk_candidates,
                    n_refine=ddk_refine,
                )
                model.fit(feats_train, train.labels)
                pred = model.predict(feats_test)
                errors[(kind, spec.label)] = evaluate(pred, test.labels).rate
            except (FitError, np.linalg.LinAlgError):
                errors[(kind, spec.label)] = np.nan
            seconds[(kind, spec.label)] = time.perf_counter() - t0
    return errors, dcors, seconds


def _run_star(args):
    return run_single(*args)


def split_single(run_index: int, data: LabeledFunctionalData, specs,
                 classifier_kinds, test_n: int, master_seed: int,
                 ddk_candidates: int = 10000, ddk_refine: int = 1):
    """One stratified random train/test split of a fixed dataset."""
    rng = np.random.default_rng([master_seed, run_index, 4])
    labels = data.labels
    test_idx = []
    for g in range(data.n_groups):
        members = np.flatnonzero(labels == g)
        if members.size <= test_n:
            raise ParameterError(
                f"group {g} has {members.size} curves, cannot hold out {test_n}"
            )
        test_idx.append(rng.choice(members, size=test_n, replace=False))
    test_mask = np.zeros(labels.size, dtype=bool)
    test_mask[np.concatenate(test_idx)] = True
    train = LabeledFunctionalData(data.data.take(~test_mask), labels[~test_mask])
    test = LabeledFunctionalData(data.data.take(test_mask), labels[test_mask])
    return evaluate_cells(train, test, specs, classifier_kinds,
                          master_seed, run_index, ddk_candidates, ddk_refine)


def _split_star(args):
    return split_single(*args)


def _checkpoint_path(directory, run_index: int) -> str:
    return os.path.join(directory, f"run_{run_index:04d}.csv")


def _save_run(directory, run_index, errors, dcors, seconds) -> None:
    path = _checkpoint_path(directory, run_index)
    tmp = path + ".tmp"
    with open(tmp, "w", newline="") as fh:
        writer = csv.writer(fh)
        for (kind, depth), value in sorted(errors.items()):
            writer.writerow(["error", kind, depth, repr(value)])
        for depth, value in sorted(dcors.items()):
            writer.writerow(["dcor", "", depth, repr(value)])
        for (kind, depth), value in sorted(seconds.items()):
            writer.writerow(["seconds", kind, depth, repr(value)])
    os.replace(tmp, path)


def _load_run(directory, run_index):
    path = _checkpoint_path(directory, run_index)
    if not os.path.exists(path):
        return None
    errors, dcors, seconds = {}, {}, {}
    with open(path, newline="") as fh:
        for record, kind, depth, value in csv.reader(fh):
            value = float(value)
            if record == "error":
                errors[(kind, depth)] = value
            elif record == "dcor":
                dcors[depth] = value
            else:
                seconds[(kind, depth)] = value
    return errors, dcors, seconds


def run_experiment(source, specs, classifier_kinds, runs: int,
                   test_n: int = 50, seed: int | None = None,
                   checkpoint_dir=None, n_workers: int | None = None,
                   ddk_candidates: int = 10000, ddk_refine: int = 1) -> ExperimentResult:
    """Monte Carlo table: mean test misclassification per (depth, classifier)
    cell plus standard errors and the dcor first row.

    ``source`` is a :class:`SimConfig` (fresh train/test samples per run) or
    a :class:`LabeledFunctionalData` (stratified random splits holding out
    ``test_n`` curves per group).  Every run works on a stream derived from
    (seed, run index), so results do not depend on worker count or on the
    order in which cells are evaluated.
    """
    if runs < 1:
        raise ParameterError("need at least one run")
    specs = tuple(specs)
    classifier_kinds = tuple(classifier_kinds)
    simulated = isinstance(source, SimConfig)
    if seed is None:
        if not simulated:
            raise ParameterError("split experiments need an explicit seed")
        master_seed = source.seed
    else:
        master_seed = seed
    if checkpoint_dir:
        os.makedirs(checkpoint_dir, exist_ok=True)

    per_run = {}
    pending = []
    for r in range(runs):
        loaded = _load_run(checkpoint_dir, r) if checkpoint_dir else None
        if loaded is not None:
            per_run[r] = loaded
        else:
            pending.append(r)

    args = [
        (r, source, specs, classifier_kinds, test_n, master_seed,
         ddk_candidates, ddk_refine)
        for r in pending
    ]
    runner = _run_star if simulated else _split_star
    single = run_single if simulated else split_single
    n_workers = n_workers if n_workers is not None else worker_count()
    if n_workers > 1 and len(args) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(runner, args, chunksize=1))
    else:
        results = [single(*a) for a in args]
    for r, res in zip(pending, results):
        per_run[r] = res
        if checkpoint_dir:
            _save_run(checkpoint_dir, r, *res)

    depth_labels = tuple(s.label for s in specs)
    shape = (len(classifier_kinds), len(depth_labels))
    sums = np.zeros(shape)
    sums_sq = np.zeros(shape)
    counts = np.zeros(shape, dtype=int)
    failures = np.zeros(shape, dtype=int)
    seconds_total = np.zeros(shape)
    dcor_sums = np.zeros(len(depth_labels))
    dcor_counts = np.zeros(len(depth_labels), dtype=int)
    for r in range(runs):
        errors, dcors, seconds = per_run[r]
        for i, kind in enumerate(classifier_kinds):
            for j, depth in enumerate(depth_labels):
                if (kind, depth) not in errors:
                    continue
                v = errors[(kind, depth)]
                seconds_total[i, j] += seconds.get((kind, depth), 0.0)
                if np.isnan(v):
                    failures[i, j] += 1
                else:
                    sums[i, j] += v
                    sums_sq[i, j] += v * v
                    counts[i, j] += 1
        for j, depth in enumerate(depth_labels):
            v = dcors.get(depth, np.nan)
            if not np.isnan(v):
                dcor_sums[j] += v
                dcor_counts[j] += 1

    with np.errstate(invalid="ignore", divide="ignore"):
        mean = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
        var = np.where(
            counts > 1,
            (sums_sq - counts * mean**2) / np.maximum(counts - 1, 1),
            np.nan,
        )
        se = np.sqrt(np.maximum(var, 0.0) / np.maximum(counts, 1))
    never_run = counts + failures == 0
    mean[never_run] = np.nan
    se[never_run] = np.nan
    with np.errstate(invalid="ignore", divide="ignore"):
        dcor_mean = np.where(dcor_counts > 0, dcor_sums / np.maximum(dcor_counts, 1), np.nan)
    return ExperimentResult(
        depth_labels, classifier_kinds, mean, se, dcor_mean, runs,
        failures, seconds_total,
    )
