"""Functional data depths: integrated (FM), h-mode (hM) and random
projection (RP) families, univariate building blocks, and the combination
modes for multivariate functional data.

A :class:`DepthSpec` declares one depth feature; :class:`DepthModel` is the
fitted, immutable reference (one group's curves plus frozen hyperparameters)
that scores new curves.  Scoring is a pure function of the frozen state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import (
    CommonSupportError,
    DegenerateSampleError,
    DegenerateScaleError,
    DimensionError,
    ParameterError,
)
from .fdata import (
    FunctionalDataSet,
    MultiFunctionalDataSet,
    l2_distance_matrix,
    product_distance_matrix,
)

UNIVARIATE_KINDS = ("HS", "FMD", "SD", "MhD")
COMBINATION_MODES = ("w", "p", "m")
_SQRT_2PI = math.sqrt(2.0 * math.pi)


# ---------------------------------------------------------------------------
# univariate depths

def _ecdf_pair(sample: np.ndarray, x: np.ndarray):
    """(F(x), F(x-)) of the empirical cdf; F counts <=, F(x-) counts <."""
    s = np.sort(np.asarray(sample, dtype=float))
    n = s.size
    f = np.searchsorted(s, x, side="right") / n
    f_minus = np.searchsorted(s, x, side="left") / n
    return f, f_minus


def univariate_depth_batch(kind: str, x, sample) -> np.ndarray:
    """Depth of each value in ``x`` within the one-dimensional ``sample``."""
    x = np.asarray(x, dtype=float)
    sample = np.asarray(sample, dtype=float)
    if sample.size == 0:
        raise ParameterError("sample must be nonempty")
    if kind == "MhD":
        mu = sample.mean()
        var = sample.var(ddof=1) if sample.size > 1 else 0.0
        if var == 0.0:
            if np.all(x == mu):
                return np.ones_like(x)
            raise DegenerateScaleError("zero variance in MhD reference sample")
        return 1.0 / (1.0 + (x - mu) ** 2 / var)
    f, f_minus = _ecdf_pair(sample, x)
    if kind == "HS":
        return np.minimum(f, 1.0 - f)
    if kind == "FMD":
        return 1.0 - np.abs(0.5 - f)
    if kind == "SD":
        return 2.0 * f * (1.0 - f_minus)
    raise ParameterError(f"unknown univariate depth kind {kind!r}")


def univariate_depth(kind: str, x: float, sample) -> float:
    """Scalar convenience wrapper around :func:`univariate_depth_batch`."""
    return float(univariate_depth_batch(kind, np.asarray([x], dtype=float), sample)[0])


def mahalanobis_depth(points: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """p-variate Mahalanobis depth [1 + (v-mu)' S^-1 (v-mu)]^-1.

    S is the (N-1)-denominator sample covariance of the reference rows,
    ridge-regularized by 1e-8 * trace(S)/p when singular.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    reference = np.atleast_2d(np.asarray(reference, dtype=float))
    p = reference.shape[1]
    mu = reference.mean(axis=0)
    if reference.shape[0] > 1:
        cov = np.cov(reference, rowvar=False, ddof=1).reshape(p, p)
    else:
        cov = np.zeros((p, p))
    try:
        factor = cho_factor(cov, lower=True)
    except np.linalg.LinAlgError:
        factor = None
    except ValueError:
        factor = None
    if factor is None:
        tr = np.trace(cov)
        ridge = 1e-8 * tr / p if tr > 0 else 1.0
        try:
            factor = cho_factor(cov + ridge * np.eye(p), lower=True)
        except (np.linalg.LinAlgError, ValueError):
            raise DegenerateScaleError("reference covariance is not factorizable")
    centered = points - mu
    solved = cho_solve(factor, centered.T)
    q = np.maximum(np.sum(centered.T * solved, axis=0), 0.0)
    return 1.0 / (1.0 + q)


# ---------------------------------------------------------------------------
# FM (integrated) depth

def fm_depth(
    target: FunctionalDataSet,
    reference: FunctionalDataSet,
    kind: str = "MhD",
) -> np.ndarray:
    """Integrated depth: trapezoid integral over t of the univariate depth
    of x_i(t) within the reference cross-section."""
    if target.grid != reference.grid:
        raise DimensionError("target and reference must share one grid")
    w = target.grid.trapezoid_weights
    out = np.zeros(target.n_curves)
    for t in range(target.grid.size):
        out += w[t] * univariate_depth_batch(kind, target.values[:, t], reference.values[:, t])
    return out


def _common_grid(data: MultiFunctionalDataSet):
    grid = data.components[0].grid
    if any(c.grid != grid for c in data.components[1:]):
        raise CommonSupportError("all components must share one common grid")
    return grid


def fm_depth_pvariate(
    target: MultiFunctionalDataSet, reference: MultiFunctionalDataSet
) -> np.ndarray:
    """Integrated p-variate Mahalanobis depth of the component vectors
    (x_i^1(t), ..., x_i^p(t)) against the reference cross-sections."""
    if target.n_components != reference.n_components:
        raise DimensionError("component counts differ")
    if target.n_components < 2:
        raise ParameterError("p-variate depth needs at least 2 components")
    grid = _common_grid(reference)
    if _common_grid(target) != grid:
        raise CommonSupportError("target components must live on the reference grid")
    w = grid.trapezoid_weights
    tgt = np.stack([c.values for c in target.components], axis=2)
    ref = np.stack([c.values for c in reference.components], axis=2)
    out = np.zeros(target.n_curves)
    for t in range(grid.size):
        out += w[t] * mahalanobis_depth(tgt[:, t, :], ref[:, t, :])
    return out


# ---------------------------------------------------------------------------
# h-mode depth

def gaussian_kernel(u: np.ndarray) -> np.ndarray:
    """Standard gaussian density, the fixed h-mode kernel."""
    u = np.asarray(u, dtype=float)
    return np.exp(-0.5 * u * u) / _SQRT_2PI


def hm_scores(distances: np.ndarray, h: float) -> np.ndarray:
    """Mean kernel weight N^-1 sum_i K(d_i / h) along the last axis."""
    if h <= 0:
        raise ParameterError("bandwidth must be positive")
    return gaussian_kernel(np.asarray(distances, dtype=float) / h).mean(axis=-1)


def fit_hm_bandwidth(
    reference: MultiFunctionalDataSet,
    quantile: float = 0.15,
    component: int | None = None,
) -> float:
    """Bandwidth = empirical quantile of the N(N-1)/2 pairwise distances.

    ``component`` selects a single component's L2 metric; ``None`` uses the
    Euclidean product metric over all components.
    """
    if not 0.0 < quantile < 1.0:
        raise ParameterError("quantile must lie strictly in (0, 1)")
    if reference.n_curves < 2:
        raise DegenerateSampleError("need at least 2 reference curves")
    if component is None:
        d = product_distance_matrix(reference, reference)
    else:
        comp = reference.components[component]
        d = l2_distance_matrix(comp.values, comp.values, comp.grid)
    iu = np.triu_indices(d.shape[0], k=1)
    condensed = d[iu]
    if not np.any(condensed > 0):
        raise DegenerateSampleError("all pairwise distances are zero")
    return float(np.quantile(condensed, quantile))


# ---------------------------------------------------------------------------
# random projections

def rp_directions(grids, n_projections: int, seed: int,
                  smoothness: float | None = None) -> tuple[np.ndarray, ...]:
    """Per-component direction bundles, normalized to unit L2 norm under the
    trapezoid weights.

    ``smoothness=None`` draws independent gaussian coefficients at the grid
    nodes; a positive value correlates them through an exponential covariance
    exp(-|s-t|/smoothness), giving smooth random curves as directions.
    """
    if n_projections < 1:
        raise ParameterError("need at least one projection")
    if smoothness is not None and smoothness <= 0:
        raise ParameterError("direction smoothness must be positive")
    rng = np.random.default_rng(seed)
    out = []
    for grid in grids:
        a = rng.standard_normal((n_projections, grid.size))
        if smoothness is not None:
            pts = grid.points
            cov = np.exp(-np.abs(pts[:, None] - pts[None, :]) / smoothness)
            chol = np.linalg.cholesky(cov + 1e-10 * np.eye(grid.size))
            a = a @ chol.T
        w = grid.trapezoid_weights
        norms = np.sqrt(np.sum(a * w * a, axis=1))
        out.append(a / norms[:, None])
    return tuple(out)


def rp_project(values: np.ndarray, directions: np.ndarray, grid) -> np.ndarray:
    """Trapezoid-weighted inner products <a_r, x_i>; shape (n, R)."""
    return (values * grid.trapezoid_weights) @ directions.T


# ---------------------------------------------------------------------------
# combination helpers

def combine_weighted(depth_columns, weights) -> np.ndarray:
    """Elementwise sum_j w_j * depth_j over per-component depth sequences."""
    weights = np.asarray(weights, dtype=float)
    if np.any(weights < 0):
        raise ParameterError("weights must be nonnegative")
    if abs(weights.sum() - 1.0) > 1e-12:
        raise ParameterError("weights must sum to 1")
    columns = [np.asarray(c, dtype=float) for c in depth_columns]
    if len(columns) != weights.size or len({c.shape for c in columns}) != 1:
        raise DimensionError("one equally-long depth sequence per weight")
    return sum(w * c for w, c in zip(weights, columns))


# ---------------------------------------------------------------------------
# bivariate halfspace depth (for point-cloud DD-plots)

def halfspace_depth_2d(points, sample, n_directions: int = 256, seed: int = 0):
    """Approximate Tukey depth: minimum univariate HS depth of the projection
    over ``n_directions`` angles pi*r/R with a seeded in-cell jitter.

    The approximation never undershoots the exact depth on tie-free data and
    its error shrinks with the direction count.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    sample = np.atleast_2d(np.asarray(sample, dtype=float))
    if sample.shape[0] == 0:
        raise ParameterError("sample must be nonempty")
    if n_directions < 1:
        raise ParameterError("need at least one direction")
    rng = np.random.default_rng(seed)
    step = math.pi / n_directions
    angles = step * np.arange(n_directions) + rng.uniform(0.0, step, n_directions)
    dirs = np.column_stack([np.cos(angles), np.sin(angles)])
    sample_proj = sample @ dirs.T
    point_proj = pts @ dirs.T
    n = sample.shape[0]
    depth = np.full(pts.shape[0], np.inf)
    for r in range(n_directions):
        col = np.sort(sample_proj[:, r])
        f = np.searchsorted(col, point_proj[:, r], side="right") / n
        depth = np.minimum(depth, np.minimum(f, 1.0 - f))
    if np.asarray(points).ndim == 1:
        return float(depth[0])
    return depth


# ---------------------------------------------------------------------------
# declarative depth features

_FAMILY_LABELS = {"FM": "FM", "RP": "RP", "hM": "mode"}
_DEFAULT_UNIVARIATE = {"FM": "MhD", "RP": "HS"}


@dataclass(frozen=True)
class DepthSpec:
    """Declarative description of one depth feature.

    ``combination`` is a component index (the ``.0``/``.1``/``.2`` variants),
    ``"w"`` for a weighted sum of per-component depths, ``"p"`` for the joint
    p-variate depth on a common support, or ``"m"`` for one column per
    component.
    """

    family: str
    combination: int | str = 0
    univariate: str | None = None
    weights: tuple[float, ...] | None = None
    n_projections: int = 50
    h_quantile: float = 0.15
    seed: int = 0
    direction_smoothness: float | None = None

    def __post_init__(self):
        if self.family not in _FAMILY_LABELS:
            raise ParameterError(f"unknown depth family {self.family!r}")
        comb = self.combination
        if isinstance(comb, str):
            if comb.isdigit():
                object.__setattr__(self, "combination", int(comb))
            elif comb not in COMBINATION_MODES:
                raise ParameterError(f"unknown combination mode {comb!r}")
        elif not (isinstance(comb, (int, np.integer)) and comb >= 0):
            raise ParameterError("component index must be a nonnegative integer")
        if self.univariate is not None:
            if self.family == "hM":
                raise ParameterError("h-mode depth takes no univariate kind")
            if self.univariate not in UNIVARIATE_KINDS:
                raise ParameterError(f"unknown univariate depth {self.univariate!r}")
        if self.weights is not None:
            w = tuple(float(v) for v in self.weights)
            if any(v < 0 for v in w) or abs(sum(w) - 1.0) > 1e-12:
                raise ParameterError("weights must be nonnegative and sum to 1")
            object.__setattr__(self, "weights", w)
        if self.n_projections < 1:
            raise ParameterError("n_projections must be at least 1")
        if not 0.0 < self.h_quantile < 1.0:
            raise ParameterError("h_quantile must lie strictly in (0, 1)")
        if self.direction_smoothness is not None and self.direction_smoothness <= 0:
            raise ParameterError("direction_smoothness must be positive")

    @property
    def univariate_kind(self) -> str | None:
        if self.family == "hM":
            return None
        return self.univariate or _DEFAULT_UNIVARIATE[self.family]

    @property
    def label(self) -> str:
        return f"{self.family}.{self.combination}"

    @property
    def family_label(self) -> str:
        return _FAMILY_LABELS[self.family]

    def n_coords(self, n_components: int) -> int:
        return n_components if self.combination == "m" else 1

    def component_weights(self, n_components: int) -> np.ndarray:
        if self.weights is not None:
            if len(self.weights) != n_components:
                raise DimensionError("one weight per component required")
            return np.asarray(self.weights)
        return np.full(n_components, 1.0 / n_components)

    @classmethod
    def parse_label(cls, label: str, **kwargs) -> "DepthSpec":
        """Build a spec from the compact ``family.combination`` notation."""
        parts = label.split(".")
        if len(parts) != 2:
            raise ParameterError(f"malformed depth label {label!r}")
        return cls(family=parts[0], combination=parts[1], **kwargs)

    def to_config(self) -> dict:
        cfg = {"family": self.family, "combination": str(self.combination)}
        if self.univariate is not None:
            cfg["univariate"] = self.univariate
        if self.weights is not None:
            cfg["weights"] = ",".join(format(w, ".12g") for w in self.weights)
        cfg["n_projections"] = str(self.n_projections)
        cfg["h_quantile"] = format(self.h_quantile, ".12g")
        cfg["seed"] = str(self.seed)
        if self.direction_smoothness is not None:
            cfg["direction_smoothness"] = format(self.direction_smoothness, ".12g")
        return cfg

    @classmethod
    def from_config(cls, cfg: dict) -> "DepthSpec":
        weights = cfg.get("weights")
        smooth = cfg.get("direction_smoothness")
        return cls(
            family=cfg["family"],
            combination=cfg.get("combination", "0"),
            univariate=cfg.get("univariate"),
            weights=tuple(float(v) for v in weights.split(",")) if weights else None,
            n_projections=int(cfg.get("n_projections", 50)),
            h_quantile=float(cfg.get("h_quantile", 0.15)),
            seed=int(cfg.get("seed", 0)),
            direction_smoothness=float(smooth) if smooth else None,
        )


@dataclass(frozen=True)
class DepthModel:
    """One fitted depth feature: reference curves plus frozen hyperparameters.

    Immutable after fitting; the same input always yields the same scores.
    """

    spec: DepthSpec
    reference: MultiFunctionalDataSet
    bandwidths: tuple[float, ...] = field(default=())
    directions: tuple[np.ndarray, ...] = field(default=())

    @classmethod
    def fit(
        cls,
        spec: DepthSpec,
        reference: MultiFunctionalDataSet,
        bandwidths: tuple[float, ...] | None = None,
    ) -> "DepthModel":
        """Freeze everything scoring needs.

        ``bandwidths`` overrides the h-mode bandwidth estimation (used when
        reproducing a transform from a manifest).
        """
        p = reference.n_components
        comb = spec.combination
        if isinstance(comb, int) and comb >= p:
            raise DimensionError(
                f"spec {spec.label} needs component {comb}, data has {p}"
            )
        if comb == "p" and spec.family == "FM":
            _common_grid(reference)
        bw: tuple[float, ...] = ()
        dirs: tuple[np.ndarray, ...] = ()
        if spec.family == "hM":
            if bandwidths is not None:
                bw = tuple(float(b) for b in bandwidths)
            elif comb == "p":
                bw = (fit_hm_bandwidth(reference, spec.h_quantile, None),)
            elif isinstance(comb, int):
                bw = (fit_hm_bandwidth(reference, spec.h_quantile, comb),)
            else:
                bw = tuple(
                    fit_hm_bandwidth(reference, spec.h_quantile, c) for c in range(p)
                )
        elif spec.family == "RP":
            grids = [c.grid for c in reference.components]
            dirs = rp_directions(grids, spec.n_projections, spec.seed,
                                 spec.direction_smoothness)
        return cls(spec=spec, reference=reference, bandwidths=bw, directions=dirs)

    def _check_compatible(self, target: MultiFunctionalDataSet):
        if target.n_components != self.reference.n_components:
            raise DimensionError("component count differs from the fitted reference")
        for tc, rc in zip(target.components, self.reference.components):
            if tc.grid != rc.grid:
                raise DimensionError("target grids differ from the fitted reference")

    def score(self, target: MultiFunctionalDataSet) -> np.ndarray:
        """Depth of every target curve; shape (n, n_coords)."""
        self._check_compatible(target)
        spec = self.spec
        p = self.reference.n_components
        comb = spec.combination
        if target.n_curves == 0:
            return np.zeros((0, spec.n_coords(p)))
        if comb == "m":
            cols = [self._component_score(target, c) for c in range(p)]
            return np.column_stack(cols)
        if comb == "w":
            weights = spec.component_weights(p)
            cols = [self._component_score(target, c) for c in range(p)]
            return combine_weighted(cols, weights)[:, None]
        if comb == "p":
            return self._joint_score(target)[:, None]
        return self._component_score(target, comb)[:, None]

    def _component_score(self, target, c: int) -> np.ndarray:
        spec = self.spec
        tc = target.components[c]
        rc = self.reference.components[c]
        if spec.family == "FM":
            return fm_depth(tc, rc, spec.univariate_kind)
        if spec.family == "hM":
            h = self.bandwidths[0] if isinstance(spec.combination, int) else self.bandwidths[c]
            d = l2_distance_matrix(tc.values, rc.values, tc.grid)
            return hm_scores(d, h)
        proj_t = rp_project(tc.values, self.directions[c], tc.grid)
        proj_r = rp_project(rc.values, self.directions[c], rc.grid)
        out = np.zeros(target.n_curves)
        for r in range(spec.n_projections):
            out += univariate_depth_batch(spec.univariate_kind, proj_t[:, r], proj_r[:, r])
        return out / spec.n_projections

    def _joint_score(self, target) -> np.ndarray:
        spec = self.spec
        if spec.family == "FM":
            return fm_depth_pvariate(target, self.reference)
        if spec.family == "hM":
            d = product_distance_matrix(target, self.reference)
            return hm_scores(d, self.bandwidths[0])
        proj_t = [
            rp_project(tc.values, dirs, tc.grid)
            for tc, dirs in zip(target.components, self.directions)
        ]
        proj_r = [
            rp_project(rc.values, dirs, rc.grid)
            for rc, dirs in zip(self.reference.components, self.directions)
        ]
        out = np.zeros(target.n_curves)
        for r in range(spec.n_projections):
            t_vec = np.column_stack([pt[:, r] for pt in proj_t])
            r_vec = np.column_stack([pr[:, r] for pr in proj_r])
            out += mahalanobis_depth(t_vec, r_vec)
        return out / spec.n_projections
