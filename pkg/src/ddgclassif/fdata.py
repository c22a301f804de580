"""Functional data containers, grid arithmetic, splines and metrics.

Curves are stored as rows of an N x T value matrix over a shared grid.
Missing values are tracked in an explicit boolean mask (True = missing);
values are never encoded through sentinel numbers.  All containers are
immutable after construction, so they can be shared freely across threads.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import BSpline, CubicSpline

from .errors import (
    DimensionError,
    FormatError,
    ImputationError,
    ParameterError,
)


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Grid:
    """Strictly increasing abscissae t_1 < ... < t_T."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise DimensionError("grid needs at least 2 one-dimensional points")
        if not np.all(np.isfinite(pts)):
            raise FormatError("grid contains non-finite values")
        if np.any(np.diff(pts) <= 0):
            raise FormatError("grid points must be strictly increasing")
        object.__setattr__(self, "points", _readonly(pts))

    @property
    def size(self) -> int:
        return self.points.size

    @property
    def trapezoid_weights(self) -> np.ndarray:
        """Quadrature weights w with sum(w * y) = trapezoid integral of y."""
        pts = self.points
        w = np.empty_like(pts)
        w[0] = (pts[1] - pts[0]) / 2.0
        w[-1] = (pts[-1] - pts[-2]) / 2.0
        w[1:-1] = (pts[2:] - pts[:-2]) / 2.0
        return w

    def __eq__(self, other):
        return isinstance(other, Grid) and np.array_equal(self.points, other.points)


def equispaced_grid(n_points: int = 51, start: float = 0.0, stop: float = 1.0) -> Grid:
    return Grid(np.linspace(start, stop, n_points))


@dataclass(frozen=True)
class FunctionalDataSet:
    """N curves sampled on a common grid.

    ``mask`` marks missing entries (True = missing); ``None`` means fully
    observed.  ``name`` identifies the component in feature column names.
    """

    grid: Grid
    values: np.ndarray
    mask: np.ndarray | None = None
    name: str = "x"

    def __post_init__(self):
        vals = np.atleast_2d(np.asarray(self.values, dtype=float))
        if vals.shape[1] != self.grid.size:
            raise DimensionError(
                f"values have {vals.shape[1]} columns, grid has {self.grid.size} points"
            )
        object.__setattr__(self, "values", _readonly(vals))
        if self.mask is not None:
            m = np.atleast_2d(np.asarray(self.mask, dtype=bool))
            if m.shape != vals.shape:
                raise DimensionError("mask shape differs from values shape")
            if not m.any():
                m = None
            else:
                m = _readonly(m)
            object.__setattr__(self, "mask", m)

    @property
    def n_curves(self) -> int:
        return self.values.shape[0]

    @property
    def is_complete(self) -> bool:
        return self.mask is None

    def with_name(self, name: str) -> "FunctionalDataSet":
        return replace(self, name=name)


@dataclass(frozen=True)
class MultiFunctionalDataSet:
    """Ordered components sharing the sample dimension (grids may differ)."""

    components: tuple[FunctionalDataSet, ...]

    def __post_init__(self):
        comps = tuple(self.components)
        if not comps:
            raise DimensionError("need at least one component")
        n = comps[0].n_curves
        if any(c.n_curves != n for c in comps):
            raise DimensionError("components must share the number of curves")
        object.__setattr__(self, "components", comps)

    @property
    def n_curves(self) -> int:
        return self.components[0].n_curves

    @property
    def n_components(self) -> int:
        return len(self.components)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(c.name for c in self.components)

    def take(self, indices) -> "MultiFunctionalDataSet":
        return MultiFunctionalDataSet(
            tuple(replace(c, values=c.values[indices]) for c in self.components)
        )


def as_multi(data) -> MultiFunctionalDataSet:
    if isinstance(data, MultiFunctionalDataSet):
        return data
    return MultiFunctionalDataSet((data,))


@dataclass(frozen=True)
class LabeledFunctionalData:
    """Functional sample together with integer group ids in {0, ..., g-1}."""

    data: MultiFunctionalDataSet
    labels: np.ndarray

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=int)
        if labels.ndim != 1 or labels.size != self.data.n_curves:
            raise DimensionError("labels must be one per curve")
        g = labels.max() + 1 if labels.size else 0
        if labels.size and (labels.min() < 0 or len(np.unique(labels)) != g):
            raise ParameterError("labels must cover 0..g-1 with every group present")
        object.__setattr__(self, "labels", _readonly(labels))

    @property
    def n_groups(self) -> int:
        return int(self.labels.max()) + 1

    def group(self, j: int) -> MultiFunctionalDataSet:
        return self.data.take(self.labels == j)


# ---------------------------------------------------------------------------
# quadrature and metrics

def trapezoid_integral(y, grid: Grid) -> float:
    """Composite trapezoid integral of sampled values over the grid."""
    y = np.asarray(y, dtype=float)
    if y.shape[-1] != grid.size:
        raise DimensionError("sequence length differs from grid size")
    return np.trapezoid(y, grid.points, axis=-1)


def l2_metric(a, b, grid: Grid) -> float:
    """L2 distance sqrt(integral (a-b)^2) by the trapezoid rule."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.shape[-1] != grid.size:
        raise DimensionError("curve rows must both match the grid length")
    return float(np.sqrt(trapezoid_integral((a - b) ** 2, grid)))


def l2_distance_matrix(a: np.ndarray, b: np.ndarray, grid: Grid) -> np.ndarray:
    """All pairwise L2 distances between rows of a (n x T) and b (m x T).

    Expands the squared trapezoid integral through the weighted Gram matrix,
    which is exact for this quadrature rule.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[1] != grid.size or b.shape[1] != grid.size:
        raise DimensionError("rows must match the grid length")
    w = grid.trapezoid_weights
    aw = a * w
    sq_a = np.sum(aw * a, axis=1)
    sq_b = np.sum(b * w * b, axis=1)
    d2 = sq_a[:, None] + sq_b[None, :] - 2.0 * aw @ b.T
    np.maximum(d2, 0.0, out=d2)
    return np.sqrt(d2)


def product_distance_matrix(
    target: MultiFunctionalDataSet, reference: MultiFunctionalDataSet
) -> np.ndarray:
    """Euclidean combination sqrt(sum_j d_j^2) of per-component L2 distances."""
    if target.n_components != reference.n_components:
        raise DimensionError("component counts differ")
    d2 = None
    for tc, rc in zip(target.components, reference.components):
        d = l2_distance_matrix(tc.values, rc.values, tc.grid)
        d2 = d**2 if d2 is None else d2 + d**2
    return np.sqrt(d2)


# ---------------------------------------------------------------------------
# splines

def _bspline_design(grid_points: np.ndarray, x: np.ndarray, n_basis: int) -> np.ndarray:
    """Design matrix of a clamped cubic B-spline basis with n_basis elements."""
    lo, hi = grid_points[0], grid_points[-1]
    inner = np.linspace(lo, hi, n_basis - 2)[1:-1]
    knots = np.concatenate([[lo] * 4, inner, [hi] * 4])
    return BSpline.design_matrix(x, knots, 3).toarray()


def impute_missing(ds: FunctionalDataSet, basis_size: int = 21) -> FunctionalDataSet:
    """Fill missing entries with a per-curve least-squares B-spline fit.

    Observed entries are kept verbatim.  A curve with fewer observed points
    than ``basis_size`` gets a basis shrunk to ``n_observed - 1`` (at least 4);
    fewer than 4 observed points is an error.
    """
    if basis_size < 4:
        raise ParameterError("basis_size must be at least 4")
    if ds.is_complete:
        return ds
    pts = ds.grid.points
    values = np.array(ds.values)
    for i in range(ds.n_curves):
        missing = ds.mask[i]
        if not missing.any():
            continue
        obs = ~missing
        n_obs = int(obs.sum())
        if n_obs < 4:
            raise ImputationError(
                f"curve {i} has only {n_obs} observed points (minimum is 4)"
            )
        n_basis = min(basis_size, n_obs - 1)
        if n_basis < basis_size:
            n_basis = max(n_basis, 4)
            warnings.warn(
                f"curve {i}: basis truncated from {basis_size} to {n_basis} "
                f"({n_obs} observed points)",
                stacklevel=2,
            )
        design = _bspline_design(pts, pts, n_basis)
        coef, *_ = np.linalg.lstsq(design[obs], values[i, obs], rcond=None)
        values[i, missing] = design[missing] @ coef
    return FunctionalDataSet(ds.grid, values, mask=None, name=ds.name)


def derivative(ds: FunctionalDataSet, order: int = 1) -> FunctionalDataSet:
    """Spline derivative of every curve, evaluated on the same grid.

    Fits an interpolating cubic spline with not-a-knot ends per curve and
    differentiates it analytically.  Interpolation amplifies high-frequency
    noise; for rough curves see :func:`smoothed_derivative`.
    """
    if order not in (1, 2):
        raise ParameterError(f"unsupported derivative order {order}")
    if ds.grid.size < 5:
        raise DimensionError("derivative needs a grid of at least 5 points")
    if not ds.is_complete:
        raise ImputationError("impute missing values before differentiating")
    spline = CubicSpline(ds.grid.points, ds.values.T, axis=0, bc_type="not-a-knot")
    deriv = spline.derivative(order)(ds.grid.points).T
    return FunctionalDataSet(ds.grid, deriv, name=ds.name)


def smoothed_derivative(ds: FunctionalDataSet, order: int = 1,
                        basis_size: int = 8) -> FunctionalDataSet:
    """Derivative of a least-squares B-spline smooth of every curve.

    Projects each curve onto a small cubic B-spline basis before
    differentiating, which keeps the derivative of noisy curves at the
    scale of the underlying trend.
    """
    if order not in (1, 2):
        raise ParameterError(f"unsupported derivative order {order}")
    if basis_size < 4:
        raise ParameterError("basis_size must be at least 4")
    if not ds.is_complete:
        raise ImputationError("impute missing values before differentiating")
    pts = ds.grid.points
    lo, hi = pts[0], pts[-1]
    inner = np.linspace(lo, hi, basis_size - 2)[1:-1]
    knots = np.concatenate([[lo] * 4, inner, [hi] * 4])
    design = BSpline.design_matrix(pts, knots, 3).toarray()
    coef, *_ = np.linalg.lstsq(design, ds.values.T, rcond=None)
    deriv_design = np.column_stack([
        BSpline(knots, np.eye(basis_size)[j], 3).derivative(order)(pts)
        for j in range(basis_size)
    ])
    return FunctionalDataSet(ds.grid, (deriv_design @ coef).T, name=ds.name)


# ---------------------------------------------------------------------------
# CSV I/O

def _parse_cell(cell: str, row: int, col: int) -> float:
    try:
        return float(cell)
    except ValueError:
        raise FormatError(f"malformed numeric cell at row {row}, column {col}: {cell!r}")


def load_csv(path, layout: str = "wide", name: str = "x") -> FunctionalDataSet:
    """Read a functional dataset from CSV.

    Wide layout: line 1 holds the grid points, each further line one curve;
    an empty field marks a missing value.  Long layout: header ``id,t,value``
    with one observation per line; (id, t) pairs absent from a curve are
    missing.
    """
    if layout == "wide":
        return _load_wide(path, name)
    if layout == "long":
        return _load_long(path, name)
    raise ParameterError(f"unknown layout {layout!r}")


def _load_wide(path, name: str) -> FunctionalDataSet:
    with open(path, newline="") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if len(rows) < 2:
        raise FormatError("wide CSV needs a grid line and at least one curve")
    header = [_parse_cell(c, 0, j) for j, c in enumerate(rows[0])]
    grid_pts = np.asarray(header)
    if np.any(np.diff(grid_pts) <= 0):
        raise FormatError("grid line is not strictly increasing")
    n_t = len(header)
    values = np.zeros((len(rows) - 1, n_t))
    mask = np.zeros_like(values, dtype=bool)
    for i, row in enumerate(rows[1:], start=1):
        if len(row) != n_t:
            raise FormatError(f"row {i} has {len(row)} fields, expected {n_t}")
        for j, cell in enumerate(row):
            if cell.strip() == "":
                mask[i - 1, j] = True
            else:
                values[i - 1, j] = _parse_cell(cell, i, j)
    return FunctionalDataSet(Grid(grid_pts), values, mask=mask, name=name)


def _load_long(path, name: str) -> FunctionalDataSet:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip().lower() for h in header] != ["id", "t", "value"]:
            raise FormatError('long CSV needs the header "id,t,value"')
        triples = []
        for i, row in enumerate(reader, start=1):
            if not row:
                continue
            if len(row) != 3:
                raise FormatError(f"row {i} has {len(row)} fields, expected 3")
            curve = row[0].strip()
            t = _parse_cell(row[1], i, 1)
            value = None if row[2].strip() == "" else _parse_cell(row[2], i, 2)
            triples.append((curve, t, value))
    if not triples:
        raise FormatError("long CSV holds no observations")
    curve_ids = sorted({c for c, _, _ in triples})
    grid_pts = np.array(sorted({t for _, t, _ in triples}))
    col = {t: j for j, t in enumerate(grid_pts)}
    row_of = {c: i for i, c in enumerate(curve_ids)}
    values = np.zeros((len(curve_ids), grid_pts.size))
    mask = np.ones_like(values, dtype=bool)
    for c, t, v in triples:
        if v is not None:
            values[row_of[c], col[t]] = v
            mask[row_of[c], col[t]] = False
    return FunctionalDataSet(Grid(grid_pts), values, mask=mask, name=name)


def format_float(v: float) -> str:
    """Decimal text with 12 significant digits, the package-wide convention."""
    return format(float(v), ".12g")


def save_csv(ds: FunctionalDataSet, path) -> None:
    """Write the canonical wide layout; missing entries become empty fields."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(format_float(t) for t in ds.grid.points)
        for i in range(ds.n_curves):
            row = [format_float(v) for v in ds.values[i]]
            if ds.mask is not None:
                row = ["" if ds.mask[i, j] else cell for j, cell in enumerate(row)]
            writer.writerow(row)
