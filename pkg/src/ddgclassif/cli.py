"""Command-line front end: simulation, experiments, dcor tables and DD-plots.

Exit codes: 0 success, 1 computation error, 2 usage or configuration error.
Every command is deterministic given its flags and seeds.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import os
import sys

import numpy as np

from . import sim
from .classifiers import CLASSIFIER_KINDS, make_classifier
from .ddg import DDGTransform, DepthFeatureMatrix
from .depths import DepthSpec, UNIVARIATE_KINDS
from .energy import dcor_flagged, distance_matrix, select_depths
from .errors import ParameterError
from .fdata import (
    LabeledFunctionalData,
    MultiFunctionalDataSet,
    format_float,
    load_csv,
    derivative,
    save_csv,
)


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# small CSV helpers

def write_labels_csv(labels, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["label"])
        for v in labels:
            writer.writerow([int(v)])


def read_labels_csv(path) -> np.ndarray:
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if not rows or rows[0] != ["label"]:
        raise ConfigError(f'{path}: expected a single "label" column')
    return np.array([int(r[0]) for r in rows[1:]], dtype=int)


def write_points_csv(points, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y"])
        for x, y in points:
            writer.writerow([format_float(x), format_float(y)])


# ---------------------------------------------------------------------------
# simulate

def cmd_simulate(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    if args.model in sim.POINT_MODELS:
        if args.model == "rings":
            points, labels = sim.simulate_rings(args.n_ball, args.n_rings, args.seed)
        else:
            variant = "mean-shift" if args.model == "normals-mean" else "cov-scale"
            points, labels = sim.simulate_normals(variant, args.n, args.seed)
        write_points_csv(points, os.path.join(args.out, "points.csv"))
        write_labels_csv(labels, os.path.join(args.out, "labels.csv"))
        print(f"wrote {points.shape[0]} labeled points to {args.out}")
        return 0
    cfg = sim.SimConfig(model=args.model, n=args.n, n_grid=args.grid_points,
                        k=args.k, seed=args.seed)
    train = sim.simulate_model(cfg)
    save_csv(train.data.components[0], os.path.join(args.out, "train.csv"))
    write_labels_csv(train.labels, os.path.join(args.out, "train_labels.csv"))
    print(f"train: {train.data.n_curves} curves, "
          f"{train.n_groups} groups, grid {cfg.n_grid}")
    if args.test_n:
        rng = np.random.default_rng([args.seed, 1])
        test = sim.simulate_curves(cfg, args.test_n, rng,
                                   balanced_subgroups=cfg.model in ("3", "4"))
        save_csv(test.data.components[0], os.path.join(args.out, "test.csv"))
        write_labels_csv(test.labels, os.path.join(args.out, "test_labels.csv"))
        print(f"test: {test.data.n_curves} curves")
    return 0


# ---------------------------------------------------------------------------
# experiment config

_SCHEMA = {
    "experiment": {"runs", "seed", "test_n", "output", "workers",
                   "ddk_candidates", "ddk_refine"},
    "data": {"source", "model", "n", "grid_points", "k", "theta1", "theta2",
             "corr_range", "components", "labels", "derivatives"},
    "depths": {"specs", "fm_univariate", "rp_univariate", "n_projections",
               "h_quantile", "seed"},
    "classifiers": {"kinds", "knn_k", "np_bandwidth", "gam_basis", "gam_penalty"},
}


def _load_config(path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    read = parser.read(path)
    if not read:
        raise ConfigError(f"cannot read config file {path}")
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown config section [{section}]")
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
    for required in ("experiment", "data", "depths", "classifiers"):
        if required not in parser:
            raise ConfigError(f"missing config section [{required}]")
    return parser


def _parse_specs(cfg: configparser.SectionProxy) -> list[DepthSpec]:
    raw = cfg.get("specs", "").replace(",", " ").split()
    if not raw:
        raise ConfigError("[depths] needs a nonempty 'specs' list")
    common = {
        "n_projections": cfg.getint("n_projections", 50),
        "h_quantile": cfg.getfloat("h_quantile", 0.15),
        "seed": cfg.getint("seed", 0),
    }
    fm_uni = cfg.get("fm_univariate", None)
    rp_uni = cfg.get("rp_univariate", None)
    for uni in (fm_uni, rp_uni):
        if uni is not None and uni not in UNIVARIATE_KINDS:
            raise ConfigError(f"unknown univariate depth {uni!r}")
    specs = []
    for label in raw:
        spec = DepthSpec.parse_label(label, **common)
        if spec.family == "FM" and fm_uni:
            spec = DepthSpec.parse_label(label, univariate=fm_uni, **common)
        if spec.family == "RP" and rp_uni:
            spec = DepthSpec.parse_label(label, univariate=rp_uni, **common)
        specs.append(spec)
    if len({s.label for s in specs}) != len(specs):
        raise ConfigError("duplicate depth specs in [depths]")
    return specs


def _parse_kinds(cfg: configparser.SectionProxy) -> list[str]:
    kinds = cfg.get("kinds", "").replace(",", " ").split()
    if not kinds:
        raise ConfigError("[classifiers] needs a nonempty 'kinds' list")
    for kind in kinds:
        if kind.upper() not in CLASSIFIER_KINDS:
            raise ConfigError(f"unknown classifier kind {kind!r}")
    return [k.upper() for k in kinds]


def _data_source(cfg: configparser.SectionProxy, seed: int):
    source = cfg.get("source", "model")
    if source == "model":
        return sim.SimConfig(
            model=cfg.get("model", "1"),
            n=cfg.getint("n", 100),
            n_grid=cfg.getint("grid_points", 51),
            k=cfg.getfloat("k", 1.1),
            theta1=cfg.getfloat("theta1", 0.5),
            theta2=cfg.getfloat("theta2", 0.25),
            corr_range=cfg.getfloat("corr_range", 0.3),
            seed=seed,
        )
    if source != "csv":
        raise ConfigError(f"unknown data source {source!r}")
    paths = cfg.get("components", "").split(",")
    labels_path = cfg.get("labels", "")
    if not paths or not labels_path:
        raise ConfigError("[data] csv source needs 'components' and 'labels'")
    components = []
    for i, path in enumerate(p.strip() for p in paths):
        components.append(load_csv(path, "wide", name=f"x{i}"))
    labels = read_labels_csv(labels_path)
    multi = MultiFunctionalDataSet(tuple(components))
    orders = cfg.getint("derivatives", 0)
    if orders:
        extra = []
        base = len(components)
        for order in range(1, orders + 1):
            for comp in multi.components[:base]:
                extra.append(derivative(comp, order).with_name(f"x{len(components) + len(extra)}"))
        multi = MultiFunctionalDataSet(multi.components + tuple(extra))
    return LabeledFunctionalData(multi, labels)


def cmd_experiment(args) -> int:
    parser = _load_config(args.config)
    exp = parser["experiment"]
    out_dir = exp.get("output", None)
    if not out_dir:
        raise ConfigError("[experiment] needs an 'output' directory")
    seed = exp.getint("seed", 0)
    source = _data_source(parser["data"], seed)
    specs = _parse_specs(parser["depths"])
    kinds = _parse_kinds(parser["classifiers"])
    os.makedirs(out_dir, exist_ok=True)
    workers = exp.getint("workers", 0) or None
    result = sim.run_experiment(
        source,
        specs,
        kinds,
        runs=exp.getint("runs", 1),
        test_n=exp.getint("test_n", 50),
        seed=seed,
        checkpoint_dir=os.path.join(out_dir, "runs"),
        n_workers=workers,
        ddk_candidates=exp.getint("ddk_candidates", 10000),
        ddk_refine=exp.getint("ddk_refine", 1),
    )
    result.to_csv(os.path.join(out_dir, "table.csv"))
    result.se_to_csv(os.path.join(out_dir, "table_se.csv"))
    result.write_log(os.path.join(out_dir, "experiment.log"))
    print(f"wrote {out_dir}/table.csv "
          f"({len(result.classifier_kinds)}x{len(result.depth_labels)} cells, "
          f"{result.n_runs} runs)")
    return 0


# ---------------------------------------------------------------------------
# dcor

def cmd_dcor(args) -> int:
    names = []
    for path in args.features:
        name = os.path.splitext(os.path.basename(path))[0]
        names.append(name)
    if len(set(names)) != len(names):
        raise ConfigError("duplicate candidate names")
    labels = read_labels_csv(args.labels)
    candidates = []
    for name, path in zip(names, args.features):
        feats = DepthFeatureMatrix.from_csv(path)
        if feats.values.shape[0] != labels.size:
            raise ConfigError(f"{path}: row count differs from the labels file")
        candidates.append((name, feats.values))
    label_dm = distance_matrix(labels, labels=True)
    values, flags = [], []
    for _, feats in candidates:
        res = dcor_flagged(distance_matrix(feats), label_dm, corrected=True)
        values.append(res.value)
        flags.append(res.degenerate)
    order = select_depths(candidates, labels, max_selected=args.max_selected,
                          redundancy_cap=args.redundancy_cap)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([""] + names)
        writer.writerow(["dcor"] + [f"{v:.4f}" for v in values])
        writer.writerow(["degenerate"] + ["yes" if f else "" for f in flags])
        writer.writerow(
            ["selected_rank"]
            + [str(order.index(n) + 1) if n in order else "" for n in names]
        )
    print(f"dcor table for {len(names)} candidates -> {args.out}")
    print("selection order:", ", ".join(order) if order else "(none)")
    return 0


# ---------------------------------------------------------------------------
# DD-plot

_BACKGROUND_COLORS = ("#d4d4d4", "#8a8a8a", "#b5b5b5", "#6f6f6f")
_POINT_COLORS = ("#9e9e9e", "#000000", "#5a5a5a", "#2f2f2f")


def _svg_ddplot(path, x, y, labels, grid_x, grid_y, grid_pred, names):
    size, margin = 640, 70
    span = size - 2 * margin
    xlo, xhi = float(grid_x[0]), float(grid_x[-1])
    ylo, yhi = float(grid_y[0]), float(grid_y[-1])

    def px(v):
        return margin + (v - xlo) / (xhi - xlo) * span

    def py(v):
        return margin + (yhi - v) / (yhi - ylo) * span

    n_grid = grid_x.size
    cell_w = span / n_grid
    cell_h = span / n_grid
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}">',
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="#ffffff"/>',
    ]
    pred = grid_pred.reshape(n_grid, n_grid)  # [row = y index][col = x index]
    for row in range(n_grid):
        top = margin + span - (row + 1) * cell_h
        col = 0
        while col < n_grid:
            run = col
            while run < n_grid and pred[row, run] == pred[row, col]:
                run += 1
            color = _BACKGROUND_COLORS[int(pred[row, col]) % len(_BACKGROUND_COLORS)]
            parts.append(
                f'<rect x="{margin + col * cell_w:.2f}" y="{top:.2f}" '
                f'width="{(run - col) * cell_w + 0.5:.2f}" height="{cell_h + 0.5:.2f}" '
                f'fill="{color}"/>'
            )
            col = run
    diag_lo = max(xlo, ylo)
    diag_hi = min(xhi, yhi)
    if diag_lo < diag_hi:
        parts.append(
            f'<line x1="{px(diag_lo):.2f}" y1="{py(diag_lo):.2f}" '
            f'x2="{px(diag_hi):.2f}" y2="{py(diag_hi):.2f}" '
            'stroke="#ffffff" stroke-width="1.5" stroke-dasharray="6,4"/>'
        )
    for xi, yi, li in zip(x, y, labels):
        color = _POINT_COLORS[int(li) % len(_POINT_COLORS)]
        parts.append(
            f'<circle cx="{px(xi):.2f}" cy="{py(yi):.2f}" r="2.2" '
            f'fill="{color}" fill-opacity="0.85"/>'
        )
    parts.append(
        f'<rect x="{margin}" y="{margin}" width="{span}" height="{span}" '
        'fill="none" stroke="#000000"/>'
    )
    parts.append(
        f'<text x="{size / 2:.0f}" y="{size - 18}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15">{names[0]}</text>'
    )
    parts.append(
        f'<text x="20" y="{size / 2:.0f}" text-anchor="middle" '
        f'font-family="sans-serif" font-size="15" '
        f'transform="rotate(-90 20 {size / 2:.0f})">{names[1]}</text>'
    )
    for v, anchor in ((xlo, "start"), (xhi, "end")):
        parts.append(
            f'<text x="{px(v):.2f}" y="{margin + span + 20}" text-anchor="{anchor}" '
            f'font-family="sans-serif" font-size="12">{v:.3g}</text>'
        )
    for v in (ylo, yhi):
        parts.append(
            f'<text x="{margin - 8}" y="{py(v) + 4:.2f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="12">{v:.3g}</text>'
        )
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts) + "\n")


def cmd_ddplot(args) -> int:
    feats = DepthFeatureMatrix.from_csv(args.features)
    labels = read_labels_csv(args.labels)
    if feats.values.shape[0] != labels.size:
        raise ConfigError("features and labels disagree on the sample size")
    values = feats.values
    names = list(feats.column_names)
    if values.shape[1] != 2:
        if values.shape[1] < 2:
            raise ConfigError("DD-plots need at least two depth columns")
        print(f"warning: {values.shape[1]} columns, plotting the first two",
              file=sys.stderr)
        values = values[:, :2]
        names = names[:2]
    model = make_classifier(args.classifier, seed=args.seed)
    model.fit(values, labels)
    pad_x = 0.05 * (values[:, 0].max() - values[:, 0].min() or 1.0)
    pad_y = 0.05 * (values[:, 1].max() - values[:, 1].min() or 1.0)
    gx = np.linspace(values[:, 0].min() - pad_x, values[:, 0].max() + pad_x, args.grid_n)
    gy = np.linspace(values[:, 1].min() - pad_y, values[:, 1].max() + pad_y, args.grid_n)
    mesh = np.column_stack([np.repeat(gx, args.grid_n), np.tile(gy, args.grid_n)])
    # row-major in y for the SVG: reshape as [x index, y index] then transpose
    pred = model.predict(mesh).reshape(args.grid_n, args.grid_n).T.ravel()
    if args.grid_csv:
        with open(args.grid_csv, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "y", "prediction"])
            k = 0
            for yi in range(args.grid_n):
                for xi in range(args.grid_n):
                    writer.writerow(
                        [format_float(gx[xi]), format_float(gy[yi]), int(pred[k])]
                    )
                    k += 1
    _svg_ddplot(args.out, values[:, 0], values[:, 1], labels, gx, gy, pred, names)
    print(f"DD-plot ({args.classifier}) -> {args.out}; "
          f"training error {model.training_error_:.4f}")
    return 0


# ---------------------------------------------------------------------------
# argument parsing

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ddg",
        description="Depth-based DD^G classification toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="draw one dataset from a generative model")
    p.add_argument("--model", required=True,
                   choices=sim.FUNCTIONAL_MODELS + sim.POINT_MODELS)
    p.add_argument("--n", type=int, default=100,
                   help="curves per (sub)group, or points per class")
    p.add_argument("--n-ball", type=int, default=2000)
    p.add_argument("--n-rings", type=int, default=2000)
    p.add_argument("--grid-points", type=int, default=51)
    p.add_argument("--k", type=float, default=1.1)
    p.add_argument("--test-n", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("experiment", help="run a configured Monte Carlo table")
    p.add_argument("config")
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("dcor", help="distance-correlation table and selection")
    p.add_argument("--features", nargs="+", required=True,
                   help="one feature CSV per candidate; file stem = name")
    p.add_argument("--labels", required=True)
    p.add_argument("--max-selected", type=int, default=3)
    p.add_argument("--redundancy-cap", type=float, default=0.7)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dcor)

    p = sub.add_parser("ddplot", help="render a DD-plot with decision regions")
    p.add_argument("--features", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--classifier", default="MD")
    p.add_argument("--grid-n", type=int, default=200)
    p.add_argument("--grid-csv", default="")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ddplot)
    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RuntimeError as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run())
