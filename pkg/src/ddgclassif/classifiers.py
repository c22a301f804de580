"""Classifiers on the depth-feature space R^G.

The DDk polynomial rules follow the classical DD-plot construction: a
polynomial through the origin chosen by random candidate search plus local
refinement, with axis interchange and majority voting over group pairs for
more than two groups.  The regular classifiers (LDA, QDA, kNN, NP, GLM, GAM)
are self-contained numpy implementations with fit/predict/diagnostics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, null_space
from scipy.interpolate import BSpline
from scipy.optimize import minimize
from scipy.stats import norm as _norm

from .errors import DimensionError, FitError, ParameterError

_LOGIT_CLIP = 30.0


def _as_matrix(features) -> np.ndarray:
    values = getattr(features, "values", features)
    return np.atleast_2d(np.asarray(values, dtype=float))


def _feature_names(features, n: int) -> list[str]:
    names = getattr(features, "column_names", None)
    if names is not None:
        return list(names)
    return [f"x{j + 1}" for j in range(n)]


# ---------------------------------------------------------------------------
# evaluation

@dataclass(frozen=True)
class ConfusionSummary:
    counts: np.ndarray
    rate: float

    @property
    def n_groups(self) -> int:
        return self.counts.shape[0]


def evaluate(predictions, truth, n_groups: int | None = None) -> ConfusionSummary:
    """Confusion counts (rows = truth) and the misclassification rate."""
    predictions = np.asarray(predictions, dtype=int)
    truth = np.asarray(truth, dtype=int)
    if predictions.shape != truth.shape:
        raise DimensionError("predictions and truth must have equal length")
    g = n_groups or int(max(predictions.max(initial=0), truth.max(initial=0))) + 1
    counts = np.zeros((g, g), dtype=int)
    np.add.at(counts, (truth, predictions), 1)
    rate = 1.0 - np.trace(counts) / counts.sum() if counts.sum() else 0.0
    return ConfusionSummary(counts, float(rate))


# ---------------------------------------------------------------------------
# discriminant analysis

class DiscriminantClassifier:
    """Gaussian Bayes rule with empirical priors.

    ``flavor="linear"`` pools one covariance across classes, ``"quadratic"``
    estimates one per class; near-singular covariances get a trace-scaled
    ridge.
    """

    def __init__(self, flavor: str = "linear", ridge: float = 1e-8):
        if flavor not in ("linear", "quadratic"):
            raise ParameterError(f"unknown discriminant flavor {flavor!r}")
        self.flavor = flavor
        self.ridge = ridge

    @staticmethod
    def _factor(cov: np.ndarray, ridge: float):
        p = cov.shape[0]
        try:
            return cho_factor(cov, lower=True)
        except (np.linalg.LinAlgError, ValueError):
            tr = np.trace(cov)
            bump = ridge * tr / p if tr > 0 else 1.0
            return cho_factor(cov + bump * np.eye(p), lower=True)

    def fit(self, features, labels):
        x = _as_matrix(features)
        y = np.asarray(labels, dtype=int)
        self.classes_ = np.unique(y)
        g = self.classes_.size
        n, d = x.shape
        self.means_ = np.array([x[y == c].mean(axis=0) for c in self.classes_])
        self.priors_ = np.array([(y == c).mean() for c in self.classes_])
        if self.flavor == "quadratic":
            factors = []
            self.log_dets_ = np.zeros(g)
            for i, c in enumerate(self.classes_):
                xc = x[y == c]
                if xc.shape[0] < d + 1:
                    raise FitError(
                        f"class {c} has {xc.shape[0]} points, quadratic needs "
                        f"{d + 1}; consider the linear flavor"
                    )
                cov = np.cov(xc, rowvar=False, ddof=1).reshape(d, d)
                factor = self._factor(cov, self.ridge)
                factors.append(factor)
                self.log_dets_[i] = 2.0 * np.sum(np.log(np.diag(factor[0])))
            self._factors = factors
        else:
            if any((y == c).sum() < 2 for c in self.classes_):
                raise FitError("linear discriminant needs at least 2 points per class")
            pooled = np.zeros((d, d))
            for c in self.classes_:
                xc = x[y == c] - x[y == c].mean(axis=0)
                pooled += xc.T @ xc
            pooled /= n - g
            self._factors = [self._factor(pooled, self.ridge)]
        self.training_error_ = float(np.mean(self.predict(x) != y))
        return self

    def decision_scores(self, features) -> np.ndarray:
        """Unnormalized log-posterior per class."""
        x = _as_matrix(features)
        g = self.classes_.size
        scores = np.zeros((x.shape[0], g))
        for i in range(g):
            factor = self._factors[i if self.flavor == "quadratic" else 0]
            centered = (x - self.means_[i]).T
            q = np.sum(centered * cho_solve(factor, centered), axis=0)
            scores[:, i] = -0.5 * q + np.log(self.priors_[i])
            if self.flavor == "quadratic":
                scores[:, i] -= 0.5 * self.log_dets_[i]
        return scores

    def predict_proba(self, features) -> np.ndarray:
        return _softmax(self.decision_scores(features))

    def predict(self, features) -> np.ndarray:
        return self.classes_[np.argmax(self.decision_scores(features), axis=1)]


def fit_discriminant(features, labels, flavor: str = "linear") -> DiscriminantClassifier:
    return DiscriminantClassifier(flavor=flavor).fit(features, labels)


def _softmax(scores: np.ndarray) -> np.ndarray:
    z = scores - scores.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


# ---------------------------------------------------------------------------
# k nearest neighbours

def _majority_vote(neigh_labels: np.ndarray, n_classes: int) -> np.ndarray:
    """Majority vote per row; ties go to the nearest neighbour among the
    tied classes (rows are sorted by distance)."""
    m, k = neigh_labels.shape
    counts = np.zeros((m, n_classes), dtype=int)
    rows = np.repeat(np.arange(m), k)
    np.add.at(counts, (rows, neigh_labels.ravel()), 1)
    best = counts.max(axis=1)
    winners = counts == best[:, None]
    out = np.argmax(winners, axis=1)
    tied = winners.sum(axis=1) > 1
    for i in np.flatnonzero(tied):
        for lab in neigh_labels[i]:
            if winners[i, lab]:
                out[i] = lab
                break
    return out


class KNNClassifier:
    """k nearest neighbours on Euclidean feature distances.

    ``k="auto"`` screens odd k up to 2*floor(sqrt(N))+1 by leave-one-out
    error, preferring the smallest k on ties.
    """

    def __init__(self, k="auto"):
        self.k = k

    def fit(self, features, labels):
        x = _as_matrix(features)
        y = np.asarray(labels, dtype=int)
        self.classes_ = np.unique(y)
        self._index = {c: i for i, c in enumerate(self.classes_)}
        self._x = x
        self._y_idx = np.array([self._index[c] for c in y])
        n = x.shape[0]
        if self.k == "auto":
            self.k_ = self._select_k()
        else:
            k = int(self.k)
            if not 1 <= k <= n - 1:
                raise ParameterError(f"k must lie in [1, {n - 1}]")
            self.k_ = k
        self.training_error_ = float(np.mean(self.predict(x) != y))
        return self

    def _distances(self, q: np.ndarray) -> np.ndarray:
        sq_t = np.sum(self._x * self._x, axis=1)
        sq_q = np.sum(q * q, axis=1)
        d2 = sq_q[:, None] + sq_t[None, :] - 2.0 * q @ self._x.T
        return np.maximum(d2, 0.0)

    def _select_k(self) -> int:
        n = self._x.shape[0]
        k_max = min(2 * int(math.isqrt(n)) + 1, n - 1)
        grid = list(range(1, k_max + 1, 2))
        d = self._distances(self._x)
        np.fill_diagonal(d, np.inf)
        order = np.argsort(d, axis=1, kind="stable")[:, :k_max]
        neigh = self._y_idx[order]
        best_k, best_err = grid[0], np.inf
        for k in grid:
            pred = _majority_vote(neigh[:, :k], self.classes_.size)
            err = np.mean(pred != self._y_idx)
            if err < best_err - 1e-15:
                best_k, best_err = k, err
        return best_k

    def predict(self, features) -> np.ndarray:
        q = _as_matrix(features)
        if q.shape[0] == 0:
            return np.zeros(0, dtype=int)
        d = self._distances(q)
        order = np.argsort(d, axis=1, kind="stable")[:, : self.k_]
        pred = _majority_vote(self._y_idx[order], self.classes_.size)
        return self.classes_[pred]

    def predict_proba(self, features) -> np.ndarray:
        q = _as_matrix(features)
        d = self._distances(q)
        order = np.argsort(d, axis=1, kind="stable")[:, : self.k_]
        neigh = self._y_idx[order]
        counts = np.zeros((q.shape[0], self.classes_.size))
        rows = np.repeat(np.arange(q.shape[0]), self.k_)
        np.add.at(counts, (rows, neigh.ravel()), 1.0)
        return counts / self.k_


def fit_knn(features, labels, k="auto") -> KNNClassifier:
    return KNNClassifier(k=k).fit(features, labels)


# ---------------------------------------------------------------------------
# Nadaraya-Watson classifier

class NPClassifier:
    """Kernel (Nadaraya-Watson) classifier with one common gaussian bandwidth.

    ``bandwidth="auto"`` starts from the 15% quantile of pairwise feature
    distances and refines it over a 5-point multiplicative grid by
    leave-one-out error.  Queries with zero kernel mass fall back to 1-NN.
    """

    _GRID = (0.5, 0.75, 1.0, 1.5, 2.0)

    def __init__(self, bandwidth="auto"):
        self.bandwidth = bandwidth

    def fit(self, features, labels):
        x = _as_matrix(features)
        y = np.asarray(labels, dtype=int)
        self.classes_ = np.unique(y)
        self._x = x
        self._y_onehot = np.array([y == c for c in self.classes_], dtype=float).T
        self._y_idx = np.searchsorted(self.classes_, y)
        if self.bandwidth == "auto":
            self.bandwidth_ = self._select_bandwidth()
        else:
            h = float(self.bandwidth)
            if h <= 0:
                raise ParameterError("bandwidth must be positive")
            self.bandwidth_ = h
        self.training_error_ = float(np.mean(self.predict(x) != y))
        return self

    def _pair_distances(self) -> np.ndarray:
        sq = np.sum(self._x * self._x, axis=1)
        d2 = sq[:, None] + sq[None, :] - 2.0 * self._x @ self._x.T
        return np.sqrt(np.maximum(d2, 0.0))

    def _select_bandwidth(self) -> float:
        d = self._pair_distances()
        iu = np.triu_indices(d.shape[0], k=1)
        condensed = d[iu]
        positive = condensed[condensed > 0]
        if positive.size == 0:
            return 1.0
        h0 = float(np.quantile(condensed, 0.15))
        if h0 <= 0:
            h0 = float(np.min(positive))
        best_h, best_err = h0, np.inf
        for mult in self._GRID:
            h = mult * h0
            mass = np.exp(-0.5 * (d / h) ** 2)
            np.fill_diagonal(mass, 0.0)
            scores = mass @ self._y_onehot
            pred = self._decide(scores, d, exclude_self=True)
            err = np.mean(pred != self._y_idx)
            if err < best_err - 1e-15:
                best_h, best_err = h, err
        return best_h

    def _decide(self, scores, distances, exclude_self=False) -> np.ndarray:
        pred = np.argmax(scores, axis=1)
        empty = scores.sum(axis=1) <= 0.0
        if np.any(empty):
            d = distances[empty].copy()
            if exclude_self:
                d[d == 0] = np.inf
            pred[empty] = self._y_idx[np.argmin(d, axis=1)]
        return pred

    def predict(self, features) -> np.ndarray:
        scores, d = self._scores(features)
        return self.classes_[self._decide(scores, d)]

    def predict_proba(self, features) -> np.ndarray:
        scores, d = self._scores(features)
        total = scores.sum(axis=1, keepdims=True)
        out = np.where(total > 0, scores / np.where(total > 0, total, 1.0), 0.0)
        empty = total.ravel() <= 0
        if np.any(empty):
            nearest = self._y_idx[np.argmin(d[empty], axis=1)]
            out[np.flatnonzero(empty), :] = 0.0
            out[np.flatnonzero(empty), nearest] = 1.0
        return out

    def _scores(self, features):
        q = _as_matrix(features)
        sq_t = np.sum(self._x * self._x, axis=1)
        sq_q = np.sum(q * q, axis=1)
        d2 = np.maximum(sq_q[:, None] + sq_t[None, :] - 2.0 * q @ self._x.T, 0.0)
        d = np.sqrt(d2)
        mass = np.exp(-0.5 * (d / self.bandwidth_) ** 2)
        return mass @ self._y_onehot, d


def fit_np(features, labels, bandwidth="auto") -> NPClassifier:
    return NPClassifier(bandwidth=bandwidth).fit(features, labels)


# ---------------------------------------------------------------------------
# logistic regression (GLM)

@dataclass(frozen=True)
class CoefficientRow:
    name: str
    estimate: float
    std_error: float
    z_value: float
    p_value: float


class LogisticClassifier:
    """Binomial (or multinomial) logit fitted by IRLS.

    Detects separation through diverging coefficients and refits with a small
    ridge, keeping the ``separation_`` flag raised.
    """

    def __init__(self, max_iter: int = 25, tol: float = 1e-8, ridge_fallback: float = 1e-4):
        self.max_iter = max_iter
        self.tol = tol
        self.ridge_fallback = ridge_fallback

    def fit(self, features, labels):
        x = _as_matrix(features)
        y = np.asarray(labels, dtype=int)
        self.classes_ = np.unique(y)
        self.feature_names_ = _feature_names(features, x.shape[1])
        z = self._design(x)
        if self.classes_.size == 2:
            y01 = (y == self.classes_[1]).astype(float)
            coef, cov, self.separation_ = self._irls_binary(z, y01)
            self.coef_ = coef
            self._cov = cov
        else:
            y_idx = np.searchsorted(self.classes_, y)
            coef, cov, self.separation_ = self._irls_multinomial(z, y_idx)
            self.coef_ = coef  # (g-1, d+1) against baseline class 0
            self._cov = cov
        self.training_error_ = float(np.mean(self.predict(x) != y))
        return self

    @staticmethod
    def _design(m: np.ndarray) -> np.ndarray:
        return np.column_stack([np.ones(m.shape[0]), m])

    def _irls_binary(self, z, y01, ridge: float = 0.0):
        n, d = z.shape
        beta = np.zeros(d)
        penalty = ridge * np.eye(d)
        penalty[0, 0] = 0.0
        for _ in range(self.max_iter):
            eta = np.clip(z @ beta, -_LOGIT_CLIP, _LOGIT_CLIP)
            p = 1.0 / (1.0 + np.exp(-eta))
            w = np.maximum(p * (1.0 - p), 1e-10)
            grad = z.T @ (y01 - p) - penalty @ beta
            hess = (z * w[:, None]).T @ z + penalty
            step = np.linalg.solve(hess, grad)
            beta = beta + step
            if np.max(np.abs(step)) < self.tol:
                break
        if ridge == 0.0 and np.linalg.norm(beta) > 1e3:
            coef, cov, _ = self._irls_binary(z, y01, ridge=self.ridge_fallback)
            return coef, cov, True
        eta = np.clip(z @ beta, -_LOGIT_CLIP, _LOGIT_CLIP)
        p = 1.0 / (1.0 + np.exp(-eta))
        w = np.maximum(p * (1.0 - p), 1e-10)
        hess = (z * w[:, None]).T @ z + penalty
        cov = np.linalg.inv(hess)
        return beta, cov, False

    def _irls_multinomial(self, z, y_idx, ridge: float = 0.0):
        n, d = z.shape
        g = self.classes_.size
        k = g - 1
        beta = np.zeros((k, d))
        onehot = np.zeros((n, g))
        onehot[np.arange(n), y_idx] = 1.0
        penalty = ridge * np.eye(k * d)
        for _ in range(self.max_iter):
            probs = self._multinomial_probs(z, beta)
            grad = np.concatenate(
                [z.T @ (onehot[:, c + 1] - probs[:, c + 1]) for c in range(k)]
            )
            grad = grad - penalty @ beta.reshape(-1)
            hess = np.zeros((k * d, k * d))
            for a in range(k):
                for b in range(k):
                    w = probs[:, a + 1] * ((a == b) - probs[:, b + 1])
                    hess[a * d:(a + 1) * d, b * d:(b + 1) * d] = (z * w[:, None]).T @ z
            hess += penalty
            step = np.linalg.solve(hess, grad)
            beta = beta + step.reshape(k, d)
            if np.max(np.abs(step)) < self.tol:
                break
        if ridge == 0.0 and np.linalg.norm(beta) > 1e3:
            coef, cov, _ = self._irls_multinomial(z, y_idx, ridge=self.ridge_fallback)
            return coef, cov, True
        probs = self._multinomial_probs(z, beta)
        hess = np.zeros((k * d, k * d))
        for a in range(k):
            for b in range(k):
                w = probs[:, a + 1] * ((a == b) - probs[:, b + 1])
                hess[a * d:(a + 1) * d, b * d:(b + 1) * d] = (z * w[:, None]).T @ z
        hess += penalty
        cov = np.linalg.inv(hess)
        return beta, cov, False

    @staticmethod
    def _multinomial_probs(z, beta):
        eta = np.clip(z @ beta.T, -_LOGIT_CLIP, _LOGIT_CLIP)
        scores = np.column_stack([np.zeros(z.shape[0]), eta])
        return _softmax(scores)

    def decision_scores(self, features) -> np.ndarray:
        x = _as_matrix(features)
        z = self._design(x)
        if self.classes_.size == 2:
            eta = z @ self.coef_
            return np.column_stack([np.zeros_like(eta), eta])
        eta = z @ self.coef_.T
        return np.column_stack([np.zeros(z.shape[0]), eta])

    def predict_proba(self, features) -> np.ndarray:
        return _softmax(self.decision_scores(features))

    def predict(self, features) -> np.ndarray:
        return self.classes_[np.argmax(self.decision_scores(features), axis=1)]

    def coefficient_table(self) -> list[CoefficientRow]:
        """Estimate / Std. Error / z value / p rows, intercept first."""
        names = ["(Intercept)"] + list(self.feature_names_)
        if self.classes_.size == 2:
            coefs = self.coef_
            ses = np.sqrt(np.diag(self._cov))
        else:
            coefs = self.coef_.reshape(-1)
            ses = np.sqrt(np.diag(self._cov))
            names = [
                f"{name}:{self.classes_[c + 1]}"
                for c in range(self.classes_.size - 1)
                for name in names
            ]
        rows = []
        for name, est, se in zip(names, coefs, ses):
            zval = est / se if se > 0 else np.inf
            rows.append(CoefficientRow(name, float(est), float(se), float(zval),
                                       float(2.0 * _norm.sf(abs(zval)))))
        return rows


def fit_glm(features, labels) -> LogisticClassifier:
    return LogisticClassifier().fit(features, labels)


# ---------------------------------------------------------------------------
# additive logistic model (GAM)

class _SplineTerm:
    """Cubic B-spline expansion of one feature under a sum-to-zero constraint."""

    def __init__(self, x: np.ndarray, n_basis: int):
        self.lo = float(x.min())
        self.hi = float(x.max())
        inner = np.linspace(self.lo, self.hi, n_basis - 2)[1:-1]
        self.knots = np.concatenate([[self.lo] * 4, inner, [self.hi] * 4])
        raw = self.design_raw(x)
        constraint = raw.sum(axis=0, keepdims=True)
        self.z = null_space(constraint)  # (n_basis, n_basis-1)
        diff2 = np.diff(np.eye(n_basis), n=2, axis=0)
        s = self.z.T @ diff2.T @ diff2 @ self.z
        scale = np.linalg.norm(s)
        self.pen = s / scale if scale > 0 else s

    def design_raw(self, x: np.ndarray) -> np.ndarray:
        clipped = np.clip(x, self.lo, self.hi)
        return BSpline.design_matrix(clipped, self.knots, 3).toarray()

    def design(self, x: np.ndarray) -> np.ndarray:
        return self.design_raw(x) @ self.z


class GAMClassifier:
    """Additive logistic model: logit p = b0 + sum_j f_j(x_j).

    Each f_j is a cubic B-spline expansion with a second-difference penalty
    under a sum-to-zero constraint; fitting is penalized IRLS.  The automatic
    penalty weight minimizes deviance + 2*gamma*edf with the customary
    gamma = 1.4 inflation that guards against undersmoothing.  Groups beyond
    two are handled one-vs-rest.
    """

    _EDF_GAMMA = 1.4

    _LAMBDA_GRID = tuple(float(v) for v in np.logspace(-5, 9, 29))

    def __init__(self, basis_size: int = 8, penalty="auto",
                 max_iter: int = 50, tol: float = 1e-8):
        if basis_size < 4:
            raise ParameterError("basis_size must be at least 4")
        self.basis_size = basis_size
        self.penalty = penalty
        self.max_iter = max_iter
        self.tol = tol

    def fit(self, features, labels):
        x = _as_matrix(features)
        y = np.asarray(labels, dtype=int)
        self.classes_ = np.unique(y)
        self.feature_names_ = _feature_names(features, x.shape[1])
        if self.classes_.size == 2:
            self._models = [self._fit_binary(x, (y == self.classes_[1]).astype(float))]
        else:
            self._models = [
                self._fit_binary(x, (y == c).astype(float)) for c in self.classes_
            ]
        self.training_error_ = float(np.mean(self.predict(x) != y))
        return self

    def _build_terms(self, x: np.ndarray):
        terms = []
        for j in range(x.shape[1]):
            col = x[:, j]
            if col.max() - col.min() <= 0:
                terms.append(None)  # no variance to fit: f_j stays 0
            else:
                terms.append(_SplineTerm(col, self.basis_size))
        return terms

    def _assemble(self, terms, x: np.ndarray):
        blocks = [np.ones((x.shape[0], 1))]
        for j, term in enumerate(terms):
            if term is not None:
                blocks.append(term.design(x[:, j]))
        return np.column_stack(blocks)

    def _penalty_matrix(self, terms, lam: float) -> np.ndarray:
        sizes = [1] + [t.z.shape[1] for t in terms if t is not None]
        total = sum(sizes)
        pen = np.zeros((total, total))
        offset = 1
        for term in terms:
            if term is None:
                continue
            k = term.z.shape[1]
            pen[offset:offset + k, offset:offset + k] = lam * term.pen
            offset += k
        return pen

    def _pirls(self, design, y01, pen):
        beta = np.zeros(design.shape[1])
        dev_old = np.inf
        trace = []
        converged = False
        a = w = z = None
        for _ in range(self.max_iter):
            eta = np.clip(design @ beta, -_LOGIT_CLIP, _LOGIT_CLIP)
            p = 1.0 / (1.0 + np.exp(-eta))
            w = np.maximum(p * (1.0 - p), 1e-10)
            z = eta + (y01 - p) / w
            a = (design * w[:, None]).T @ design + pen
            b = (design * w[:, None]).T @ z
            beta = np.linalg.solve(a, b)
            dev = -2.0 * np.sum(
                y01 * np.log(np.maximum(p, 1e-12))
                + (1.0 - y01) * np.log(np.maximum(1.0 - p, 1e-12))
            )
            trace.append(dev)
            if abs(dev_old - dev) < self.tol * (abs(dev) + 1.0):
                converged = True
                break
            dev_old = dev
        return beta, a, w, z, trace, converged

    def _fit_binary(self, x, y01):
        terms = self._build_terms(x)
        design = self._assemble(terms, x)
        if self.penalty == "auto":
            best = None
            for lam in self._LAMBDA_GRID:
                pen = self._penalty_matrix(terms, lam)
                try:
                    beta, a, w, z, trace, converged = self._pirls(design, y01, pen)
                except np.linalg.LinAlgError:
                    continue
                if not converged:
                    continue
                hat = np.linalg.solve(a, (design * w[:, None]).T @ design)
                edf = np.trace(hat)
                score = trace[-1] + 2.0 * self._EDF_GAMMA * edf
                if best is None or score < best[0]:
                    best = (score, lam, beta)
            if best is None:
                raise FitError("GAM did not converge for any penalty value")
            _, lam, beta = best
        else:
            lam = float(self.penalty)
            pen = self._penalty_matrix(terms, lam)
            beta, _, _, _, trace, converged = self._pirls(design, y01, pen)
            if not converged:
                raise FitError(
                    "GAM penalized IRLS did not converge; deviance trace tail: "
                    + ", ".join(f"{d:.6g}" for d in trace[-5:])
                )
        return {"terms": terms, "beta": beta, "lambda": lam}

    def _linear_predictor(self, model, x: np.ndarray) -> np.ndarray:
        design = self._assemble(model["terms"], x)
        return design @ model["beta"]

    def decision_scores(self, features) -> np.ndarray:
        x = _as_matrix(features)
        if self.classes_.size == 2:
            eta = self._linear_predictor(self._models[0], x)
            return np.column_stack([np.zeros_like(eta), eta])
        return np.column_stack([self._linear_predictor(m, x) for m in self._models])

    def predict(self, features) -> np.ndarray:
        return self.classes_[np.argmax(self.decision_scores(features), axis=1)]

    def predict_proba(self, features) -> np.ndarray:
        x = _as_matrix(features)
        if self.classes_.size == 2:
            eta = self._linear_predictor(self._models[0], x)
            p = 1.0 / (1.0 + np.exp(-np.clip(eta, -_LOGIT_CLIP, _LOGIT_CLIP)))
            return np.column_stack([1.0 - p, p])
        raw = np.column_stack(
            [
                1.0 / (1.0 + np.exp(-np.clip(self._linear_predictor(m, x),
                                             -_LOGIT_CLIP, _LOGIT_CLIP)))
                for m in self._models
            ]
        )
        total = raw.sum(axis=1, keepdims=True)
        return raw / np.where(total > 0, total, 1.0)

    def term_values(self, features, class_index: int = 0) -> np.ndarray:
        """Fitted f_j(x_j) contributions, one column per feature."""
        x = _as_matrix(features)
        model = self._models[class_index]
        out = np.zeros_like(x)
        offset = 1
        for j, term in enumerate(model["terms"]):
            if term is None:
                continue
            k = term.z.shape[1]
            out[:, j] = term.design(x[:, j]) @ model["beta"][offset:offset + k]
            offset += k
        return out

    def linearized_coefficients(self, features, class_index: int = 0):
        """Least-squares slope of each fitted f_j against its feature.

        With a large penalty every f_j is affine, so these match a plain
        logistic regression."""
        x = _as_matrix(features)
        values = self.term_values(x, class_index)
        model = self._models[class_index]
        intercept = float(model["beta"][0])
        slopes = np.zeros(x.shape[1])
        for j in range(x.shape[1]):
            design = np.column_stack([np.ones(x.shape[0]), x[:, j]])
            sol, *_ = np.linalg.lstsq(design, values[:, j], rcond=None)
            intercept += float(sol[0])
            slopes[j] = sol[1]
        return intercept, slopes


def fit_gam(features, labels, basis_size: int = 8, penalty="auto") -> GAMClassifier:
    return GAMClassifier(basis_size=basis_size, penalty=penalty).fit(features, labels)


# ---------------------------------------------------------------------------
# DD-plot polynomial classifiers

class DDkClassifier:
    """Degree-k polynomial through the origin on a two-column DD-plot.

    Random candidate subsets of ``degree`` points define interpolating
    polynomials; the empirically best candidates are refined by Nelder-Mead
    on a logistic-smoothed error, the search is repeated with the axes
    interchanged, and the class-to-side assignment minimizing training error
    is kept.  For three or more groups a rule is fitted per group pair and
    predictions are majority votes, with depth-coordinate tie-breaking.
    """

    def __init__(self, degree: int, n_candidates: int = 10000, n_refine: int = 1,
                 seed: int = 0, temperature: float = 50.0):
        if degree not in (1, 2, 3):
            raise ParameterError("degree must be 1, 2 or 3")
        self.degree = degree
        self.n_candidates = int(n_candidates)
        self.n_refine = int(n_refine)
        self.seed = seed
        self.temperature = temperature
        if self.n_candidates < 1:
            raise ParameterError("need at least one candidate")

    # -- binary fit -------------------------------------------------------

    def fit(self, features, labels, warm_starts=None):
        x = _as_matrix(features)
        y = np.asarray(labels, dtype=int)
        self.classes_ = np.unique(y)
        g = self.classes_.size
        if g < 2:
            raise FitError("need at least two classes")
        if g == 2:
            if x.shape[1] != 2:
                raise DimensionError("binary DDk needs exactly 2 depth columns")
            self._pairwise = None
            self._fit_binary(x, y, warm_starts)
        else:
            if x.shape[1] != g:
                raise DimensionError("multigroup DDk needs one depth column per group")
            self._fit_multigroup(x, y)
        self.training_error_ = float(np.mean(self.predict(x) != y))
        return self

    def _fit_binary(self, x, y, warm_starts=None):
        y01 = (y == self.classes_[1]).astype(int)
        rng = np.random.default_rng(self.seed)
        best = None
        for orientation in (0, 1):
            h = x[:, orientation]
            v = x[:, 1 - orientation]
            coefs = self._candidates(h, v, rng)
            if coefs.shape[0] == 0:
                continue
            errors, sides = self._score_batch(h, v, coefs, y01)
            top = np.argsort(errors, kind="stable")[: self.n_refine]
            pool = [(errors[i], coefs[i], sides[i]) for i in top]
            if warm_starts:
                for w_orient, w_coef in warm_starts:
                    if w_orient != orientation:
                        continue
                    w_coef = np.asarray(w_coef, dtype=float)
                    if w_coef.size != self.degree:
                        raise ParameterError("warm start length must equal the degree")
                    err, side = self._score_one(h, v, w_coef, y01)
                    pool.append((err, w_coef, side))
            for err, coef, side in pool:
                refined = self._refine(h, v, coef, side, y01)
                for cand_err, cand_coef, cand_side in ((err, coef, side), refined):
                    if best is None or cand_err < best[0]:
                        best = (cand_err, orientation, cand_coef, cand_side)
        if best is None:
            raise FitError("no valid polynomial candidate found")
        _, self.orientation_, self.coef_, self.side_ = best

    def _candidates(self, h, v, rng) -> np.ndarray:
        n = h.size
        deg = self.degree
        needed = self.n_candidates
        collected = []
        for _ in range(20):
            idx = rng.integers(0, n, size=(needed, deg))
            hs = h[idx]
            valid = np.all(np.abs(hs) > 0, axis=1)
            if deg > 1:
                s = np.sort(hs, axis=1)
                valid &= np.all(np.diff(s, axis=1) != 0, axis=1)
            idx = idx[valid]
            if idx.size:
                hs = h[idx]
                vs = v[idx]
                # distinct nonzero abscissae make the through-origin system
                # nonsingular, but guard against floating-point degeneracy
                vand = hs[:, :, None] ** np.arange(1, deg + 1)
                try:
                    coefs = np.linalg.solve(vand, vs[:, :, None])[:, :, 0]
                except np.linalg.LinAlgError:
                    rows = []
                    for m in range(vand.shape[0]):
                        try:
                            rows.append(np.linalg.solve(vand[m], vs[m]))
                        except np.linalg.LinAlgError:
                            continue
                    coefs = np.array(rows).reshape(-1, deg)
                collected.append(coefs)
            got = sum(c.shape[0] for c in collected)
            if got >= self.n_candidates:
                break
            needed = self.n_candidates - got
        if not collected:
            return np.zeros((0, deg))
        return np.vstack(collected)[: self.n_candidates]

    def _poly_values(self, h, coefs) -> np.ndarray:
        powers = h[:, None] ** np.arange(1, self.degree + 1)
        return powers @ np.atleast_2d(coefs).T

    def _score_batch(self, h, v, coefs, y01):
        n = h.size
        errors = np.zeros(coefs.shape[0], dtype=int)
        sides = np.zeros(coefs.shape[0], dtype=int)
        chunk = 2000
        for start in range(0, coefs.shape[0], chunk):
            block = coefs[start:start + chunk]
            above = v[:, None] > self._poly_values(h, block)
            mis_above_is_1 = np.sum(above != (y01[:, None] == 1), axis=0)
            mis_above_is_0 = n - mis_above_is_1
            pick_1 = mis_above_is_1 <= mis_above_is_0
            errors[start:start + chunk] = np.where(pick_1, mis_above_is_1, mis_above_is_0)
            sides[start:start + chunk] = np.where(pick_1, 1, 0)
        return errors, sides

    def _score_one(self, h, v, coef, y01):
        err, side = self._score_batch(h, v, coef[None, :], y01)
        return int(err[0]), int(side[0])

    def _refine(self, h, v, coef, side, y01):
        sign = np.where(y01 == side, 1.0, -1.0)
        powers = h[:, None] ** np.arange(1, self.degree + 1)

        def smooth_loss(c):
            margins = (v - powers @ c) * sign
            return float(np.mean(1.0 / (1.0 + np.exp(
                np.clip(self.temperature * margins, -_LOGIT_CLIP, _LOGIT_CLIP)))))

        result = minimize(smooth_loss, coef, method="Nelder-Mead",
                          options={"maxiter": 200 * self.degree, "xatol": 1e-8,
                                   "fatol": 1e-10})
        refined = result.x
        err, new_side = self._score_one(h, v, refined, y01)
        return err, refined, new_side

    # -- multigroup -------------------------------------------------------

    def _fit_multigroup(self, x, y):
        g = self.classes_.size
        pairs = [(i, j) for i in range(g) for j in range(i + 1, g)]
        seeds = np.random.SeedSequence(self.seed).spawn(len(pairs))
        self._pairwise = []
        for (i, j), ss in zip(pairs, seeds):
            ci, cj = self.classes_[i], self.classes_[j]
            rows = np.isin(y, (ci, cj))
            sub = DDkClassifier(
                self.degree, self.n_candidates, self.n_refine,
                seed=int(ss.generate_state(1)[0]), temperature=self.temperature,
            )
            sub.fit(x[np.ix_(rows, [i, j])], y[rows])
            self._pairwise.append(((i, j), sub))

    # -- prediction -------------------------------------------------------

    def predict(self, features) -> np.ndarray:
        x = _as_matrix(features)
        if x.shape[0] == 0:
            return np.zeros(0, dtype=int)
        if self._pairwise is None:
            h = x[:, self.orientation_]
            v = x[:, 1 - self.orientation_]
            above = v > self._poly_values(h, self.coef_).ravel()
            idx = np.where(above, self.side_, 1 - self.side_)
            return self.classes_[idx]
        g = self.classes_.size
        votes = np.zeros((x.shape[0], g), dtype=int)
        for (i, j), sub in self._pairwise:
            pred = sub.predict(x[:, [i, j]])
            for col, cls in ((i, self.classes_[i]), (j, self.classes_[j])):
                votes[:, col] += pred == cls
        best = votes.max(axis=1)
        winners = votes == best[:, None]
        out = np.zeros(x.shape[0], dtype=int)
        for row in range(x.shape[0]):
            tied = np.flatnonzero(winners[row])
            if tied.size == 1:
                out[row] = tied[0]
            else:
                out[row] = tied[np.argmax(x[row, tied])]
        return self.classes_[out]


class MDClassifier:
    """Maximum-depth rule: assign to the group of the largest depth
    coordinate (the slope-1 diagonal on a DD-plot)."""

    def fit(self, features, labels):
        x = _as_matrix(features)
        y = np.asarray(labels, dtype=int)
        self.classes_ = np.unique(y)
        if x.shape[1] != self.classes_.size:
            raise DimensionError("MD needs one depth column per group")
        self.training_error_ = float(np.mean(self.predict(x) != y))
        return self

    def predict(self, features) -> np.ndarray:
        x = _as_matrix(features)
        if x.shape[0] == 0:
            return np.zeros(0, dtype=int)
        # ties go to the earlier group, so d1 > d0 is required for group 1
        return self.classes_[np.argmax(x, axis=1)]


def fit_ddk(features, labels, degree: int, n_candidates: int = 10000,
            n_refine: int = 1, seed: int = 0, warm_starts=None) -> DDkClassifier:
    """Two-group DD-plot polynomial classifier."""
    model = DDkClassifier(degree, n_candidates, n_refine, seed)
    return model.fit(features, labels, warm_starts=warm_starts)


def fit_ddk_multigroup(features, labels, degree: int, n_candidates: int = 10000,
                       n_refine: int = 1, seed: int = 0) -> DDkClassifier:
    """One-vs-one majority voting over all group pairs."""
    labels = np.asarray(labels, dtype=int)
    if np.unique(labels).size < 3:
        raise ParameterError("multigroup DDk needs at least 3 groups")
    return DDkClassifier(degree, n_candidates, n_refine, seed).fit(features, labels)


# ---------------------------------------------------------------------------
# factory

CLASSIFIER_KINDS = ("DD1", "DD2", "DD3", "MD", "LDA", "QDA", "KNN", "NP", "GLM", "GAM")


def make_classifier(kind: str, **params):
    """Unfitted classifier by table name (DD1..DD3, MD, LDA, QDA, kNN, NP,
    GLM, GAM)."""
    kind = kind.upper()
    if kind.startswith("DD") and kind[2:].isdigit():
        return DDkClassifier(
            int(kind[2:]),
            n_candidates=params.get("n_candidates", 10000),
            n_refine=params.get("n_refine", 1),
            seed=params.get("seed", 0),
        )
    if kind == "MD":
        return MDClassifier()
    if kind == "LDA":
        return DiscriminantClassifier("linear")
    if kind == "QDA":
        return DiscriminantClassifier("quadratic")
    if kind == "KNN":
        return KNNClassifier(k=params.get("k", "auto"))
    if kind == "NP":
        return NPClassifier(bandwidth=params.get("bandwidth", "auto"))
    if kind == "GLM":
        return LogisticClassifier()
    if kind == "GAM":
        return GAMClassifier(
            basis_size=params.get("basis_size", 8),
            penalty=params.get("penalty", "auto"),
        )
    raise ParameterError(f"unknown classifier kind {kind!r}")
