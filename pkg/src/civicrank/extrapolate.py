"""Label extrapolation: closed-form ridge regression and kNN label
propagation behind a shared fit/predict estimator surface, plus held-out
evaluation and cross-validation.

Predictions are always clipped to [0,1], the label scale.
"""

import json
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import ValidationError


@dataclass
class EvalMetrics:
    rmse: float
    spearman_rho: float
    n_test: int

    def to_dict(self):
        return {"rmse": self.rmse, "spearman_rho": self.spearman_rho,
                "n_test": self.n_test}


def _standardize_fit(X):
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    constant = stds < 1e-12
    stds = np.where(constant, 1.0, stds)
    return means, stds, constant


def _standardize_apply(X, means, stds, constant):
    Z = (X - means) / stds
    Z[:, constant] = 0.0
    return Z


class RidgeExtrapolator:
    """Closed-form ridge on internally standardized features.

    The intercept, when fitted, is unpenalized (implemented by centering y).
    """

    def __init__(self, alpha=1.0, fit_intercept=True, standardize=True,
                 clip=True):
        self.alpha = alpha
        self.fit_intercept = fit_intercept
        self.standardize = standardize
        self.clip = clip

    def get_params(self, deep=True):
        return {"alpha": self.alpha, "fit_intercept": self.fit_intercept,
                "standardize": self.standardize, "clip": self.clip}

    def set_params(self, **params):
        for key, value in params.items():
            setattr(self, key, value)
        return self

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.ndim != 2 or X.shape[0] != y.shape[0]:
            raise ValidationError("shape_mismatch", f"X {X.shape}, y {y.shape}")
        if X.shape[0] < 2:
            raise ValidationError("too_few_rows", "need at least 2 rows")
        if self.alpha < 0:
            raise ValidationError("bad_alpha", "alpha must be >= 0")
        if self.standardize:
            self.means_, self.stds_, self.constant_ = _standardize_fit(X)
        else:
            d = X.shape[1]
            self.means_ = np.zeros(d)
            self.stds_ = np.ones(d)
            self.constant_ = np.zeros(d, dtype=bool)
        Z = _standardize_apply(X, self.means_, self.stds_, self.constant_)
        if self.fit_intercept:
            y_center = y.mean()
            target = y - y_center
        else:
            y_center = 0.0
            target = y
        gram = Z.T @ Z + self.alpha * np.eye(Z.shape[1])
        try:
            if self.alpha == 0 and np.linalg.matrix_rank(gram) < gram.shape[0]:
                raise np.linalg.LinAlgError("rank deficient")
            self.coef_ = np.linalg.solve(gram, Z.T @ target)
        except np.linalg.LinAlgError as exc:
            raise ValidationError("singular_fit",
                                  "system is singular; use alpha > 0") from exc
        self.intercept_ = float(y_center)
        return self

    def predict(self, X, clip=None):
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.coef_.shape[0]:
            raise ValidationError("shape_mismatch", f"expected {self.coef_.shape[0]} columns")
        Z = _standardize_apply(X, self.means_, self.stds_, self.constant_)
        raw = Z @ self.coef_ + self.intercept_
        if clip is None:
            clip = self.clip
        return np.clip(raw, 0.0, 1.0) if clip else raw

    def to_dict(self):
        return {
            "method": "ridge",
            "alpha": self.alpha,
            "fit_intercept": self.fit_intercept,
            "weights": self.coef_.tolist(),
            "intercept": self.intercept_,
            "feature_means": self.means_.tolist(),
            "feature_stds": self.stds_.tolist(),
            "constant_columns": self.constant_.astype(int).tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        model = cls(alpha=d["alpha"], fit_intercept=d["fit_intercept"])
        model.coef_ = np.asarray(d["weights"], dtype=float)
        model.intercept_ = float(d["intercept"])
        model.means_ = np.asarray(d["feature_means"], dtype=float)
        model.stds_ = np.asarray(d["feature_stds"], dtype=float)
        model.constant_ = np.asarray(d["constant_columns"], dtype=bool)
        return model


class KNNPropagator:
    """Similarity-based label propagation: inverse-distance weighted mean of
    the k nearest labeled points in standardized feature space.

    Exact matches (distance < eps) short-circuit to the mean of those labels.
    """

    def __init__(self, k=5, eps=1e-9):
        self.k = k
        self.eps = eps

    def get_params(self, deep=True):
        return {"k": self.k, "eps": self.eps}

    def set_params(self, **params):
        for key, value in params.items():
            setattr(self, key, value)
        return self

    def fit(self, X, y):
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        if X.shape[0] == 0:
            raise ValidationError("no_labeled_points", "need labeled data")
        if not 1 <= self.k <= X.shape[0]:
            raise ValidationError("bad_k", f"k={self.k}, n_labeled={X.shape[0]}")
        if self.eps <= 0:
            raise ValidationError("bad_eps", "eps must be > 0")
        self.means_, self.stds_, self.constant_ = _standardize_fit(X)
        self.X_ = _standardize_apply(X, self.means_, self.stds_, self.constant_)
        self.y_ = y
        return self

    def predict(self, X):
        X = np.asarray(X, dtype=float)
        Z = _standardize_apply(X, self.means_, self.stds_, self.constant_)
        out = np.empty(Z.shape[0])
        for i, z in enumerate(Z):
            d = np.sqrt(((self.X_ - z) ** 2).sum(axis=1))
            exact = d < self.eps
            if exact.any():
                out[i] = self.y_[exact].mean()
                continue
            # stable argsort: ties in distance resolve by training row order,
            # which callers keep sorted by article id
            nearest = np.argsort(d, kind="stable")[: self.k]
            w = 1.0 / (d[nearest] + self.eps)
            out[i] = float((w * self.y_[nearest]).sum() / w.sum())
        return np.clip(out, 0.0, 1.0)

    def to_dict(self):
        return {
            "method": "knn",
            "k": self.k,
            "eps": self.eps,
            "feature_means": self.means_.tolist(),
            "feature_stds": self.stds_.tolist(),
            "constant_columns": self.constant_.astype(int).tolist(),
            "labeled_X": self.X_.tolist(),
            "labeled_y": self.y_.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        model = cls(k=d["k"], eps=d["eps"])
        model.means_ = np.asarray(d["feature_means"], dtype=float)
        model.stds_ = np.asarray(d["feature_stds"], dtype=float)
        model.constant_ = np.asarray(d["constant_columns"], dtype=bool)
        model.X_ = np.asarray(d["labeled_X"], dtype=float)
        model.y_ = np.asarray(d["labeled_y"], dtype=float)
        return model


def fit_ridge(X, y, alpha=1.0, fit_intercept=True, standardize=True):
    return RidgeExtrapolator(alpha=alpha, fit_intercept=fit_intercept,
                             standardize=standardize).fit(X, y)


def knn_propagate(X_lab, y_lab, X_unlab, k=5, eps=1e-9):
    return KNNPropagator(k=k, eps=eps).fit(X_lab, y_lab).predict(X_unlab)


def evaluate(preds, truth):
    preds = np.asarray(preds, dtype=float)
    truth = np.asarray(truth, dtype=float)
    if preds.shape != truth.shape:
        raise ValidationError("length_mismatch", f"{preds.shape} vs {truth.shape}")
    if preds.shape[0] < 2:
        raise ValidationError("too_few_points", "need at least 2 points")
    rmse = float(np.sqrt(((preds - truth) ** 2).mean()))
    rho = stats.spearmanr(preds, truth).statistic
    return EvalMetrics(rmse=rmse, spearman_rho=float(rho), n_test=preds.shape[0])


def cross_validate(X, y, folds, seed, make_model):
    """Seeded shuffle, contiguous fold split; returns (per-fold metrics, mean)."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    if folds < 2 or n < folds:
        raise ValidationError("bad_folds", f"folds={folds}, n={n}")
    rng = np.random.RandomState(seed)
    order = np.arange(n)
    rng.shuffle(order)
    bounds = np.linspace(0, n, folds + 1).astype(int)
    per_fold = []
    for f in range(folds):
        test_idx = order[bounds[f]:bounds[f + 1]]
        train_idx = np.concatenate([order[:bounds[f]], order[bounds[f + 1]:]])
        model = make_model().fit(X[train_idx], y[train_idx])
        preds = model.predict(X[test_idx])
        if len(test_idx) >= 2:
            per_fold.append(evaluate(preds, y[test_idx]))
        else:
            rmse = float(np.sqrt(((preds - y[test_idx]) ** 2).mean()))
            per_fold.append(EvalMetrics(rmse=rmse, spearman_rho=float("nan"),
                                        n_test=len(test_idx)))
    rhos = [m.spearman_rho for m in per_fold if not np.isnan(m.spearman_rho)]
    mean = EvalMetrics(
        rmse=float(np.mean([m.rmse for m in per_fold])),
        spearman_rho=float(np.mean(rhos)) if rhos else float("nan"),
        n_test=sum(m.n_test for m in per_fold),
    )
    return per_fold, mean


def save_model(model, path, extra=None):
    payload = model.to_dict()
    if extra:
        payload.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path):
    with open(path, encoding="utf-8") as fh:
        d = json.load(fh)
    if d["method"] == "ridge":
        return RidgeExtrapolator.from_dict(d)
    if d["method"] == "knn":
        return KNNPropagator.from_dict(d)
    raise ValidationError("unknown_method", d["method"])
