"""Multi-view demand regression with canonical correlation analysis.

Each covariate view gets its own CCA regression onto the target; the views
are then blended with weights derived from their cross-validated errors,

    w_i = (1 - e_i / sum_j e_j) / (n - 1),

which sum to one for any ``n >= 2`` views.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

__all__ = [
    "DegenerateData",
    "CcaModel",
    "MdrModel",
    "LoocvResult",
    "fit_cca",
    "cca_predict",
    "mdr_weights",
    "fit_mdr",
    "mdr_predict",
    "fit_concat_lr",
    "loocv_rmse",
    "MODEL_KINDS",
]

DEFAULT_REG = 1e-6
DEFAULT_MAX_COMPONENTS = 5
MODEL_KINDS = ("mdr", "concat-lr", "uniform")


class DegenerateData(ValueError):
    pass


@dataclass(frozen=True)
class CcaModel:
    """Fitted CCA regression from one view ``X`` onto the target ``Y``."""

    x_projections: np.ndarray  # d_x x k
    y_projections: np.ndarray  # d_y x k
    correlations: np.ndarray  # k, nonincreasing
    x_mean: np.ndarray
    x_scale: np.ndarray
    y_mean: np.ndarray
    y_scale: np.ndarray
    score_map: np.ndarray  # k x d_y, x-scores -> standardized Y

    @property
    def k(self) -> int:
        return self.x_projections.shape[1]


@dataclass(frozen=True)
class MdrModel:
    submodels: tuple
    errors: np.ndarray
    weights: np.ndarray
    notes: tuple = ()


@dataclass(frozen=True)
class LoocvResult:
    per_column: np.ndarray
    mean: float
    predictions: np.ndarray = field(repr=False, default=None)


def _as_2d(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    return a[:, None] if a.ndim == 1 else a


def _standardize(a):
    mean = a.mean(axis=0)
    scale = a.std(axis=0, ddof=1)
    constant = ~(scale > 1e-12 * np.maximum(1.0, np.abs(mean)))
    scale = np.where(constant, 1.0, scale)
    return (a - mean) / scale, mean, scale, constant


def _inv_sqrt(c, floor):
    # eigenvalues below the floor are raised to it; well-conditioned
    # covariances are inverted exactly
    vals, vecs = np.linalg.eigh(c)
    return (vecs / np.sqrt(np.maximum(vals, floor))) @ vecs.T


def fit_cca(X, Y, k: int | None = None, reg: float = DEFAULT_REG,
            max_components: int = DEFAULT_MAX_COMPONENTS) -> CcaModel:
    """Fit classical CCA between standardized ``X`` and ``Y`` and a least-squares score map.

    Parameters
    ----------
    X, Y : array_like, shape (n, d_x) and (n, d_y)
    k : int, optional
        Number of canonical pairs; defaults to ``min(d_x, d_y, n - 1, max_components)``
        and is never more than the numerical rank of either view.
    reg : float
        Floor on the eigenvalues of both covariance estimates.

    Raises
    ------
    DegenerateData
        If there are fewer than three rows or every column of ``X`` is constant.
    """
    X, Y = _as_2d(X), _as_2d(Y)
    n = X.shape[0]
    if n < 3 or Y.shape[0] != n:
        raise DegenerateData("need at least 3 aligned rows")
    Xs, xm, xsd, xconst = _standardize(X)
    Ys, ym, ysd, _ = _standardize(Y)
    if xconst.all():
        raise DegenerateData("every column of X is constant")

    rank_x = np.linalg.matrix_rank(Xs)
    rank_y = max(np.linalg.matrix_rank(Ys), 1)
    kmax = max(1, min(rank_x, rank_y, n - 1))
    if k is None:
        k = min(X.shape[1], Y.shape[1], n - 1, max_components)
    k = max(1, min(k, kmax))

    cxx = Xs.T @ Xs / (n - 1)
    cyy = Ys.T @ Ys / (n - 1)
    cxy = Xs.T @ Ys / (n - 1)
    wx, wy = _inv_sqrt(cxx, reg), _inv_sqrt(cyy, reg)
    u, _, vt = np.linalg.svd(wx @ cxy @ wy, full_matrices=False)
    ux = wx @ u[:, :k]
    uy = wy @ vt[:k].T

    zx, zy = Xs @ ux, Ys @ uy
    corr = np.array([_corr(zx[:, c], zy[:, c]) for c in range(k)])
    # flip signs so every reported correlation is non-negative
    sign = np.where(corr < 0, -1.0, 1.0)
    uy, zy, corr = uy * sign, zy * sign, np.abs(corr)
    order = np.argsort(-corr, kind="stable")
    ux, uy, corr, zx = ux[:, order], uy[:, order], corr[order], zx[:, order]

    score_map = np.linalg.lstsq(zx, Ys, rcond=None)[0]
    return CcaModel(ux, uy, corr, xm, xsd, ym, ysd, score_map)


def _corr(a, b) -> float:
    a = a - a.mean()
    b = b - b.mean()
    den = math.sqrt(float(a @ a) * float(b @ b))
    return float(a @ b) / den if den > 0 else 0.0


def cca_predict(m: CcaModel, x) -> np.ndarray:
    """Predict targets for one feature vector or a matrix of rows."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    xs = (np.atleast_2d(x) - m.x_mean) / m.x_scale
    y = (xs @ m.x_projections @ m.score_map) * m.y_scale + m.y_mean
    return y[0] if single else y


def mdr_weights(errors) -> np.ndarray:
    """Ensemble weights from per-view errors; uniform when every error is zero."""
    e = np.asarray(errors, dtype=float)
    n = len(e)
    if n < 2:
        raise ValueError("need at least two views")
    total = e.sum()
    if total <= 0:
        return np.full(n, 1.0 / n)
    return (1.0 - e / total) / (n - 1)


def _rmse(pred, truth) -> float:
    return float(np.sqrt(np.mean((np.asarray(pred) - np.asarray(truth)) ** 2)))


def _kfold(n: int, folds: int, seed: int):
    perm = np.random.default_rng(seed).permutation(n)
    return np.array_split(perm, min(folds, n))


def _cv_error(X, Y, k, folds, seed, reg) -> float:
    sq, count = 0.0, 0
    for test in _kfold(len(X), folds, seed):
        train = np.setdiff1d(np.arange(len(X)), test)
        m = fit_cca(X[train], Y[train], k, reg)
        sq += float(((cca_predict(m, X[test]) - Y[test]) ** 2).sum())
        count += Y[test].size
    return math.sqrt(sq / count)


def fit_mdr(views: Sequence, Y, k: int | None = None, folds: int = 5, seed: int = 0,
            reg: float = DEFAULT_REG) -> MdrModel:
    """Fit one CCA regression per view and weight them by cross-validated RMSE."""
    if len(views) < 2:
        raise ValueError("need at least two views")
    Y = _as_2d(Y)
    views = [_as_2d(v) for v in views]
    errors = np.array([_cv_error(v, Y, k, folds, seed, reg) for v in views])
    weights = mdr_weights(errors)
    notes = ()
    if np.any(weights < 0):
        notes = (f"negative weights {weights.tolist()} from errors {errors.tolist()}",)
    subs = tuple(fit_cca(v, Y, k, reg) for v in views)
    return MdrModel(subs, errors, weights, notes)


def mdr_predict(m: MdrModel, xs: Sequence) -> np.ndarray:
    """Weighted sum of the per-view predictions; ``xs`` holds one input per view."""
    preds = [cca_predict(sub, x) for sub, x in zip(m.submodels, xs)]
    return sum(w * p for w, p in zip(m.weights, preds))


def fit_concat_lr(views: Sequence, Y):
    """Least squares with intercept on all views concatenated; returns a predict function."""
    X = np.hstack([_as_2d(v) for v in views])
    A = np.hstack([X, np.ones((len(X), 1))])
    coef = np.linalg.lstsq(A, _as_2d(Y), rcond=None)[0]

    def predict(rows):
        rows = np.atleast_2d(np.asarray(rows, dtype=float))
        return np.hstack([rows, np.ones((len(rows), 1))]) @ coef

    return predict


def _fit_predict(kind, train_views, Ytr, test_views, k, folds, seed, reg):
    if kind == "mdr":
        m = fit_mdr(train_views, Ytr, k, folds, seed, reg)
        return mdr_predict(m, test_views)
    if kind == "uniform":
        subs = [fit_cca(v, Ytr, k, reg) for v in train_views]
        return sum(cca_predict(s, x) for s, x in zip(subs, test_views)) / len(subs)
    if kind == "concat-lr":
        return fit_concat_lr(train_views, Ytr)(np.hstack(test_views))
    raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")


def loocv_rmse(views: Sequence, Y, model_kind: str = "mdr", k: int | None = None, folds: int = 5,
               seed: int = 0, reg: float = DEFAULT_REG) -> LoocvResult:
    """Leave-one-out RMSE per target column and its mean over columns."""
    Y = _as_2d(Y)
    views = [_as_2d(v) for v in views]
    n = len(Y)
    if n < 4:
        raise ValueError("need at least 4 rows")
    preds = np.empty_like(Y)
    for i in range(n):
        keep = np.arange(n) != i
        preds[i] = np.ravel(_fit_predict(model_kind, [v[keep] for v in views], Y[keep],
                                         [v[i:i + 1] for v in views], k, folds, seed, reg))
    per_col = np.sqrt(np.mean((preds - Y) ** 2, axis=0))
    return LoocvResult(per_col, float(per_col.mean()), preds)
