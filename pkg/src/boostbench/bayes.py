"""Naive Bayes reference classifier.

Nominal attributes use Laplace-smoothed frequency tables, numeric ones a
single Gaussian per class.  Pseudo-counts are measured in units of the mean
training weight, so they equal +1 for unit-weight data and the estimates
are unchanged when every weight is scaled by the same factor.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dataset import Attribute, Dataset, DatasetError, as_matrix

STD_FLOOR = 1e-6
_LOG_SQRT_2PI = 0.5 * math.log(2 * math.pi)


@dataclass(frozen=True)
class NominalEstimator:
    attribute: int
    counts: np.ndarray  # (n_classes, n_values), smoothed
    log_probs: np.ndarray

    @property
    def probs(self) -> np.ndarray:
        return np.exp(self.log_probs)


@dataclass(frozen=True)
class GaussianEstimator:
    attribute: int
    means: np.ndarray
    stds: np.ndarray

    def log_density(self, values: np.ndarray) -> np.ndarray:
        """(n, n_classes) log densities."""
        z = (values[:, None] - self.means[None, :]) / self.stds[None, :]
        return -0.5 * z * z - np.log(self.stds)[None, :] - _LOG_SQRT_2PI


@dataclass(frozen=True)
class NaiveBayesModel:
    priors: np.ndarray
    estimators: tuple
    attributes: tuple[Attribute, ...]
    class_index: int
    kind: str = "nb"

    @property
    def n_classes(self) -> int:
        return len(self.priors)

    def log_joint(self, data) -> np.ndarray:
        X = as_matrix(data, len(self.attributes))
        out = np.tile(np.log(self.priors), (X.shape[0], 1))
        for est in self.estimators:
            col = X[:, est.attribute]
            known = ~np.isnan(col)
            if not known.any():
                continue
            if isinstance(est, NominalEstimator):
                out[known] += est.log_probs[:, col[known].astype(np.intp)].T
            else:
                out[known] += est.log_density(col[known])
        return out

    def predict_proba(self, data) -> np.ndarray:
        lj = self.log_joint(data)
        lj -= lj.max(axis=1, keepdims=True)
        p = np.exp(lj)
        return p / p.sum(axis=1, keepdims=True)

    def predict(self, data) -> np.ndarray:
        return np.argmax(self.predict_proba(data), axis=1)


def train_nb(ds: Dataset) -> NaiveBayesModel:
    """Fit class priors and per-attribute conditionals from weighted data.

    Unknown cells are skipped attribute by attribute.  A class with no known
    value for a numeric attribute falls back to the pooled mean and standard
    deviation of that attribute.
    """
    if len(ds) == 0:
        raise DatasetError("cannot train Naive Bayes on an empty dataset")
    if np.any(ds.y < 0):
        raise DatasetError("training data has missing class values")
    K = ds.n_classes
    y, w = ds.y, ds.weights
    unit = float(w.sum()) / len(ds)
    class_w = np.bincount(y, weights=w, minlength=K)
    priors = (class_w + unit) / (class_w.sum() + K * unit)

    estimators = []
    for a in ds.feature_indices:
        attr = ds.attributes[a]
        col = ds.X[:, a]
        known = ~np.isnan(col)
        yk, wk, xk = y[known], w[known], col[known]
        if attr.is_nominal:
            V = attr.n_values
            counts = np.bincount(
                yk * V + xk.astype(np.intp), weights=wk, minlength=K * V
            ).reshape(K, V) + unit
            log_probs = np.log(counts) - np.log(counts.sum(axis=1, keepdims=True))
            estimators.append(NominalEstimator(a, counts, log_probs))
            continue
        if wk.sum() > 0:
            pooled_mean = float(np.average(xk, weights=wk))
            pooled_std = math.sqrt(float(np.average((xk - pooled_mean) ** 2, weights=wk)))
        else:
            pooled_mean, pooled_std = 0.0, 1.0
        means = np.full(K, pooled_mean)
        stds = np.full(K, max(pooled_std, STD_FLOOR))
        for c in range(K):
            sel = yk == c
            wc = wk[sel]
            if wc.sum() <= 0:
                continue
            m = float(np.average(xk[sel], weights=wc))
            var = float(np.average((xk[sel] - m) ** 2, weights=wc))
            means[c] = m
            stds[c] = max(math.sqrt(var), STD_FLOOR)
        estimators.append(GaussianEstimator(a, means, stds))
    return NaiveBayesModel(priors, tuple(estimators), ds.attributes, ds.class_index)


def predict_nb(model: NaiveBayesModel, x) -> np.ndarray:
    """Posterior class distribution for one instance; unknown cells are skipped."""
    return model.predict_proba(x)[0]
