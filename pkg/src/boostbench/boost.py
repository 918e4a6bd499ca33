"""AdaBoost.M1 over decision stumps or C4.5 trees.

The boosting distribution is kept normalized to sum 1.  Before a weak
model is fit, the selected instances are rescaled to mean weight 1 so that
the tree's minimum-weight-per-branch rule keeps its instance-count meaning.

Per-round randomness is drawn from streams keyed by (seed, round, attempt),
never by the iteration budget, so an ensemble trained for I rounds is a
prefix of the one trained for any larger budget with the same seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Union

import numpy as np

from ._rng import make_rng
from .dataset import Attribute, Dataset, DatasetError, as_matrix
from .tree import DecisionTreeModel, TreeParams, make_leaf, train_stump, train_tree

STUMP = "stump"
BETA_FLOOR = 1e-10
FALLBACK_EPSILON = 0.5 - 1e-6
RESAMPLE_RETRIES = 10
TOL = 1e-9

COMPLETED = "completed"
PERFECT_FIT = "perfect_fit"
ERROR_TOO_HIGH = "error_too_high"

BaseSpec = Union[str, TreeParams]


@dataclass(frozen=True)
class BoostParams:
    """AdaBoost.M1 settings: I rounds, weight-mass percentage P, resampling Q."""

    iterations: int = 10
    weight_threshold: int = 100
    use_resampling: bool = False
    seed: int = 1
    base: BaseSpec = STUMP

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations I must be >= 1")
        if not 1 <= self.weight_threshold <= 100:
            raise ValueError("weight threshold P must be in [1, 100]")
        if not (self.base == STUMP or isinstance(self.base, TreeParams)):
            raise ValueError("base must be 'stump' or TreeParams")


@dataclass(frozen=True)
class BoostRound:
    model: DecisionTreeModel
    epsilon: float
    beta: float
    vote: float


@dataclass(frozen=True)
class BoostEnsemble:
    rounds: tuple[BoostRound, ...]
    stop_reason: str
    attributes: tuple[Attribute, ...]
    class_index: int
    params: BoostParams
    kind: str = "adaboost"

    @property
    def n_classes(self) -> int:
        return self.attributes[self.class_index].n_values

    def scores(self, data) -> np.ndarray:
        if not self.rounds:
            raise ValueError("empty ensemble")
        X = as_matrix(data, len(self.attributes))
        out = np.zeros((X.shape[0], self.n_classes))
        rows = np.arange(X.shape[0])
        for r in self.rounds:
            out[rows, r.model.predict(X)] += r.vote
        return out

    def predict_proba(self, data) -> np.ndarray:
        s = self.scores(data)
        return s / s.sum(axis=1, keepdims=True)

    def predict(self, data) -> np.ndarray:
        return np.argmax(self.scores(data), axis=1)

    def truncated(self, n_rounds: int) -> "BoostEnsemble":
        """The ensemble a run with ``iterations=n_rounds`` would have produced."""
        if n_rounds >= len(self.rounds):
            stop = self.stop_reason
            if stop == ERROR_TOO_HIGH and n_rounds == len(self.rounds) and not self._first_round_failed:
                stop = COMPLETED  # the failing round lies beyond the shorter budget
            return replace(self, stop_reason=stop, params=replace(self.params, iterations=n_rounds))
        return replace(
            self, rounds=self.rounds[:n_rounds], stop_reason=COMPLETED,
            params=replace(self.params, iterations=n_rounds),
        )

    @property
    def _first_round_failed(self) -> bool:
        return self.stop_reason == ERROR_TOO_HIGH and len(self.rounds) == 1 and self.rounds[0].epsilon == FALLBACK_EPSILON

    def training_error_bound(self) -> float:
        return math.prod(2.0 * math.sqrt(r.epsilon * (1.0 - r.epsilon)) for r in self.rounds)


def ensemble_classify(ens: BoostEnsemble, x) -> np.ndarray:
    """Vote-weighted class distribution for one instance."""
    return ens.predict_proba(x)[0]


# ---------------------------------------------------------------------------
# Round primitives
# ---------------------------------------------------------------------------


def weighted_error(model, ds: Dataset) -> float:
    """Weight fraction of instances whose predicted class is wrong."""
    if len(ds) == 0:
        raise DatasetError("empty dataset")
    wrong = model.predict(ds) != ds.y
    return float(ds.weights[wrong].sum() / ds.weights.sum())


def _reweighted(w: np.ndarray, wrong: np.ndarray, epsilon: float) -> np.ndarray:
    beta = epsilon / (1.0 - epsilon)
    new = np.where(wrong, w, w * beta)
    return new / new.sum()


def reweight(ds: Dataset, model, epsilon: float) -> Dataset:
    """Multiply correctly classified weights by eps/(1-eps) and renormalize."""
    if not 0.0 < epsilon < 0.5:
        raise ValueError("epsilon must be in (0, 0.5)")
    wrong = model.predict(ds) != ds.y
    return ds.with_weights(_reweighted(ds.weights / ds.weights.sum(), wrong, epsilon))


def _trim_indices(w: np.ndarray, percent: int) -> np.ndarray:
    if percent >= 100:
        return np.arange(len(w))
    order = np.argsort(-w, kind="stable")
    cum = np.cumsum(w[order])
    target = percent / 100.0 * float(w.sum())
    keep = int(np.searchsorted(cum, target - 1e-12, side="left")) + 1
    return np.sort(order[: min(keep, len(w))])


def trim_by_weight_mass(ds: Dataset, percent: int) -> Dataset:
    """Heaviest instances whose weights first reach ``percent``% of the mass.

    Equal weights are ranked by original position; the result keeps the
    input order and the original weights.  ``percent=100`` returns ``ds``.
    """
    if not 1 <= percent <= 100:
        raise ValueError("percent must be in [1, 100]")
    if percent == 100:
        return ds
    return ds.subset(_trim_indices(ds.weights, percent))


def _resample_indices(w: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    cdf = np.cumsum(w)
    u = rng.random(n) * cdf[-1]
    return np.minimum(np.searchsorted(cdf, u, side="right"), len(w) - 1)


def weighted_resample(ds: Dataset, n: int, seed: int) -> Dataset:
    """``n`` draws with replacement, instance i with probability proportional to w_i.

    Inverse-CDF sampling from a PCG64 stream; every drawn instance gets
    weight ``1/n``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if len(ds) == 0:
        raise DatasetError("cannot resample an empty dataset")
    idx = _resample_indices(ds.weights, n, make_rng(seed, "resample"))
    return ds.subset(idx).with_weights(np.full(n, 1.0 / n))


def _fit_base(sample: Dataset, base: BaseSpec) -> DecisionTreeModel:
    scaled = sample.with_weights(sample.weights * (len(sample) / sample.weights.sum()))
    if base == STUMP:
        return train_stump(scaled)
    return train_tree(scaled, base)


def majority_model(ds: Dataset) -> DecisionTreeModel:
    return DecisionTreeModel(make_leaf(ds.class_weights()), ds.attributes, ds.class_index, None, "majority")


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------

RoundHook = Callable[[int, BoostRound, np.ndarray, np.ndarray], None]


def boost_train(ds: Dataset, params: BoostParams = BoostParams(), on_round: RoundHook | None = None) -> BoostEnsemble:
    """Train an AdaBoost.M1 ensemble.

    Each round trims the distribution to the heaviest ``P``% of mass, fits
    the base learner on the trimmed data (or on a weighted resample of it of
    the same size when resampling is on), and measures the error on the full
    training distribution.  A round with error >= 0.5 ends training; in
    resampling mode up to ten fresh samples are tried first.  If that
    happens in the first round, the round is kept with its error clamped
    just below 0.5, its model replaced by the majority class when that has
    lower error.  A perfect round is kept with its beta floored and ends
    training.

    ``on_round(t, round, weights, wrong)`` is called after every recorded
    round with the updated distribution and the round's error mask.
    """
    if len(ds) == 0:
        raise DatasetError("cannot boost on an empty dataset")
    if np.any(ds.y < 0):
        raise DatasetError("training data has missing class values")
    y = ds.y
    w = ds.weights / ds.weights.sum()
    rounds: list[BoostRound] = []
    stop = COMPLETED
    attempts = 1 + (RESAMPLE_RETRIES if params.use_resampling else 0)

    for t in range(params.iterations):
        keep = _trim_indices(w, params.weight_threshold)
        trimmed = ds.with_weights(w).subset(keep)
        for attempt in range(attempts):
            if params.use_resampling:
                rng = make_rng(params.seed, "round", t, attempt)
                idx = _resample_indices(trimmed.weights, len(trimmed), rng)
                sample = trimmed.subset(idx).with_weights(np.full(len(idx), 1.0 / len(idx)))
            else:
                sample = trimmed
            model = _fit_base(sample, params.base)
            wrong = model.predict(ds.X) != y
            eps = float(w[wrong].sum())
            if eps < 0.5 - TOL:
                break

        if eps >= 0.5 - TOL:
            stop = ERROR_TOO_HIGH
            if not rounds:
                # keep the first model (so I=1 still equals the base learner)
                # unless the majority class does better
                majority = majority_model(ds.with_weights(w))
                if eps > float(w[majority.predict(ds.X) != y].sum()) + TOL:
                    model = majority
                beta = FALLBACK_EPSILON / (1.0 - FALLBACK_EPSILON)
                rounds.append(BoostRound(model, FALLBACK_EPSILON, beta, math.log(1.0 / beta)))
            break
        if not wrong.any():
            rnd = BoostRound(model, 0.0, BETA_FLOOR, math.log(1.0 / BETA_FLOOR))
            rounds.append(rnd)
            if on_round is not None:
                on_round(t, rnd, w, wrong)
            stop = PERFECT_FIT
            break
        beta = eps / (1.0 - eps)
        rnd = BoostRound(model, eps, beta, math.log(1.0 / beta))
        rounds.append(rnd)
        w = _reweighted(w, wrong, eps)
        if on_round is not None:
            on_round(t, rnd, w, wrong)

    return BoostEnsemble(tuple(rounds), stop, ds.attributes, ds.class_index, params)


def training_error(ens: BoostEnsemble, ds: Dataset) -> float:
    wrong = ens.predict(ds) != ds.y
    return float(ds.weights[wrong].sum() / ds.weights.sum())
