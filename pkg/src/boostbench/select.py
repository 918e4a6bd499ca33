"""Stratified cross-validation and exhaustive grid tuning.

Every grid point is scored on the same fold partition.  For boosting
learners the points that differ only in the iteration count share one
training run per fold: the ensemble for a smaller I is a prefix of the one
for the largest I, so it is obtained by truncation, with identical results.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass
from typing import Any, Callable, Sequence, Union

import numpy as np

from .dataset import Dataset, DatasetError, FoldPartition, stratified_folds
from .learners import LearnerSpec, as_spec, fit_learner

CV_TIE_TOL = 1e-12

Learner = Union[LearnerSpec, str, Callable[[Dataset], Any]]


class FoldReductionWarning(UserWarning):
    """Raised when k exceeds the smallest class count and is reduced."""


@dataclass(frozen=True)
class ParamGrid:
    axes: tuple[tuple[str, tuple], ...]

    def __post_init__(self):
        if not self.axes:
            raise ValueError("grid needs at least one axis")
        names = [n for n, _ in self.axes]
        if len(set(names)) != len(names):
            raise ValueError("duplicate grid axis")
        for name, values in self.axes:
            if not values:
                raise ValueError(f"grid axis {name} is empty")
            if len(set(values)) != len(values):
                raise ValueError(f"grid axis {name} has repeated values")

    @staticmethod
    def parse_values(name: str, text: str) -> tuple:
        """``start:stop:step`` (inclusive), ``a|b|c`` or a single value."""
        text = text.strip()
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise ValueError(f"axis {name}: range must be start:stop:step")
            try:
                start, stop, step = (int(p) for p in parts)
            except ValueError:
                raise ValueError(f"axis {name}: range bounds must be integers") from None
            if step <= 0 or stop < start:
                raise ValueError(f"axis {name}: empty range {text!r}")
            return tuple(range(start, stop + 1, step))
        out = []
        for tok in text.split("|"):
            tok = tok.strip()
            try:
                out.append(int(tok))
            except ValueError:
                try:
                    out.append(float(tok))
                except ValueError:
                    raise ValueError(f"axis {name}: bad value {tok!r}") from None
        return tuple(out)

    @classmethod
    def parse(cls, text: str) -> "ParamGrid":
        """Parse ``"P=10:100:10,I=10:50:10"``."""
        axes = []
        for item in text.split(","):
            name, eq, values = item.partition("=")
            if not eq or not name.strip():
                raise ValueError(f"bad grid axis {item.strip()!r}")
            axes.append((name.strip(), cls.parse_values(name.strip(), values)))
        return cls(tuple(axes))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.axes)

    def points(self) -> list[dict[str, Any]]:
        """All assignments, the last axis varying fastest."""
        return [dict(zip(self.names, combo)) for combo in itertools.product(*(v for _, v in self.axes))]

    def __len__(self) -> int:
        return int(np.prod([len(v) for _, v in self.axes]))

    def __str__(self) -> str:
        return ",".join(f"{n}={'|'.join(str(v) for v in vals)}" for n, vals in self.axes)


DEFAULT_L5_GRID = ParamGrid.parse("P=10:100:10,I=10:50:10")


@dataclass(frozen=True)
class TuneResult:
    chosen: dict[str, Any]
    cv_errors: tuple[tuple[dict[str, Any], float], ...]
    folds: int
    model: Any = None

    def error_of(self, point: dict[str, Any]) -> float:
        for p, e in self.cv_errors:
            if p == point:
                return e
        raise KeyError(point)


def effective_folds(ds: Dataset, k: int) -> int:
    """``k`` reduced to the smallest non-empty class count, never below 2.

    ``k == len(ds)`` is leave-one-out and is kept as requested.
    """
    if k < 2:
        raise ValueError("k must be at least 2")
    if k == len(ds):
        return k
    counts = np.bincount(ds.y[ds.y >= 0], minlength=ds.n_classes)
    smallest = int(counts[counts > 0].min()) if counts.any() else 0
    k_eff = max(2, min(k, smallest))
    if k_eff < k:
        warnings.warn(
            f"{k}-fold cross-validation reduced to {k_eff} folds: smallest class has {smallest} instances",
            FoldReductionWarning, stacklevel=3,
        )
    return k_eff


def _fitter(learner: Learner) -> Callable[[Dataset], Any]:
    if callable(learner) and not isinstance(learner, LearnerSpec):
        return learner
    spec = as_spec(learner)
    return lambda ds: fit_learner(spec, ds)


def _fold_wrong(model, test: Dataset) -> float:
    return float(test.weights[model.predict(test) != test.y].sum())


def make_folds(ds: Dataset, k: int, seed: int) -> FoldPartition:
    if len(ds) == 0:
        raise DatasetError("cannot cross-validate on an empty dataset")
    return stratified_folds(ds, effective_folds(ds, k), seed)


def _cv_on_folds(fit: Callable[[Dataset], Any], ds: Dataset, folds: FoldPartition) -> float:
    wrong = 0.0
    for train_idx, test_idx in folds.splits():
        wrong += _fold_wrong(fit(ds.subset(train_idx)), ds.subset(test_idx))
    return wrong / float(ds.weights.sum())


def cv_error(learner: Learner, ds: Dataset, k: int = 10, seed: int = 1) -> float:
    """Stratified k-fold misclassified weight over total weight.

    ``learner`` is a spec (string or :class:`LearnerSpec`) or any callable
    mapping a training set to a model with ``predict``.  ``k`` is reduced,
    with a :class:`FoldReductionWarning`, when a class has fewer members.
    """
    return _cv_on_folds(_fitter(learner), ds, make_folds(ds, k, seed))


def _tie_key(point: dict[str, Any], order: int) -> tuple:
    return (point.get("I", 0), -point.get("P", 0), order)


def choose(cv_errors: Sequence[tuple[dict[str, Any], float]]) -> dict[str, Any]:
    """Minimal cv error; ties go to smaller I, then larger P, then grid order."""
    best = min(e for _, e in cv_errors)
    tied = [(p, i) for i, (p, e) in enumerate(cv_errors) if e <= best + CV_TIE_TOL]
    return min(tied, key=lambda pi: _tie_key(*pi))[0]


def _grid_errors_prefix(spec: LearnerSpec, grid: ParamGrid, ds: Dataset, folds: FoldPartition) -> list[float]:
    points = grid.points()
    groups: dict[tuple, list[int]] = {}
    for i, p in enumerate(points):
        groups.setdefault(tuple((k, v) for k, v in p.items() if k != "I"), []).append(i)
    wrong = np.zeros(len(points))
    for train_idx, test_idx in folds.splits():
        train, test = ds.subset(train_idx), ds.subset(test_idx)
        for rest, members in groups.items():
            top = max(points[i]["I"] for i in members)
            full = fit_learner(spec.with_params(**dict(rest), I=top), train)
            for i in members:
                wrong[i] += _fold_wrong(full.truncated(points[i]["I"]), test)
    total = float(ds.weights.sum())
    return [float(x) / total for x in wrong]


def grid_select(
    base_spec: LearnerSpec | str, grid: ParamGrid, ds: Dataset, k: int = 10, seed: int = 1,
    refit: bool = True,
) -> TuneResult:
    """Score every grid point by cross-validation and refit the best one.

    All points share one stratified fold partition derived from ``seed``.
    Grid axes name learner-spec parameters (``P``, ``I``, ``C``, ...).  The
    final model is trained on all of ``ds`` unless ``refit`` is false.
    """
    spec = as_spec(base_spec)
    for name in grid.names:
        if not spec.accepts(name):
            raise ValueError(f"{spec.name} has no parameter {name!r} to tune")
    folds = make_folds(ds, k, seed)
    points = grid.points()
    if spec.name in ("adaboost", "lb") and "I" in grid.names:
        errors = _grid_errors_prefix(spec, grid, ds, folds)
    else:
        errors = [_cv_on_folds(_fitter(spec.with_params(**p)), ds, folds) for p in points]
    table = tuple(zip(points, errors))
    chosen = choose(table)
    model = fit_learner(spec.with_params(**chosen), ds) if refit else None
    return TuneResult(chosen, table, folds.k, model)
