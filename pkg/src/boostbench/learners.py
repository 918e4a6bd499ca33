"""Learner specification strings and a uniform ``fit`` entry point.

A spec is ``name`` or ``name(key=value, ...)``, for example
``adaboost(base=j48, I=20, P=90, Q=on, seed=7)``.  Parameter letters follow
the usual Weka names: I iterations, P weight mass percentage, Q resampling,
C pruning confidence, M minimum instances per branch, N pruning folds, R
reduced-error pruning, U unpruned.  ``l5`` takes its tuning grid as ranges,
``l5(P=10:100:10, I=10:50:10, folds=10)``, or as ``|``-separated lists.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any

import numpy as np

from .bayes import train_nb
from .boost import STUMP, BoostParams, boost_train, majority_model
from .dataset import Dataset
from .tree import PRUNE_CONFIDENCE, PRUNE_NONE, PRUNE_REDUCED_ERROR, TreeParams, train_stump, train_tree

_TREE_KEYS = {"C", "M", "N", "R", "U"}
_ALLOWED = {
    "majority": set(),
    "nb": set(),
    "stump": set(),
    "j48": _TREE_KEYS | {"seed"},
    "adaboost": _TREE_KEYS | {"base", "I", "P", "Q", "seed"},
    "lb": {"I", "P", "Q", "seed"},
    "l5": _TREE_KEYS | {"P", "I", "folds", "seed"},
}
_BOOL = {"on": True, "off": False, "true": True, "false": False, "yes": True, "no": False}
_SPEC_RE = re.compile(r"^\s*([A-Za-z0-9_]+)\s*(?:\((.*)\))?\s*$", re.S)


class LearnerSpecError(ValueError):
    pass


def _parse_value(text: str) -> Any:
    low = text.lower()
    if low in _BOOL:
        return _BOOL[low]
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    return text


def _format_value(v: Any) -> str:
    if isinstance(v, bool):
        return "on" if v else "off"
    if isinstance(v, tuple):
        return "|".join(_format_value(x) for x in v)
    return str(v)


@dataclass(frozen=True)
class LearnerSpec:
    name: str
    params: tuple[tuple[str, Any], ...] = ()

    def __post_init__(self):
        if self.name not in _ALLOWED:
            raise LearnerSpecError(f"unknown learner {self.name!r}")
        keys = [k for k, _ in self.params]
        if len(set(keys)) != len(keys):
            raise LearnerSpecError(f"duplicate parameter in {self.name}")
        bad = set(keys) - _ALLOWED[self.name]
        if bad:
            raise LearnerSpecError(f"{self.name} does not accept {', '.join(sorted(bad))}")

    @classmethod
    def parse(cls, text: str) -> "LearnerSpec":
        m = _SPEC_RE.match(text)
        if not m:
            raise LearnerSpecError(f"malformed learner spec {text!r}")
        name, body = m.group(1).lower(), m.group(2)
        params = []
        if body and body.strip():
            for item in body.split(","):
                key, eq, value = item.partition("=")
                if not eq or not key.strip() or not value.strip():
                    raise LearnerSpecError(f"expected key=value, got {item.strip()!r}")
                params.append((key.strip(), _parse_value(value.strip())))
        return cls(name, tuple(params))

    def get(self, key: str, default: Any = None) -> Any:
        return dict(self.params).get(key, default)

    def accepts(self, key: str) -> bool:
        return key in _ALLOWED[self.name]

    def with_params(self, **updates) -> "LearnerSpec":
        merged = dict(self.params)
        merged.update(updates)
        return LearnerSpec(self.name, tuple(merged.items()))

    def __str__(self) -> str:
        if not self.params:
            return self.name
        return f"{self.name}({', '.join(f'{k}={_format_value(v)}' for k, v in self.params)})"

    def fit(self, ds: Dataset):
        return fit_learner(self, ds)


def as_spec(spec: LearnerSpec | str) -> LearnerSpec:
    return spec if isinstance(spec, LearnerSpec) else LearnerSpec.parse(spec)


def _flag(spec: LearnerSpec, key: str, default: bool) -> bool:
    v = spec.get(key, default)
    if not isinstance(v, bool):
        raise LearnerSpecError(f"{key} must be on or off")
    return v


def _int(spec: LearnerSpec, key: str, default: int) -> int:
    v = spec.get(key, default)
    if isinstance(v, bool) or not isinstance(v, int):
        raise LearnerSpecError(f"{key} must be an integer")
    return v


def tree_params(spec: LearnerSpec) -> TreeParams:
    """C4.5 settings from the C, M, N, R, U letters of ``spec``."""
    C = spec.get("C", 0.25)
    if isinstance(C, bool) or not isinstance(C, (int, float)):
        raise LearnerSpecError("C must be a number")
    pruning = PRUNE_CONFIDENCE
    if _flag(spec, "R", False):
        pruning = PRUNE_REDUCED_ERROR
    if _flag(spec, "U", False):
        if pruning == PRUNE_REDUCED_ERROR:
            raise LearnerSpecError("R and U are mutually exclusive")
        pruning = PRUNE_NONE
    try:
        return TreeParams(
            confidence=float(C), min_instances=_int(spec, "M", 2), pruning=pruning,
            folds=_int(spec, "N", 3), seed=_int(spec, "seed", 1),
        )
    except ValueError as exc:
        raise LearnerSpecError(str(exc)) from None


def boost_params(spec: LearnerSpec) -> BoostParams:
    """AdaBoost settings for an ``adaboost`` or ``lb`` spec."""
    if spec.name == "lb":
        base = STUMP
    else:
        kind = str(spec.get("base", "stump")).lower()
        if kind == "stump":
            if any(spec.get(k) is not None for k in _TREE_KEYS):
                raise LearnerSpecError("tree parameters require base=j48")
            base = STUMP
        elif kind == "j48":
            base = tree_params(spec)
        else:
            raise LearnerSpecError(f"unknown base learner {kind!r}")
    try:
        return BoostParams(
            iterations=_int(spec, "I", 10), weight_threshold=_int(spec, "P", 100),
            use_resampling=_flag(spec, "Q", False), seed=_int(spec, "seed", 1), base=base,
        )
    except ValueError as exc:
        raise LearnerSpecError(str(exc)) from None


# L5 tuning grid defaults: P in 10..100 and I in 10..50, both in steps of 10.
L5_DEFAULT_GRID = "P=10:100:10,I=10:50:10"
L5_DEFAULT_FOLDS = 10


def l5_base_spec(spec: LearnerSpec) -> LearnerSpec:
    """The boosted-tree spec that an ``l5`` spec tunes over."""
    extra = {k: spec.get(k) for k in ("seed", *sorted(_TREE_KEYS)) if spec.get(k) is not None}
    return LearnerSpec("adaboost", (("base", "j48"), ("Q", True))).with_params(**extra)


def l5_grid(spec: LearnerSpec):
    from .select import ParamGrid

    grid = ParamGrid.parse(L5_DEFAULT_GRID)
    axes = []
    for name, values in grid.axes:
        raw = spec.get(name)
        if raw is None:
            axes.append((name, values))
        else:
            axes.append((name, ParamGrid.parse_values(name, str(raw))))
    return ParamGrid(tuple(axes))


@dataclass(frozen=True)
class TunedModel:
    """Final model of a tuned learner together with its tuning record."""

    model: Any
    tune: Any
    kind: str = "l5"

    @property
    def n_classes(self) -> int:
        return self.model.n_classes

    def predict_proba(self, data) -> np.ndarray:
        return self.model.predict_proba(data)

    def predict(self, data) -> np.ndarray:
        return self.model.predict(data)


def fit_learner(spec: LearnerSpec | str, ds: Dataset):
    spec = as_spec(spec)
    if spec.name == "majority":
        return majority_model(ds)
    if spec.name == "nb":
        return train_nb(ds)
    if spec.name == "stump":
        return train_stump(ds)
    if spec.name == "j48":
        return train_tree(ds, tree_params(spec))
    if spec.name in ("adaboost", "lb"):
        return boost_train(ds, boost_params(spec))
    # l5: cross-validated (P, I) selection, then a final fit on all of ds
    from .select import grid_select

    folds = _int(spec, "folds", L5_DEFAULT_FOLDS)
    result = grid_select(l5_base_spec(spec), l5_grid(spec), ds, folds, _int(spec, "seed", 1))
    return TunedModel(result.model, result)
