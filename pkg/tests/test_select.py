import warnings

import numpy as np
import pytest

from boostbench.boost import BoostParams, boost_train
from boostbench.dataset import DatasetError, stratified_folds
from boostbench.learners import LearnerSpec, fit_learner
from boostbench.select import (
    DEFAULT_L5_GRID, FoldReductionWarning, ParamGrid, _cv_on_folds, _grid_errors_prefix,
    choose, cv_error, grid_select, make_folds,
)
from boostbench.tree import TreeParams, train_stump
from conftest import make_dataset
from oracles import leave_one_out

BOOSTED_J48 = "adaboost(base=j48, Q=on)"


def noisy_quadrants(seed, n=60):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 2))
    y = ((X[:, 0] * X[:, 1] > 0) ^ (rng.random(n) < 0.15)).astype(int)
    return make_dataset(X, y)


def independent_cv(ds, P, I, k, seed):
    """Per-point cross-validation written directly against boost_train."""
    folds = stratified_folds(ds, k, seed)
    wrong = 0.0
    for f in range(k):
        train, test = ds.subset(folds.train_indices(f)), ds.subset(folds.test_indices(f))
        model = boost_train(train, BoostParams(I, P, True, 1, TreeParams()))
        wrong += test.weights[model.predict(test) != test.y].sum()
    return wrong / ds.weights.sum()


# -- grids --------------------------------------------------------------------


def test_grid_parsing():
    assert len(DEFAULT_L5_GRID) == 50
    assert DEFAULT_L5_GRID.axes[0] == ("P", tuple(range(10, 101, 10)))
    assert DEFAULT_L5_GRID.axes[1] == ("I", (10, 20, 30, 40, 50))
    g = ParamGrid.parse("P=50|100, I=10|30")
    assert g.points() == [{"P": 50, "I": 10}, {"P": 50, "I": 30}, {"P": 100, "I": 10}, {"P": 100, "I": 30}]
    assert ParamGrid.parse(str(g)) == g
    assert ParamGrid.parse("C=0.1|0.25").axes == (("C", (0.1, 0.25)),)


@pytest.mark.parametrize("text", ["", "P", "P=", "P=10:5:1", "P=1:10", "P=1|1", "P=a", "P=1,P=2"])
def test_grid_errors(text):
    with pytest.raises(ValueError):
        ParamGrid.parse(text)


# -- cross-validation -----------------------------------------------------------


def test_majority_cv_error():
    ds = make_dataset(np.zeros(100), [0] * 90 + [1] * 10)
    assert cv_error("majority", ds, k=10, seed=4) == pytest.approx(0.1)


def test_perfect_learner_cv_error():
    ds = make_dataset(np.arange(40.0), [0] * 20 + [1] * 20)
    assert cv_error("stump", ds, k=10) == 0.0


def test_leave_one_out_matches_oracle():
    ds = make_dataset([1.0, 2.0, 3.0, 4.0, 5.0, 6.0], [0, 0, 1, 0, 1, 1])
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        got = cv_error(train_stump, ds, k=len(ds))
    assert got == pytest.approx(leave_one_out(train_stump, ds), abs=1e-12)


def test_fold_reduction_warns():
    ds = make_dataset(np.arange(23.0), [0] * 20 + [1] * 3)
    with pytest.warns(FoldReductionWarning, match="reduced to 3"):
        part = make_folds(ds, 10, 1)
    assert part.k == 3
    with pytest.warns(FoldReductionWarning):
        assert grid_select("lb", ParamGrid.parse("I=1|2"), ds, k=10).folds == 3


def test_cv_error_rejects_empty():
    ds = make_dataset(np.arange(4.0), [0, 1, 0, 1])
    with pytest.raises(DatasetError):
        cv_error("nb", ds.subset([]))


def test_cv_error_range(fixtures):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", FoldReductionWarning)
        for name in ("weather", "gaussian3", "three_class"):
            assert 0.0 <= cv_error("j48", fixtures[name], k=3) <= 1.0


# -- grid selection ------------------------------------------------------------


@pytest.mark.acceptance("AC7")
def test_two_by_two_grid_matches_exhaustive():
    ds = noisy_quadrants(2)
    grid = ParamGrid.parse("P=50|100,I=10|20")
    result = grid_select(BOOSTED_J48, grid, ds, k=5, seed=1)
    oracle = {(p["P"], p["I"]): independent_cv(ds, p["P"], p["I"], 5, 1) for p in grid.points()}
    for point, err in result.cv_errors:
        assert err == pytest.approx(oracle[point["P"], point["I"]], abs=1e-12)
    best = min(oracle, key=oracle.get)
    assert best == (100, 20) and sorted(oracle.values())[1] > oracle[best]  # strict minimum
    assert result.chosen == {"P": 100, "I": 20}
    assert result.folds == 5


@pytest.mark.acceptance("AC7")
def test_engineered_tie():
    # class equals an interleaved nominal attribute, so every trimmed subset
    # still holds both classes and every grid point scores zero
    ds = make_dataset([0, 1] * 15, [0, 1] * 15, kinds="n")
    result = grid_select(BOOSTED_J48, ParamGrid.parse("P=50|100,I=10|20"), ds, k=5)
    assert {e for _, e in result.cv_errors} == {0.0}
    assert result.chosen == {"P": 100, "I": 10}


@pytest.mark.acceptance("AC7")
def test_tie_rule_order():
    def pt(P, I):
        return {"P": P, "I": I}

    assert choose([(pt(50, 20), 0.1), (pt(100, 10), 0.1)]) == pt(100, 10)
    # smaller I wins over larger P
    assert choose([(pt(100, 20), 0.1), (pt(50, 10), 0.1)]) == pt(50, 10)
    assert choose([(pt(50, 10), 0.1), (pt(100, 10), 0.1)]) == pt(100, 10)
    assert choose([(pt(50, 10), 0.1), (pt(100, 10), 0.2)]) == pt(50, 10)
    assert choose([({"C": 0.1}, 0.3), ({"C": 0.25}, 0.3)]) == {"C": 0.1}  # then grid order


def test_single_point_grid(weather):
    result = grid_select("lb", ParamGrid.parse("I=5"), weather, k=3)
    assert result.chosen == {"I": 5}


def test_refit_on_full_data(fixtures):
    ds = fixtures["gaussian3"]
    result = grid_select(BOOSTED_J48, ParamGrid.parse("P=60|100,I=2|4"), ds, k=4)
    again = fit_learner(LearnerSpec.parse(BOOSTED_J48).with_params(**result.chosen), ds)
    np.testing.assert_array_equal(result.model.predict(ds), again.predict(ds))
    assert grid_select(BOOSTED_J48, ParamGrid.parse("I=2"), ds, k=4, refit=False).model is None


def test_grid_axes_must_be_parameters(weather):
    with pytest.raises(ValueError, match="no parameter"):
        grid_select("nb", ParamGrid.parse("I=1|2"), weather, k=3)


def test_bit_identical_tables(fixtures):
    ds = fixtures["gaussian3"]
    grid = ParamGrid.parse("P=40|100,I=1|3")
    a = grid_select(BOOSTED_J48, grid, ds, k=5, seed=9)
    b = grid_select(BOOSTED_J48, grid, ds, k=5, seed=9)
    assert a.cv_errors == b.cv_errors and a.chosen == b.chosen


@pytest.mark.parametrize("spec", [BOOSTED_J48, "adaboost(base=j48)", "lb"])
def test_prefix_sharing_equals_naive(suite_datasets, spec):
    ds = suite_datasets["heart-c"].subset(range(120))
    grid = ParamGrid.parse("P=60|100,I=1|3|6")
    folds = make_folds(ds, 5, 3)
    fast = _grid_errors_prefix(LearnerSpec.parse(spec), grid, ds, folds)
    base = LearnerSpec.parse(spec)
    naive = [_cv_on_folds(lambda d, p=p: fit_learner(base.with_params(**p), d), ds, folds) for p in grid.points()]
    assert fast == naive


def test_tuning_other_parameters(weather):
    result = grid_select("j48", ParamGrid.parse("C=0.1|0.25|0.5,M=1|2"), weather, k=3)
    assert set(result.chosen) == {"C", "M"} and len(result.cv_errors) == 6
