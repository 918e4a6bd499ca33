import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from boostbench.boost import (
    BETA_FLOOR, COMPLETED, ERROR_TOO_HIGH, PERFECT_FIT, STUMP, BoostEnsemble, BoostParams,
    BoostRound, boost_train, ensemble_classify, majority_model, reweight, training_error,
    trim_by_weight_mass, weighted_error, weighted_resample,
)
from boostbench.dataset import DatasetError
from boostbench.learners import LearnerSpec, boost_params, fit_learner
from boostbench.tree import TreeParams, train_stump, train_tree
from conftest import make_dataset, small_fixtures

J48 = TreeParams()


class _Fixed:
    """Stand-in model with fixed predictions."""

    def __init__(self, labels):
        self.labels = np.asarray(labels)

    def predict(self, data):
        return self.labels


def checked_boost(ds, params):
    """boost_train plus the per-round reweight algebra and the final error bound."""
    seen = []

    def hook(t, rnd, w, wrong):
        assert 0.0 <= rnd.epsilon < 0.5 and rnd.vote > 0
        if rnd.epsilon > 0:
            assert w.sum() == pytest.approx(1.0, abs=1e-9)
            assert w[wrong].sum() == pytest.approx(0.5, abs=1e-9)
        seen.append(t)

    ens = boost_train(ds, params, on_round=hook)
    assert 1 <= len(ens.rounds) <= params.iterations
    err = training_error(ens, ds)
    assert err <= ens.training_error_bound() + 1e-12, (err, ens.training_error_bound())
    return ens, seen


# -- primitives --------------------------------------------------------------


def test_weighted_error_examples():
    ds = make_dataset(np.zeros(4), [0, 1, 0, 1]).with_weights([0.4, 0.3, 0.2, 0.1])
    assert weighted_error(_Fixed(ds.y), ds) == 0.0
    assert weighted_error(_Fixed([0, 0, 0, 0]), ds) == pytest.approx(0.4)
    balanced = make_dataset(np.zeros(4), [0, 1, 0, 1])
    assert weighted_error(_Fixed([1, 1, 1, 1]), balanced) == 0.5
    with pytest.raises(DatasetError):
        weighted_error(_Fixed([]), balanced.subset([]))


def test_reweight_by_hand():
    ds = make_dataset(np.zeros(4), [0, 0, 0, 1]).with_weights(np.full(4, 0.25))
    new = reweight(ds, _Fixed([0, 0, 0, 0]), 0.25)
    np.testing.assert_allclose(new.weights, [1 / 6, 1 / 6, 1 / 6, 1 / 2])
    assert BoostRound(None, 0.25, 1 / 3, math.log(3)).vote == pytest.approx(math.log(1 / (1 / 3)))
    with pytest.raises(ValueError):
        reweight(ds, _Fixed([0, 0, 0, 0]), 0.5)


@pytest.mark.acceptance("AC3")
@given(st.lists(st.floats(0.01, 10), min_size=2, max_size=30), st.data())
def test_reweight_algebra(weights, data):
    n = len(weights)
    wrong = np.array(data.draw(st.lists(st.booleans(), min_size=n, max_size=n)))
    w = np.array(weights) / sum(weights)
    eps = float(w[wrong].sum())
    if not 1e-6 < eps < 0.5 - 1e-6:
        return
    y = np.zeros(n, dtype=int)
    ds = make_dataset(np.zeros(n), y, n_classes=2).with_weights(w)
    new = reweight(ds, _Fixed(np.where(wrong, 1, 0)), eps)
    assert new.weights.sum() == pytest.approx(1.0, abs=1e-9)
    assert new.weights[wrong].sum() == pytest.approx(0.5, abs=1e-9)


def test_trim_examples():
    ds = make_dataset(np.arange(3.0), [0, 1, 0]).with_weights([0.2, 0.5, 0.3])
    assert trim_by_weight_mass(ds, 100) is ds
    kept = trim_by_weight_mass(ds, 70)
    assert kept.X[:, 0].tolist() == [1.0, 2.0]  # input order preserved
    uniform = make_dataset(np.arange(10.0), [0, 1] * 5).with_weights(np.full(10, 0.1))
    assert len(trim_by_weight_mass(uniform, 50)) == 5
    assert trim_by_weight_mass(uniform, 50).X[:, 0].tolist() == [0, 1, 2, 3, 4]  # ties by index
    with pytest.raises(ValueError):
        trim_by_weight_mass(ds, 0)


@given(st.lists(st.floats(0.01, 5), min_size=1, max_size=25), st.integers(1, 100))
def test_trim_is_minimal(weights, percent):
    w = np.array(weights) / sum(weights)
    ds = make_dataset(np.arange(len(w), dtype=float), np.zeros(len(w), dtype=int), n_classes=2).with_weights(w)
    kept = trim_by_weight_mass(ds, percent)
    target = percent / 100
    assert kept.weights.sum() >= target - 1e-9
    if percent < 100 and len(kept) > 1:
        assert kept.weights.sum() - kept.weights.min() < target - 1e-12
        # every dropped instance is at most as heavy as every kept one
        dropped = np.setdiff1d(np.arange(len(w)), kept.X[:, 0].astype(int))
        if len(dropped):
            assert w[dropped].max() <= kept.weights.min()


def test_resample_examples():
    # weights must stay positive, so "all mass" is all but 3e-300
    ds = make_dataset(np.arange(4.0), [0, 1, 0, 1]).with_weights([1e-300, 1e-300, 1.0, 1e-300])
    s = weighted_resample(ds, 7, seed=3)
    assert s.X[:, 0].tolist() == [2.0] * 7
    np.testing.assert_allclose(s.weights, 1 / 7)
    uni = make_dataset(np.arange(4.0), [0, 1, 0, 1]).with_weights(np.full(4, 0.25))
    assert weighted_resample(uni, 50, 9) == weighted_resample(uni, 50, 9)
    with pytest.raises(ValueError):
        weighted_resample(uni, 0, 1)


def test_resample_concentration():
    # binomial sigma = sqrt(10000 * 0.25 * 0.75) ~ 43.3; a 4-sigma band fails with p < 3e-4 per seed
    uni = make_dataset(np.arange(4.0), [0, 1, 0, 1]).with_weights(np.full(4, 0.25))
    counts = np.bincount(weighted_resample(uni, 10_000, 2024).X[:, 0].astype(int), minlength=4)
    sigma = math.sqrt(10_000 * 0.25 * 0.75)
    assert (np.abs(counts - 2500) <= 4 * sigma).all()


# -- ensembles ---------------------------------------------------------------


def test_vote_rule():
    ds = make_dataset(np.zeros(1), [0], n_classes=2)

    def const(c, vote):
        return BoostRound(_Fixed([c]), 0.1, 0.1, vote)

    ens = BoostEnsemble((const(0, 1.0), const(0, 1.0), const(1, 1.0)), COMPLETED, ds.attributes, 1, BoostParams())
    assert ens.predict(ds)[0] == 0
    ens = BoostEnsemble((const(0, math.log(3)), const(1, math.log(9))), COMPLETED, ds.attributes, 1, BoostParams())
    assert ens.predict(ds)[0] == 1
    np.testing.assert_allclose(ensemble_classify(ens, [0.0, 0]), [1 / 3, 2 / 3])
    with pytest.raises(ValueError):
        BoostEnsemble((), ERROR_TOO_HIGH, ds.attributes, 1, BoostParams()).predict(ds)


def test_separable_data_stops_after_one_round():
    ds = make_dataset(np.arange(10.0), [0] * 5 + [1] * 5)
    ens, _ = checked_boost(ds, BoostParams())
    assert len(ens.rounds) == 1 and ens.stop_reason == PERFECT_FIT
    assert ens.rounds[0].beta == BETA_FLOOR


def test_xor_stump_trace(fixtures):
    # every stump on uniform XOR errs on half the mass: round one fails and
    # is kept with its error clamped just below 0.5
    ens, seen = checked_boost(fixtures["xor"], BoostParams(iterations=10))
    assert ens.stop_reason == ERROR_TOO_HIGH and seen == []
    assert [r.epsilon for r in ens.rounds] == [0.5 - 1e-6]
    assert training_error(ens, fixtures["xor"]) == 0.5


def test_hand_trace_three_rounds():
    # x = 1..4 labelled A A B A, stumps, uniform start
    ds = make_dataset([1.0, 2.0, 3.0, 4.0], [0, 0, 1, 0])
    ens, _ = checked_boost(ds, BoostParams(iterations=3))
    eps = [r.epsilon for r in ens.rounds]
    np.testing.assert_allclose(eps, [1 / 4, 1 / 6, 1 / 5], atol=1e-12)
    np.testing.assert_allclose([r.vote for r in ens.rounds], np.log([3, 5, 4]), atol=1e-9)
    thresholds = [getattr(r.model.root, "test", None) for r in ens.rounds]
    assert thresholds[0] is None
    assert (thresholds[1].threshold, thresholds[2].threshold) == (2.5, 3.5)
    assert training_error(ens, ds) == 0.0 and ens.stop_reason == COMPLETED


def test_first_round_failure_in_resampling_mode(fixtures):
    ens, _ = checked_boost(fixtures["xor"], BoostParams(use_resampling=True))
    assert ens.stop_reason == ERROR_TOO_HIGH and len(ens.rounds) == 1
    assert len(set(ens.predict(fixtures["xor"]))) == 1


def test_first_round_failure_prefers_better_of_model_and_majority(suite_datasets):
    # a multiclass stump errs on more than half of vowel but beats the majority class
    ds = suite_datasets["vowel"]
    ens = boost_train(ds, BoostParams())
    assert ens.stop_reason == ERROR_TOO_HIGH and len(ens.rounds) == 1
    assert ens.rounds[0].model.kind == "stump"
    assert training_error(ens, ds) <= training_error(majority_model(ds), ds)
    assert ens.truncated(1).stop_reason == ERROR_TOO_HIGH


def test_boost_does_not_touch_input(weather):
    before = weather.weights.copy()
    boost_train(weather, BoostParams(weight_threshold=60, use_resampling=True))
    np.testing.assert_array_equal(weather.weights, before)


def test_params_validation():
    for bad in ({"iterations": 0}, {"weight_threshold": 0}, {"weight_threshold": 101}, {"base": "nb"}):
        with pytest.raises(ValueError):
            BoostParams(**bad)
    with pytest.raises(DatasetError):
        boost_train(make_dataset([1.0], [0]).subset([]))


CONFIGS = {
    "lb": BoostParams(),
    "stump-p60": BoostParams(iterations=15, weight_threshold=60),
    "j48-resample": BoostParams(iterations=10, weight_threshold=80, use_resampling=True, base=J48),
    "j48-reweight": BoostParams(iterations=5, base=TreeParams(min_instances=1)),
}


@pytest.mark.acceptance("AC2")
@pytest.mark.acceptance("AC3")
@pytest.mark.parametrize("config", sorted(CONFIGS))
@pytest.mark.parametrize("name", sorted(small_fixtures()))
def test_bound_on_fixtures(fixtures, name, config):
    checked_boost(fixtures[name], CONFIGS[config])


@pytest.mark.acceptance("AC2")
@pytest.mark.acceptance("AC3")
@pytest.mark.parametrize("config", ["lb", "j48-resample"])
def test_bound_on_suite(suite_datasets, config):
    assert len(suite_datasets) >= 10
    for ds in suite_datasets.values():
        checked_boost(ds, CONFIGS[config])


@pytest.mark.acceptance("AC2")
@given(st.integers(0, 10_000), st.integers(1, 100), st.booleans(), st.integers(1, 12))
def test_bound_on_random_data(seed, percent, resample, rounds):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(40, 2))
    y = ((X[:, 0] > 0) ^ (rng.random(40) < 0.2)).astype(int)
    checked_boost(make_dataset(X, y), BoostParams(rounds, percent, resample, seed))


# -- degeneracy and defaults -----------------------------------------------------


@pytest.mark.acceptance("AC9")
@pytest.mark.parametrize("base", ["stump", "j48"])
@pytest.mark.parametrize("name", sorted(small_fixtures()))
def test_single_round_equals_base(fixtures, name, base):
    ds = fixtures[name]
    params = BoostParams(iterations=1, weight_threshold=100, use_resampling=False, base=STUMP if base == "stump" else J48)
    ens = boost_train(ds, params)
    plain = train_stump(ds) if base == "stump" else train_tree(ds, J48)
    np.testing.assert_array_equal(ens.predict(ds), plain.predict(ds))


@pytest.mark.acceptance("AC9")
def test_single_round_equals_base_on_suite(suite_datasets):
    for name, ds in suite_datasets.items():
        for base, plain in ((STUMP, train_stump(ds)), (J48, train_tree(ds, J48))):
            ens = boost_train(ds, BoostParams(iterations=1, base=base))
            np.testing.assert_array_equal(ens.predict(ds), plain.predict(ds), err_msg=name)


@pytest.mark.acceptance("AC9")
def test_lb_is_default_stump_boosting(fixtures):
    lb = boost_params(LearnerSpec.parse("lb"))
    assert lb == boost_params(LearnerSpec.parse("adaboost(base=stump)")) == BoostParams()
    assert (lb.iterations, lb.weight_threshold, lb.use_resampling, lb.base) == (10, 100, False, STUMP)
    for ds in fixtures.values():
        a = fit_learner("lb", ds)
        b = fit_learner("adaboost(base=stump)", ds)
        np.testing.assert_array_equal(a.predict(ds), b.predict(ds))
        assert [r.epsilon for r in a.rounds] == [r.epsilon for r in b.rounds]


# -- determinism and prefixes -----------------------------------------------------


def test_determinism(weather):
    p = BoostParams(iterations=8, weight_threshold=70, use_resampling=True, seed=5, base=J48)
    a, b = boost_train(weather, p), boost_train(weather, p)
    assert [r.epsilon for r in a.rounds] == [r.epsilon for r in b.rounds]
    np.testing.assert_array_equal(a.scores(weather), b.scores(weather))


@pytest.mark.parametrize("resample", [False, True])
def test_shorter_budget_is_a_prefix(suite_datasets, resample):
    ds = suite_datasets["diabetes"]
    long = boost_train(ds, BoostParams(iterations=12, weight_threshold=70, use_resampling=resample, base=J48))
    for n in (1, 5, 12):
        short = boost_train(ds, BoostParams(iterations=n, weight_threshold=70, use_resampling=resample, base=J48))
        cut = long.truncated(n)
        assert [r.epsilon for r in short.rounds] == [r.epsilon for r in cut.rounds]
        np.testing.assert_array_equal(short.scores(ds), cut.scores(ds))
        assert short.stop_reason == cut.stop_reason and short.params == cut.params
