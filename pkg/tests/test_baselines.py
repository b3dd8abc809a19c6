import numpy as np
import pytest

from profilematch.baselines import (
    DEFAULT_PARAMS, PairPrediction, classify_grid, classify_pairs, evaluate_baseline, train_baseline,
)
from profilematch.datamodel import ATTRIBUTES, GroundTruth
from profilematch.learner import TrainingSet


def noisy_set(n=200, seed=0):
    rng = np.random.default_rng(seed)
    y = np.array([1, 0] * (n // 2))
    X = np.clip(rng.normal(0.3 + 0.4 * y[:, None], 0.2, (n, 9)), 0, 1)
    X[:, ATTRIBUTES.index("graph")] = np.nan
    X[rng.random((n, 9)) < 0.1] = np.nan
    return TrainingSet(X, y)


def separable_set():
    X = np.full((20, 9), np.nan)
    X[:, 0] = [1.0] * 10 + [0.0] * 10
    return TrainingSet(X, np.array([1] * 10 + [0] * 10))


def test_forest_defaults_to_400_trees():
    assert DEFAULT_PARAMS["forest"]["trees"] == 400
    model = train_baseline("forest", noisy_set(), params={"trees": 400})
    assert len(model.estimator.estimators_) == 400


def test_forest_score_is_tree_mean_and_deterministic():
    ts = noisy_set()
    a = train_baseline("forest", ts, seed=3)
    b = train_baseline("forest", ts, seed=3)
    s = a.scores(ts.X)
    assert ((s >= 0) & (s <= 1)).all()
    np.testing.assert_allclose(s, a.tree_scores(ts.X).mean(axis=0), atol=1e-12)
    np.testing.assert_array_equal(s, b.scores(ts.X))


def test_cart_single_split_on_separable_data():
    ts = separable_set()
    model = train_baseline("cart", ts)
    assert model.estimator.get_depth() == 1
    assert ((model.scores(ts.X) > 0.5) == ts.y.astype(bool)).all()


def test_knn_one_neighbour_recovers_training_row():
    ts = noisy_set()
    model = train_baseline("knn", ts, params={"k": 1})
    row = ts.X[ts.y == 1][:1]
    assert model.scores(row)[0] == 1.0


def test_default_attributes_are_observed_strong_identifiers():
    model = train_baseline("cart", noisy_set())
    assert model.attributes == ("username", "location", "gender", "photo")


def test_unknown_kind_rejected():
    with pytest.raises(ValueError):
        train_baseline("boosting", noisy_set())


def test_unreachable_cutoff_predicts_nothing():
    ts = noisy_set()
    model = train_baseline("svm", ts)
    pairs = [(f"a{i}", f"t{i}") for i in range(len(ts))]
    assert len(classify_pairs(model, pairs, ts.X, cutoff=1.01)) == 0


def test_cutoff_monotone_and_pairwise_independent():
    ts = noisy_set()
    model = train_baseline("knn", ts)
    pairs = [(f"a{i}", f"t{i}") for i in range(len(ts))]
    sizes = [len(classify_pairs(model, pairs, ts.X, c)) for c in (0.0, 0.3, 0.5, 0.8, 1.0)]
    assert all(b <= a for a, b in zip(sizes, sizes[1:]))
    full = set(classify_pairs(model, pairs, ts.X).pairs)
    part = set(classify_pairs(model, pairs[:50], ts.X[:50]).pairs)
    assert part == {p for p in full if p in set(pairs[:50])}


def test_grid_matches_flat_classification():
    ts = noisy_set()
    model = train_baseline("cart", ts)
    sims = ts.X[:12].reshape(3, 4, 9)
    grid = classify_grid(model, ["a0", "a1", "a2"], ["t0", "t1", "t2", "t3"], sims)
    pairs = [(f"a{i}", f"t{j}") for i in range(3) for j in range(4)]
    assert set(grid.pairs) == set(classify_pairs(model, pairs, ts.X[:12]).pairs)


def test_evaluate_baseline_examples():
    gt = GroundTruth(frozenset(("a%d" % i, "t%d" % i) for i in range(500)), frozenset())
    exact = evaluate_baseline(PairPrediction(tuple(sorted(gt.coupled)), (1.0,) * 500), gt)
    assert exact.precision == exact.recall == 1.0
    grid = [(f"a{i}", f"t{j}") for i in range(1000) for j in range(1000)]
    everything = evaluate_baseline(grid, gt)
    assert everything.precision == 500 / 10**6
    empty = evaluate_baseline([], gt)
    assert empty.recall == 0.0 and empty.degenerate_precision


def test_forest_variance_shrinks_with_more_trees():
    ts = noisy_set(seed=1)
    probe = noisy_set(n=40, seed=2).X

    def spread(trees):
        runs = np.array([train_baseline("forest", ts, {"trees": trees}, seed=s).scores(probe) for s in range(5)])
        return runs.std(axis=0).mean()

    assert spread(400) < spread(10)
