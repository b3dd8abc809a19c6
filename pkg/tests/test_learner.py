import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from profilematch.datamodel import ATTRIBUTES, Dataset, GroundTruth, Profile, SimilarityVector
from profilematch.learner import (
    ImputationTable, MatchModel, TrainingSet, build_training_set, fit_imputation, load_model, logreg_loss_grad,
    save_model, score_array, score_pair, train_linear_svm, train_logreg, train_model,
)
from profilematch.similarity import Resources


def central_difference(f, x, h=1e-5):
    g = np.empty_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def one_attr(pos, neg):
    X = np.array([[v] for v in list(pos) + list(neg)], dtype=float)
    y = np.array([1] * len(pos) + [0] * len(neg))
    return TrainingSet(X, y, ("username",))


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(0)
    X = rng.random((50, 9))
    y = rng.integers(0, 2, 50).astype(float)
    for _ in range(20):
        params = rng.normal(0, 1, 10)
        _, analytic = logreg_loss_grad(params, X, y, 1e-4)
        numeric = central_difference(lambda p: logreg_loss_grad(p, X, y, 1e-4)[0], params)
        rel = np.linalg.norm(analytic - numeric) / max(np.linalg.norm(numeric), 1e-12)
        assert rel < 1e-5


def test_imputation_separated_classes_lands_midway():
    imp = fit_imputation(one_attr([1.0] * 20, [0.0] * 20))
    assert abs(imp.values["username"] - 0.5) <= 0.05


def test_imputation_identical_classes_takes_lowest_bin():
    ts = one_attr([0.3, 0.6, 0.9], [0.3, 0.6, 0.9])
    assert fit_imputation(ts).values["username"] == pytest.approx(0.025)


def test_imputation_unobserved_attribute_defaults():
    ts = one_attr([np.nan, np.nan], [np.nan])
    imp = fit_imputation(ts)
    assert imp.values["username"] == 0.5 and imp.observed["username"] is False


def test_training_set_requires_both_classes():
    with pytest.raises(ValueError):
        TrainingSet(np.zeros((2, 1)), np.array([1, 1]), ("username",))


def _zero_model():
    imp = ImputationTable(dict.fromkeys(ATTRIBUTES, 0.5), dict.fromkeys(ATTRIBUTES, True))
    return MatchModel("logistic", np.zeros(9), 0.0, imp)


@given(st.lists(st.none() | st.floats(0, 1), min_size=9, max_size=9))
def test_zero_model_scores_half(values):
    sv = SimilarityVector(**dict(zip(ATTRIBUTES, values)))
    assert score_pair(_zero_model(), sv) == 0.5


def test_separable_logistic():
    ts = one_attr([1.0] * 10, [0.0] * 10)
    model = train_logreg(ts, fit_imputation(ts))
    assert model.weights[0] > 0
    pred = score_array(model, ts.X) > 0.5
    assert (pred == ts.y.astype(bool)).all()


def test_logistic_loss_never_increases():
    rng = np.random.default_rng(1)
    X = rng.random((200, 3))
    y = (X[:, 0] + 0.3 * rng.normal(size=200) > 0.5).astype(int)
    ts = TrainingSet(X, y, ("username", "location", "gender"))
    imp = fit_imputation(ts)
    losses = [train_logreg(ts, imp, lr=50.0, epochs=k).hyperparameters["final_loss"] for k in range(0, 30, 3)]
    assert all(b <= a for a, b in zip(losses, losses[1:]))


def test_separable_svm_and_determinism():
    ts = one_attr([1.0] * 10, [0.0] * 10)
    imp = fit_imputation(ts)
    model = train_linear_svm(ts, imp, seed=3)
    margins = ts.X[:, 0] * model.weights[0] + model.bias
    assert ((margins > 0) == ts.y.astype(bool)).all()
    again = train_linear_svm(ts, imp, seed=3)
    assert again.weights.tobytes() == model.weights.tobytes() and again.bias == model.bias


def test_svm_duplicated_set_keeps_decisions():
    rng = np.random.default_rng(2)
    # SGD only agrees up to its noise, so keep the classes apart by a margin
    X = rng.random((200, 2))
    X = X[np.abs(X[:, 0] - 0.5) > 0.15][:80]
    y = (X[:, 0] > 0.5).astype(int)
    ts = TrainingSet(X, y, ("username", "photo"))
    double = TrainingSet(np.vstack([X, X]), np.concatenate([y, y]), ts.attributes)
    a = train_linear_svm(ts, fit_imputation(ts), seed=0)
    b = train_linear_svm(double, fit_imputation(double), seed=0)
    assert ((score_array(a, X) > 0.5) == (score_array(b, X) > 0.5)).all()


@settings(max_examples=50)
@given(st.lists(st.floats(0, 1), min_size=9, max_size=9), st.integers(0, 8), st.floats(0, 1))
def test_score_monotone_in_positive_weights(values, k, bump):
    imp = ImputationTable(dict.fromkeys(ATTRIBUTES, 0.5), dict.fromkeys(ATTRIBUTES, True))
    model = MatchModel("logistic", np.linspace(0.1, 2.0, 9), -3.0, imp)
    x = np.array(values)
    y = x.copy()
    y[k] = max(x[k], bump)
    assert score_pair(model, y) >= score_pair(model, x)


def test_all_missing_scores_the_imputed_vector():
    imp = ImputationTable({a: 0.1 * i for i, a in enumerate(ATTRIBUTES)}, dict.fromkeys(ATTRIBUTES, True))
    model = MatchModel("linear_svm", np.ones(9), -1.0, imp)
    s = score_pair(model, SimilarityVector())
    assert 0.0 <= s <= 1.0
    assert s == pytest.approx(score_pair(model, imp.vector(ATTRIBUTES)))


def test_score_pair_order_mismatch():
    with pytest.raises(ValueError):
        score_pair(_zero_model(), np.zeros(9), order=ATTRIBUTES[::-1])


def test_weak_only_training_zeroes_other_weights():
    rng = np.random.default_rng(4)
    X = rng.random((60, 9))
    y = np.array([1, 0] * 30)
    X[y == 1] += 0.2
    ts = TrainingSet(np.clip(X, 0, 1), y)
    model = train_model(ts, "logistic", attributes=("activity", "freetext", "interest", "sentiment"))
    nonzero = {a for a, w in model.weight_table().items() if w != 0.0}
    assert nonzero == {"activity", "freetext", "interest", "sentiment"}


def test_unobserved_attribute_gets_zero_weight():
    rng = np.random.default_rng(5)
    X = rng.random((40, 9))
    X[:, ATTRIBUTES.index("graph")] = np.nan
    ts = TrainingSet(X, np.array([1, 0] * 20))
    model = train_model(ts, "svm")
    assert model.weight_table()["graph"] == 0.0 and "graph" not in model.active


def test_model_round_trip(tmp_path):
    rng = np.random.default_rng(6)
    ts = TrainingSet(rng.random((30, 9)), np.array([1, 0] * 15))
    model = train_model(ts)
    save_model(model, tmp_path / "m.json")
    again = load_model(tmp_path / "m.json")
    np.testing.assert_array_equal(score_array(again, ts.X), score_array(model, ts.X))


def test_build_training_set_row_count():
    aux = Dataset.from_profiles([Profile(f"a{i}", username=f"user{i}") for i in range(4)], "auxiliary", "training")
    tgt = Dataset.from_profiles([Profile(f"t{i}", username=f"user{i}") for i in range(4)], "target", "training")
    gt = GroundTruth(frozenset({("a0", "t0"), ("a1", "t1")}), frozenset({("a2", "t3"), ("a3", "t2"), ("a0", "t1")}))
    ts = build_training_set(gt, aux, tgt, Resources())
    assert len(ts) == 5 and ts.y.sum() == 2
    with pytest.raises(ValueError):
        build_training_set(GroundTruth(gt.coupled, frozenset()), aux, tgt, Resources())
