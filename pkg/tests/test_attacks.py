import numpy as np
import pytest

from profilematch.assignment import IdAssignment, match_profiles
from profilematch.attacks import (
    INTERSECTION, average_metrics, evaluate, global_attack, pr_sweep, save_curve, targeted_attack,
)
from profilematch.datamodel import ATTRIBUTES, GroundTruth, SimilarityMatrix
from profilematch.learner import ImputationTable, MatchModel


def gt_pairs(n):
    return GroundTruth(frozenset((f"a{i}", f"t{i}") for i in range(n)), frozenset())


def test_perfect_assignment_scores_one():
    gt = gt_pairs(3)
    a = IdAssignment(tuple(sorted(gt.coupled)), (0.9, 0.9, 0.9), 2.7)
    m = evaluate(a, gt, 0.5)
    assert (m.precision, m.recall, m.accuracy) == (1.0, 1.0, 1.0)


def test_accuracy_293_of_500():
    gt = gt_pairs(500)
    matches = tuple((f"a{i}", f"t{i}") if i < 293 else (f"a{i}", f"t{(i + 1) % 500 + 500}") for i in range(500))
    a = IdAssignment(matches, (1.0,) * 500, 500.0)
    m = evaluate(a, gt, 0.5)
    assert m.accuracy == 0.586 and m.correct == 293


def test_empty_assignment():
    m = evaluate(IdAssignment((), (), 0.0), gt_pairs(4), 0.5)
    assert m.recall == 0.0 and m.accuracy == 0.0 and m.degenerate_precision and m.precision == 1.0


def test_threshold_zero_makes_recall_equal_accuracy():
    gt = gt_pairs(4)
    a = IdAssignment((("a0", "t0"), ("a1", "t2"), ("a2", "t1"), ("a3", "t3")), (0.1, 0.9, 0.3, 0.0), 1.3)
    m = evaluate(a, gt, 0.0)
    assert m.recall == m.accuracy == 0.5


def test_pr_sweep_flat_curve():
    gt = gt_pairs(3)
    a = IdAssignment(tuple(sorted(gt.coupled)), (0.9,) * 3, 2.7)
    curve = pr_sweep(a, gt)
    assert len(curve.rows()) == 101
    assert all(p == r == 1.0 for t, p, r in curve.rows() if t <= 0.9)
    assert curve.intersection_threshold == 0.0


def test_pr_sweep_monotone_recall_and_tp():
    rng = np.random.default_rng(0)
    gt = gt_pairs(50)
    matches = tuple((f"a{i}", f"t{i if rng.random() < 0.6 else i + 100}") for i in range(50))
    a = IdAssignment(matches, tuple(rng.random(50)), 0.0)
    curve = pr_sweep(a, gt)
    assert np.all(np.diff(curve.recall) <= 0)
    tps = [evaluate(a, gt, t).true_positives for t in curve.thresholds]
    assert all(b <= a_ for a_, b in zip(tps, tps[1:]))
    gap = np.abs(curve.precision - curve.recall)
    assert gap[curve.intersection_index] == gap.min()


def test_curve_csv(tmp_path):
    gt = gt_pairs(2)
    save_curve(pr_sweep(IdAssignment(tuple(sorted(gt.coupled)), (0.5, 0.7), 1.2), gt), tmp_path / "c.csv")
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0] == "threshold,precision,recall" and len(lines) == 102


def _matrix(n, seed=0):
    rng = np.random.default_rng(seed)
    Z = rng.random((n, n)) * 0.5
    Z[np.arange(n), np.arange(n)] += 0.4
    return SimilarityMatrix(tuple(f"a{i}" for i in range(n)), tuple(f"t{i}" for i in range(n)), Z)


class _Ids:
    def __init__(self, ids):
        self.ids = set(ids)

    def __contains__(self, x):
        return x in self.ids


def _dummy_model():
    imp = ImputationTable(dict.fromkeys(ATTRIBUTES, 0.5), dict.fromkeys(ATTRIBUTES, True))
    return MatchModel("logistic", np.zeros(9), 0.0, imp)


def test_single_victim_success():
    Z = _matrix(5)
    Z.Z[:, 2] = 0.1
    Z.Z[2, 2] = 0.95
    res = targeted_attack(["t2"], None, _Ids(Z.cols), _dummy_model(), None, gt_pairs(5), 0.5, Z=Z)
    assert (res.precision, res.recall, res.accuracy) == (1.0, 1.0, 1.0)


def test_targeted_runs_are_deterministic_and_averaged():
    Z = _matrix(30, seed=4)
    gt = gt_pairs(30)
    victims = [f"t{i}" for i in range(10)]
    a = targeted_attack(victims, None, _Ids(Z.cols), _dummy_model(), None, gt, INTERSECTION, runs=2, seed=9, Z=Z)
    b = targeted_attack(victims, None, _Ids(Z.cols), _dummy_model(), None, gt, INTERSECTION, runs=2, seed=9, Z=Z)
    assert a.metrics == b.metrics and len(a.runs) == 2
    assert a.accuracy == pytest.approx(np.mean([m.accuracy for m in a.runs]))


def test_targeted_rejects_unknown_victim():
    Z = _matrix(3)
    with pytest.raises(KeyError):
        targeted_attack(["zz"], None, _Ids(Z.cols), _dummy_model(), None, gt_pairs(3), 0.5, Z=Z)


def test_targeted_with_all_victims_equals_global():
    Z = _matrix(12, seed=5)
    gt = gt_pairs(12)
    g = global_attack(None, None, _dummy_model(), None, gt, 0.5, Z=Z)
    t = targeted_attack(list(Z.cols), None, _Ids(Z.cols), _dummy_model(), None, gt, 0.5, Z=Z)
    assert set(g.assignment.matches) == set(t.assignment.matches)
    assert g.metrics == t.metrics


def test_global_attack_matches_assignment():
    Z = _matrix(8, seed=1)
    res = global_attack(None, None, _dummy_model(), None, gt_pairs(8), INTERSECTION, Z=Z)
    assert set(res.assignment.matches) == set(match_profiles(Z).matches)
    assert res.threshold == res.curve.intersection_threshold


def test_average_of_one_is_identity():
    m = evaluate(IdAssignment((), (), 0.0), gt_pairs(1), 0.5)
    assert average_metrics([m]) is m
