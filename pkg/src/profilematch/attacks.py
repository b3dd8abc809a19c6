"""Global and targeted matching attacks and their threshold-based metrics."""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .assignment import IdAssignment, match_profiles
from .datamodel import Dataset, GroundTruth, SimilarityMatrix
from .learner import MatchModel
from .similarity import Resources, build_similarity_matrix

INTERSECTION = "intersection"


@dataclass(frozen=True)
class Metrics:
    threshold: float
    true_positives: int
    false_positives: int
    correct: int
    coupled: int
    precision: float
    recall: float
    accuracy: float
    degenerate_precision: bool = False

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class PRCurve:
    thresholds: np.ndarray
    precision: np.ndarray
    recall: np.ndarray
    intersection_index: int

    @property
    def intersection_threshold(self) -> float:
        return float(self.thresholds[self.intersection_index])

    def rows(self) -> list[tuple[float, float, float]]:
        return [(float(t), float(p), float(r)) for t, p, r in zip(self.thresholds, self.precision, self.recall)]


@dataclass
class AttackResult:
    kind: str
    threshold: float
    metrics: Metrics
    assignment: IdAssignment | None = None
    curve: PRCurve | None = None
    seeds: tuple[int, ...] = ()
    runs: list[Metrics] = field(default_factory=list)

    @property
    def precision(self) -> float:
        return self.metrics.precision

    @property
    def recall(self) -> float:
        return self.metrics.recall

    @property
    def accuracy(self) -> float:
        return self.metrics.accuracy

    def to_json(self) -> dict:
        out = {
            "attack": self.kind,
            "threshold": self.threshold,
            "metrics": self.metrics.to_json(),
            "seeds": list(self.seeds),
        }
        if self.runs:
            out["runs"] = [m.to_json() for m in self.runs]
        return out


def evaluate(assignment: IdAssignment, gt: GroundTruth, threshold: float) -> Metrics:
    """Precision/recall over matches scoring at least ``threshold``; accuracy
    ignores the threshold.  Precision is reported as 1.0 (flagged degenerate)
    when nothing clears the threshold."""
    coupled = gt.coupled
    tp = fp = correct = 0
    for pair, score in zip(assignment.matches, assignment.scores):
        hit = pair in coupled
        correct += hit
        if score >= threshold:
            if hit:
                tp += 1
            else:
                fp += 1
    n = len(coupled)
    degenerate = tp + fp == 0
    return Metrics(
        threshold=float(threshold),
        true_positives=tp,
        false_positives=fp,
        correct=correct,
        coupled=n,
        precision=1.0 if degenerate else tp / (tp + fp),
        recall=tp / n if n else 0.0,
        accuracy=correct / n if n else 0.0,
        degenerate_precision=degenerate,
    )


def pr_sweep(assignment: IdAssignment, gt: GroundTruth, step: float = 0.01) -> PRCurve:
    """Precision/recall at thresholds 0, step, ..., 1 and the threshold where the
    curves come closest (lowest such threshold on ties)."""
    n_steps = int(round(1.0 / step))
    thresholds = np.round(np.arange(n_steps + 1) * step, 10)
    scores = np.asarray(assignment.scores, dtype=float)
    hit = np.array([pair in gt.coupled for pair in assignment.matches], dtype=bool)
    n = len(gt.coupled)
    above = scores[None, :] >= thresholds[:, None] if len(scores) else np.zeros((len(thresholds), 0), bool)
    tp = (above & hit[None, :]).sum(axis=1)
    fp = (above & ~hit[None, :]).sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        precision = np.where(tp + fp == 0, 1.0, tp / np.maximum(tp + fp, 1))
    recall = tp / n if n else np.zeros(len(thresholds))
    gap = np.abs(precision - recall)
    idx = int(np.flatnonzero(gap == gap.min())[0])
    return PRCurve(thresholds, precision, recall.astype(float), idx)


def _resolve_threshold(threshold, assignment: IdAssignment, gt: GroundTruth) -> tuple[float, PRCurve]:
    curve = pr_sweep(assignment, gt)
    if threshold is None or threshold == INTERSECTION:
        return curve.intersection_threshold, curve
    return float(threshold), curve


def global_attack(
    aux_e: Dataset,
    tgt_e: Dataset,
    model: MatchModel,
    resources: Resources,
    gt: GroundTruth,
    threshold: float | str = INTERSECTION,
    jobs: int = 1,
    Z: SimilarityMatrix | None = None,
) -> AttackResult:
    """Match every evaluation auxiliary profile against every target profile."""
    if Z is None:
        Z = build_similarity_matrix(aux_e.ids, tgt_e.ids, model, resources, aux_e, tgt_e, jobs)
    gt_e = gt.restrict(Z.rows, Z.cols)
    assignment = match_profiles(Z)
    thr, curve = _resolve_threshold(threshold, assignment, gt_e)
    return AttackResult("global", thr, evaluate(assignment, gt_e, thr), assignment, curve)


def coupled_target_pool(aux_ids: Sequence[str], tgt_ids: Sequence[str], gt: GroundTruth) -> list[str]:
    aset, tset = set(aux_ids), set(tgt_ids)
    return sorted(t for a, t in gt.coupled if a in aset and t in tset)


def targeted_attack(
    victims: Sequence[str],
    aux_e: Dataset,
    tgt_e: Dataset,
    model: MatchModel,
    resources: Resources,
    gt: GroundTruth,
    threshold: float | str = INTERSECTION,
    runs: int = 1,
    seed: int = 0,
    jobs: int = 1,
    Z: SimilarityMatrix | None = None,
) -> AttackResult:
    """Match a set of victim target profiles against the auxiliary pool.

    With ``runs > 1`` each run draws a fresh victim set of the same size from
    the coupled target profiles; metrics are averaged over runs."""
    unknown = [v for v in victims if v not in tgt_e]
    if unknown:
        raise KeyError(f"victim {unknown[0]!r} is not in the target evaluation set")
    if Z is None:
        Z = build_similarity_matrix(aux_e.ids, tgt_e.ids, model, resources, aux_e, tgt_e, jobs)
    col_of = {t: k for k, t in enumerate(Z.cols)}
    rng = np.random.default_rng(seed)
    pool = coupled_target_pool(Z.rows, Z.cols, gt)
    per_run: list[Metrics] = []
    last_assignment = None
    last_curve = None
    for r in range(runs):
        if runs == 1:
            chosen = list(victims)
        else:
            picks = rng.choice(len(pool), size=min(len(victims), len(pool)), replace=False)
            chosen = [pool[k] for k in sorted(picks)]
        sub = Z.Z[:, [col_of[v] for v in chosen]].T  # victims as rows
        by_victim = match_profiles(sub, list(chosen), list(Z.rows))
        assignment = IdAssignment(
            tuple((a, v) for v, a in by_victim.matches), by_victim.scores, by_victim.total_score
        )
        gt_run = gt.restrict(Z.rows, chosen)
        thr, curve = _resolve_threshold(threshold, assignment, gt_run)
        per_run.append(evaluate(assignment, gt_run, thr))
        last_assignment, last_curve = assignment, curve
    return AttackResult(
        "targeted",
        float(np.mean([m.threshold for m in per_run])),
        average_metrics(per_run),
        last_assignment,
        last_curve,
        (seed,),
        per_run if runs > 1 else [],
    )


def average_metrics(runs: Sequence[Metrics]) -> Metrics:
    if len(runs) == 1:
        return runs[0]
    mean = lambda name: float(np.mean([getattr(m, name) for m in runs]))  # noqa: E731
    return Metrics(
        threshold=mean("threshold"),
        true_positives=int(round(mean("true_positives"))),
        false_positives=int(round(mean("false_positives"))),
        correct=int(round(mean("correct"))),
        coupled=int(round(mean("coupled"))),
        precision=mean("precision"),
        recall=mean("recall"),
        accuracy=mean("accuracy"),
        degenerate_precision=any(m.degenerate_precision for m in runs),
    )


def save_curve(curve: PRCurve, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["threshold", "precision", "recall"])
        for t, p, r in curve.rows():
            w.writerow([f"{t:.2f}", repr(p), repr(r)])
