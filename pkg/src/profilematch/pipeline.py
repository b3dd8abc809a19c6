"""End-to-end runs: train on the training views, attack the evaluation views.

Shared by the CLI, the experiment scripts and the acceptance suite.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import nlp
from .attacks import INTERSECTION, AttackResult, global_attack, targeted_attack
from .datamodel import ATTRIBUTE_SETS, ATTRIBUTES, Dataset, GroundTruth, SimilarityMatrix
from .learner import MatchModel, TrainingSet, build_training_set, score_array, train_model
from .similarity import FeatureTable, Resources, similarity_tensor
from .synthgen import GraphExperiment, SynthExperiment

log = logging.getLogger(__name__)


def attribute_set(selector: str | Sequence[str]) -> tuple[str, ...]:
    if isinstance(selector, str):
        if selector not in ATTRIBUTE_SETS:
            raise ValueError(f"unknown attribute selector {selector!r}; choose from {sorted(ATTRIBUTE_SETS)}")
        return ATTRIBUTE_SETS[selector]
    unknown = set(selector) - set(ATTRIBUTES)
    if unknown:
        raise ValueError(f"unknown attributes {sorted(unknown)}")
    return tuple(selector)


def synth_resources(
    exp: SynthExperiment,
    lda_topics: int = 20,
    lda_iterations: int = 1000,
    seed: int = 0,
) -> Resources:
    """Lookup tables from the generator plus topic and sentiment models
    trained on the experiment's corpora."""
    lda = nlp.train_lda(exp.lda_corpus, K=lda_topics, iterations=lda_iterations, seed=seed)
    sentiment = nlp.train_sentiment(exp.sentiment_corpus)
    return Resources(
        gazetteer=exp.vocab.gazetteer,
        names=exp.vocab.name_table,
        entities=exp.vocab.entity_gazetteers,
        lda=lda,
        sentiment=sentiment,
    )


@dataclass
class EvaluationSurface:
    """Per-attribute similarities for every evaluation pair, reusable across
    models trained on different attribute subsets."""

    aux_ids: tuple[str, ...]
    tgt_ids: tuple[str, ...]
    sims: np.ndarray  # (n_aux, n_tgt, 9)

    def scores(self, model: MatchModel) -> SimilarityMatrix:
        Z = score_array(model, self.sims.reshape(-1, len(ATTRIBUTES))).reshape(self.sims.shape[:2])
        return SimilarityMatrix(self.aux_ids, self.tgt_ids, Z)

    def subset(self, aux_ids: Sequence[str], tgt_ids: Sequence[str]) -> "EvaluationSurface":
        ra = {a: k for k, a in enumerate(self.aux_ids)}
        rb = {t: k for k, t in enumerate(self.tgt_ids)}
        ia = [ra[a] for a in aux_ids]
        ib = [rb[t] for t in tgt_ids]
        return EvaluationSurface(tuple(aux_ids), tuple(tgt_ids), self.sims[np.ix_(ia, ib)])


def evaluation_surface(aux: Dataset, tgt: Dataset, resources: Resources, jobs: int = 1) -> EvaluationSurface:
    ta = FeatureTable.from_dataset(aux, resources)
    tb = FeatureTable.from_dataset(tgt, resources)
    sims = similarity_tensor(ta, tb, resources.tau_km, resources.tau_secs, jobs)
    return EvaluationSurface(tuple(aux.ids), tuple(tgt.ids), sims)


@dataclass
class RunOutcome:
    model: MatchModel
    result: AttackResult
    Z: SimilarityMatrix
    timings: dict[str, float] = field(default_factory=dict)


def fit(
    train_aux: Dataset,
    train_tgt: Dataset,
    gt: GroundTruth,
    resources: Resources,
    attributes: str | Sequence[str] = "all",
    kind: str = "logistic",
    seed: int = 0,
    jobs: int = 1,
    training_set: TrainingSet | None = None,
    **params,
) -> MatchModel:
    ts = training_set or build_training_set(gt, train_aux, train_tgt, resources, jobs)
    return train_model(ts, kind, seed=seed, attributes=attribute_set(attributes), **params)


def run_global(
    model: MatchModel,
    surface: EvaluationSurface,
    gt: GroundTruth,
    threshold: float | str = INTERSECTION,
) -> tuple[AttackResult, SimilarityMatrix]:
    Z = surface.scores(model)
    return global_attack(None, None, model, None, gt, threshold, Z=Z), Z


def run_targeted(
    model: MatchModel,
    surface: EvaluationSurface,
    gt: GroundTruth,
    n_victims: int = 100,
    runs: int = 10,
    seed: int = 0,
    threshold: float | str = INTERSECTION,
) -> AttackResult:
    from .attacks import coupled_target_pool

    Z = surface.scores(model)
    pool = coupled_target_pool(Z.rows, Z.cols, gt)
    victims = pool[: min(n_victims, len(pool))]
    tgt_stub = _IdSet(Z.cols)
    return targeted_attack(victims, None, tgt_stub, model, None, gt, threshold, runs, seed, Z=Z)


class _IdSet:
    def __init__(self, ids):
        self._ids = set(ids)

    def __contains__(self, pid):
        return pid in self._ids


def run_synthetic(
    exp: SynthExperiment,
    attributes: str | Sequence[str] = "all",
    kind: str = "logistic",
    seed: int = 0,
    resources: Resources | None = None,
    jobs: int = 1,
    surface: EvaluationSurface | None = None,
    training_set: TrainingSet | None = None,
) -> RunOutcome:
    t0 = time.perf_counter()
    resources = resources or synth_resources(exp, seed=seed)
    t1 = time.perf_counter()
    model = fit(exp.train.aux, exp.train.tgt, exp.train.gt, resources, attributes, kind, seed, jobs,
                training_set=training_set)
    t2 = time.perf_counter()
    surface = surface or evaluation_surface(exp.eval.aux, exp.eval.tgt, resources, jobs)
    t3 = time.perf_counter()
    result, Z = run_global(model, surface, exp.eval.gt)
    t4 = time.perf_counter()
    timings = {"resources": t1 - t0, "train": t2 - t1, "similarities": t3 - t2, "match": t4 - t3}
    log.info("run %s/%s: accuracy %.3f, P %.3f R %.3f (%s)", attributes, kind, result.accuracy,
             result.precision, result.recall, {k: round(v, 2) for k, v in timings.items()})
    return RunOutcome(model, result, Z, timings)


def graph_resources(gexp: GraphExperiment) -> Resources:
    return Resources(graphs={"auxiliary": gexp.aux_graph, "target": gexp.tgt_graph})


def run_graph(gexp: GraphExperiment, kind: str = "logistic", seed: int = 0, jobs: int = 1) -> RunOutcome:
    resources = graph_resources(gexp)
    model = fit(gexp.train.aux, gexp.train.tgt, gexp.train.gt, resources, "graph", kind, seed, jobs)
    surface = evaluation_surface(gexp.eval.aux, gexp.eval.tgt, resources, jobs)
    result, Z = run_global(model, surface, gexp.eval.gt)
    return RunOutcome(model, result, Z)


@dataclass(frozen=True)
class SweepPoint:
    size: int
    subsets: int
    precision: float
    recall: float
    accuracy: float
    threshold: float


def size_partitions(
    surface: EvaluationSurface, gt: GroundTruth, size: int, seed: int = 0
) -> list[tuple[list[str], list[str]]]:
    """Split the evaluation profiles into disjoint size x size sub-problems.

    Each sub-problem keeps the coupled share of the full surface.  Every
    profile lands in at most one sub-problem, so smaller sizes are averaged
    over more independent draws."""
    g = gt.restrict(surface.aux_ids, surface.tgt_ids)
    coupled = sorted(g.coupled)
    ca = {a for a, _ in coupled}
    ct = {t for _, t in coupled}
    aux_extra = [a for a in surface.aux_ids if a not in ca]
    tgt_extra = [t for t in surface.tgt_ids if t not in ct]
    n_full = min(len(surface.aux_ids), len(surface.tgt_ids))
    if not 0 < size <= n_full:
        raise ValueError(f"sweep size {size} outside 1..{n_full}")
    rng = np.random.default_rng([seed, size])
    coupled = [coupled[k] for k in rng.permutation(len(coupled))]
    aux_extra = [aux_extra[k] for k in rng.permutation(len(aux_extra))]
    tgt_extra = [tgt_extra[k] for k in rng.permutation(len(tgt_extra))]
    n_c = int(round(size * len(coupled) / n_full))
    n_x = size - n_c
    count = n_full // size
    parts = []
    for k in range(count):
        pairs = coupled[k * n_c:(k + 1) * n_c]
        aux = [a for a, _ in pairs] + aux_extra[k * n_x:(k + 1) * n_x]
        tgt = [t for _, t in pairs] + tgt_extra[k * n_x:(k + 1) * n_x]
        parts.append((sorted(aux), sorted(tgt)))
    return parts


def size_sweep(
    model: MatchModel,
    surface: EvaluationSurface,
    gt: GroundTruth,
    sizes: Sequence[int] = (100, 200, 500, 1000),
    threshold: float | str = INTERSECTION,
    seed: int = 0,
) -> list[SweepPoint]:
    """Global-attack metrics as a function of evaluation-set size."""
    points = []
    for size in sizes:
        runs = [run_global(model, surface.subset(a, t), gt, threshold)[0] for a, t in
                size_partitions(surface, gt, size, seed)]
        points.append(SweepPoint(
            size, len(runs),
            float(np.mean([r.precision for r in runs])),
            float(np.mean([r.recall for r in runs])),
            float(np.mean([r.accuracy for r in runs])),
            float(np.mean([r.threshold for r in runs])),
        ))
    return points
