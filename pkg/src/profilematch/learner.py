"""Attribute-weight learning from coupled/uncoupled pairs.

The model is linear in the nine similarities: logistic regression trained by
full-batch gradient descent, or a linear SVM trained with Pegasos-style
subgradient steps.  Missing similarities are imputed per attribute before
training and scoring.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .datamodel import ATTRIBUTES, Dataset, GroundTruth, SimilarityVector
from .similarity import FeatureTable, Resources, pair_similarities

log = logging.getLogger(__name__)

IMPUTATION_BINS = 20


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainingSet:
    X: np.ndarray  # (n, len(attributes)), NaN = MISSING
    y: np.ndarray  # (n,) in {0, 1}
    attributes: tuple[str, ...] = ATTRIBUTES
    pairs: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if self.X.shape != (len(self.y), len(self.attributes)):
            raise ValueError("training matrix shape does not match labels/attributes")
        if not np.isin(self.y, (0, 1)).all():
            raise ValueError("labels must be 0 or 1")
        if len(self.y) and (self.y.min() == self.y.max()):
            raise ValueError("training set needs both coupled and uncoupled rows")

    def __len__(self) -> int:
        return len(self.y)


@dataclass(frozen=True)
class ImputationTable:
    values: Mapping[str, float]
    observed: Mapping[str, bool]

    def vector(self, order: Sequence[str]) -> np.ndarray:
        return np.array([self.values.get(a, 0.5) for a in order], dtype=float)


@dataclass(frozen=True)
class MatchModel:
    kind: str
    weights: np.ndarray
    bias: float
    imputation: ImputationTable
    attributes: tuple[str, ...] = ATTRIBUTES
    active: tuple[str, ...] = ATTRIBUTES
    hyperparameters: Mapping[str, float] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("logistic", "linear_svm"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if len(self.weights) != len(self.attributes):
            raise ValueError("one weight per attribute required")
        if not np.all(np.isfinite(self.weights)) or not np.isfinite(self.bias):
            raise ValueError("model parameters must be finite")

    def weight_table(self) -> dict[str, float]:
        return {a: float(w) for a, w in zip(self.attributes, self.weights)}

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "attributes": list(self.attributes),
            "active": list(self.active),
            "weights": self.weight_table(),
            "bias": float(self.bias),
            "imputation": {
                a: {"value": float(self.imputation.values[a]), "observed": bool(self.imputation.observed[a])}
                for a in self.attributes
            },
            "hyperparameters": dict(self.hyperparameters),
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "MatchModel":
        attrs = tuple(obj["attributes"])
        imp = obj["imputation"]
        return cls(
            kind=obj["kind"],
            weights=np.array([obj["weights"][a] for a in attrs], dtype=float),
            bias=float(obj["bias"]),
            imputation=ImputationTable(
                {a: float(imp[a]["value"]) for a in attrs},
                {a: bool(imp[a]["observed"]) for a in attrs},
            ),
            attributes=attrs,
            active=tuple(obj.get("active", attrs)),
            hyperparameters=dict(obj.get("hyperparameters", {})),
            seed=int(obj.get("seed", 0)),
        )


def save_model(model: MatchModel, path: str | Path) -> None:
    Path(path).write_text(json.dumps(model.to_json(), indent=2, sort_keys=True) + "\n")


def load_model(path: str | Path) -> MatchModel:
    return MatchModel.from_json(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# Training data


def build_training_set(
    gt: GroundTruth, aux: Dataset, tgt: Dataset, resources: Resources, jobs: int = 1
) -> TrainingSet:
    """One row per coupled (label 1) and uncoupled (label 0) pair."""
    if not gt.coupled or not gt.uncoupled:
        raise ValueError("ground truth needs both coupled and uncoupled pairs")
    pairs = [(a, t, 1) for a, t in sorted(gt.coupled)] + [(a, t, 0) for a, t in sorted(gt.uncoupled)]
    aux_ids = sorted({a for a, _, _ in pairs})
    tgt_ids = sorted({t for _, t, _ in pairs})
    ta = FeatureTable.from_dataset(aux, resources, aux_ids)
    tb = FeatureTable.from_dataset(tgt, resources, tgt_ids)
    ra = {pid: k for k, pid in enumerate(aux_ids)}
    rb = {pid: k for k, pid in enumerate(tgt_ids)}
    ia = np.array([ra[a] for a, _, _ in pairs], dtype=np.int64)
    ib = np.array([rb[t] for _, t, _ in pairs], dtype=np.int64)
    X = pair_similarities(ta, tb, ia, ib, resources.tau_km, resources.tau_secs)
    y = np.array([lab for _, _, lab in pairs], dtype=np.int64)
    return TrainingSet(X, y, ATTRIBUTES, tuple((a, t) for a, t, _ in pairs))


def fit_imputation(ts: TrainingSet, bins: int = IMPUTATION_BINS) -> ImputationTable:
    """Per attribute, the bin centre where coupled and uncoupled similarity
    densities are closest, searched between the two class means.

    Ties between interior bins go to the bin nearest the midpoint of the class
    means; when the means leave no interior bin every bin is a candidate and
    the lowest index wins."""
    edges = np.linspace(0.0, 1.0, bins + 1)
    centers = 0.5 * (edges[:-1] + edges[1:])
    values: dict[str, float] = {}
    observed: dict[str, bool] = {}
    for k, attr in enumerate(ts.attributes):
        col = ts.X[:, k]
        present = ~np.isnan(col)
        observed[attr] = bool(present.any())
        pos = col[present & (ts.y == 1)]
        neg = col[present & (ts.y == 0)]
        if len(pos) == 0 or len(neg) == 0:
            values[attr] = 0.5
            continue
        dens_pos = np.histogram(pos, bins=edges)[0] / len(pos)
        dens_neg = np.histogram(neg, bins=edges)[0] / len(neg)
        gap = np.abs(dens_pos - dens_neg)
        lo, hi = sorted((float(pos.mean()), float(neg.mean())))
        interior = np.flatnonzero((centers > lo) & (centers < hi))
        if len(interior):
            best = gap[interior].min()
            tied = interior[np.isclose(gap[interior], best, rtol=0.0, atol=1e-12)]
            mid = 0.5 * (lo + hi)
            pick = tied[np.argmin(np.abs(centers[tied] - mid))]
        else:
            best = gap.min()
            pick = np.flatnonzero(np.isclose(gap, best, rtol=0.0, atol=1e-12))[0]
        values[attr] = float(centers[pick])
    return ImputationTable(values, observed)


def _active_columns(ts: TrainingSet, attributes: Sequence[str] | None) -> np.ndarray:
    wanted = set(ts.attributes if attributes is None else attributes)
    unknown = wanted - set(ts.attributes)
    if unknown:
        raise ValueError(f"unknown attributes {sorted(unknown)}")
    mask = np.array([a in wanted for a in ts.attributes])
    # an attribute never observed in training carries no information
    mask &= ~np.isnan(ts.X).all(axis=0)
    if not mask.any():
        raise ValueError("no selected attribute is observed in the training set")
    return np.flatnonzero(mask)


def impute(X: np.ndarray, imp: ImputationTable, order: Sequence[str]) -> np.ndarray:
    fill = imp.vector(order)
    return np.where(np.isnan(X), fill[None, :], X)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def logreg_loss_grad(params: np.ndarray, X: np.ndarray, y: np.ndarray, l2: float) -> tuple[float, np.ndarray]:
    """L2-regularised mean log loss and its gradient; ``params`` = weights + [bias]."""
    w, b = params[:-1], params[-1]
    z = X @ w + b
    # log(1 + e^z) - y z, computed stably
    loss = float(np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * np.dot(w, w))
    r = _sigmoid(z) - y
    grad = np.empty_like(params)
    grad[:-1] = X.T @ r / len(y) + l2 * w
    grad[-1] = r.mean()
    return loss, grad


def train_logreg(
    ts: TrainingSet,
    imp: ImputationTable,
    lr: float = 0.1,
    l2: float = 1e-4,
    epochs: int = 500,
    seed: int = 0,
    attributes: Sequence[str] | None = None,
    tol: float = 1e-6,
) -> MatchModel:
    """Full-batch gradient descent from zero; the step is halved whenever it
    would increase the loss, so the loss never goes up."""
    cols = _active_columns(ts, attributes)
    X = impute(ts.X, imp, ts.attributes)[:, cols]
    y = ts.y.astype(float)
    params = np.zeros(len(cols) + 1)
    loss, grad = logreg_loss_grad(params, X, y, l2)
    step = lr
    history = [loss]
    for epoch in range(epochs):
        if np.max(np.abs(grad)) < tol:
            break
        while True:
            cand = params - step * grad
            new_loss, new_grad = logreg_loss_grad(cand, X, y, l2)
            if not np.isfinite(new_loss):
                raise TrainingError(f"logistic regression diverged at epoch {epoch}")
            if new_loss <= loss or step < 1e-12:
                break
            step *= 0.5
        params, loss, grad = cand, new_loss, new_grad
        history.append(loss)
    weights = np.zeros(len(ts.attributes))
    weights[cols] = params[:-1]
    log.info("logistic regression: %d epochs, final loss %.6f", len(history) - 1, loss)
    return MatchModel(
        kind="logistic",
        weights=weights,
        bias=float(params[-1]),
        imputation=imp,
        attributes=ts.attributes,
        active=tuple(ts.attributes[c] for c in cols),
        hyperparameters={"lr": lr, "l2": l2, "epochs": epochs, "epochs_run": len(history) - 1,
                         "final_loss": loss},
        seed=seed,
    )


def train_linear_svm(
    ts: TrainingSet,
    imp: ImputationTable,
    lam: float = 1e-3,
    epochs: int = 50,
    seed: int = 0,
    attributes: Sequence[str] | None = None,
) -> MatchModel:
    """Primal hinge-loss SVM by Pegasos subgradient steps (step 1/(lam*t)).
    The bias is learned as the weight of a constant feature."""
    cols = _active_columns(ts, attributes)
    X = impute(ts.X, imp, ts.attributes)[:, cols]
    X = np.hstack([X, np.ones((len(X), 1))])
    y = np.where(ts.y == 1, 1.0, -1.0)
    rng = np.random.default_rng(seed)
    w = np.zeros(X.shape[1])
    radius = 1.0 / np.sqrt(lam)
    t = 0
    for epoch in range(epochs):
        for i in rng.permutation(len(y)):
            t += 1
            eta = 1.0 / (lam * t)
            margin = y[i] * (X[i] @ w)
            w *= 1.0 - eta * lam
            if margin < 1.0:
                w += eta * y[i] * X[i]
            norm = np.linalg.norm(w)
            if norm > radius:
                w *= radius / norm
        if not np.all(np.isfinite(w)):
            raise TrainingError(f"linear SVM diverged at epoch {epoch}")
    weights = np.zeros(len(ts.attributes))
    weights[cols] = w[:-1]
    return MatchModel(
        kind="linear_svm",
        weights=weights,
        bias=float(w[-1]),
        imputation=imp,
        attributes=ts.attributes,
        active=tuple(ts.attributes[c] for c in cols),
        hyperparameters={"lambda": lam, "epochs": epochs},
        seed=seed,
    )


def train_model(
    ts: TrainingSet, kind: str = "logistic", seed: int = 0, attributes: Sequence[str] | None = None, **params
) -> MatchModel:
    imp = fit_imputation(ts)
    if kind == "logistic":
        return train_logreg(ts, imp, seed=seed, attributes=attributes, **params)
    if kind in ("linear_svm", "svm"):
        return train_linear_svm(ts, imp, seed=seed, attributes=attributes, **params)
    raise ValueError(f"unknown model kind {kind!r}")


def margin_array(model: MatchModel, X: np.ndarray) -> np.ndarray:
    return impute(X, model.imputation, model.attributes) @ model.weights + model.bias


def score_array(model: MatchModel, X: np.ndarray) -> np.ndarray:
    """Scores in [0, 1] for rows of similarities in ``model.attributes`` order."""
    return _sigmoid(margin_array(model, X))


def score_pair(model: MatchModel, sv: SimilarityVector | np.ndarray, order: Sequence[str] | None = None) -> float:
    if isinstance(sv, SimilarityVector):
        x = sv.as_array(model.attributes)
    else:
        if order is not None and tuple(order) != tuple(model.attributes):
            raise ValueError("similarity vector attribute order does not match the model")
        x = np.asarray(sv, dtype=float)
        if len(x) != len(model.attributes):
            raise ValueError("similarity vector length does not match the model")
    return float(score_array(model, x[None, :])[0])
