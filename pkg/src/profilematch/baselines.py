"""Pairwise classifiers used as the comparison baseline.

Each candidate pair is judged on its own: the classifier's probability is
compared against a cutoff, with no one-to-one constraint.  The classifiers
consume the same similarity vectors as the matching framework, restricted to
the strong identifiers (plus graph connectivity when it is observed).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
from sklearn.ensemble import RandomForestClassifier
from sklearn.neighbors import KNeighborsClassifier
from sklearn.tree import DecisionTreeClassifier

from .datamodel import ATTRIBUTES, GroundTruth, STRONG_ATTRIBUTES
from .learner import ImputationTable, TrainingSet, fit_imputation, impute, score_array, train_linear_svm

KINDS = ("knn", "cart", "forest", "svm")

DEFAULT_PARAMS: dict[str, dict[str, Any]] = {
    "knn": {"k": 5},
    "cart": {"max_depth": 10, "min_leaf": 1},
    "forest": {"trees": 400, "max_depth": 10, "min_leaf": 1},
    "svm": {"lam": 1e-3, "epochs": 50},
}


@dataclass
class BaselineModel:
    kind: str
    attributes: tuple[str, ...]
    imputation: ImputationTable
    estimator: Any
    params: Mapping[str, Any] = field(default_factory=dict)
    seed: int = 0

    def _design(self, X: np.ndarray) -> np.ndarray:
        """Rows in ATTRIBUTES order -> imputed columns of the model's subset."""
        cols = [ATTRIBUTES.index(a) for a in self.attributes]
        return impute(X[:, cols], self.imputation, self.attributes)

    def scores(self, X: np.ndarray) -> np.ndarray:
        """Probability of "coupled" for each row of nine similarities."""
        if len(X) == 0:
            return np.zeros(0)
        if self.kind == "svm":
            return score_array(self.estimator, X)
        proba = self.estimator.predict_proba(self._design(X))
        classes = list(self.estimator.classes_)
        return proba[:, classes.index(1)] if 1 in classes else np.zeros(len(X))

    def tree_scores(self, X: np.ndarray) -> np.ndarray:
        """Per-tree coupled probabilities (forest only), shape (trees, rows)."""
        if self.kind != "forest":
            raise ValueError("tree_scores is only defined for forests")
        D = self._design(X)
        out = []
        for tree in self.estimator.estimators_:
            proba = tree.predict_proba(D)
            cls = list(tree.classes_)
            out.append(proba[:, cls.index(1)] if 1 in cls else np.zeros(len(D)))
        return np.array(out)

    def metadata(self) -> dict:
        return {"kind": self.kind, "attributes": list(self.attributes), "params": dict(self.params),
                "seed": self.seed}


def default_attributes(ts: TrainingSet) -> tuple[str, ...]:
    attrs = list(STRONG_ATTRIBUTES)
    if not np.isnan(ts.X[:, ATTRIBUTES.index("graph")]).all():
        attrs.append("graph")
    observed = [a for a in attrs if not np.isnan(ts.X[:, ATTRIBUTES.index(a)]).all()]
    return tuple(observed)


def train_baseline(
    kind: str,
    ts: TrainingSet,
    params: Mapping[str, Any] | None = None,
    seed: int = 0,
    attributes: Sequence[str] | None = None,
    jobs: int = 1,
) -> BaselineModel:
    if kind not in KINDS:
        raise ValueError(f"unknown baseline {kind!r}; choose from {KINDS}")
    if len(np.unique(ts.y)) < 2:
        raise ValueError("baseline training needs both classes")
    p = {**DEFAULT_PARAMS[kind], **(params or {})}
    attrs = tuple(attributes) if attributes is not None else default_attributes(ts)
    if not attrs:
        raise ValueError("no observed attribute to train on")
    imp = fit_imputation(ts)
    cols = [ATTRIBUTES.index(a) for a in attrs]
    X = impute(ts.X[:, cols], imp, attrs)
    y = ts.y
    if kind == "knn":
        if p["k"] < 1:
            raise ValueError("k must be positive")
        est = KNeighborsClassifier(n_neighbors=int(p["k"]), algorithm="kd_tree", n_jobs=jobs).fit(X, y)
    elif kind == "cart":
        est = DecisionTreeClassifier(
            criterion="gini", max_depth=p["max_depth"], min_samples_leaf=p["min_leaf"], random_state=seed
        ).fit(X, y)
    elif kind == "forest":
        if p["trees"] < 1:
            raise ValueError("trees must be positive")
        est = RandomForestClassifier(
            n_estimators=int(p["trees"]), criterion="gini", max_depth=p["max_depth"],
            min_samples_leaf=p["min_leaf"], max_features="sqrt", bootstrap=True,
            random_state=seed, n_jobs=jobs,
        ).fit(X, y)
    else:
        est = train_linear_svm(ts, imp, lam=p["lam"], epochs=p["epochs"], seed=seed, attributes=attrs)
    return BaselineModel(kind, attrs, imp, est, p, seed)


@dataclass(frozen=True)
class PairPrediction:
    pairs: tuple[tuple[str, str], ...]
    scores: tuple[float, ...]

    def __len__(self) -> int:
        return len(self.pairs)


def classify_pairs(
    model: BaselineModel,
    pairs: Sequence[tuple[str, str]],
    X: np.ndarray,
    cutoff: float = 0.5,
) -> PairPrediction:
    """Pairs whose score exceeds ``cutoff``, each judged independently."""
    s = model.scores(X)
    keep = np.flatnonzero(s > cutoff)
    return PairPrediction(tuple(pairs[k] for k in keep), tuple(float(s[k]) for k in keep))


def classify_grid(
    model: BaselineModel,
    aux_ids: Sequence[str],
    tgt_ids: Sequence[str],
    sims: np.ndarray,
    cutoff: float = 0.5,
) -> PairPrediction:
    """``classify_pairs`` over every (aux, target) combination of a
    (n_aux, n_tgt, 9) similarity tensor."""
    s = model.scores(sims.reshape(-1, sims.shape[-1])).reshape(sims.shape[:2])
    rows, cols = np.nonzero(s > cutoff)
    return PairPrediction(
        tuple((aux_ids[r], tgt_ids[c]) for r, c in zip(rows, cols)),
        tuple(float(s[r, c]) for r, c in zip(rows, cols)),
    )


@dataclass(frozen=True)
class BaselineMetrics:
    predicted: int
    true_positives: int
    coupled: int
    precision: float
    recall: float
    degenerate_precision: bool

    def to_json(self) -> dict:
        return dict(self.__dict__)


def evaluate_baseline(predicted: PairPrediction | Iterable[tuple[str, str]], gt: GroundTruth) -> BaselineMetrics:
    pairs = set(predicted.pairs if isinstance(predicted, PairPrediction) else predicted)
    tp = len(pairs & gt.coupled)
    n = len(gt.coupled)
    degenerate = not pairs
    return BaselineMetrics(
        predicted=len(pairs),
        true_positives=tp,
        coupled=n,
        precision=1.0 if degenerate else tp / len(pairs),
        recall=tp / n if n else 0.0,
        degenerate_precision=degenerate,
    )
