"""Command-line driver: synth, train, match, eval, graphsplit, sweep, baseline.

Every command reads a JSON run configuration (``--config``), lets flags
override individual fields, and writes its outputs into ``--out``.  Paths in
a config file are resolved relative to that file.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import asdict, dataclass, field, fields, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Sequence

from . import baselines, nlp, synthgen
from .assignment import load_assignment, match_profiles, save_assignment
from .attacks import INTERSECTION, coupled_target_pool, evaluate, pr_sweep, save_curve, targeted_attack
from .datamodel import ATTRIBUTE_SETS, Dataset, GroundTruth, load_ground_truth, load_profiles, save_ground_truth, \
    save_profiles
from .graph import generate_synthetic_graph, load_edge_list, save_edge_list, split_graph
from .learner import MatchModel, build_training_set, load_model, train_model
from .pipeline import attribute_set, evaluation_surface, size_sweep
from .similarity import Resources, load_gazetteer, load_name_table

log = logging.getLogger("profilematch")

PATH_FIELDS = (
    "aux_train", "tgt_train", "gt_train", "aux_eval", "tgt_eval", "gt_eval",
    "gazetteer", "names", "organizations", "sentiment_corpus", "lda_corpus",
    "aux_edges", "tgt_edges", "graph", "model", "lda", "sentiment", "assignment",
)


class CliError(Exception):
    """A user-facing failure: bad config, missing input, wrong stage order."""


@dataclass
class RunConfig:
    # inputs; None disables an optional resource
    aux_train: str | None = "aux_train.jsonl"
    tgt_train: str | None = "tgt_train.jsonl"
    gt_train: str | None = "gt_train.csv"
    aux_eval: str | None = "aux_eval.jsonl"
    tgt_eval: str | None = "tgt_eval.jsonl"
    gt_eval: str | None = "gt_eval.csv"
    gazetteer: str | None = "gazetteer.csv"
    names: str | None = "names.csv"
    organizations: str | None = "organizations.txt"
    sentiment_corpus: str | None = "sentiment.tsv"
    lda_corpus: str | None = "lda_corpus.txt"
    aux_edges: str | None = None
    tgt_edges: str | None = None
    graph: str | None = None
    # stage products; None means "inside the output directory"
    model: str | None = None
    lda: str | None = None
    sentiment: str | None = None
    assignment: str | None = None
    out: str = "."

    experiment: str = "profiles"
    preset: str = "medium"
    attributes: str = "all"
    model_kind: str = "logistic"
    threshold: float | str = INTERSECTION
    seed: int = 0
    jobs: int = 1
    lda_topics: int = 20
    lda_iterations: int = 1000
    embedding_dim: int = 128
    sizes: list[int] = field(default_factory=lambda: [100, 200, 500, 1000])
    baseline: str = "forest"
    cutoff: float = 0.5
    victims: int = 0
    runs: int = 10
    n_train_coupled: int = 1500
    n_train_uncoupled: int = 1500
    n_eval: int = 1000
    n_eval_coupled: int = 500
    graph_nodes: int = 5000
    attach_m: int = 5
    edge_overlap: float = 0.9

    def validate(self) -> None:
        if self.experiment not in ("profiles", "graph"):
            raise CliError(f"experiment must be 'profiles' or 'graph', got {self.experiment!r}")
        if self.preset not in synthgen.PRESETS:
            raise CliError(f"unknown preset {self.preset!r}; choose from {sorted(synthgen.PRESETS)}")
        if self.attributes not in ATTRIBUTE_SETS:
            raise CliError(f"unknown attribute set {self.attributes!r}; choose from {sorted(ATTRIBUTE_SETS)}")
        if self.model_kind not in ("logistic", "svm"):
            raise CliError(f"unknown model {self.model_kind!r}; choose logistic or svm")
        if self.baseline not in baselines.KINDS:
            raise CliError(f"unknown baseline {self.baseline!r}; choose from {baselines.KINDS}")
        if self.threshold != INTERSECTION and not isinstance(self.threshold, (int, float)):
            raise CliError(f"threshold must be a number or {INTERSECTION!r}")
        if self.jobs < 1:
            raise CliError("jobs must be at least 1")
        if not self.sizes or any(s < 1 for s in self.sizes):
            raise CliError("sizes must be positive")

    def path(self, name: str) -> Path | None:
        value = getattr(self, name)
        return None if value is None else Path(value)

    def product(self, name: str, default: str) -> Path:
        value = getattr(self, name)
        return Path(value) if value is not None else Path(self.out) / default

    def to_json(self) -> dict:
        return asdict(self)


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    p = Path(path)
    if not p.is_file():
        raise CliError(f"config file not found: {p}")
    try:
        raw = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise CliError(f"{p}: invalid JSON ({exc})") from exc
    if not isinstance(raw, dict):
        raise CliError(f"{p}: expected a JSON object")
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise CliError(f"{p}: unknown config keys {unknown}")
    base = p.parent
    for name in PATH_FIELDS + ("out",):
        if raw.get(name) is not None and not Path(raw[name]).is_absolute():
            raw[name] = str(base / raw[name])
    if "out" not in raw:
        raw["out"] = str(base)
    return RunConfig(**raw)


def _resolve(args: argparse.Namespace) -> RunConfig:
    cfg = load_config(args.config)
    overrides = {}
    for name in ("seed", "attributes", "threshold", "jobs", "out", "preset", "baseline", "victims", "runs",
                 "edge_overlap", "experiment"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    if getattr(args, "model", None) is not None:
        overrides["model_kind"] = args.model
    if getattr(args, "sizes", None):
        overrides["sizes"] = list(args.sizes)
    cfg = replace(cfg, **overrides)
    cfg.validate()
    return cfg


# ---------------------------------------------------------------------------
# IO helpers


def _need(path: Path | None, what: str) -> Path:
    if path is None:
        raise CliError(f"no {what} path configured")
    if not path.exists():
        raise CliError(f"{what} file not found: {path}")
    return path


def _write_json(cfg: RunConfig, path: Path, payload: dict) -> None:
    body = {**payload, "config": cfg.to_json(),
            "generated_at": datetime.now(timezone.utc).isoformat(timespec="seconds")}
    path.write_text(json.dumps(body, indent=2, sort_keys=True) + "\n")


def _read_json(path: Path) -> dict:
    return json.loads(path.read_text())


def _datasets(cfg: RunConfig, stage: str) -> tuple[Dataset, Dataset, GroundTruth]:
    role = "training" if stage == "train" else "evaluation"
    aux = load_profiles(_need(cfg.path(f"aux_{stage}"), f"aux_{stage}"), "auxiliary", role, cfg.embedding_dim)
    tgt = load_profiles(_need(cfg.path(f"tgt_{stage}"), f"tgt_{stage}"), "target", role, cfg.embedding_dim)
    gt = load_ground_truth(_need(cfg.path(f"gt_{stage}"), f"gt_{stage}"), aux, tgt)
    return aux, tgt, gt


def _lookup_resources(cfg: RunConfig) -> Resources:
    res = Resources()
    if cfg.gazetteer is not None:
        res.gazetteer = load_gazetteer(_need(cfg.path("gazetteer"), "gazetteer"))
    if cfg.names is not None:
        res.names = load_name_table(_need(cfg.path("names"), "names"))
    orgs = frozenset()
    if cfg.organizations is not None:
        orgs = nlp.load_organizations(_need(cfg.path("organizations"), "organizations"))
    res.entities = nlp.EntityGazetteers(
        locations=frozenset(res.gazetteer.entries) if res.gazetteer else frozenset(),
        given_names=frozenset(res.names.counts) if res.names else frozenset(),
        organizations=orgs,
    )
    if cfg.aux_edges is not None:
        res.graphs["auxiliary"] = load_edge_list(_need(cfg.path("aux_edges"), "aux_edges"))
    if cfg.tgt_edges is not None:
        res.graphs["target"] = load_edge_list(_need(cfg.path("tgt_edges"), "tgt_edges"))
    return res


def _trained_resources(cfg: RunConfig) -> Resources:
    """Lookup tables plus the topic and sentiment models written by ``train``."""
    res = _lookup_resources(cfg)
    lda_path = cfg.product("lda", "lda.json")
    if lda_path.exists():
        res.lda = nlp.LdaModel.from_json(_read_json(lda_path))
    sent_path = cfg.product("sentiment", "sentiment.json")
    if sent_path.exists():
        res.sentiment = nlp.SentimentModel.from_json(_read_json(sent_path))
    return res


def _model(cfg: RunConfig) -> MatchModel:
    path = cfg.product("model", "model.json")
    if not path.exists():
        raise CliError(f"model file not found: {path} (run 'train' first)")
    return load_model(path)


def _threshold_label(cfg: RunConfig) -> str:
    return INTERSECTION if cfg.threshold == INTERSECTION else f"{float(cfg.threshold):g}"


# ---------------------------------------------------------------------------
# Commands


def cmd_synth(cfg: RunConfig) -> None:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    # settings carry over to the following stages; paths are rewritten below
    written: dict[str, Any] = {k: v for k, v in cfg.to_json().items() if k not in PATH_FIELDS}
    written["out"] = "."
    if cfg.experiment == "graph":
        gexp = synthgen.make_graph_experiment(
            cfg.graph_nodes, cfg.attach_m, cfg.edge_overlap, cfg.seed, cfg.n_train_coupled,
            cfg.n_train_uncoupled, cfg.n_eval, cfg.n_eval_coupled,
        )
        for stage, views in (("train", gexp.train), ("eval", gexp.eval)):
            save_profiles(views.aux, out / f"aux_{stage}.jsonl")
            save_profiles(views.tgt, out / f"tgt_{stage}.jsonl")
            save_ground_truth(views.gt, out / f"gt_{stage}.csv")
        synthgen.write_graph_views(gexp.aux_graph, gexp.tgt_graph, out)
        written.update(experiment="graph", attributes="graph", aux_edges="aux_edges.txt",
                       tgt_edges="tgt_edges.txt", gazetteer=None, names=None, organizations=None,
                       sentiment_corpus=None, lda_corpus=None, edge_overlap=cfg.edge_overlap)
    else:
        exp = synthgen.make_experiment(
            cfg.preset, cfg.seed, cfg.n_train_coupled, cfg.n_train_uncoupled, cfg.n_eval, cfg.n_eval_coupled,
        )
        files = synthgen.write_experiment(exp, out)
        written.update({k: v for k, v in files.items() if k in PATH_FIELDS})
    # a ready-to-use config for the following stages
    (out / "config.json").write_text(json.dumps(written, indent=2, sort_keys=True) + "\n")
    files = sorted(str(written[k]) for k in PATH_FIELDS if written.get(k))
    _write_json(cfg, out / "synth.json", {"command": "synth", "files": files})
    log.info("synthetic %s data written to %s", cfg.experiment, out)


def cmd_train(cfg: RunConfig) -> None:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    aux, tgt, gt = _datasets(cfg, "train")
    res = _lookup_resources(cfg)
    if cfg.lda_corpus is not None:
        corpus = _need(cfg.path("lda_corpus"), "lda_corpus").read_text(encoding="utf-8").splitlines()
        res.lda = nlp.train_lda([d for d in corpus if d.strip()], K=cfg.lda_topics,
                                iterations=cfg.lda_iterations, seed=cfg.seed)
        _write_json(cfg, out / "lda.json", res.lda.to_json())
    if cfg.sentiment_corpus is not None:
        res.sentiment = nlp.train_sentiment(
            nlp.load_sentiment_corpus(_need(cfg.path("sentiment_corpus"), "sentiment_corpus")))
        _write_json(cfg, out / "sentiment.json", res.sentiment.to_json())
    ts = build_training_set(gt, aux, tgt, res, cfg.jobs)
    model = train_model(ts, cfg.model_kind, seed=cfg.seed, attributes=attribute_set(cfg.attributes))
    _write_json(cfg, out / "model.json", model.to_json())
    width = max(len(a) for a in model.attributes)
    for attr, w in model.weight_table().items():
        print(f"{attr:<{width}}  {w:+.6f}")
    print(f"{'bias':<{width}}  {model.bias:+.6f}")


def _surface(cfg: RunConfig):
    aux, tgt, gt = _datasets(cfg, "eval")
    return evaluation_surface(aux, tgt, _trained_resources(cfg), cfg.jobs), gt


def cmd_match(cfg: RunConfig) -> None:
    model = _model(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    surface, _ = _surface(cfg)
    assignment = match_profiles(surface.scores(model))
    save_assignment(assignment, out / "assignment.csv")
    _write_json(cfg, out / "match.json", {"command": "match", "matches": len(assignment),
                                           "total_score": assignment.total_score})
    log.info("%d matches written to %s", len(assignment), out / "assignment.csv")


def cmd_eval(cfg: RunConfig) -> None:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.victims > 0:
        model = _model(cfg)
        surface, gt = _surface(cfg)
        Z = surface.scores(model)
        pool = coupled_target_pool(Z.rows, Z.cols, gt)
        victims = pool[: min(cfg.victims, len(pool))]
        result = targeted_attack(victims, None, set(Z.cols), model, None, gt, cfg.threshold, cfg.runs,
                                 cfg.seed, Z=Z)
        curve = result.curve
        payload = {"method": "framework", "attack": "targeted", "victims": len(victims), **result.to_json()}
    else:
        path = cfg.product("assignment", "assignment.csv")
        if not path.exists():
            raise CliError(f"assignment file not found: {path} (run 'match' first)")
        assignment = load_assignment(path)
        aux, tgt, gt = _datasets(cfg, "eval")
        unknown = [p for p in assignment.matches if p[0] not in aux or p[1] not in tgt]
        if unknown:
            raise CliError(f"{path}: pair {unknown[0]} is not in the evaluation datasets")
        gt = gt.restrict(aux.ids, tgt.ids)
        curve = pr_sweep(assignment, gt)
        thr = curve.intersection_threshold if cfg.threshold == INTERSECTION else float(cfg.threshold)
        payload = {"method": "framework", "attack": "global", "threshold": thr,
                   "metrics": evaluate(assignment, gt, thr).to_json()}
    payload["threshold_rule"] = _threshold_label(cfg)
    _write_json(cfg, out / "metrics.json", payload)
    save_curve(curve, out / "pr_curve.csv")
    m = payload["metrics"]
    print(f"precision {m['precision']:.4f}  recall {m['recall']:.4f}  accuracy {m['accuracy']:.4f}")


def cmd_graphsplit(cfg: RunConfig) -> None:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    if cfg.graph is not None:
        g = load_edge_list(_need(cfg.path("graph"), "graph"))
    else:
        g = generate_synthetic_graph(cfg.graph_nodes, cfg.attach_m, cfg.seed)
    g_aux, g_tgt = split_graph(g, cfg.edge_overlap, 1.0, seed=cfg.seed)
    save_edge_list(g_aux, out / "aux_edges.txt")
    save_edge_list(g_tgt, out / "tgt_edges.txt")
    shared = len(set(g_aux.edges()) & set(g_tgt.edges()))
    _write_json(cfg, out / "graphsplit.json", {
        "command": "graphsplit", "nodes": len(g.nodes), "edges": g.num_edges,
        "aux_edges": g_aux.num_edges, "tgt_edges": g_tgt.num_edges, "shared_edges": shared,
    })


def cmd_sweep(cfg: RunConfig) -> None:
    model = _model(cfg)
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    surface, gt = _surface(cfg)
    points = size_sweep(model, surface, gt, cfg.sizes, cfg.threshold, cfg.seed)
    with open(out / "sweep.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["size", "subsets", "threshold", "precision", "recall", "accuracy"])
        for p in points:
            w.writerow([p.size, p.subsets, repr(p.threshold), repr(p.precision), repr(p.recall), repr(p.accuracy)])
    _write_json(cfg, out / "sweep.json", {"method": "framework", "points": [asdict(p) for p in points]})
    for p in points:
        print(f"N={p.size:<5d} precision {p.precision:.4f}  recall {p.recall:.4f}  accuracy {p.accuracy:.4f}")


def cmd_baseline(cfg: RunConfig) -> None:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    res = _trained_resources(cfg)
    aux, tgt, gt = _datasets(cfg, "train")
    ts = build_training_set(gt, aux, tgt, res, cfg.jobs)
    bm = baselines.train_baseline(cfg.baseline, ts, seed=cfg.seed, jobs=cfg.jobs)
    surface, gt_e = _surface(cfg)
    pred = baselines.classify_grid(bm, surface.aux_ids, surface.tgt_ids, surface.sims, cfg.cutoff)
    metrics = baselines.evaluate_baseline(pred, gt_e.restrict(surface.aux_ids, surface.tgt_ids))
    _write_json(cfg, out / f"baseline_{cfg.baseline}.json", {
        "method": f"baseline-{cfg.baseline}", "cutoff": cfg.cutoff, "model": bm.metadata(),
        "metrics": metrics.to_json(),
    })
    print(f"baseline-{cfg.baseline}: precision {metrics.precision:.4f}  recall {metrics.recall:.4f}")


COMMANDS = {
    "synth": cmd_synth, "train": cmd_train, "match": cmd_match, "eval": cmd_eval,
    "graphsplit": cmd_graphsplit, "sweep": cmd_sweep, "baseline": cmd_baseline,
}


def _threshold_arg(text: str) -> float | str:
    if text == INTERSECTION:
        return text
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number or {INTERSECTION!r}") from None
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError("threshold must lie in [0, 1]")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--seed", type=int)
    common.add_argument("--attributes", choices=sorted(ATTRIBUTE_SETS))
    common.add_argument("--model", choices=("logistic", "svm"))
    common.add_argument("--threshold", type=_threshold_arg)
    common.add_argument("--jobs", type=int)
    common.add_argument("--out", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="profilematch", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    p = sub.add_parser("synth", parents=[common], help="generate a synthetic experiment")
    p.add_argument("--preset", choices=sorted(synthgen.PRESETS))
    p.add_argument("--experiment", choices=("profiles", "graph"))
    p.add_argument("--edge-overlap", dest="edge_overlap", type=float)
    sub.add_parser("train", parents=[common], help="fit topic, sentiment and matching models")
    sub.add_parser("match", parents=[common], help="solve the global assignment")
    p = sub.add_parser("eval", parents=[common], help="precision/recall/accuracy of an attack")
    p.add_argument("--victims", type=int, help="run a targeted attack on this many victims")
    p.add_argument("--runs", type=int)
    p = sub.add_parser("graphsplit", parents=[common], help="split a graph into two overlapping views")
    p.add_argument("--edge-overlap", dest="edge_overlap", type=float)
    p = sub.add_parser("sweep", parents=[common], help="precision/recall against evaluation size")
    p.add_argument("--sizes", type=int, nargs="+")
    p = sub.add_parser("baseline", parents=[common], help="evaluate a pairwise classifier")
    p.add_argument("--kind", dest="baseline", choices=baselines.KINDS)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = _resolve(args)
        COMMANDS[args.command](cfg)
    except (CliError, ValueError, KeyError, OSError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"profilematch {args.command}: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
