"""Precision of the matching framework and of pairwise classifiers as the
evaluation set grows.

The framework solves a one-to-one assignment, so its precision barely moves
with size; classifiers judge every pair on its own and collect more false
positives as the number of candidate pairs grows quadratically.

    python3 scripts/exp_size_sweep.py --preset medium --baselines knn cart forest svm
"""

from __future__ import annotations

import argparse
import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from profilematch import baselines, synthgen
from profilematch.learner import build_training_set
from profilematch.pipeline import evaluation_surface, run_synthetic, size_partitions, size_sweep, synth_resources


@dataclass
class SweepConfig:
    preset: str = "medium"
    seed: int = 0
    sizes: list[int] = field(default_factory=lambda: [100, 200, 500, 1000])
    baselines: list[str] = field(default_factory=lambda: list(baselines.KINDS))
    cutoff: float = 0.5
    out: Path = Path("results/size_sweep.csv")


def run(cfg: SweepConfig) -> list[tuple[str, int, float, float]]:
    exp = synthgen.make_experiment(cfg.preset, seed=cfg.seed)
    res = synth_resources(exp, seed=cfg.seed)
    ts = build_training_set(exp.train.gt, exp.train.aux, exp.train.tgt, res)
    surface = evaluation_surface(exp.eval.aux, exp.eval.tgt, res)
    gt = exp.eval.gt
    model = run_synthetic(exp, "all", seed=cfg.seed, resources=res, surface=surface, training_set=ts).model
    rows = [("framework", p.size, p.precision, p.recall) for p in size_sweep(model, surface, gt, cfg.sizes,
                                                                            seed=cfg.seed)]
    for kind in cfg.baselines:
        bm = baselines.train_baseline(kind, ts, seed=cfg.seed)
        for size in cfg.sizes:
            scores = []
            for aux, tgt in size_partitions(surface, gt, size, cfg.seed):
                sub = surface.subset(aux, tgt)
                pred = baselines.classify_grid(bm, sub.aux_ids, sub.tgt_ids, sub.sims, cfg.cutoff)
                m = baselines.evaluate_baseline(pred, gt.restrict(aux, tgt))
                scores.append((m.precision, m.recall))
            p, r = np.mean(scores, axis=0)
            rows.append((kind, size, float(p), float(r)))
    for method, size, p, r in rows:
        print(f"{method:<10} N={size:<5d} precision {p:.4f}  recall {r:.4f}")
    return rows


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="medium", choices=sorted(synthgen.PRESETS))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--sizes", nargs="+", type=int, default=SweepConfig().sizes)
    ap.add_argument("--baselines", nargs="+", choices=baselines.KINDS, default=list(baselines.KINDS))
    ap.add_argument("--out", type=Path, default=SweepConfig.out)
    args = ap.parse_args()
    cfg = SweepConfig(args.preset, args.seed, args.sizes, args.baselines, out=args.out)
    rows = run(cfg)
    cfg.out.parent.mkdir(parents=True, exist_ok=True)
    with open(cfg.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["method", "size", "precision", "recall"])
        w.writerows(rows)


if __name__ == "__main__":
    main()
