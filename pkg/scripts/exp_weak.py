"""Strong versus weak identifiers on one data set.

Trains one model per attribute selector on identical training pairs and
evaluates each on the same similarity surface, so differences come only
from the attributes used.

    python3 scripts/exp_weak.py --preset medium --selectors all strong weak
"""

from __future__ import annotations

import argparse
import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from profilematch import synthgen
from profilematch.learner import build_training_set
from profilematch.pipeline import evaluation_surface, run_synthetic, synth_resources


@dataclass
class WeakConfig:
    preset: str = "medium"
    seed: int = 0
    selectors: list[str] = field(default_factory=lambda: ["all", "strong", "weak"])
    model: str = "logistic"
    out: Path = Path("results/weak.json")


def run(cfg: WeakConfig) -> list[dict]:
    exp = synthgen.make_experiment(cfg.preset, seed=cfg.seed)
    res = synth_resources(exp, seed=cfg.seed)
    ts = build_training_set(exp.train.gt, exp.train.aux, exp.train.tgt, res)
    surface = evaluation_surface(exp.eval.aux, exp.eval.tgt, res)
    rows = []
    for sel in cfg.selectors:
        o = run_synthetic(exp, sel, cfg.model, cfg.seed, res, surface=surface, training_set=ts)
        r = o.result
        rows.append({"attributes": sel, "accuracy": r.accuracy, "precision": r.precision, "recall": r.recall,
                     "weights": o.model.weight_table()})
        print(f"{sel:<7} A {r.accuracy:.3f}  P {r.precision:.3f}  R {r.recall:.3f}")
    return rows


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--preset", default="medium", choices=sorted(synthgen.PRESETS))
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--selectors", nargs="+", default=WeakConfig().selectors)
    ap.add_argument("--out", type=Path, default=WeakConfig.out)
    args = ap.parse_args()
    cfg = WeakConfig(args.preset, args.seed, args.selectors, out=args.out)
    rows = run(cfg)
    cfg.out.parent.mkdir(parents=True, exist_ok=True)
    cfg.out.write_text(json.dumps({"config": {**asdict(cfg), "out": str(cfg.out)}, "runs": rows}, indent=2))


if __name__ == "__main__":
    main()
