"""Global attack on the low, medium and high noise presets, all attributes.

    python3 scripts/exp_presets.py --seeds 0 1 2 --out results/presets.json
"""

from __future__ import annotations

import argparse
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

from profilematch import synthgen
from profilematch.pipeline import run_synthetic, synth_resources


@dataclass
class PresetsConfig:
    presets: list[str] = field(default_factory=lambda: ["low", "medium", "high"])
    seeds: list[int] = field(default_factory=lambda: [0])
    model: str = "logistic"
    lda_topics: int = 20
    lda_iterations: int = 1000
    out: Path = Path("results/presets.json")


def run(cfg: PresetsConfig) -> list[dict]:
    rows = []
    for name in cfg.presets:
        for seed in cfg.seeds:
            exp = synthgen.make_experiment(name, seed=seed)
            res = synth_resources(exp, cfg.lda_topics, cfg.lda_iterations, seed)
            outcome = run_synthetic(exp, "all", cfg.model, seed, res)
            r = outcome.result
            rows.append({"preset": name, "seed": seed, "threshold": r.threshold, "precision": r.precision,
                         "recall": r.recall, "accuracy": r.accuracy, "seconds": sum(outcome.timings.values())})
            print(f"{name:<7} seed {seed}: A {r.accuracy:.3f}  P {r.precision:.3f}  R {r.recall:.3f}"
                  f"  (threshold {r.threshold:.2f})")
    return rows


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--presets", nargs="+", default=PresetsConfig().presets)
    ap.add_argument("--seeds", nargs="+", type=int, default=[0])
    ap.add_argument("--model", choices=("logistic", "svm"), default="logistic")
    ap.add_argument("--out", type=Path, default=PresetsConfig.out)
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(message)s")
    cfg = PresetsConfig(presets=args.presets, seeds=args.seeds, model=args.model, out=args.out)
    rows = run(cfg)
    cfg.out.parent.mkdir(parents=True, exist_ok=True)
    cfg.out.write_text(json.dumps({"config": {**asdict(cfg), "out": str(cfg.out)}, "runs": rows}, indent=2))


if __name__ == "__main__":
    main()
